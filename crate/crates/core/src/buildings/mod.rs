//! Concrete building models: regular trees, the `Ã₂` building of
//! `PGL₃(Q_p)` with its truncated balls, and the spherical `A₂` buildings of
//! projective planes.

mod lattice;
mod spherical;
mod tree;

use std::fmt::Debug;
use std::hash::Hash;

use serde::Serialize;

pub use lattice::{
    canonicalize, is_prime, link_opposition_check, link_projection, point_toward, relative_position, valuation, A2Ball,
    A2Building, LatticeClass, SectorSegment, MAX_BALL_RADIUS, MAX_BALL_VERTICES,
};
pub use spherical::{Chamber, SphericalA2};
pub use tree::{
    ball, beta, busemann_h, common_prefix, ends_differ, is_prefix, word_distance, FreeGroupTree, IntegerLine,
    TreeBuilding, TreeEnd, Word,
};

use crate::coxeter::{Coweight, CoxeterData};
use crate::Result;

/// A building whose good vertices carry the vector distance `σ`.
pub trait BuildingModel: Sync {
    type Vertex: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn coxeter(&self) -> &CoxeterData;

    fn sigma(&self, x: &Self::Vertex, y: &Self::Vertex) -> Result<Coweight>;

    /// `V_λ(o) = {y : σ(o, y) = λ}`.
    fn v_lambda(&self, o: &Self::Vertex, lambda: &Coweight) -> Result<Vec<Self::Vertex>>;

    /// Whether `y` lies on a `σ`-geodesic from `x` to `z`.
    fn between(&self, x: &Self::Vertex, y: &Self::Vertex, z: &Self::Vertex) -> Result<bool> {
        Ok(&self.sigma(x, y)? + &self.sigma(y, z)? == self.sigma(x, z)?)
    }
}

/// The cylinder `Ω_x(y)` of boundary chambers whose sector at `x` passes
/// through `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CylinderId<V> {
    pub base: V,
    pub target: V,
}

impl<V: Clone + Eq> CylinderId<V> {
    pub fn new(base: V, target: V) -> Self {
        Self { base, target }
    }

    /// `self ⊆ other`: same base and `other.target ∈ [base, self.target]`.
    pub fn refines<B: BuildingModel<Vertex = V>>(&self, other: &Self, model: &B) -> Result<bool> {
        Ok(self.base == other.base && model.between(&self.base, &other.target, &self.target)?)
    }
}
