//! Root-system and Weyl-group combinatorics in exact rational arithmetic.
//!
//! Everything needed to evaluate the sphere sizes of a regular affine
//! building lives here:
//!
//! ```text
//! N_λ = W₀(q⁻¹) / Stab_{W₀}(λ)(q⁻¹) · χ(λ),   χ(λ) = Π_{α∈Φ⁺} q_α^{⟨λ,α⟩}
//! ```

mod root_system;
mod weyl;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use root_system::{CartanType, RootSystem};
pub use weyl::{enumerate_weyl, WeylElement, WeylGroup};

use crate::rational::{format, q_int, q_pow, Q};
use crate::{Error, Result};

/// A coweight in fundamental-coweight coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coweight {
    pub coords: Vec<i64>,
}

impl Coweight {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Self { coords: vec![0; rank] }
    }

    /// The fundamental coweight `λ_i`, `i` 1-based.
    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut coords = vec![0; rank];
        coords[i - 1] = 1;
        Self { coords }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn is_dominant(&self) -> bool {
        self.coords.iter().all(|&c| c >= 0)
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le_coords(&self, other: &Coweight) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self { coords: self.coords.iter().map(|c| c * k).collect() }
    }

    /// Sum of the coordinates; the graph distance in the `Ã₁`/`Ã₂` models.
    pub fn level(&self) -> i64 {
        self.coords.iter().sum()
    }
}

impl fmt::Display for Coweight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Add for &Coweight {
    type Output = Coweight;
    fn add(self, rhs: &Coweight) -> Coweight {
        Coweight { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Coweight {
    type Output = Coweight;
    fn sub(self, rhs: &Coweight) -> Coweight {
        Coweight { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Coweight {
    type Output = Coweight;
    fn neg(self) -> Coweight {
        Coweight { coords: self.coords.iter().map(|c| -c).collect() }
    }
}

/// Thickness parameters `q_0, …, q_n`: each panel of cotype `i` lies in
/// `q_i + 1` chambers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThicknessVector {
    pub q: Vec<u64>,
}

impl ThicknessVector {
    /// Validates against a root system: one entry per affine node, all
    /// positive, and equal on nodes whose roots are W₀-conjugate (node 0
    /// stands for the highest root).
    pub fn new(rs: &RootSystem, q: Vec<u64>) -> Result<Self> {
        let n = rs.rank();
        if q.len() != n + 1 {
            return Err(Error::InvalidThickness(format!("expected {} entries, got {}", n + 1, q.len())));
        }
        if q.contains(&0) {
            return Err(Error::InvalidThickness("entries must be positive".into()));
        }
        for i in 1..=n {
            let class = rs.simple_root_class(i);
            if q[i] != q[class] {
                return Err(Error::InvalidThickness(format!("q_{i} differs from conjugate q_{class}")));
            }
        }
        let top = rs.highest_root_class();
        if q[0] != q[top] {
            return Err(Error::InvalidThickness(format!("q_0 differs from conjugate q_{top}")));
        }
        Ok(Self { q })
    }

    pub fn uniform(rs: &RootSystem, q: u64) -> Result<Self> {
        Self::new(rs, vec![q; rs.rank() + 1])
    }

    /// `q_i`, `i` in `0..=n`.
    pub fn get(&self, i: usize) -> u64 {
        self.q[i]
    }

    /// `q_w = q_{i_1} ⋯ q_{i_k}` over a word.
    pub fn q_word(&self, word: &[usize]) -> Q {
        word.iter().fold(Q::one(), |acc, &i| acc * q_int(self.q[i] as i64))
    }
}

/// `U(q⁻¹) = Σ_{w∈U} q_w⁻¹`, using each element's cached reduced word.
pub fn poincare_sum(elements: &[WeylElement], q: &ThicknessVector) -> Q {
    elements.iter().map(|w| q.q_word(w.word()).recip()).fold(Q::zero(), |a, b| a + b)
}

/// `χ(λ) = Π_{α∈Φ⁺} q_α^{⟨λ,α⟩}`; multiplicative in λ.
pub fn chi(coweight: &Coweight, rs: &RootSystem, q: &ThicknessVector) -> Q {
    rs.positive_roots()
        .iter()
        .enumerate()
        .map(|(idx, alpha)| {
            let q_alpha = q_int(q.get(rs.positive_root_class(idx)) as i64);
            q_pow(&q_alpha, RootSystem::pairing(&coweight.coords, alpha))
        })
        .fold(Q::one(), |a, b| a * b)
}

/// `N_λ = W₀(q⁻¹) / Stab_{W₀}(λ)(q⁻¹) · χ(λ)` for dominant λ.
pub fn n_lambda(coweight: &Coweight, group: &WeylGroup, rs: &RootSystem, q: &ThicknessVector) -> Result<Q> {
    if !coweight.is_dominant() {
        return Err(Error::NonDominant(coweight.coords.clone()));
    }
    let total = poincare_sum(group.elements(), q);
    let stab = poincare_sum(&group.stabilizer(&coweight.coords), q);
    Ok(total / stab * chi(coweight, rs, q))
}

/// Bundles a root system, its Weyl group and thickness parameters.
#[derive(Debug, Clone)]
pub struct CoxeterData {
    pub root_system: RootSystem,
    pub group: WeylGroup,
    pub thickness: ThicknessVector,
}

/// JSON form `{"type": "A2", "rank": 2, "q": [2, 2, 2]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoxeterConfig {
    #[serde(rename = "type")]
    pub cartan_type: String,
    pub rank: usize,
    pub q: Vec<u64>,
}

impl CoxeterData {
    pub fn new(cartan_type: CartanType, q: Vec<u64>) -> Result<Self> {
        let root_system = RootSystem::new(cartan_type);
        let group = enumerate_weyl(&root_system)?;
        let thickness = ThicknessVector::new(&root_system, q)?;
        Ok(Self { root_system, group, thickness })
    }

    pub fn uniform(cartan_type: CartanType, q: u64) -> Result<Self> {
        Self::new(cartan_type, vec![q; cartan_type.rank() + 1])
    }

    pub fn from_config(config: &CoxeterConfig) -> Result<Self> {
        let cartan_type: CartanType = config.cartan_type.parse()?;
        if cartan_type.rank() != config.rank {
            return Err(Error::UnsupportedType(format!(
                "{cartan_type} has rank {}, config says {}",
                cartan_type.rank(),
                config.rank
            )));
        }
        Self::new(cartan_type, config.q.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_config(&serde_json::from_str(text)?)
    }

    pub fn rank(&self) -> usize {
        self.root_system.rank()
    }

    pub fn chi(&self, coweight: &Coweight) -> Q {
        chi(coweight, &self.root_system, &self.thickness)
    }

    pub fn n_lambda(&self, coweight: &Coweight) -> Result<Q> {
        n_lambda(coweight, &self.group, &self.root_system, &self.thickness)
    }

    /// `N_λ` as an integer; errors if the formula produced a non-integer.
    pub fn n_lambda_count(&self, coweight: &Coweight) -> Result<u64> {
        let n = self.n_lambda(coweight)?;
        if !n.is_integer() || !n.is_positive() {
            return Err(Error::InvalidThickness(format!("N_{coweight} = {} is not a positive integer", format(&n))));
        }
        u64::try_from(n.to_integer()).map_err(|_| Error::Overflow(format!("N_{coweight}")))
    }

    pub fn iota(&self, coweight: &Coweight) -> Coweight {
        Coweight::new(self.group.iota(&coweight.coords))
    }

    /// Poincaré sum of the whole of `W₀`.
    pub fn weyl_poincare(&self) -> Q {
        poincare_sum(self.group.elements(), &self.thickness)
    }

    /// Rows `(λ, χ(λ), N_λ)` for every dominant λ with coordinates `≤ bound`.
    pub fn table(&self, bound: i64) -> Result<Vec<TableRow>> {
        let mut rows = Vec::new();
        for coords in coordinate_box(self.rank(), bound) {
            let lambda = Coweight::new(coords);
            rows.push(TableRow { chi: self.chi(&lambda), n_lambda: self.n_lambda(&lambda)?, coweight: lambda });
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub coweight: Coweight,
    pub chi: Q,
    pub n_lambda: Q,
}

/// CSV with header `lambda,chi,n_lambda`; coweights are written as
/// `c1;c2;…`.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("lambda,chi,n_lambda\n");
    for row in rows {
        let coords: Vec<String> = row.coweight.coords.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{},{},{}\n", coords.join(";"), format(&row.chi), format(&row.n_lambda)));
    }
    out
}

/// All coordinate vectors in `[0, bound]^rank`, lexicographic.
pub fn coordinate_box(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=bound).map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}
