use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::buildings::{common_prefix, word_distance, A2Building, BuildingModel, LatticeClass, TreeBuilding, Word};
use crate::coxeter::{Coweight, CoxeterData};
use crate::netwalk::{chi_square, cumulative, par_samples, sample_cumulative, ChiSquare, RngStream, WalkRng};
use crate::rational::{format, to_f64, Q};
use crate::{Error, Result};

/// `p(x, y) = c_{σ(x,y)} / N_{σ(x,y)}` for a finitely supported step law
/// `c` on nonzero dominant coweights.
#[derive(Debug, Clone)]
pub struct IsotropicKernel {
    c: Vec<(Coweight, Q)>,
    cum: Vec<f64>,
}

impl IsotropicKernel {
    pub fn new(c: Vec<(Coweight, Q)>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput("empty step law".into()));
        }
        let mut total = Q::zero();
        for (lambda, w) in &c {
            if !lambda.is_dominant() {
                return Err(Error::NonDominant(lambda.coords.clone()));
            }
            if lambda.is_zero() || !w.is_positive() {
                return Err(Error::InvalidInput(format!("bad step weight {} at {lambda}", format(w))));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidInput(format!("step law sums to {}", format(&total))));
        }
        let cum = cumulative(c.iter().map(|(_, w)| to_f64(w)));
        Ok(Self { c, cum })
    }

    /// `c` uniform on the given coweights.
    pub fn uniform(support: Vec<Coweight>) -> Result<Self> {
        let w = Q::new(1.into(), (support.len().max(1) as i64).into());
        Self::new(support.into_iter().map(|l| (l, w.clone())).collect())
    }

    pub fn weights(&self) -> &[(Coweight, Q)] {
        &self.c
    }

    pub fn weight(&self, lambda: &Coweight) -> Q {
        self.c.iter().find(|(l, _)| l == lambda).map(|(_, w)| w.clone()).unwrap_or_else(Q::zero)
    }

    /// `c_λ = c_{ι(λ)}` for every `λ` in the support.
    pub fn is_symmetric(&self, cox: &CoxeterData) -> bool {
        self.c.iter().all(|(l, w)| self.weight(&cox.iota(l)) == *w)
    }

    /// `(c + c∘ι)/2`.
    pub fn symmetrized(&self, cox: &CoxeterData) -> Result<Self> {
        let mut out: Vec<(Coweight, Q)> = Vec::new();
        let half = Q::new(1.into(), 2.into());
        for (l, w) in &self.c {
            for target in [l.clone(), cox.iota(l)] {
                match out.iter_mut().find(|(m, _)| *m == target) {
                    Some((_, acc)) => *acc += w * &half,
                    None => out.push((target, w * &half)),
                }
            }
        }
        Self::new(out)
    }

    pub fn p<B: BuildingModel>(&self, model: &B, x: &B::Vertex, y: &B::Vertex) -> Result<Q> {
        let s = model.sigma(x, y)?;
        let w = self.weight(&s);
        if w.is_zero() {
            return Ok(w);
        }
        Ok(w / model.coxeter().n_lambda(&s)?)
    }

    /// `Σ_y p(x, y)`, one when every `V_λ(x)` in the support is complete.
    pub fn row_sum<B: BuildingModel>(&self, model: &B, x: &B::Vertex) -> Result<Q> {
        let mut total = Q::zero();
        for (l, w) in &self.c {
            let size = Q::from_integer((model.v_lambda(x, l)?.len() as i64).into());
            total += w * size / model.coxeter().n_lambda(l)?;
        }
        Ok(total)
    }

    pub fn sample_lambda(&self, rng: &mut WalkRng) -> &Coweight {
        &self.c[sample_cumulative(&self.cum, rng)].0
    }
}

/// A building on which isotropic walks can be run and their exits read.
pub trait HittingModel: BuildingModel {
    /// A uniform element of `V_λ(x)`.
    fn sample_in_sphere(&self, x: &Self::Vertex, lambda: &Coweight, rng: &mut WalkRng) -> Result<Self::Vertex>;

    /// The `y ∈ V_λ(o)` with `z ∈ Ω_o(y)`-direction, once `z` is past
    /// level `λ`.
    fn exit_cylinder(&self, o: &Self::Vertex, z: &Self::Vertex, lambda: &Coweight) -> Result<Option<Self::Vertex>>;

    fn vertex_label(&self, v: &Self::Vertex) -> String;

    /// Label attached to hitting reports.
    fn hitting_label(&self) -> &'static str {
        "statistical"
    }
}

/// The vertex at distance `k` from `o` on the geodesic to `z`.
fn tree_geodesic_point(o: &[u8], z: &[u8], k: usize) -> Word {
    let c = common_prefix(o, z);
    let up = o.len() - c;
    if k <= up {
        o[..o.len() - k].to_vec()
    } else {
        z[..c + k - up].to_vec()
    }
}

impl HittingModel for TreeBuilding {
    fn sample_in_sphere(&self, x: &Word, lambda: &Coweight, rng: &mut WalkRng) -> Result<Word> {
        let k = lambda.coords[0] as usize;
        let mut y = x.clone();
        let mut back: Option<Word> = None;
        for _ in 0..k {
            let next = loop {
                let cand = self.mul_letter(&y, rng.gen_range(0..self.degree() as u8));
                if back.as_ref() != Some(&cand) {
                    break cand;
                }
            };
            back = Some(std::mem::replace(&mut y, next));
        }
        Ok(y)
    }

    fn exit_cylinder(&self, o: &Word, z: &Word, lambda: &Coweight) -> Result<Option<Word>> {
        let k = lambda.coords[0] as usize;
        Ok((word_distance(o, z) >= k).then(|| tree_geodesic_point(o, z, k)))
    }

    fn vertex_label(&self, v: &Word) -> String {
        self.word_string(v)
    }
}

impl HittingModel for A2Building {
    fn sample_in_sphere(&self, x: &LatticeClass, lambda: &Coweight, rng: &mut WalkRng) -> Result<LatticeClass> {
        match lambda.coords.as_slice() {
            [1, 0] => self.random_neighbor(x, 1, rng),
            [0, 1] => self.random_neighbor(x, 2, rng),
            _ => Err(Error::InvalidInput(format!(
                "isotropic steps of size {lambda} are not supported on the lattice model"
            ))),
        }
    }

    /// Only the base vertex is supported as `o`.
    fn exit_cylinder(&self, o: &LatticeClass, z: &LatticeClass, lambda: &Coweight) -> Result<Option<LatticeClass>> {
        if *o != self.base() {
            return Err(Error::InvalidInput("hitting statistics are taken from the base vertex".into()));
        }
        let s = self.sigma(o, z)?;
        if lambda.le_coords(&s) {
            Ok(Some(self.point_toward(z, lambda)?))
        } else {
            Ok(None)
        }
    }

    fn vertex_label(&self, v: &LatticeClass) -> String {
        v.label()
    }

    fn hitting_label(&self) -> &'static str {
        "statistical, truncation-limited"
    }
}

/// Exit counts per cylinder `Ω_o(y)`, `y ∈ V_λ(o)`.
#[derive(Debug, Clone, Serialize)]
pub struct HittingStats {
    pub label: String,
    pub level: Coweight,
    pub samples: usize,
    pub resolved: u64,
    pub unresolved: u64,
    /// More than 1% of walks did not exit within the horizon.
    pub flagged: bool,
    pub cylinders: Vec<String>,
    pub counts: Vec<u64>,
    pub chi_square: ChiSquare,
}

impl HittingStats {
    pub fn passes(&self, alpha: f64) -> bool {
        !self.flagged && self.chi_square.passes(alpha)
    }

    pub fn to_csv(&self) -> String {
        let expected = 1.0 / self.counts.len() as f64;
        let mut out = String::from("cylinder,count,frequency,expected\n");
        for (c, n) in self.cylinders.iter().zip(&self.counts) {
            let f = if self.resolved > 0 { *n as f64 / self.resolved as f64 } else { 0.0 };
            out.push_str(&format!("{c},{n},{f},{expected}\n"));
        }
        out
    }
}

/// Runs the isotropic walk from `o` until it passes level `λ` and tests the
/// exit cylinders against the uniform law `1/N_λ`.
#[allow(clippy::too_many_arguments)]
pub fn boundary_hitting_mc<B: HittingModel>(
    model: &B,
    kernel: &IsotropicKernel,
    o: &B::Vertex,
    level: &Coweight,
    samples: usize,
    horizon: u64,
    workers: usize,
    stream: &RngStream,
) -> Result<HittingStats> {
    let cylinders = model.v_lambda(o, level)?;
    let index: HashMap<&B::Vertex, usize> = cylinders.iter().enumerate().map(|(i, y)| (y, i)).collect();
    let exits =
        par_samples(samples, workers, stream, |_, rng| -> Result<Option<usize>> {
            let mut z = o.clone();
            for _ in 0..horizon {
                let l = kernel.sample_lambda(rng);
                z = model.sample_in_sphere(&z, l, rng)?;
                if let Some(y) = model.exit_cylinder(o, &z, level)? {
                    return index.get(&y).copied().map(Some).ok_or_else(|| {
                        Error::InvalidInput(format!("exit {} outside V_{level}", model.vertex_label(&y)))
                    });
                }
            }
            Ok(None)
        });
    let mut counts = vec![0u64; cylinders.len()];
    let mut unresolved = 0u64;
    for e in exits {
        match e? {
            Some(i) => counts[i] += 1,
            None => unresolved += 1,
        }
    }
    let resolved = counts.iter().sum();
    let probs = vec![1.0 / cylinders.len() as f64; cylinders.len()];
    let chi = chi_square(&counts, &probs);
    Ok(HittingStats {
        label: model.hitting_label().into(),
        level: level.clone(),
        samples,
        resolved,
        unresolved,
        flagged: unresolved as f64 > 0.01 * samples as f64,
        cylinders: cylinders.iter().map(|y| model.vertex_label(y)).collect(),
        counts,
        chi_square: chi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::CartanType;
    use crate::rational::{q_frac, q_int};

    fn lam(c: &[i64]) -> Coweight {
        Coweight::new(c.to_vec())
    }

    #[test]
    fn kernel_validation_and_symmetry() {
        assert!(IsotropicKernel::new(vec![(lam(&[1, 0]), q_frac(1, 2))]).is_err());
        assert!(IsotropicKernel::new(vec![(lam(&[0, 0]), q_int(1))]).is_err());
        let cox = CoxeterData::uniform(CartanType::A2, 2).unwrap();
        let k = IsotropicKernel::new(vec![(lam(&[1, 0]), q_int(1))]).unwrap();
        assert!(!k.is_symmetric(&cox));
        let s = k.symmetrized(&cox).unwrap();
        assert!(s.is_symmetric(&cox));
        assert_eq!(s.weight(&lam(&[0, 1])), q_frac(1, 2));
        let u = IsotropicKernel::uniform(vec![lam(&[1, 0]), lam(&[0, 1])]).unwrap();
        assert!(u.is_symmetric(&cox));
    }

    #[test]
    fn rows_sum_to_one() {
        let t = TreeBuilding::new(2).unwrap();
        let k = IsotropicKernel::new(vec![(lam(&[1]), q_frac(1, 3)), (lam(&[2]), q_frac(2, 3))]).unwrap();
        assert_eq!(k.row_sum(&t, &vec![0, 1]).unwrap(), q_int(1));
        assert_eq!(k.p(&t, &vec![], &vec![0, 1]).unwrap(), q_frac(1, 9));
        let b = crate::buildings::A2Ball::build(2, 2).unwrap();
        let u = IsotropicKernel::uniform(vec![lam(&[1, 0]), lam(&[0, 1])]).unwrap();
        assert_eq!(u.row_sum(&b, &b.base().clone()).unwrap(), q_int(1));
        let y = b.building().lambda2_neighbor(b.base(), 0).unwrap();
        assert_eq!(u.p(&b, b.base(), &y).unwrap(), q_frac(1, 14));
    }

    #[test]
    fn tree_geodesic_points() {
        assert_eq!(tree_geodesic_point(&[0, 1], &[2, 1, 0], 1), vec![0]);
        assert_eq!(tree_geodesic_point(&[0, 1], &[2, 1, 0], 3), vec![2]);
        assert_eq!(tree_geodesic_point(&[], &[2, 1, 0], 2), vec![2, 1]);
    }

    #[test]
    fn tree_sphere_sampling_stays_on_sphere() {
        let t = TreeBuilding::new(3).unwrap();
        let mut rng = RngStream::new(4).rng();
        for _ in 0..200 {
            let y = t.sample_in_sphere(&vec![1, 2], &lam(&[3]), &mut rng).unwrap();
            assert_eq!(word_distance(&[1, 2], &y), 3);
        }
    }

    #[test]
    fn tree_hitting_is_uniform() {
        let t = TreeBuilding::new(2).unwrap();
        let srw = IsotropicKernel::uniform(vec![lam(&[1])]).unwrap();
        let s = RngStream::new(8);
        for k in 1..=3 {
            let h = boundary_hitting_mc(&t, &srw, &t.root(), &lam(&[k]), 20_000, 1000, 4, &s).unwrap();
            assert_eq!(h.counts.len(), [3, 6, 12][k as usize - 1]);
            assert_eq!(h.unresolved, 0);
            assert!(h.passes(0.01), "{h:?}");
        }
        let far = boundary_hitting_mc(&t, &srw, &vec![0, 1], &lam(&[2]), 5000, 1000, 2, &s).unwrap();
        assert!(far.passes(0.01));
        assert!(far.to_csv().starts_with("cylinder,count"));
    }

    #[test]
    fn a2_hitting_small() {
        let b = A2Building::new(2).unwrap();
        let k = IsotropicKernel::uniform(vec![lam(&[1, 0]), lam(&[0, 1])]).unwrap();
        let h = boundary_hitting_mc(&b, &k, &b.base(), &lam(&[1, 1]), 4000, 1000, 4, &RngStream::new(1)).unwrap();
        assert_eq!(h.counts.len(), 42);
        assert_eq!(h.label, "statistical, truncation-limited");
        assert!(h.passes(0.01), "{h:?}");
    }
}
