//! Induced walks on subsets, harmonic-function transfer and the
//! discretization of a lattice-invariant walk to a measure on the group.

mod lattice;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub use lattice::{discretize_lattice, LatticeMeasure, MeasureEntry, MomentKind};

use crate::netwalk::{linalg::SolveMethod, par_samples, Absorption, MarkovKernel, RngStream, Walk};
use crate::rational::{to_f64, Q};
use crate::{Error, Result};

/// Successive visit times `τ_k` to a subset and the visited states
/// `S_k = Z_{τ_k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingTimes<S> {
    pub tau: Vec<usize>,
    pub states: Vec<S>,
    /// Fewer visits than requested were found.
    pub truncated: bool,
}

/// `τ_{k+1} = inf{j > τ_k : Z_j ∈ Y}`, up to `wanted` visits when given.
pub fn stopping_times<S: Clone>(traj: &[S], in_y: impl Fn(&S) -> bool, wanted: Option<usize>) -> StoppingTimes<S> {
    let mut tau = Vec::new();
    let mut states = Vec::new();
    for (j, z) in traj.iter().enumerate() {
        if wanted.is_some_and(|w| tau.len() >= w) {
            break;
        }
        if in_y(z) {
            tau.push(j);
            states.push(z.clone());
        }
    }
    let truncated = wanted.is_some_and(|w| tau.len() < w);
    StoppingTimes { tau, states, truncated }
}

/// The kernel `q(x, y) = P_x(Z_{τ₁} = y)` on a subset `Y`.
#[derive(Debug, Clone)]
pub struct InducedKernel {
    /// Ambient indices of `Y`, in the kernel's state order.
    pub subset: Vec<usize>,
    pub kernel: MarkovKernel,
    pub method: SolveMethod,
}

impl InducedKernel {
    pub fn position(&self, ambient: usize) -> Option<usize> {
        self.subset.iter().position(|&x| x == ambient)
    }

    pub fn q(&self, x: usize, y: usize) -> Q {
        self.kernel.p(x, y)
    }

    /// Largest `|Σ_y q(x,y) − 1|`.
    pub fn row_sum_defect(&self) -> Q {
        (0..self.kernel.len())
            .map(|x| (self.kernel.row(x).iter().map(|(_, p)| p).sum::<Q>() - Q::one()).abs())
            .fold(Q::zero(), |a, b| if b > a { b } else { a })
    }
}

fn to_set(y: &[usize]) -> BTreeSet<usize> {
    y.iter().copied().collect()
}

/// Composes one step of `p` with absorption into `Y`.
fn first_step_then_absorb(k: &MarkovKernel, abs: &Absorption, x: usize) -> BTreeMap<usize, Q> {
    let mut row = BTreeMap::new();
    for (z, p) in k.row(x) {
        for (a, h) in &abs.probs[*z] {
            *row.entry(*a).or_insert_with(Q::zero) += p * h;
        }
    }
    row
}

/// Exact induced kernel by first-step decomposition and an absorption solve.
pub fn induced_kernel_exact(k: &MarkovKernel, y: &[usize]) -> Result<InducedKernel> {
    if y.is_empty() {
        return Err(Error::EmptySubset);
    }
    let set = to_set(y);
    if set.len() != y.len() || y.iter().any(|&v| v >= k.len()) {
        return Err(Error::InvalidInput("subset has repeated or out-of-range states".into()));
    }
    let abs = k.absorption(&set)?;
    let pos: BTreeMap<usize, usize> = y.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut rows = Vec::with_capacity(y.len());
    for &x in y {
        let leaked: Q = k.row(x).iter().map(|(z, p)| p * &abs.leaked[*z]).sum();
        if leaked.is_positive() && to_f64(&leaked) > 1e-12 {
            return Err(Error::Unreachable(format!("{} does not return to the subset", k.labels()[x])));
        }
        rows.push(first_step_then_absorb(k, &abs, x).into_iter().map(|(a, p)| (pos[&a], p)).collect());
    }
    let labels = y.iter().map(|&v| k.labels()[v].clone()).collect();
    let kernel = if abs.method.is_exact() {
        MarkovKernel::from_rows(labels, rows)?
    } else {
        MarkovKernel::from_rows_approx(labels, rows, 1e-8)?
    };
    Ok(InducedKernel { subset: y.to_vec(), kernel, method: abs.method })
}

/// Result of transferring a function on `Y` to a `P`-harmonic extension.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicTransfer {
    /// `h̃(x) = E_x[f(S₀)]` on the whole space.
    pub extension: Vec<f64>,
    /// `max_Y |h̃ − f|`.
    pub restriction_defect: f64,
    /// `max_{x ∉ Y} |P h̃(x) − h̃(x)|`.
    pub interior_defect: f64,
    /// Whether `f` is `Q`-harmonic exactly.
    pub f_is_q_harmonic: bool,
    /// `max_x |P h̃(x) − h̃(x)|`, which vanishes when `f` is `Q`-harmonic.
    pub global_defect: f64,
    pub exact: bool,
}

impl HarmonicTransfer {
    pub fn passes(&self, tol: f64) -> bool {
        self.restriction_defect <= tol
            && self.interior_defect <= tol
            && (!self.f_is_q_harmonic || self.global_defect <= tol)
    }
}

/// Builds `h̃ = Σ_y α(·, y) f(y)` with `α(x, y) = P_x(S₀ = y)` and measures
/// the defects of the transfer.
pub fn harmonic_transfer_check(k: &MarkovKernel, y: &[usize], f: &[Q]) -> Result<HarmonicTransfer> {
    if f.len() != y.len() {
        return Err(Error::InvalidInput(format!("{} values for {} subset states", f.len(), y.len())));
    }
    let set = to_set(y);
    let abs = k.absorption(&set)?;
    let fy: BTreeMap<usize, &Q> = y.iter().copied().zip(f).collect();
    let h: Vec<Q> = abs.probs.iter().map(|row| row.iter().map(|(a, p)| p * fy[a]).sum()).collect();
    let ph = k.apply_exact(&h);
    let max_over = |it: &mut dyn Iterator<Item = Q>| it.fold(Q::zero(), |a, b| if b > a { b } else { a });
    let restriction = max_over(&mut y.iter().zip(f).map(|(&x, v)| (&h[x] - v).abs()));
    let interior = max_over(&mut (0..k.len()).filter(|x| !set.contains(x)).map(|x| (&ph[x] - &h[x]).abs()));
    let global = max_over(&mut (0..k.len()).map(|x| (&ph[x] - &h[x]).abs()));
    let induced = induced_kernel_exact(k, y)?;
    let f_is_q_harmonic = induced.kernel.harmonic_defect_exact(f).is_zero();
    Ok(HarmonicTransfer {
        extension: h.iter().map(to_f64).collect(),
        restriction_defect: to_f64(&restriction),
        interior_defect: to_f64(&interior),
        f_is_q_harmonic,
        global_defect: to_f64(&global),
        exact: abs.method.is_exact(),
    })
}

/// `max |q_{Y→Y″} − q_{X→Y″}|` for `Y″ ⊂ Y ⊂ X`.
pub fn tower_defect(k: &MarkovKernel, y: &[usize], y2: &[usize]) -> Result<Q> {
    let outer = induced_kernel_exact(k, y)?;
    let inner_pos = y2
        .iter()
        .map(|&v| outer.position(v).ok_or_else(|| Error::InvalidInput(format!("{v} is not in the outer subset"))))
        .collect::<Result<Vec<_>>>()?;
    let twice = induced_kernel_exact(&outer.kernel, &inner_pos)?;
    let direct = induced_kernel_exact(k, y2)?;
    let mut worst = Q::zero();
    for a in 0..y2.len() {
        for b in 0..y2.len() {
            let d = (twice.q(a, b) - direct.q(a, b)).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// `max |P_x(hit Z at z)| − Q_x(hit Z at z)|` over `x ∈ Y`, `z ∈ Z`, for
/// `Z ⊂ Y`.
pub fn boundary_preservation_defect(k: &MarkovKernel, y: &[usize], z: &[usize]) -> Result<Q> {
    let induced = induced_kernel_exact(k, y)?;
    let zpos = z
        .iter()
        .map(|&v| induced.position(v).ok_or_else(|| Error::InvalidInput(format!("{v} is not in the subset"))))
        .collect::<Result<Vec<_>>>()?;
    let big = k.absorption(&to_set(z))?;
    let small = induced.kernel.absorption(&to_set(&zpos))?;
    let mut worst = Q::zero();
    for (i, &x) in y.iter().enumerate() {
        for (&target, &tp) in z.iter().zip(&zpos) {
            let a = big.probs[x].get(&target).cloned().unwrap_or_else(Q::zero);
            let b = small.probs[i].get(&tp).cloned().unwrap_or_else(Q::zero);
            let d = (a - b).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// Monte Carlo estimate of the induced kernel with a step horizon.
#[derive(Debug, Clone, Serialize)]
pub struct McInducedKernel {
    pub subset: Vec<usize>,
    pub samples: usize,
    pub horizon: u64,
    /// `estimate[i][j]` estimates `q(Y_i, Y_j)`.
    pub estimate: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    /// Per row, walks that had not returned within the horizon.
    pub unresolved: Vec<usize>,
}

/// Default step horizon for Monte Carlo induced kernels.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

pub fn induced_kernel_mc(
    k: &MarkovKernel,
    y: &[usize],
    samples: usize,
    horizon: u64,
    workers: usize,
    stream: &RngStream,
) -> Result<McInducedKernel> {
    if y.is_empty() {
        return Err(Error::EmptySubset);
    }
    let pos: BTreeMap<usize, usize> = y.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut estimate = Vec::new();
    let mut se = Vec::new();
    let mut unresolved = Vec::new();
    for (i, &x) in y.iter().enumerate() {
        let hits = par_samples(samples, workers, &stream.child(i as u64), |_, rng| -> Result<Option<usize>> {
            let mut z = x;
            for _ in 0..horizon {
                z = k.step(&z, rng)?;
                if let Some(&j) = pos.get(&z) {
                    return Ok(Some(j));
                }
            }
            Ok(None)
        });
        let mut counts = vec![0usize; y.len()];
        let mut lost = 0;
        for h in hits {
            match h? {
                Some(j) => counts[j] += 1,
                None => lost += 1,
            }
        }
        let mut row = Vec::new();
        let mut row_se = Vec::new();
        let n = samples as f64;
        for c in counts {
            let m = c as f64 / n;
            row.push(m);
            row_se.push(if samples > 1 { (m * (1.0 - m) / (n - 1.0)).sqrt() } else { 0.0 });
        }
        estimate.push(row);
        se.push(row_se);
        unresolved.push(lost);
    }
    Ok(McInducedKernel { subset: y.to_vec(), samples, horizon, estimate, se, unresolved })
}

impl McInducedKernel {
    /// Largest `|estimate − exact| / se` over entries; entries with zero
    /// standard error must match exactly or give infinity.
    pub fn max_z_score(&self, exact: &InducedKernel) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.estimate.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                let d = (e - to_f64(&exact.q(i, j))).abs();
                let s = self.se[i][j];
                let z = if s > 0.0 {
                    d / s
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netwalk::{cycle_network, path_network, FiniteNetwork};
    use crate::rational::{q_frac, q_int};
    use proptest::prelude::*;

    #[test]
    fn stopping_time_examples() {
        let st = stopping_times(&[1, 0, 1, 2], |z| *z != 1, None);
        assert_eq!(st.tau, vec![1, 3]);
        assert_eq!(st.states, vec![0, 2]);
        let all = stopping_times(&[3, 1, 4], |_| true, Some(5));
        assert_eq!(all.tau, vec![0, 1, 2]);
        assert!(all.truncated);
        let some = stopping_times(&[3, 1, 4], |_| true, Some(2));
        assert_eq!(some.tau, vec![0, 1]);
        assert!(!some.truncated);
    }

    #[test]
    fn integer_parity_visits() {
        use crate::buildings::IntegerLine;
        use crate::netwalk::{simulate, NetworkWalk};
        let s = RngStream::new(1);
        for i in 0..10_000 {
            let t = simulate(&NetworkWalk(&IntegerLine), 0i64, 20, &s.child(i)).unwrap();
            let st = stopping_times(&t.states, |z| z % 2 == 0, None);
            assert_eq!(st.tau[0], 0);
            assert!(st.tau.windows(2).all(|w| w[1] - w[0] == 2));
        }
    }

    #[test]
    fn induced_examples() {
        let path = path_network(3).kernel().unwrap();
        let q = induced_kernel_exact(&path, &[0, 2]).unwrap();
        assert_eq!(q.q(0, 0), q_frac(1, 2));
        assert_eq!(q.q(0, 1), q_frac(1, 2));
        let c4 = cycle_network(4).kernel().unwrap();
        let q = induced_kernel_exact(&c4, &[0, 2]).unwrap();
        assert_eq!(q.q(0, 0), q_frac(1, 2));
        assert_eq!(q.q(1, 0), q_frac(1, 2));
        let whole = induced_kernel_exact(&c4, &[0, 1, 2, 3]).unwrap();
        assert_eq!(whole.kernel.dense(), c4.dense());
        assert!(matches!(induced_kernel_exact(&c4, &[]), Err(Error::EmptySubset)));
    }

    #[test]
    fn unreachable_subset() {
        let trap = MarkovKernel::from_dense(vec![vec![q_int(0), q_int(1)], vec![q_int(0), q_int(1)]]).unwrap();
        assert!(matches!(induced_kernel_exact(&trap, &[0]), Err(Error::Unreachable(_))));
    }

    #[test]
    fn dirichlet_transfer() {
        let k = path_network(5).kernel().unwrap();
        let t = harmonic_transfer_check(&k, &[0, 4], &[q_int(0), q_int(1)]).unwrap();
        assert_eq!(t.extension, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(t.interior_defect, 0.0);
        assert!(t.passes(0.0));
        let c = harmonic_transfer_check(&k, &[1, 3], &[q_int(2), q_int(2)]).unwrap();
        assert!(c.extension.iter().all(|&v| v == 2.0));
        assert!(c.f_is_q_harmonic);
        assert_eq!(c.global_defect, 0.0);
    }

    #[test]
    fn mc_matches_exact() {
        let k = path_network(4).kernel().unwrap();
        let exact = induced_kernel_exact(&k, &[0, 3]).unwrap();
        let mc = induced_kernel_mc(&k, &[0, 3], 20_000, 1000, 4, &RngStream::new(2)).unwrap();
        assert!(mc.max_z_score(&exact) < 4.0);
        assert_eq!(mc.unresolved, vec![0, 0]);
    }

    fn chain(n: usize, weights: &[u8]) -> MarkovKernel {
        let mut edges = Vec::new();
        for i in 1..n {
            edges.push((i - 1, i, q_int(1 + weights[i % weights.len()] as i64 % 3)));
        }
        for (j, w) in weights.iter().enumerate() {
            edges.push((j % n, (j * 7 + *w as usize) % n, q_int(*w as i64 % 4)));
        }
        FiniteNetwork::from_edges(n, &edges).unwrap().kernel().unwrap()
    }

    proptest! {
        #[test]
        fn tower_and_boundary(n in 3usize..10, w in proptest::collection::vec(0u8..8, 1..12)) {
            let k = chain(n, &w);
            let y: Vec<usize> = (0..n).step_by(2).collect();
            let y2: Vec<usize> = y.iter().copied().step_by(2).collect();
            prop_assert!(tower_defect(&k, &y, &y2).unwrap().is_zero());
            prop_assert!(boundary_preservation_defect(&k, &y, &y2).unwrap().is_zero());
            prop_assert!(induced_kernel_exact(&k, &y).unwrap().row_sum_defect().is_zero());
        }
    }
}
