use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};

use super::linalg::{self, SolveMethod};
use super::mc::{chi_square, cumulative, sample_cumulative, simulate, ChiSquare, RngStream, Walk, WalkRng};
use super::FiniteNetwork;
use crate::rational::{format, to_f64, Q};
use crate::{Error, Result};

/// A finite transition matrix with exact rational rows.
#[derive(Debug, Clone)]
pub struct MarkovKernel {
    labels: Vec<String>,
    rows: Vec<Vec<(usize, Q)>>,
    m: Option<Vec<Q>>,
    cum: Vec<Vec<f64>>,
}

/// Absorption probabilities of every state into an absorbing set.
#[derive(Debug, Clone)]
pub struct Absorption {
    pub absorbing: BTreeSet<usize>,
    /// `probs[x][a] = P_x(first visit to the set is at a)`.
    pub probs: Vec<BTreeMap<usize, Q>>,
    /// Mass that never reaches the set.
    pub leaked: Vec<Q>,
    pub method: SolveMethod,
}

#[derive(Debug, Clone)]
pub struct HittingDistribution {
    pub probs: BTreeMap<usize, Q>,
    pub leaked: Q,
    pub method: SolveMethod,
}

impl MarkovKernel {
    /// `p(x, y) = a(x, y) / m(x)`, reversible with respect to `m`.
    pub fn from_network(net: &FiniteNetwork) -> Result<Self> {
        let mut rows = Vec::with_capacity(net.len());
        let mut m = Vec::with_capacity(net.len());
        for x in 0..net.len() {
            let mx = net.m(x);
            if !mx.is_positive() {
                return Err(Error::ZeroConductance(net.label(x).to_string()));
            }
            rows.push(net.row(x).iter().map(|(&y, a)| (y, a / &mx)).collect());
            m.push(mx);
        }
        let mut k = Self::build(net.labels().to_vec(), rows);
        k.m = Some(m);
        Ok(k)
    }

    /// A generic kernel from sparse rows; each row must be a probability
    /// vector exactly.
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<(usize, Q)>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(Error::InvalidNetwork(format!("{} rows for {n} states", rows.len())));
        }
        for (x, row) in rows.iter().enumerate() {
            let mut total = Q::zero();
            for (y, p) in row {
                if *y >= n || p.is_negative() {
                    return Err(Error::InvalidNetwork(format!("bad entry p({x},{y})")));
                }
                total += p;
            }
            if !total.is_one() {
                return Err(Error::InvalidNetwork(format!("row {x} sums to {}", format(&total))));
            }
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut merged: BTreeMap<usize, Q> = BTreeMap::new();
                for (y, p) in row {
                    if !p.is_zero() {
                        *merged.entry(y).or_insert_with(Q::zero) += p;
                    }
                }
                merged.into_iter().collect()
            })
            .collect();
        Ok(Self::build(labels, rows))
    }

    /// Like [`MarkovKernel::from_rows`] but accepts rows whose sums are within
    /// `tol` of one, as produced by floating-point solves.
    pub fn from_rows_approx(labels: Vec<String>, rows: Vec<Vec<(usize, Q)>>, tol: f64) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(Error::InvalidNetwork(format!("{} rows for {n} states", rows.len())));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.iter().any(|(y, p)| *y >= n || to_f64(p) < -tol) {
                return Err(Error::InvalidNetwork(format!("bad entry in row {x}")));
            }
            let total: f64 = row.iter().map(|(_, p)| to_f64(p)).sum();
            if (total - 1.0).abs() > tol {
                return Err(Error::InvalidNetwork(format!("row {x} sums to {total}")));
            }
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut merged: BTreeMap<usize, Q> = BTreeMap::new();
                for (y, p) in row {
                    if p.is_positive() {
                        *merged.entry(y).or_insert_with(Q::zero) += p;
                    }
                }
                merged.into_iter().collect()
            })
            .collect();
        Ok(Self::build(labels, rows))
    }

    pub fn from_dense(matrix: Vec<Vec<Q>>) -> Result<Self> {
        let n = matrix.len();
        let rows =
            matrix.into_iter().map(|r| r.into_iter().enumerate().filter(|(_, p)| !p.is_zero()).collect()).collect();
        Self::from_rows((0..n).map(|i| i.to_string()).collect(), rows)
    }

    fn build(labels: Vec<String>, rows: Vec<Vec<(usize, Q)>>) -> Self {
        let cum = rows.iter().map(|r: &Vec<(usize, Q)>| cumulative(r.iter().map(|(_, p)| to_f64(p)))).collect();
        Self { labels, rows, m: None, cum }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, x: usize) -> &[(usize, Q)] {
        &self.rows[x]
    }

    pub fn p(&self, x: usize, y: usize) -> Q {
        self.rows[x].iter().find(|(z, _)| *z == y).map(|(_, p)| p.clone()).unwrap_or_else(Q::zero)
    }

    pub fn dense(&self) -> Vec<Vec<Q>> {
        let n = self.len();
        let mut out = vec![vec![Q::zero(); n]; n];
        for (x, row) in self.rows.iter().enumerate() {
            for (y, p) in row {
                out[x][*y] = p.clone();
            }
        }
        out
    }

    /// Total conductances when built from a network.
    pub fn conductances(&self) -> Option<&[Q]> {
        self.m.as_deref()
    }

    pub fn is_reversible(&self) -> bool {
        self.m.is_some()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows.iter().enumerate().all(|(x, row)| row.iter().all(|(y, p)| *p == self.p(*y, x)))
    }

    /// `m(x) p(x, y) = m(y) p(y, x)` on every edge, exactly.
    pub fn detailed_balance_holds(&self) -> bool {
        let Some(m) = &self.m else { return false };
        self.rows.iter().enumerate().all(|(x, row)| row.iter().all(|(y, p)| &m[x] * p == &m[*y] * self.p(*y, x)))
    }

    /// `max_x |Σ_y p(x,y) f(y) − f(x)|`.
    pub fn harmonic_defect(&self, f: &[f64]) -> f64 {
        (0..self.len()).map(|x| self.harmonic_defect_at(x, f)).fold(0.0, f64::max)
    }

    pub fn harmonic_defect_at(&self, x: usize, f: &[f64]) -> f64 {
        let pf: f64 = self.rows[x].iter().map(|(y, p)| to_f64(p) * f[*y]).sum();
        (pf - f[x]).abs()
    }

    pub fn apply_exact(&self, f: &[Q]) -> Vec<Q> {
        self.rows.iter().map(|row| row.iter().map(|(y, p)| p * &f[*y]).sum()).collect()
    }

    pub fn harmonic_defect_exact(&self, f: &[Q]) -> Q {
        self.apply_exact(f).into_iter().zip(f).map(|(pf, fx)| (pf - fx).abs()).fold(Q::zero(), |a, b| {
            if b > a {
                b
            } else {
                a
            }
        })
    }

    /// `νP` for a measure ν.
    pub fn push_forward(&self, nu: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.len()];
        for (x, row) in self.rows.iter().enumerate() {
            if nu[x].is_zero() {
                continue;
            }
            for (y, p) in row {
                out[*y] += &nu[x] * p;
            }
        }
        out
    }

    /// `max_y |Σ_x ν(x) p(x,y) − ν(y)|`, exactly.
    pub fn check_stationary(&self, nu: &[Q]) -> Q {
        self.push_forward(nu)
            .into_iter()
            .zip(nu)
            .map(|(a, b)| (a - b).abs())
            .fold(Q::zero(), |a, b| if b > a { b } else { a })
    }

    /// Law of `Z_steps` under `P_start`.
    pub fn distribution_after(&self, start: usize, steps: usize) -> Vec<Q> {
        let mut nu = vec![Q::zero(); self.len()];
        nu[start] = Q::one();
        for _ in 0..steps {
            nu = self.push_forward(&nu);
        }
        nu
    }

    fn reachable(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for (y, _) in &self.rows[x] {
                if !seen[*y] {
                    seen[*y] = true;
                    queue.push_back(*y);
                }
            }
        }
        seen
    }

    /// States from which `targets` can be reached with positive probability.
    pub fn can_reach(&self, targets: &BTreeSet<usize>) -> Vec<bool> {
        let mut reverse = vec![Vec::new(); self.len()];
        for (x, row) in self.rows.iter().enumerate() {
            for (y, _) in row {
                reverse[*y].push(x);
            }
        }
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(y) = queue.pop_front() {
            for &x in &reverse[y] {
                if !seen[x] {
                    seen[x] = true;
                    queue.push_back(x);
                }
            }
        }
        seen
    }

    /// Strong connectivity of the positive-probability digraph.
    pub fn is_irreducible(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.reachable(0).iter().all(|&b| b) && self.can_reach(&BTreeSet::from([0])).iter().all(|&b| b)
    }

    /// Absorption probabilities into `absorbing` from every state. States
    /// that cannot reach the set keep all their mass in `leaked`.
    pub fn absorption(&self, absorbing: &BTreeSet<usize>) -> Result<Absorption> {
        if absorbing.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = self.len();
        let reach = self.can_reach(absorbing);
        let transient: Vec<usize> = (0..n).filter(|x| reach[*x] && !absorbing.contains(x)).collect();
        let mut pos = vec![usize::MAX; n];
        for (i, &x) in transient.iter().enumerate() {
            pos[x] = i;
        }
        let targets: Vec<usize> = absorbing.iter().copied().collect();
        let tpos: BTreeMap<usize, usize> = targets.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let t = transient.len();
        let mut a = vec![vec![Q::zero(); t]; t];
        let mut b = vec![vec![Q::zero(); targets.len()]; t];
        for (i, &x) in transient.iter().enumerate() {
            a[i][i] += Q::one();
            for (y, p) in &self.rows[x] {
                if let Some(&j) = tpos.get(y) {
                    b[i][j] += p;
                } else if pos[*y] != usize::MAX {
                    a[i][pos[*y]] -= p;
                }
            }
        }
        let (x, method) = if t == 0 { (Vec::new(), SolveMethod::Exact) } else { linalg::solve(&a, &b)? };
        let mut probs = vec![BTreeMap::new(); n];
        let mut leaked = vec![Q::one(); n];
        for &s in absorbing {
            probs[s].insert(s, Q::one());
            leaked[s] = Q::zero();
        }
        for (i, &s) in transient.iter().enumerate() {
            let mut total = Q::zero();
            for (j, &target) in targets.iter().enumerate() {
                let v = &x[i][j];
                if !v.is_zero() {
                    total += v;
                    probs[s].insert(target, v.clone());
                }
            }
            leaked[s] = Q::one() - total;
        }
        Ok(Absorption { absorbing: absorbing.clone(), probs, leaked, method })
    }

    pub fn hitting_distribution(&self, absorbing: &BTreeSet<usize>, start: usize) -> Result<HittingDistribution> {
        let mut abs = self.absorption(absorbing)?;
        Ok(HittingDistribution {
            probs: std::mem::take(&mut abs.probs[start]),
            leaked: abs.leaked[start].clone(),
            method: abs.method,
        })
    }

    /// Chi-square test of visit frequencies along one long trajectory
    /// against the normalised conductance measure. Only every `thin`-th
    /// state is counted, which weakens serial correlation.
    pub fn occupation_test(&self, start: usize, steps: usize, thin: usize, stream: &RngStream) -> Result<ChiSquare> {
        let m = self.m.as_ref().ok_or_else(|| Error::InvalidNetwork("kernel has no stationary measure".into()))?;
        let total: Q = m.iter().sum();
        let probs: Vec<f64> = m.iter().map(|v| to_f64(&(v / &total))).collect();
        let traj = simulate(self, start, steps, stream)?;
        let mut counts = vec![0u64; self.len()];
        for x in traj.states.iter().step_by(thin.max(1)) {
            counts[*x] += 1;
        }
        Ok(chi_square(&counts, &probs))
    }
}

impl Walk for MarkovKernel {
    type State = usize;

    fn step(&self, x: &usize, rng: &mut WalkRng) -> Result<usize> {
        let row = &self.rows[*x];
        Ok(row[sample_cumulative(&self.cum[*x], rng)].0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netwalk::{cycle_network, par_samples, path_network};
    use crate::rational::{q_frac, q_int};
    use proptest::prelude::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn kernel_from_network_examples() {
        let edge = FiniteNetwork::from_edges(2, &[(0, 1, q_int(1))]).unwrap().kernel().unwrap();
        assert_eq!(edge.p(0, 1), q_int(1));
        assert_eq!(edge.p(1, 0), q_int(1));
        let path = path_network(3).kernel().unwrap();
        assert_eq!(path.p(1, 0), q_frac(1, 2));
        assert_eq!(path.p(1, 2), q_frac(1, 2));
        let star = FiniteNetwork::from_edges(4, &[(0, 1, q_int(1)), (0, 2, q_int(2)), (0, 3, q_frac(1, 2))]).unwrap();
        let k = star.kernel().unwrap();
        assert_eq!(k.p(0, 2), q_frac(4, 7));
        assert_eq!(k.p(0, 3), q_frac(1, 7));
        assert!(k.detailed_balance_holds());
        assert!(k.check_stationary(k.conductances().unwrap()).is_zero());
    }

    #[test]
    fn self_loops_count_once() {
        let net = FiniteNetwork::from_edges(2, &[(0, 0, q_int(1)), (0, 1, q_int(1))]).unwrap();
        let k = net.kernel().unwrap();
        assert_eq!(k.p(0, 0), q_frac(1, 2));
        assert!(k.check_stationary(k.conductances().unwrap()).is_zero());
    }

    #[test]
    fn from_rows_validates() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(MarkovKernel::from_rows(labels.clone(), vec![vec![(1, q_frac(1, 2))], vec![(0, q_int(1))]]).is_err());
        assert!(MarkovKernel::from_rows(labels, vec![vec![(1, q_int(1))], vec![(2, q_int(1))]]).is_err());
    }

    #[test]
    fn simulate_examples() {
        let k = path_network(3).kernel().unwrap();
        let t = simulate(&k, 1, 0, &RngStream::new(1)).unwrap();
        assert_eq!(t.states, vec![1]);
        let two = MarkovKernel::from_dense(vec![vec![q_int(0), q_int(1)], vec![q_int(1), q_int(0)]]).unwrap();
        assert_eq!(simulate(&two, 0, 4, &RngStream::new(9)).unwrap().states, vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn one_step_split_is_binomial() {
        let k = path_network(3).kernel().unwrap();
        let n = 100_000;
        let ends = par_samples(n, 0, &RngStream::new(2024), |_, rng| k.step(&1, rng).unwrap());
        let zeros = ends.iter().filter(|&&e| e == 0).count() as f64;
        let sd = (n as f64 * 0.25).sqrt();
        assert!((zeros - n as f64 / 2.0).abs() < 3.0 * sd);
    }

    #[test]
    fn harmonic_defects() {
        let k = path_network(5).kernel().unwrap();
        assert_eq!(k.harmonic_defect(&[3.0; 5]), 0.0);
        let k2 = MarkovKernel::from_dense(vec![vec![q_int(0), q_int(1)], vec![q_int(1), q_int(0)]]).unwrap();
        assert_eq!(k2.harmonic_defect(&[1.0, 0.0]), 1.0);
        let h = k.hitting_distribution(&set(&[0, 4]), 0).unwrap();
        assert_eq!(h.probs[&0], q_int(1));
        let abs = k.absorption(&set(&[0, 4])).unwrap();
        let f: Vec<f64> = (0..5).map(|x| abs.probs[x].get(&4).map(to_f64).unwrap_or(0.0)).collect();
        for x in 1..4 {
            assert!(k.harmonic_defect_at(x, &f) <= 1e-10);
        }
    }

    #[test]
    fn hitting_examples() {
        let k = path_network(3).kernel().unwrap();
        let h = k.hitting_distribution(&set(&[0, 2]), 1).unwrap();
        assert_eq!(h.probs[&0], q_frac(1, 2));
        assert_eq!(h.probs[&2], q_frac(1, 2));
        let k5 = path_network(5).kernel().unwrap();
        let h = k5.hitting_distribution(&set(&[0, 4]), 1).unwrap();
        assert_eq!(h.probs[&0], q_frac(3, 4));
        assert_eq!(h.probs[&4], q_frac(1, 4));
        assert!(h.leaked.is_zero());
        assert!(h.method.is_exact());
        assert!(matches!(k5.absorption(&BTreeSet::new()), Err(Error::EmptySubset)));
    }

    #[test]
    fn unreachable_mass_is_reported() {
        // 0 → 1 absorbing-free trap {2, 3}.
        let k = MarkovKernel::from_dense(vec![
            vec![q_int(0), q_frac(1, 2), q_frac(1, 2), q_int(0)],
            vec![q_int(0), q_int(1), q_int(0), q_int(0)],
            vec![q_int(0), q_int(0), q_int(0), q_int(1)],
            vec![q_int(0), q_int(0), q_int(1), q_int(0)],
        ])
        .unwrap();
        let h = k.hitting_distribution(&set(&[1]), 0).unwrap();
        assert_eq!(h.probs[&1], q_frac(1, 2));
        assert_eq!(h.leaked, q_frac(1, 2));
        assert_eq!(k.hitting_distribution(&set(&[1]), 2).unwrap().leaked, q_int(1));
    }

    #[test]
    fn irreducibility() {
        assert!(path_network(2).kernel().unwrap().is_irreducible());
        let loops = MarkovKernel::from_dense(vec![vec![q_int(1), q_int(0)], vec![q_int(0), q_int(1)]]).unwrap();
        assert!(!loops.is_irreducible());
        let z = q_int(0);
        let o = q_int(1);
        let cyc = MarkovKernel::from_dense(vec![
            vec![z.clone(), o.clone(), z.clone()],
            vec![z.clone(), z.clone(), o.clone()],
            vec![o, z.clone(), z],
        ])
        .unwrap();
        assert!(cyc.is_irreducible());
        assert!(!cyc.is_symmetric());
    }

    #[test]
    fn stationarity_defects() {
        let c = cycle_network(5).kernel().unwrap();
        assert!(c.check_stationary(&vec![q_frac(1, 5); 5]).is_zero());
        let p = path_network(3).kernel().unwrap();
        assert!(p.check_stationary(&vec![q_frac(1, 3); 3]).is_positive());
    }

    #[test]
    fn occupation_frequencies_match_stationary_measure() {
        let net = FiniteNetwork::from_edges(
            4,
            &[(0, 1, q_int(1)), (1, 2, q_int(2)), (2, 3, q_int(1)), (3, 0, q_int(3)), (1, 1, q_int(1))],
        )
        .unwrap();
        let k = net.kernel().unwrap();
        let test = k.occupation_test(0, 1_000_000, 10, &RngStream::new(5)).unwrap();
        assert!(test.passes(0.01), "{test:?}");
    }

    fn random_network(n: usize, weights: &[u8]) -> FiniteNetwork {
        let mut net = FiniteNetwork::new(n);
        for i in 1..n {
            net.add_edge(i - 1, i, q_int(1 + weights[i % weights.len()] as i64)).unwrap();
        }
        for (k, w) in weights.iter().enumerate() {
            let u = k % n;
            let v = (k * 7 + 3) % n;
            net.add_edge(u, v, q_frac(*w as i64, 3)).unwrap();
        }
        net
    }

    proptest! {
        #[test]
        fn reversible_kernels_balance(n in 2usize..12, weights in proptest::collection::vec(0u8..5, 1..20)) {
            let k = random_network(n, &weights).kernel().unwrap();
            prop_assert!(k.detailed_balance_holds());
            prop_assert!(k.check_stationary(k.conductances().unwrap()).is_zero());
            prop_assert!(k.is_irreducible());
        }

        #[test]
        fn hitting_rows_sum_to_one(n in 3usize..12, weights in proptest::collection::vec(0u8..5, 1..20), a in 0usize..12, b in 0usize..12) {
            let k = random_network(n, &weights).kernel().unwrap();
            let abs = k.absorption(&set(&[a % n, b % n])).unwrap();
            for x in 0..n {
                let total: Q = abs.probs[x].values().sum();
                prop_assert!(total == Q::one());
                prop_assert!(abs.leaked[x].is_zero());
            }
        }

        #[test]
        fn trajectories_are_reproducible(seed in 0u64..1000, stream in 0u64..50) {
            let k = cycle_network(7).kernel().unwrap();
            let s = RngStream::with_stream(seed, stream);
            prop_assert_eq!(simulate(&k, 0, 50, &s).unwrap(), simulate(&k, 0, 50, &s).unwrap());
        }
    }
}
