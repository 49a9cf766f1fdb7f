use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::{LatticeAction, NodeOf};
use crate::netwalk::{chi_square, mean_and_se, par_samples, ChiSquare, FiniteNetwork, Network, RngStream, Walk};
use crate::rational::{format, to_f64, Q};
use crate::{Error, Result};

/// `Σ_{x ∈ D} m(x) / |Γ_x|` over a fundamental domain.
#[derive(Debug, Clone, Serialize)]
pub struct Covolume {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub partial_sum: Q,
    pub domain_size: usize,
    /// `"finite"` when the whole domain was enumerated, else `"unknown"`.
    pub verdict: String,
}

impl Covolume {
    pub fn value(&self) -> Option<&Q> {
        (self.verdict == "finite").then_some(&self.partial_sum)
    }
}

pub fn covolume<A: LatticeAction>(action: &A, limit: usize) -> Result<Covolume> {
    let domain = action.fundamental_domain(limit);
    let net = action.network();
    let mut sum = Q::zero();
    for x in &domain.nodes {
        sum += net.total_conductance(x)? / Q::from_integer(action.stabilizer_order(x)?.into());
    }
    let verdict = if domain.complete { "finite" } else { "unknown" };
    Ok(Covolume { partial_sum: sum, domain_size: domain.nodes.len(), verdict: verdict.into() })
}

/// The network on orbits `Γ\N` with
/// `a′(x̄, ȳ) = (1/|Γ_x|) Σ_{y′ ∈ Γ·y} a(x, y′)`.
#[derive(Debug, Clone)]
pub struct QuotientNetwork<N> {
    reps: Vec<N>,
    index: HashMap<N, usize>,
    stabilizers: Vec<u64>,
    network: FiniteNetwork,
}

impl<N: Clone + Eq + std::hash::Hash> QuotientNetwork<N> {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[N] {
        &self.reps
    }

    pub fn stabilizers(&self) -> &[u64] {
        &self.stabilizers
    }

    pub fn network(&self) -> &FiniteNetwork {
        &self.network
    }

    pub fn index_of_rep(&self, rep: &N) -> Option<usize> {
        self.index.get(rep).copied()
    }

    /// `π(x)`.
    pub fn project<A: LatticeAction<Net = Net>, Net: Network<Node = N>>(&self, action: &A, x: &N) -> Result<usize> {
        self.index_of_rep(&action.canonical(x))
            .ok_or_else(|| Error::InvalidAction(format!("{} has no orbit representative", action.node_label(x))))
    }

    pub fn a_prime(&self, x: usize, y: usize) -> Q {
        self.network.a(x, y)
    }

    pub fn m_prime(&self, x: usize) -> Q {
        self.network.m(x)
    }

    /// Row of `a′` computed from an arbitrary lift `x′` of an orbit.
    pub fn row_from_lift<A: LatticeAction<Net = Net>, Net: Network<Node = N>>(
        &self,
        action: &A,
        lift: &N,
    ) -> Result<BTreeMap<usize, Q>> {
        let stab = Q::from_integer(action.stabilizer_order(lift)?.into());
        let mut row = BTreeMap::new();
        for (y, a) in action.network().neighbors(lift)? {
            *row.entry(self.project(action, &y)?).or_insert_with(Q::zero) += a / &stab;
        }
        Ok(row)
    }

    /// Largest `|m′(π(x)) − m(x)/|Γ_x||` over the representatives.
    pub fn mass_defect<A: LatticeAction<Net = Net>, Net: Network<Node = N>>(&self, action: &A) -> Result<Q> {
        let mut worst = Q::zero();
        for (i, x) in self.reps.iter().enumerate() {
            let expected = action.network().total_conductance(x)? / Q::from_integer(self.stabilizers[i].into());
            let d = (self.m_prime(i) - expected).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// Largest `|(m′P′)(y) − m′(y)|`; zero in exact arithmetic.
    pub fn stationarity_defect(&self) -> Result<Q> {
        let m: Vec<Q> = (0..self.len()).map(|i| self.m_prime(i)).collect();
        Ok(self.network.kernel()?.check_stationary(&m))
    }

    /// Finite-network JSON with the orbit representatives as labels.
    pub fn to_json(&self) -> Value {
        let mut v = self.network.to_json();
        v["stabilizers"] = json!(self.stabilizers);
        v
    }
}

/// Builds the quotient from canonical representatives, checking that `a′`
/// is symmetric exactly.
pub fn quotient_network<A: LatticeAction>(action: &A, limit: usize) -> Result<QuotientNetwork<NodeOf<A>>> {
    let domain = action.fundamental_domain(limit);
    if !domain.complete {
        return Err(Error::SizeGuard(format!("fundamental domain exceeds {limit} orbits")));
    }
    let mut reps: Vec<NodeOf<A>> = domain.nodes.iter().map(|x| action.canonical(x)).collect();
    reps.sort();
    reps.dedup();
    let index: HashMap<_, _> = reps.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
    let stabilizers = reps.iter().map(|x| action.stabilizer_order(x)).collect::<Result<Vec<_>>>()?;
    let labels = reps.iter().map(|x| action.node_label(x)).collect();
    let mut q = QuotientNetwork { reps, index, stabilizers, network: FiniteNetwork::with_labels(labels) };
    let rows = q.reps.iter().map(|x| q.row_from_lift(action, x)).collect::<Result<Vec<_>>>()?;
    for (i, row) in rows.iter().enumerate() {
        for (&j, a) in row {
            let back = rows[j].get(&i).cloned().unwrap_or_else(Q::zero);
            if &back != a {
                return Err(Error::NotConductancePreserving(format!(
                    "a′({},{}) = {} but a′({},{}) = {}",
                    q.network.label(i),
                    q.network.label(j),
                    format(a),
                    q.network.label(j),
                    q.network.label(i),
                    format(&back)
                )));
            }
            if j >= i {
                q.network.add_edge(i, j, a.clone())?;
            }
        }
    }
    Ok(q)
}

/// Empirical law of `π(Z_steps)` against the exact quotient kernel power.
#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    pub steps: usize,
    pub samples: usize,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub chi_square: ChiSquare,
}

pub fn quotient_law_check<A: LatticeAction>(
    action: &A,
    quotient: &QuotientNetwork<NodeOf<A>>,
    start: &NodeOf<A>,
    steps: usize,
    samples: usize,
    workers: usize,
    stream: &RngStream,
) -> Result<LawReport> {
    let kernel = quotient.network().kernel()?;
    let expected: Vec<f64> =
        kernel.distribution_after(quotient.project(action, start)?, steps).iter().map(to_f64).collect();
    let net = action.network();
    let ends = par_samples(samples, workers, stream, |_, rng| {
        let mut x = start.clone();
        for _ in 0..steps {
            x = net.random_step(&x, rng)?;
        }
        quotient.project(action, &x)
    });
    let mut observed = vec![0u64; quotient.len()];
    for e in ends {
        observed[e?] += 1;
    }
    let chi = chi_square(&observed, &expected);
    Ok(LawReport { steps, samples, observed, expected, chi_square: chi })
}

/// Least-squares fit of `ln P(T ≥ t)` against `t`.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits over `t` from one past the minimum up to the last `t` with at
/// least five samples at or beyond it; `None` with fewer than two points.
pub fn tail_fit(histogram: &BTreeMap<u64, u64>) -> Option<TailFit> {
    let total: u64 = histogram.values().sum();
    let tmin = *histogram.keys().next()?;
    let mut pts = Vec::new();
    let mut t = tmin + 1;
    loop {
        let at_least: u64 = histogram.range(t..).map(|(_, c)| c).sum();
        if at_least < 5 {
            break;
        }
        pts.push((t as f64, (at_least as f64 / total as f64).ln()));
        t += 1;
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Some(TailFit { slope, intercept: my - slope * mx, points: pts.len() })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnTimeStats {
    pub samples: usize,
    /// Walks that had not returned within the horizon.
    pub unresolved: usize,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    pub se: f64,
    /// `Σ m′ / m′(x)`.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub exact_mean: Q,
    pub c: Option<f64>,
    /// Empirical `E[e^{cT}]`.
    pub exp_moment: Option<f64>,
    /// Set when `c` is at or above the fitted decay rate.
    pub exp_moment_diverges: bool,
    pub tail: Option<TailFit>,
    pub histogram: BTreeMap<u64, u64>,
}

impl ReturnTimeStats {
    /// `|mean − exact_mean| ≤ k·se`.
    pub fn mean_within(&self, k: f64) -> bool {
        (self.mean - to_f64(&self.exact_mean)).abs() <= k * self.se.max(f64::EPSILON)
    }
}

/// Samples the first return time `T_x = min{n ≥ 1 : Z_n = x}` of the walk
/// on a finite irreducible network.
pub fn return_time_stats(
    net: &FiniteNetwork,
    x: usize,
    samples: usize,
    workers: usize,
    stream: &RngStream,
    c: Option<f64>,
    horizon: u64,
) -> Result<ReturnTimeStats> {
    if x >= net.len() {
        return Err(Error::InvalidInput(format!("state {x} outside 0..{}", net.len())));
    }
    let kernel = net.kernel()?;
    if !kernel.is_irreducible() {
        return Err(Error::InvalidNetwork("return times need an irreducible network".into()));
    }
    let total: Q = (0..net.len()).map(|i| net.m(i)).sum();
    let exact_mean = total / net.m(x);
    let times = par_samples(samples, workers, stream, |_, rng| -> Result<Option<u64>> {
        let mut z = x;
        for t in 1..=horizon {
            z = kernel.step(&z, rng)?;
            if z == x {
                return Ok(Some(t));
            }
        }
        Ok(None)
    });
    let mut histogram = BTreeMap::new();
    let mut unresolved = 0;
    for t in times {
        match t? {
            Some(t) => *histogram.entry(t).or_insert(0u64) += 1,
            None => unresolved += 1,
        }
    }
    let values: Vec<f64> = histogram.iter().flat_map(|(&t, &n)| std::iter::repeat_n(t as f64, n as usize)).collect();
    let (mean, se) = mean_and_se(&values);
    let exp_moment = c.map(|c| values.iter().map(|t| (c * t).exp()).sum::<f64>() / values.len() as f64);
    let tail = tail_fit(&histogram);
    let exp_moment_diverges = match (c, &tail) {
        (Some(c), Some(fit)) => c >= -fit.slope,
        _ => false,
    };
    Ok(ReturnTimeStats {
        samples,
        unresolved,
        min: histogram.keys().next().copied().unwrap_or(0),
        max: histogram.keys().next_back().copied().unwrap_or(0),
        mean,
        se,
        exact_mean,
        c,
        exp_moment,
        exp_moment_diverges,
        tail,
        histogram,
    })
}
