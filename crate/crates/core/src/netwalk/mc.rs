//! Seeded Monte Carlo engine.
//!
//! Every sample `i` draws from its own child stream of the master
//! [`RngStream`], so results depend only on `(seed, stream)` and never on how
//! samples are scheduled across workers.

use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::Result;

pub type WalkRng = ChaCha8Rng;

/// A reproducible random stream identified by `(seed, stream)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Independent child stream `index`.
    pub fn child(&self, index: u64) -> Self {
        Self { seed: self.seed, stream: splitmix64(splitmix64(self.stream) ^ index) }
    }

    pub fn rng(&self) -> WalkRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A process that can take one random step.
pub trait Walk: Sync {
    type State: Clone + Debug + Send + Sync;

    fn step(&self, x: &Self::State, rng: &mut WalkRng) -> Result<Self::State>;
}

/// A sampled path `Z_0, …, Z_T` together with the stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub states: Vec<S>,
    pub seed: u64,
    pub stream: u64,
}

impl<S: Clone> Trajectory<S> {
    pub fn start(&self) -> &S {
        &self.states[0]
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectories are never empty")
    }

    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.states.len() == 1
    }
}

pub fn simulate<W: Walk>(walk: &W, start: W::State, steps: usize, stream: &RngStream) -> Result<Trajectory<W::State>> {
    let mut rng = stream.rng();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    for _ in 0..steps {
        let next = walk.step(states.last().unwrap(), &mut rng)?;
        states.push(next);
    }
    Ok(Trajectory { states, seed: stream.seed, stream: stream.stream })
}

/// Evaluates `f(i, rng_i)` for `i in 0..samples` on `workers` threads
/// (0 = rayon default), returning results in index order.
pub fn par_samples<T, F>(samples: usize, workers: usize, stream: &RngStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut WalkRng) -> T + Sync + Send,
{
    let run = || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream.child(i as u64).rng();
                f(i, &mut rng)
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

/// Picks an index from cumulative weights `cum` (last entry = total).
pub fn sample_cumulative(cum: &[f64], rng: &mut WalkRng) -> usize {
    let total = *cum.last().expect("non-empty distribution");
    let u = rng.gen::<f64>() * total;
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

pub fn cumulative(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .into_iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Default significance level for statistical acceptance.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// Pearson test of `observed` counts against `probs`. Categories of
/// probability zero are dropped; an observation in one gives `p = 0`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut categories = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return ChiSquare { statistic: f64::INFINITY, dof: 0, p_value: 0.0 };
            }
            continue;
        }
        let e = p * total as f64;
        statistic += (o as f64 - e).powi(2) / e;
        categories += 1;
    }
    let dof = categories.saturating_sub(1);
    let p_value = if dof == 0 || total == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(statistic)
    };
    ChiSquare { statistic, dof, p_value }
}

/// Sample mean and standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
