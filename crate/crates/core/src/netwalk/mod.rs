//! Networks with symmetric conductances, their Markov kernels, exact solvers
//! on finite chains and the Monte Carlo engine.

mod kernel;
pub mod linalg;
mod mc;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use kernel::{Absorption, HittingDistribution, MarkovKernel};
pub use mc::{
    chi_square, cumulative, mean_and_se, par_samples, sample_cumulative, simulate, ChiSquare, RngStream, Trajectory,
    Walk, WalkRng, DEFAULT_ALPHA,
};

use crate::rational::{format, parse, to_f64, Q};
use crate::{Error, Result};

/// A graph with symmetric non-negative conductances, given by a neighbour
/// oracle. Finite networks and infinite lazy families share this interface.
pub trait Network: Sync {
    type Node: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    /// All `(y, a(x, y))` with `a(x, y) > 0`; a self-loop appears once.
    fn neighbors(&self, x: &Self::Node) -> Result<Vec<(Self::Node, Q)>>;

    /// Canonical byte encoding used to key statistics.
    fn encode(&self, x: &Self::Node) -> Vec<u8>;

    fn total_conductance(&self, x: &Self::Node) -> Result<Q> {
        let m: Q = self.neighbors(x)?.into_iter().map(|(_, a)| a).sum();
        if !m.is_positive() {
            return Err(Error::ZeroConductance(format!("{x:?}")));
        }
        Ok(m)
    }

    fn conductance(&self, x: &Self::Node, y: &Self::Node) -> Result<Q> {
        Ok(self.neighbors(x)?.into_iter().filter(|(z, _)| z == y).map(|(_, a)| a).sum())
    }

    /// One step of the walk `p(x, y) = a(x, y) / m(x)`.
    fn random_step(&self, x: &Self::Node, rng: &mut WalkRng) -> Result<Self::Node> {
        let nbrs = self.neighbors(x)?;
        if nbrs.is_empty() {
            return Err(Error::ZeroConductance(format!("{x:?}")));
        }
        let cum = cumulative(nbrs.iter().map(|(_, a)| to_f64(a)));
        Ok(nbrs[sample_cumulative(&cum, rng)].0.clone())
    }
}

/// Checks `a(x, y) = a(y, x)` exactly on every edge at the given nodes.
pub fn check_symmetry<N: Network>(net: &N, nodes: &[N::Node]) -> Result<()> {
    for x in nodes {
        for (y, a) in net.neighbors(x)? {
            let back = net.conductance(&y, x)?;
            if back != a {
                return Err(Error::InvalidNetwork(format!(
                    "a({x:?},{y:?}) = {} but a({y:?},{x:?}) = {}",
                    format(&a),
                    format(&back)
                )));
            }
        }
    }
    Ok(())
}

/// Adapts any network to the [`Walk`] interface.
pub struct NetworkWalk<'a, N: Network>(pub &'a N);

impl<N: Network> Walk for NetworkWalk<'_, N> {
    type State = N::Node;

    fn step(&self, x: &N::Node, rng: &mut WalkRng) -> Result<N::Node> {
        self.0.random_step(x, rng)
    }
}

/// An explicit finite network on nodes `0..n` with string labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteNetwork {
    labels: Vec<String>,
    adjacency: Vec<BTreeMap<usize, Q>>,
}

impl FiniteNetwork {
    pub fn new(n: usize) -> Self {
        Self { labels: (0..n).map(|i| i.to_string()).collect(), adjacency: vec![BTreeMap::new(); n] }
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self { labels, adjacency: vec![BTreeMap::new(); n] }
    }

    /// Builds from `(u, v, a)` triples; repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, Q)]) -> Result<Self> {
        let mut net = Self::new(n);
        for (u, v, a) in edges {
            net.add_edge(*u, *v, a.clone())?;
        }
        Ok(net)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, a: Q) -> Result<()> {
        let n = self.len();
        if u >= n || v >= n {
            return Err(Error::InvalidNetwork(format!("edge ({u},{v}) outside 0..{n}")));
        }
        if a.is_negative() {
            return Err(Error::InvalidNetwork(format!("negative conductance on ({u},{v})")));
        }
        if a.is_zero() {
            return Ok(());
        }
        *self.adjacency[u].entry(v).or_insert_with(Q::zero) += &a;
        if u != v {
            *self.adjacency[v].entry(u).or_insert_with(Q::zero) += a;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn row(&self, x: usize) -> &BTreeMap<usize, Q> {
        &self.adjacency[x]
    }

    pub fn a(&self, x: usize, y: usize) -> Q {
        self.adjacency[x].get(&y).cloned().unwrap_or_else(Q::zero)
    }

    pub fn m(&self, x: usize) -> Q {
        self.adjacency[x].values().sum()
    }

    /// Undirected edges `u ≤ v` with their conductances.
    pub fn edges(&self) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::new();
        for (u, row) in self.adjacency.iter().enumerate() {
            for (&v, a) in row {
                if u <= v {
                    out.push((u, v, a.clone()));
                }
            }
        }
        out
    }

    /// Fails if any node has zero total conductance.
    pub fn validate(&self) -> Result<()> {
        for x in 0..self.len() {
            if !self.m(x).is_positive() {
                return Err(Error::ZeroConductance(self.labels[x].clone()));
            }
        }
        check_symmetry(self, &(0..self.len()).collect::<Vec<_>>())
    }

    pub fn kernel(&self) -> Result<MarkovKernel> {
        MarkovKernel::from_network(self)
    }

    /// Reads `{"nodes": [...], "edges": [[u, v, a], ...]}`. Node ids may be
    /// strings or numbers; conductances may be numbers or strings like `"1/3"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkJson = serde_json::from_str(text)?;
        let labels: Vec<String> = doc.nodes.iter().map(value_label).collect();
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node {l}")));
            }
        }
        let mut net = Self::with_labels(labels);
        for (u, v, a) in &doc.edges {
            let lookup = |x: &Value| {
                index.get(&value_label(x)).copied().ok_or_else(|| Error::InvalidNetwork(format!("unknown node {x}")))
            };
            let a = match a {
                Value::Number(n) => parse(&n.to_string()),
                Value::String(s) => parse(s),
                _ => None,
            }
            .ok_or_else(|| Error::InvalidNetwork(format!("bad conductance {a}")))?;
            net.add_edge(lookup(u)?, lookup(v)?, a)?;
        }
        Ok(net)
    }

    /// Writes the JSON form read by [`FiniteNetwork::from_json`], with exact
    /// conductances as strings.
    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges()
            .into_iter()
            .map(|(u, v, a)| serde_json::json!([self.labels[u], self.labels[v], format(&a)]))
            .collect();
        serde_json::json!({ "nodes": self.labels, "edges": edges })
    }
}

#[derive(Deserialize, Serialize)]
struct NetworkJson {
    nodes: Vec<Value>,
    edges: Vec<(Value, Value, Value)>,
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Network for FiniteNetwork {
    type Node = usize;

    fn neighbors(&self, x: &usize) -> Result<Vec<(usize, Q)>> {
        self.adjacency
            .get(*x)
            .map(|row| row.iter().map(|(&y, a)| (y, a.clone())).collect())
            .ok_or_else(|| Error::InvalidNetwork(format!("node {x} out of range")))
    }

    fn encode(&self, x: &usize) -> Vec<u8> {
        (*x as u64).to_le_bytes().to_vec()
    }
}

/// Path `0 – 1 – … – (n−1)` with unit conductances.
pub fn path_network(n: usize) -> FiniteNetwork {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, Q::from_integer(1.into()))).collect();
    FiniteNetwork::from_edges(n, &edges).expect("valid path")
}

/// Cycle `C_n` with unit conductances.
pub fn cycle_network(n: usize) -> FiniteNetwork {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, Q::from_integer(1.into()))).collect();
    FiniteNetwork::from_edges(n, &edges).expect("valid cycle")
}

/// Trajectory visit counts as CSV `node,count,frequency`.
pub fn occupation_csv(labels: &[String], counts: &[u64]) -> String {
    let total: u64 = counts.iter().sum();
    let mut out = String::from("node,count,frequency\n");
    for (l, &c) in labels.iter().zip(counts) {
        let f = if total == 0 { 0.0 } else { c as f64 / total as f64 };
        out.push_str(&format!("{l},{c},{f:.6}\n"));
    }
    out
}
