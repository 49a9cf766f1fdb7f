//! Conductance-preserving group actions with finite stabilizers, quotient
//! networks and return-time statistics.
//!
//! Infinite groups are never materialised. Each built-in family supplies
//! orbit canonical forms, stabilizer orders, a fundamental domain and the
//! group elements carrying one point to another, as words.

mod quotient;

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use quotient::{
    covolume, quotient_law_check, quotient_network, return_time_stats, tail_fit, Covolume, LawReport, QuotientNetwork,
    ReturnTimeStats, TailFit,
};

use crate::buildings::{word_distance, FreeGroupTree, IntegerLine, TreeBuilding, Word};
use crate::netwalk::{FiniteNetwork, Network, RngStream};
use crate::{Error, Result};

pub type NodeOf<A> = <<A as LatticeAction>::Net as Network>::Node;

/// Representatives of the orbits, one per orbit.
#[derive(Debug, Clone)]
pub struct FundamentalDomain<N> {
    pub nodes: Vec<N>,
    /// False if enumeration stopped at the size limit.
    pub complete: bool,
}

pub trait LatticeAction: Sync {
    type Net: Network;

    fn network(&self) -> &Self::Net;

    fn describe(&self) -> String;

    fn node_label(&self, x: &NodeOf<Self>) -> String;

    /// The distinguished representative of the orbit of `x`.
    fn canonical(&self, x: &NodeOf<Self>) -> NodeOf<Self>;

    /// `|Γ_x|`.
    fn stabilizer_order(&self, x: &NodeOf<Self>) -> Result<u64>;

    fn fundamental_domain(&self, limit: usize) -> FundamentalDomain<NodeOf<Self>>;

    /// Words for a generating set.
    fn generators(&self) -> Vec<String>;

    /// `g·x` for a group element given as a word.
    fn act(&self, g: &str, x: &NodeOf<Self>) -> Result<NodeOf<Self>>;

    /// All `γ` with `γ·x = y`, as words; empty if `y ∉ Γ·x`.
    fn transporters(&self, x: &NodeOf<Self>, y: &NodeOf<Self>) -> Result<Vec<String>>;

    fn inverse_element(&self, g: &str) -> Result<String>;

    /// Graph distance `d(x, y)`.
    fn displacement(&self, x: &NodeOf<Self>, y: &NodeOf<Self>) -> Result<u64>;

    /// Whether the given elements generate `Γ`; `None` if this family cannot
    /// certify it.
    fn generated_by(&self, elements: &[String]) -> Option<bool>;

    /// Whether conductance preservation was verified on every edge rather
    /// than sampled.
    fn exhaustively_checked(&self) -> bool {
        false
    }
}

/// Outcome of a conductance-preservation check.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub checked_edges: usize,
    pub failures: usize,
    /// `"exact"` for finite actions, `"sampled invariant"` otherwise.
    pub mode: String,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks `a(gx, gy) = a(x, y)` on `samples` random edges near the
/// fundamental domain and random generators.
pub fn check_conductance_invariance<A: LatticeAction>(
    action: &A,
    samples: usize,
    stream: &RngStream,
) -> Result<InvarianceReport> {
    let net = action.network();
    let domain = action.fundamental_domain(10_000);
    let gens = action.generators();
    if domain.nodes.is_empty() || gens.is_empty() {
        return Err(Error::InvalidAction("empty fundamental domain or generating set".into()));
    }
    let mut rng = stream.rng();
    let mut failures = 0;
    for _ in 0..samples {
        let mut x = domain.nodes[rng.gen_range(0..domain.nodes.len())].clone();
        for _ in 0..rng.gen_range(0..12) {
            x = net.random_step(&x, &mut rng)?;
        }
        let nbrs = net.neighbors(&x)?;
        let (y, a) = nbrs[rng.gen_range(0..nbrs.len())].clone();
        let g = &gens[rng.gen_range(0..gens.len())];
        let (gx, gy) = (action.act(g, &x)?, action.act(g, &y)?);
        if net.conductance(&gx, &gy)? != a {
            failures += 1;
        }
    }
    let mode = if action.exhaustively_checked() { "exact" } else { "sampled invariant" };
    Ok(InvarianceReport { checked_edges: samples, failures, mode: mode.into() })
}

/// A finite group of permutations of a finite network's nodes.
#[derive(Debug, Clone)]
pub struct FinitePermutationAction {
    net: FiniteNetwork,
    generators: Vec<Vec<usize>>,
    elements: Vec<Vec<usize>>,
    words: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    orbit_rep: Vec<usize>,
    orbit_size: Vec<usize>,
}

/// Largest group accepted by [`FinitePermutationAction`].
pub const MAX_GROUP_ORDER: usize = 100_000;

#[derive(Deserialize)]
struct ActionJson {
    generators: Vec<Vec<usize>>,
}

fn compose(g: &[usize], h: &[usize]) -> Vec<usize> {
    h.iter().map(|&x| g[x]).collect()
}

impl FinitePermutationAction {
    /// Closes the generators to a group and verifies that each preserves
    /// every conductance exactly.
    pub fn new(net: FiniteNetwork, generators: Vec<Vec<usize>>) -> Result<Self> {
        let n = net.len();
        for (i, g) in generators.iter().enumerate() {
            let image: BTreeSet<usize> = g.iter().copied().collect();
            if g.len() != n || image.len() != n || image.iter().any(|&v| v >= n) {
                return Err(Error::InvalidAction(format!("generator {} is not a permutation of 0..{n}", i + 1)));
            }
            for (u, v, a) in net.edges() {
                if net.a(g[u], g[v]) != a {
                    return Err(Error::NotConductancePreserving(format!("generator {} on edge ({u},{v})", i + 1)));
                }
            }
        }
        let identity: Vec<usize> = (0..n).collect();
        let mut elements = vec![identity.clone()];
        let mut words = vec![Vec::new()];
        let mut index = HashMap::from([(identity, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            for (gi, g) in generators.iter().enumerate() {
                let next = compose(g, &elements[e]);
                if !index.contains_key(&next) {
                    if elements.len() >= MAX_GROUP_ORDER {
                        return Err(Error::SizeGuard(format!("group order exceeds {MAX_GROUP_ORDER}")));
                    }
                    let mut w = vec![gi];
                    w.extend(&words[e]);
                    index.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                    words.push(w);
                }
            }
        }
        let mut orbit_rep = vec![usize::MAX; n];
        let mut orbit_size = vec![0; n];
        for x in 0..n {
            let orbit: BTreeSet<usize> = elements.iter().map(|e| e[x]).collect();
            orbit_rep[x] = *orbit.iter().next().expect("non-empty orbit");
            orbit_size[x] = orbit.len();
        }
        Ok(Self { net, generators, elements, words, index, orbit_rep, orbit_size })
    }

    /// Reads `{"generators": [[perm], ...]}`.
    pub fn from_json(net: FiniteNetwork, text: &str) -> Result<Self> {
        let doc: ActionJson = serde_json::from_str(text)?;
        Self::new(net, doc.generators)
    }

    /// The cyclic group generated by rotating an `n`-cycle by `shift`.
    pub fn cycle_rotation(n: usize, shift: usize) -> Result<Self> {
        let rot = (0..n).map(|i| (i + shift) % n).collect();
        Self::new(crate::netwalk::cycle_network(n), vec![rot])
    }

    pub fn trivial(net: FiniteNetwork) -> Result<Self> {
        Self::new(net, Vec::new())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    fn word_string(&self, e: usize) -> String {
        if self.words[e].is_empty() {
            return "e".into();
        }
        self.words[e].iter().map(|g| format!("g{}", g + 1)).collect::<Vec<_>>().join("*")
    }

    fn parse(&self, g: &str) -> Result<Vec<usize>> {
        let mut perm: Vec<usize> = (0..self.net.len()).collect();
        if g == "e" {
            return Ok(perm);
        }
        for part in g.split('*').rev() {
            let i: usize = part
                .strip_prefix('g')
                .and_then(|s| s.parse().ok())
                .filter(|i| (1..=self.generators.len()).contains(i))
                .ok_or_else(|| Error::InvalidInput(format!("bad group word {g}")))?;
            perm = compose(&self.generators[i - 1], &perm);
        }
        Ok(perm)
    }

    fn graph_distance(&self, x: usize, y: usize) -> Option<u64> {
        let mut dist = vec![u64::MAX; self.net.len()];
        dist[x] = 0;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            if u == y {
                return Some(dist[u]);
            }
            for &v in self.net.row(u).keys() {
                if dist[v] == u64::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

impl LatticeAction for FinitePermutationAction {
    type Net = FiniteNetwork;

    fn network(&self) -> &FiniteNetwork {
        &self.net
    }

    fn describe(&self) -> String {
        format!("permutation group of order {} on {} nodes", self.order(), self.net.len())
    }

    fn node_label(&self, x: &usize) -> String {
        self.net.label(*x).to_string()
    }

    fn canonical(&self, x: &usize) -> usize {
        self.orbit_rep[*x]
    }

    fn stabilizer_order(&self, x: &usize) -> Result<u64> {
        Ok((self.order() / self.orbit_size[*x]) as u64)
    }

    fn fundamental_domain(&self, _limit: usize) -> FundamentalDomain<usize> {
        let nodes: BTreeSet<usize> = self.orbit_rep.iter().copied().collect();
        FundamentalDomain { nodes: nodes.into_iter().collect(), complete: true }
    }

    fn generators(&self) -> Vec<String> {
        (1..=self.generators.len()).map(|i| format!("g{i}")).collect()
    }

    fn act(&self, g: &str, x: &usize) -> Result<usize> {
        Ok(self.parse(g)?[*x])
    }

    fn transporters(&self, x: &usize, y: &usize) -> Result<Vec<String>> {
        Ok((0..self.order()).filter(|&e| self.elements[e][*x] == *y).map(|e| self.word_string(e)).collect())
    }

    fn inverse_element(&self, g: &str) -> Result<String> {
        let perm = self.parse(g)?;
        let mut inv = vec![0; perm.len()];
        for (i, &v) in perm.iter().enumerate() {
            inv[v] = i;
        }
        Ok(self.word_string(self.index[&inv]))
    }

    fn displacement(&self, x: &usize, y: &usize) -> Result<u64> {
        self.graph_distance(*x, *y).ok_or_else(|| Error::Unreachable(self.net.label(*y).to_string()))
    }

    fn generated_by(&self, elements: &[String]) -> Option<bool> {
        let perms: Vec<Vec<usize>> = elements.iter().map(|g| self.parse(g)).collect::<Result<_>>().ok()?;
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::from([(0..self.net.len()).collect()]);
        let mut queue: VecDeque<Vec<usize>> = seen.iter().cloned().collect();
        while let Some(e) = queue.pop_front() {
            for g in &perms {
                let next = compose(g, &e);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        Some(seen.len() == self.order())
    }

    fn exhaustively_checked(&self) -> bool {
        true
    }
}

/// `kZ` acting on the integer line by translation.
#[derive(Debug, Clone)]
pub struct IntegerTranslations {
    period: i64,
    line: IntegerLine,
}

impl IntegerTranslations {
    pub fn new(period: i64) -> Result<Self> {
        if period < 1 {
            return Err(Error::InvalidAction(format!("period {period} must be positive")));
        }
        Ok(Self { period, line: IntegerLine })
    }

    pub fn period(&self) -> i64 {
        self.period
    }

    fn parse(&self, g: &str) -> Result<i64> {
        let t: i64 = g.parse().map_err(|_| Error::InvalidInput(format!("bad translation {g}")))?;
        if t % self.period != 0 {
            return Err(Error::InvalidInput(format!("{t} is not in {}Z", self.period)));
        }
        Ok(t)
    }
}

impl LatticeAction for IntegerTranslations {
    type Net = IntegerLine;

    fn network(&self) -> &IntegerLine {
        &self.line
    }

    fn describe(&self) -> String {
        format!("{}Z translating Z", self.period)
    }

    fn node_label(&self, x: &i64) -> String {
        x.to_string()
    }

    fn canonical(&self, x: &i64) -> i64 {
        x.rem_euclid(self.period)
    }

    fn stabilizer_order(&self, _: &i64) -> Result<u64> {
        Ok(1)
    }

    fn fundamental_domain(&self, limit: usize) -> FundamentalDomain<i64> {
        let complete = self.period as usize <= limit;
        FundamentalDomain { nodes: (0..self.period.min(limit as i64)).collect(), complete }
    }

    fn generators(&self) -> Vec<String> {
        vec![self.period.to_string()]
    }

    fn act(&self, g: &str, x: &i64) -> Result<i64> {
        Ok(x + self.parse(g)?)
    }

    fn transporters(&self, x: &i64, y: &i64) -> Result<Vec<String>> {
        let d = y - x;
        Ok(if d % self.period == 0 { vec![d.to_string()] } else { Vec::new() })
    }

    fn inverse_element(&self, g: &str) -> Result<String> {
        Ok((-self.parse(g)?).to_string())
    }

    fn displacement(&self, x: &i64, y: &i64) -> Result<u64> {
        Ok(x.abs_diff(*y))
    }

    fn generated_by(&self, elements: &[String]) -> Option<bool> {
        let g = elements
            .iter()
            .map(|e| self.parse(e))
            .collect::<Result<Vec<_>>>()
            .ok()?
            .into_iter()
            .fold(0i64, |a, b| a.gcd(&b));
        Some(g == self.period)
    }
}

/// A free group acting on its Cayley tree by left multiplication.
#[derive(Debug, Clone)]
pub struct FreeGroupAction {
    tree: FreeGroupTree,
}

impl FreeGroupAction {
    pub fn new(rank: u8) -> Result<Self> {
        Ok(Self { tree: FreeGroupTree::new(rank)? })
    }
}

impl LatticeAction for FreeGroupAction {
    type Net = FreeGroupTree;

    fn network(&self) -> &FreeGroupTree {
        &self.tree
    }

    fn describe(&self) -> String {
        format!("free group of rank {} on its Cayley tree", self.tree.rank())
    }

    fn node_label(&self, x: &Word) -> String {
        self.tree.word_string(x)
    }

    fn canonical(&self, _: &Word) -> Word {
        Vec::new()
    }

    fn stabilizer_order(&self, _: &Word) -> Result<u64> {
        Ok(1)
    }

    fn fundamental_domain(&self, _: usize) -> FundamentalDomain<Word> {
        FundamentalDomain { nodes: vec![Vec::new()], complete: true }
    }

    fn generators(&self) -> Vec<String> {
        self.tree.letters().step_by(2).map(|l| self.tree.word_string(&[l])).collect()
    }

    fn act(&self, g: &str, x: &Word) -> Result<Word> {
        Ok(self.tree.mul(&self.tree.parse_word(g)?, x))
    }

    fn transporters(&self, x: &Word, y: &Word) -> Result<Vec<String>> {
        Ok(vec![self.tree.word_string(&self.tree.mul(y, &self.tree.inverse(x)))])
    }

    fn inverse_element(&self, g: &str) -> Result<String> {
        Ok(self.tree.word_string(&self.tree.inverse(&self.tree.parse_word(g)?)))
    }

    fn displacement(&self, x: &Word, y: &Word) -> Result<u64> {
        Ok(word_distance(x, y) as u64)
    }

    /// Certifies only the sufficient condition that every generator or its
    /// inverse occurs.
    fn generated_by(&self, elements: &[String]) -> Option<bool> {
        let words: BTreeSet<Word> = elements.iter().filter_map(|e| self.tree.parse_word(e).ok()).collect();
        let all = self.tree.letters().step_by(2).all(|l| words.contains(&vec![l]) || words.contains(&vec![l ^ 1]));
        all.then_some(true)
    }
}

/// The free product of `q+1` copies of `Z/2` acting on the `(q+1)`-regular
/// tree, its Cayley graph, by left multiplication.
#[derive(Debug, Clone)]
pub struct FreeProductAction {
    tree: TreeBuilding,
}

impl FreeProductAction {
    pub fn new(q: u64) -> Result<Self> {
        Ok(Self { tree: TreeBuilding::new(q)? })
    }
}

impl LatticeAction for FreeProductAction {
    type Net = TreeBuilding;

    fn network(&self) -> &TreeBuilding {
        &self.tree
    }

    fn describe(&self) -> String {
        format!("free product of {} involutions on the {}-regular tree", self.tree.degree(), self.tree.degree())
    }

    fn node_label(&self, x: &Word) -> String {
        self.tree.word_string(x)
    }

    fn canonical(&self, _: &Word) -> Word {
        Vec::new()
    }

    fn stabilizer_order(&self, _: &Word) -> Result<u64> {
        Ok(1)
    }

    fn fundamental_domain(&self, _: usize) -> FundamentalDomain<Word> {
        FundamentalDomain { nodes: vec![Vec::new()], complete: true }
    }

    fn generators(&self) -> Vec<String> {
        (0..self.tree.degree() as u8).map(|l| self.tree.word_string(&[l])).collect()
    }

    fn act(&self, g: &str, x: &Word) -> Result<Word> {
        Ok(self.tree.left_mul(&self.tree.parse_word(g)?, x))
    }

    fn transporters(&self, x: &Word, y: &Word) -> Result<Vec<String>> {
        Ok(vec![self.tree.word_string(&self.tree.left_mul(y, &self.tree.inverse(x)))])
    }

    fn inverse_element(&self, g: &str) -> Result<String> {
        Ok(self.tree.word_string(&self.tree.inverse(&self.tree.parse_word(g)?)))
    }

    fn displacement(&self, x: &Word, y: &Word) -> Result<u64> {
        Ok(word_distance(x, y) as u64)
    }

    fn generated_by(&self, elements: &[String]) -> Option<bool> {
        let words: BTreeSet<Word> = elements.iter().filter_map(|e| self.tree.parse_word(e).ok()).collect();
        (0..self.tree.degree() as u8).all(|l| words.contains(&vec![l])).then_some(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netwalk::{cycle_network, path_network};
    use crate::rational::q_int;

    #[test]
    fn cycle_rotation_orbits() {
        let a = FinitePermutationAction::cycle_rotation(6, 2).unwrap();
        assert_eq!(a.order(), 3);
        assert_eq!(a.fundamental_domain(10).nodes, vec![0, 1]);
        assert_eq!(a.canonical(&4), 0);
        assert_eq!(a.canonical(&5), 1);
        assert_eq!(a.stabilizer_order(&3).unwrap(), 1);
        assert_eq!(a.transporters(&1, &5).unwrap(), vec!["g1*g1".to_string()]);
        assert_eq!(a.act("g1*g1", &1).unwrap(), 5);
        assert_eq!(a.inverse_element("g1").unwrap(), "g1*g1");
        assert_eq!(a.displacement(&0, &4).unwrap(), 2);
        assert_eq!(a.generated_by(&["g1*g1".into()]), Some(true));
        assert_eq!(a.generated_by(&["e".into()]), Some(false));
    }

    #[test]
    fn reflections_have_stabilizers() {
        let reflect = vec![0, 5, 4, 3, 2, 1];
        let a = FinitePermutationAction::new(cycle_network(6), vec![reflect]).unwrap();
        assert_eq!(a.stabilizer_order(&0).unwrap(), 2);
        assert_eq!(a.stabilizer_order(&1).unwrap(), 1);
        assert_eq!(a.transporters(&0, &0).unwrap().len(), 2);
    }

    #[test]
    fn rejects_invalid_generators() {
        assert!(matches!(
            FinitePermutationAction::new(path_network(3), vec![vec![1, 0, 2]]),
            Err(Error::NotConductancePreserving(_))
        ));
        assert!(FinitePermutationAction::new(path_network(3), vec![vec![0, 0, 2]]).is_err());
        let json = r#"{"generators": [[2, 1, 0]]}"#;
        let a = FinitePermutationAction::from_json(path_network(3), json).unwrap();
        assert_eq!(a.order(), 2);
        let weighted = FiniteNetwork::from_edges(3, &[(0, 1, q_int(1)), (1, 2, q_int(2))]).unwrap();
        assert!(FinitePermutationAction::from_json(weighted, json).is_err());
    }

    #[test]
    fn integer_translations() {
        let a = IntegerTranslations::new(2).unwrap();
        assert_eq!(a.canonical(&-3), 1);
        assert_eq!(a.transporters(&1, &-3).unwrap(), vec!["-4".to_string()]);
        assert!(a.transporters(&0, &1).unwrap().is_empty());
        assert_eq!(a.act("4", &1).unwrap(), 5);
        assert!(a.act("3", &1).is_err());
        assert_eq!(a.generated_by(&["2".into(), "-2".into(), "0".into()]), Some(true));
        assert_eq!(a.generated_by(&["4".into()]), Some(false));
    }

    #[test]
    fn tree_actions() {
        let f = FreeGroupAction::new(2).unwrap();
        let x = f.network().parse_word("ab").unwrap();
        let y = f.network().parse_word("aBa").unwrap();
        let g = f.transporters(&x, &y).unwrap().pop().unwrap();
        assert_eq!(f.act(&g, &x).unwrap(), y);
        assert_eq!(f.inverse_element("ab").unwrap(), "BA");
        assert_eq!(f.generated_by(&["a".into(), "B".into()]), Some(true));
        assert_eq!(f.generated_by(&["a".into()]), None);
        let t = FreeProductAction::new(2).unwrap();
        let x = t.network().parse_word("ab").unwrap();
        let y = t.network().parse_word("cac").unwrap();
        let g = t.transporters(&x, &y).unwrap().pop().unwrap();
        assert_eq!(t.act(&g, &x).unwrap(), y);
    }

    #[test]
    fn sampled_invariance() {
        let s = RngStream::new(3);
        let r = check_conductance_invariance(&FreeGroupAction::new(2).unwrap(), 10_000, &s).unwrap();
        assert!(r.passed());
        assert_eq!(r.mode, "sampled invariant");
        assert!(check_conductance_invariance(&IntegerTranslations::new(3).unwrap(), 1000, &s).unwrap().passed());
        assert!(check_conductance_invariance(&FreeProductAction::new(3).unwrap(), 1000, &s).unwrap().passed());
        let fin =
            check_conductance_invariance(&FinitePermutationAction::cycle_rotation(6, 2).unwrap(), 100, &s).unwrap();
        assert!(fin.passed());
        assert_eq!(fin.mode, "exact");
    }
}
