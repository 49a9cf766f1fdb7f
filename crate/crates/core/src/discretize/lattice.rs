use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::action::{covolume, LatticeAction, NodeOf};
use crate::netwalk::{MarkovKernel, Network};
use crate::rational::{format, to_f64, Q};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentKind {
    First,
    Exponential(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEntry {
    pub element: String,
    pub prob: Q,
    /// `d(o, γo)`.
    pub distance: u64,
}

/// A probability measure `μ` on the group with `μ(γ) = q(o, γo)/|Γ_o|`.
#[derive(Debug, Clone)]
pub struct LatticeMeasure {
    pub base: String,
    pub stabilizer_order: u64,
    pub symmetric: bool,
    /// `"exact"` or `"float"`.
    pub provenance: String,
    /// Whether the support generates the group; `None` if uncertified.
    pub admissible: Option<bool>,
    /// On transitive actions, whether `μ(γ) = p(o, γo)/|Γ_o|` agrees with
    /// the general construction.
    pub fast_path_agrees: Option<bool>,
    pub measure: Vec<MeasureEntry>,
}

impl LatticeMeasure {
    pub fn prob(&self, element: &str) -> Q {
        self.measure.iter().find(|e| e.element == element).map(|e| e.prob.clone()).unwrap_or_else(Q::zero)
    }

    pub fn total_mass(&self) -> Q {
        self.measure.iter().map(|e| &e.prob).sum()
    }

    pub fn support(&self) -> Vec<String> {
        self.measure.iter().map(|e| e.element.clone()).collect()
    }

    /// `Σ μ(γ) d(o, γo)`.
    pub fn first_moment(&self) -> Q {
        self.measure.iter().map(|e| &e.prob * Q::from_integer(e.distance.into())).sum()
    }

    pub fn moment(&self, kind: MomentKind) -> f64 {
        match kind {
            MomentKind::First => to_f64(&self.first_moment()),
            MomentKind::Exponential(c) => {
                self.measure.iter().map(|e| to_f64(&e.prob) * (c * e.distance as f64).exp()).sum()
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let admissible = match self.admissible {
            Some(b) => json!(b),
            None => json!("unchecked"),
        };
        json!({
            "base": self.base,
            "stabilizer_order": self.stabilizer_order,
            "symmetric": self.symmetric,
            "provenance": self.provenance,
            "admissible": admissible,
            "measure": self.measure.iter().map(|e| json!({
                "element": e.element,
                "prob": format(&e.prob),
                "distance": e.distance,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Region explored by excursions from `o` before returning to `Γ·o`.
struct Excursions<N> {
    nodes: Vec<N>,
    targets: BTreeSet<usize>,
    rows: Vec<Vec<(usize, Q)>>,
    start_row: Vec<(usize, Q)>,
}

fn explore<A: LatticeAction>(action: &A, o: &NodeOf<A>, limit: usize) -> Result<Excursions<NodeOf<A>>> {
    let net = action.network();
    let orbit = action.canonical(o);
    let mut index: HashMap<NodeOf<A>, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut targets = BTreeSet::new();
    let mut queue = VecDeque::new();
    let mut register = |y: &NodeOf<A>, nodes: &mut Vec<NodeOf<A>>, queue: &mut VecDeque<usize>| -> Result<usize> {
        if let Some(&i) = index.get(y) {
            return Ok(i);
        }
        if nodes.len() >= limit {
            return Err(Error::SizeGuard(format!("excursion region exceeds {limit} nodes")));
        }
        let i = nodes.len();
        index.insert(y.clone(), i);
        nodes.push(y.clone());
        if action.canonical(y) == orbit {
            targets.insert(i);
        } else {
            queue.push_back(i);
        }
        Ok(i)
    };
    let step_row = |x: &NodeOf<A>,
                    nodes: &mut Vec<NodeOf<A>>,
                    queue: &mut VecDeque<usize>,
                    register: &mut Register<'_, NodeOf<A>>|
     -> Result<Vec<(usize, Q)>> {
        let m = net.total_conductance(x)?;
        let mut row: BTreeMap<usize, Q> = BTreeMap::new();
        for (y, a) in net.neighbors(x)? {
            *row.entry(register(&y, nodes, queue)?).or_insert_with(Q::zero) += a / &m;
        }
        Ok(row.into_iter().collect())
    };
    let start_row = step_row(o, &mut nodes, &mut queue, &mut register)?;
    let mut rows: BTreeMap<usize, Vec<(usize, Q)>> = BTreeMap::new();
    while let Some(i) = queue.pop_front() {
        let x = nodes[i].clone();
        let row = step_row(&x, &mut nodes, &mut queue, &mut register)?;
        rows.insert(i, row);
    }
    let rows =
        (0..nodes.len()).map(|i| rows.remove(&i).unwrap_or_else(|| vec![(i, Q::from_integer(1.into()))])).collect();
    Ok(Excursions { nodes, targets, rows, start_row })
}

type Register<'r, N> = dyn FnMut(&N, &mut Vec<N>, &mut VecDeque<usize>) -> Result<usize> + 'r;

/// Discretizes the walk on a lattice action to a measure on the group.
pub fn discretize_lattice<A: LatticeAction>(action: &A, o: &NodeOf<A>, limit: usize) -> Result<LatticeMeasure> {
    if covolume(action, limit)?.value().is_none() {
        return Err(Error::RecurrenceUnknown);
    }
    let stab = action.stabilizer_order(o)?;
    let stab_q = Q::from_integer(stab.into());
    let ex = explore(action, o, limit)?;
    let labels = ex.nodes.iter().map(|x| action.node_label(x)).collect();
    let kernel = MarkovKernel::from_rows(labels, ex.rows)?;
    let abs = kernel.absorption(&ex.targets)?;
    let mut q: BTreeMap<usize, Q> = BTreeMap::new();
    let mut leaked = Q::zero();
    for (z, p) in &ex.start_row {
        leaked += p * &abs.leaked[*z];
        for (t, h) in &abs.probs[*z] {
            *q.entry(*t).or_insert_with(Q::zero) += p * h;
        }
    }
    if leaked.is_positive() && to_f64(&leaked) > 1e-12 {
        return Err(Error::Unreachable(format!("walk from {} escapes its orbit", action.node_label(o))));
    }
    let mut measure = Vec::new();
    for (t, qt) in &q {
        if qt.is_zero() {
            continue;
        }
        let target = &ex.nodes[*t];
        let elements = action.transporters(o, target)?;
        if elements.len() as u64 != stab {
            return Err(Error::InvalidAction(format!(
                "{} transporters to {} but |Γ_o| = {stab}",
                elements.len(),
                action.node_label(target)
            )));
        }
        let distance = action.displacement(o, target)?;
        for element in elements {
            measure.push(MeasureEntry { element, prob: qt / &stab_q, distance });
        }
    }
    measure.sort_by(|a, b| (a.distance, &a.element).cmp(&(b.distance, &b.element)));
    let fast_path_agrees =
        if action.fundamental_domain(2).nodes.len() == 1 { Some(fast_path(action, o, stab)? == measure) } else { None };
    let mut result = LatticeMeasure {
        base: action.node_label(o),
        stabilizer_order: stab,
        symmetric: false,
        provenance: if abs.method.is_exact() { "exact" } else { "float" }.into(),
        admissible: None,
        fast_path_agrees,
        measure,
    };
    let mut symmetric = true;
    for e in &result.measure {
        if result.prob(&action.inverse_element(&e.element)?) != e.prob {
            symmetric = false;
        }
    }
    result.symmetric = symmetric;
    result.admissible = action.generated_by(&result.support());
    Ok(result)
}

/// `μ(γ) = p(o, γo)/|Γ_o|`, valid when `Γ` acts transitively.
fn fast_path<A: LatticeAction>(action: &A, o: &NodeOf<A>, stab: u64) -> Result<Vec<MeasureEntry>> {
    let net = action.network();
    let m = net.total_conductance(o)? * Q::from_integer(stab.into());
    let mut probs: BTreeMap<String, (Q, u64)> = BTreeMap::new();
    for (y, a) in net.neighbors(o)? {
        let distance = action.displacement(o, &y)?;
        for element in action.transporters(o, &y)? {
            probs.entry(element).or_insert_with(|| (Q::zero(), distance)).0 += &a / &m;
        }
    }
    let mut out: Vec<MeasureEntry> =
        probs.into_iter().map(|(element, (prob, distance))| MeasureEntry { element, prob, distance }).collect();
    out.sort_by(|a, b| (a.distance, &a.element).cmp(&(b.distance, &b.element)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{FinitePermutationAction, FreeGroupAction, FreeProductAction, IntegerTranslations};
    use crate::netwalk::cycle_network;
    use crate::rational::{q_frac, q_int};

    #[test]
    fn free_group_is_uniform_on_generators() {
        let mu = discretize_lattice(&FreeGroupAction::new(2).unwrap(), &Vec::new(), 1000).unwrap();
        assert_eq!(mu.support(), vec!["A", "B", "a", "b"]);
        assert!(mu.measure.iter().all(|e| e.prob == q_frac(1, 4)));
        assert_eq!(mu.first_moment(), q_int(1));
        assert_eq!(mu.moment(MomentKind::Exponential(0.0)), 1.0);
        assert!(mu.symmetric);
        assert_eq!(mu.admissible, Some(true));
        assert_eq!(mu.fast_path_agrees, Some(true));
        assert_eq!(mu.provenance, "exact");
    }

    #[test]
    fn integer_actions() {
        let mu = discretize_lattice(&IntegerTranslations::new(1).unwrap(), &0, 1000).unwrap();
        assert_eq!(mu.prob("1"), q_frac(1, 2));
        assert_eq!(mu.prob("-1"), q_frac(1, 2));
        let mu = discretize_lattice(&IntegerTranslations::new(2).unwrap(), &0, 1000).unwrap();
        assert_eq!(mu.prob("0"), q_frac(1, 2));
        assert_eq!(mu.prob("2"), q_frac(1, 4));
        assert_eq!(mu.prob("-2"), q_frac(1, 4));
        assert_eq!(mu.total_mass(), q_int(1));
        assert_eq!(mu.first_moment(), q_int(1));
        assert!(mu.symmetric);
        assert_eq!(mu.admissible, Some(true));
        assert_eq!(mu.fast_path_agrees, None);
        let json = mu.to_json();
        assert_eq!(json["measure"][0]["element"], "0");
        assert_eq!(json["measure"][0]["prob"], "1/2");
    }

    #[test]
    fn absorption_oracle_on_window() {
        // Brute force on {-2..2} with ±2 and 0 absorbing after one step from 0.
        let window = crate::netwalk::path_network(5).kernel().unwrap();
        let abs = window.absorption(&BTreeSet::from([0, 2, 4])).unwrap();
        let from_zero: Q = [1usize, 3].iter().map(|&z| q_frac(1, 2) * abs.probs[z][&2].clone()).sum();
        let mu = discretize_lattice(&IntegerTranslations::new(2).unwrap(), &0, 1000).unwrap();
        assert_eq!(mu.prob("0"), from_zero);
    }

    #[test]
    fn finite_actions_with_stabilizers() {
        let reflect = FinitePermutationAction::new(cycle_network(4), vec![vec![0, 3, 2, 1]]).unwrap();
        let mu = discretize_lattice(&reflect, &0, 100).unwrap();
        assert_eq!(mu.stabilizer_order, 2);
        assert_eq!(mu.total_mass(), q_int(1));
        assert!(mu.symmetric);
        let rot = FinitePermutationAction::cycle_rotation(6, 2).unwrap();
        let mu = discretize_lattice(&rot, &0, 100).unwrap();
        assert_eq!(mu.total_mass(), q_int(1));
        assert!(mu.symmetric);
    }

    #[test]
    fn tree_free_product() {
        let mu = discretize_lattice(&FreeProductAction::new(2).unwrap(), &Vec::new(), 100).unwrap();
        assert_eq!(mu.measure.len(), 3);
        assert!(mu.measure.iter().all(|e| e.prob == q_frac(1, 3)));
        assert_eq!(mu.fast_path_agrees, Some(true));
    }

    #[test]
    fn unknown_covolume_is_an_error() {
        assert!(matches!(
            discretize_lattice(&IntegerTranslations::new(50).unwrap(), &0, 10),
            Err(Error::RecurrenceUnknown)
        ));
    }
}
