//! Named verification suites for `verify`.

use std::collections::BTreeSet;

use chamberwalk::action::{
    quotient_law_check, quotient_network, return_time_stats, FinitePermutationAction, FreeGroupAction,
    FreeProductAction, IntegerTranslations, LatticeAction,
};
use chamberwalk::boundary::{
    boundary_hitting_mc, m_measure_check, m_measure_translation_check, radon_nikodym_check, random_pi_for_subset,
    special_subgroup_detect, tree_shadow_pairs, CylinderMeasure, IsotropicKernel,
};
use chamberwalk::buildings::{ball, word_distance, A2Ball, A2Building, BuildingModel, SphericalA2, TreeBuilding, Word};
use chamberwalk::coxeter::{coordinate_box, Coweight};
use chamberwalk::discretize::{
    boundary_preservation_defect, discretize_lattice, harmonic_transfer_check, induced_kernel_exact, tower_defect,
    DEFAULT_HORIZON,
};
use chamberwalk::netwalk::{cycle_network, path_network, FiniteNetwork, MarkovKernel, RngStream, DEFAULT_ALPHA};
use chamberwalk::rational::{q_frac, q_int, Q};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::commands::{require_seed, DOMAIN_LIMIT};
use crate::config::Settings;
use crate::report::Check;
use crate::Failure;

type SuiteResult = Result<(Vec<Check>, Value), Failure>;

pub const SUITES: &[&str] = &[
    "tree-nlambda",
    "a2-nlambda",
    "induced-walk",
    "quotient",
    "return-times",
    "discretize",
    "harmonic-measure",
    "tree-hitting",
    "a2-hitting",
    "opposite-chamber",
    "special-subgroup",
];

/// Suites that draw random numbers and therefore need a seed.
pub const STOCHASTIC: &[&str] =
    &["induced-walk", "quotient", "return-times", "tree-hitting", "a2-hitting", "opposite-chamber", "special-subgroup"];

/// Expands `all` and rejects unknown names.
pub fn expand(names: &[String]) -> Result<Vec<String>, Failure> {
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(SUITES.iter().map(|s| s.to_string()));
        } else if SUITES.contains(&n.as_str()) {
            out.push(n.clone());
        } else {
            return Err(Failure::Schema(format!("unknown suite {n}; known: all, {}", SUITES.join(", "))));
        }
    }
    Ok(out)
}

/// Each suite draws from its own stream of the master seed.
fn suite_stream(name: &str, s: &Settings) -> Result<RngStream, Failure> {
    let seed = require_seed(s)?.seed;
    let index = SUITES.iter().position(|n| *n == name).unwrap_or(0) as u64;
    Ok(RngStream::with_stream(seed, 100 + index))
}

pub fn run(name: &str, s: &Settings) -> SuiteResult {
    match name {
        "tree-nlambda" => tree_nlambda(s),
        "a2-nlambda" => a2_nlambda(s),
        "induced-walk" => induced_walk(s, &suite_stream(name, s)?),
        "quotient" => quotient(s, &suite_stream(name, s)?),
        "return-times" => return_times(s, &suite_stream(name, s)?),
        "discretize" => discretize(),
        "harmonic-measure" => harmonic_measure(),
        "tree-hitting" => tree_hitting(s, &suite_stream(name, s)?),
        "a2-hitting" => a2_hitting(s, &suite_stream(name, s)?),
        "opposite-chamber" => opposite_chamber(&suite_stream(name, s)?),
        "special-subgroup" => special_subgroup(&suite_stream(name, s)?),
        other => Err(Failure::Schema(format!("unknown suite {other}"))),
    }
}

fn tree_nlambda(s: &Settings) -> SuiteResult {
    let q = s.q_single(2);
    let tree = TreeBuilding::new(q)?;
    let root = tree.root();
    let nodes = ball(&tree, &root, 8, 1 << 24)?;
    let mut counts = [0i64; 9];
    for x in &nodes {
        counts[word_distance(&root, x)] += 1;
    }
    let mut checks = Vec::new();
    for (k, &count) in counts.iter().enumerate().skip(1) {
        let n = tree.coxeter().n_lambda(&Coweight::new(vec![k as i64]))?;
        checks.push(Check::exact("n_lambda", json!({"q": q, "k": k}), &(n - q_int(count))));
    }
    Ok((checks, json!({"sphere_sizes": counts})))
}

fn a2_nlambda(s: &Settings) -> SuiteResult {
    let (p, radius) = (s.p.unwrap_or(2), s.radius.unwrap_or(2));
    let b = A2Ball::build(p, radius)?;
    let mut checks = Vec::new();
    let mut sizes = Vec::new();
    for coords in coordinate_box(2, radius.min(2)) {
        let lambda = Coweight::new(coords);
        let found = b.v_lambda(b.base(), &lambda)?.len() as i64;
        let n = b.coxeter().n_lambda(&lambda)?;
        sizes.push(json!({"lambda": lambda.coords, "count": found}));
        checks.push(Check::exact("n_lambda", json!({"p": p, "lambda": lambda.coords}), &(n - q_int(found))));
    }
    let mut iota_ok = true;
    for x in b.vertices().iter().take(30) {
        for y in b.vertices().iter().rev().take(30) {
            iota_ok &= b.sigma(y, x)? == b.coxeter().iota(&b.sigma(x, y)?);
        }
    }
    checks.push(Check::holds("sigma_reverse_is_iota", json!({"pairs": 900}), iota_ok));
    Ok((checks, json!({"ball_size": b.len(), "spheres": sizes})))
}

/// A random connected reversible chain on `n` states; with `symmetric`,
/// self-loops equalise `m` so that `P` is symmetric.
pub fn random_chain(n: usize, symmetric: bool, rng: &mut impl Rng) -> MarkovKernel {
    let mut net = FiniteNetwork::new(n);
    for i in 1..n {
        net.add_edge(rng.gen_range(0..i), i, q_int(rng.gen_range(1..6))).expect("valid edge");
    }
    for _ in 0..n {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        net.add_edge(u, v, q_frac(rng.gen_range(1..6), rng.gen_range(1..4))).expect("valid edge");
    }
    if symmetric {
        let top = (0..n).map(|x| net.m(x)).fold(Q::zero(), |a, b| if b > a { b } else { a });
        for x in 0..n {
            let gap = &top - net.m(x) + Q::one();
            net.add_edge(x, x, gap).expect("valid loop");
        }
    }
    net.kernel().expect("connected")
}

fn random_subset(from: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let k = rng.gen_range(1..=from.len());
    let mut v: Vec<usize> = from.choose_multiple(rng, k).copied().collect();
    v.sort_unstable();
    v
}

fn induced_walk(s: &Settings, stream: &RngStream) -> SuiteResult {
    let chains = s.n.unwrap_or(50);
    let mut rng = stream.rng();
    let mut row_defect = Q::zero();
    let mut symmetric_ok = true;
    let mut symmetric_chains = 0;
    let mut transfer = 0f64;
    let mut tower = Q::zero();
    let mut boundary = Q::zero();
    let keep_max = |acc: &mut Q, d: Q| {
        if d > *acc {
            *acc = d;
        }
    };
    for i in 0..chains {
        let n = rng.gen_range(3..=30);
        let sym = i % 2 == 0;
        let k = random_chain(n, sym, &mut rng);
        let all: Vec<usize> = (0..n).collect();
        let y = random_subset(&all, &mut rng);
        let y2 = random_subset(&y, &mut rng);
        let z = random_subset(&y, &mut rng);
        let induced = induced_kernel_exact(&k, &y)?;
        keep_max(&mut row_defect, induced.row_sum_defect());
        if k.is_symmetric() {
            symmetric_chains += 1;
            symmetric_ok &= induced.kernel.is_symmetric();
        }
        let f: Vec<Q> = y.iter().map(|_| q_int(rng.gen_range(-5..6))).collect();
        let t = harmonic_transfer_check(&k, &y, &f)?;
        transfer = transfer.max(t.restriction_defect).max(t.interior_defect);
        if t.f_is_q_harmonic {
            transfer = transfer.max(t.global_defect);
        }
        keep_max(&mut tower, tower_defect(&k, &y, &y2)?);
        keep_max(&mut boundary, boundary_preservation_defect(&k, &y, &z)?);
    }
    let inputs = json!({"chains": chains});
    let checks = vec![
        Check::exact("row_sums", inputs.clone(), &row_defect),
        Check::holds("symmetry_inherited", json!({"symmetric_chains": symmetric_chains}), symmetric_ok),
        Check::within("harmonic_transfer", inputs.clone(), transfer, 1e-10),
        Check::exact("tower_property", inputs.clone(), &tower),
        Check::within("boundary_preservation", inputs, chamberwalk::rational::to_f64(&boundary), 1e-10),
    ];
    Ok((checks, json!({"symmetric_chains": symmetric_chains})))
}

fn quotient_exact<A: LatticeAction>(name: &str, action: &A, checks: &mut Vec<Check>) -> Result<usize, Failure> {
    let q = quotient_network(action, DOMAIN_LIMIT)?;
    let inputs = json!({"example": name});
    checks.push(Check::holds("a_prime_symmetric", inputs.clone(), true));
    checks.push(Check::exact("mass_identity", inputs.clone(), &q.mass_defect(action)?));
    checks.push(Check::exact("stationarity", inputs, &q.stationarity_defect()?));
    Ok(q.len())
}

fn quotient_law<A: LatticeAction>(name: &str, action: &A, s: &Settings, stream: &RngStream) -> Result<Check, Failure> {
    let q = quotient_network(action, DOMAIN_LIMIT)?;
    let (steps, samples) = (s.steps.unwrap_or(5), s.samples.unwrap_or(100_000));
    let law = quotient_law_check(action, &q, &q.reps()[0], steps, samples, s.workers(), stream)?;
    Ok(Check::statistical(
        "quotient_law",
        "statistical",
        json!({"example": name, "steps": steps, "samples": samples}),
        law.chi_square.p_value,
        law.chi_square.passes(DEFAULT_ALPHA),
    ))
}

fn quotient(s: &Settings, stream: &RngStream) -> SuiteResult {
    let mut checks = Vec::new();
    let z2 = IntegerTranslations::new(2)?;
    let rot2 = FinitePermutationAction::cycle_rotation(6, 2)?;
    let rot3 = FinitePermutationAction::cycle_rotation(6, 3)?;
    let reflection = FinitePermutationAction::new(cycle_network(6), vec![vec![0, 5, 4, 3, 2, 1]])?;
    let mut sizes = serde_json::Map::new();
    sizes.insert("integers/2".into(), json!(quotient_exact("integers/2", &z2, &mut checks)?));
    sizes.insert("cycle6/rot2".into(), json!(quotient_exact("cycle6/rot2", &rot2, &mut checks)?));
    sizes.insert("cycle6/rot3".into(), json!(quotient_exact("cycle6/rot3", &rot3, &mut checks)?));
    sizes.insert("cycle6/reflection".into(), json!(quotient_exact("cycle6/reflection", &reflection, &mut checks)?));
    sizes.insert(
        "free-product/2".into(),
        json!(quotient_exact("free-product/2", &FreeProductAction::new(2)?, &mut checks)?),
    );
    sizes.insert("free-group/2".into(), json!(quotient_exact("free-group/2", &FreeGroupAction::new(2)?, &mut checks)?));

    let zq = quotient_network(&z2, DOMAIN_LIMIT)?;
    let loop_defect = zq.a_prime(0, 1) - q_int(2);
    checks.push(Check::exact("integers/2_a_prime", json!({}), &loop_defect));

    checks.push(quotient_law("integers/2", &z2, s, &stream.child(0))?);
    checks.push(quotient_law("cycle6/rot2", &rot2, s, &stream.child(1))?);
    checks.push(quotient_law("cycle6/reflection", &reflection, s, &stream.child(2))?);
    Ok((checks, json!({"quotient_sizes": sizes})))
}

fn return_times(s: &Settings, stream: &RngStream) -> SuiteResult {
    let samples = s.samples.unwrap_or(100_000);
    let horizon = s.horizon.unwrap_or(DEFAULT_HORIZON);
    let c = s.c.unwrap_or(0.5);
    let mut checks = Vec::new();

    let z2 = quotient_network(&IntegerTranslations::new(2)?, DOMAIN_LIMIT)?;
    let rt = return_time_stats(z2.network(), 0, samples, s.workers(), &stream.child(0), Some(c), horizon)?;
    checks.push(Check::holds("integers/2_deterministic", json!({"samples": samples}), rt.min == 2 && rt.max == 2));
    let moment = rt.exp_moment.unwrap_or(f64::NAN);
    let target = (2.0 * c).exp();
    checks.push(Check::within("integers/2_exp_moment", json!({"c": c}), (moment - target).abs() / target, 1e-9));

    let rot3 = quotient_network(&FinitePermutationAction::cycle_rotation(6, 3)?, DOMAIN_LIMIT)?;
    let rt3 = return_time_stats(rot3.network(), 0, samples, s.workers(), &stream.child(1), Some(2.0), horizon)?;
    checks.push(Check::exact("cycle6/rot3_exact_mean", json!({}), &(rt3.exact_mean.clone() - q_int(3))));
    checks.push(Check::holds("cycle6/rot3_mean_within_3se", json!({"samples": samples}), rt3.mean_within(3.0)));
    let decays = rt3.tail.as_ref().is_some_and(|t| t.slope < 0.0);
    checks.push(Check::holds("cycle6/rot3_tail_decays", json!({}), decays));
    checks.push(Check::holds("cycle6/rot3_divergence_flagged", json!({"c": 2.0}), rt3.exp_moment_diverges));

    let rot2 = quotient_network(&FinitePermutationAction::cycle_rotation(6, 2)?, DOMAIN_LIMIT)?;
    let rt2 = return_time_stats(rot2.network(), 0, samples, s.workers(), &stream.child(2), None, horizon)?;
    checks.push(Check::holds("cycle6/rot2_mean_within_3se", json!({"samples": samples}), rt2.mean_within(3.0)));

    let results = json!({
        "integers/2": serde_json::to_value(&rt).expect("serializable"),
        "cycle6/rot3": serde_json::to_value(&rt3).expect("serializable"),
        "cycle6/rot2": serde_json::to_value(&rt2).expect("serializable"),
    });
    Ok((checks, results))
}

fn measure_defect(expected: &[(&str, Q)], mu: &chamberwalk::discretize::LatticeMeasure) -> Q {
    let mut d: Q = expected.iter().map(|(g, p)| (mu.prob(g) - p).abs()).sum();
    d += (Q::one() - mu.total_mass()).abs();
    d
}

fn discretize() -> SuiteResult {
    let mut checks = Vec::new();
    let free = FreeGroupAction::new(2)?;
    let mu = discretize_lattice(&free, &Vec::new(), DOMAIN_LIMIT)?;
    let quarter = q_frac(1, 4);
    let expected: Vec<(&str, Q)> = ["a", "A", "b", "B"].iter().map(|g| (*g, quarter.clone())).collect();
    checks.push(Check::exact("free_group_uniform", json!({"rank": 2}), &measure_defect(&expected, &mu)));
    checks.push(Check::exact("free_group_first_moment", json!({"rank": 2}), &(mu.first_moment() - Q::one())));
    checks.push(Check::holds("free_group_symmetric", json!({"rank": 2}), mu.symmetric));

    let even = IntegerTranslations::new(2)?;
    let mu2 = discretize_lattice(&even, &0, DOMAIN_LIMIT)?;
    let expected = [("0", q_frac(1, 2)), ("2", q_frac(1, 4)), ("-2", q_frac(1, 4))];
    checks.push(Check::exact("even_integers", json!({"period": 2}), &measure_defect(&expected, &mu2)));

    let product = FreeProductAction::new(2)?;
    let mu3 = discretize_lattice(&product, &Vec::new(), DOMAIN_LIMIT)?;
    let third = q_frac(1, 3);
    let expected: Vec<(&str, Q)> = ["a", "b", "c"].iter().map(|g| (*g, third.clone())).collect();
    checks.push(Check::exact("free_product_uniform", json!({"q": 2}), &measure_defect(&expected, &mu3)));

    let window = path_network(5).kernel()?;
    let absorbed = window.absorption(&BTreeSet::from([0, 4]))?;
    let middle = absorbed.probs[2].get(&4).cloned().unwrap_or_else(Q::zero) - q_frac(1, 2);
    checks.push(Check::exact("path_absorption", json!({"n": 5}), &middle));
    Ok((checks, json!({"free_group": mu.to_json(), "even_integers": mu2.to_json(), "free_product": mu3.to_json()})))
}

fn harmonic_measure() -> SuiteResult {
    let mut checks = Vec::new();
    for q in [2u64, 3] {
        let t = TreeBuilding::new(q)?;
        let cm = CylinderMeasure::new(&t);
        for x in [t.root(), vec![0, 1]] {
            let label = t.word_string(&x);
            let mut defect = Q::zero();
            for k in 0..=5 {
                let d = (cm.partition_sum(&x, &Coweight::new(vec![k]))? - Q::one()).abs();
                defect = defect.max(d);
            }
            checks.push(Check::exact("tree_partition_sums", json!({"q": q, "x": label}), &defect));
            let mut refine = Q::zero();
            for k in 0..5 {
                let r = cm.refinement_check(&x, &Coweight::new(vec![k]), &Coweight::new(vec![k + 1]))?;
                refine = refine.max(r.defect);
            }
            checks.push(Check::exact("tree_refinement", json!({"q": q, "x": label}), &refine));
        }
        let basepoints: [Word; 4] = [Vec::new(), vec![0], vec![0, 1], vec![1, 2, 0]];
        let mut failures = 0;
        let mut checked = 0;
        for x in &basepoints {
            for y in &basepoints {
                let r = radon_nikodym_check(&t, x, y, 6)?;
                checked += r.checked;
                failures += r.failures;
            }
        }
        checks.push(Check::holds("radon_nikodym", json!({"q": q, "shadows": checked}), failures == 0));

        let (x, y): (Word, Word) = (Vec::new(), vec![2, 1]);
        let mut equal = true;
        let mut pairs = 0;
        for (u, u2) in tree_shadow_pairs(&t, 3, &[&x, &y]) {
            equal &= m_measure_check(&t, &x, &y, &u, &u2, 1)?.equal();
            pairs += 1;
        }
        checks.push(Check::holds("m_measure_basepoint_free", json!({"q": q, "pairs": pairs}), equal));
        let mut invariant = true;
        let mut translated = 0;
        for (u, u2) in tree_shadow_pairs(&t, 3, &[&[2]]) {
            for letter in 0..t.degree() as u8 {
                if [&u, &u2].iter().any(|w| w.len() < 2 && w[0] == letter) {
                    continue;
                }
                invariant &= m_measure_translation_check(&t, &[2], &u, &u2, letter, 1)?.equal();
                translated += 1;
            }
        }
        checks.push(Check::holds("m_measure_translation", json!({"q": q, "pairs": translated}), invariant));
    }

    let b = A2Ball::build(2, 2)?;
    let cm = CylinderMeasure::new(&b);
    let mut defect = Q::zero();
    for coords in coordinate_box(2, 2) {
        defect = defect.max((cm.partition_sum(b.base(), &Coweight::new(coords))? - Q::one()).abs());
    }
    checks.push(Check::exact("a2_partition_sums", json!({"p": 2, "box": [2, 2]}), &defect));
    let mut refine = Q::zero();
    let mut levels = Vec::new();
    for (from, to) in
        [([0, 0], [1, 1]), ([1, 0], [2, 0]), ([1, 0], [1, 1]), ([0, 1], [0, 2]), ([0, 1], [1, 1]), ([1, 1], [2, 2])]
    {
        let r = cm.refinement_check(b.base(), &Coweight::new(from.to_vec()), &Coweight::new(to.to_vec()))?;
        refine = refine.max(r.defect.clone());
        levels.push(serde_json::to_value(&r).expect("serializable"));
    }
    checks.push(Check::exact("a2_refinement", json!({"p": 2}), &refine));
    Ok((checks, json!({"a2_refinement": levels})))
}

fn hitting_check(name: &str, h: &chamberwalk::boundary::HittingStats) -> Check {
    Check::statistical(
        name,
        &h.label,
        json!({"level": h.level.coords, "samples": h.samples, "cylinders": h.counts.len()}),
        h.chi_square.p_value,
        h.passes(DEFAULT_ALPHA),
    )
}

fn tree_hitting(s: &Settings, stream: &RngStream) -> SuiteResult {
    let q = s.q_single(2);
    let t = TreeBuilding::new(q)?;
    let srw = IsotropicKernel::uniform(vec![Coweight::new(vec![1])])?;
    let samples = s.samples.unwrap_or(100_000);
    let horizon = s.horizon.unwrap_or(10_000);
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    for k in 1..=3 {
        let level = Coweight::new(vec![k]);
        let h =
            boundary_hitting_mc(&t, &srw, &t.root(), &level, samples, horizon, s.workers(), &stream.child(k as u64))?;
        checks.push(hitting_check("uniform_exit", &h));
        results.insert(format!("level_{k}"), serde_json::to_value(&h).expect("serializable"));
    }
    Ok((checks, Value::Object(results)))
}

fn a2_hitting(s: &Settings, stream: &RngStream) -> SuiteResult {
    let b = A2Building::new(s.p.unwrap_or(2))?;
    let kernel = IsotropicKernel::uniform(vec![Coweight::new(vec![1, 0]), Coweight::new(vec![0, 1])])?;
    let samples = s.samples.unwrap_or(100_000);
    let horizon = s.horizon.unwrap_or(10_000);
    let level = Coweight::new(vec![2, 2]);
    let h = boundary_hitting_mc(&b, &kernel, &b.base(), &level, samples, horizon, s.workers(), stream)?;
    let flagged = Check::holds("unresolved_below_1pct", json!({"horizon": horizon}), !h.flagged);
    Ok((vec![hitting_check("uniform_exit", &h), flagged], serde_json::to_value(&h).expect("serializable")))
}

fn opposite_pair(s: &SphericalA2, c: usize, d: usize) -> Result<(bool, usize), Failure> {
    let (x, rounds) = s.opposite_to_both(c, d)?;
    let ok = rounds <= 3 && s.gallery_distance_bfs(x, c) == 3 && s.gallery_distance_bfs(x, d) == 3;
    Ok((ok, rounds))
}

fn opposite_chamber(stream: &RngStream) -> SuiteResult {
    let small = SphericalA2::new(2)?;
    let mut ok = true;
    let mut worst = 0;
    for c in small.chambers() {
        for d in small.chambers() {
            let (good, rounds) = opposite_pair(&small, c, d)?;
            ok &= good;
            worst = worst.max(rounds);
        }
    }
    let pairs = small.num_chambers() * small.num_chambers();
    let mut checks = vec![Check::holds("pg22_all_pairs", json!({"pairs": pairs}), ok)];
    let large = SphericalA2::new(3)?;
    let mut rng = stream.rng();
    let mut ok3 = true;
    let mut worst3 = 0;
    for _ in 0..1000 {
        let (c, d) = (large.random_chamber(&mut rng), large.random_chamber(&mut rng));
        let (good, rounds) = opposite_pair(&large, c, d)?;
        ok3 &= good;
        worst3 = worst3.max(rounds);
    }
    checks.push(Check::holds("pg23_random_pairs", json!({"pairs": 1000}), ok3));
    Ok((checks, json!({"pg22_max_rounds": worst, "pg23_max_rounds": worst3})))
}

fn special_subgroup(stream: &RngStream) -> SuiteResult {
    let s = SphericalA2::new(2)?;
    let mut rng = stream.rng();
    let mut checks = Vec::new();
    let mut found = Vec::new();
    for j in [vec![], vec![1], vec![2], vec![1, 2]] {
        let mut ok = true;
        let mut seen = BTreeSet::new();
        for _ in 0..100 {
            let pi = random_pi_for_subset(&s, &j, &mut rng);
            let r = special_subgroup_detect(&s, &pi);
            ok &= r.j == j && r.verdict && r.splitting_closed && r.e_is_parabolic;
            seen.insert(r.e.len());
        }
        checks.push(Check::holds("recovers_j", json!({"j": j, "colourings": 100}), ok));
        found.push(json!({"j": j, "e_sizes": seen}));
    }
    Ok((checks, Value::Array(found)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_names() {
        assert_eq!(expand(&["all".into()]).unwrap().len(), SUITES.len());
        assert_eq!(expand(&["quotient".into()]).unwrap(), vec!["quotient"]);
        assert!(expand(&["nope".into()]).is_err());
        assert!(expand(&[]).unwrap().is_empty());
    }

    #[test]
    fn deterministic_suites_pass() {
        let s = Settings::default();
        for name in ["tree-nlambda", "a2-nlambda", "discretize", "harmonic-measure"] {
            let (checks, _) = run(name, &s).unwrap();
            assert!(!checks.is_empty());
            for c in checks {
                assert!(c.verdict, "{name}: {c:?}");
            }
        }
    }

    #[test]
    fn stochastic_suites_need_a_seed() {
        assert!(matches!(run("quotient", &Settings::default()), Err(Failure::Schema(_))));
    }

    #[test]
    fn small_stochastic_suites_pass() {
        let s = Settings { seed: Some(5), samples: Some(20_000), ..Settings::default() };
        for name in ["induced-walk", "quotient", "return-times", "opposite-chamber", "special-subgroup", "tree-hitting"]
        {
            let (checks, _) = run(name, &s).unwrap();
            for c in checks {
                assert!(c.verdict, "{name}: {c:?}");
            }
        }
    }

    #[test]
    fn random_chains_are_reversible_and_connected() {
        let mut rng = RngStream::new(1).rng();
        for i in 0..10 {
            let k = random_chain(8, i % 2 == 0, &mut rng);
            if i % 2 == 0 {
                assert!(k.is_symmetric());
            }
            assert_eq!(k.len(), 8);
        }
    }
}
