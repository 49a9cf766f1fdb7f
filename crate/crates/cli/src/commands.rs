//! One function per subcommand, each producing a report and a CSV view.

use std::collections::BTreeMap;

use chamberwalk::action::{
    check_conductance_invariance, covolume, quotient_law_check, quotient_network, return_time_stats, LatticeAction,
};
use chamberwalk::buildings::{A2Ball, A2Building, BuildingModel, FreeGroupTree, IntegerLine, TreeBuilding};
use chamberwalk::coxeter::{coordinate_box, table_csv, CartanType, Coweight, CoxeterData};
use chamberwalk::discretize::{
    discretize_lattice, induced_kernel_exact, induced_kernel_mc, MomentKind, DEFAULT_HORIZON,
};
use chamberwalk::netwalk::{chi_square, occupation_csv, par_samples, Network, RngStream, Walk, DEFAULT_ALPHA};
use chamberwalk::rational::{format, q_int, to_f64, Q};
use num_traits::One;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::models::{finite_network, with_action, ActionJob};
use crate::report::{Check, Report};
use crate::{suites, Failure, Output};

/// Largest fundamental domain or excursion region explored.
pub const DOMAIN_LIMIT: usize = 100_000;

pub fn require_seed(s: &Settings) -> Result<RngStream, Failure> {
    s.seed.map(RngStream::new).ok_or_else(|| Failure::Schema("this command is stochastic and needs --seed".into()))
}

pub fn coxeter_tables(s: &Settings) -> Result<Output, Failure> {
    let ty: CartanType = s.cartan_type.as_deref().unwrap_or("A2").parse()?;
    let q = s.q.clone().unwrap_or_else(|| vec![2]);
    let data = if q.len() == 1 { CoxeterData::uniform(ty, q[0])? } else { CoxeterData::new(ty, q)? };
    let rows = data.table(s.bound.unwrap_or(3))?;
    let mut report = Report::new("coxeter-tables", s.inputs());
    let integral = rows.iter().all(|r| data.n_lambda_count(&r.coweight).is_ok());
    report.push(Check::holds("n_lambda_integral", json!({"rows": rows.len()}), integral));
    report.result("poincare_sum", json!(format(&data.weyl_poincare())));
    report.result(
        "table",
        rows.iter()
            .map(|r| json!({"lambda": r.coweight.coords, "chi": format(&r.chi), "n_lambda": format(&r.n_lambda)}))
            .collect(),
    );
    Ok(Output { report, csv: table_csv(&rows) })
}

pub fn ball(s: &Settings) -> Result<Output, Failure> {
    let (p, radius) = (s.p.unwrap_or(2), s.radius.unwrap_or(2));
    let ball = A2Ball::build(p, radius)?;
    let mut report = Report::new("ball", s.inputs());
    let mut symmetric = true;
    let mut typed = true;
    let mut csv = String::from("u,v\n");
    for u in 0..ball.len() {
        for &v in ball.adjacency(u) {
            symmetric &= ball.adjacency(v).contains(&u);
            typed &= ball.vertex_type(u) != ball.vertex_type(v);
            if u < v {
                csv.push_str(&format!("{u},{v}\n"));
            }
        }
    }
    report.push(Check::holds("adjacency_symmetric", json!({}), symmetric));
    report.push(Check::holds("edges_join_distinct_types", json!({}), typed));
    let mut counts = Vec::new();
    for coords in coordinate_box(2, radius) {
        let lambda = Coweight::new(coords);
        let found = ball.v_lambda(ball.base(), &lambda)?.len() as i64;
        let expected = ball.coxeter().n_lambda(&lambda)?;
        counts.push(json!({"lambda": lambda.coords, "count": found, "n_lambda": format(&expected)}));
        report.push(Check::exact("v_lambda_size", json!({"lambda": lambda.coords}), &(expected - q_int(found))));
    }
    report.result("size", json!(ball.len()));
    report.result("spheres", Value::Array(counts));
    report.result("ball", ball.to_json());
    Ok(Output { report, csv })
}

fn endpoint_histogram<N: Network>(
    net: &N,
    start: N::Node,
    steps: usize,
    samples: usize,
    s: &Settings,
    stream: &RngStream,
    key: impl Fn(&N::Node) -> Result<String, chamberwalk::Error> + Sync,
) -> Result<BTreeMap<String, u64>, Failure> {
    let ends = par_samples(samples, s.workers(), stream, |_, rng| {
        let mut x = start.clone();
        for _ in 0..steps {
            x = net.random_step(&x, rng)?;
        }
        key(&x)
    });
    let mut hist = BTreeMap::new();
    for e in ends {
        *hist.entry(e?).or_insert(0u64) += 1;
    }
    Ok(hist)
}

pub fn simulate(s: &Settings) -> Result<Output, Failure> {
    let stream = require_seed(s)?;
    let steps = s.steps.unwrap_or(10);
    let samples = s.samples.unwrap_or(1000);
    let mut report = Report::new("simulate", s.inputs());
    let hist = match s.family.as_deref() {
        Some("tree") => {
            let t = TreeBuilding::new(s.q_single(2))?;
            endpoint_histogram(&t, t.root(), steps, samples, s, &stream, |x| Ok(x.len().to_string()))?
        }
        Some("free-group") => {
            let t = FreeGroupTree::new(s.rank.unwrap_or(2))?;
            endpoint_histogram(&t, Vec::new(), steps, samples, s, &stream, |x| Ok(x.len().to_string()))?
        }
        Some("integers") => {
            endpoint_histogram(&IntegerLine, 0, steps, samples, s, &stream, |x| Ok(x.abs().to_string()))?
        }
        Some("a2") => {
            let b = A2Building::new(s.p.unwrap_or(2))?;
            let o = b.base();
            endpoint_histogram(&b, o.clone(), steps, samples, s, &stream, |x| Ok(b.sigma(&o, x)?.to_string()))?
        }
        _ => {
            let net = finite_network(s)?;
            let kernel = net.kernel()?;
            let ends = par_samples(samples, s.workers(), &stream, |_, rng| {
                let mut x = 0usize;
                for _ in 0..steps {
                    x = kernel.step(&x, rng)?;
                }
                Ok::<_, chamberwalk::Error>(x)
            });
            let mut counts = vec![0u64; net.len()];
            for e in ends {
                counts[e?] += 1;
            }
            let expected: Vec<f64> = kernel.distribution_after(0, steps).iter().map(to_f64).collect();
            let chi = chi_square(&counts, &expected);
            report.push(Check::statistical(
                "endpoint_law",
                "statistical",
                json!({"steps": steps, "samples": samples}),
                chi.p_value,
                chi.passes(DEFAULT_ALPHA),
            ));
            report.result("counts", json!(counts));
            let csv = occupation_csv(net.labels(), &counts);
            return Ok(Output { report, csv });
        }
    };
    let mut csv = String::from("distance,count\n");
    for (k, v) in &hist {
        csv.push_str(&format!("{k},{v}\n"));
    }
    report.result("endpoint_distance", json!(hist));
    Ok(Output { report, csv })
}

pub fn induce(s: &Settings) -> Result<Output, Failure> {
    let net = finite_network(s)?;
    let subset = s.subset.clone().ok_or_else(|| Failure::Schema("induce needs --subset".into()))?;
    let kernel = net.kernel()?;
    let induced = induced_kernel_exact(&kernel, &subset)?;
    let mut report = Report::new("induce", s.inputs());
    report.push(Check::exact("row_sums", json!({}), &induced.row_sum_defect()));
    if kernel.is_symmetric() {
        report.push(Check::holds("symmetric", json!({}), induced.kernel.is_symmetric()));
    }
    let matrix: Vec<Vec<String>> = induced.kernel.dense().iter().map(|r| r.iter().map(format).collect()).collect();
    if let Some(samples) = s.samples {
        let stream = require_seed(s)?;
        let mc =
            induced_kernel_mc(&kernel, &subset, samples, s.horizon.unwrap_or(DEFAULT_HORIZON), s.workers(), &stream)?;
        report.push(Check::within("mc_z_score", json!({"samples": samples}), mc.max_z_score(&induced), 4.0));
        report.result("monte_carlo", serde_json::to_value(&mc).expect("serializable"));
    }
    let mut csv = format!("from,{}\n", induced.kernel.labels().join(","));
    for (label, row) in induced.kernel.labels().iter().zip(&matrix) {
        csv.push_str(&format!("{label},{}\n", row.join(",")));
    }
    report.result("labels", json!(induced.kernel.labels()));
    report.result("kernel", json!(matrix));
    report.result("exact", json!(induced.method.is_exact()));
    Ok(Output { report, csv })
}

struct QuotientJob<'a>(&'a Settings);

impl ActionJob for QuotientJob<'_> {
    type Output = Output;

    fn run<A: LatticeAction>(self, action: &A) -> Result<Output, Failure> {
        let s = self.0;
        let mut report = Report::new("quotient", s.inputs());
        let cov = covolume(action, DOMAIN_LIMIT)?;
        let q = quotient_network(action, DOMAIN_LIMIT)?;
        report.push(Check::holds("a_prime_symmetric", json!({}), true));
        report.push(Check::exact("mass_identity", json!({}), &q.mass_defect(action)?));
        report.push(Check::exact("stationarity", json!({}), &q.stationarity_defect()?));
        report.result("action", json!(action.describe()));
        report.result("covolume", serde_json::to_value(&cov).expect("serializable"));
        report.result("quotient", q.to_json());
        if let Some(seed) = s.seed {
            let inv = check_conductance_invariance(action, 10_000, &RngStream::with_stream(seed, 1))?;
            report.push(Check {
                kind: inv.mode.clone(),
                ..Check::holds("conductance_invariance", json!({"edges": inv.checked_edges}), inv.passed())
            });
            let samples = s.samples.unwrap_or(100_000);
            let steps = s.steps.unwrap_or(5);
            let start = q.reps()[0].clone();
            let law =
                quotient_law_check(action, &q, &start, steps, samples, s.workers(), &RngStream::with_stream(seed, 2))?;
            report.push(Check::statistical(
                "quotient_law",
                "statistical",
                json!({"steps": steps, "samples": samples}),
                law.chi_square.p_value,
                law.chi_square.passes(DEFAULT_ALPHA),
            ));
            report.result("law", serde_json::to_value(&law).expect("serializable"));
            let rt = return_time_stats(
                q.network(),
                0,
                samples,
                s.workers(),
                &RngStream::with_stream(seed, 3),
                s.c,
                s.horizon.unwrap_or(DEFAULT_HORIZON),
            )?;
            report.push(Check::holds("return_mean_within_3se", json!({"samples": samples}), rt.mean_within(3.0)));
            if let Some(tail) = &rt.tail {
                report.push(Check::holds("return_tail_decays", json!({}), tail.slope < 0.0));
            }
            report.result("return_times", serde_json::to_value(&rt).expect("serializable"));
        }
        let mut csv = String::from("u,v,a\n");
        for (u, v, a) in q.network().edges() {
            csv.push_str(&format!("{},{},{}\n", q.network().label(u), q.network().label(v), format(&a)));
        }
        Ok(Output { report, csv })
    }
}

pub fn quotient(s: &Settings) -> Result<Output, Failure> {
    with_action(s, QuotientJob(s))
}

struct DiscretizeJob<'a>(&'a Settings);

impl ActionJob for DiscretizeJob<'_> {
    type Output = Output;

    fn run<A: LatticeAction>(self, action: &A) -> Result<Output, Failure> {
        let s = self.0;
        let o = action
            .fundamental_domain(1)
            .nodes
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Schema("empty fundamental domain".into()))?;
        let mu = discretize_lattice(action, &o, DOMAIN_LIMIT)?;
        let mut report = Report::new("discretize", s.inputs());
        report.push(Check::exact("total_mass", json!({}), &(Q::one() - mu.total_mass())));
        report.push(Check::holds("symmetric", json!({}), mu.symmetric));
        if let Some(a) = mu.admissible {
            report.push(Check::holds("admissible", json!({}), a));
        }
        if let Some(agree) = mu.fast_path_agrees {
            report.push(Check::holds("transitive_fast_path", json!({}), agree));
        }
        report.result("measure", mu.to_json());
        report.result("first_moment", json!(format(&mu.first_moment())));
        if let Some(c) = s.c {
            report.result("exponential_moment", json!(mu.moment(MomentKind::Exponential(c))));
        }
        let mut csv = String::from("element,prob,distance\n");
        for e in &mu.measure {
            csv.push_str(&format!("{},{},{}\n", e.element, format(&e.prob), e.distance));
        }
        Ok(Output { report, csv })
    }
}

pub fn discretize(s: &Settings) -> Result<Output, Failure> {
    with_action(s, DiscretizeJob(s))
}

pub fn verify(s: &Settings) -> Result<Output, Failure> {
    let mut report = Report::new("verify", s.inputs());
    let names = suites::expand(s.suite.as_deref().unwrap_or(&[]))?;
    for name in names {
        let (checks, results) = suites::run(&name, s)?;
        for mut c in checks {
            c.check = format!("{name}/{}", c.check);
            report.push(c);
        }
        report.result(&name, results);
    }
    let csv = report.checks_csv();
    Ok(Output { report, csv })
}
