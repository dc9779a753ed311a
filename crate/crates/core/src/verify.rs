//! The invariant suite behind `manyminds verify`: one named invariant per
//! property, each evaluated with a fixed seed derived from the master seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::apriori::{jump_distribution, JumpBranch};
use crate::causal::{causal_relation, Docket, Region};
use crate::error::{Error, Result};
use crate::geometry::{
    boost, boost_generator, check_manifestation, matrix_rows, rotation_generator, static_manifestation, ClauseStatus,
    SegmentSpec, SwitchPath, CONTACT_NUMBER,
};
use crate::model::{two_outcome_spec, Model};
use crate::process::{caricature_closed_form, caricature_simulate, run_trajectories, CaricatureSpec, Variant};
use crate::quantum::operator::{c, trace_product};
use crate::quantum::{app, app_on, generate_algebra, random, Algebra, AlgebraState, Mat, Operator};
use crate::scenarios::report::{Check, Tolerances, SCHEMA_VERSION};
use crate::scenarios::{run_scenario, ScenarioParams, SCENARIOS};
use crate::structures::{canonicalize, immediate_successors, ordered_successors_b1, validate, DocketAlphabet, SwitchingStructure};

pub const DEFAULT_VERIFY_SEED: u64 = 2024;

type InvariantFn = fn(&mut ChaCha8Rng, &Tolerances) -> Result<Vec<Check>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantOutcome {
    pub name: String,
    pub checks: usize,
    pub failed: usize,
    /// Largest `|computed - expected|` over equality checks.
    pub max_deviation: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub seed: u64,
    pub invariants: Vec<InvariantOutcome>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&InvariantOutcome> {
        self.invariants.iter().filter(|i| !i.pass).collect()
    }

    /// Fixed-width text table, one invariant per line.
    pub fn table(&self) -> String {
        let width = self.invariants.iter().map(|i| i.name.len()).max().unwrap_or(9).max(9);
        let mut out = format!("{:<width$}  {:>6}  {:>6}  {:>10}  result\n", "invariant", "checks", "failed", "max dev");
        for i in &self.invariants {
            out.push_str(&format!(
                "{:<width$}  {:>6}  {:>6}  {:>10.3e}  {}\n",
                i.name,
                i.checks,
                i.failed,
                i.max_deviation,
                if i.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "{} of {} invariants pass\n",
            self.invariants.iter().filter(|i| i.pass).count(),
            self.invariants.len()
        ));
        out
    }
}

fn registry() -> Vec<(&'static str, InvariantFn)> {
    vec![
        ("causal.reverse_symmetry", causal_reverse),
        ("causal.boost_invariance", causal_boost),
        ("structures.successors_valid", successors_valid),
        ("structures.canonical_orbit", canonical_orbit),
        ("geometry.contact_number", contact_number),
        ("geometry.redetermination_timing", redetermination_timing),
        ("geometry.proper_time", proper_time),
        ("quantum.decoherent_mixture", decoherent_mixture),
        ("quantum.restriction_monotonicity", restriction_monotonicity),
        ("apriori.jump_contract", jump_contract),
        ("process.caricature", caricature),
        ("process.two_outcome_model", two_outcome_model),
        ("process.replay", replay),
    ]
}

/// Names of every invariant, scenario suites included.
pub fn invariant_names() -> Vec<String> {
    registry()
        .into_iter()
        .map(|(n, _)| n.to_string())
        .chain(SCENARIOS.iter().map(|s| format!("scenarios.{s}")))
        .collect()
}

fn summarize(name: String, result: Result<Vec<Check>>) -> InvariantOutcome {
    match result {
        Ok(checks) => {
            let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
            let max_deviation = checks
                .iter()
                .filter(|c| c.kind == crate::scenarios::CheckKind::Equal)
                .map(|c| (c.computed - c.expected).abs())
                .fold(0.0, f64::max);
            InvariantOutcome {
                name,
                checks: checks.len(),
                failed: failed.len(),
                max_deviation,
                pass: failed.is_empty() && !checks.is_empty(),
                first_failure: failed.first().map(|c| (*c).clone()),
                error: None,
            }
        }
        Err(e) => InvariantOutcome {
            name,
            checks: 0,
            failed: 0,
            max_deviation: 0.0,
            pass: false,
            first_failure: None,
            error: Some(e.to_string()),
        },
    }
}

fn run_invariant(i: usize, name: &str, seed: u64, tol: &Tolerances, fault: bool) -> InvariantOutcome {
    let reg = registry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let mut result = match reg.get(i) {
        Some((_, f)) => f(&mut rng, tol),
        None => {
            let scenario = &name["scenarios.".len()..];
            let params = ScenarioParams {
                seed: (scenario == "caricature").then_some(seed),
                ..Default::default()
            };
            run_scenario(scenario, &params, tol).map(|r| r.checks.into_values().flatten().collect())
        }
    };
    if fault {
        if let Ok(checks) = &mut result {
            checks.push(Check::equal("injected fault", 1.0, 0.0, tol.get("injected", 1e-12)));
        }
    }
    summarize(name.to_string(), result)
}

/// Runs a single invariant by name, with the stream it gets in [`verify`].
pub fn verify_invariant(name: &str, seed: u64, tol: &Tolerances) -> Result<InvariantOutcome> {
    let i = invariant_names()
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Config(format!("unknown invariant `{name}`")))?;
    Ok(run_invariant(i, name, seed, tol, false))
}

/// Runs every invariant. `inject_fault` names one invariant that receives
/// an extra, deliberately failing check, to exercise the failure path.
pub fn verify(seed: u64, tol: &Tolerances, inject_fault: Option<&str>) -> Result<VerifyReport> {
    let names = invariant_names();
    if let Some(f) = inject_fault {
        if !names.iter().any(|n| n == f) {
            return Err(Error::Config(format!("unknown invariant `{f}`")));
        }
    }
    let invariants: Vec<InvariantOutcome> = names
        .par_iter()
        .enumerate()
        .map(|(i, name)| run_invariant(i, name, seed, tol, inject_fault == Some(name.as_str())))
        .collect();
    let pass = invariants.iter().all(|i| i.pass);
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        seed,
        invariants,
        pass,
    })
}

fn random_region(rng: &mut ChaCha8Rng, d: usize) -> Region {
    let center: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    if rng.random_bool(0.5) {
        let half: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..0.6)).collect();
        Region::new_box(
            center.iter().zip(&half).map(|(c, h)| c - h).collect(),
            center.iter().zip(&half).map(|(c, h)| c + h).collect(),
        )
        .expect("ordered corners")
    } else {
        Region::new_ball(center, rng.random_range(0.0..0.6)).expect("finite ball")
    }
}

fn causal_reverse(rng: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let mut bad = 0;
    for _ in 0..2000 {
        let d = rng.random_range(2..5);
        let (a, b) = (random_region(rng, d), random_region(rng, d));
        if causal_relation(&b, &a)? != causal_relation(&a, &b)?.reverse() {
            bad += 1;
        }
    }
    Ok(vec![Check::equal("asymmetric pairs", bad as f64, 0.0, 0.0)])
}

fn causal_boost(rng: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let mut bad = 0;
    for _ in 0..2000 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let dt = y[0] - x[0];
        let dx = (1..4).map(|i| (y[i] - x[i]).powi(2)).sum::<f64>().sqrt();
        if (dt.abs() - dx).abs() < 1e-6 {
            continue;
        }
        let l = boost(4, rng.random_range(1..4), rng.random_range(-1.5..1.5));
        let map = |v: &[f64]| -> Vec<f64> { (0..4).map(|i| (0..4).map(|j| l[(i, j)] * v[j]).sum()).collect() };
        let before = causal_relation(&Region::point(x.clone())?, &Region::point(y.clone())?)?;
        let after = causal_relation(&Region::point(map(&x))?, &Region::point(map(&y))?)?;
        if before != after {
            bad += 1;
        }
    }
    Ok(vec![Check::equal("relations changed by a boost", bad as f64, 0.0, 0.0)])
}

fn successors_valid(_: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    // The unrestricted alphabet yields millions of ordered successors; the
    // chained one keeps this quick.
    let xi = immediate_successors(&SwitchingStructure::minimal(), &DocketAlphabet::chained_new_switch());
    let invalid = xi.iter().filter(|s| !validate(s.structure()).is_valid()).count();
    Ok(vec![
        Check::holds("minimal structure has successors", !xi.is_empty()),
        Check::equal("invalid successors", invalid as f64, 0.0, 0.0),
    ])
}

fn canonical_orbit(rng: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let minimal = SwitchingStructure::minimal();
    let mut pool: Vec<SwitchingStructure> = ordered_successors_b1(&minimal, &DocketAlphabet::default()).into_iter().collect();
    let wide: Vec<SwitchingStructure> = immediate_successors(&minimal, &DocketAlphabet::chained_new_switch())
        .into_iter()
        .map(|c| c.into_structure())
        .collect();
    pool.extend(wide.choose_multiple(rng, 20).cloned());
    let (mut tried, mut bad) = (0, 0);
    for s in &pool {
        let canon = canonicalize(s);
        for _ in 0..40 {
            let mut pi: Vec<usize> = (0..s.m()).collect();
            let mut ps: Vec<usize> = (0..s.n()).collect();
            pi.shuffle(rng);
            ps.shuffle(rng);
            if s.is_admissible(&pi, &ps) {
                tried += 1;
                if canonicalize(&s.relabel(&pi, &ps)?) != canon {
                    bad += 1;
                }
            }
        }
    }
    Ok(vec![
        Check::holds("admissible relabelings sampled", tried > 0),
        Check::equal("orbit members with a different canonical form", bad as f64, 0.0, 0.0),
    ])
}

fn cluster(k: usize) -> Result<(crate::geometry::Manifestation, SwitchingStructure)> {
    let mut offsets = vec![vec![0.0; 3]];
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for i in 0..k {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
        let r = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        offsets.push(vec![0.15 * r * th.cos(), 0.15 * r * th.sin(), 0.15 * z]);
    }
    let n = k + 1;
    let m = static_manifestation(Region::new_ball(vec![0.0; 4], 0.1)?, &offsets, &vec![vec![2.0]; n], 1.0)?;
    let s = SwitchingStructure::new(n, Docket::antichain(n), (1..=n as i32).collect())?;
    Ok((m, s))
}

fn contact_number(_: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, want) in [(CONTACT_NUMBER, ClauseStatus::Pass), (CONTACT_NUMBER + 1, ClauseStatus::Fail)] {
        let (m, s) = cluster(k)?;
        let r = check_manifestation(&m, &s);
        out.push(Check::equal(format!("contacts with {k} neighbours"), r.max_contacts as f64, k as f64, 0.0));
        out.push(Check::holds(
            format!("contact clause with {k} neighbours is {want:?}"),
            r.clause("C11").map(|c| &c.status) == Some(&want),
        ));
    }
    Ok(out)
}

fn redetermination_timing(_: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let s = SwitchingStructure::new(1, Docket::chain(5), vec![1, -1, 1, 1, -1])?;
    let ball = Region::new_ball(vec![0.0; 4], 0.1)?;
    let status = |times: Vec<f64>| -> Result<Option<ClauseStatus>> {
        let m = static_manifestation(ball.clone(), &[vec![0.0; 3]], &[times], 0.5)?;
        Ok(check_manifestation(&m, &s).clause("C13").map(|c| c.status.clone()))
    };
    Ok(vec![
        Check::holds("evenly spaced repeat passes", status(vec![1.0, 2.0, 3.0, 4.0, 5.0])? == Some(ClauseStatus::Pass)),
        Check::holds("early repeat fails", status(vec![1.0, 2.0, 3.0, 3.5, 5.0])? == Some(ClauseStatus::Fail)),
    ])
}

fn proper_time(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Vec<Check>> {
    let bound = tol.get("proper_time", 1e-6);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let segments = rng.random_range(1..5);
        let mut specs = Vec::new();
        for k in 0..segments {
            let g = if rng.random_bool(0.5) {
                boost_generator(4, rng.random_range(1..4)) * rng.random_range(-0.8..0.8)
            } else {
                rotation_generator(4, 1, 2 + rng.random_range(0..2)) * rng.random_range(-2.0..2.0)
            };
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut u = vec![(1.0 + v.iter().map(|x| x * x).sum::<f64>()).sqrt()];
            u.extend(v);
            specs.push(SegmentSpec {
                start: k as f64,
                velocity: u,
                lorentz: None,
                generator: Some(matrix_rows(&g)),
            });
        }
        worst = worst.max(SwitchPath::new(&[0.0; 4], segments as f64, specs)?.proper_time_residual(32));
    }
    Ok(vec![Check::at_most("largest |u.u + 1|", worst, bound, 0.0)])
}

fn decoherent_mixture(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Vec<Check>> {
    let t = tol.get("app", 1e-9);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = 2 + trial % 7;
        let k = 1 + trial % (n - 1);
        let u = random::unitary(rng, n);
        let p: f64 = rng.random_range(0.01..0.99);
        let mut sigma = Mat::zeros(n, n);
        let mut sd = Mat::zeros(n, n);
        sigma.view_mut((0, 0), (k, k)).copy_from(&random::density_of_rank(rng, k, k));
        sd.view_mut((k, k), (n - k, n - k)).copy_from(&random::density_of_rank(rng, n - k, n - k));
        let sigma = &u * sigma * u.adjoint();
        let sd = &u * sd * u.adjoint();
        let rho = &sigma * c(p, 0.0) + sd * c(1.0 - p, 0.0);
        let mut q = Mat::zeros(n, n);
        for i in 0..k {
            q[(i, i)] = c(1.0, 0.0);
        }
        let q = &u * q * u.adjoint();
        let a = app(
            &AlgebraState::on_full(Operator::single(sigma)?)?,
            &AlgebraState::on_full(Operator::single(rho.clone())?)?,
        )?;
        worst = worst.max((a - trace_product(&rho, &q).re).abs());
    }
    Ok(vec![Check::equal("largest |app - rho(Q)|", worst, 0.0, t)])
}

fn restriction_monotonicity(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Vec<Check>> {
    let slack = tol.get("monotonicity", 1e-10);
    let dims = [2, 3];
    let big = Arc::new(Algebra::full(&dims)?);
    let factor = Arc::new(Algebra::on_factors(&dims, &[0])?);
    let mut violations = 0;
    for trial in 0..500 {
        let s = AlgebraState::new(random::density(rng, &dims), big.clone())?;
        let r = AlgebraState::new(random::density(rng, &dims), big.clone())?;
        let sub = if trial % 2 == 0 {
            factor.clone()
        } else {
            let p = Operator::new(dims.to_vec(), random::projection(rng, 6, 1 + trial % 5))?;
            Arc::new(generate_algebra(&[p])?)
        };
        if app_on(&s, &r, &sub)? < app(&s, &r)? - slack {
            violations += 1;
        }
    }
    Ok(vec![Check::equal("restrictions that lower app", violations as f64, 0.0, 0.0)])
}

fn jump_contract(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Vec<Check>> {
    let t = tol.get("jump_total", 1e-12);
    let (mut worst, mut stray): (f64, usize) = (0.0, 0);
    for _ in 0..2000 {
        let parent = rng.random_range(1e-6..1.0);
        let k = rng.random_range(1..6);
        let apps: BTreeMap<String, f64> = (0..k)
            .map(|i| (format!("s{i}"), rng.random_range(0.0..parent * 2.0 / k as f64)))
            .collect();
        let d = jump_distribution(parent, &apps)?;
        worst = worst.max((d.total() - 1.0).abs());
        if d.branch == JumpBranch::Normalized && d.extinction != 0.0 {
            stray += 1;
        }
    }
    Ok(vec![
        Check::equal("largest |total - 1|", worst, 0.0, t),
        Check::equal("covered parents with extinction", stray as f64, 0.0, 0.0),
    ])
}

fn caricature(_: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Vec<Check>> {
    let exact = tol.get("exact", 1e-12);
    let mut out = Vec::new();
    let mut c_spec = CaricatureSpec::new(Variant::C, 0.35, 0.65, 3.0);
    c_spec.weights_a = vec![0.5, 1.5, 2.0];
    c_spec.weights_b = vec![1.0, 0.25];
    let cases = [
        (CaricatureSpec::new(Variant::A, 0.2, 0.8, 1.0), 0.2),
        (CaricatureSpec::new(Variant::B, 0.2, 0.8, 1.0), 1.0 / 3.0),
        (c_spec, 4.0 * 0.35 / (4.0 * 0.35 + 1.25 * 0.65)),
    ];
    for (i, (spec, want)) in cases.into_iter().enumerate() {
        let f = caricature_closed_form(&spec)?;
        out.push(Check::equal(format!("{:?} F(a)", spec.variant), f.f_a, want, exact));
        let trials = 100_000;
        let est = caricature_simulate(&spec, trials, 7 + i as u64)?;
        let sigma = (f.f_a * (1.0 - f.f_a) / trials as f64).sqrt();
        out.push(Check::at_most(
            format!("{:?} Monte Carlo error", spec.variant),
            (est.f_a - f.f_a).abs(),
            3.0 * sigma,
            0.0,
        ));
    }
    Ok(out)
}

fn two_outcome_model(_: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let model = Model::from_spec(two_outcome_spec(0.3)?)?;
    let n = 100_000;
    let (r, _) = run_trajectories(model.initial(), &model, n, 100, 11, false)?;
    let f = r.final_counts.get("a").copied().unwrap_or(0) as f64 / n as f64;
    let sigma = (0.21 / n as f64).sqrt();
    Ok(vec![
        Check::at_most("|frequency of a - 0.3|", (f - 0.3).abs(), 3.0 * sigma, 0.0),
        Check::equal("extinction rate", r.extinction_rate, 0.0, 0.0),
    ])
}

fn replay(_: &mut ChaCha8Rng, _: &Tolerances) -> Result<Vec<Check>> {
    let model = Model::from_spec(two_outcome_spec(0.3)?)?;
    let (a, ta) = run_trajectories(model.initial(), &model, 2000, 100, 3, true)?;
    let (b, tb) = run_trajectories(model.initial(), &model, 2000, 100, 3, true)?;
    Ok(vec![
        Check::equal("largest replay residual", a.max_replay_residual, 0.0, 1e-15),
        Check::holds("same seed, same ensemble", a == b && ta == tb),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_injection_names_the_invariant() {
        let r = verify(1, &Tolerances::default(), Some("geometry.contact_number")).unwrap();
        let f = r.failures();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].name, "geometry.contact_number");
        assert!(verify(1, &Tolerances::default(), Some("nope")).is_err());
    }
}
