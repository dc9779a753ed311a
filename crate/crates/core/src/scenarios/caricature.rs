//! The three-state caricature: closed forms against Monte Carlo.

use serde_json::json;

use super::report::{Check, ScenarioReport, Tolerances};
use crate::error::Result;
use crate::process::{caricature_closed_form, caricature_simulate, CaricatureSpec, Variant};

const EXACT_TOL: f64 = 1e-12;
/// Binomial standard deviations allowed between estimate and closed form.
pub const SIGMAS: f64 = 3.0;
/// Terms of the per-step series summed before giving up.
const SERIES_CAP: u32 = 1_000_000;

/// The outcome probability written directly in `p`, `q` and the weights.
pub fn stated_f_a(spec: &CaricatureSpec) -> f64 {
    let (p, q) = (spec.p, spec.q);
    match spec.variant {
        Variant::A => p / (p + q),
        Variant::B => 2.0 * p / (2.0 * p + q),
        Variant::C => {
            let wa: f64 = spec.weights_a.iter().sum();
            let wb: f64 = spec.weights_b.iter().sum();
            wa * p / (wa * p + wb * q)
        }
    }
}

pub fn caricature_suite(spec: &CaricatureSpec, trials: u64, seed: u64, tol: &Tolerances) -> Result<ScenarioReport> {
    let exact = tol.get("exact", EXACT_TOL);
    let sigmas = tol.get("sigmas", SIGMAS);
    let mut report = ScenarioReport::new("caricature", json!({ "spec": spec, "trials": trials, "seed": seed }));
    let f = caricature_closed_form(spec)?;
    report.push("closed_form", Check::equal("F(a)", f.f_a, stated_f_a(spec), exact));
    report.push("closed_form", Check::equal("F(a) + F(b)", f.f_a + f.f_b, 1.0, exact));

    // Summing F_n(a) over n recovers F(a) when the tail is negligible.
    if f.stay < 1.0 {
        let mut sum = 0.0;
        let mut n = 1;
        while n <= SERIES_CAP {
            let term = f.f_n_a(n);
            sum += term;
            if term < 1e-18 && f.stay.powi(n as i32) < 1e-16 {
                break;
            }
            n += 1;
        }
        if n <= SERIES_CAP {
            report.push("step_series", Check::equal(format!("sum of {n} terms"), sum, f.f_a, exact));
        }
    }

    if spec.variant == Variant::A {
        for x in [0.0, 1.0, 100.0] {
            let mut s = spec.clone();
            s.x = x;
            let fx = caricature_closed_form(&s)?;
            report.push("delay_independence", Check::equal(format!("x={x}"), fx.f_a, f.f_a, 0.0));
        }
    }

    let estimate = if trials > 0 {
        let est = caricature_simulate(spec, trials, seed)?;
        let sigma = (f.f_a * (1.0 - f.f_a) / trials as f64).sqrt();
        report.push(
            "monte_carlo",
            Check::at_most("|F(a) estimate - F(a)|", (est.f_a - f.f_a).abs(), sigmas * sigma, 0.0),
        );
        if spec.x == 0.0 {
            report.push("monte_carlo", Check::equal("longest run without delay", est.max_steps_taken as f64, 1.0, 0.0));
        }
        Some(est)
    } else {
        None
    };
    report.data = json!({ "closed_form": f, "estimate": estimate });
    Ok(report)
}
