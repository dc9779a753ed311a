//! Predicting the next of a run of two-outcome observations when the
//! universal state is fixed, and when it may be chosen freely.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::report::{Check, ScenarioReport, Tolerances};
use crate::error::{Error, Result};
use crate::quantum::operator::{basis, c, ket_bra, kron_all};
use crate::quantum::{app, Algebra, AlgebraState, Mat, Operator};

/// Largest history length; states live on `2^(T + 1)` dimensions.
pub const MAX_HISTORY: usize = 7;
const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NextOutcome {
    pub history: Vec<bool>,
    /// Supremum over the theory class of the a priori probability of the
    /// history extended by `a` and by `b`.
    pub sup_app: [f64; 2],
    /// Theory point attaining each supremum.
    pub argmax: [String; 2],
    pub distribution: [f64; 2],
    pub theory_points: usize,
}

/// The observed run: `round(p T)` outcomes `a` followed by `b`s. `true`
/// is `a`.
pub fn typical_history(p: f64, t: usize) -> Vec<bool> {
    let k = (p * t as f64).round() as usize;
    (0..t).map(|i| i < k).collect()
}

fn qubit_projector(a: bool) -> Mat {
    ket_bra(&basis(2, usize::from(!a)))
}

fn product_projector(h: &[bool]) -> Mat {
    kron_all(&h.iter().map(|&a| qubit_projector(a)).collect::<Vec<_>>())
}

/// Sup over `points` of `app(sigma_{h o} | omega)` for `o = a, b`,
/// normalized into a distribution.
fn next_outcome(history: &[bool], points: &[(String, Mat)]) -> Result<NextOutcome> {
    if points.is_empty() {
        return Err(Error::EmptyTheoryClass);
    }
    let dims = vec![2; history.len() + 1];
    let algebra = Arc::new(Algebra::full(&dims)?);
    let states: Vec<AlgebraState> = points
        .iter()
        .map(|(_, w)| AlgebraState::new(Operator::new(dims.clone(), w.clone())?, algebra.clone()))
        .collect::<Result<_>>()?;
    let mut sup = [f64::NEG_INFINITY; 2];
    let mut argmax = [String::new(), String::new()];
    for (o, next) in [true, false].into_iter().enumerate() {
        let mut h = history.to_vec();
        h.push(next);
        let sigma = AlgebraState::new(Operator::new(dims.clone(), product_projector(&h))?, algebra.clone())?;
        for ((label, _), omega) in points.iter().zip(&states) {
            let v = app(&sigma, omega)?;
            // First point attaining the supremum, for a stable argmax.
            if v > sup[o] {
                sup[o] = v;
                argmax[o] = label.clone();
            }
        }
    }
    let total = sup[0] + sup[1];
    if total <= 0.0 {
        return Err(Error::InvalidProbability("both continuations have zero a priori probability".into()));
    }
    Ok(NextOutcome {
        history: history.to_vec(),
        sup_app: sup,
        argmax,
        distribution: [sup[0] / total, sup[1] / total],
        theory_points: points.len(),
    })
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::Config("history length must be at least 1".into()));
    }
    if t > MAX_HISTORY {
        return Err(Error::DimensionOverflow(format!("history length {t}, at most {MAX_HISTORY}")));
    }
    Ok(())
}

/// Next-outcome distribution after the typical history of length `t`.
/// With `free_omega` false the class is the single i.i.d. mixture
/// `(p P_a + (1 - p) P_b)^(T + 1)`; otherwise it is every product of pure
/// basis states on the `T + 1` systems, which attains the supremum over
/// product pure states since `app <= 1`.
pub fn cosmology_demo(p: f64, t: usize, free_omega: bool) -> Result<NextOutcome> {
    check_t(t)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(format!("p = {p}")));
    }
    let history = typical_history(p, t);
    let points: Vec<(String, Mat)> = if free_omega {
        (0..1usize << (t + 1))
            .map(|bits| {
                let h: Vec<bool> = (0..=t).map(|i| bits >> (t - i) & 1 == 0).collect();
                let label: String = h.iter().map(|&a| if a { 'a' } else { 'b' }).collect();
                (label, product_projector(&h))
            })
            .collect()
    } else {
        let local = qubit_projector(true) * c(p, 0.0) + qubit_projector(false) * c(1.0 - p, 0.0);
        vec![("iid".to_string(), kron_all(&vec![local; t + 1]))]
    };
    next_outcome(&history, &points)
}

pub fn cosmology_suite(p: f64, t: usize, tol: &Tolerances) -> Result<ScenarioReport> {
    let exact = tol.get("exact", EXACT_TOL);
    let mut report = ScenarioReport::new("cosmology", json!({ "p": p, "T": t }));
    let fixed = cosmology_demo(p, t, false)?;
    let free = cosmology_demo(p, t, true)?;
    report.push("fixed_omega", Check::equal("Pr(a)", fixed.distribution[0], p, exact));
    report.push("fixed_omega", Check::equal("Pr(b)", fixed.distribution[1], 1.0 - p, exact));
    report.push("free_omega", Check::equal("Pr(a)", free.distribution[0], 0.5, exact));
    report.push("free_omega", Check::equal("Pr(b)", free.distribution[1], 0.5, exact));
    report.push("free_omega", Check::equal("sup app (a)", free.sup_app[0], 1.0, exact));
    report.push("free_omega", Check::equal("sup app (b)", free.sup_app[1], 1.0, exact));
    report.data = json!({ "fixed": fixed, "free": free });
    Ok(report)
}
