//! Consistency of families of projections for a state.

use serde::Serialize;
use serde_json::json;

use super::report::{Check, ScenarioReport, Tolerances};
use crate::error::{Error, Result};
use crate::quantum::operator::{c, max_abs, trace_product, PROJECTION_TOL};
use crate::quantum::Mat;

/// Cap on the number of histories `prod_m |family_m|`.
pub const MAX_HISTORIES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// History labels `(r^1, ..., r^M)` in row order.
    pub histories: Vec<Vec<usize>>,
    /// `violations[i][j]`: an off-diagonal entry above tolerance.
    pub violations: Vec<Vec<bool>>,
    /// Diagonal entries, the history probabilities.
    pub probabilities: Vec<f64>,
    pub max_off_diagonal: f64,
    pub consistent: bool,
}

fn validate(families: &[Vec<Mat>]) -> Result<usize> {
    let n = families
        .first()
        .and_then(|f| f.first())
        .map(|m| m.nrows())
        .ok_or_else(|| Error::NotResolution("no projections".into()))?;
    for (m, fam) in families.iter().enumerate() {
        let mut sum = Mat::zeros(n, n);
        for p in fam {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.nrows(),
                });
            }
            let d = max_abs(&(p * p - p)).max(max_abs(&(p - p.adjoint())));
            if d > PROJECTION_TOL {
                return Err(Error::NotProjection(format!("family {m}: defect {d:.2e}")));
            }
            sum += p;
        }
        let d = max_abs(&(sum - Mat::identity(n, n)));
        if d > PROJECTION_TOL {
            return Err(Error::NotResolution(format!("family {m} sums to identity with defect {d:.2e}")));
        }
    }
    Ok(n)
}

/// Evaluates `D(r, s) = omega(P^1_{r^1} ... P^M_{r^M} P^M_{s^M} ... P^1_{s^1})`
/// over all history pairs and flags off-diagonal entries above `tol`.
pub fn consistency_check(families: &[Vec<Mat>], omega: &Mat, tol: f64) -> Result<ConsistencyReport> {
    let n = validate(families)?;
    if omega.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.nrows(),
        });
    }
    let count: usize = families.iter().map(Vec::len).product();
    if count > MAX_HISTORIES {
        return Err(Error::DimensionOverflow(format!("{count} histories, at most {MAX_HISTORIES}")));
    }

    // Chain operators A_r = P^1_{r^1} ... P^M_{r^M}; D(r, s) = tr(omega A_r A_s^dagger).
    let mut histories: Vec<Vec<usize>> = vec![Vec::new()];
    let mut chains: Vec<Mat> = vec![Mat::identity(n, n)];
    for fam in families {
        let mut h2 = Vec::with_capacity(histories.len() * fam.len());
        let mut c2 = Vec::with_capacity(histories.len() * fam.len());
        for (h, a) in histories.iter().zip(&chains) {
            for (r, p) in fam.iter().enumerate() {
                let mut h = h.clone();
                h.push(r);
                h2.push(h);
                c2.push(a * p);
            }
        }
        histories = h2;
        chains = c2;
    }
    let left: Vec<Mat> = chains.iter().map(|a| omega * a).collect();
    let adj: Vec<Mat> = chains.iter().map(|a| a.adjoint()).collect();
    let h = histories.len();
    let mut violations = vec![vec![false; h]; h];
    let mut probabilities = vec![0.0; h];
    let mut worst: f64 = 0.0;
    for i in 0..h {
        for j in 0..h {
            let d = trace_product(&left[i], &adj[j]);
            if i == j {
                probabilities[i] = d.re;
            } else {
                let v = d.norm();
                worst = worst.max(v);
                violations[i][j] = v > tol;
            }
        }
    }
    Ok(ConsistencyReport {
        consistent: !violations.iter().flatten().any(|&v| v),
        histories,
        violations,
        probabilities,
        max_off_diagonal: worst,
    })
}

fn diag(d: &[f64]) -> Mat {
    Mat::from_fn(d.len(), d.len(), |i, j| c(if i == j { d[i] } else { 0.0 }, 0.0))
}

/// Qubit projections onto `cos(t/2)|0> + sin(t/2)|1>` and its complement.
pub fn rotated_qubit_family(theta: f64) -> Vec<Mat> {
    let (a, b) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let p = Mat::from_row_slice(2, 2, &[c(a * a, 0.0), c(a * b, 0.0), c(a * b, 0.0), c(b * b, 0.0)]);
    let q = Mat::identity(2, 2) - &p;
    vec![p, q]
}

/// Three fixed cases: commuting families diagonal with the state, the
/// multistep construction, and a rotated qubit pair that must be flagged.
pub fn consistency_suite(multistep: &super::everett::MultistepModel, tol: &Tolerances) -> Result<ScenarioReport> {
    let t = tol.get("consistency", 1e-10);
    let mut report = ScenarioReport::new("consistency", json!({ "tolerance": t }));

    let omega = diag(&[0.1, 0.2, 0.3, 0.4]);
    let f1 = vec![diag(&[1.0, 1.0, 0.0, 0.0]), diag(&[0.0, 0.0, 1.0, 1.0])];
    let f2 = vec![diag(&[1.0, 0.0, 1.0, 0.0]), diag(&[0.0, 1.0, 0.0, 1.0])];
    let diagonal = consistency_check(&[f1, f2], &omega, t)?;
    report.push("diagonal_families", Check::holds("consistent", diagonal.consistent));
    report.push(
        "diagonal_families",
        Check::equal("probability sum", diagonal.probabilities.iter().sum(), 1.0, t),
    );

    let omega = multistep.state(&[])?;
    let tree = consistency_check(&multistep.step_families(), omega.rho().matrix(), t)?;
    report.push("multistep_families", Check::holds("consistent", tree.consistent));

    // |+> measured along z then x: the interference term is 1/4.
    let plus = Mat::from_element(2, 2, c(0.5, 0.0));
    let rotated = consistency_check(
        &[rotated_qubit_family(0.0), rotated_qubit_family(std::f64::consts::FRAC_PI_2)],
        &plus,
        t,
    )?;
    report.push("rotated_qubit", Check::holds("violation flagged", !rotated.consistent));
    report.push("rotated_qubit", Check::equal("max off-diagonal", rotated.max_off_diagonal, 0.25, t));
    report.data = json!({
        "diagonal": diagonal,
        "multistep_max_off_diagonal": tree.max_off_diagonal,
        "rotated_qubit": rotated,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_resolution_is_rejected() {
        let f = vec![diag(&[1.0, 0.0])];
        assert!(matches!(consistency_check(&[f], &diag(&[0.5, 0.5]), 1e-10), Err(Error::NotResolution(_))));
    }

    #[test]
    fn single_family_is_always_consistent() {
        let plus = Mat::from_element(2, 2, c(0.5, 0.0));
        let r = consistency_check(&[rotated_qubit_family(1.0)], &plus, 1e-12).unwrap();
        assert!(r.consistent);
    }
}
