//! Decoherent mixtures and the purity property.

use serde::Serialize;

use super::algebra::eigh;
use super::operator::{max_abs, Operator};
use super::state::{app, AlgebraState};
use crate::error::{Error, Result};

/// Default tolerance for "approximately" in `sigma(Q) ~ 1`, `sigma_d(Q) ~ 0`.
pub const DECOHERENCE_DELTA: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecoherenceReport {
    pub decoherent: bool,
    /// `p = rho(Q)`.
    pub p: f64,
    pub sigma_q: f64,
    /// `sigma_d(Q)` for `sigma_d = (rho - p sigma) / (1 - p)`; zero when
    /// `p = 1`.
    pub sigma_d_q: f64,
    /// Most negative eigenvalue of `sigma_d` on the algebra.
    pub sigma_d_min_eigenvalue: f64,
    /// Largest deviation in `rho(QB) = rho(BQ) = rho(Q) sigma(B)` over a
    /// basis of the algebra.
    pub identity_residual: f64,
}

fn require_projection_in(q: &Operator, state: &AlgebraState) -> Result<()> {
    let d = q.projection_defect();
    if d > super::operator::PROJECTION_TOL {
        return Err(Error::NotProjection(format!("defect {d:.2e}")));
    }
    if !state.algebra().contains(q.matrix()) {
        return Err(Error::NotContained("projection is not in the algebra".into()));
    }
    Ok(())
}

/// Tests `rho = p sigma + (1 - p) sigma_d` with `sigma(Q) ~ 1` and
/// `sigma_d(Q) ~ 0` within `delta`, together with the product identities.
pub fn is_decoherent(rho: &AlgebraState, sigma: &AlgebraState, q: &Operator, delta: f64) -> Result<DecoherenceReport> {
    if rho.algebra() != sigma.algebra() {
        return Err(Error::AlgebraMismatch);
    }
    require_projection_in(q, rho)?;
    let alg = rho.algebra();
    let p = rho.expect(q);
    let sigma_q = sigma.expect(q);
    let r = rho.rho().matrix();
    let s = sigma.rho().matrix();
    let qm = q.matrix();

    // On the algebra, rho(QB) and rho(BQ) for all B are the reductions of
    // rho Q and Q rho; rho(Q) sigma(B) is the reduction of p sigma.
    let left = alg.reduce(&(r * qm));
    let right = alg.reduce(&(qm * r));
    let target = alg.reduce(&(s * num_complex::Complex64::new(p, 0.0)));
    let mut residual: f64 = 0.0;
    for ((l, rr), t) in left.iter().zip(&right).zip(&target) {
        residual = residual.max(max_abs(&(l - t))).max(max_abs(&(rr - t)));
    }

    let (sigma_d_q, min_eig) = if 1.0 - p > delta {
        let d = (r - s * num_complex::Complex64::new(p, 0.0)) / num_complex::Complex64::new(1.0 - p, 0.0);
        let min = alg
            .reduce(&d)
            .iter()
            .map(|b| eigh(b).0.first().copied().unwrap_or(0.0))
            .fold(0.0f64, f64::min);
        (super::operator::trace_product(&d, qm).re, min)
    } else {
        (0.0, 0.0)
    };
    let decoherent = (sigma_q - 1.0).abs() <= delta
        && sigma_d_q.abs() <= delta
        && min_eig >= -delta
        && residual <= delta;
    Ok(DecoherenceReport {
        decoherent,
        p,
        sigma_q,
        sigma_d_q,
        sigma_d_min_eigenvalue: min_eig,
        identity_residual: residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurityReport {
    pub rho_p: f64,
    pub sigma_p: f64,
    pub app: f64,
    /// Whether `rho(P) = 0` and `app > 0` imply `sigma(P) = 0`.
    pub holds: bool,
}

/// Checks the implication `rho(P) = 0, app(sigma|rho) > 0 => sigma(P) = 0`.
pub fn purity_property_check(rho: &AlgebraState, sigma: &AlgebraState, p: &Operator, tol: f64) -> Result<PurityReport> {
    require_projection_in(p, rho)?;
    let rho_p = rho.expect(p);
    let sigma_p = sigma.expect(p);
    let a = app(sigma, rho)?;
    let premise = rho_p.abs() <= tol && a > tol;
    Ok(PurityReport {
        rho_p,
        sigma_p,
        app: a,
        holds: !premise || sigma_p.abs() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::operator::{basis, c, ket_bra, Mat, Vector};

    #[test]
    fn identity_projection_is_trivially_decoherent() {
        let rho = AlgebraState::on_full(Operator::single(ket_bra(&basis(2, 0))).unwrap()).unwrap();
        let one = Operator::identity(&[2]);
        let r = is_decoherent(&rho, &rho, &one, DECOHERENCE_DELTA).unwrap();
        assert!(r.decoherent);
        assert!((r.p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_superposition_is_not_decoherent() {
        let v = Vector::from_vec(vec![c(0.6, 0.0), c(0.8, 0.0)]);
        let rho = AlgebraState::on_full(Operator::pure(vec![2], &v).unwrap()).unwrap();
        let sigma = AlgebraState::on_full(Operator::single(ket_bra(&basis(2, 0))).unwrap()).unwrap();
        let q = Operator::single(ket_bra(&basis(2, 0))).unwrap();
        let r = is_decoherent(&rho, &sigma, &q, DECOHERENCE_DELTA).unwrap();
        assert!(!r.decoherent);
        assert!(r.identity_residual > 0.4);
    }

    #[test]
    fn non_projection_is_rejected() {
        let rho = AlgebraState::on_full(Operator::identity(&[2]).with_matrix(Mat::identity(2, 2) * c(0.5, 0.0))).unwrap();
        let half = Operator::identity(&[2]).with_matrix(Mat::identity(2, 2) * c(0.5, 0.0));
        assert!(matches!(is_decoherent(&rho, &rho, &half, 1e-3), Err(Error::NotProjection(_))));
    }
}
