//! States on algebras, restriction, relative entropy and `app`.

use std::sync::Arc;

use super::algebra::{eigh, Algebra};
use super::operator::{max_abs, Mat, Operator};
use crate::error::{Error, Result};

/// Tolerance for state validity (hermiticity, positivity, trace).
pub const STATE_TOL: f64 = 1e-12;
/// Eigenvalues at or below this are treated as zero in logarithms and
/// support comparisons.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;

/// A density matrix regarded as a state on an algebra. The matrix is kept
/// on the full space; only its values on the algebra matter.
#[derive(Clone, Debug)]
pub struct AlgebraState {
    rho: Operator,
    algebra: Arc<Algebra>,
}

fn check_density(m: &Mat) -> Result<()> {
    let scale = max_abs(m).max(1.0);
    let herm = max_abs(&(m - m.adjoint()));
    if herm > STATE_TOL * scale {
        return Err(Error::InvalidState(format!("not Hermitian (defect {herm:.2e})")));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > STATE_TOL * (m.nrows() as f64).max(1.0) || tr.im.abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let (vals, _) = eigh(m);
    if let Some(&low) = vals.first() {
        if low < -STATE_TOL * (m.nrows() as f64).max(1.0) {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:.2e}")));
        }
    }
    Ok(())
}

impl AlgebraState {
    pub fn new(rho: Operator, algebra: Arc<Algebra>) -> Result<Self> {
        if rho.n() != algebra.n() || rho.dims() != algebra.dims() {
            return Err(Error::DimensionMismatch {
                expected: algebra.n(),
                found: rho.n(),
            });
        }
        check_density(rho.matrix())?;
        Ok(AlgebraState { rho, algebra })
    }

    /// State on the full algebra of its space.
    pub fn on_full(rho: Operator) -> Result<Self> {
        let alg = Arc::new(Algebra::full(rho.dims())?);
        AlgebraState::new(rho, alg)
    }

    pub fn rho(&self) -> &Operator {
        &self.rho
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    /// `rho(x)` for an operator in the algebra.
    pub fn expect(&self, x: &Operator) -> f64 {
        self.rho.expect(x)
    }

    pub fn expect_matrix(&self, x: &Mat) -> f64 {
        super::operator::trace_product(self.rho.matrix(), x).re
    }

    /// Block densities of the state on its algebra.
    pub fn reduced(&self) -> Vec<Mat> {
        self.algebra.reduce(self.rho.matrix())
    }
}

/// Restriction to a subalgebra. The result carries the conditional
/// expectation of the density, which agrees with the original on `sub`.
pub fn restrict(state: &AlgebraState, sub: &Arc<Algebra>) -> Result<AlgebraState> {
    if !sub.is_subalgebra_of(state.algebra()) {
        return Err(Error::NotContained("target is not a subalgebra of the state's algebra".into()));
    }
    let m = sub.conditional_expectation(state.rho.matrix());
    Ok(AlgebraState {
        rho: state.rho.with_matrix(m),
        algebra: sub.clone(),
    })
}

fn same_algebra(a: &AlgebraState, b: &AlgebraState) -> Result<()> {
    if Arc::ptr_eq(&a.algebra, &b.algebra) || a.algebra == b.algebra {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch)
    }
}

/// `tr(sigma log rho) - tr(sigma log sigma)` for one block of positive
/// matrices; `-inf` when `sigma` has weight outside the support of `rho`.
pub fn block_entropy(sigma: &Mat, rho: &Mat) -> f64 {
    let (sv, _) = eigh(sigma);
    let self_term: f64 = sv.iter().filter(|&&l| l > SPECTRAL_CUTOFF).map(|l| l * l.ln()).sum();
    let (rv, rvecs) = eigh(rho);
    let mut cross = 0.0;
    for (k, &mu) in rv.iter().enumerate() {
        let col = rvecs.column(k);
        let w = (col.adjoint() * sigma * col)[(0, 0)].re;
        if mu > SPECTRAL_CUTOFF {
            cross += w * mu.ln();
        } else if w > SPECTRAL_CUTOFF {
            return f64::NEG_INFINITY;
        }
    }
    cross - self_term
}

/// Relative entropy `ent(sigma | rho)` on the common algebra, summed over
/// blocks. Never positive.
pub fn rel_entropy(sigma: &AlgebraState, rho: &AlgebraState) -> Result<f64> {
    same_algebra(sigma, rho)?;
    if sigma.algebra.is_fallback() {
        log::warn!("relative entropy evaluated on the algebra generated by a span");
    }
    let total: f64 = sigma
        .reduced()
        .iter()
        .zip(rho.reduced())
        .map(|(s, r)| block_entropy(s, &r))
        .sum();
    // Rounding can push an exact zero slightly positive.
    Ok(total.min(0.0))
}

/// `app(sigma | rho) = exp(ent(sigma | rho))`.
pub fn app(sigma: &AlgebraState, rho: &AlgebraState) -> Result<f64> {
    Ok(rel_entropy(sigma, rho)?.exp())
}

/// `app` on a subalgebra of the states' algebra.
pub fn app_on(sigma: &AlgebraState, rho: &AlgebraState, sub: &Arc<Algebra>) -> Result<f64> {
    app(&restrict(sigma, sub)?, &restrict(rho, sub)?)
}

/// Largest `|sigma(P) - sigma'(P)|` over projections `P` of the algebra:
/// the larger of the positive and negative parts of the difference.
pub fn max_projection_gap(a: &AlgebraState, b: &AlgebraState) -> Result<f64> {
    same_algebra(a, b)?;
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (x, y) in a.reduced().iter().zip(b.reduced()) {
        let (vals, _) = eigh(&(x - y));
        for v in vals {
            if v > 0.0 {
                pos += v;
            } else {
                neg -= v;
            }
        }
    }
    Ok(f64::max(pos, neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::operator::c;

    fn diag(vals: &[f64]) -> Operator {
        let n = vals.len();
        Operator::single(Mat::from_fn(n, n, |i, j| c(if i == j { vals[i] } else { 0.0 }, 0.0))).unwrap()
    }

    #[test]
    fn self_entropy_is_zero() {
        let s = AlgebraState::on_full(diag(&[0.2, 0.8])).unwrap();
        assert_eq!(rel_entropy(&s, &s).unwrap(), 0.0);
        assert_eq!(app(&s, &s).unwrap(), 1.0);
    }

    #[test]
    fn orthogonal_mixture_gives_log_weight() {
        let sigma = AlgebraState::on_full(diag(&[1.0, 0.0])).unwrap();
        let rho = AlgebraState::on_full(diag(&[0.3, 0.7])).unwrap();
        assert!((rel_entropy(&sigma, &rho).unwrap() - 0.3f64.ln()).abs() < 1e-15);
        let pure = AlgebraState::on_full(diag(&[0.0, 1.0])).unwrap();
        assert_eq!(rel_entropy(&sigma, &pure).unwrap(), f64::NEG_INFINITY);
        assert_eq!(app(&sigma, &pure).unwrap(), 0.0);
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(matches!(AlgebraState::on_full(diag(&[0.5, 0.6])), Err(Error::InvalidState(_))));
        assert!(matches!(AlgebraState::on_full(diag(&[1.2, -0.2])), Err(Error::InvalidState(_))));
    }

    #[test]
    fn restriction_to_a_larger_algebra_fails() {
        let rho = Operator::identity(&[2, 2]).with_matrix(Mat::identity(4, 4) * c(0.25, 0.0));
        let small = Arc::new(Algebra::on_factors(&[2, 2], &[0]).unwrap());
        let s = AlgebraState::new(rho, small).unwrap();
        let big = Arc::new(Algebra::full(&[2, 2]).unwrap());
        assert!(matches!(restrict(&s, &big), Err(Error::NotContained(_))));
    }
}
