//! Relative frequency operators on N copies of a system.
//!
//! `rho^N`, `F^N` and the string projections are all diagonal in a product
//! basis adapted to `P`, so expectations reduce to sums over the `k^N`
//! diagonal entries. Small `N` is cross-checked against dense tensors.

use serde::Serialize;
use serde_json::json;

use super::report::{Check, ScenarioReport, Tolerances};
use crate::error::{Error, Result};
use crate::quantum::operator::{c, kron_all, max_abs, PROJECTION_TOL};
use crate::quantum::{eigh, Mat};

/// Largest product dimension `k^N` handled.
pub const MAX_PRODUCT_DIM: usize = 1 << 22;
/// Largest product dimension also checked with dense matrices.
pub const DENSE_CHECK_DIM: usize = 64;

const MOMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct FrequencyModel {
    rho: Mat,
    projection: Mat,
    /// Orthonormal basis diagonalizing `P`, range first.
    frame: Mat,
    rank: usize,
    n: usize,
}

impl FrequencyModel {
    pub fn new(rho: Mat, projection: Mat, n: usize) -> Result<Self> {
        let k = rho.nrows();
        if projection.nrows() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: projection.nrows(),
            });
        }
        let defect = max_abs(&(&projection * &projection - &projection)).max(max_abs(&(&projection - projection.adjoint())));
        if defect > PROJECTION_TOL {
            return Err(Error::NotProjection(format!("defect {defect:.2e}")));
        }
        if n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        match k.checked_pow(n as u32) {
            Some(d) if d <= MAX_PRODUCT_DIM => {}
            _ => return Err(Error::DimensionOverflow(format!("{k}^{n} exceeds {MAX_PRODUCT_DIM}"))),
        }
        let (vals, vecs) = eigh(&projection);
        // eigh sorts ascending, so the range of P is at the end.
        let order: Vec<usize> = (0..k).rev().collect();
        let frame = Mat::from_fn(k, k, |i, j| vecs[(i, order[j])]);
        let rank = vals.iter().filter(|&&v| v > 0.5).count();
        Ok(FrequencyModel {
            rho,
            projection,
            frame,
            rank,
            n,
        })
    }

    /// Qubit with `rho = diag(p, 1 - p)` and `P = |0><0|`.
    pub fn qubit(p: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(format!("p = {p}")));
        }
        let rho = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(p, 0.0),
            (1, 1) => c(1.0 - p, 0.0),
            _ => c(0.0, 0.0),
        });
        let proj = Mat::from_fn(2, 2, |i, j| c(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0));
        FrequencyModel::new(rho, proj, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p = rho(P)`.
    pub fn p(&self) -> f64 {
        (&self.rho * &self.projection).trace().re
    }

    /// Diagonal of `rho` in the adapted frame.
    fn local_diagonal(&self) -> Vec<f64> {
        let r = self.frame.adjoint() * &self.rho * &self.frame;
        (0..r.nrows()).map(|i| r[(i, i)].re).collect()
    }

    /// Product-basis diagonal of `rho^N` and the number of `P` factors of
    /// each basis vector.
    fn product_diagonal(&self) -> (Vec<f64>, Vec<u8>) {
        let d = self.local_diagonal();
        let mut weights = vec![1.0];
        let mut counts = vec![0u8];
        for _ in 0..self.n {
            let mut w2 = Vec::with_capacity(weights.len() * d.len());
            let mut c2 = Vec::with_capacity(weights.len() * d.len());
            for (w, cnt) in weights.iter().zip(&counts) {
                for (i, di) in d.iter().enumerate() {
                    w2.push(w * di);
                    c2.push(cnt + u8::from(i < self.rank));
                }
            }
            weights = w2;
            counts = c2;
        }
        (weights, counts)
    }

    /// `rho^N(P_{S^N_M})` for `M = 0..=N`.
    pub fn string_class_probabilities(&self) -> Vec<f64> {
        let (w, cnt) = self.product_diagonal();
        let mut out = vec![0.0; self.n + 1];
        for (wi, ci) in w.iter().zip(&cnt) {
            out[*ci as usize] += wi;
        }
        out
    }

    /// Spectrum of `F^N`: the distinct values `M / N` that occur.
    pub fn frequency_spectrum(&self) -> Vec<f64> {
        let k = self.rho.nrows();
        let mut ms: Vec<usize> = (0..=self.n)
            .filter(|&m| (m == 0 || self.rank > 0) && (m == self.n || self.rank < k))
            .collect();
        ms.dedup();
        ms.into_iter().map(|m| m as f64 / self.n as f64).collect()
    }

    /// `(rho^N(F^N), rho^N((F^N - p)^2))`.
    pub fn moments(&self) -> (f64, f64) {
        let p = self.p();
        let probs = self.string_class_probabilities();
        let n = self.n as f64;
        let mean = probs.iter().enumerate().map(|(m, w)| w * m as f64 / n).sum();
        let var = probs.iter().enumerate().map(|(m, w)| w * (m as f64 / n - p).powi(2)).sum();
        (mean, var)
    }

    /// `rho^N(P_X)` for strings with between `pN - delta N^eta` and
    /// `pN + delta N^eta` occurrences.
    pub fn window_probability(&self, delta: f64, eta: f64) -> f64 {
        let p = self.p();
        let n = self.n as f64;
        let half = delta * n.powf(eta);
        self.string_class_probabilities()
            .iter()
            .enumerate()
            .filter(|(m, _)| (*m as f64 - p * n).abs() <= half)
            .map(|(_, w)| w)
            .sum()
    }

    /// Dense `rho^N` and `F^N`, for small products only.
    pub fn dense(&self) -> Result<(Mat, Mat)> {
        let k = self.rho.nrows();
        let dim = k.pow(self.n as u32);
        if dim > DENSE_CHECK_DIM {
            return Err(Error::DimensionOverflow(format!("dense product of dimension {dim}")));
        }
        let rho_n = kron_all(&vec![self.rho.clone(); self.n]);
        let id = Mat::identity(k, k);
        let mut f = Mat::zeros(dim, dim);
        for j in 0..self.n {
            let factors: Vec<Mat> = (0..self.n).map(|i| if i == j { self.projection.clone() } else { id.clone() }).collect();
            f += kron_all(&factors);
        }
        Ok((rho_n, f / c(self.n as f64, 0.0)))
    }
}

fn binomial(n: usize, m: usize, p: f64) -> f64 {
    let mut coef = 1.0;
    for i in 0..m {
        coef = coef * (n - i) as f64 / (i + 1) as f64;
    }
    coef * p.powi(m as i32) * (1.0 - p).powi((n - m) as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyRow {
    pub p: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub window: f64,
    pub chebyshev_bound: f64,
}

/// Moments, binomial class probabilities, the Chebyshev bound and dense
/// agreement over a grid of `p` and `N`. The window probability is listed
/// per `N` with the number of decreasing steps, since integer rounding of
/// the window makes it non-monotone at small `N`.
pub fn frequency_suite(ps: &[f64], n_max: usize, delta: f64, eta: f64, tol: &Tolerances) -> Result<ScenarioReport> {
    if !(eta > 0.5 && delta > 0.0) {
        return Err(Error::Config(format!("need delta > 0 and eta > 1/2, got {delta}, {eta}")));
    }
    let mt = tol.get("moment", MOMENT_TOL);
    let bt = tol.get("binomial", MOMENT_TOL);
    let mut report = ScenarioReport::new(
        "frequency",
        json!({ "p": ps, "n_max": n_max, "delta": delta, "eta": eta }),
    );
    let mut rows = Vec::new();
    let mut non_monotone = Vec::new();
    for &p in ps {
        let mut prev: Option<f64> = None;
        let mut drops = 0usize;
        for n in 1..=n_max {
            let model = FrequencyModel::qubit(p, n)?;
            let label = format!("p={p} N={n}");
            let (mean, var) = model.moments();
            report.push("mean", Check::equal(label.clone(), mean, p, mt));
            report.push("variance", Check::equal(label.clone(), var, p * (1.0 - p) / n as f64, mt));
            let classes = model.string_class_probabilities();
            let worst = classes
                .iter()
                .enumerate()
                .map(|(m, w)| (w - binomial(n, m, p)).abs())
                .fold(0.0, f64::max);
            report.push("string_classes", Check::at_most(label.clone(), worst, 0.0, bt));
            let window = model.window_probability(delta, eta);
            let bound = 1.0 - p * (1.0 - p) * (n as f64).powf(1.0 - 2.0 * eta) / (delta * delta);
            report.push("chebyshev", Check::at_least(label.clone(), window, bound, 1e-12));
            if let Ok((rho_n, f)) = model.dense() {
                let allowed = model.frequency_spectrum();
                let (eig, _) = eigh(&f);
                let worst = eig
                    .iter()
                    .map(|e| allowed.iter().map(|a| (e - a).abs()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                report.push("frequency_spectrum", Check::at_most(label.clone(), worst, 0.0, mt));
                let dense_mean = (&rho_n * &f).trace().re;
                let shifted = &f - Mat::identity(f.nrows(), f.nrows()) * c(p, 0.0);
                let dense_var = (&rho_n * &shifted * &shifted).trace().re;
                report.push("dense_agreement", Check::equal(format!("{label} mean"), dense_mean, mean, mt));
                report.push("dense_agreement", Check::equal(format!("{label} variance"), dense_var, var, mt));
            }
            if prev.is_some_and(|q| window < q - 1e-15) {
                drops += 1;
            }
            prev = Some(window);
            rows.push(FrequencyRow {
                p,
                n,
                mean,
                variance: var,
                window,
                chebyshev_bound: bound,
            });
        }
        non_monotone.push(json!({ "p": p, "decreasing_steps": drops }));
    }
    report.data = json!({ "rows": rows, "window_monotonicity": non_monotone });
    Ok(report)
}

/// `p = 0, 0.1, ..., 1`.
pub fn p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}
