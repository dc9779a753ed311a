//! Random states, unitaries and projections for randomized checks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::{c, ket_bra, Mat, Operator, Vector};

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Normalized Gaussian vector.
pub fn pure_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    let v = gaussian_vector(rng, n);
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Full-rank density matrix `G G^dagger / tr(G G^dagger)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Operator {
    let n = dims.iter().product();
    let g = gaussian_matrix(rng, n, n);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Operator::new(dims.to_vec(), m / c(tr, 0.0)).expect("dimensions consistent")
}

/// Density matrix of the given rank.
pub fn density_of_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Mat {
    let g = gaussian_matrix(rng, n, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m / c(tr, 0.0)
}

/// Projection onto the span of `rank` random vectors.
pub fn projection<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Mat {
    let u = unitary(rng, n);
    let mut p = Mat::zeros(n, n);
    for j in 0..rank {
        p += ket_bra(&u.column(j).into_owned());
    }
    p
}
