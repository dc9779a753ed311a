//! Naive dense complex linear algebra on row-major `(re, im)` arrays, plus
//! small geometric helpers.

pub type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cadd(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

pub fn matmul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] = cadd(out[i * n + j], cmul(aik, b[k * n + j]));
            }
        }
    }
    out
}

pub fn adjoint(a: &[C], n: usize) -> Vec<C> {
    let mut out = vec![(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let v = a[j * n + i];
            out[i * n + j] = (v.0, -v.1);
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<C> {
    let mut out = vec![(0.0, 0.0); n * n];
    for i in 0..n {
        out[i * n + i] = (1.0, 0.0);
    }
    out
}

/// Hilbert-Schmidt inner product `tr(a^dagger b)`.
fn hs(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).fold((0.0, 0.0), |acc, (x, y)| cadd(acc, cmul((x.0, -x.1), *y)))
}

/// Adds `v` to an orthonormal list if it is independent of it.
fn extend_basis(basis: &mut Vec<Vec<C>>, v: &[C], tol: f64) -> bool {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = hs(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                let t = cmul(c, *bi);
                wi.0 -= t.0;
                wi.1 -= t.1;
            }
        }
    }
    let norm = hs(&w, &w).0.sqrt();
    let scale = v.iter().map(|x| x.0 * x.0 + x.1 * x.1).sum::<f64>().sqrt().max(1.0);
    if norm <= tol * scale {
        return false;
    }
    basis.push(w.iter().map(|x| (x.0 / norm, x.1 / norm)).collect());
    true
}

/// Dimension of the unital *-algebra generated by `gens`, found by
/// multiplying every pair of spanning elements until nothing new appears.
pub fn generated_dimension(gens: &[Vec<C>], n: usize) -> usize {
    let tol = 1e-9;
    let mut basis: Vec<Vec<C>> = Vec::new();
    let mut elems: Vec<Vec<C>> = Vec::new();
    let mut seed = vec![identity(n)];
    for g in gens {
        seed.push(g.clone());
        seed.push(adjoint(g, n));
    }
    for s in seed {
        if extend_basis(&mut basis, &s, tol) {
            elems.push(s);
        }
    }
    loop {
        let mut grew = false;
        let snapshot = elems.clone();
        for a in &snapshot {
            for b in &snapshot {
                let p = matmul(a, b, n);
                if extend_basis(&mut basis, &p, tol) {
                    elems.push(p);
                    grew = true;
                }
            }
        }
        if !grew {
            return basis.len();
        }
    }
}

/// Largest `|tr(d P)|` over a grid of qubit projections: `0`, `1` and the
/// rank-one projections onto Bloch directions on a `k x 2k` angular grid.
pub fn qubit_projection_grid_max(d: &[C; 4], k: usize) -> f64 {
    let tr = d[0].0 + d[3].0;
    let mut best = tr.abs();
    for a in 0..=k {
        let theta = std::f64::consts::PI * a as f64 / k as f64;
        for b in 0..2 * k {
            let phi = std::f64::consts::PI * b as f64 / k as f64;
            let (x, y, z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            // P = (1 + x X + y Y + z Z) / 2, so tr(d P) = (tr d + x tr(dX) + ...)/2.
            let tx = d[1].0 + d[2].0;
            let ty = d[2].1 - d[1].1;
            let tz = d[0].0 - d[3].0;
            let v = 0.5 * (tr + x * tx + y * ty + z * tz);
            best = best.max(v.abs());
        }
    }
    best
}

/// Boost along spatial axis `axis` (1-based) with rapidity `eta`, as a
/// row-major `d x d` matrix.
pub fn boost(d: usize, axis: usize, eta: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m[0] = eta.cosh();
    m[axis * d + axis] = eta.cosh();
    m[axis] = eta.sinh();
    m[axis * d] = eta.sinh();
    m
}

/// Rotation in the plane of spatial axes `a` and `b` (1-based).
pub fn rotation(d: usize, a: usize, b: usize, angle: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m[a * d + a] = angle.cos();
    m[b * d + b] = angle.cos();
    m[a * d + b] = -angle.sin();
    m[b * d + a] = angle.sin();
    m
}

pub fn apply(m: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum()).collect()
}

pub fn real_matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                out[i * d + j] += a[i * d + k] * b[k * d + j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_projection_generates_two_dimensions() {
        let p = vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)];
        assert_eq!(generated_dimension(&[p], 2), 2);
    }

    #[test]
    fn two_generic_projections_generate_everything() {
        let p = vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)];
        let q = vec![(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)];
        assert_eq!(generated_dimension(&[p, q], 2), 4);
    }

    #[test]
    fn boost_preserves_interval() {
        let b = boost(4, 1, 0.7);
        let v = apply(&b, &[2.0, 1.0, 0.5, 0.0]);
        let before = -4.0 + 1.0 + 0.25;
        let after = -v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
        assert!((before - after).abs() < 1e-12);
    }
}
