//! Double-double arithmetic and a Jacobi eigensolver built on it, used as
//! an extended-precision reference for relative entropy.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    /// ln 2 to double-double precision.
    pub const LN2: DD = DD {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub fn new(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        let x = DD::new(self.hi.sqrt());
        // One Newton step doubles the precision.
        x + (self - x * x) / (x * DD::new(2.0))
    }

    pub fn exp(self) -> DD {
        if self.hi < -745.0 {
            return DD::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - DD::LN2 * DD::new(k);
        // Further scale the reduced argument by 2^-8 and square back.
        let r = r * DD::new(1.0 / 256.0);
        let mut term = DD::ONE;
        let mut sum = DD::ONE;
        for n in 1..30 {
            term = term * r / DD::new(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..8 {
            sum = sum * sum;
        }
        let scale = 2f64.powi(k as i32);
        DD {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    pub fn ln(self) -> DD {
        assert!(self.hi > 0.0, "logarithm of a non-positive number");
        let mut y = DD::new(self.hi.ln());
        for _ in 0..3 {
            // Newton: y <- y + x exp(-y) - 1.
            y = y + self * (-y).exp() - DD::ONE;
        }
        y
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, o: DD) -> DD {
        self + (-o)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self - o * DD::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DD::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::new(q3)
    }
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix. Returns the
/// eigenvalues and the eigenvectors as columns of a row-major matrix.
pub fn jacobi(a: &[Vec<DD>]) -> (Vec<DD>, Vec<Vec<DD>>) {
    let n = a.len();
    let mut a: Vec<Vec<DD>> = a.to_vec();
    let mut v: Vec<Vec<DD>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { DD::ONE } else { DD::ZERO }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i][j].hi * a[i][j].hi;
                }
            }
        }
        if off < 1e-64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].hi.abs() < 1e-40 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (DD::new(2.0) * a[p][q]);
                let sign = if theta.hi >= 0.0 { 1.0 } else { -1.0 };
                let t = DD::new(sign) / (theta.abs() + (theta * theta + DD::ONE).sqrt());
                let c = DD::ONE / (t * t + DD::ONE).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of the Hermitian matrix
/// `A + iB`, given row-major as `(re, im)` pairs.
fn embed(h: &[(f64, f64)], n: usize) -> Vec<Vec<DD>> {
    let mut out = vec![vec![DD::ZERO; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let (re, im) = h[i * n + j];
            out[i][j] = DD::new(re);
            out[i + n][j + n] = DD::new(re);
            out[i][j + n] = DD::new(-im);
            out[i + n][j] = DD::new(im);
        }
    }
    out
}

/// Relative entropy `tr(sigma log rho) - tr(sigma log sigma)` of two full
/// rank density matrices, computed in double-double precision. Returns
/// `-inf` if `rho` has an eigenvalue below `cutoff` on which `sigma` has
/// weight.
pub fn relative_entropy(sigma: &[(f64, f64)], rho: &[(f64, f64)], n: usize, cutoff: f64) -> f64 {
    let s = embed(sigma, n);
    let r = embed(rho, n);
    let (ls, _) = jacobi(&s);
    let (lr, vr) = jacobi(&r);
    let mut sls = DD::ZERO;
    for l in &ls {
        if l.hi > cutoff {
            sls = sls + *l * l.ln();
        }
    }
    let mut slr = DD::ZERO;
    for k in 0..2 * n {
        let mut w = DD::ZERO;
        for i in 0..2 * n {
            for j in 0..2 * n {
                w = w + vr[i][k] * s[i][j] * vr[j][k];
            }
        }
        if lr[k].hi > cutoff {
            slr = slr + w * lr[k].ln();
        } else if w.hi > cutoff {
            return f64::NEG_INFINITY;
        }
    }
    // Every eigenvalue appears twice in the embedding.
    ((slr - sls) * DD::new(0.5)).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_log_round_trip() {
        for x in [0.1, 0.5, 1.0, 2.0, 37.5, 1e-8] {
            let y = DD::new(x).ln().exp();
            assert!(((y - DD::new(x)) / DD::new(x)).abs().hi < 1e-28, "x = {x}");
        }
        let e = DD::ONE.exp();
        assert!((e.hi - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![
            vec![DD::new(2.0), DD::new(1.0)],
            vec![DD::new(1.0), DD::new(2.0)],
        ];
        let (mut l, _) = jacobi(&a);
        l.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((l[0].to_f64() - 1.0).abs() < 1e-30);
        assert!((l[1].to_f64() - 3.0).abs() < 1e-30);
    }

    #[test]
    fn commuting_relative_entropy() {
        let sigma = [(0.3, 0.0), (0.0, 0.0), (0.0, 0.0), (0.7, 0.0)];
        let rho = [(0.6, 0.0), (0.0, 0.0), (0.0, 0.0), (0.4, 0.0)];
        let expected = 0.3 * (0.6f64 / 0.3).ln() + 0.7 * (0.4f64 / 0.7).ln();
        assert!((relative_entropy(&sigma, &rho, 2, 1e-12) - expected).abs() < 1e-15);
    }
}
