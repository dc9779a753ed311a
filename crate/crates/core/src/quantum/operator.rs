//! Dense operators on tensor-product spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Mat = DMatrix<Complex64>;
pub type Vector = DVector<Complex64>;

pub const PROJECTION_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(ms: &[Mat]) -> Mat {
    let mut out = Mat::identity(1, 1);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

/// `|v><v|`.
pub fn ket_bra(v: &Vector) -> Mat {
    v * v.adjoint()
}

/// Standard basis vector `|i>` in dimension `n`.
pub fn basis(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = c(1.0, 0.0);
    v
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// An operator on `H = H_1 ⊗ ... ⊗ H_F` with the factor dimensions kept
/// alongside the matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: Mat,
}

impl Operator {
    pub fn new(dims: Vec<usize>, matrix: Mat) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidOperator("factor dimensions must be positive".into()));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::DimensionOverflow("factor dimensions overflow".into()))?;
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entries".into()));
        }
        Ok(Operator { dims, matrix })
    }

    /// Operator on a single factor of dimension `matrix.nrows()`.
    pub fn single(matrix: Mat) -> Result<Self> {
        Operator::new(vec![matrix.nrows()], matrix)
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Operator {
            dims: dims.to_vec(),
            matrix: Mat::identity(n, n),
        }
    }

    /// `|v><v|` for a normalized copy of `v`.
    pub fn pure(dims: Vec<usize>, v: &Vector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Operator::new(dims, ket_bra(&(v / c(norm, 0.0))))
    }

    /// Tensor product, concatenating factor lists.
    pub fn tensor(&self, other: &Operator) -> Operator {
        let mut dims = self.dims.clone();
        dims.extend(&other.dims);
        Operator {
            dims,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// `1 ⊗ ... ⊗ a ⊗ ... ⊗ 1` with `a` on factor `f`.
    pub fn embed(dims: &[usize], f: usize, a: &Mat) -> Result<Self> {
        if f >= dims.len() || a.nrows() != dims[f] || a.ncols() != dims[f] {
            return Err(Error::InvalidOperator(format!("cannot place a {}x{} block on factor {f}", a.nrows(), a.ncols())));
        }
        let parts: Vec<Mat> = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| if i == f { a.clone() } else { Mat::identity(d, d) })
            .collect();
        Operator::new(dims.to_vec(), kron_all(&parts))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            dims: self.dims.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn with_matrix(&self, matrix: Mat) -> Operator {
        assert_eq!(matrix.shape(), self.matrix.shape());
        Operator {
            dims: self.dims.clone(),
            matrix,
        }
    }

    pub fn same_space(&self, other: &Operator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(())
    }

    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `max(|P^2 - P|, |P - P^dagger|)`.
    pub fn projection_defect(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        max_abs(&(sq - &self.matrix)).max(self.hermitian_defect())
    }

    pub fn is_projection(&self) -> bool {
        self.projection_defect() <= PROJECTION_TOL
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `tr(self · x)`, real part.
    pub fn expect(&self, x: &Operator) -> f64 {
        trace_product(&self.matrix, &x.matrix).re
    }

    /// Partial trace keeping the listed factors, in increasing order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Operator> {
        partial_trace(&self.matrix, &self.dims, keep).map(|(m, dims)| Operator { dims, matrix: m })
    }
}

/// Row-major multi-index strides for `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn check_factor_subset(keep: &[usize], count: usize) -> Result<()> {
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.last().is_some_and(|&f| f >= count) {
        return Err(Error::InvalidOperator(format!(
            "factor subset {keep:?} must be strictly increasing below {count}"
        )));
    }
    Ok(())
}

/// `Tr_{complement}(m)` by direct index summation.
pub fn partial_trace(m: &Mat, dims: &[usize], keep: &[usize]) -> Result<(Mat, Vec<usize>)> {
    check_factor_subset(keep, dims.len())?;
    let st = strides(dims);
    let drop: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let kd: Vec<usize> = keep.iter().map(|&f| dims[f]).collect();
    let dd: Vec<usize> = drop.iter().map(|&f| dims[f]).collect();
    let nk: usize = kd.iter().product();
    let nd: usize = dd.iter().product();
    let offset = |sel: &[usize], sd: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for i in (0..sel.len()).rev() {
            off += (idx % sd[i]) * st[sel[i]];
            idx /= sd[i];
        }
        off
    };
    let keep_off: Vec<usize> = (0..nk).map(|i| offset(keep, &kd, i)).collect();
    let drop_off: Vec<usize> = (0..nd).map(|i| offset(&drop, &dd, i)).collect();
    let mut out = Mat::zeros(nk, nk);
    for a in 0..nk {
        for b in 0..nk {
            let mut s = Complex64::new(0.0, 0.0);
            for &e in &drop_off {
                s += m[(keep_off[a] + e, keep_off[b] + e)];
            }
            out[(a, b)] = s;
        }
    }
    Ok((out, kd))
}

/// Permutation matrix whose column `(s, r)` (kept multi-index first, the
/// rest second) is the basis vector with those factor indices.
pub fn factor_isometry(dims: &[usize], keep: &[usize]) -> Result<Mat> {
    check_factor_subset(keep, dims.len())?;
    let st = strides(dims);
    let order: Vec<usize> = keep
        .iter()
        .copied()
        .chain((0..dims.len()).filter(|f| !keep.contains(f)))
        .collect();
    let od: Vec<usize> = order.iter().map(|&f| dims[f]).collect();
    let n: usize = dims.iter().product();
    let mut v = Mat::zeros(n, n);
    for col in 0..n {
        let mut idx = col;
        let mut row = 0;
        for i in (0..order.len()).rev() {
            row += (idx % od[i]) * st[order[i]];
            idx /= od[i];
        }
        v[(row, col)] = c(1.0, 0.0);
    }
    Ok(v)
}

/// A pair of mutually orthogonal projections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRepr", into = "PairRepr")]
pub struct ProjectionPair {
    p: Operator,
    q: Operator,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairRepr {
    p: Operator,
    q: Operator,
}

impl TryFrom<PairRepr> for ProjectionPair {
    type Error = Error;
    fn try_from(r: PairRepr) -> Result<Self> {
        ProjectionPair::new(r.p, r.q)
    }
}

impl From<ProjectionPair> for PairRepr {
    fn from(p: ProjectionPair) -> Self {
        PairRepr { p: p.p, q: p.q }
    }
}

impl ProjectionPair {
    pub fn new(p: Operator, q: Operator) -> Result<Self> {
        p.same_space(&q)?;
        for (name, op) in [("P", &p), ("Q", &q)] {
            let d = op.projection_defect();
            if d > PROJECTION_TOL {
                return Err(Error::NotProjection(format!("{name} has defect {d:.2e}")));
            }
        }
        let overlap = max_abs(&(p.matrix() * q.matrix()));
        if overlap > PROJECTION_TOL {
            return Err(Error::NotProjection(format!("PQ has norm {overlap:.2e}")));
        }
        Ok(ProjectionPair { p, q })
    }

    pub fn p(&self) -> &Operator {
        &self.p
    }

    pub fn q(&self) -> &Operator {
        &self.q
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorRepr {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        OperatorRepr {
            dims: self.dims.clone(),
            matrix: (0..n)
                .map(|i| (0..n).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OperatorRepr::deserialize(d)?;
        let n = r.matrix.len();
        if r.matrix.iter().any(|row| row.len() != n) {
            return Err(serde::de::Error::custom("operator matrix must be square"));
        }
        let m = Mat::from_fn(n, n, |i, j| c(r.matrix[i][j][0], r.matrix[i][j][1]));
        Operator::new(r.dims, m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trace_of_product() {
        let a = Mat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, i as f64 - j as f64));
        let b = Mat::from_fn(3, 3, |i, j| c(if i == j { 1.0 } else { 0.0 }, 0.0));
        let ab = Operator::new(vec![2, 3], a.kronecker(&b)).unwrap();
        let r = ab.partial_trace(&[0]).unwrap();
        assert!(max_abs(&(r.matrix() - &a * c(3.0, 0.0))) < 1e-14);
        let r = ab.partial_trace(&[1]).unwrap();
        assert!(max_abs(&(r.matrix() - &b * a.trace())) < 1e-14);
    }

    #[test]
    fn factor_isometry_is_a_permutation() {
        let v = factor_isometry(&[2, 3, 2], &[1]).unwrap();
        let eye = Mat::identity(12, 12);
        assert!(max_abs(&(v.adjoint() * &v - eye)) < 1e-15);
    }

    #[test]
    fn projection_pair_rejects_overlap() {
        let p = Operator::single(Mat::from_diagonal(&Vector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]))).unwrap();
        let q = Operator::single(Mat::from_diagonal(&Vector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]))).unwrap();
        assert!(ProjectionPair::new(p.clone(), q).is_ok());
        assert!(matches!(ProjectionPair::new(p.clone(), p), Err(Error::NotProjection(_))));
    }

    #[test]
    fn json_round_trip() {
        let op = Operator::single(Mat::from_fn(2, 2, |i, j| c(i as f64, j as f64))).unwrap();
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(s, r#"{"dims":[2],"matrix":[[[0.0,0.0],[0.0,1.0]],[[1.0,0.0],[1.0,1.0]]]}"#);
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
        assert!(serde_json::from_str::<Operator>(r#"{"dims":[3],"matrix":[[[1,0]]]}"#).is_err());
    }
}
