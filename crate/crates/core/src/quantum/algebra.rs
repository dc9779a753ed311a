//! Finite-dimensional *-algebras in block form.
//!
//! Every unital *-subalgebra of `B(C^n)` is unitarily a direct sum of
//! `M_d ⊗ 1_k` blocks. A block is stored as an isometry `V: C^d ⊗ C^k -> C^n`
//! (columns ordered `(a, l) -> a * k + l`), so that the block acts as
//! `x ↦ V (x ⊗ 1_k) V^dagger`.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::{c, factor_isometry, hermitian_part, max_abs, partial_trace, Mat, Operator};
use crate::error::{Error, Result};

/// Span tolerance for algebra generation, relative to the element norm.
pub const SPAN_TOL: f64 = 1e-9;
/// Largest Hilbert-space dimension accepted by [`generate_algebra`].
pub const MAX_GENERATED_DIM: usize = 64;

/// How an algebra is specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebraSpec {
    /// `B(H_S) ⊗ 1` for a set `S` of tensor factors.
    FullOnFactors { dims: Vec<usize>, factors: Vec<usize> },
    /// The unital *-algebra generated by the operators.
    Generated { generators: Vec<Operator> },
    /// A linear span of operators that need not be an algebra. Entropy on it
    /// is evaluated on the generated algebra instead.
    Span { operators: Vec<Operator> },
}

impl AlgebraSpec {
    pub fn full(dims: &[usize]) -> Self {
        AlgebraSpec::FullOnFactors {
            dims: dims.to_vec(),
            factors: (0..dims.len()).collect(),
        }
    }

    pub fn resolve(&self) -> Result<Arc<Algebra>> {
        let mut alg = match self {
            AlgebraSpec::FullOnFactors { dims, factors } => Algebra::on_factors(dims, factors)?,
            AlgebraSpec::Generated { generators } => generate_algebra(generators)?,
            AlgebraSpec::Span { operators } => {
                log::warn!("entropy on an operator span falls back to the generated algebra");
                let mut a = generate_algebra(operators)?;
                a.fallback = true;
                a
            }
        };
        alg.spec = self.clone();
        Ok(Arc::new(alg))
    }
}

#[derive(Clone, Debug)]
pub struct Block {
    pub d: usize,
    pub k: usize,
    pub v: Mat,
}

#[derive(Clone, Debug)]
pub struct Algebra {
    n: usize,
    dims: Vec<usize>,
    blocks: Vec<Block>,
    /// Kept factors when the algebra is `B(H_S) ⊗ 1`, for the direct
    /// partial-trace path.
    factors: Option<Vec<usize>>,
    fallback: bool,
    spec: AlgebraSpec,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Algebra {
    pub fn full(dims: &[usize]) -> Result<Algebra> {
        Algebra::on_factors(dims, &(0..dims.len()).collect::<Vec<_>>())
    }

    pub fn on_factors(dims: &[usize], factors: &[usize]) -> Result<Algebra> {
        let v = factor_isometry(dims, factors)?;
        let n: usize = dims.iter().product();
        let d: usize = factors.iter().map(|&f| dims[f]).product();
        Ok(Algebra {
            n,
            dims: dims.to_vec(),
            blocks: vec![Block { d, k: n / d, v }],
            factors: Some(factors.to_vec()),
            fallback: false,
            spec: AlgebraSpec::FullOnFactors {
                dims: dims.to_vec(),
                factors: factors.to_vec(),
            },
        })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Whether this algebra stands in for a non-algebra span.
    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    /// Linear dimension `sum d_i^2`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.d * b.d).sum()
    }

    /// Block shapes `(d_i, k_i)`.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.d, b.k)).collect()
    }

    /// `Tr_k(V_i^dagger x V_i)` for every block: the density of the state
    /// `tr(x ·)` restricted to the algebra.
    pub fn reduce(&self, x: &Mat) -> Vec<Mat> {
        if let Some(f) = &self.factors {
            return vec![partial_trace(x, &self.dims, f).expect("factor subset checked").0];
        }
        self.blocks
            .iter()
            .map(|b| {
                let y = b.v.adjoint() * x * &b.v;
                Mat::from_fn(b.d, b.d, |i, j| (0..b.k).map(|l| y[(i * b.k + l, j * b.k + l)]).sum())
            })
            .collect()
    }

    /// `sum_i V_i (x_i / k_i ⊗ 1) V_i^dagger`, the full-space density whose
    /// reduction is `xs`.
    pub fn expand(&self, xs: &[Mat]) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (b, x) in self.blocks.iter().zip(xs) {
            let scaled = x * c(1.0 / b.k as f64, 0.0);
            let y = scaled.kronecker(&Mat::identity(b.k, b.k));
            out += &b.v * y * b.v.adjoint();
        }
        out
    }

    /// Trace-preserving conditional expectation onto the algebra.
    pub fn conditional_expectation(&self, x: &Mat) -> Mat {
        self.expand(&self.reduce(x))
    }

    /// `V_i (x ⊗ 1) V_i^dagger` for an element of block `i`.
    pub fn embed_block(&self, i: usize, x: &Mat) -> Mat {
        let b = &self.blocks[i];
        &b.v * x.kronecker(&Mat::identity(b.k, b.k)) * b.v.adjoint()
    }

    /// Distance of `x` from the algebra, `|E(x) - x|_max`.
    pub fn membership_residual(&self, x: &Mat) -> f64 {
        max_abs(&(self.conditional_expectation(x) - x))
    }

    pub fn contains(&self, x: &Mat) -> bool {
        self.membership_residual(x) <= SPAN_TOL * max_abs(x).max(1.0)
    }

    /// Matrix units `V_i (|a><b| ⊗ 1) V_i^dagger`: a basis of the algebra.
    pub fn basis(&self) -> Vec<Mat> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, b) in self.blocks.iter().enumerate() {
            for a in 0..b.d {
                for e in 0..b.d {
                    let mut u = Mat::zeros(b.d, b.d);
                    u[(a, e)] = c(1.0, 0.0);
                    out.push(self.embed_block(i, &u));
                }
            }
        }
        out
    }

    /// A small generating set: per block `e_00` and the `e_{a,a+1}`.
    pub fn generators(&self) -> Vec<Mat> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let mut u = Mat::zeros(b.d, b.d);
            u[(0, 0)] = c(1.0, 0.0);
            out.push(self.embed_block(i, &u));
            for a in 0..b.d.saturating_sub(1) {
                let mut u = Mat::zeros(b.d, b.d);
                u[(a, a + 1)] = c(1.0, 0.0);
                out.push(self.embed_block(i, &u));
            }
        }
        out
    }

    /// Whether `self ⊆ other`, checked on a generating set.
    pub fn is_subalgebra_of(&self, other: &Algebra) -> bool {
        self.n == other.n && self.generators().iter().all(|g| other.contains(g))
    }
}

fn hs(a: &Mat, b: &Mat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Gram-Schmidt against an orthonormal list; returns the normalized
/// remainder if `v` is independent.
fn orthogonalize(basis: &[Mat], v: &Mat) -> Option<Mat> {
    let scale = v.norm().max(1.0);
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = hs(b, &w);
            w -= b * coef;
        }
    }
    let norm = w.norm();
    (norm > SPAN_TOL * scale).then(|| w / c(norm, 0.0))
}

/// Orthonormal basis of the span of all words in `gens` and their
/// adjoints, grown by left multiplication until it stops growing.
fn word_span(gens: &[Mat], n: usize) -> Vec<Mat> {
    let mut letters: Vec<Mat> = Vec::new();
    for g in gens {
        letters.push(g.clone());
        letters.push(g.adjoint());
    }
    let mut basis = vec![Mat::identity(n, n) / c((n as f64).sqrt(), 0.0)];
    let mut next = 0;
    while next < basis.len() {
        let b = basis[next].clone();
        next += 1;
        for l in &letters {
            if let Some(w) = orthogonalize(&basis, &(l * &b)) {
                basis.push(w);
            }
        }
    }
    basis
}

fn random_real_combination(rng: &mut ChaCha8Rng, elems: &[Mat], n: usize) -> Mat {
    let mut h = Mat::zeros(n, n);
    for e in elems {
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        h += hermitian_part(e) * c(re, 0.0) + hermitian_part(&(e * c(0.0, 1.0))) * c(im, 0.0);
    }
    h
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &Mat) -> (Vec<f64>, Mat) {
    let eig = SymmetricEigen::new(hermitian_part(h));
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Indices of clusters of sorted eigenvalues separated by more than `gap`.
fn clusters(vals: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn columns(m: &Mat, r: std::ops::Range<usize>) -> Mat {
    m.columns(r.start, r.len()).into_owned()
}

/// Splits the compressed algebra `w^dagger A w` (a full matrix algebra
/// times a multiplicity) into matrix units.
fn split_factor(rng: &mut ChaCha8Rng, compressed: &[Mat], w: &Mat) -> Option<Block> {
    let r = w.ncols();
    let mut span: Vec<Mat> = Vec::new();
    for x in compressed {
        if let Some(y) = orthogonalize(&span, x) {
            span.push(y);
        }
    }
    let dim = span.len();
    let d = (dim as f64).sqrt().round() as usize;
    if d == 0 || d * d != dim || r % d != 0 {
        return None;
    }
    let k = r / d;
    let h = random_real_combination(rng, &span, r);
    let (vals, vecs) = eigh(&h);
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let groups: Vec<_> = (0..d).map(|g| g * k..(g + 1) * k).collect();
    for g in &groups {
        if vals[g.end - 1] - vals[g.start] > 1e-8 * scale {
            return None;
        }
    }
    for pair in groups.windows(2) {
        if vals[pair[1].start] - vals[pair[0].end - 1] < 1e-6 * scale {
            return None;
        }
    }
    let e1 = columns(&vecs, groups[0].clone());
    let mut a = Mat::zeros(r, r);
    for x in &span {
        a += x * c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let mut v = Mat::zeros(r, d * k);
    for (j, g) in groups.iter().enumerate() {
        let ej = columns(&vecs, g.clone());
        let cols = if j == 0 {
            e1.clone()
        } else {
            let m = ej.adjoint() * &a * &e1;
            let s = (m.norm_squared() / k as f64).sqrt();
            if s < 1e-6 {
                return None;
            }
            ej * (m / c(s, 0.0))
        };
        for l in 0..k {
            v.set_column(j * k + l, &cols.column(l));
        }
    }
    // The units must come out unitary; anything else means the random
    // element was degenerate.
    let defect = max_abs(&(v.adjoint() * &v - Mat::identity(d * k, d * k)));
    if defect > 1e-8 {
        return None;
    }
    Some(Block { d, k, v: w * v })
}

fn try_decompose(rng: &mut ChaCha8Rng, span: &[Mat], gens: &[Mat], n: usize) -> Option<Vec<Block>> {
    // Center: elements of the span commuting with every letter.
    let mut letters: Vec<Mat> = gens.to_vec();
    letters.extend(gens.iter().map(|g| g.adjoint()));
    let dim = span.len();
    let comms: Vec<Vec<Mat>> = span
        .iter()
        .map(|b| letters.iter().map(|l| b * l - l * b).collect())
        .collect();
    let mut gram = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v: Complex64 = comms[i].iter().zip(&comms[j]).map(|(a, b)| hs(a, b)).sum();
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
    }
    let (vals, vecs) = eigh(&gram);
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let center: Vec<Mat> = (0..dim)
        .filter(|&i| vals[i] <= 1e-14 * top)
        .map(|i| {
            let mut z = Mat::zeros(n, n);
            for (j, b) in span.iter().enumerate() {
                z += b * vecs[(j, i)];
            }
            z
        })
        .collect();
    let z = random_real_combination(rng, &center, n);
    let (zv, zvecs) = eigh(&z);
    let scale = zv.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut blocks = Vec::new();
    for range in clusters(&zv, 1e-6 * scale) {
        let w = columns(&zvecs, range);
        let compressed: Vec<Mat> = span.iter().map(|b| w.adjoint() * b * &w).collect();
        blocks.push(split_factor(rng, &compressed, &w)?);
    }
    let total: usize = blocks.iter().map(|b| b.d * b.d).sum();
    (total == dim).then_some(blocks)
}

/// The unital *-algebra generated by `gens`, in block form.
pub fn generate_algebra(gens: &[Operator]) -> Result<Algebra> {
    let first = gens
        .first()
        .ok_or_else(|| Error::InvalidOperator("no generators; use FullOnFactors for the scalars".into()))?;
    for g in gens {
        first.same_space(g)?;
    }
    let n = first.n();
    if n > MAX_GENERATED_DIM {
        return Err(Error::DimensionOverflow(format!(
            "algebra generation is limited to dimension {MAX_GENERATED_DIM}, got {n}"
        )));
    }
    let mats: Vec<Mat> = gens.iter().map(|g| g.matrix().clone()).collect();
    let span = word_span(&mats, n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a16e);
    for _ in 0..8 {
        if let Some(blocks) = try_decompose(&mut rng, &span, &mats, n) {
            return Ok(Algebra {
                n,
                dims: first.dims().to_vec(),
                blocks,
                factors: None,
                fallback: false,
                spec: AlgebraSpec::Generated {
                    generators: gens.to_vec(),
                },
            });
        }
    }
    Err(Error::InvalidOperator("could not split the generated algebra into blocks".into()))
}
