//! Everett-style branch models: single-step restrictions and multistep
//! conditional trees with their jump probabilities.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::consistency::consistency_check;
use super::report::{Check, ScenarioReport, Tolerances};
use crate::apriori::{jump_distribution, seq_app, JumpBranch, StateSequence};
use crate::error::{Error, Result};
use crate::quantum::operator::{c, kron_all, ket_bra, max_abs};
use crate::quantum::random::unitary;
use crate::quantum::{app, eigh, is_decoherent, partial_trace, Algebra, AlgebraState, Mat, Operator, Vector, DECOHERENCE_DELTA};

const ORTHONORMAL_TOL: f64 = 1e-12;
const APP_TOL: f64 = 1e-10;
const RESTRICTION_TOL: f64 = 1e-12;
const JUMP_TOTAL_TOL: f64 = 1e-12;

/// Largest number of outcomes; the dense joint state has `R^3` rows.
pub const MAX_OUTCOMES: usize = 8;

fn check_weights(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbability("no outcomes".into()));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidProbability(format!("{p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > ORTHONORMAL_TOL {
        return Err(Error::InvalidProbability(format!("weights sum to {s}")));
    }
    Ok(())
}

fn orthonormality_defect(cols: &Mat) -> f64 {
    let g = cols.adjoint() * cols;
    max_abs(&(g - Mat::identity(cols.ncols(), cols.ncols())))
}

/// `Psi = sum_r sqrt(p_r) psi_r (x) phi_r (x) chi_r` with orthonormal
/// observer, system and environment families stored as matrix columns.
#[derive(Clone, Debug)]
pub struct EverettModel {
    p: Vec<f64>,
    observer: Mat,
    system: Mat,
    environment: Mat,
}

impl EverettModel {
    pub fn new(p: Vec<f64>, observer: Mat, system: Mat, environment: Mat) -> Result<Self> {
        check_weights(&p)?;
        if p.len() > MAX_OUTCOMES {
            return Err(Error::DimensionOverflow(format!("{} outcomes, at most {MAX_OUTCOMES}", p.len())));
        }
        for (name, f) in [("observer", &observer), ("system", &system), ("environment", &environment)] {
            if f.ncols() != p.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    found: f.ncols(),
                });
            }
            let d = orthonormality_defect(f);
            if d > ORTHONORMAL_TOL {
                return Err(Error::InvalidState(format!("{name} family not orthonormal (defect {d:.2e})")));
            }
        }
        Ok(EverettModel {
            p,
            observer,
            system,
            environment,
        })
    }

    /// Standard basis families.
    pub fn standard(p: Vec<f64>) -> Result<Self> {
        let r = p.len();
        let id = Mat::identity(r, r);
        EverettModel::new(p, id.clone(), id.clone(), id)
    }

    /// Families taken from Haar-random unitaries.
    pub fn random(p: Vec<f64>, seed: u64) -> Result<Self> {
        let r = p.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = unitary(&mut rng, r);
        let s = unitary(&mut rng, r);
        let e = unitary(&mut rng, r);
        EverettModel::new(p, o, s, e)
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn outcomes(&self) -> usize {
        self.p.len()
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.observer.nrows(), self.system.nrows(), self.environment.nrows()]
    }

    pub fn psi(&self) -> Vector {
        let n: usize = self.dims().iter().product();
        let mut v = Vector::zeros(n);
        for r in 0..self.outcomes() {
            let t = kron_all(&[
                self.observer.columns(r, 1).into_owned(),
                self.system.columns(r, 1).into_owned(),
                self.environment.columns(r, 1).into_owned(),
            ]);
            v += t.column(0) * c(self.p[r].sqrt(), 0.0);
        }
        v
    }

    pub fn joint(&self) -> Mat {
        ket_bra(&self.psi())
    }

    fn branch(&self, r: usize, families: &[&Mat]) -> Mat {
        let cols: Vec<Mat> = families.iter().map(|f| f.columns(r, 1).into_owned()).collect();
        ket_bra(&kron_all(&cols).column(0).into_owned())
    }
}

fn factor_state(m: Mat) -> Result<AlgebraState> {
    AlgebraState::on_full(Operator::single(m)?)
}

/// Restriction identities and branch a priori probabilities for one
/// Everett model.
pub fn everett_restriction_suite(model: &EverettModel, tol: &Tolerances) -> Result<ScenarioReport> {
    let app_tol = tol.get("app", APP_TOL);
    let res_tol = tol.get("restriction", RESTRICTION_TOL);
    let on_tol = tol.get("orthonormal", ORTHONORMAL_TOL);
    let mut report = ScenarioReport::new("everett", json!({ "p": model.p, "dims": model.dims() }));
    let r_count = model.outcomes();

    for (name, f) in [
        ("observer", &model.observer),
        ("system", &model.system),
        ("environment", &model.environment),
    ] {
        report.push("orthonormal_families", Check::at_most(name, orthonormality_defect(f), 0.0, on_tol));
    }

    let dims = model.dims();
    let joint = model.joint();
    let weighted = |families: &[&Mat]| -> Mat {
        (0..r_count).fold(Mat::zeros(families.iter().map(|f| f.nrows()).product(), families.iter().map(|f| f.nrows()).product()), |acc, r| {
            acc + model.branch(r, families) * c(model.p[r], 0.0)
        })
    };

    // Each algebra is a set of factors of the joint space; the branch
    // states are the corresponding products of family projections.
    let algebras: [(&str, Vec<usize>, Vec<&Mat>); 3] = [
        ("observer", vec![0], vec![&model.observer]),
        ("system", vec![1], vec![&model.system]),
        ("observer_system", vec![0, 1], vec![&model.observer, &model.system]),
    ];
    let mut apps: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut spectrum = Vec::new();
    for (name, keep, families) in &algebras {
        let (reduced, _) = partial_trace(&joint, &dims, keep)?;
        let expected = weighted(families);
        report.push(
            "restriction",
            Check::at_most(*name, max_abs(&(&reduced - &expected)), 0.0, res_tol),
        );
        if *name == "observer" {
            let (mut vals, _) = eigh(&reduced);
            vals.reverse();
            let mut want = model.p.clone();
            want.sort_by(|a, b| b.total_cmp(a));
            for (i, (v, w)) in vals.iter().zip(&want).enumerate() {
                report.push("restriction_spectrum", Check::equal(format!("eigenvalue {i}"), *v, *w, app_tol));
            }
            spectrum = vals;
        }
        let rho = factor_state(reduced)?;
        let mut values = Vec::with_capacity(r_count);
        for r in 0..r_count {
            let sigma = factor_state(model.branch(r, families))?;
            let a = app(&sigma, &rho)?;
            report.push(&format!("branch_app_{name}"), Check::equal(format!("r={}", r + 1), a, model.p[r], app_tol));
            values.push(a);
            // The branch projection is itself a decohering projection.
            if model.p[r] > 0.0 {
                let q = Operator::single(model.branch(r, families))?;
                let dec = is_decoherent(&rho, &sigma, &q, DECOHERENCE_DELTA)?;
                report.push(
                    &format!("decohering_projection_{name}"),
                    Check::holds(format!("r={}", r + 1), dec.decoherent && (dec.p - model.p[r]).abs() <= app_tol),
                );
            }
        }
        report.push("branch_app_sum", Check::equal(*name, values.iter().sum(), 1.0, app_tol));
        apps.insert(name.to_string(), values);
    }

    // sigma_r(Q_s) = delta_rs on the observer factor.
    let mut worst: f64 = 0.0;
    for r in 0..r_count {
        let sr = model.branch(r, &[&model.observer]);
        for s in 0..r_count {
            let qs = model.branch(s, &[&model.observer]);
            let v = (&sr * &qs).trace().re;
            worst = worst.max((v - if r == s { 1.0 } else { 0.0 }).abs());
        }
    }
    report.push("disjointness", Check::at_most("max |sigma_r(Q_s) - delta_rs|", worst, 0.0, res_tol));
    report.data = json!({ "app": apps, "observer_spectrum": spectrum });
    Ok(report)
}

/// Conditional probabilities of a multistep model. `p[0]` is extinction
/// and `children[r - 1]` continues after outcome `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchNode {
    pub p: Vec<f64>,
    #[serde(default)]
    pub children: Vec<BranchNode>,
}

impl BranchNode {
    pub fn validate(&self) -> Result<()> {
        check_weights(&self.p)?;
        if !self.children.is_empty() && self.children.len() + 1 != self.p.len() {
            return Err(Error::InvalidProbability(format!(
                "{} children for {} outcomes",
                self.children.len(),
                self.p.len() - 1
            )));
        }
        self.children.iter().try_for_each(BranchNode::validate)
    }

    /// Uniform tree of the given depth with `outcomes` continuing branches
    /// at every node and fixed conditional weights.
    pub fn uniform(depth: usize, p: &[f64]) -> BranchNode {
        BranchNode {
            p: p.to_vec(),
            children: if depth > 1 {
                (1..p.len()).map(|_| BranchNode::uniform(depth - 1, p)).collect()
            } else {
                Vec::new()
            },
        }
    }

    /// Tree with independently drawn conditional weights.
    pub fn random(depth: usize, outcomes: usize, extinction: bool, seed: u64) -> BranchNode {
        fn build(depth: usize, outcomes: usize, extinction: bool, rng: &mut ChaCha8Rng) -> BranchNode {
            use rand::Rng;
            let mut w: Vec<f64> = (0..=outcomes).map(|_| rng.random_range(0.05..1.0)).collect();
            if !extinction {
                w[0] = 0.0;
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            // Put the rounding residue into the largest entry so the sum is 1.
            let resid = 1.0 - w.iter().sum::<f64>();
            let big = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0);
            w[big] += resid;
            let children = if depth > 1 {
                (0..outcomes).map(|_| build(depth - 1, outcomes, extinction, rng)).collect()
            } else {
                Vec::new()
            };
            BranchNode { p: w, children }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        build(depth, outcomes, extinction, &mut rng)
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(BranchNode::depth).max().unwrap_or(0)
    }
}

/// A history: the outcomes `r^1, ..., r^m`, a trailing `0` meaning
/// extinction.
pub type History = Vec<usize>;

#[derive(Clone, Debug)]
struct Leaf {
    history: History,
    weight: f64,
}

fn leaves(node: &BranchNode, prefix: &mut History, weight: f64, out: &mut Vec<Leaf>) {
    for (r, &p) in node.p.iter().enumerate() {
        prefix.push(r);
        if r == 0 || node.children.is_empty() {
            out.push(Leaf {
                history: prefix.clone(),
                weight: weight * p,
            });
        } else {
            leaves(&node.children[r - 1], prefix, weight * p, out);
        }
        prefix.pop();
    }
}

/// The multistep model realized as a decoherent state on one algebra: a
/// basis vector per leaf history, rotated by a fixed unitary.
#[derive(Clone, Debug)]
pub struct MultistepModel {
    tree: BranchNode,
    leaves: Vec<(History, f64)>,
    rotation: Mat,
    algebra: Arc<Algebra>,
}

/// Largest number of leaves handled densely.
pub const MAX_LEAVES: usize = 128;

impl MultistepModel {
    pub fn new(tree: BranchNode, seed: Option<u64>) -> Result<Self> {
        tree.validate()?;
        let mut out = Vec::new();
        leaves(&tree, &mut Vec::new(), 1.0, &mut out);
        let n = out.len();
        if n > MAX_LEAVES {
            return Err(Error::DimensionOverflow(format!("{n} leaf histories, at most {MAX_LEAVES}")));
        }
        let rotation = match seed {
            Some(s) => unitary(&mut ChaCha8Rng::seed_from_u64(s), n),
            None => Mat::identity(n, n),
        };
        Ok(MultistepModel {
            tree,
            leaves: out.into_iter().map(|l| (l.history, l.weight)).collect(),
            rotation,
            algebra: Arc::new(Algebra::full(&[n])?),
        })
    }

    pub fn tree(&self) -> &BranchNode {
        &self.tree
    }

    pub fn dim(&self) -> usize {
        self.leaves.len()
    }

    /// `p[r^1] p[r^1, r^2] ... ` along a history.
    pub fn path_weight(&self, h: &[usize]) -> f64 {
        let mut node = Some(&self.tree);
        let mut w = 1.0;
        for &r in h {
            let Some(n) = node else { return 0.0 };
            w *= n.p[r];
            node = if r == 0 { None } else { n.children.get(r - 1) };
        }
        w
    }

    /// Conditional weight of the last outcome of `h`.
    pub fn conditional(&self, h: &[usize]) -> f64 {
        let (last, prefix) = h.split_last().expect("non-empty history");
        let mut node = &self.tree;
        for &r in prefix {
            node = &node.children[r - 1];
        }
        node.p[*last]
    }

    fn rotate(&self, d: &[f64]) -> Mat {
        let diag = Mat::from_fn(d.len(), d.len(), |i, j| c(if i == j { d[i] } else { 0.0 }, 0.0));
        &self.rotation * diag * self.rotation.adjoint()
    }

    /// Projection onto leaf histories extending `h`.
    pub fn q(&self, h: &[usize]) -> Mat {
        let d: Vec<f64> = self
            .leaves
            .iter()
            .map(|(l, _)| if l.starts_with(h) { 1.0 } else { 0.0 })
            .collect();
        self.rotate(&d)
    }

    /// `sigma_{O[h]}`: the universal state conditioned on `h`. The empty
    /// history gives `omega`.
    pub fn state(&self, h: &[usize]) -> Result<AlgebraState> {
        let total: f64 = self.leaves.iter().filter(|(l, _)| l.starts_with(h)).map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::InvalidState(format!("history {h:?} has zero weight")));
        }
        let d: Vec<f64> = self
            .leaves
            .iter()
            .map(|(l, w)| if l.starts_with(h) { w / total } else { 0.0 })
            .collect();
        AlgebraState::new(Operator::single(self.rotate(&d))?, self.algebra.clone())
    }

    /// `(omega; sigma_{O[r^1]}, sigma_{O[r^1, r^2]}, ..., sigma_{O[h]})`.
    pub fn sequence(&self, h: &[usize]) -> Result<StateSequence> {
        let states = (1..=h.len()).map(|k| self.state(&h[..k])).collect::<Result<Vec<_>>>()?;
        StateSequence::new(self.state(&[])?, states)
    }

    /// Internal nodes as `(history, conditional weights)`.
    pub fn internal_nodes(&self) -> Vec<(History, Vec<f64>)> {
        fn walk(n: &BranchNode, prefix: &mut History, out: &mut Vec<(History, Vec<f64>)>) {
            out.push((prefix.clone(), n.p.clone()));
            for (i, ch) in n.children.iter().enumerate() {
                prefix.push(i + 1);
                walk(ch, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.tree, &mut Vec::new(), &mut out);
        out
    }

    pub fn leaf_histories(&self) -> impl Iterator<Item = (&History, f64)> {
        self.leaves.iter().map(|(h, w)| (h, *w))
    }

    /// Step families: at step `m`, `P^m_r` projects onto leaves whose
    /// `m`-th outcome is `r`; leaves that ended earlier count as `0`.
    pub fn step_families(&self) -> Vec<Vec<Mat>> {
        let depth = self.tree.depth();
        let width = 1 + self.leaves.iter().map(|(h, _)| h.iter().copied().max().unwrap_or(0)).max().unwrap_or(0);
        (0..depth)
            .map(|m| {
                (0..width)
                    .map(|r| {
                        let d: Vec<f64> = self
                            .leaves
                            .iter()
                            .map(|(h, _)| if h.get(m).copied().unwrap_or(0) == r { 1.0 } else { 0.0 })
                            .collect();
                        self.rotate(&d)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn history_id(h: &[usize]) -> String {
        let parts: Vec<String> = h.iter().map(|r| r.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

/// `exp(-KL)` between two-point distributions `(a, 1 - a)` and `(b, 1 - b)`.
fn two_point_app(a: f64, b: f64) -> f64 {
    let term = |x: f64, y: f64| if x > 0.0 { x * (x / y).ln() } else { 0.0 };
    (-(term(a, b) + term(1.0 - a, 1.0 - b))).exp()
}

/// Checks for the multistep model: conditional apps, the telescoping
/// product along every history, the full decomposition, jump and
/// extinction probabilities, approximate decoherence with leakage `delta`,
/// and consistency of the step families.
pub fn multistep_suite(model: &MultistepModel, delta: f64, tol: &Tolerances) -> Result<ScenarioReport> {
    let app_tol = tol.get("app", APP_TOL);
    let total_tol = tol.get("jump_total", JUMP_TOTAL_TOL);
    let band_tol = tol.get("band", 1e-12);
    let mut report = ScenarioReport::new(
        "multistep",
        json!({ "tree": model.tree, "leaves": model.dim(), "delta": delta }),
    );
    let omega = model.state(&[])?;

    // Single-step conditional apps and their approximate variants.
    let mut jump_tables = BTreeMap::new();
    for (h, p) in model.internal_nodes() {
        if model.path_weight(&h) <= 0.0 {
            continue;
        }
        let parent = model.state(&h)?;
        let parent_seq_app = if h.is_empty() { 1.0 } else { seq_app(&model.sequence(&h)?)? };
        let mut successor_apps = BTreeMap::new();
        for (r, &pr) in p.iter().enumerate() {
            let mut child = h.clone();
            child.push(r);
            let id = MultistepModel::history_id(&child);
            if pr <= 0.0 {
                if r > 0 {
                    successor_apps.insert(id, 0.0);
                }
                continue;
            }
            let sigma = model.state(&child)?;
            report.push("conditional_app", Check::equal(id.clone(), app(&sigma, &parent)?, pr, app_tol));
            if r > 0 {
                successor_apps.insert(id.clone(), seq_app(&model.sequence(&child)?)?);
            }

            // Leak delta of the child's weight into the complement.
            if r > 0 && pr < 1.0 / (1.0 + delta) {
                let q = model.q(&child);
                let other = (parent.rho().matrix() - sigma.rho().matrix() * c(pr, 0.0)) / c(1.0 - pr, 0.0);
                let leaked = sigma.rho().matrix() * c(1.0 - delta, 0.0) + &other * c(delta, 0.0);
                let leaked = AlgebraState::new(Operator::single(leaked)?, parent.algebra().clone())?;
                let a = app(&leaked, &parent)?;
                let lq = leaked.expect_matrix(&q);
                let sigma_d = (parent.rho().matrix() - leaked.rho().matrix() * c(pr, 0.0)) / c(1.0 - pr, 0.0);
                let dq = (sigma_d * &q).trace().re;
                report.push("approximate_projection", Check::at_least(format!("{id} sigma(Q)"), lq, 1.0 - delta, band_tol));
                report.push("approximate_projection", Check::at_most(format!("{id} sigma_d(Q)"), dq, pr * delta / (1.0 - pr), band_tol));
                report.push("approximate_app", Check::at_least(format!("{id} lower"), a, pr, band_tol));
                report.push(
                    "approximate_app",
                    Check::at_most(format!("{id} upper"), a, two_point_app(1.0 - delta, pr), band_tol),
                );
            }
        }
        // Jump distribution from the parent, with successors at the next
        // level.
        if p.len() > 1 && parent_seq_app > 0.0 {
            let id = MultistepModel::history_id(&h);
            let dist = jump_distribution(parent_seq_app, &successor_apps)?;
            for (r, &pr) in p.iter().enumerate().skip(1) {
                let mut child = h.clone();
                child.push(r);
                let cid = MultistepModel::history_id(&child);
                report.push("jump_probability", Check::equal(cid.clone(), dist.probabilities[&cid], pr, app_tol));
            }
            report.push("extinction", Check::equal(id.clone(), dist.extinction, p[0], app_tol));
            report.push("jump_total", Check::equal(id.clone(), dist.total(), 1.0, total_tol));
            if dist.branch == JumpBranch::Normalized {
                report.push("no_extinction_when_covered", Check::equal(id.clone(), dist.extinction, 0.0, 0.0));
            }
            jump_tables.insert(id, dist);
        }
    }

    // Telescoping along each leaf history, and the decomposition of omega.
    let leaf_list: Vec<(History, f64)> = model.leaf_histories().map(|(h, w)| (h.clone(), w)).collect();
    let mut worst_orth: f64 = 0.0;
    for (h, w) in &leaf_list {
        let id = MultistepModel::history_id(h);
        if *w <= 0.0 {
            continue;
        }
        let product: f64 = (1..=h.len()).map(|k| model.conditional(&h[..k])).product();
        report.push("telescoping", Check::equal(id.clone(), seq_app(&model.sequence(h)?)?, product, app_tol));
        let q = model.q(h);
        report.push("decomposition", Check::equal(id.clone(), omega.expect_matrix(&q), product, app_tol));
        let sigma = model.state(h)?;
        report.push("decomposition_app", Check::equal(id, app(&sigma, &omega)?, product, app_tol));
        for (g, _) in &leaf_list {
            let v = sigma.expect_matrix(&model.q(g));
            worst_orth = worst_orth.max((v - if g == h { 1.0 } else { 0.0 }).abs());
        }
    }
    report.push("leaf_orthogonality", Check::at_most("max deviation", worst_orth, 0.0, app_tol));

    let consistency = consistency_check(&model.step_families(), omega.rho().matrix(), app_tol)?;
    report.push("consistency", Check::holds("step families", consistency.consistent));
    report.push(
        "consistency",
        Check::at_most("max off-diagonal", consistency.max_off_diagonal, 0.0, app_tol),
    );
    report.data = json!({ "jump_tables": jump_tables });
    Ok(report)
}

/// Leaf probabilities of the uniform binary tree: the standard basis
/// vectors of the leaves carry `prod p`.
pub fn uniform_leaf_apps(depth: usize, p: &[f64]) -> Result<Vec<(History, f64)>> {
    let model = MultistepModel::new(BranchNode::uniform(depth, p), None)?;
    let omega = model.state(&[])?;
    let mut out = Vec::new();
    for (h, _) in model.leaf_histories() {
        if h.len() == depth && !h.contains(&0) {
            let sigma = model.state(h)?;
            out.push((h.clone(), app(&sigma, &omega)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_outcome_branches() {
        let m = EverettModel::standard(vec![0.3, 0.7]).unwrap();
        let r = everett_restriction_suite(&m, &Tolerances::default()).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        let a = r.group("branch_app_observer");
        assert!((a[0].computed - 0.3).abs() < 1e-10 && (a[1].computed - 0.7).abs() < 1e-10);
    }

    #[test]
    fn single_branch_has_app_one() {
        let m = EverettModel::standard(vec![1.0]).unwrap();
        let r = everett_restriction_suite(&m, &Tolerances::default()).unwrap();
        assert!(r.pass);
        assert!((r.group("branch_app_observer")[0].computed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_tree_leaves_are_quarters() {
        let apps = uniform_leaf_apps(2, &[0.0, 0.5, 0.5]).unwrap();
        assert_eq!(apps.len(), 4);
        for (_, a) in apps {
            assert!((a - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn random_tree_suite_passes() {
        let tree = BranchNode::random(3, 2, true, 11);
        let model = MultistepModel::new(tree, Some(5)).unwrap();
        let r = multistep_suite(&model, DECOHERENCE_DELTA, &Tolerances::default()).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        assert!(!r.group("approximate_app").is_empty());
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(EverettModel::standard(vec![0.3, 0.6]).is_err());
    }
}
