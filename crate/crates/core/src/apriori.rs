//! A priori probabilities of state sequences, manifestations and
//! structures, and the jump rule of the Markov process.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{app, AlgebraState, Algebra};
use crate::structures::{canonicalize, SwitchingStructure};

/// Relative tolerance for a prefix value to count as attaining a stage
/// maximum.
pub const STAGE_TOL: f64 = 1e-9;

/// `(sigma_1, ..., sigma_M)` with initial state `omega`, all on one algebra.
#[derive(Clone, Debug)]
pub struct StateSequence {
    omega: AlgebraState,
    states: Vec<AlgebraState>,
}

fn check_algebra(a: &Arc<Algebra>, b: &Arc<Algebra>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch)
    }
}

impl StateSequence {
    pub fn new(omega: AlgebraState, states: Vec<AlgebraState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidState("state sequence is empty".into()));
        }
        for s in &states {
            check_algebra(omega.algebra(), s.algebra())?;
        }
        Ok(StateSequence { omega, states })
    }

    pub fn omega(&self) -> &AlgebraState {
        &self.omega
    }

    pub fn states(&self) -> &[AlgebraState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Factors `app(sigma_m | sigma_{m-1})` with `sigma_0 = omega`.
    pub fn factors(&self) -> Result<Vec<f64>> {
        let mut prev = &self.omega;
        let mut out = Vec::with_capacity(self.states.len());
        for s in &self.states {
            out.push(app(s, prev)?);
            prev = s;
        }
        Ok(out)
    }

    /// Running products of the factors.
    pub fn prefix_apps(&self) -> Result<Vec<f64>> {
        let mut acc = 1.0;
        Ok(self
            .factors()?
            .into_iter()
            .map(|f| {
                acc *= f;
                acc
            })
            .collect())
    }
}

/// A priori probability of a sequence: the product of its factors.
pub fn seq_app(seq: &StateSequence) -> Result<f64> {
    Ok(seq.prefix_apps()?.last().copied().unwrap_or(1.0))
}

/// Finite set of candidate state sequences for one manifestation.
#[derive(Clone, Debug)]
pub struct ManifestationMenu {
    pub label: String,
    pub candidates: Vec<StateSequence>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InductiveResult {
    pub value: f64,
    /// Index of a candidate attaining the value.
    pub witness: usize,
    /// Stage maxima `app(N(W), B(W), k, omega)` for `k = 1..M`.
    pub stage_values: Vec<f64>,
    /// Candidates surviving each stage.
    pub survivors: Vec<Vec<usize>>,
}

fn attains(v: f64, max: f64, tol: f64) -> bool {
    v >= max - tol * max.abs()
}

/// Stage-by-stage constrained maximization over the menu: at stage `k` only
/// candidates whose prefix values attained every earlier stage maximum
/// compete.
pub fn inductive_app(menu: &ManifestationMenu, tol: f64) -> Result<InductiveResult> {
    if menu.candidates.is_empty() {
        return Err(Error::EmptyMenu);
    }
    let m = menu.candidates[0].len();
    if menu.candidates.iter().any(|c| c.len() != m) {
        return Err(Error::InvalidState("menu candidates have different lengths".into()));
    }
    let prefixes: Vec<Vec<f64>> = menu
        .candidates
        .par_iter()
        .map(StateSequence::prefix_apps)
        .collect::<Result<_>>()?;
    let mut alive: Vec<usize> = (0..prefixes.len()).collect();
    let mut stage_values = Vec::with_capacity(m);
    let mut survivors = Vec::with_capacity(m);
    for k in 0..m {
        let max = alive.iter().map(|&c| prefixes[c][k]).fold(0.0, f64::max);
        alive.retain(|&c| attains(prefixes[c][k], max, tol));
        stage_values.push(max);
        survivors.push(alive.clone());
    }
    Ok(InductiveResult {
        value: *stage_values.last().expect("nonempty sequences"),
        witness: alive[0],
        stage_values,
        survivors,
    })
}

/// Maximum of `seq_app` over a menu, for comparison with the inductive
/// value.
pub fn menu_max(menu: &ManifestationMenu) -> Result<f64> {
    menu.candidates
        .iter()
        .map(seq_app)
        .try_fold(0.0, |a, v| Ok(f64::max(a, v?)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureApp {
    pub value: f64,
    /// Index of the labeled menu attaining the value.
    pub argmax: usize,
    pub menu_values: Vec<f64>,
}

/// Supremum of the inductive value over menus, each attached to an ordered
/// structure that must be a relabeling of `s`.
pub fn structure_app(
    s: &SwitchingStructure,
    menus: &[(SwitchingStructure, ManifestationMenu)],
    tol: f64,
) -> Result<StructureApp> {
    if menus.is_empty() {
        return Err(Error::NoMenus);
    }
    let target = canonicalize(s);
    for (labeled, _) in menus {
        if canonicalize(labeled) != target {
            return Err(Error::InvalidStructure(format!("menu structure {labeled} is not a relabeling of {s}")));
        }
    }
    let menu_values: Vec<f64> = menus
        .par_iter()
        .map(|(_, menu)| inductive_app(menu, tol).map(|r| r.value))
        .collect::<Result<_>>()?;
    // First index attaining the maximum, so the argmax is order-stable.
    let (argmax, value) = menu_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(StructureApp {
        value,
        argmax,
        menu_values,
    })
}

/// Which branch of the jump rule applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpBranch {
    /// `xi >= app(parent)`: normalize by `xi`, no extinction.
    Normalized,
    /// `xi < app(parent)`: normalize by the parent, remainder is extinction.
    Deficit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpDistribution {
    pub probabilities: BTreeMap<String, f64>,
    pub extinction: f64,
    pub xi: f64,
    pub parent_app: f64,
    pub branch: JumpBranch,
}

impl JumpDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.values().sum::<f64>() + self.extinction
    }
}

fn check_probability(what: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidProbability(format!("{what} = {v}")));
    }
    Ok(())
}

/// The jump rule: successor apps over `xi` when they cover the parent,
/// otherwise over the parent app with the deficit as extinction.
pub fn jump_distribution(parent_app: f64, successor_apps: &BTreeMap<String, f64>) -> Result<JumpDistribution> {
    check_probability("parent app", parent_app)?;
    if parent_app == 0.0 {
        return Err(Error::ZeroParentApp);
    }
    for (k, &v) in successor_apps {
        check_probability(&format!("app of {k}"), v)?;
    }
    let xi: f64 = successor_apps.values().sum();
    let (branch, denom) = if xi >= parent_app {
        (JumpBranch::Normalized, xi)
    } else {
        (JumpBranch::Deficit, parent_app)
    };
    let probabilities: BTreeMap<String, f64> = successor_apps.iter().map(|(k, &v)| (k.clone(), v / denom)).collect();
    let extinction = match branch {
        JumpBranch::Normalized => 0.0,
        // The remainder absorbs rounding so the total is 1.
        JumpBranch::Deficit => (1.0 - probabilities.values().sum::<f64>()).max(0.0),
    };
    Ok(JumpDistribution {
        probabilities,
        extinction,
        xi,
        parent_app,
        branch,
    })
}

/// A candidate theory: label, dynamics parameters and initial state.
#[derive(Clone, Debug)]
pub struct TheoryPoint {
    pub label: String,
    pub parameters: Vec<f64>,
    pub omega: AlgebraState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantApp {
    pub value: f64,
    pub argmax: usize,
    pub label: String,
    pub values: Vec<f64>,
}

/// Supremum over a class of theories of the structure value computed with
/// that theory's menus.
pub fn structure_app_variant<F>(
    s: &SwitchingStructure,
    points: &[TheoryPoint],
    menus_for: F,
    tol: f64,
) -> Result<VariantApp>
where
    F: Fn(&TheoryPoint) -> Result<Vec<(SwitchingStructure, ManifestationMenu)>>,
{
    if points.is_empty() {
        return Err(Error::EmptyTheoryClass);
    }
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        values.push(structure_app(s, &menus_for(p)?, tol)?.value);
    }
    let (argmax, value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(VariantApp {
        value,
        argmax,
        label: points[argmax].label.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::operator::{c, Mat};
    use crate::quantum::Operator;

    fn diag_state(alg: &Arc<Algebra>, w: &[f64]) -> AlgebraState {
        let n = w.len();
        let m = Mat::from_fn(n, n, |i, j| c(if i == j { w[i] } else { 0.0 }, 0.0));
        AlgebraState::new(Operator::single(m).unwrap(), alg.clone()).unwrap()
    }

    fn alg(n: usize) -> Arc<Algebra> {
        Arc::new(Algebra::full(&[n]).unwrap())
    }

    #[test]
    fn constant_sequence_has_app_one() {
        let a = alg(2);
        let w = diag_state(&a, &[0.4, 0.6]);
        let seq = StateSequence::new(w.clone(), vec![w.clone(), w.clone(), w]).unwrap();
        assert_eq!(seq_app(&seq).unwrap(), 1.0);
    }

    #[test]
    fn inductive_follows_prefix_maximum() {
        let a = alg(4);
        let omega = diag_state(&a, &[0.3, 0.3, 0.3, 0.1]);
        let third = 1.0 / 3.0;
        // Candidate 0 wins stage 1 (0.9) and drops to 0.3; candidate 1
        // keeps 0.6 throughout.
        let c0 = vec![diag_state(&a, &[third, third, third, 0.0]), diag_state(&a, &[1.0, 0.0, 0.0, 0.0])];
        let half = diag_state(&a, &[0.5, 0.5, 0.0, 0.0]);
        let menu = ManifestationMenu {
            label: "W".into(),
            candidates: vec![
                StateSequence::new(omega.clone(), c0).unwrap(),
                StateSequence::new(omega, vec![half.clone(), half]).unwrap(),
            ],
        };
        let r = inductive_app(&menu, STAGE_TOL).unwrap();
        assert_eq!(r.survivors[0], vec![0]);
        assert_eq!(r.witness, 0);
        assert!((r.stage_values[0] - 0.9).abs() < 1e-12);
        assert!((r.value - 0.3).abs() < 1e-12);
        assert!((menu_max(&menu).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn jump_rule_branches() {
        let mut apps = BTreeMap::new();
        apps.insert("a".to_string(), 0.5);
        let j = jump_distribution(0.5, &apps).unwrap();
        assert_eq!(j.probabilities["a"], 1.0);
        assert_eq!(j.extinction, 0.0);
        apps.insert("a".to_string(), 0.1);
        apps.insert("b".to_string(), 0.2);
        let j = jump_distribution(0.5, &apps).unwrap();
        assert_eq!(j.branch, JumpBranch::Deficit);
        assert!((j.extinction - (1.0 - 0.3 / 0.5)).abs() < 1e-15);
        assert!((j.total() - 1.0).abs() < 1e-15);
        assert!(matches!(jump_distribution(0.0, &apps), Err(Error::ZeroParentApp)));
        apps.insert("c".into(), -0.1);
        assert!(matches!(jump_distribution(0.5, &apps), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn empty_inputs_are_errors() {
        let menu = ManifestationMenu {
            label: "W".into(),
            candidates: vec![],
        };
        assert!(matches!(inductive_app(&menu, STAGE_TOL), Err(Error::EmptyMenu)));
        let s = SwitchingStructure::minimal();
        assert!(matches!(structure_app(&s, &[], STAGE_TOL), Err(Error::NoMenus)));
        let r = structure_app_variant(&s, &[], |_| Ok(vec![]), STAGE_TOL);
        assert!(matches!(r, Err(Error::EmptyTheoryClass)));
    }
}
