//! Structure models read from JSON: named nodes, each with manifestation
//! menus and a list of successors. A model is a [`JumpEvaluator`], so the
//! Markov process can run on it directly.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apriori::{inductive_app, jump_distribution, structure_app, JumpDistribution, ManifestationMenu, StateSequence, STAGE_TOL};
use crate::error::{Error, Result};
use crate::process::JumpEvaluator;
use crate::quantum::{Algebra, AlgebraSpec, AlgebraState, Operator};
use crate::structures::SwitchingStructure;

/// Upper bound on nodes in one model file.
pub const MAX_NODES: usize = 4096;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuSpec {
    #[serde(default)]
    pub label: String,
    /// Labeled structure the menu belongs to; defaults to the node's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<SwitchingStructure>,
    /// Candidate state sequences, each a list of density matrices.
    pub candidates: Vec<Vec<Operator>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<SwitchingStructure>,
    pub menus: Vec<MenuSpec>,
    #[serde(default)]
    pub successors: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// The universal state.
    pub omega: Operator,
    /// Algebra the states are compared on; the full algebra by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSpec>,
    pub initial: String,
    pub nodes: BTreeMap<String, NodeSpec>,
}

/// A priori value of one node and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeValue {
    pub app: f64,
    /// Menu attaining the value.
    pub argmax: usize,
    pub menu_values: Vec<f64>,
    /// Stage maxima of the winning menu.
    pub stage_values: Vec<f64>,
}

#[derive(Clone, Debug)]
struct Node {
    structure: Option<SwitchingStructure>,
    menus: Vec<ManifestationMenu>,
    labeled: Vec<Option<SwitchingStructure>>,
}

#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    values: BTreeMap<String, NodeValue>,
}

fn build_node(name: &str, spec: &NodeSpec, omega: &AlgebraState, alg: &Arc<Algebra>) -> Result<Node> {
    if spec.menus.is_empty() {
        return Err(Error::Config(format!("node {name} has no menus")));
    }
    let mut menus = Vec::with_capacity(spec.menus.len());
    let mut labeled = Vec::with_capacity(spec.menus.len());
    for (k, m) in spec.menus.iter().enumerate() {
        if m.candidates.is_empty() {
            return Err(Error::Config(format!("node {name} menu {k} has no candidates")));
        }
        let candidates = m
            .candidates
            .iter()
            .map(|seq| {
                let states = seq
                    .iter()
                    .map(|rho| AlgebraState::new(rho.clone(), alg.clone()))
                    .collect::<Result<Vec<_>>>()?;
                StateSequence::new(omega.clone(), states)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(format!("node {name} menu {k}: {e}")))?;
        menus.push(ManifestationMenu {
            label: if m.label.is_empty() { format!("{name}#{k}") } else { m.label.clone() },
            candidates,
        });
        labeled.push(m.structure.clone().or_else(|| spec.structure.clone()));
    }
    Ok(Node {
        structure: spec.structure.clone(),
        menus,
        labeled,
    })
}

fn evaluate(node: &Node) -> Result<NodeValue> {
    let (argmax, menu_values) = match &node.structure {
        Some(s) => {
            let pairs: Vec<(SwitchingStructure, ManifestationMenu)> = node
                .menus
                .iter()
                .zip(&node.labeled)
                .map(|(m, l)| (l.clone().unwrap_or_else(|| s.clone()), m.clone()))
                .collect();
            let r = structure_app(s, &pairs, STAGE_TOL)?;
            (r.argmax, r.menu_values)
        }
        None => {
            let values = node
                .menus
                .iter()
                .map(|m| inductive_app(m, STAGE_TOL).map(|r| r.value))
                .collect::<Result<Vec<_>>>()?;
            let argmax = values
                .iter()
                .enumerate()
                .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
            (argmax, values)
        }
    };
    let win = inductive_app(&node.menus[argmax], STAGE_TOL)?;
    Ok(NodeValue {
        app: menu_values[argmax],
        argmax,
        menu_values,
        stage_values: win.stage_values,
    })
}

impl Model {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        if spec.nodes.len() > MAX_NODES {
            return Err(Error::Config(format!("more than {MAX_NODES} nodes")));
        }
        if !spec.nodes.contains_key(&spec.initial) {
            return Err(Error::Config(format!("initial node {} is not defined", spec.initial)));
        }
        for (name, node) in &spec.nodes {
            if let Some(missing) = node.successors.iter().find(|s| !spec.nodes.contains_key(*s)) {
                return Err(Error::Config(format!("node {name} lists undefined successor {missing}")));
            }
            let mut seen = node.successors.clone();
            seen.sort();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config(format!("node {name} lists a successor twice")));
            }
        }
        let alg = spec
            .algebra
            .clone()
            .unwrap_or_else(|| AlgebraSpec::full(spec.omega.dims()))
            .resolve()?;
        let omega = AlgebraState::new(spec.omega.clone(), alg.clone())?;
        let nodes: Vec<(String, Node)> = spec
            .nodes
            .iter()
            .map(|(name, n)| Ok((name.clone(), build_node(name, n, &omega, &alg)?)))
            .collect::<Result<_>>()?;
        let values = nodes
            .par_iter()
            .map(|(name, n)| {
                evaluate(n)
                    .map(|v| (name.clone(), v))
                    .map_err(|e| Error::Config(format!("node {name}: {e}")))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Model { spec, values })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn initial(&self) -> &str {
        &self.spec.initial
    }

    pub fn values(&self) -> &BTreeMap<String, NodeValue> {
        &self.values
    }

    pub fn app(&self, node: &str) -> Option<f64> {
        self.values.get(node).map(|v| v.app)
    }
}

impl JumpEvaluator for Model {
    fn jumps(&self, state: &str) -> Result<Option<JumpDistribution>> {
        let node = self
            .spec
            .nodes
            .get(state)
            .ok_or_else(|| Error::Config(format!("unknown node {state}")))?;
        if node.successors.is_empty() {
            return Ok(None);
        }
        let apps: BTreeMap<String, f64> = node
            .successors
            .iter()
            .map(|s| (s.clone(), self.values[s].app))
            .collect();
        jump_distribution(self.values[state].app, &apps).map(Some)
    }
}

/// Parses and evaluates a model file.
pub fn parse_model(text: &str) -> Result<Model> {
    let spec: ModelSpec = serde_json::from_str(text)?;
    Model::from_spec(spec)
}

/// The two-outcome measurement as a model file: the observer's reduced
/// state is `diag(p, 1 - p)` and the two successors record the outcomes.
pub fn two_outcome_spec(p: f64) -> Result<ModelSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(format!("p = {p}")));
    }
    let diag = |a: f64, b: f64| {
        Operator::single(crate::quantum::Mat::from_diagonal(&crate::quantum::Vector::from_vec(vec![
            crate::quantum::operator::c(a, 0.0),
            crate::quantum::operator::c(b, 0.0),
        ])))
        .expect("2x2 operator")
    };
    let omega = diag(p, 1.0 - p);
    let node = |seq: Vec<Operator>, successors: Vec<String>| NodeSpec {
        structure: None,
        menus: vec![MenuSpec {
            label: String::new(),
            structure: None,
            candidates: vec![seq],
        }],
        successors,
    };
    let mut nodes = BTreeMap::new();
    nodes.insert("o".into(), node(vec![omega.clone()], vec!["a".into(), "b".into()]));
    nodes.insert("a".into(), node(vec![omega.clone(), diag(1.0, 0.0)], vec![]));
    nodes.insert("b".into(), node(vec![omega.clone(), diag(0.0, 1.0)], vec![]));
    Ok(ModelSpec {
        omega,
        algebra: None,
        initial: "o".into(),
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_outcome_apps() {
        let m = Model::from_spec(two_outcome_spec(0.3).unwrap()).unwrap();
        assert!((m.app("o").unwrap() - 1.0).abs() < 1e-12);
        assert!((m.app("a").unwrap() - 0.3).abs() < 1e-12);
        let d = m.jumps("o").unwrap().unwrap();
        assert!((d.probabilities["a"] - 0.3).abs() < 1e-12);
        assert_eq!(d.extinction, 0.0);
        assert!(m.jumps("a").unwrap().is_none());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let spec = two_outcome_spec(0.3).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert!(parse_model(&text).is_ok());
        let mut bad = spec.clone();
        bad.initial = "missing".into();
        assert!(matches!(Model::from_spec(bad), Err(Error::Config(_))));
        let mut bad = spec;
        bad.nodes.get_mut("o").unwrap().successors.push("ghost".into());
        assert!(matches!(Model::from_spec(bad), Err(Error::Config(_))));
    }
}
