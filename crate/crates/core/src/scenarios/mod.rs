//! Worked models, each run as a self-validating report.

pub mod caricature;
pub mod consistency;
pub mod cosmology;
pub mod everett;
pub mod frequency;
pub mod glance;
pub mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use consistency::{consistency_check, ConsistencyReport};
pub use cosmology::{cosmology_demo, NextOutcome};
pub use everett::{everett_restriction_suite, multistep_suite, BranchNode, EverettModel, MultistepModel};
pub use frequency::{frequency_suite, FrequencyModel};
pub use glance::{glance_suite, GlanceModel, GlanceSpec, PathClass};
pub use report::{Check, CheckKind, ScenarioReport, Tolerances, SCHEMA_VERSION, TOLERANCE_NAMES};

use crate::error::{Error, Result};
use crate::process::{CaricatureSpec, Variant};
use crate::quantum::DECOHERENCE_DELTA;

pub const SCENARIOS: &[&str] = &["caricature", "consistency", "cosmology", "everett", "frequency", "glance", "multistep"];

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CARICATURE_TRIALS: u64 = 1_000_000;

/// Optional knobs shared by the scenarios. Each scenario reads the fields
/// it understands and falls back to its defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Branch weights (everett), the outcome weight (caricature, glance,
    /// cosmology) or a grid (frequency).
    pub p: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub x: Option<f64>,
    pub variant: Option<Variant>,
    pub weights_a: Option<Vec<f64>>,
    pub weights_b: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    /// History length (cosmology).
    pub t: Option<usize>,
    pub n_max: Option<usize>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub tree: Option<BranchNode>,
    pub glance: Option<GlanceSpec>,
    pub steps: Option<usize>,
    pub multiplicity_a: Option<u64>,
    pub multiplicity_b: Option<u64>,
}

impl ScenarioParams {
    fn first_p(&self, default: f64) -> f64 {
        self.p.as_ref().and_then(|v| v.first().copied()).unwrap_or(default)
    }

    fn multistep_model(&self) -> Result<MultistepModel> {
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let tree = match &self.tree {
            Some(t) => t.clone(),
            None => BranchNode::random(3, 2, true, seed),
        };
        MultistepModel::new(tree, Some(seed.wrapping_add(1)))
    }
}

pub fn run_scenario(name: &str, params: &ScenarioParams, tol: &Tolerances) -> Result<ScenarioReport> {
    match name {
        "everett" => {
            let p = params.p.clone().unwrap_or_else(|| vec![0.3, 0.7]);
            let model = match params.seed {
                Some(s) => EverettModel::random(p, s)?,
                None => EverettModel::standard(p)?,
            };
            everett_restriction_suite(&model, tol)
        }
        "multistep" => multistep_suite(&params.multistep_model()?, params.delta.unwrap_or(DECOHERENCE_DELTA), tol),
        "consistency" => consistency::consistency_suite(&params.multistep_model()?, tol),
        "frequency" => {
            let ps = params.p.clone().unwrap_or_else(frequency::p_grid);
            frequency_suite(
                &ps,
                params.n_max.unwrap_or(14),
                params.delta.unwrap_or(0.5),
                params.eta.unwrap_or(0.75),
                tol,
            )
        }
        "glance" => {
            let spec = match &params.glance {
                Some(g) => g.clone(),
                None => GlanceSpec::symmetric(
                    params.first_p(0.3),
                    params.steps.unwrap_or(3),
                    params.multiplicity_a.unwrap_or(1),
                    params.multiplicity_b.unwrap_or(1),
                ),
            };
            glance_suite(&spec.build()?, tol)
        }
        "cosmology" => cosmology::cosmology_suite(params.first_p(0.2), params.t.unwrap_or(5), tol),
        "caricature" => {
            let mut spec = CaricatureSpec::new(
                params.variant.unwrap_or(Variant::A),
                params.first_p(0.2),
                params.q.unwrap_or(0.8),
                params.x.unwrap_or(1.0),
            );
            spec.weights_a = params.weights_a.clone().unwrap_or_default();
            spec.weights_b = params.weights_b.clone().unwrap_or_default();
            caricature::caricature_suite(
                &spec,
                params.trials.unwrap_or(DEFAULT_CARICATURE_TRIALS),
                params.seed.unwrap_or(DEFAULT_SEED),
                tol,
            )
        }
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Every registered scenario with default parameters, in registry order.
pub fn run_all(tol: &Tolerances) -> Vec<(String, Result<ScenarioReport>)> {
    SCENARIOS
        .par_iter()
        .map(|name| (name.to_string(), run_scenario(name, &ScenarioParams::default(), tol)))
        .collect()
}
