//! The discrete Markov process over structures: trajectory sampling,
//! ensemble statistics, and the three-state caricature.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apriori::JumpDistribution;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Source of jump distributions. `Ok(None)` marks a state where the model
/// stops with the observer alive.
pub trait JumpEvaluator: Sync {
    fn jumps(&self, state: &str) -> Result<Option<JumpDistribution>>;
}

/// An explicit table of jump distributions keyed by structure id. States
/// missing from the table, or mapped to `null`, are terminal.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JumpTable(pub BTreeMap<String, Option<JumpDistribution>>);

impl JumpEvaluator for JumpTable {
    fn jumps(&self, state: &str) -> Result<Option<JumpDistribution>> {
        Ok(self.0.get(state).cloned().flatten())
    }
}

/// Per-trajectory generator. Trajectory `index` reads its own stream of the
/// master seed, and step `k` consumes the `k`-th draw of that stream, so a
/// draw depends only on `(seed, index, k)`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Alive,
    Extinct,
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub from: String,
    /// `None` for extinction.
    pub to: Option<String>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub index: u64,
    pub steps: Vec<Step>,
    pub terminal: Terminal,
    pub weight: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&str> {
        match self.steps.last() {
            None => None,
            Some(s) => s.to.as_deref(),
        }
    }

    /// `|weight - prod(step probabilities)|`, recomputed from the steps.
    pub fn replay_residual(&self) -> f64 {
        (self.weight - self.steps.iter().map(|s| s.probability).product::<f64>()).abs()
    }
}

/// Evaluator wrapper that remembers every distribution it has produced.
pub struct Cached<'a, E: JumpEvaluator + ?Sized> {
    inner: &'a E,
    cache: RwLock<HashMap<String, Option<JumpDistribution>>>,
}

impl<'a, E: JumpEvaluator + ?Sized> Cached<'a, E> {
    pub fn new(inner: &'a E) -> Self {
        Cached {
            inner,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, state: &str) -> Result<Option<JumpDistribution>> {
        if let Some(d) = self.cache.read().expect("cache lock").get(state) {
            return Ok(d.clone());
        }
        let d = self.inner.jumps(state).map_err(|e| match e {
            e @ Error::Evaluator { .. } => e,
            other => Error::Evaluator {
                state: state.to_string(),
                message: other.to_string(),
            },
        })?;
        if let Some(dist) = &d {
            let total = dist.total();
            if (total - 1.0).abs() > 1e-9 || dist.probabilities.values().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Evaluator {
                    state: state.to_string(),
                    message: format!("jump distribution sums to {total}"),
                });
            }
        }
        self.cache.write().expect("cache lock").insert(state.to_string(), d.clone());
        Ok(d)
    }

    pub fn into_table(self) -> JumpTable {
        JumpTable(self.cache.into_inner().expect("cache lock").into_iter().collect())
    }
}

/// Picks a successor for uniform `u` in `[0, 1)`; `None` is extinction.
pub fn sample_jump(dist: &JumpDistribution, u: f64) -> Option<(&str, f64)> {
    let mut acc = 0.0;
    let mut last = None;
    for (k, &p) in &dist.probabilities {
        acc += p;
        if p > 0.0 {
            last = Some((k.as_str(), p));
        }
        if u < acc && p > 0.0 {
            return Some((k.as_str(), p));
        }
    }
    // Rounding left `u` above the cumulative sum: with no extinction mass
    // the last possible successor takes it.
    if dist.extinction > 0.0 {
        None
    } else {
        last
    }
}

fn run_one<E: JumpEvaluator + ?Sized>(
    initial: &str,
    eval: &Cached<'_, E>,
    max_steps: usize,
    seed: u64,
    index: u64,
) -> Result<Trajectory> {
    let mut rng = trajectory_rng(seed, index);
    let mut state = initial.to_string();
    let mut steps = Vec::new();
    let mut weight = 1.0;
    let terminal = loop {
        if steps.len() >= max_steps {
            break Terminal::StepLimit;
        }
        let Some(dist) = eval.get(&state)? else {
            break Terminal::Alive;
        };
        let u: f64 = rng.random();
        match sample_jump(&dist, u) {
            Some((next, p)) => {
                weight *= p;
                steps.push(Step {
                    from: state.clone(),
                    to: Some(next.to_string()),
                    probability: p,
                });
                state = next.to_string();
            }
            None => {
                weight *= dist.extinction;
                steps.push(Step {
                    from: state.clone(),
                    to: None,
                    probability: dist.extinction,
                });
                break Terminal::Extinct;
            }
        }
    };
    Ok(Trajectory {
        seed,
        index,
        steps,
        terminal,
        weight,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub seed: u64,
    pub trajectories: u64,
    pub max_steps: usize,
    pub alive: u64,
    pub extinct: u64,
    pub step_limit: u64,
    pub extinction_rate: f64,
    /// Trajectories that visit each state at least once.
    pub hitting_counts: BTreeMap<String, u64>,
    pub hitting_frequencies: BTreeMap<String, f64>,
    /// Where surviving trajectories stop.
    pub final_counts: BTreeMap<String, u64>,
    pub mean_path_length: f64,
    pub mean_weight: f64,
    pub max_replay_residual: f64,
    /// Distribution used at every visited state, including `xi`.
    pub jump_tables: JumpTable,
}

/// Samples `count` independent trajectories from `initial`. Returns the
/// ensemble statistics and, if `keep` is set, the trajectories themselves.
pub fn run_trajectories<E: JumpEvaluator + ?Sized>(
    initial: &str,
    evaluator: &E,
    count: u64,
    max_steps: usize,
    seed: u64,
    keep: bool,
) -> Result<(EnsembleReport, Vec<Trajectory>)> {
    let eval = Cached::new(evaluator);
    // The initial table is reported even when nothing is sampled.
    eval.get(initial)?;
    let trajs: Vec<Trajectory> = (0..count)
        .into_par_iter()
        .map(|i| run_one(initial, &eval, max_steps, seed, i))
        .collect::<Result<_>>()?;

    let mut hitting: BTreeMap<String, u64> = BTreeMap::new();
    let mut finals: BTreeMap<String, u64> = BTreeMap::new();
    let (mut alive, mut extinct, mut limit) = (0, 0, 0);
    let mut length = 0u64;
    let mut weight = 0.0;
    let mut residual: f64 = 0.0;
    for t in &trajs {
        let mut seen: Vec<&str> = vec![initial];
        seen.extend(t.steps.iter().filter_map(|s| s.to.as_deref()));
        seen.sort_unstable();
        seen.dedup();
        for s in seen {
            *hitting.entry(s.to_string()).or_default() += 1;
        }
        match t.terminal {
            Terminal::Alive => alive += 1,
            Terminal::Extinct => extinct += 1,
            Terminal::StepLimit => limit += 1,
        }
        if t.terminal != Terminal::Extinct {
            let f = t.final_state().unwrap_or(initial);
            *finals.entry(f.to_string()).or_default() += 1;
        }
        length += t.steps.len() as u64;
        weight += t.weight;
        residual = residual.max(t.replay_residual());
    }
    let n = count.max(1) as f64;
    let report = EnsembleReport {
        seed,
        trajectories: count,
        max_steps,
        alive,
        extinct,
        step_limit: limit,
        extinction_rate: extinct as f64 / n,
        hitting_frequencies: hitting.iter().map(|(k, &v)| (k.clone(), v as f64 / n)).collect(),
        hitting_counts: hitting,
        final_counts: finals,
        mean_path_length: length as f64 / n,
        mean_weight: weight / n,
        max_replay_residual: residual,
        jump_tables: eval.into_table(),
    };
    Ok((report, if keep { trajs } else { Vec::new() }))
}

/// Which form of the three-state chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaricatureSpec {
    pub p: f64,
    pub q: f64,
    pub x: f64,
    pub variant: Variant,
    /// Weights of the `a_i` and `b_j` sink states; used by variant C only.
    #[serde(default)]
    pub weights_a: Vec<f64>,
    #[serde(default)]
    pub weights_b: Vec<f64>,
}

impl CaricatureSpec {
    pub fn new(variant: Variant, p: f64, q: f64, x: f64) -> Self {
        CaricatureSpec {
            p,
            q,
            x,
            variant,
            weights_a: Vec::new(),
            weights_b: Vec::new(),
        }
    }

    /// Weights of the outcome sink states for the variant.
    pub fn sink_weights(&self) -> (Vec<f64>, Vec<f64>) {
        match self.variant {
            Variant::A => (vec![1.0], vec![1.0]),
            Variant::B => (vec![1.0, 1.0], vec![1.0]),
            Variant::C => (self.weights_a.clone(), self.weights_b.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q), ("x", self.x)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProbability(format!("{name} = {v}")));
            }
        }
        let (wa, wb) = self.sink_weights();
        if wa.iter().chain(&wb).any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidProbability("weights must be finite and nonnegative".into()));
        }
        if self.variant == Variant::C && (wa.is_empty() || wb.is_empty()) {
            return Err(Error::InvalidProbability("variant C needs weights for both outcomes".into()));
        }
        if self.p + self.q <= 0.0 {
            return Err(Error::DegenerateCaricature);
        }
        let (ma, mb) = self.outcome_masses();
        if ma + mb <= 0.0 {
            return Err(Error::DegenerateCaricature);
        }
        Ok(())
    }

    /// `(W_a p, W_b q)`.
    pub fn outcome_masses(&self) -> (f64, f64) {
        let (wa, wb) = self.sink_weights();
        (wa.iter().sum::<f64>() * self.p, wb.iter().sum::<f64>() * self.q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaricatureClosedForm {
    pub f_a: f64,
    pub f_b: f64,
    /// Per-step probability of stopping at an `a` state.
    pub stop_a: f64,
    /// Per-step probability of staying at `o`.
    pub stay: f64,
}

impl CaricatureClosedForm {
    /// `F_n(a)`: termination at an `a` state exactly at step `n >= 1`.
    pub fn f_n_a(&self, n: u32) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.stop_a * self.stay.powi(n as i32 - 1)
    }
}

pub fn caricature_closed_form(spec: &CaricatureSpec) -> Result<CaricatureClosedForm> {
    spec.validate()?;
    let (ma, mb) = spec.outcome_masses();
    let w = ma + mb + spec.x;
    Ok(CaricatureClosedForm {
        f_a: ma / (ma + mb),
        f_b: mb / (ma + mb),
        stop_a: ma / w,
        stay: spec.x / w,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaricatureEstimate {
    pub trials: u64,
    pub seed: u64,
    pub f_a: f64,
    pub f_b: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
    pub mean_steps: f64,
    pub max_steps_taken: u64,
}

/// Monte Carlo over the chain, one step at a time from `o`.
pub fn caricature_simulate(spec: &CaricatureSpec, trials: u64, seed: u64) -> Result<CaricatureEstimate> {
    spec.validate()?;
    let (ma, mb) = spec.outcome_masses();
    let w = ma + mb + spec.x;
    let (to_a, to_b) = (ma / w, (ma + mb) / w);
    let (a, steps, max) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i);
            let mut n = 0u64;
            loop {
                n += 1;
                let u: f64 = rng.random();
                if u < to_a {
                    return (1u64, n, n);
                }
                if u < to_b {
                    return (0, n, n);
                }
            }
        })
        .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2.max(y.2)));
    let t = trials.max(1) as f64;
    let fa = a as f64 / t;
    let se = (fa * (1.0 - fa) / t).sqrt();
    Ok(CaricatureEstimate {
        trials,
        seed,
        f_a: fa,
        f_b: 1.0 - fa,
        stderr_a: se,
        stderr_b: se,
        mean_steps: steps as f64 / t,
        max_steps_taken: max,
    })
}
