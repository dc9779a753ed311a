//! Open and closed switch states.

use serde::Serialize;

use super::operator::ProjectionPair;
use super::state::{max_projection_gap, AlgebraState};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchClause {
    pub clause: &'static str,
    pub pass: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchStateReport {
    pub clauses: Vec<SwitchClause>,
    /// Largest projection gap between two states of equal status.
    pub max_same_status_gap: f64,
}

impl SwitchStateReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> Option<&SwitchClause> {
        self.clauses.iter().find(|c| c.clause == name)
    }
}

fn clause(name: &'static str, failures: Vec<String>) -> SwitchClause {
    SwitchClause {
        clause: name,
        pass: failures.is_empty(),
        failures,
    }
}

/// Checks the open/closed conditions on the states `states[k]` of one switch
/// at its determinations, with statuses `statuses[k]` (sign only). The
/// optional partner is `[sigma_{n'k'}, sigma_{n'k''}]` for `theta(n)`.
pub fn check_f(
    states: &[AlgebraState],
    statuses: &[i32],
    pair: &ProjectionPair,
    partner: Option<[&AlgebraState; 2]>,
) -> Result<SwitchStateReport> {
    if states.len() != statuses.len() || states.is_empty() {
        return Err(Error::InvalidState(format!(
            "{} states for {} statuses",
            states.len(),
            statuses.len()
        )));
    }
    if statuses.contains(&0) {
        return Err(Error::InvalidState("status zero".into()));
    }
    let ps: Vec<f64> = states.iter().map(|s| s.expect(pair.p())).collect();
    let qs: Vec<f64> = states.iter().map(|s| s.expect(pair.q())).collect();

    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    for k in 0..states.len() {
        if statuses[k] > 0 && ps[k] <= 0.5 {
            f1.push(format!("k={}: sigma(P) = {:.6}", k + 1, ps[k]));
        }
        if statuses[k] < 0 && qs[k] <= 0.5 {
            f2.push(format!("k={}: sigma(Q) = {:.6}", k + 1, qs[k]));
        }
    }

    let mut f3 = Vec::new();
    let mut f4 = Vec::new();
    let mut max_gap: f64 = 0.0;
    for k in 0..states.len() {
        for l in k + 1..states.len() {
            if statuses[k] * statuses[l] < 0 {
                if (ps[k] - ps[l]).abs() <= 0.5 || (qs[k] - qs[l]).abs() <= 0.5 {
                    f3.push(format!("k={}, k'={}", k + 1, l + 1));
                }
            } else {
                let gap = max_projection_gap(&states[k], &states[l])?;
                max_gap = max_gap.max(gap);
                if gap >= 0.5 {
                    f4.push(format!("k={}, k'={}: separated by {gap:.6}", k + 1, l + 1));
                }
            }
        }
    }

    let mut clauses = vec![clause("F1", f1), clause("F2", f2), clause("F3", f3), clause("F4", f4)];
    if let Some([a, b]) = partner {
        let mut f5 = Vec::new();
        let mine = [&states[0], states.get(1).unwrap_or(&states[0])];
        for (i, (x, y)) in mine.iter().zip([a, b]).enumerate() {
            let gap = max_projection_gap(x, y)?;
            if gap >= 0.5 {
                f5.push(format!("determination {} vs partner separated by {gap:.6}", i + 1));
            }
        }
        clauses.push(clause("F5", f5));
    }
    Ok(SwitchStateReport {
        clauses,
        max_same_status_gap: max_gap,
    })
}
