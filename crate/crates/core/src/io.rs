//! Parsers for the JSON inputs accepted by the command-line driver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifestation, ManifestationSpec};
use crate::model::Model;
use crate::scenarios::ScenarioParams;
use crate::structures::SwitchingStructure;

/// Largest input file accepted, in bytes.
pub const MAX_INPUT_BYTES: usize = 64 << 20;

/// Input of `geometry check`: a manifestation and the structure it claims
/// to realize.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryInput {
    pub structure: SwitchingStructure,
    pub manifestation: ManifestationSpec,
}

fn check_size(text: &str) -> Result<()> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(Error::Parse(format!("input exceeds {MAX_INPUT_BYTES} bytes")));
    }
    Ok(())
}

pub fn parse_model(text: &str) -> Result<Model> {
    check_size(text)?;
    crate::model::parse_model(text)
}

pub fn parse_structure(text: &str) -> Result<SwitchingStructure> {
    check_size(text)?;
    Ok(serde_json::from_str(text)?)
}

pub fn parse_geometry(text: &str) -> Result<(Manifestation, SwitchingStructure)> {
    check_size(text)?;
    let input: GeometryInput = serde_json::from_str(text)?;
    Ok((Manifestation::from_spec(input.manifestation)?, input.structure))
}

pub fn parse_params(text: &str) -> Result<ScenarioParams> {
    check_size(text)?;
    Ok(serde_json::from_str(text)?)
}

/// Comma-separated reals, as taken by `--p`.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("`{s}` is not a finite number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_lists() {
        assert_eq!(parse_real_list("0.3, 0.7").unwrap(), vec![0.3, 0.7]);
        assert!(parse_real_list("0.3,,1").is_err());
        assert!(parse_real_list("nan").is_err());
    }

    #[test]
    fn structure_json() {
        let s = SwitchingStructure::minimal();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(parse_structure(&text).unwrap(), s);
        assert!(parse_structure("{}").is_err());
    }
}
