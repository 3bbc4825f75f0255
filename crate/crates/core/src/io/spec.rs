//! TOML model specification files.
//!
//! ```toml
//! states = [0, 1, 2]
//! k = 1
//! n = 4
//! homogeneous = true
//! forbid = [[1, 0]]
//! absorbing = [2]
//! initial = [0, 1]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{validate_model, Model, ModelSpec, Rules};

use super::data::read_text;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Label {
    Int(i64),
    Str(String),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Int(i) => i.to_string(),
            Label::Str(s) => s,
        }
    }
}

fn labels(v: Vec<Label>) -> Vec<String> {
    v.into_iter().map(Label::into_string).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    states: Vec<Label>,
    k: usize,
    n: usize,
    #[serde(default)]
    homogeneous: bool,
    #[serde(default)]
    forbid: Vec<Vec<Label>>,
    #[serde(default)]
    absorbing: Vec<Label>,
    initial: Option<Vec<Label>>,
    initial_blocks: Option<Vec<Vec<Label>>>,
}

/// Parses and expands the shorthand rules; semantic checks are left to
/// [`validate_model`].
pub fn parse_model_spec(text: &str) -> Result<ModelSpec> {
    let file: SpecFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    ModelSpec::from_rules(&Rules {
        states: labels(file.states),
        order: file.k,
        horizon: file.n,
        homogeneous: file.homogeneous,
        forbid: file.forbid.into_iter().map(labels).collect(),
        absorbing: labels(file.absorbing),
        initial_states: file.initial.map(labels),
        initial_blocks: file.initial_blocks.map(|b| b.into_iter().map(labels).collect()),
    })
}

pub fn load_model(path: &Path) -> Result<Model> {
    validate_model(&parse_model_spec(&read_text(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illness_death_file() {
        let spec = parse_model_spec(include_str!("../../fixtures/illness_death.toml")).unwrap();
        let m = validate_model(&spec).unwrap();
        assert_eq!(m.num_states(), 3);
        assert!(!m.is_allowed_window(&[1, 0]));
        assert_eq!(m.allowed_next(&[2]), &[2]);
        assert_eq!(m.initial_blocks().len(), 2);
        assert!(m.is_homogeneous());
    }

    #[test]
    fn defaults_give_unrestricted_chain() {
        let spec = parse_model_spec("states = ['a', 'b']\nk = 1\nn = 3\n").unwrap();
        let m = validate_model(&spec).unwrap();
        assert_eq!(m.allowed_next(&[0]), &[0, 1]);
        assert_eq!(m.initial_blocks().len(), 2);
        assert!(!m.is_homogeneous());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_model_spec("states = [0]\nk = 1\nn = 2\nhorizon = 3\n").unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
        let err = parse_model_spec("states = [0\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
