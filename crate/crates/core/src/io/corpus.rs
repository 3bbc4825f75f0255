//! Turning plain text into padded letter trajectories.
//!
//! Each word becomes a path through its letters followed by an absorbing pad
//! state, so every trajectory has the same length `L + 1` where `L` is the
//! longest admitted word.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::estimate::TrajectorySet;
use crate::model::{validate_model, Model, ModelSpec, Rules};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonPolicy {
    /// Words longer than `L` are overlong.
    Fixed(usize),
    /// `L` is the longest admitted word; words above the threshold, if
    /// any, are overlong.
    MaxLength { exclude_above: Option<usize> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OverlongPolicy {
    #[default]
    Drop,
    Abort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSpec {
    pub alphabet: BTreeMap<char, String>,
    pub pad: String,
    pub horizon: HorizonPolicy,
    pub min_word_length: usize,
    pub overlong: OverlongPolicy,
}

impl CorpusSpec {
    /// Lowercase `a..=z` mapped to themselves.
    pub fn letters(pad: &str, horizon: HorizonPolicy) -> Self {
        CorpusSpec {
            alphabet: ('a'..='z').map(|c| (c, c.to_string())).collect(),
            pad: pad.to_string(),
            horizon,
            min_word_length: 2,
            overlong: OverlongPolicy::Drop,
        }
    }

    /// Distinct state labels of the alphabet in sorted order.
    pub fn letter_labels(&self) -> Vec<String> {
        self.alphabet.values().cloned().collect::<BTreeSet<_>>().into_iter().collect()
    }
}

/// Words with multiplicities, the chosen word length and what was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenized {
    pub words: BTreeMap<String, u64>,
    pub word_length: usize,
    pub dropped_short: u64,
    pub dropped_long: BTreeMap<String, u64>,
}

/// Lowercases, removes apostrophes and digits, splits on every other
/// non-letter and applies the length filters.
pub fn tokenize(text: &str, cs: &CorpusSpec) -> Result<Tokenized> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .filter(|c| !matches!(c, '\'' | '\u{2019}') && !c.is_ascii_digit())
        .collect();
    let mut all: BTreeMap<String, u64> = BTreeMap::new();
    for word in cleaned.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        if let Some(bad) = word.chars().find(|c| !cs.alphabet.contains_key(c)) {
            return Err(Error::Parse(format!("character {bad:?} in word {word:?} is not in the alphabet")));
        }
        *all.entry(word.to_string()).or_insert(0) += 1;
    }
    let mut dropped_short = 0;
    all.retain(|w, m| {
        let keep = w.chars().count() >= cs.min_word_length;
        if !keep {
            dropped_short += *m;
        }
        keep
    });
    let limit = match cs.horizon {
        HorizonPolicy::Fixed(l) => Some(l),
        HorizonPolicy::MaxLength { exclude_above } => exclude_above,
    };
    let mut dropped_long = BTreeMap::new();
    if let Some(limit) = limit {
        let (long, keep): (BTreeMap<_, _>, BTreeMap<_, _>) =
            all.into_iter().partition(|(w, _)| w.chars().count() > limit);
        if cs.overlong == OverlongPolicy::Abort {
            if let Some(w) = long.keys().next() {
                return Err(Error::Data {
                    record: 0,
                    message: format!("word {w:?} has {} letters, more than {limit}", w.chars().count()),
                });
            }
        }
        all = keep;
        dropped_long = long;
    }
    if all.is_empty() {
        return Err(Error::EmptyData("no words left after filtering".into()));
    }
    let word_length = match cs.horizon {
        HorizonPolicy::Fixed(l) => l,
        HorizonPolicy::MaxLength { .. } => all.keys().map(|w| w.chars().count()).max().unwrap_or(0),
    };
    Ok(Tokenized { words: all, word_length, dropped_short, dropped_long })
}

/// Letters plus an absorbing pad, order `order`, horizon `L + 1`, starting
/// in any letter.
pub fn corpus_model(cs: &CorpusSpec, order: usize, word_length: usize, homogeneous: bool) -> Result<Model> {
    let letters = cs.letter_labels();
    if letters.contains(&cs.pad) {
        return Err(Error::InvalidModel(vec![format!("pad label {:?} is also a letter", cs.pad)]));
    }
    let mut states = letters.clone();
    states.push(cs.pad.clone());
    validate_model(&ModelSpec::from_rules(&Rules {
        states,
        order,
        horizon: word_length + 1,
        homogeneous,
        absorbing: vec![cs.pad.clone()],
        initial_states: Some(letters),
        ..Rules::default()
    })?)
}

/// Words (sorted) become trajectories of length `L + 1` with their corpus
/// frequencies as multiplicities. The pad must be absorbing in `model`.
pub fn corpus_to_trajectories(text: &str, cs: &CorpusSpec, model: &Model) -> Result<(TrajectorySet, Tokenized)> {
    let pad = model
        .state_index(&cs.pad)
        .ok_or_else(|| Error::InvalidModel(vec![format!("pad label {:?} is not a model state", cs.pad)]))?;
    let pad_history = vec![pad; model.order()];
    if model.allowed_next(&pad_history) != [pad] {
        return Err(Error::InvalidModel(vec![format!("pad label {:?} is not absorbing", cs.pad)]));
    }
    let tokens = tokenize(text, cs)?;
    let records = tokens
        .words
        .iter()
        .enumerate()
        .map(|(i, (word, &m))| {
            let mut seq = Vec::with_capacity(tokens.word_length + 1);
            for c in word.chars() {
                let label = &cs.alphabet[&c];
                seq.push(model.state_index(label).ok_or_else(|| Error::Data {
                    record: i + 1,
                    message: format!("letter label {label:?} is not a model state"),
                })?);
            }
            seq.resize(tokens.word_length + 1, pad);
            Ok((seq, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((TrajectorySet::new(model, records)?, tokens))
}
