//! Mapping trajectories onto a coarser state space.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::estimate::{CountVector, TrajectorySet};
use crate::model::Model;
use crate::paths::PathTable;

/// Surjective map from fine state labels to coarse state labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseMap {
    pub map: BTreeMap<String, String>,
}

fn is_absorbing(model: &Model, state: usize) -> bool {
    model.allowed_next(&vec![state; model.order()]) == [state]
}

/// Pairs `(s, t)` that end some allowed window.
fn allowed_pairs(model: &Model) -> BTreeSet<(usize, usize)> {
    let k = model.order();
    (0..model.num_windows())
        .map(|r| model.unrank(r, k + 1))
        .filter(|w| model.is_allowed_window(w))
        .map(|w| (w[k - 1], w[k]))
        .collect()
}

impl CollapseMap {
    pub fn identity(model: &Model) -> Self {
        CollapseMap { map: model.labels().iter().map(|l| (l.clone(), l.clone())).collect() }
    }

    /// Vowels `aeiou` to `vowel`, every other letter to `consonant`, the
    /// pad to itself.
    pub fn vowel_consonant(letters: &[String], pad: &str, vowel: &str, consonant: &str) -> Self {
        let mut map: BTreeMap<String, String> = letters
            .iter()
            .map(|l| {
                let target = if matches!(l.as_str(), "a" | "e" | "i" | "o" | "u") { vowel } else { consonant };
                (l.clone(), target.to_string())
            })
            .collect();
        map.insert(pad.to_string(), pad.to_string());
        CollapseMap { map }
    }

    /// Fine-to-coarse state indices after checking that the map is total and
    /// surjective, keeps absorbing states absorbing and sends every allowed
    /// fine step to an allowed coarse step.
    pub fn validate(&self, fine: &Model, coarse: &Model) -> Result<Vec<usize>> {
        let mut errors = Vec::new();
        let mut index = Vec::with_capacity(fine.num_states());
        for label in fine.labels() {
            match self.map.get(label).map(|c| (c, coarse.state_index(c))) {
                Some((_, Some(c))) => index.push(c),
                Some((c, None)) => {
                    errors.push(format!("{label:?} maps to {c:?}, which is not a coarse state"));
                    index.push(usize::MAX);
                }
                None => {
                    errors.push(format!("fine state {label:?} is not mapped"));
                    index.push(usize::MAX);
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::InvalidModel(errors));
        }
        let image: BTreeSet<usize> = index.iter().copied().collect();
        for c in 0..coarse.num_states() {
            if !image.contains(&c) {
                errors.push(format!("coarse state {:?} has no preimage", coarse.label(c)));
            }
        }
        for (f, &c) in index.iter().enumerate() {
            if is_absorbing(fine, f) && !is_absorbing(coarse, c) {
                errors.push(format!(
                    "absorbing state {:?} maps to non-absorbing {:?}",
                    fine.label(f),
                    coarse.label(c)
                ));
            }
        }
        let coarse_pairs = allowed_pairs(coarse);
        for (s, t) in allowed_pairs(fine) {
            if !coarse_pairs.contains(&(index[s], index[t])) {
                errors.push(format!(
                    "allowed step {}->{} maps to forbidden {}->{}",
                    fine.label(s),
                    fine.label(t),
                    coarse.label(index[s]),
                    coarse.label(index[t])
                ));
            }
        }
        if errors.is_empty() {
            Ok(index)
        } else {
            Err(Error::InvalidModel(errors))
        }
    }
}

/// Maps every trajectory through the collapse and merges identical images.
pub fn collapse_states(trajs: &TrajectorySet, cm: &CollapseMap, fine: &Model, coarse: &Model) -> Result<TrajectorySet> {
    let index = cm.validate(fine, coarse)?;
    let mut merged: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for (seq, m) in trajs.records() {
        *merged.entry(seq.iter().map(|&s| index[s]).collect()).or_insert(0) += m;
    }
    TrajectorySet::new(coarse, merged.into_iter().collect())
}

/// Pushes fine path counts forward along the induced path map.
pub fn collapse_counts(
    u: &CountVector,
    cm: &CollapseMap,
    fine: &Model,
    fine_table: &PathTable,
    coarse: &Model,
    coarse_table: &PathTable,
) -> Result<CountVector> {
    let index = cm.validate(fine, coarse)?;
    let mut out = vec![0u64; coarse_table.len()];
    for (path, &c) in fine_table.paths().iter().zip(u.counts()) {
        let image: Vec<usize> = path.iter().map(|&s| index[s]).collect();
        let j = coarse_table.index_of(&image).ok_or_else(|| Error::InadmissiblePath {
            path: coarse.path_csv(&image),
            reason: "collapsed path is not admissible in the coarse model".into(),
        })?;
        out[j] += c;
    }
    Ok(CountVector::new(out))
}
