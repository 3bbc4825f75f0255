//! Trajectory, count and probability files.
//!
//! All three are line-oriented, comma-separated and allow `#` comments.
//! A trajectory record holds `L` labels, optionally followed by an integer
//! multiplicity; count and probability records hold a path followed by a
//! value.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{CountVector, TrajectorySet};
use crate::model::{Model, Path};
use crate::paths::PathTable;
use crate::rational::{format_rational, parse_rational};

pub fn read_text(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Non-empty, comment-stripped records with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split(',').map(str::trim).collect()))
    })
}

fn labels_to_path(model: &Model, fields: &[&str], record: usize) -> Result<Path> {
    fields
        .iter()
        .enumerate()
        .map(|(pos, label)| {
            model.state_index(label).ok_or_else(|| Error::Data {
                record,
                message: format!("unknown state label {label:?} at position {}", pos + 1),
            })
        })
        .collect()
}

/// Reads trajectories of `length` labels (the model horizon by default).
/// A record with one extra integer field carries a multiplicity.
pub fn parse_trajectories(text: &str, model: &Model, length: Option<usize>) -> Result<TrajectorySet> {
    let length = length.unwrap_or(model.horizon());
    let mut out = Vec::new();
    for (record, (_, fields)) in records(text).enumerate() {
        let record = record + 1;
        let (labels, multiplicity) = if fields.len() == length {
            (&fields[..], 1)
        } else if fields.len() == length + 1 {
            let m = fields[length].parse::<u64>().map_err(|_| Error::Data {
                record,
                message: format!("multiplicity {:?} is not a nonnegative integer", fields[length]),
            })?;
            (&fields[..length], m)
        } else {
            return Err(Error::Data {
                record,
                message: format!("{} fields, expected {length} labels and an optional count", fields.len()),
            });
        };
        out.push((labels_to_path(model, labels, record)?, multiplicity));
    }
    TrajectorySet::new(model, out)
}

/// Reads several trajectory files in parallel and concatenates them in the
/// given order.
pub fn read_trajectory_files(paths: &[PathBuf], model: &Model, length: Option<usize>) -> Result<TrajectorySet> {
    let texts = paths.par_iter().map(|p| read_text(p)).collect::<Result<Vec<_>>>()?;
    parse_trajectories(&texts.concat(), model, length)
}

fn parse_valued<T>(
    text: &str,
    model: &Model,
    table: &PathTable,
    mut parse: impl FnMut(&str) -> Option<T>,
    mut accumulate: impl FnMut(usize, T),
) -> Result<()> {
    let n = model.horizon();
    for (record, (_, fields)) in records(text).enumerate() {
        let record = record + 1;
        if fields.len() != n + 1 {
            return Err(Error::Data {
                record,
                message: format!("{} fields, expected {n} labels and a value", fields.len()),
            });
        }
        let path = labels_to_path(model, &fields[..n], record)?;
        if let Err(e) = model.check_path(&path) {
            return Err(Error::Data { record, message: e.to_string() });
        }
        let index = table.index_of(&path).ok_or_else(|| Error::Data {
            record,
            message: "path is not in the path table".into(),
        })?;
        let value = parse(fields[n]).ok_or_else(|| Error::Data {
            record,
            message: format!("bad value {:?}", fields[n]),
        })?;
        accumulate(index, value);
    }
    Ok(())
}

/// `path, count` records; repeated paths add up and missing paths count 0.
pub fn parse_counts(text: &str, model: &Model, table: &PathTable) -> Result<CountVector> {
    let mut counts = vec![0u64; table.len()];
    parse_valued(text, model, table, |s| s.parse().ok(), |i, c: u64| counts[i] += c)?;
    Ok(CountVector::new(counts))
}

/// `path, probability` records with exact decimal or fractional values;
/// missing paths are 0.
pub fn parse_probabilities(text: &str, model: &Model, table: &PathTable) -> Result<Vec<BigRational>> {
    let mut p = vec![BigRational::zero(); table.len()];
    parse_valued(text, model, table, |s| parse_rational(s).ok(), |i, v| p[i] += v)?;
    Ok(p)
}

pub fn export_trajectories(trajs: &TrajectorySet, model: &Model) -> String {
    trajs
        .records()
        .iter()
        .map(|(seq, m)| format!("{},{m}\n", model.path_csv(seq)))
        .collect()
}

pub fn export_counts(u: &CountVector, model: &Model, table: &PathTable) -> String {
    table
        .paths()
        .iter()
        .zip(u.counts())
        .map(|(p, c)| format!("{},{c}\n", model.path_csv(p)))
        .collect()
}

pub fn export_probabilities(p: &[BigRational], model: &Model, table: &PathTable) -> String {
    table
        .paths()
        .iter()
        .zip(p)
        .map(|(path, v)| format!("{},{}\n", model.path_csv(path), format_rational(v)))
        .collect()
}

/// Counts of each length-`n` prefix.
pub fn counts_from_trajectories(trajs: &TrajectorySet, model: &Model, table: &PathTable) -> Result<CountVector> {
    let n = model.horizon();
    if trajs.length() < n {
        return Err(Error::DimensionMismatch(format!(
            "trajectories of length {} are shorter than the horizon {n}",
            trajs.length()
        )));
    }
    let mut counts = vec![0u64; table.len()];
    for (record, (seq, m)) in trajs.records().iter().enumerate() {
        let index = table.index_of(&seq[..n]).ok_or_else(|| Error::Data {
            record: record + 1,
            message: format!("prefix {} is not an admissible path", model.path_csv(&seq[..n])),
        })?;
        counts[index] += m;
    }
    Ok(CountVector::new(counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;
    use crate::paths::enumerate_paths;

    const COUNTS: &str = include_str!("../../fixtures/illness_death_counts.csv");

    #[test]
    fn counts_fixture_round_trips_through_trajectories() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        let u = parse_counts(COUNTS, &m, &t).unwrap();
        assert_eq!(u.counts(), [94, 60, 47, 56, 40, 16, 78, 10, 29, 39, 94, 68, 9, 45]);
        // the same text is also a trajectory file with multiplicities
        let trajs = parse_trajectories(COUNTS, &m, None).unwrap();
        assert_eq!(trajs.total(), 685);
        assert_eq!(counts_from_trajectories(&trajs, &m, &t).unwrap(), u);
        let again = parse_trajectories(&export_trajectories(&trajs, &m), &m, None).unwrap();
        assert_eq!(counts_from_trajectories(&again, &m, &t).unwrap(), u);
        assert_eq!(parse_counts(&export_counts(&u, &m, &t), &m, &t).unwrap(), u);
    }

    #[test]
    fn trajectory_errors() {
        let m = catalog::illness_death(4, true);
        assert!(matches!(parse_trajectories("", &m, None), Err(Error::EmptyData(_))));
        assert!(matches!(parse_trajectories("# nothing\n", &m, None), Err(Error::EmptyData(_))));
        let err = parse_trajectories("0,0,0,0\n0,1,0,0\n", &m, None).unwrap_err();
        assert!(matches!(err, Error::Data { record: 2, .. }), "{err}");
        assert!(err.to_string().contains("position 3"), "{err}");
        let err = parse_trajectories("0,0,0,0\n0,0,0\n", &m, None).unwrap_err();
        assert!(matches!(err, Error::Data { record: 2, .. }), "{err}");
        let err = parse_trajectories("0,0,0,7\n", &m, None).unwrap_err();
        assert!(err.to_string().contains("unknown state"), "{err}");
        let err = parse_trajectories("0,0,0,0,x\n", &m, None).unwrap_err();
        assert!(err.to_string().contains("multiplicity"), "{err}");
    }

    #[test]
    fn longer_trajectories_use_prefixes() {
        let m = catalog::illness_death(3, true);
        let t = enumerate_paths(&m);
        let trajs = parse_trajectories("0,1,1,2,2\n0,1,1,1,1,3\n", &m, Some(5)).unwrap();
        let u = counts_from_trajectories(&trajs, &m, &t).unwrap();
        assert_eq!(u.counts()[t.index_of(&[0, 1, 1]).unwrap()], 4);
        assert_eq!(u.total(), 4);
    }

    #[test]
    fn probabilities_are_exact() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        let p = parse_probabilities("0,0,0,0,0.137\n1,2,2,2,1/3\n", &m, &t).unwrap();
        assert_eq!(p[0], crate::rational::ratio(137, 1000));
        assert_eq!(p[13], crate::rational::ratio(1, 3));
        assert!(p[1].is_zero());
        assert!(parse_probabilities("1,0,0,0,0.5\n", &m, &t).is_err());
    }
}
