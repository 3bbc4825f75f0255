//! JSON documents and plain-text tables for the command-line reports.

use std::fmt::Write as _;

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::estimate::EstimateReport;
use crate::model::Model;
use crate::paths::PathTable;
use crate::rational::{format_rational, round_half_even};
use crate::relations::{format_variable, relation_record, RelationSet};

fn labels(model: &Model, seq: &[usize]) -> Value {
    json!(seq.iter().map(|&s| model.label(s)).collect::<Vec<_>>())
}

fn number(value: &BigRational, decimals: usize) -> Value {
    json!({ "exact": format_rational(value), "decimal": round_half_even(value, decimals) })
}

pub fn validation_json(model: &Model) -> Value {
    json!({
        "states": model.labels(),
        "order_k": model.order(),
        "horizon_n": model.horizon(),
        "homogeneous": model.is_homogeneous(),
        "initial_allowed": model.initial_blocks().iter().map(|b| labels(model, b)).collect::<Vec<_>>(),
        "warnings": model.warnings(),
    })
}

pub fn paths_json(model: &Model, table: &PathTable) -> Value {
    json!({
        "count": table.len(),
        "paths": table.paths().iter().map(|p| labels(model, p)).collect::<Vec<_>>(),
    })
}

pub fn relations_json(model: &Model, table: &PathTable, set: &RelationSet) -> Value {
    json!({
        "count": set.len(),
        "relations": set.relations.iter().map(|r| relation_record(r, model, table)).collect::<Vec<_>>(),
        "slice": set.slice.iter().map(|p| labels(model, p)).collect::<Vec<_>>(),
    })
}

/// One binomial per line with its family as a trailing comment, then the
/// slice variables as comments, so the output parses back as a relation
/// file.
pub fn relations_text(model: &Model, table: &PathTable, set: &RelationSet) -> String {
    let mut out = String::new();
    for r in &set.relations {
        let _ = writeln!(out, "{}  # {}", crate::relations::format_binomial(&r.binomial, model, table), r.provenance);
    }
    for p in &set.slice {
        let _ = writeln!(out, "# slice {}", format_variable(p, model));
    }
    out
}

fn time_name(time: Option<usize>) -> String {
    time.map_or_else(|| "A".to_string(), |t| format!("A({t})"))
}

pub fn estimate_json(model: &Model, table: &PathTable, report: &EstimateReport, decimals: usize) -> Value {
    let est = &report.estimate;
    let k = model.order();
    let initial: Vec<Value> = model
        .initial_blocks()
        .iter()
        .map(|b| json!({ "block": labels(model, b), "value": number(&est.initial[model.rank(b)], decimals) }))
        .collect();
    let mut transitions = Vec::new();
    for (slot, tensor) in est.transitions.iter().enumerate() {
        for h in 0..model.num_histories() {
            let history = model.unrank(h, k);
            let next = model.allowed_next(&history);
            if next.is_empty() {
                continue;
            }
            let row = &tensor[h * model.num_states()..(h + 1) * model.num_states()];
            let values: Option<serde_json::Map<String, Value>> = row[0].as_ref().map(|_| {
                next.iter()
                    .filter_map(|&t| row[t].as_ref().map(|v| (model.label(t).to_string(), number(v, decimals))))
                    .collect()
            });
            transitions.push(json!({
                "time": model.slot_time(slot),
                "history": labels(model, &history),
                "defined": values.is_some(),
                "next": values,
            }));
        }
    }
    let fitted: Vec<Value> = table
        .paths()
        .iter()
        .zip(&report.fitted)
        .map(|(p, v)| json!({ "path": labels(model, p), "value": v.as_ref().map(|v| number(v, decimals)) }))
        .collect();
    json!({
        "homogeneous": est.homogeneous,
        "total": report.total,
        "pi": initial,
        "a": transitions,
        "fitted": fitted,
        "loglikelihood": report.loglikelihood,
        "undefined_rows": est.undefined_rows(model).iter().map(|(t, h)| json!({"time": t, "history": labels(model, h)})).collect::<Vec<_>>(),
    })
}

/// Matrices with histories as rows and next states as columns.
pub fn estimate_text(model: &Model, table: &PathTable, report: &EstimateReport, decimals: usize) -> String {
    let est = &report.estimate;
    let k = model.order();
    let s = model.num_states();
    let width = (decimals + 3).max(model.labels().iter().map(String::len).max().unwrap_or(1));
    let hwidth = (0..model.num_histories())
        .map(|h| model.path_key(&model.unrank(h, k)).len())
        .max()
        .unwrap_or(1)
        .max(2);
    let mut out = String::new();
    if report.total > 0 {
        let _ = writeln!(out, "M = {}", report.total);
    }
    let _ = writeln!(out, "pi:");
    for b in model.initial_blocks() {
        let _ = writeln!(
            out,
            "  {:<hwidth$}  {}",
            model.path_key(b),
            round_half_even(&est.initial[model.rank(b)], decimals)
        );
    }
    for (slot, tensor) in est.transitions.iter().enumerate() {
        let _ = writeln!(out, "{}:", time_name(model.slot_time(slot)));
        let _ = write!(out, "  {:<hwidth$}", "");
        for label in model.labels() {
            let _ = write!(out, "  {label:>width$}");
        }
        out.push('\n');
        for h in 0..model.num_histories() {
            let history = model.unrank(h, k);
            if model.allowed_next(&history).is_empty() {
                continue;
            }
            let _ = write!(out, "  {:<hwidth$}", model.path_key(&history));
            let row = &tensor[h * s..(h + 1) * s];
            if row[0].is_none() {
                let _ = writeln!(out, "  undefined");
                continue;
            }
            for v in row.iter().flatten() {
                let _ = write!(out, "  {:>width$}", round_half_even(v, decimals));
            }
            out.push('\n');
        }
    }
    let _ = writeln!(out, "fitted path probabilities:");
    for (p, v) in table.paths().iter().zip(&report.fitted) {
        let value = v.as_ref().map_or_else(|| "undefined".to_string(), |v| round_half_even(v, decimals));
        let _ = writeln!(out, "  {}  {value}", model.path_key(p));
    }
    match report.loglikelihood {
        Some(ll) if report.total > 0 => {
            let _ = writeln!(out, "log-likelihood: {ll:.6}");
        }
        Some(_) => {}
        None => {
            let _ = writeln!(out, "log-likelihood: undefined");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{estimate_report, mle_homogeneous_counts, CountVector};
    use crate::model::catalog;
    use crate::paths::enumerate_paths;

    #[test]
    fn estimate_renders_matrix_layout() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        let u = CountVector::new(vec![94, 60, 47, 56, 40, 16, 78, 10, 29, 39, 94, 68, 9, 45]);
        let est = mle_homogeneous_counts(&u, &m, &t).unwrap();
        let report = estimate_report(est, &m, &t, &u);
        let text = estimate_text(&m, &t, &report, 3);
        assert!(text.contains("  0    0.619   0.278   0.104"), "{text}");
        assert!(text.contains("  1    0.000   0.764   0.236"), "{text}");
        assert!(text.contains("  0   0.685"), "{text}");
        let doc = estimate_json(&m, &t, &report, 3);
        assert_eq!(doc["pi"][0]["value"]["decimal"], "0.685");
        assert_eq!(doc["fitted"].as_array().unwrap().len(), 14);
    }
}
