use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use msmarkov::error::{Error, Result};
use msmarkov::estimate::{
    birch_residual, estimate_report, mle_homogeneous, mle_homogeneous_counts, mle_nonhomogeneous,
    mle_nonhomogeneous_counts, mle_paths_hierarchical, recover_parameters, CountVector, EstimateReport,
    WindowPolicy,
};
use msmarkov::io::{self, report, CollapseMap, CorpusSpec, HorizonPolicy, OverlongPolicy};
use msmarkov::model::Model;
use msmarkov::paths::{build_design_matrix, enumerate_paths, PathTable};
use msmarkov::rational::{format_rational, parse_rational, round_half_even};
use msmarkov::relations::{
    all_relations, homogeneous_family, nonhomogeneous_generators, parse_binomial_list,
    permutation_linear_relations, RelationSet,
};
use msmarkov::verify::{verify_relations, VerifyOptions, DEFAULT_BOUND, DEFAULT_TRIALS};

#[derive(Parser)]
#[command(name = "msmarkov", version, about = "Multistate Markov models: paths, relations and closed-form estimates")]
struct Cli {
    /// Model specification file (TOML)
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, default_value_t = 3)]
    decimals: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// Every family that applies to the model
    Auto,
    Nonhom,
    Hom,
    Linear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Window {
    Prefix,
    Slide,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model specification
    Validate,
    /// List the admissible paths
    Paths,
    /// Generate binomial relations
    Relations {
        #[arg(long, value_enum, default_value_t = Family::Auto)]
        family: Family,
    },
    /// Verify relations exactly (generated ones unless --relations is given)
    Verify {
        #[arg(long)]
        relations: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: u32,
    },
    /// Maximum likelihood estimates from trajectories or path counts
    Mle {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = Window::Prefix)]
        window: Window,
        /// Also print the path probabilities computed straight from counts
        #[arg(long)]
        hierarchical: bool,
    },
    /// Recover parameters from exact path probabilities
    Recover {
        #[arg(long)]
        probs: PathBuf,
    },
    /// Birch residual M*A*p - A*u
    Birch {
        #[arg(long)]
        probs: PathBuf,
        #[arg(long)]
        counts: PathBuf,
        /// Fail (exit 2) when some row exceeds this absolute value
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// Turn a text corpus into padded letter trajectories
    Ingest {
        #[arg(long, required = true)]
        corpus: Vec<PathBuf>,
        /// Fixed word length L; defaults to the longest admitted word
        #[arg(long)]
        horizon: Option<usize>,
        /// With the default horizon, treat words longer than this as overlong
        #[arg(long)]
        exclude_above: Option<usize>,
        #[arg(long)]
        abort_overlong: bool,
        #[arg(long, default_value_t = 2)]
        min_length: usize,
        #[arg(long, default_value = "_")]
        pad: String,
        /// Collapse map file; the coarse model comes from --spec
        #[arg(long, conflicts_with = "vowel_consonant")]
        collapse: Option<PathBuf>,
        /// Collapse letters to V and C using the --spec model
        #[arg(long)]
        vowel_consonant: bool,
    },
    /// Everything about a model (and data, if given) in one document
    Report {
        #[command(flatten)]
        data: DataArgs,
    },
}

#[derive(clap::Args)]
struct DataArgs {
    /// Trajectory files
    #[arg(long)]
    data: Vec<PathBuf>,
    /// Path count file
    #[arg(long, conflicts_with = "data")]
    counts: Option<PathBuf>,
    /// Trajectory length when longer than the horizon
    #[arg(long)]
    length: Option<usize>,
}

struct Ctx {
    cli: Cli,
}

impl Ctx {
    fn model(&self) -> Result<Model> {
        let path = self
            .cli
            .spec
            .as_ref()
            .ok_or_else(|| Error::Parse("--spec is required for this command".into()))?;
        io::load_model(path)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.cli.out {
            Some(path) => fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source }),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, doc: &serde_json::Value) -> Result<()> {
        self.emit(&(serde_json::to_string_pretty(doc).expect("JSON values serialize") + "\n"))
    }

    fn structured(&self) -> bool {
        self.cli.format == Format::Structured
    }
}

fn load_counts(args: &DataArgs, model: &Model, table: &PathTable) -> Result<Option<(CountVector, Option<msmarkov::estimate::TrajectorySet>)>> {
    if let Some(path) = &args.counts {
        return Ok(Some((io::parse_counts(&io::read_text(path)?, model, table)?, None)));
    }
    if args.data.is_empty() {
        return Ok(None);
    }
    let trajs = io::read_trajectory_files(&args.data, model, args.length)?;
    let counts = io::counts_from_trajectories(&trajs, model, table)?;
    Ok(Some((counts, Some(trajs))))
}

fn fit(args: &DataArgs, window: Window, model: &Model, table: &PathTable) -> Result<Option<(EstimateReport, CountVector)>> {
    let Some((counts, trajs)) = load_counts(args, model, table)? else { return Ok(None) };
    let policy = match window {
        Window::Prefix => WindowPolicy::Prefix,
        Window::Slide => WindowPolicy::Slide,
    };
    let est = match (&trajs, model.is_homogeneous()) {
        (Some(t), true) => mle_homogeneous(t, model, policy)?,
        (Some(t), false) => mle_nonhomogeneous(t, model)?,
        (None, true) => mle_homogeneous_counts(&counts, model, table)?,
        (None, false) => mle_nonhomogeneous_counts(&counts, model, table)?,
    };
    Ok(Some((estimate_report(est, model, table, &counts), counts)))
}

fn relation_set(model: &Model, table: &PathTable, family: Family) -> Result<RelationSet> {
    match family {
        Family::Auto => all_relations(model, table),
        Family::Nonhom => nonhomogeneous_generators(model, table),
        Family::Hom => homogeneous_family(model, table),
        Family::Linear => permutation_linear_relations(model, table),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CollapseFile {
    map: BTreeMap<String, String>,
}

fn run(ctx: &Ctx) -> Result<u8> {
    let cli = &ctx.cli;
    let decimals = cli.decimals;
    match &cli.command {
        Command::Validate => {
            let model = ctx.model()?;
            if ctx.structured() {
                let mut doc = report::validation_json(&model);
                doc["valid"] = json!(true);
                ctx.emit_json(&doc)?;
            } else {
                let mut text = format!(
                    "valid: {} states, k = {}, n = {}, {}\n",
                    model.num_states(),
                    model.order(),
                    model.horizon(),
                    if model.is_homogeneous() { "homogeneous" } else { "nonhomogeneous" }
                );
                for w in model.warnings() {
                    text += &format!("warning: {w}\n");
                }
                ctx.emit(&text)?;
            }
        }
        Command::Paths => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            if table.is_empty() {
                eprintln!("warning: the model admits no path");
            }
            if ctx.structured() {
                ctx.emit_json(&report::paths_json(&model, &table))?;
            } else {
                ctx.emit(&table.to_text(&model))?;
            }
        }
        Command::Relations { family } => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            let set = relation_set(&model, &table, *family)?;
            if ctx.structured() {
                ctx.emit_json(&report::relations_json(&model, &table, &set))?;
            } else {
                ctx.emit(&report::relations_text(&model, &table, &set))?;
            }
        }
        Command::Verify { relations, bound } => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            let binomials = match relations {
                Some(path) => parse_binomial_list(&io::read_text(path)?, &model, &table)?,
                None => all_relations(&model, &table)?.binomials().cloned().collect(),
            };
            let opts = VerifyOptions { trials: cli.trials, seed: cli.seed, bound: *bound };
            let rep = verify_relations(&binomials, &model, &table, opts)?;
            if ctx.structured() {
                ctx.emit_json(&serde_json::to_value(&rep).expect("report serializes"))?;
            } else {
                let mut text = String::new();
                for r in &rep.relations {
                    let status = if r.passes() { "ok" } else { "FAIL" };
                    text += &format!("{status}  {}\n", r.text);
                    if let msmarkov::verify::Vanishing::Nonzero(w) = &r.vanishing {
                        text += &format!(
                            "      nonzero at seed {} relation {} trial {}: {}\n",
                            w.seed,
                            w.relation,
                            w.trial,
                            format_rational(&w.residual)
                        );
                    }
                    if !r.kernel.in_kernel {
                        let res: Vec<String> = r.kernel.residual.iter().map(ToString::to_string).collect();
                        text += &format!("      A(u - v) = [{}]\n", res.join(", "));
                    }
                }
                text += &format!(
                    "{} of {} relations verified ({} trials, seed {})\n",
                    rep.relations.iter().filter(|r| r.passes()).count(),
                    rep.relations.len(),
                    rep.trials,
                    rep.seed
                );
                ctx.emit(&text)?;
            }
            if !rep.all_pass() {
                return Ok(2);
            }
        }
        Command::Mle { data, window, hierarchical } => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            let (rep, counts) = fit(data, *window, &model, &table)?
                .ok_or_else(|| Error::EmptyData("give --data or --counts".into()))?;
            let hier = if *hierarchical { Some(mle_paths_hierarchical(&counts, &model, &table)?) } else { None };
            if ctx.structured() {
                let mut doc = report::estimate_json(&model, &table, &rep, decimals);
                if let Some(h) = &hier {
                    doc["hierarchical"] = json!(h
                        .iter()
                        .map(|v| v.as_ref().map(|v| round_half_even(v, decimals)))
                        .collect::<Vec<_>>());
                }
                ctx.emit_json(&doc)?;
            } else {
                let mut text = report::estimate_text(&model, &table, &rep, decimals);
                if let Some(h) = &hier {
                    text += "hierarchical path probabilities:\n";
                    for (p, v) in table.paths().iter().zip(h) {
                        let v = v.as_ref().map_or_else(|| "undefined".into(), |v| round_half_even(v, decimals));
                        text += &format!("  {}  {v}\n", model.path_key(p));
                    }
                }
                ctx.emit(&text)?;
            }
        }
        Command::Recover { probs } => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            let p = io::parse_probabilities(&io::read_text(probs)?, &model, &table)?;
            let est = recover_parameters(&p, &model, &table)?;
            let counts = CountVector::new(vec![0; table.len()]);
            let rep = estimate_report(est, &model, &table, &counts);
            if ctx.structured() {
                ctx.emit_json(&report::estimate_json(&model, &table, &rep, decimals))?;
            } else {
                ctx.emit(&report::estimate_text(&model, &table, &rep, decimals))?;
            }
        }
        Command::Birch { probs, counts, tolerance } => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            let p = io::parse_probabilities(&io::read_text(probs)?, &model, &table)?;
            let u = io::parse_counts(&io::read_text(counts)?, &model, &table)?;
            let a = build_design_matrix(&model, &table);
            let residual = birch_residual(&p, &u, &a)?;
            let labels = a.row_labels(&model);
            let tol = tolerance.as_deref().map(parse_rational).transpose()?;
            let exceeded = tol.as_ref().is_some_and(|t| residual.iter().any(|r| &num_traits::Signed::abs(r) > t));
            if ctx.structured() {
                let rows: Vec<_> = labels
                    .iter()
                    .zip(&residual)
                    .map(|(l, r)| json!({"row": l, "exact": format_rational(r), "decimal": round_half_even(r, decimals)}))
                    .collect();
                ctx.emit_json(&json!({"residual": rows, "within_tolerance": tol.as_ref().map(|_| !exceeded)}))?;
            } else {
                let text: String = labels
                    .iter()
                    .zip(&residual)
                    .map(|(l, r)| format!("{l:<10} {}\n", round_half_even(r, decimals)))
                    .collect();
                ctx.emit(&text)?;
            }
            if exceeded {
                return Ok(2);
            }
        }
        Command::Ingest { corpus, horizon, exclude_above, abort_overlong, min_length, pad, collapse, vowel_consonant } => {
            let texts = corpus.iter().map(|p| io::read_text(p)).collect::<Result<Vec<_>>>()?;
            let text = texts.join("\n");
            let policy = match horizon {
                Some(l) => HorizonPolicy::Fixed(*l),
                None => HorizonPolicy::MaxLength { exclude_above: *exclude_above },
            };
            let mut cs = CorpusSpec::letters(pad, policy);
            cs.min_word_length = *min_length;
            cs.overlong = if *abort_overlong { OverlongPolicy::Abort } else { OverlongPolicy::Drop };
            let tokens = io::tokenize(&text, &cs)?;
            let fine = io::corpus_model(&cs, 1, tokens.word_length, true)?;
            let (mut trajs, tokens) = io::corpus_to_trajectories(&text, &cs, &fine)?;
            let mut out_model = fine.clone();
            if collapse.is_some() || *vowel_consonant {
                let coarse = ctx.model()?;
                let cm = match collapse {
                    Some(path) => {
                        let file: CollapseFile = toml::from_str(&io::read_text(path)?).map_err(|e| Error::Parse(e.to_string()))?;
                        CollapseMap { map: file.map }
                    }
                    None => CollapseMap::vowel_consonant(&cs.letter_labels(), pad, "V", "C"),
                };
                trajs = io::collapse_states(&trajs, &cm, &fine, &coarse)?;
                out_model = coarse;
            }
            if !tokens.dropped_long.is_empty() {
                let words: Vec<&str> = tokens.dropped_long.keys().map(String::as_str).collect();
                eprintln!("dropped overlong words: {}", words.join(", "));
            }
            if ctx.structured() {
                let records: Vec<_> = trajs
                    .records()
                    .iter()
                    .map(|(s, m)| json!({"trajectory": s.iter().map(|&i| out_model.label(i)).collect::<Vec<_>>(), "multiplicity": m}))
                    .collect();
                ctx.emit_json(&json!({
                    "word_length": tokens.word_length,
                    "total": trajs.total(),
                    "dropped_short": tokens.dropped_short,
                    "dropped_long": tokens.dropped_long,
                    "trajectories": records,
                }))?;
            } else {
                ctx.emit(&io::export_trajectories(&trajs, &out_model))?;
            }
        }
        Command::Report { data } => {
            let model = ctx.model()?;
            let table = enumerate_paths(&model);
            let set = all_relations(&model, &table)?;
            let opts = VerifyOptions { trials: cli.trials, seed: cli.seed, bound: DEFAULT_BOUND };
            let binomials: Vec<_> = set.binomials().cloned().collect();
            let verification = verify_relations(&binomials, &model, &table, opts)?;
            let estimate = fit(data, Window::Prefix, &model, &table)?;
            if ctx.structured() {
                ctx.emit_json(&json!({
                    "model": report::validation_json(&model),
                    "paths": report::paths_json(&model, &table),
                    "relations": report::relations_json(&model, &table, &set),
                    "verification": {"all_pass": verification.all_pass(), "checked": verification.relations.len()},
                    "estimate": estimate.as_ref().map(|(r, _)| report::estimate_json(&model, &table, r, decimals)),
                }))?;
            } else {
                let mut text = format!(
                    "model: {} states, k = {}, n = {}, {}\n",
                    model.num_states(),
                    model.order(),
                    model.horizon(),
                    if model.is_homogeneous() { "homogeneous" } else { "nonhomogeneous" }
                );
                text += &format!("paths: {}\n", table.len());
                text += &format!(
                    "relations: {} ({} verified), slice variables: {}\n",
                    set.len(),
                    verification.relations.iter().filter(|r| r.passes()).count(),
                    set.slice.len()
                );
                if let Some((r, _)) = &estimate {
                    text += &report::estimate_text(&model, &table, r, decimals);
                }
                ctx.emit(&text)?;
            }
            if !verification.all_pass() {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Parse(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let ctx = Ctx { cli: Cli::parse() };
    match run(&ctx) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
