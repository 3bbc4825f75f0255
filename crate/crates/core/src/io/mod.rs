//! File formats, corpus ingestion, state collapsing and report rendering.

pub mod collapse;
pub mod corpus;
pub mod data;
pub mod report;
pub mod spec;

pub use collapse::{collapse_counts, collapse_states, CollapseMap};
pub use corpus::{corpus_model, corpus_to_trajectories, tokenize, CorpusSpec, HorizonPolicy, OverlongPolicy};
pub use data::{
    counts_from_trajectories, export_counts, export_trajectories, parse_counts, parse_probabilities,
    parse_trajectories, read_text, read_trajectory_files,
};
pub use spec::{load_model, parse_model_spec};
