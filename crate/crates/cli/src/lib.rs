//! Command-line pipeline: corpus → counts → weighted graph → trained
//! vectors → analogy report.

pub mod config;
pub mod pipeline;

pub use config::PipelineConfig;
pub use pipeline::{
    cmd_eval, cmd_extract, cmd_run_all, cmd_train, cmd_weight, load_graph, ExtractSummary,
    OutputPaths, RunSummary,
};
