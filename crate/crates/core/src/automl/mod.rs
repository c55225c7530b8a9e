//! Pipeline search: a small grammar of (scaler, expander, classifier)
//! pipelines, a genetic algorithm over it, and exhaustive grid refinement of
//! the winner's hyperparameters. Fitness is mean cow-grouped CV accuracy.

mod ga;
mod grid;
mod pipeline;

pub use ga::{ga_search, write_search_log, GaConfig, GaResult, SearchLogEntry};
pub use grid::{grid_refine, GridResult, HyperGrid};
pub use pipeline::{
    evaluate_pipeline, fold_pipelines, ClassifierSpec, CvScore, Expander, Family, Genome,
    GrammarBounds, KnnSpec, PipelineSpec, RfSpec, Scaler, TrainedPipeline,
};
