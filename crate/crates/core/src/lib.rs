//! Detection and onset forecasting of digital dermatitis (DD) in dairy cows
//! from daily behavior-sensor records.
//!
//! The crate covers the whole experimental protocol:
//!
//! * [`herd_data`]: CSV ingestion, episode enrollment, case/control matching
//!   and cow-grouped (leakage-safe) splits.
//! * [`featurize`]: detection and lag/window features, min-max scaling,
//!   second-order polynomial expansion, Pearson correlation and k-means
//!   under-sampling.
//! * [`learners`]: CART, random forest, k-nearest neighbors, k-means and a
//!   soft-voting ensemble, all deterministic under a seed.
//! * [`automl`]: a small pipeline grammar searched by a genetic algorithm and
//!   refined by grid search, scored with grouped cross-validation.
//! * [`evaluate`]: end-to-end detection runs, channel importance and the
//!   lag x window sensitivity sweep.
//! * [`synthherd`]: a seeded herd generator with a planted disease signature.
//!
//! Data-parallel loops (forest trees, CV folds, GA candidates, sweep cells)
//! go through [`par`], which uses rayon when the `parallel` feature is on and
//! runs sequentially otherwise. Results never depend on scheduling.

pub mod automl;
pub mod error;
pub mod evaluate;
pub mod featurize;
pub mod herd_data;
pub mod learners;
pub mod par;
pub mod seed;
pub mod synthherd;

pub use error::{Error, Result};
pub use herd_data::{Channel, CowId, FeatureMatrix};
pub use par::Execution;
