//! End-to-end experiment runners: day-0 detection, channel importance and
//! the lag x window prediction sweep.

mod detection;
mod importance;
mod sweep;

pub use detection::{run_detection, DetectionConfig, DetectionReport, DetectionRun, DetectionSeeds};
pub use importance::{channel_importance, ChannelImportance, ImportanceReport};
pub use sweep::{run_sweep, NegativeUniverse, SweepCell, SweepConfig, SweepGrid};

use serde::Serialize;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One-sided 95% normal quantile.
pub const Z_95_ONE_SIDED: f64 = 1.645;

/// `accuracy - 1.645 * std`: the accuracy exceeded with ~95% probability
/// under a normal approximation.
pub fn lower_bound_95(accuracy: f64, std: f64) -> f64 {
    accuracy - Z_95_ONE_SIDED * std
}

/// SHA-256 of a config's canonical JSON form.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("configs serialize");
    crate::seed::sha256_hex(&json)
}
