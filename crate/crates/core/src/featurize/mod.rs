//! Turning validated cow-days into learner input.

mod detection;
mod lagwindow;
mod pearson;
mod poly;
mod scale;
mod undersample;

pub use detection::{
    detection_feature_names, detection_features, detection_matrix, DetectionOptions,
};
pub use lagwindow::{
    lagwindow_feature_names, lagwindow_features, window_aggregates, Aggregate, LagWindowConfig,
};
pub use pearson::{pearson_matrix, CorrelationMatrix};
pub use poly::{poly2_expand, poly2_matrix, poly2_names, poly2_width};
pub use scale::MinMaxParams;
pub use undersample::{kmeans_undersample, kmeans_undersample_indices};
