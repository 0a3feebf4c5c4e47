//! Topological detection of Trojaned neural networks.
//!
//! The pipeline traces neuron activations, turns their correlations into a
//! Vietoris–Rips filtration, computes persistence diagrams and representative
//! cycles, summarizes them as features and trains a small classifier on those
//! features.

pub mod analysis;
pub mod complex;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod features;
pub mod netlab;
pub mod persistence;
pub mod rng;
pub mod trace;

pub use error::{Error, Result};

/// Version of every on-disk format, as `(name, version)`.
pub fn format_versions() -> Vec<(&'static str, u32)> {
    vec![
        ("network", netlab::NETWORK_FORMAT_VERSION),
        ("trace", trace::TRACE_FORMAT_VERSION),
        ("features", features::FEATURE_FORMAT_VERSION),
        ("detector", detector::DETECTOR_FORMAT_VERSION),
        ("diagram", persistence::DIAGRAM_FORMAT_VERSION),
        ("cycles", persistence::CYCLE_FORMAT_VERSION),
    ]
}
