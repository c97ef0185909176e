//! Site-trained shadowing prediction from link power measurements.
//!
//! The pipeline: fit a log-distance path-loss model to measured link
//! powers, express each measurement's deviation from that mean as a fading
//! loss, and explain those losses as line integrals of a per-pixel spatial
//! loss field. The field is estimated by regularized Bayesian linear
//! regression under an exponentially correlated Gaussian prior, then reused
//! to predict shadowing for arbitrary new transmitter/receiver pairs by
//! summing the field under each new link's ellipse.
//!
//! Module map:
//!
//! * [`geometry`] — links, pixel grids, ellipse weight matrix
//! * [`pathloss`] — log-distance fit/predict and the Okumura-Hata baseline
//! * [`prior`] — exponential covariance, factorization, field sampling
//! * [`estimator`] — the two solver paths, training, prediction
//! * [`evaluation`] — variance reduction, splits, cross-validation,
//!   grouped-variance floor
//! * [`dataset`] — measurement CSV ingestion and synthetic scenarios
//! * [`model_file`] — the versioned trained-model text format
//! * [`config`] — flat key=value files
//! * [`export`] — field CSV / graymap / mapping sidecar
//!
//! # Example
//!
//! ```
//! use celf::dataset::{generate_synthetic, scenario_preset};
//! use celf::estimator::{predict_shadowing, train, TrainOptions};
//! use celf::evaluation::{evaluate, split_train_test};
//! use celf::geometry::PixelGrid;
//! use celf::pathloss::LogDistanceModel;
//! use celf::prior::MemoryBudget;
//!
//! // a small reproducible campaign from the built-in indoor preset
//! let preset = scenario_preset("indoor-like")?;
//! let mut scenario = preset.scenario.clone();
//! scenario.node_count = 16; // keep the doc example quick
//! let (links, _truth) = generate_synthetic(&scenario, MemoryBudget::default())?;
//!
//! let (train_links, test_links) = split_train_test(&links, 0.7, 1)?;
//! let pathloss = LogDistanceModel::fit(&train_links, 1.0)?;
//! let grid = PixelGrid::from_links(&train_links, preset.hyper.pixel_width, 0.0)?;
//! let (model, report) = train(
//!     &train_links,
//!     &preset.hyper,
//!     &pathloss,
//!     &grid,
//!     &TrainOptions::default(),
//! )?;
//! assert!(report.relative_residual() < 1e-8);
//!
//! let summary = evaluate(&model, &test_links)?;
//! assert_eq!(summary.n_links, test_links.len());
//! let predictions = predict_shadowing(&model, &test_links)?;
//! assert_eq!(predictions.len(), test_links.len());
//! # Ok::<(), celf::Error>(())
//! ```

pub mod config;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod export;
pub mod geometry;
pub mod model_file;
pub mod pathloss;
pub mod prior;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

// The estimator API exposes ndarray types (posterior covariance); re-export
// the crate so downstream users match versions.
pub use ndarray;
