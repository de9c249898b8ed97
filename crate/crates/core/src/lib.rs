//! Discovery of routine vs. non-routine days in lifelog photo-stream data.
//!
//! A day recorded by a wearable camera is summarised as a fixed-length
//! feature vector (the mean of its per-image descriptors), and non-routine
//! days are detected as density outliers among a user's days. The crate
//! ships a from-scratch Isolation Forest plus four comparison detectors
//! (robust covariance, one-class SVM, DBSCAN, spectral clustering), a
//! synthetic corpus generator, an evaluation harness and an experiment
//! runner that renders CSV tables and SVG plots.

pub mod baselines;
pub mod dataset;
pub mod daysig;
pub mod error;
pub mod eval;
pub mod iforest;
pub mod numerics;
pub mod runner;

pub use dataset::{DayRecord, ImageDescriptor, Label, StudyDataset};
pub use daysig::{DaySignature, FeatureMode};
pub use error::{Error, Result};
