//! Comparison detectors: each one turns a user's day signatures into
//! routine / non-routine calls through a different lens (density, cluster
//! structure, robust distance, or support estimation).

pub mod dbscan;
pub mod envelope;
pub mod ocsvm;
pub mod spectral;

pub use dbscan::{dbscan, eps_heuristic, Assignment, Clustering};
pub use envelope::{EllipticEnvelope, EnvelopeParams};
pub use ocsvm::{OcsvmParams, OneClassSvm};
pub use spectral::spectral_two_way;
