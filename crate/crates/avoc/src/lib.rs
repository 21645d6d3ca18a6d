//! Validation of minimum sum-of-squares clustering (MSSC) solutions.
//!
//! Given any feasible K-clustering, the library builds a balanced
//! anticlustering partition of the dataset, refines it with a swap
//! heuristic to maximize the decomposition bound, certifies a lower bound
//! on the global MSSC optimum by solving each anticluster exactly (or to a
//! valid anytime bound), and reports a provable optimality gap.

pub mod anticluster;
pub mod certify;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod exact;
pub mod ingest;
pub mod kmeans;
pub mod restriction;
pub mod synthetic;

pub use anticluster::{AnticlusterPartition, StopReason};
pub use certify::{Certificate, ReportFormat, RunConfig};
pub use clustering::Clustering;
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use exact::{SolveStatus, SubproblemResult};
pub use kmeans::KMeansConfig;
