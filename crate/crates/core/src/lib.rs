//! Collaborative filtering with sparse denoising autoencoders.

pub mod als;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod ingest;
pub mod loss;
pub mod net;
pub mod ratings;
pub mod sideinfo;
pub mod synthetic;
pub mod train;
pub mod tune;

pub use error::{CfnError, Result};
pub use eval::RatingEstimator;
pub use net::{AutoencoderModel, ModelSpec, Transfer};
pub use ratings::{Orientation, RatingScale, SparseRatings};
