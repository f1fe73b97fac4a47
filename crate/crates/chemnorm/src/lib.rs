//! File formats, artifact persistence and the train / standardize /
//! evaluate pipeline built on [`chemnorm_core`].

pub mod artifacts;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod report;

pub use artifacts::{load_artifacts, save_artifacts};
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::{
    build_artifacts, pipeline_evaluate, pipeline_train, standardize, standardize_batch, Evaluation, PipelineArtifacts,
    TrainSummary,
};
