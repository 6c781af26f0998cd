//! Study driver for reduced-basis approximations with and without freezing:
//! configuration, field and model persistence, the parameter study and its
//! CSV/SVG reports.

pub mod config;
mod error;
pub mod fieldio;
pub mod model;
pub mod report;
pub mod study;

pub use config::StudyConfig;
pub use error::{Result, StudyError};
pub use model::{load_model, run_offline, save_model, Model, Scheme};
pub use study::{run_detailed, run_study, ErrorRecord, StudyResult};
