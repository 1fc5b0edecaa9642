//! Correspondence-audit toolkit for text-based candidate evaluators.
//!
//! The crate builds full factorial designs of freelancer profiles and project
//! briefs, renders them into documents and prompts, runs scoring or ranking
//! campaigns against a chat backend (live HTTP or a synthetic stand-in), and
//! estimates attribute effects with cluster-robust OLS.

pub mod config;
pub mod design;
pub mod error;
pub mod harness;
pub mod ids;
pub mod ranking;
pub mod render;
pub mod report;
pub mod stats;

pub use config::ConfigBundle;
pub use design::{BriefSpec, DesignConfig, PairFeatures, PairId, ProfileSpec};
pub use error::{DesignError, HarnessError, RenderError, StatsError};
pub use render::{RenderedDocument, TemplateSet};
