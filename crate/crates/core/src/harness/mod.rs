//! Evaluation harness: backends, reply parsing, the append-only record
//! store, and the resumable scoring campaign built on them.

pub mod campaign;
pub mod http;
pub mod parse;
pub mod store;
pub mod synthetic;

pub use campaign::{
    collect_aggregates, run_scoring_campaign, stability_summary, CampaignOptions,
    CampaignOutcome, FailedCall, ScoreAggregate, ScoreBackend, ScoreJob, StabilitySummary,
};
pub use http::{BackendConfig, HttpChatBackend};
pub use parse::{parse_score, ParsedScore};
pub use store::{rank_cache_key, score_cache_key, RankRecord, RecordStore, ScoreRecord};
pub use synthetic::{InteractionWeight, Rounding, SyntheticEvaluator, SyntheticEvaluatorSpec};
