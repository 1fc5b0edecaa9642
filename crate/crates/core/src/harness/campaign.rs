use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::design::PairFeatures;
use crate::error::HarnessError;
use crate::harness::http::HttpChatBackend;
use crate::harness::parse::parse_score;
use crate::harness::store::{score_cache_key, RecordStore, ScoreRecord};
use crate::harness::synthetic::SyntheticEvaluator;

/// One profile-brief pair queued for scoring.
#[derive(Debug, Clone)]
pub struct ScoreJob {
    pub features: PairFeatures,
    /// Rendered prompt; required by live backends, ignored by synthetic ones.
    pub prompt: Option<String>,
}

/// Something that answers a scoring prompt.
pub trait ScoreBackend: Sync {
    fn model_name(&self) -> &str;
    fn reply(&self, job: &ScoreJob, run_index: u32) -> Result<String, HarnessError>;
}

impl ScoreBackend for SyntheticEvaluator {
    fn model_name(&self) -> &str {
        "synthetic"
    }

    fn reply(&self, job: &ScoreJob, run_index: u32) -> Result<String, HarnessError> {
        Ok(self.reply(&job.features, run_index))
    }
}

impl ScoreBackend for HttpChatBackend {
    fn model_name(&self) -> &str {
        self.model()
    }

    fn reply(&self, job: &ScoreJob, _run_index: u32) -> Result<String, HarnessError> {
        let prompt = job.prompt.as_deref().ok_or_else(|| {
            HarnessError::Backend("live backend needs a rendered prompt".into())
        })?;
        self.complete(prompt)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOptions {
    /// Scoring repetitions per pair; the aggregate is their mean.
    pub runs: u32,
    pub concurrency: usize,
    /// Stop after this many new calls; `None` runs to completion. Lets tests
    /// and operators slice a long campaign into resumable chunks.
    pub limit: Option<usize>,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions { runs: 3, concurrency: 4, limit: None }
    }
}

/// A call that failed after retries; kept out of the store so a rerun picks
/// it up again.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailedCall {
    pub pair_id: String,
    pub run_index: u32,
    pub error: String,
}

/// Per-pair mean over completed runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreAggregate {
    pub pair_id: String,
    pub brief_id: String,
    pub run_scores: Vec<f64>,
    pub mean_score: f64,
    /// Max minus min across runs; zero when the evaluator is deterministic.
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignOutcome {
    /// New calls completed this invocation.
    pub completed: usize,
    /// Calls already present in the store.
    pub cached: usize,
    /// Calls not attempted because of `limit`.
    pub deferred: usize,
    pub failed: Vec<FailedCall>,
    /// One row per fully-scored pair, in pair enumeration order.
    pub aggregates: Vec<ScoreAggregate>,
}

/// Scores every job `runs` times through `backend`, resuming from whatever
/// the store already holds.
///
/// Workers pull calls from a shared cursor and send finished records to the
/// single writer thread; the store itself is never contended. Aggregates are
/// recomputed from the store in job order, so a resumed campaign emits the
/// same rows as an uninterrupted one.
pub fn run_scoring_campaign(
    jobs: &[ScoreJob],
    backend: &dyn ScoreBackend,
    template_hash: &str,
    store: &mut RecordStore,
    options: &CampaignOptions,
) -> Result<CampaignOutcome, HarnessError> {
    let model = backend.model_name().to_string();
    let mut work: Vec<(usize, u32, String)> = Vec::new();
    let mut cached = 0usize;
    for (j, job) in jobs.iter().enumerate() {
        for run_index in 0..options.runs {
            let key = score_cache_key(
                &job.features.pair_id.to_string(),
                template_hash,
                &model,
                run_index,
            );
            if store.score(&key).is_some() {
                cached += 1;
            } else {
                work.push((j, run_index, key));
            }
        }
    }
    let deferred = match options.limit {
        Some(limit) if work.len() > limit => {
            let deferred = work.len() - limit;
            work.truncate(limit);
            deferred
        }
        _ => 0,
    };

    let mut failed = Vec::new();
    let mut completed = 0usize;
    if !work.is_empty() {
        let cursor = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<Result<ScoreRecord, FailedCall>>();
        let workers = options.concurrency.max(1).min(work.len());
        std::thread::scope(|scope| -> Result<(), HarnessError> {
            for _ in 0..workers {
                let tx = tx.clone();
                let work = &work;
                let cursor = &cursor;
                let model = &model;
                scope.spawn(move || {
                    loop {
                        let i = cursor.fetch_add(1, Ordering::Relaxed);
                        let Some((j, run_index, key)) = work.get(i) else { break };
                        let job = &jobs[*j];
                        let pair_id = job.features.pair_id.to_string();
                        let outcome = backend
                            .reply(job, *run_index)
                            .and_then(|raw| parse_score(&raw).map(|p| (raw, p)))
                            .map(|(raw, parsed)| ScoreRecord {
                                cache_key: key.clone(),
                                pair_id: pair_id.clone(),
                                model: model.clone(),
                                template_hash: template_hash.to_string(),
                                run_index: *run_index,
                                score: parsed.score,
                                justification: parsed.justification,
                                raw_text: raw,
                            })
                            .map_err(|e| FailedCall {
                                pair_id,
                                run_index: *run_index,
                                error: e.to_string(),
                            });
                        if tx.send(outcome).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(tx);
            for outcome in rx {
                match outcome {
                    Ok(record) => {
                        store.append_score(record)?;
                        completed += 1;
                    }
                    Err(failure) => failed.push(failure),
                }
            }
            Ok(())
        })?;
    }

    let aggregates = collect_aggregates(jobs, template_hash, &model, options.runs, store);
    Ok(CampaignOutcome { completed, cached, deferred, failed, aggregates })
}

/// Aggregates for every job whose runs are all in the store, in job order.
pub fn collect_aggregates(
    jobs: &[ScoreJob],
    template_hash: &str,
    model: &str,
    runs: u32,
    store: &RecordStore,
) -> Vec<ScoreAggregate> {
    jobs.iter()
        .filter_map(|job| {
            let pair_id = job.features.pair_id.to_string();
            let run_scores: Vec<f64> = (0..runs)
                .map_while(|run_index| {
                    store
                        .score(&score_cache_key(&pair_id, template_hash, model, run_index))
                        .map(|r| r.score)
                })
                .collect();
            if run_scores.len() != runs as usize {
                return None;
            }
            let mean_score = run_scores.iter().sum::<f64>() / runs as f64;
            let spread = run_scores.iter().fold(f64::MIN, |a, b| a.max(*b))
                - run_scores.iter().fold(f64::MAX, |a, b| a.min(*b));
            Some(ScoreAggregate {
                pair_id,
                brief_id: job.features.pair_id.brief_id.clone(),
                run_scores,
                mean_score,
                spread,
            })
        })
        .collect()
}

/// Run-to-run stability of the aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub pairs: usize,
    /// Pairs whose repeated runs did not all agree.
    pub varying_pairs: usize,
    pub varying_fraction: f64,
    pub max_spread: f64,
}

pub fn stability_summary(aggregates: &[ScoreAggregate]) -> StabilitySummary {
    let pairs = aggregates.len();
    let varying_pairs = aggregates.iter().filter(|a| a.spread > 0.0).count();
    let max_spread = aggregates.iter().map(|a| a.spread).fold(0.0_f64, f64::max);
    StabilitySummary {
        pairs,
        varying_pairs,
        varying_fraction: if pairs == 0 { 0.0 } else { varying_pairs as f64 / pairs as f64 },
        max_spread,
    }
}
