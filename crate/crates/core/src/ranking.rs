//! Ranking variant of the audit: profiles are grouped into triples, the
//! evaluator orders each triple against a brief, and effects are estimated
//! by regressing reversed ranks on the same dummies as the scoring fits.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use std::sync::OnceLock;

use crate::design::{derive_features, BriefSpec, DesignConfig, PairFeatures, ProfileSpec};
use crate::error::{DesignError, HarnessError, StatsError};
use crate::harness::campaign::FailedCall;
use crate::harness::http::HttpChatBackend;
use crate::harness::store::{rank_cache_key, RankRecord, RecordStore};
use crate::harness::synthetic::SyntheticEvaluator;
use crate::ids::content_hash;
use crate::render::RANK_LABELS;
use crate::stats::fit::{fit, ClusterKey, FitResult, ModelSpec};

/// One triple queued for ranking, in presentation order (labels A, B, C).
#[derive(Debug, Clone)]
pub struct RankJob {
    pub group_id: String,
    pub brief_id: String,
    pub features: [PairFeatures; 3],
    pub prompt: Option<String>,
}

impl RankJob {
    pub fn profile_ids(&self) -> Vec<String> {
        self.features.iter().map(|f| f.pair_id.profile_id.clone()).collect()
    }
}

/// Partitions `0..profile_count` into disjoint triples: a seeded shuffle
/// chunked by threes, so each profile appears in at most one triple and a
/// remainder of one or two profiles is dropped.
pub fn sample_triples(profile_count: usize, seed: u64) -> Result<Vec<[usize; 3]>, DesignError> {
    if profile_count < 3 {
        return Err(DesignError::Config(format!(
            "ranking needs at least 3 profiles, got {profile_count}"
        )));
    }
    let mut indices: Vec<usize> = (0..profile_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    Ok(indices.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

/// Builds ranking jobs for one brief: samples triples, permutes each triple's
/// presentation order, and derives pair features. Prompts are left for the
/// caller, which owns rendering.
pub fn build_rank_jobs(
    config: &DesignConfig,
    profiles: &[ProfileSpec],
    brief: &BriefSpec,
    seed: u64,
) -> Result<Vec<RankJob>, DesignError> {
    let triples = sample_triples(profiles.len(), seed)?;
    let mut jobs = Vec::with_capacity(triples.len());
    for (g, triple) in triples.iter().enumerate() {
        let mut order = [triple[0], triple[1], triple[2]];
        // Independent presentation shuffle so position is not confounded
        // with whatever ordering the profile enumeration has.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (g as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        order.shuffle(&mut rng);
        let features = [
            derive_features(&config.features, &profiles[order[0]], brief)?,
            derive_features(&config.features, &profiles[order[1]], brief)?,
            derive_features(&config.features, &profiles[order[2]], brief)?,
        ];
        let group_id = content_hash(
            format!(
                "{}|{}|{}|{}",
                brief.brief_id,
                profiles[order[0]].profile_id,
                profiles[order[1]].profile_id,
                profiles[order[2]].profile_id
            )
            .as_bytes(),
        );
        jobs.push(RankJob { group_id, brief_id: brief.brief_id.clone(), features, prompt: None });
    }
    Ok(jobs)
}

fn rank_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?mi)^\s*\**\s*([1-3])\s*[.):\-]?\s*\**\s*profil\w*\s+([A-C])\b")
            .expect("rank pattern compiles")
    })
}

/// Extracts ranks from a reply of `1. Profil B` lines.
///
/// Returns the rank (1 = most likely hired) per presentation position
/// (A, B, C). Both the ranks and the labels must each appear exactly once;
/// restating a line identically is tolerated.
pub fn parse_ranking(raw: &str) -> Result<[u8; 3], HarnessError> {
    let mut ranks: [Option<u8>; 3] = [None; 3];
    let mut used_ranks: [bool; 3] = [false; 3];
    for caps in rank_line_re().captures_iter(raw) {
        let rank: u8 = caps[1].parse().expect("single digit");
        let label = caps[2].to_ascii_uppercase();
        let pos = RANK_LABELS.iter().position(|l| *l == label).expect("A-C by pattern");
        match ranks[pos] {
            None => {
                if used_ranks[rank as usize - 1] {
                    return Err(HarnessError::Parse(format!(
                        "rank {rank} assigned to two profiles"
                    )));
                }
                ranks[pos] = Some(rank);
                used_ranks[rank as usize - 1] = true;
            }
            Some(prev) if prev != rank => {
                return Err(HarnessError::Parse(format!(
                    "profile {label} ranked both {prev} and {rank}"
                )));
            }
            Some(_) => {}
        }
    }
    match ranks {
        [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
        _ => Err(HarnessError::Parse(format!(
            "reply does not rank all three profiles: {:?}",
            raw.chars().take(120).collect::<String>()
        ))),
    }
}

/// Something that answers a ranking prompt.
pub trait RankBackend: Sync {
    fn model_name(&self) -> &str;
    fn reply(&self, job: &RankJob) -> Result<String, HarnessError>;
}

impl RankBackend for SyntheticEvaluator {
    fn model_name(&self) -> &str {
        "synthetic"
    }

    /// Orders the triple by latent utility, best first. Ties keep
    /// presentation order, so the reply is always a valid strict ranking.
    fn reply(&self, job: &RankJob) -> Result<String, HarnessError> {
        let mut order: Vec<usize> = (0..3).collect();
        let utilities: Vec<f64> = job.features.iter().map(|f| self.utility(f)).collect();
        order.sort_by(|a, b| utilities[*b].total_cmp(&utilities[*a]));
        let lines: Vec<String> = order
            .iter()
            .enumerate()
            .map(|(rank, pos)| format!("{}. Profil {}", rank + 1, RANK_LABELS[*pos]))
            .collect();
        Ok(lines.join("\n"))
    }
}

impl RankBackend for HttpChatBackend {
    fn model_name(&self) -> &str {
        self.model()
    }

    fn reply(&self, job: &RankJob) -> Result<String, HarnessError> {
        let prompt = job.prompt.as_deref().ok_or_else(|| {
            HarnessError::Backend("live backend needs a rendered prompt".into())
        })?;
        self.complete(prompt)
    }
}

#[derive(Debug, Clone)]
pub struct RankingOutcome {
    pub completed: usize,
    pub cached: usize,
    pub failed: Vec<FailedCall>,
}

/// Ranks every job once, resuming from the store like the scoring campaign.
pub fn run_ranking_campaign(
    jobs: &[RankJob],
    backend: &dyn RankBackend,
    template_hash: &str,
    store: &mut RecordStore,
    concurrency: usize,
) -> Result<RankingOutcome, HarnessError> {
    let model = backend.model_name().to_string();
    let mut work: Vec<(usize, String)> = Vec::new();
    let mut cached = 0usize;
    for (j, job) in jobs.iter().enumerate() {
        let key = rank_cache_key(&job.group_id, template_hash, &model);
        if store.rank(&key).is_some() {
            cached += 1;
        } else {
            work.push((j, key));
        }
    }

    let mut failed = Vec::new();
    let mut completed = 0usize;
    if !work.is_empty() {
        let cursor = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<Result<RankRecord, FailedCall>>();
        let workers = concurrency.max(1).min(work.len());
        std::thread::scope(|scope| -> Result<(), HarnessError> {
            for _ in 0..workers {
                let tx = tx.clone();
                let work = &work;
                let cursor = &cursor;
                let model = &model;
                scope.spawn(move || loop {
                    let i = cursor.fetch_add(1, Ordering::Relaxed);
                    let Some((j, key)) = work.get(i) else { break };
                    let job = &jobs[*j];
                    let outcome = backend
                        .reply(job)
                        .and_then(|raw| parse_ranking(&raw).map(|ranks| (raw, ranks)))
                        .map(|(raw, ranks)| RankRecord {
                            cache_key: key.clone(),
                            group_id: job.group_id.clone(),
                            brief_id: job.brief_id.clone(),
                            model: model.clone(),
                            template_hash: template_hash.to_string(),
                            profile_ids: job.profile_ids(),
                            ranks: ranks.to_vec(),
                            raw_text: raw,
                        })
                        .map_err(|e| FailedCall {
                            pair_id: job.group_id.clone(),
                            run_index: 0,
                            error: e.to_string(),
                        });
                    if tx.send(outcome).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for outcome in rx {
                match outcome {
                    Ok(record) => {
                        store.append_rank(record)?;
                        completed += 1;
                    }
                    Err(failure) => failed.push(failure),
                }
            }
            Ok(())
        })?;
    }
    Ok(RankingOutcome { completed, cached, failed })
}

/// Regresses reversed ranks (3 = ranked first) on the main-effect dummies,
/// clustered by triple. Only fully-ranked groups contribute rows.
pub fn fit_rank_regression(
    jobs: &[RankJob],
    template_hash: &str,
    model: &str,
    store: &RecordStore,
) -> Result<FitResult, StatsError> {
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut clusters = Vec::new();
    for job in jobs {
        let key = rank_cache_key(&job.group_id, template_hash, model);
        let Some(record) = store.rank(&key) else { continue };
        for (pos, rank) in record.ranks.iter().enumerate() {
            data.push(job.features[pos].clone());
            y.push(4.0 - f64::from(*rank));
            clusters.push(job.group_id.clone());
        }
    }
    if data.is_empty() {
        return Err(StatsError::Degenerate("no completed rankings to fit".into()));
    }
    let spec = ModelSpec {
        cluster: ClusterKey::Custom("triple".into()),
        ..ModelSpec::main_effects("rank_score")
    };
    fit(&spec, &data, &y, &clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigBundle;
    use crate::design::{enumerate_briefs, enumerate_profiles};
    use crate::harness::synthetic::{Rounding, SyntheticEvaluatorSpec};
    use std::collections::BTreeMap;

    #[test]
    fn triples_partition_the_profiles() {
        let triples = sample_triples(11, 3).unwrap();
        assert_eq!(triples.len(), 3);
        let mut seen: Vec<usize> = triples.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 9);
        assert!(seen.iter().all(|i| *i < 11));
        assert_eq!(sample_triples(11, 3).unwrap(), triples);
        assert_ne!(sample_triples(11, 4).unwrap(), triples);
        assert!(sample_triples(2, 0).is_err());
    }

    #[test]
    fn ranking_replies_parse_into_position_ranks() {
        let ranks = parse_ranking("1. Profil B\n2. Profil A\n3. Profil C").unwrap();
        assert_eq!(ranks, [2, 1, 3]);
        let ranks = parse_ranking("**1) profil c**\n2 - Profil A\n3. Profil B").unwrap();
        assert_eq!(ranks, [2, 3, 1]);
        // French plural/inflection after "profil" still resolves the label.
        let ranks = parse_ranking("1. Profils B\n2. Profil C\n3. Profil A").unwrap();
        assert_eq!(ranks, [3, 1, 2]);
    }

    #[test]
    fn inconsistent_or_partial_rankings_are_rejected() {
        for raw in [
            "",
            "1. Profil A\n2. Profil B",
            "1. Profil A\n1. Profil B\n3. Profil C",
            "1. Profil A\n2. Profil A\n3. Profil C",
            "1. Profil A\n2. Profil B\n3. Profil C\n1. Profil B",
        ] {
            assert!(parse_ranking(raw).is_err(), "{raw:?} should not parse");
        }
        // Restating the same assignment is fine.
        assert!(parse_ranking("1. Profil A\n2. Profil B\n3. Profil C\n1. Profil A").is_ok());
    }

    #[test]
    fn synthetic_ranker_orders_by_utility_and_fits_back() {
        let bundle = ConfigBundle::load_named("desk-en").unwrap();
        let profiles = enumerate_profiles(&bundle.design).unwrap();
        let briefs = enumerate_briefs(&bundle.design).unwrap();
        let jobs = build_rank_jobs(&bundle.design, &profiles, &briefs[0], 5).unwrap();
        assert_eq!(jobs.len(), profiles.len() / 3);

        let eval = SyntheticEvaluator::new(SyntheticEvaluatorSpec {
            intercept: 2.0,
            weights: BTreeMap::from([
                ("skill:far".to_string(), -0.6),
                ("exp:below".to_string(), -1.0),
                ("rate:100".to_string(), -0.3),
            ]),
            interaction_weights: Vec::new(),
            noise_sd: 0.0,
            rounding: Rounding::None,
            seed: 0,
        })
        .unwrap();

        let dir = tempfile::tempdir().unwrap();
        let mut store = RecordStore::open(&dir.path().join("r.jsonl")).unwrap();
        let outcome = run_ranking_campaign(&jobs, &eval, "tmpl", &mut store, 3).unwrap();
        assert_eq!(outcome.completed, jobs.len());
        assert!(outcome.failed.is_empty());

        // Every stored ranking is consistent with the planted utility.
        for job in &jobs {
            let key = rank_cache_key(&job.group_id, "tmpl", "synthetic");
            let record = store.rank(&key).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    if record.ranks[a] < record.ranks[b] {
                        assert!(eval.utility(&job.features[a]) >= eval.utility(&job.features[b]));
                    }
                }
            }
        }

        let fit = fit_rank_regression(&jobs, "tmpl", "synthetic", &store).unwrap();
        assert_eq!(fit.n, jobs.len() * 3);
        assert_eq!(fit.n_clusters, jobs.len());
        // Signs of the planted weights come through the rank regression.
        assert!(fit.estimate("skill:far").unwrap() < 0.0);
        assert!(fit.estimate("exp:below").unwrap() < 0.0);
        assert!(fit.estimate("rate:100").unwrap() < 0.0);
    }
}
