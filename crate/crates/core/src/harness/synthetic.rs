use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::PairFeatures;
use crate::error::{HarnessError, StatsError};
use crate::stats::terms::{parse_column, Column, Moderator};

/// How the latent utility is quantized into an emitted score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    #[default]
    None,
    /// Round to the closest multiple of 0.5, matching evaluators that only
    /// ever emit whole and half scores.
    NearestHalf,
    NearestInt,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionWeight {
    /// Moderator in `key=level` / `brief.domain=level` form.
    pub moderator: String,
    /// Main-effect column name the moderator gates.
    pub column: String,
    pub weight: f64,
}

/// A planted linear evaluator: known ground truth for end-to-end recovery
/// tests and offline dry runs.
///
/// Weights are keyed by design-matrix column name, so a spec doubles as the
/// expected coefficient vector of the recovery fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticEvaluatorSpec {
    pub intercept: f64,
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub interaction_weights: Vec<InteractionWeight>,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub rounding: Rounding,
    #[serde(default)]
    pub seed: u64,
}

struct ResolvedTerm {
    column: Column,
    weight: f64,
}

/// Spec with column names resolved once, ready to evaluate rows.
pub struct SyntheticEvaluator {
    spec: SyntheticEvaluatorSpec,
    terms: Vec<ResolvedTerm>,
}

impl SyntheticEvaluator {
    pub fn new(spec: SyntheticEvaluatorSpec) -> Result<Self, StatsError> {
        let mut terms = Vec::new();
        for (name, weight) in &spec.weights {
            terms.push(ResolvedTerm { column: parse_column(name)?, weight: *weight });
        }
        for iw in &spec.interaction_weights {
            let base = parse_column(&iw.column)?;
            let moderator: Moderator = iw.moderator.parse()?;
            let (kind, level) = base.base.as_ref().expect("main column has a base");
            terms.push(ResolvedTerm {
                column: Column::interaction(*kind, level, moderator),
                weight: iw.weight,
            });
        }
        Ok(SyntheticEvaluator { spec, terms })
    }

    pub fn spec(&self) -> &SyntheticEvaluatorSpec {
        &self.spec
    }

    /// Noise-free, unclamped latent utility; the quantity rankings order by.
    pub fn utility(&self, features: &PairFeatures) -> f64 {
        self.spec.intercept
            + self
                .terms
                .iter()
                .map(|t| t.weight * t.column.value(features))
                .sum::<f64>()
    }

    /// Emitted score for one run: utility plus per-call noise, quantized and
    /// clamped to the 0..=10 scale. The noise stream is a pure function of
    /// (seed, pair id, run index), so reruns and resumed campaigns see the
    /// same draws.
    pub fn score(&self, features: &PairFeatures, run_index: u32) -> f64 {
        let mut value = self.utility(features);
        if self.spec.noise_sd > 0.0 {
            let mut hasher = Sha256::new();
            hasher.update(self.spec.seed.to_le_bytes());
            hasher.update(features.pair_id.to_string().as_bytes());
            hasher.update(run_index.to_le_bytes());
            let digest = hasher.finalize();
            let mut rng = ChaCha8Rng::from_seed(digest.into());
            let normal = Normal::new(0.0, self.spec.noise_sd).expect("positive sd");
            value += normal.sample(&mut rng);
        }
        value = match self.spec.rounding {
            Rounding::None => value,
            Rounding::NearestHalf => (value * 2.0).round() / 2.0,
            Rounding::NearestInt => value.round(),
        };
        value.clamp(0.0, 10.0)
    }

    /// Reply text in the format the scoring prompt demands.
    pub fn reply(&self, features: &PairFeatures, run_index: u32) -> String {
        let score = self.score(features, run_index);
        format!("Score : {score}/10\nJustification : Synthetic evaluation of the profile against the brief.")
    }
}

impl TryFrom<SyntheticEvaluatorSpec> for SyntheticEvaluator {
    type Error = HarnessError;

    fn try_from(spec: SyntheticEvaluatorSpec) -> Result<Self, HarnessError> {
        SyntheticEvaluator::new(spec).map_err(|e| HarnessError::Backend(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Education, ExperienceRel, NameGroup, PairId, ReputationLevel, SkillMatch};

    fn spec(noise_sd: f64, rounding: Rounding) -> SyntheticEvaluatorSpec {
        SyntheticEvaluatorSpec {
            intercept: 8.0,
            weights: BTreeMap::from([
                ("skill:far".to_string(), -0.69),
                ("rate:100".to_string(), -0.52),
                ("remote_mismatch".to_string(), -0.5),
            ]),
            interaction_weights: vec![InteractionWeight {
                moderator: "brief.work_location=remote_allowed".into(),
                column: "skill:far".into(),
                weight: -0.3,
            }],
            noise_sd,
            rounding,
            seed: 7,
        }
    }

    fn row(skill: SkillMatch, rate: i32, remote_allowed: bool) -> PairFeatures {
        PairFeatures {
            pair_id: PairId { profile_id: "p1".into(), brief_id: "b1".into() },
            skill_match: skill,
            experience_rel: ExperienceRel::Match,
            rate_delta_eur: rate,
            remote_mismatch: false,
            parttime_mismatch: false,
            industry_match: true,
            past_firm_large: true,
            reputation_level: ReputationLevel::ExpertBadge,
            education: Education::Master,
            name_group: NameGroup::MaleEu,
            brief_levels: BTreeMap::from([(
                "work_location".to_string(),
                if remote_allowed { "remote_allowed" } else { "onsite_required" }.to_string(),
            )]),
        }
    }

    #[test]
    fn utility_is_the_planted_linear_form() {
        let eval = SyntheticEvaluator::new(spec(0.0, Rounding::None)).unwrap();
        assert_eq!(eval.utility(&row(SkillMatch::Exact, 0, false)), 8.0);
        assert!((eval.utility(&row(SkillMatch::Far, 100, false)) - (8.0 - 0.69 - 0.52)).abs() < 1e-12);
        // Brief moderator adds its gated weight on top of the main effect.
        assert!((eval.utility(&row(SkillMatch::Far, 0, true)) - (8.0 - 0.69 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn noise_is_deterministic_per_pair_and_run() {
        let eval = SyntheticEvaluator::new(spec(0.1, Rounding::None)).unwrap();
        let r = row(SkillMatch::Exact, 0, false);
        assert_eq!(eval.score(&r, 0), eval.score(&r, 0));
        assert_ne!(eval.score(&r, 0), eval.score(&r, 1));
    }

    #[test]
    fn rounding_and_clamping_apply_after_noise() {
        let mut s = spec(0.0, Rounding::NearestHalf);
        s.intercept = 10.7;
        let eval = SyntheticEvaluator::new(s).unwrap();
        assert_eq!(eval.score(&row(SkillMatch::Exact, 0, false), 0), 10.0);
        assert_eq!(eval.score(&row(SkillMatch::Far, 100, false), 0), 9.5);
    }

    #[test]
    fn reply_round_trips_through_the_parser() {
        let eval = SyntheticEvaluator::new(spec(0.1, Rounding::NearestHalf)).unwrap();
        let r = row(SkillMatch::Far, 100, true);
        let reply = eval.reply(&r, 2);
        let parsed = crate::harness::parse::parse_score(&reply).unwrap();
        assert_eq!(parsed.score, eval.score(&r, 2));
    }

    #[test]
    fn unknown_weight_name_is_rejected() {
        let mut s = spec(0.0, Rounding::None);
        s.weights.insert("bogus:level".into(), 1.0);
        assert!(SyntheticEvaluator::new(s).is_err());
    }
}
