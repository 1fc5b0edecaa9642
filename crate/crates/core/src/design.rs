//! Full factorial design enumeration.
//!
//! A [`DesignConfig`] declares the attribute universe for freelancer profiles
//! and project briefs. Enumeration produces the full Cartesian product of
//! levels in a deterministic order, and [`derive_features`] maps each
//! profile-brief pair onto the matching features used by the regression
//! engine.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DesignError;
use crate::ids::content_hash;

/// One attribute level: a stable identifier plus a display label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub id: String,
    pub label: String,
}

/// A categorical attribute with an explicit reference level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeDomain {
    pub name: String,
    /// Placeholder name used by templates (`{{render_key}}`).
    pub render_key: String,
    pub reference_level: String,
    pub levels: Vec<Level>,
}

impl AttributeDomain {
    pub fn level_ids(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().map(|l| l.id.as_str())
    }

    pub fn has_level(&self, id: &str) -> bool {
        self.levels.iter().any(|l| l.id == id)
    }

    fn validate(&self) -> Result<(), DesignError> {
        if self.levels.is_empty() {
            return Err(DesignError::Config(format!(
                "domain `{}` has no levels",
                self.name
            )));
        }
        let mut seen = BTreeSet::new();
        for l in &self.levels {
            if !seen.insert(l.id.as_str()) {
                return Err(DesignError::Config(format!(
                    "domain `{}` has duplicate level `{}`",
                    self.name, l.id
                )));
            }
        }
        if !self.has_level(&self.reference_level) {
            return Err(DesignError::Config(format!(
                "domain `{}` reference level `{}` is not among its levels",
                self.name, self.reference_level
            )));
        }
        Ok(())
    }
}

/// Declarative universe of profile and brief attributes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignConfig {
    pub name: String,
    pub locale: String,
    pub occupation: String,
    pub profile_domains: Vec<AttributeDomain>,
    pub brief_domains: Vec<AttributeDomain>,
    /// Dimensions held constant across all briefs (level assignments).
    pub brief_constants: BTreeMap<String, String>,
    pub features: FeatureRules,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl DesignConfig {
    pub fn validate(&self) -> Result<(), DesignError> {
        if self.profile_domains.is_empty() {
            return Err(DesignError::Config("no profile domains configured".into()));
        }
        if self.brief_domains.is_empty() {
            return Err(DesignError::Config("no brief domains configured".into()));
        }
        let mut names = BTreeSet::new();
        for d in self.profile_domains.iter().chain(&self.brief_domains) {
            d.validate()?;
            if !names.insert(d.name.as_str()) {
                return Err(DesignError::Config(format!(
                    "domain name `{}` declared twice",
                    d.name
                )));
            }
        }
        for key in self.brief_constants.keys() {
            if self.brief_domains.iter().any(|d| &d.name == key) {
                return Err(DesignError::Config(format!(
                    "brief constant `{key}` collides with a varied brief domain"
                )));
            }
        }
        self.features.validate(self)?;
        Ok(())
    }

    pub fn profile_domain(&self, name: &str) -> Option<&AttributeDomain> {
        self.profile_domains.iter().find(|d| d.name == name)
    }

    pub fn brief_domain(&self, name: &str) -> Option<&AttributeDomain> {
        self.brief_domains.iter().find(|d| d.name == name)
    }

    /// Number of profiles in the full factorial (product of level counts).
    pub fn profile_count(&self) -> usize {
        self.profile_domains.iter().map(|d| d.levels.len()).product()
    }

    pub fn brief_count(&self) -> usize {
        self.brief_domains.iter().map(|d| d.levels.len()).product()
    }
}

/// One factorial profile cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub profile_id: String,
    pub assignments: BTreeMap<String, String>,
}

/// One factorial brief cell, with the constant dimensions copied in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BriefSpec {
    pub brief_id: String,
    pub assignments: BTreeMap<String, String>,
    pub constants: BTreeMap<String, String>,
}

fn assignments_hash(assignments: &BTreeMap<String, String>) -> String {
    let canonical: Vec<String> = assignments
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    content_hash(canonical.join(";").as_bytes())
}

/// Odometer over domain levels, first declared domain most significant.
fn cartesian(domains: &[AttributeDomain]) -> impl Iterator<Item = BTreeMap<String, String>> + '_ {
    let radices: Vec<usize> = domains.iter().map(|d| d.levels.len()).collect();
    let total: usize = radices.iter().product();
    (0..total).map(move |mut idx| {
        let mut assignment = BTreeMap::new();
        for (d, &r) in domains.iter().zip(&radices).rev() {
            let level = &d.levels[idx % r];
            assignment.insert(d.name.clone(), level.id.clone());
            idx /= r;
        }
        assignment
    })
}

/// Enumerate the full factorial profile set in deterministic order.
pub fn enumerate_profiles(config: &DesignConfig) -> Result<Vec<ProfileSpec>, DesignError> {
    config.validate()?;
    Ok(cartesian(&config.profile_domains)
        .map(|assignments| ProfileSpec {
            profile_id: assignments_hash(&assignments),
            assignments,
        })
        .collect())
}

/// Enumerate the full factorial brief set in deterministic order.
pub fn enumerate_briefs(config: &DesignConfig) -> Result<Vec<BriefSpec>, DesignError> {
    config.validate()?;
    Ok(cartesian(&config.brief_domains)
        .map(|assignments| BriefSpec {
            brief_id: assignments_hash(&assignments),
            assignments,
            constants: config.brief_constants.clone(),
        })
        .collect())
}

/// Streaming cross product of profiles and briefs, brief-major order.
pub fn enumerate_pairs<'a>(
    profiles: &'a [ProfileSpec],
    briefs: &'a [BriefSpec],
) -> impl Iterator<Item = (&'a ProfileSpec, &'a BriefSpec)> {
    briefs
        .iter()
        .flat_map(move |b| profiles.iter().map(move |p| (p, b)))
}

/// Identifier of a profile-brief pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId {
    pub profile_id: String,
    pub brief_id: String,
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.profile_id, self.brief_id)
    }
}

macro_rules! level_enum {
    ($name:ident { $($variant:ident => $id:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(&self) -> &'static str {
                match self { $(Self::$variant => $id),+ }
            }
        }

        impl FromStr for $name {
            type Err = DesignError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($id => Ok(Self::$variant),)+
                    other => Err(DesignError::Feature(format!(
                        "unknown {} level `{}`", stringify!($name), other
                    ))),
                }
            }
        }
    };
}

level_enum!(SkillMatch { Exact => "exact", Close => "close", Far => "far" });
level_enum!(ExperienceRel { Below => "below", Match => "match", Above => "above" });
level_enum!(ReputationLevel {
    None => "none",
    Starter => "starter",
    StarterBadge => "starter_badge",
    Expert => "expert",
    ExpertBadge => "expert_badge",
});
level_enum!(Education { Bachelor => "bachelor", Master => "master" });
level_enum!(NameGroup { MaleEu => "male_eu", FemaleEu => "female_eu", MaleArabic => "male_arabic" });

/// Matching features derived from one profile-brief pair.
///
/// Every field is a pure function of the two specs. `brief_levels` carries the
/// brief's varied assignments so brief-moderated models can be built from
/// features alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures {
    pub pair_id: PairId,
    pub skill_match: SkillMatch,
    pub experience_rel: ExperienceRel,
    pub rate_delta_eur: i32,
    pub remote_mismatch: bool,
    pub parttime_mismatch: bool,
    pub industry_match: bool,
    pub past_firm_large: bool,
    pub reputation_level: ReputationLevel,
    pub education: Education,
    pub name_group: NameGroup,
    pub brief_levels: BTreeMap<String, String>,
}

/// Config-driven rules mapping raw level assignments onto matching features.
///
/// Keeping the mapping in the config is what makes an occupation swap a pure
/// config change: the SEO variant renames the skill levels and the industry
/// universe without touching code.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRules {
    pub skill: SkillRule,
    pub experience: ExperienceRule,
    pub rate: RateRule,
    pub remote: MismatchRule,
    pub work_time: MismatchRule,
    pub industry: MatchRule,
    pub firm: MatchRule,
    pub reputation: DomainRef,
    pub education: DomainRef,
    pub name: DomainRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkillRule {
    pub profile_domain: String,
    /// Level id -> exact/close/far relative to the brief's constant requirement.
    pub classes: BTreeMap<String, SkillMatch>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperienceRule {
    pub profile_domain: String,
    pub years: BTreeMap<String, u32>,
    pub required_years: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRule {
    pub profile_domain: String,
    pub eur: BTreeMap<String, i32>,
    pub brief_rate_eur: i32,
}

/// Symmetric preference-vs-requirement mismatch between a profile domain and a
/// brief domain; `pairing` maps each profile level to the brief level it is
/// compatible with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MismatchRule {
    pub profile_domain: String,
    pub brief_domain: String,
    pub pairing: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchRule {
    pub profile_domain: String,
    pub match_level: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainRef {
    pub profile_domain: String,
}

impl FeatureRules {
    fn validate(&self, config: &DesignConfig) -> Result<(), DesignError> {
        let profile_domain = |name: &str| {
            config.profile_domain(name).ok_or_else(|| {
                DesignError::Config(format!("feature rule references unknown profile domain `{name}`"))
            })
        };
        let skill_domain = profile_domain(&self.skill.profile_domain)?;
        for id in skill_domain.level_ids() {
            if !self.skill.classes.contains_key(id) {
                return Err(DesignError::Config(format!(
                    "skill class missing for level `{id}`"
                )));
            }
        }
        let exp_domain = profile_domain(&self.experience.profile_domain)?;
        for id in exp_domain.level_ids() {
            if !self.experience.years.contains_key(id) {
                return Err(DesignError::Config(format!(
                    "experience years missing for level `{id}`"
                )));
            }
        }
        let rate_domain = profile_domain(&self.rate.profile_domain)?;
        for id in rate_domain.level_ids() {
            if !self.rate.eur.contains_key(id) {
                return Err(DesignError::Config(format!("rate missing for level `{id}`")));
            }
        }
        for rule in [&self.remote, &self.work_time] {
            let pd = profile_domain(&rule.profile_domain)?;
            config.brief_domain(&rule.brief_domain).ok_or_else(|| {
                DesignError::Config(format!(
                    "feature rule references unknown brief domain `{}`",
                    rule.brief_domain
                ))
            })?;
            for id in pd.level_ids() {
                if !rule.pairing.contains_key(id) {
                    return Err(DesignError::Config(format!(
                        "pairing missing for profile level `{id}` of `{}`",
                        rule.profile_domain
                    )));
                }
            }
        }
        for rule in [&self.industry, &self.firm] {
            let pd = profile_domain(&rule.profile_domain)?;
            if !pd.has_level(&rule.match_level) {
                return Err(DesignError::Config(format!(
                    "match level `{}` not in domain `{}`",
                    rule.match_level, rule.profile_domain
                )));
            }
        }
        // Reputation, education and name domains must use the canonical ids.
        let rep_domain = profile_domain(&self.reputation.profile_domain)?;
        for id in rep_domain.level_ids() {
            ReputationLevel::from_str(id)
                .map_err(|_| DesignError::Config(format!("non-canonical reputation level `{id}`")))?;
        }
        let edu_domain = profile_domain(&self.education.profile_domain)?;
        for id in edu_domain.level_ids() {
            Education::from_str(id)
                .map_err(|_| DesignError::Config(format!("non-canonical education level `{id}`")))?;
        }
        let name_domain = profile_domain(&self.name.profile_domain)?;
        for id in name_domain.level_ids() {
            NameGroup::from_str(id)
                .map_err(|_| DesignError::Config(format!("non-canonical name level `{id}`")))?;
        }
        Ok(())
    }

    /// All rate deltas the configured levels can produce, sorted ascending.
    pub fn rate_deltas(&self) -> Vec<i32> {
        let mut deltas: Vec<i32> = self
            .rate
            .eur
            .values()
            .map(|e| e - self.rate.brief_rate_eur)
            .collect();
        deltas.sort_unstable();
        deltas.dedup();
        deltas
    }
}

fn assignment<'a>(
    map: &'a BTreeMap<String, String>,
    domain: &str,
    side: &str,
) -> Result<&'a str, DesignError> {
    map.get(domain)
        .map(String::as_str)
        .ok_or_else(|| DesignError::Feature(format!("{side} has no assignment for domain `{domain}`")))
}

/// Derive the matching features for one profile-brief pair.
pub fn derive_features(
    rules: &FeatureRules,
    profile: &ProfileSpec,
    brief: &BriefSpec,
) -> Result<PairFeatures, DesignError> {
    let skill_level = assignment(&profile.assignments, &rules.skill.profile_domain, "profile")?;
    let skill_match = *rules.skill.classes.get(skill_level).ok_or_else(|| {
        DesignError::Feature(format!("no skill class for level `{skill_level}`"))
    })?;

    let exp_level = assignment(&profile.assignments, &rules.experience.profile_domain, "profile")?;
    let years = *rules.experience.years.get(exp_level).ok_or_else(|| {
        DesignError::Feature(format!("no years mapping for level `{exp_level}`"))
    })?;
    let experience_rel = match years.cmp(&rules.experience.required_years) {
        std::cmp::Ordering::Less => ExperienceRel::Below,
        std::cmp::Ordering::Equal => ExperienceRel::Match,
        std::cmp::Ordering::Greater => ExperienceRel::Above,
    };

    let rate_level = assignment(&profile.assignments, &rules.rate.profile_domain, "profile")?;
    let rate_eur = *rules.rate.eur.get(rate_level).ok_or_else(|| {
        DesignError::Feature(format!("no rate mapping for level `{rate_level}`"))
    })?;
    let rate_delta_eur = rate_eur - rules.rate.brief_rate_eur;

    let mismatch = |rule: &MismatchRule| -> Result<bool, DesignError> {
        let p = assignment(&profile.assignments, &rule.profile_domain, "profile")?;
        let b = assignment(&brief.assignments, &rule.brief_domain, "brief")?;
        let compatible = rule.pairing.get(p).ok_or_else(|| {
            DesignError::Feature(format!("no pairing for profile level `{p}`"))
        })?;
        Ok(compatible != b)
    };
    let remote_mismatch = mismatch(&rules.remote)?;
    let parttime_mismatch = mismatch(&rules.work_time)?;

    let industry_level = assignment(&profile.assignments, &rules.industry.profile_domain, "profile")?;
    let industry_match = industry_level == rules.industry.match_level;
    let firm_level = assignment(&profile.assignments, &rules.firm.profile_domain, "profile")?;
    let past_firm_large = firm_level == rules.firm.match_level;

    let reputation_level =
        assignment(&profile.assignments, &rules.reputation.profile_domain, "profile")?.parse()?;
    let education =
        assignment(&profile.assignments, &rules.education.profile_domain, "profile")?.parse()?;
    let name_group =
        assignment(&profile.assignments, &rules.name.profile_domain, "profile")?.parse()?;

    Ok(PairFeatures {
        pair_id: PairId {
            profile_id: profile.profile_id.clone(),
            brief_id: brief.brief_id.clone(),
        },
        skill_match,
        experience_rel,
        rate_delta_eur,
        remote_mismatch,
        parttime_mismatch,
        industry_match,
        past_firm_large,
        reputation_level,
        education,
        name_group,
        brief_levels: brief.assignments.clone(),
    })
}
