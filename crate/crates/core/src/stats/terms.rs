use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::PairFeatures;
use crate::error::StatsError;

/// One matching dimension of the design, in canonical declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Skill,
    Experience,
    Rate,
    RemoteMismatch,
    ParttimeMismatch,
    Reputation,
    Education,
    Name,
    Industry,
    Firm,
}

pub const ALL_TERMS: [TermKind; 10] = [
    TermKind::Skill,
    TermKind::Experience,
    TermKind::Rate,
    TermKind::RemoteMismatch,
    TermKind::ParttimeMismatch,
    TermKind::Reputation,
    TermKind::Education,
    TermKind::Name,
    TermKind::Industry,
    TermKind::Firm,
];

impl TermKind {
    pub fn prefix(self) -> &'static str {
        match self {
            TermKind::Skill => "skill",
            TermKind::Experience => "exp",
            TermKind::Rate => "rate",
            TermKind::RemoteMismatch => "remote_mismatch",
            TermKind::ParttimeMismatch => "parttime_mismatch",
            TermKind::Reputation => "rep",
            TermKind::Education => "edu",
            TermKind::Name => "name",
            TermKind::Industry => "industry",
            TermKind::Firm => "firm",
        }
    }

    /// Non-reference level ids, in reporting order. Rate levels depend on the
    /// design and are enumerated from the data instead.
    fn fixed_levels(self) -> &'static [&'static str] {
        match self {
            TermKind::Skill => &["close", "far"],
            TermKind::Experience => &["below", "above"],
            TermKind::Rate => &[],
            TermKind::RemoteMismatch | TermKind::ParttimeMismatch => &["1"],
            TermKind::Reputation => &["none", "starter", "starter_badge", "expert"],
            TermKind::Education => &["bachelor"],
            TermKind::Name => &["female_eu", "male_arabic"],
            TermKind::Industry => &["mismatch"],
            TermKind::Firm => &["sme"],
        }
    }
}

/// Canonical level id a pair occupies on a given dimension.
pub fn level_id(features: &PairFeatures, kind: TermKind) -> String {
    match kind {
        TermKind::Skill => features.skill_match.as_str().to_string(),
        TermKind::Experience => features.experience_rel.as_str().to_string(),
        TermKind::Rate => features.rate_delta_eur.to_string(),
        TermKind::RemoteMismatch => (features.remote_mismatch as u8).to_string(),
        TermKind::ParttimeMismatch => (features.parttime_mismatch as u8).to_string(),
        TermKind::Reputation => features.reputation_level.as_str().to_string(),
        TermKind::Education => features.education.as_str().to_string(),
        TermKind::Name => features.name_group.as_str().to_string(),
        TermKind::Industry => if features.industry_match { "match" } else { "mismatch" }.to_string(),
        TermKind::Firm => if features.past_firm_large { "large" } else { "sme" }.to_string(),
    }
}

fn column_name(kind: TermKind, level: &str) -> String {
    match kind {
        TermKind::RemoteMismatch | TermKind::ParttimeMismatch => kind.prefix().to_string(),
        _ => format!("{}:{}", kind.prefix(), level),
    }
}

/// Reporting group a dummy belongs to; the two name contrasts are reported as
/// separate groups.
pub fn group_label(kind: TermKind, level: &str) -> &'static str {
    match kind {
        TermKind::Skill => "Skills",
        TermKind::Experience => "Exp.",
        TermKind::Rate => "Rate",
        TermKind::RemoteMismatch => "Remote",
        TermKind::ParttimeMismatch => "P-time",
        TermKind::Reputation => "Rep.",
        TermKind::Education => "Educ.",
        TermKind::Name => {
            if level == "female_eu" {
                "Female"
            } else {
                "Arabic"
            }
        }
        TermKind::Industry => "Industry",
        TermKind::Firm => "Firm",
    }
}

/// Interaction moderator: either a profile-side level on one of the matching
/// dimensions, or a varied brief attribute level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moderator {
    Profile { kind: TermKind, level: String },
    Brief { domain: String, level: String },
}

impl Moderator {
    pub fn value(&self, features: &PairFeatures) -> f64 {
        let on = match self {
            Moderator::Profile { kind, level } => level_id(features, *kind) == *level,
            Moderator::Brief { domain, level } => {
                features.brief_levels.get(domain).map(String::as_str) == Some(level.as_str())
            }
        };
        on as u8 as f64
    }

    /// The term whose own dummies the moderator duplicates, if any. Interacting
    /// a profile moderator with its source term would generate an all-zero or
    /// collinear column.
    pub fn source_term(&self) -> Option<TermKind> {
        match self {
            Moderator::Profile { kind, .. } => Some(*kind),
            Moderator::Brief { .. } => None,
        }
    }
}

impl fmt::Display for Moderator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Moderator::Profile { kind, level } => write!(f, "{}={}", kind.prefix(), level),
            Moderator::Brief { domain, level } => write!(f, "brief.{domain}={level}"),
        }
    }
}

impl FromStr for Moderator {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lhs, level) = s
            .split_once('=')
            .ok_or_else(|| StatsError::Shape(format!("moderator `{s}` is not `key=level`")))?;
        let level = level.to_string();
        if let Some(domain) = lhs.strip_prefix("brief.") {
            return Ok(Moderator::Brief { domain: domain.to_string(), level });
        }
        let kind = ALL_TERMS
            .into_iter()
            .find(|k| k.prefix() == lhs)
            .ok_or_else(|| StatsError::Shape(format!("unknown moderator dimension `{lhs}`")))?;
        Ok(Moderator::Profile { kind, level })
    }
}

/// One estimable column of the design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// Dummy this column encodes; `None` for the intercept.
    pub base: Option<(TermKind, String)>,
    /// Set on interaction columns; the value is the base dummy times this.
    pub moderator: Option<Moderator>,
    /// Reporting group for main-effect columns.
    pub group: Option<String>,
}

impl Column {
    pub fn intercept() -> Self {
        Column { name: "intercept".into(), base: None, moderator: None, group: None }
    }

    pub fn main(kind: TermKind, level: &str) -> Self {
        Column {
            name: column_name(kind, level),
            base: Some((kind, level.to_string())),
            moderator: None,
            group: Some(group_label(kind, level).to_string()),
        }
    }

    pub fn interaction(kind: TermKind, level: &str, moderator: Moderator) -> Self {
        Column {
            name: format!("{}*{}", column_name(kind, level), moderator),
            base: Some((kind, level.to_string())),
            moderator: Some(moderator),
            group: None,
        }
    }

    pub fn is_main(&self) -> bool {
        self.base.is_some() && self.moderator.is_none()
    }

    pub fn value(&self, features: &PairFeatures) -> f64 {
        let base = match &self.base {
            None => 1.0,
            Some((kind, level)) => (level_id(features, *kind) == *level) as u8 as f64,
        };
        match &self.moderator {
            None => base,
            Some(m) => base * m.value(features),
        }
    }
}

/// Parses a main-effect column name like `skill:far` or `remote_mismatch`
/// back into a column; the inverse of `Column::main` naming.
pub fn parse_column(name: &str) -> Result<Column, StatsError> {
    if let Some(kind) = ALL_TERMS.into_iter().find(|k| k.prefix() == name) {
        if matches!(kind, TermKind::RemoteMismatch | TermKind::ParttimeMismatch) {
            return Ok(Column::main(kind, "1"));
        }
    }
    let (prefix, level) = name
        .split_once(':')
        .ok_or_else(|| StatsError::Shape(format!("column `{name}` is not `dim:level`")))?;
    let kind = ALL_TERMS
        .into_iter()
        .find(|k| k.prefix() == prefix)
        .ok_or_else(|| StatsError::Shape(format!("unknown dimension `{prefix}`")))?;
    Ok(Column::main(kind, level))
}

/// Main-effect columns for `kind` that actually vary in `data`. Single-level
/// dimensions contribute nothing, so compact designs stay full rank.
pub fn main_columns(kind: TermKind, data: &[PairFeatures]) -> Vec<Column> {
    let observed: BTreeSet<String> = data.iter().map(|f| level_id(f, kind)).collect();
    if observed.len() < 2 {
        return Vec::new();
    }
    if kind == TermKind::Rate {
        let mut deltas: Vec<i32> = observed.iter().map(|s| s.parse().unwrap()).collect();
        deltas.sort_unstable();
        return deltas
            .into_iter()
            .filter(|d| *d != 0)
            .map(|d| Column::main(kind, &d.to_string()))
            .collect();
    }
    kind.fixed_levels()
        .iter()
        .filter(|level| observed.contains(**level))
        .map(|level| Column::main(kind, level))
        .collect()
}
