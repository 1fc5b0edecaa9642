use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::stats::fit::FitResult;

/// One row of the per-dimension maximum-effect table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxEffectRow {
    pub group: String,
    pub column: String,
    pub estimate: f64,
    pub rank: usize,
}

/// Largest main effect per reporting group, ranked by absolute size. Ties
/// within a group keep the first-declared column; ranks are 1-based.
pub fn max_effect_table(fit: &FitResult) -> Vec<MaxEffectRow> {
    let mut rows: Vec<MaxEffectRow> = Vec::new();
    for c in &fit.coefficients {
        let Some(group) = c.column.group.as_ref().filter(|_| c.column.is_main()) else {
            continue;
        };
        match rows.iter_mut().find(|r| r.group == *group) {
            Some(row) => {
                if c.estimate.abs() > row.estimate.abs() {
                    row.column = c.column.name.clone();
                    row.estimate = c.estimate;
                }
            }
            None => rows.push(MaxEffectRow {
                group: group.clone(),
                column: c.column.name.clone(),
                estimate: c.estimate,
                rank: 0,
            }),
        }
    }
    rows.sort_by(|a, b| b.estimate.abs().total_cmp(&a.estimate.abs()));
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    rows
}

/// A main-effect estimate rescaled to the share of total absolute effect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizedWeight {
    pub column: String,
    pub estimate: f64,
    /// |estimate| / sum of |estimate| over main effects; shares sum to 1.
    pub share: f64,
}

pub fn normalized_weights(fit: &FitResult) -> Result<Vec<NormalizedWeight>, StatsError> {
    let mains: Vec<_> = fit.coefficients.iter().filter(|c| c.column.is_main()).collect();
    let total: f64 = mains.iter().map(|c| c.estimate.abs()).sum();
    if total <= 0.0 {
        return Err(StatsError::Degenerate(
            "all main effects are zero; shares are undefined".into(),
        ));
    }
    Ok(mains
        .into_iter()
        .map(|c| NormalizedWeight {
            column: c.column.name.clone(),
            estimate: c.estimate,
            share: c.estimate.abs() / total,
        })
        .collect())
}
