use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::design::PairFeatures;
use crate::error::StatsError;
use crate::ids::content_hash;
use crate::stats::cluster::{cluster_count, cluster_robust_cov, CovAdjustment};
use crate::stats::ols::solve_least_squares;
use crate::stats::terms::{main_columns, Column, Moderator, TermKind, ALL_TERMS};

/// What the rows are clustered on for inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKey {
    /// One cluster per brief; scores of the same brief share shocks.
    Brief,
    /// Caller-supplied labels (e.g. ranking triples).
    Custom(String),
}

/// A moderator crossed with a set of main terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionBlock {
    pub moderator: Moderator,
    pub interacted: Vec<TermKind>,
}

/// Full description of a regression: which dummies enter, which interactions
/// are added, and how inference is clustered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub response: String,
    pub terms: Vec<TermKind>,
    pub interactions: Vec<InteractionBlock>,
    pub cluster: ClusterKey,
    pub adjustment: CovAdjustment,
}

impl ModelSpec {
    pub fn main_effects(response: &str) -> Self {
        ModelSpec {
            response: response.to_string(),
            terms: ALL_TERMS.to_vec(),
            interactions: Vec::new(),
            cluster: ClusterKey::Brief,
            adjustment: CovAdjustment::Cr1,
        }
    }

    /// Main effects plus the moderator crossed with every term except its own
    /// source dimension (whose dummies already absorb the moderator level).
    pub fn with_moderator(response: &str, moderator: Moderator) -> Self {
        let interacted =
            ALL_TERMS.into_iter().filter(|k| Some(*k) != moderator.source_term()).collect();
        ModelSpec {
            interactions: vec![InteractionBlock { moderator, interacted }],
            ..ModelSpec::main_effects(response)
        }
    }

    /// Brief-moderated variant restricted to the terms the moderator can
    /// plausibly gate: fit dimensions rather than identity dummies.
    pub fn with_brief_moderator(response: &str, domain: &str, level: &str) -> Self {
        let moderator =
            Moderator::Brief { domain: domain.to_string(), level: level.to_string() };
        ModelSpec {
            interactions: vec![InteractionBlock {
                moderator,
                interacted: vec![
                    TermKind::Skill,
                    TermKind::Experience,
                    TermKind::Rate,
                    TermKind::RemoteMismatch,
                    TermKind::ParttimeMismatch,
                    TermKind::Industry,
                ],
            }],
            ..ModelSpec::main_effects(response)
        }
    }

    pub fn hash(&self) -> String {
        content_hash(serde_json::to_string(self).expect("model spec serializes").as_bytes())
    }

    /// Intercept, observed main-effect dummies, then interaction columns.
    pub fn columns(&self, data: &[PairFeatures]) -> Result<Vec<Column>, StatsError> {
        let mut cols = vec![Column::intercept()];
        for kind in &self.terms {
            cols.extend(main_columns(*kind, data));
        }
        for block in &self.interactions {
            let varies = data.iter().any(|f| block.moderator.value(f) == 0.0)
                && data.iter().any(|f| block.moderator.value(f) == 1.0);
            if !varies {
                return Err(StatsError::Inference(format!(
                    "moderator `{}` does not vary in the data",
                    block.moderator
                )));
            }
            for kind in &block.interacted {
                for base in main_columns(*kind, data) {
                    let (k, level) = base.base.as_ref().expect("main column has a base");
                    cols.push(Column::interaction(*k, level, block.moderator.clone()));
                    debug_assert_eq!(*k, *kind);
                }
            }
        }
        Ok(cols)
    }
}

/// One estimated coefficient with cluster-robust inference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coefficient {
    pub column: Column,
    pub estimate: f64,
    pub robust_se: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

/// A fitted model: coefficients plus fit diagnostics, tagged with the spec
/// hash so exported tables can be traced to the exact model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub spec_hash: String,
    pub response: String,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub n: usize,
    pub k: usize,
    pub n_clusters: usize,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.column.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.coefficient(name).map(|c| c.estimate)
    }
}

pub fn build_design_matrix(columns: &[Column], data: &[PairFeatures]) -> Array2<f64> {
    let mut x = Array2::zeros((data.len(), columns.len()));
    for (i, f) in data.iter().enumerate() {
        for (j, col) in columns.iter().enumerate() {
            x[[i, j]] = col.value(f);
        }
    }
    x
}

/// Fits `spec` by OLS and attaches cluster-robust standard errors with
/// t(G-1) p-values, G being the number of clusters.
pub fn fit(
    spec: &ModelSpec,
    data: &[PairFeatures],
    y: &[f64],
    clusters: &[String],
) -> Result<FitResult, StatsError> {
    let columns = spec.columns(data)?;
    let names: Vec<String> = columns.iter().map(|c| c.name.clone()).collect();
    let x = build_design_matrix(&columns, data);
    let yv = Array1::from_vec(y.to_vec());
    let sol = solve_least_squares(&x, &yv, &names)?;
    let cov = cluster_robust_cov(&x, &sol.residuals, &sol.xtx_inv, clusters, spec.adjustment)?;
    let g = cluster_count(clusters);
    let df = (g - 1) as f64;
    let t_dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| StatsError::Inference(format!("t({df}) distribution: {e}")))?;

    let coefficients = columns
        .into_iter()
        .enumerate()
        .map(|(j, column)| {
            let estimate = sol.beta[j];
            let robust_se = cov[[j, j]].max(0.0).sqrt();
            let (t_stat, p_value) = if robust_se > 0.0 {
                let t = estimate / robust_se;
                (t, 2.0 * (1.0 - t_dist.cdf(t.abs())))
            } else if estimate == 0.0 {
                (0.0, 1.0)
            } else {
                (f64::INFINITY * estimate.signum(), 0.0)
            };
            Coefficient { column, estimate, robust_se, t_stat, p_value }
        })
        .collect();

    Ok(FitResult {
        spec_hash: spec.hash(),
        response: spec.response.clone(),
        coefficients,
        r_squared: sol.r_squared,
        n: sol.n,
        k: sol.k,
        n_clusters: g,
    })
}

/// Brief-id cluster labels for a feature slice.
pub fn brief_clusters(data: &[PairFeatures]) -> Vec<String> {
    data.iter().map(|f| f.pair_id.brief_id.clone()).collect()
}
