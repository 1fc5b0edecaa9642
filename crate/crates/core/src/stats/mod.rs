//! Effect estimation: dummy-coded OLS with cluster-robust inference,
//! plus the summary tables built on top of a fit.

pub mod cluster;
pub mod fit;
pub mod ols;
pub mod summary;
pub mod terms;

pub use cluster::{cluster_robust_cov, CovAdjustment};
pub use fit::{
    brief_clusters, build_design_matrix, fit, ClusterKey, Coefficient, FitResult,
    InteractionBlock, ModelSpec,
};
pub use ols::{solve_least_squares, OlsSolution};
pub use summary::{max_effect_table, normalized_weights, MaxEffectRow, NormalizedWeight};
pub use terms::{group_label, level_id, main_columns, Column, Moderator, TermKind, ALL_TERMS};
