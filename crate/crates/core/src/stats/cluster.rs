use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::StatsError;

/// Small-sample correction applied to the sandwich covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovAdjustment {
    /// Plain sandwich, no correction.
    Cr0,
    /// Scales by G/(G-1) * (N-1)/(N-k).
    Cr1,
}

/// Cluster-robust covariance of the OLS coefficients: the sandwich
/// (X'X)^-1 [ sum_g s_g s_g' ] (X'X)^-1 with s_g = X_g' e_g, scores summed
/// within clusters so arbitrary within-cluster correlation is allowed.
pub fn cluster_robust_cov(
    x: &Array2<f64>,
    residuals: &Array1<f64>,
    xtx_inv: &Array2<f64>,
    clusters: &[String],
    adjustment: CovAdjustment,
) -> Result<Array2<f64>, StatsError> {
    let (n, k) = x.dim();
    if residuals.len() != n || clusters.len() != n {
        return Err(StatsError::Shape(format!(
            "{n} rows but {} residuals and {} cluster labels",
            residuals.len(),
            clusters.len()
        )));
    }

    let mut scores: BTreeMap<&str, Array1<f64>> = BTreeMap::new();
    for i in 0..n {
        let s = scores
            .entry(clusters[i].as_str())
            .or_insert_with(|| Array1::zeros(k));
        for j in 0..k {
            s[j] += x[[i, j]] * residuals[i];
        }
    }
    let g = scores.len();
    if g < 2 {
        return Err(StatsError::Inference(format!(
            "cluster-robust covariance needs at least 2 clusters, got {g}"
        )));
    }

    let mut meat = Array2::zeros((k, k));
    for s in scores.values() {
        for i in 0..k {
            for j in 0..k {
                meat[[i, j]] += s[i] * s[j];
            }
        }
    }

    let mut cov = xtx_inv.dot(&meat).dot(xtx_inv);
    if adjustment == CovAdjustment::Cr1 {
        let (gf, nf, kf) = (g as f64, n as f64, k as f64);
        cov *= (gf / (gf - 1.0)) * ((nf - 1.0) / (nf - kf));
    }
    Ok(cov)
}

/// Number of distinct cluster labels.
pub fn cluster_count(clusters: &[String]) -> usize {
    clusters.iter().collect::<std::collections::BTreeSet<_>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ols::solve_least_squares;
    use ndarray::array;

    #[test]
    fn single_cluster_is_an_inference_error() {
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]];
        let e = array![0.1, -0.2, 0.1];
        let inv = Array2::eye(2);
        let clusters = vec!["a".to_string(); 3];
        assert!(matches!(
            cluster_robust_cov(&x, &e, &inv, &clusters, CovAdjustment::Cr0),
            Err(StatsError::Inference(_))
        ));
    }

    #[test]
    fn zero_residuals_give_zero_covariance() {
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        let y = array![1.0, 2.0, 3.0, 4.0];
        let fit = solve_least_squares(&x, &y, &["a".into(), "b".into()]).unwrap();
        let clusters: Vec<String> = ["g1", "g1", "g2", "g2"].map(String::from).to_vec();
        let cov =
            cluster_robust_cov(&x, &fit.residuals, &fit.xtx_inv, &clusters, CovAdjustment::Cr1)
                .unwrap();
        assert!(cov.iter().all(|v| v.abs() < 1e-20));
    }

    #[test]
    fn cr1_scales_cr0_by_the_finite_sample_factor() {
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0], [1.0, 4.0], [1.0, 5.0]];
        let y = array![0.9, 2.2, 2.8, 4.3, 4.9, 6.4];
        let names = vec!["i".to_string(), "t".to_string()];
        let fit = solve_least_squares(&x, &y, &names).unwrap();
        let clusters: Vec<String> = ["a", "a", "b", "b", "c", "c"].map(String::from).to_vec();
        let cr0 =
            cluster_robust_cov(&x, &fit.residuals, &fit.xtx_inv, &clusters, CovAdjustment::Cr0)
                .unwrap();
        let cr1 =
            cluster_robust_cov(&x, &fit.residuals, &fit.xtx_inv, &clusters, CovAdjustment::Cr1)
                .unwrap();
        let factor = (3.0 / 2.0) * (5.0 / 4.0);
        for (a, b) in cr0.iter().zip(cr1.iter()) {
            assert!((a * factor - b).abs() < 1e-15);
        }
    }
}
