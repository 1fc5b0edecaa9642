use ndarray::{Array1, Array2};

use crate::error::StatsError;

/// Least-squares solution with the pieces sandwich covariances need.
#[derive(Debug, Clone)]
pub struct OlsSolution {
    pub beta: Array1<f64>,
    pub residuals: Array1<f64>,
    pub r_squared: f64,
    /// (X'X)^-1, reconstructed from the R factor.
    pub xtx_inv: Array2<f64>,
    pub n: usize,
    pub k: usize,
}

/// Solves min ||y - X beta|| by Householder QR. `names` label the columns of
/// `x` so a rank failure can say which dummy is collinear.
pub fn solve_least_squares(
    x: &Array2<f64>,
    y: &Array1<f64>,
    names: &[String],
) -> Result<OlsSolution, StatsError> {
    let (n, k) = x.dim();
    if y.len() != n || names.len() != k {
        return Err(StatsError::Shape(format!(
            "design is {n}x{k} but y has {} rows and {} names",
            y.len(),
            names.len()
        )));
    }
    if n < k || k == 0 {
        return Err(StatsError::Shape(format!("{n} rows cannot identify {k} columns")));
    }

    let mut a = x.clone();
    let mut qty = y.clone();

    // Householder triangularization, reflecting y alongside A.
    for j in 0..k {
        let norm: f64 = (j..n).map(|i| a[[i, j]] * a[[i, j]]).sum::<f64>().sqrt();
        if norm > 0.0 {
            let alpha = if a[[j, j]] >= 0.0 { -norm } else { norm };
            let v0 = a[[j, j]] - alpha;
            let vnorm2 = v0 * v0 + (j + 1..n).map(|i| a[[i, j]] * a[[i, j]]).sum::<f64>();
            if vnorm2 > 0.0 {
                // The reflector lives in (v0, a[j+1.., j]); column j itself
                // maps to (alpha, 0, ..., 0) by construction, so only the
                // trailing columns and y need the explicit update.
                for c in j + 1..k {
                    let dot = v0 * a[[j, c]]
                        + (j + 1..n).map(|i| a[[i, j]] * a[[i, c]]).sum::<f64>();
                    let scale = 2.0 * dot / vnorm2;
                    a[[j, c]] -= scale * v0;
                    for i in j + 1..n {
                        let vi = a[[i, j]];
                        a[[i, c]] -= scale * vi;
                    }
                }
                let dot = v0 * qty[j] + (j + 1..n).map(|i| a[[i, j]] * qty[i]).sum::<f64>();
                let scale = 2.0 * dot / vnorm2;
                qty[j] -= scale * v0;
                for i in j + 1..n {
                    qty[i] -= scale * a[[i, j]];
                }
            }
            a[[j, j]] = alpha;
        }
        // The reflector itself is not needed past this column; only R and Q'y are.
        for i in j + 1..n {
            a[[i, j]] = 0.0;
        }
    }

    let max_diag = (0..k).map(|j| a[[j, j]].abs()).fold(0.0_f64, f64::max);
    let tol = max_diag * 1e-10;
    for j in 0..k {
        if a[[j, j]].abs() <= tol {
            return Err(StatsError::Rank { column: names[j].clone() });
        }
    }

    // Back substitution: R beta = (Q'y)[..k].
    let mut beta = Array1::zeros(k);
    for j in (0..k).rev() {
        let mut s = qty[j];
        for c in j + 1..k {
            s -= a[[j, c]] * beta[c];
        }
        beta[j] = s / a[[j, j]];
    }

    // R^-1 by back substitution against the identity, then (X'X)^-1 = R^-1 R^-T.
    let mut rinv = Array2::zeros((k, k));
    for col in 0..k {
        for j in (0..=col).rev() {
            let mut s = if j == col { 1.0 } else { 0.0 };
            for c in j + 1..=col {
                s -= a[[j, c]] * rinv[[c, col]];
            }
            rinv[[j, col]] = s / a[[j, j]];
        }
    }
    let mut xtx_inv = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            xtx_inv[[i, j]] = (0..k).map(|c| rinv[[i, c]] * rinv[[j, c]]).sum();
        }
    }

    let residuals = y - &x.dot(&beta);
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = y.mean().unwrap_or(0.0);
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if sst > 0.0 {
        1.0 - ssr / sst
    } else if ssr <= f64::EPSILON * n as f64 {
        1.0
    } else {
        0.0
    };

    Ok(OlsSolution { beta, residuals, r_squared, xtx_inv, n, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn recovers_exact_linear_relation() {
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        let y = array![1.0, 3.0, 5.0, 7.0];
        let fit = solve_least_squares(&x, &y, &names(2)).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-12);
        assert!((fit.beta[1] - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn matches_normal_equations_on_noisy_data() {
        // Small enough to solve the normal equations by hand with Cramer's rule.
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0], [1.0, 4.0]];
        let y = array![0.9, 3.2, 4.8, 7.1, 9.0];
        let fit = solve_least_squares(&x, &y, &names(2)).unwrap();
        let (n, sx, sxx) = (5.0, 10.0, 30.0);
        let (sy, sxy) = (25.0, 70.1);
        let det = n * sxx - sx * sx;
        let b1 = (n * sxy - sx * sy) / det;
        let b0 = (sy - b1 * sx) / n;
        assert!((fit.beta[0] - b0).abs() < 1e-12);
        assert!((fit.beta[1] - b1).abs() < 1e-12);
        // (X'X)^-1 against the closed form.
        assert!((fit.xtx_inv[[0, 0]] - sxx / det).abs() < 1e-12);
        assert!((fit.xtx_inv[[0, 1]] + sx / det).abs() < 1e-12);
        assert!((fit.xtx_inv[[1, 1]] - n / det).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_reports_its_name() {
        let x = array![[1.0, 2.0, 2.0], [1.0, 3.0, 3.0], [1.0, 4.0, 4.0], [1.0, 5.0, 5.0]];
        let y = array![1.0, 2.0, 3.0, 4.0];
        let err = solve_least_squares(&x, &y, &names(3)).unwrap_err();
        match err {
            StatsError::Rank { column } => assert_eq!(column, "c2"),
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn underdetermined_system_is_a_shape_error() {
        let x = array![[1.0, 2.0, 3.0], [1.0, 3.0, 4.0]];
        let y = array![1.0, 2.0];
        assert!(matches!(
            solve_least_squares(&x, &y, &names(3)),
            Err(StatsError::Shape(_))
        ));
    }
}
