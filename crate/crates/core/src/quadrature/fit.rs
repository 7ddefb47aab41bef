//! Quadrature weights on given nodes by matching monomial moments.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

use super::moments::{eval_monomials, monomial_count, MomentTable};

/// Relative residual accepted for the moment equations.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Minimum Euclidean norm solution of the moment equations.
    LeastNorm,
    /// Nonnegative weights found by active-set NNLS.
    Nonnegative,
}

/// Vandermonde matrix of scaled monomials, one row per monomial.
fn vandermonde(points: &[Point], moments: &MomentTable) -> DMatrix<f64> {
    let m = monomial_count(moments.degree);
    let mut v = DMatrix::zeros(m, points.len());
    let mut buf = Vec::with_capacity(m);
    for (j, &p) in points.iter().enumerate() {
        eval_monomials(&moments.frame, moments.degree, p, &mut buf);
        for (k, val) in buf.iter().enumerate() {
            v[(k, j)] = *val;
        }
    }
    v
}

/// Largest moment defect relative to `‖μ‖_∞`.
pub fn moment_residual(points: &[Point], weights: &[f64], moments: &MomentTable) -> f64 {
    let v = vandermonde(points, moments);
    relative_residual(&v, &DVector::from_column_slice(weights), &moments.values)
}

fn relative_residual(v: &DMatrix<f64>, w: &DVector<f64>, mu: &[f64]) -> f64 {
    let r = v * w;
    let scale = mu.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    r.iter()
        .zip(mu)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Solves `V w = μ` for weights on `points`.
pub fn moment_fit_weights(points: &[Point], moments: &MomentTable, mode: FitMode) -> Result<Vec<f64>> {
    let m = monomial_count(moments.degree);
    if points.len() < m {
        return Err(Error::RankDeficient {
            residual: f64::INFINITY,
        });
    }
    let v = vandermonde(points, moments);
    let mu = DVector::from_column_slice(&moments.values);
    let w = match mode {
        FitMode::LeastNorm => least_norm(&v, &mu)?,
        FitMode::Nonnegative => {
            let w = nnls(&v, &mu, 10 * points.len() + 100);
            let res = relative_residual(&v, &w, &moments.values);
            if res > MOMENT_TOLERANCE {
                return Err(Error::InfeasibleNonnegative { residual: res });
            }
            w
        }
    };
    let res = relative_residual(&v, &w, &moments.values);
    if res > MOMENT_TOLERANCE {
        return Err(Error::RankDeficient { residual: res });
    }
    Ok(w.iter().copied().collect())
}

/// Minimum-norm solution via QR of `Vᵀ`: `Vᵀ = QR ⇒ w = Q R^{-T} μ`.
fn least_norm(v: &DMatrix<f64>, mu: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = v.transpose().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let diag_min = r.diagonal().iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
    if !(diag_min > 1e-13 * diag_max) {
        return Err(Error::RankDeficient {
            residual: f64::INFINITY,
        });
    }
    let z = r
        .transpose()
        .solve_lower_triangular(mu)
        .ok_or(Error::RankDeficient {
            residual: f64::INFINITY,
        })?;
    Ok(qr.q() * z)
}

/// Lawson–Hanson active-set solver for `min ‖A x − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let bnorm = b.amax().max(f64::MIN_POSITIVE);
    let col_norm: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let tol = 1e-14 * bnorm * col_norm.iter().fold(0.0f64, |s, c| s.max(*c)).max(1.0);

    let mut iter = 0;
    loop {
        let resid = b - a * &x;
        let grad = a.tr_mul(&resid);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = candidate else { break };
        if grad[j] <= tol || resid.amax() <= 1e-15 * bnorm {
            break;
        }
        passive[j] = true;

        loop {
            iter += 1;
            if iter > max_iter {
                return x;
            }
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z_p = lstsq_columns(a, b, &idx);
            if idx.iter().zip(z_p.iter()).all(|(_, z)| *z > 0.0) {
                x.fill(0.0);
                for (&k, z) in idx.iter().zip(z_p.iter()) {
                    x[k] = *z;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&k, &z) in idx.iter().zip(z_p.iter()) {
                if z <= 0.0 {
                    let denom = x[k] - z;
                    if denom > 0.0 {
                        alpha = alpha.min(x[k] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (&k, &z) in idx.iter().zip(z_p.iter()) {
                x[k] += alpha * (z - x[k]);
            }
            for &k in &idx {
                if x[k] <= 1e-15 * bnorm {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|p| *p) {
                break;
            }
        }
    }
    x
}

fn lstsq_columns(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(cols);
    let svd = sub.svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(cols.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Rect};
    use crate::quadrature::moments::{compute_moments, compute_moments_in_frame, Frame};

    #[test]
    fn corners_degree_one() {
        let pts = Rect::unit().corners().to_vec();
        let m = compute_moments(&Domain::unit_square(), 1, 4).unwrap();
        for mode in [FitMode::LeastNorm, FitMode::Nonnegative] {
            let w = moment_fit_weights(&pts, &m, mode).unwrap();
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            if mode == FitMode::LeastNorm {
                for wi in &w {
                    assert!((wi - 0.25).abs() < 1e-14, "{w:?}");
                }
            }
        }
    }

    #[test]
    fn too_few_nodes() {
        let m = compute_moments(&Domain::unit_square(), 2, 4).unwrap();
        let pts = Rect::unit().corners().to_vec();
        assert!(matches!(
            moment_fit_weights(&pts, &m, FitMode::LeastNorm),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn collinear_nodes_rank_deficient() {
        let dom = Domain::unit_square();
        let m = compute_moments_in_frame(&dom, 1, 4, Frame::for_rect(&dom.bounding_box)).unwrap();
        let pts: Vec<Point> = (0..10).map(|i| Point::new(i as f64 / 9.0, 0.5)).collect();
        assert!(moment_fit_weights(&pts, &m, FitMode::LeastNorm).is_err());
    }

    #[test]
    fn nnls_simple() {
        // min |x - (1, -1)| with x >= 0 -> (1, 0)
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let x = nnls(&a, &b, 100);
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1] == 0.0);
    }

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 3.0, 2.0]);
        let x = nnls(&a, &b, 100);
        let ls = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        assert!((x - ls).amax() < 1e-12);
    }
}
