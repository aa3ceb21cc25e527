//! Weighted linear least squares for small design matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Reduced chi-square (weighted fits) or residual variance (unweighted).
    pub chi2_red: f64,
    pub dof: usize,
}

/// Fits `y ≈ Σ_k c_k · rows[i][k]`.
///
/// With `sigma`, observations are weighted by `1/σ²` and coefficient errors
/// are inflated by `sqrt(max(1, χ²_red))`, so an inadequate model widens the
/// error bars instead of hiding behind small per-point errors. Without
/// `sigma`, errors come from the residual variance.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64], sigma: Option<&[f64]>) -> Result<LinearFit> {
    let m = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if k == 0 || m != y.len() || rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter(format!("malformed design: {m} rows, {} responses", y.len())));
    }
    if m <= k {
        return Err(Error::InvalidParameter(format!("{m} points cannot fit {k} parameters")));
    }
    let weights: Vec<f64> = match sigma {
        Some(s) => {
            if s.len() != m {
                return Err(Error::InvalidParameter("sigma length differs from data".into()));
            }
            // Exact observations get the weight of the most precise noisy one.
            let floor = s.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
            let floor = if floor.is_finite() { floor } else { 1.0 };
            s.iter().map(|&v| (if v > 0.0 { v } else { floor }).powi(-2)).collect()
        }
        None => vec![1.0; m],
    };
    let x = DMatrix::from_fn(m, k, |i, j| rows[i][j] * weights[i].sqrt());
    let b = DVector::from_fn(m, |i, _| y[i] * weights[i].sqrt());
    let normal = x.transpose() * &x;
    let inv = normal
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("singular design matrix".into()))?;
    let coef = &inv * x.transpose() * &b;
    let resid = &b - &x * &coef;
    let dof = m - k;
    let chi2_red = resid.norm_squared() / dof as f64;
    let scale = if sigma.is_some() { chi2_red.max(1.0) } else { chi2_red };
    Ok(LinearFit {
        coefficients: coef.iter().copied().collect(),
        stderr: (0..k).map(|j| (inv[(j, j)] * scale).max(0.0).sqrt()).collect(),
        chi2_red,
        dof,
    })
}

/// Ordinary least-squares line `y ≈ a + b·x`; returns `(b, stderr(b))`.
pub fn slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
    let fit = least_squares(&rows, y, None)?;
    Ok((fit.coefficients[1], fit.stderr[1]))
}
