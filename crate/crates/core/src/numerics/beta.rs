use serde::Serialize;

use super::{checked_exp, log_gamma};
use crate::{Error, Result};

pub fn ln_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            func: "beta",
            arg: x,
        });
    }
    if !(y > 0.0) {
        return Err(Error::Domain {
            func: "beta",
            arg: y,
        });
    }
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

/// `β(x, y) = Γ(x)Γ(y)/Γ(x+y)`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    let ln = ln_beta(x, y)?;
    checked_exp(ln, || format!("beta({x}, {y})"))
}

/// `β((j+l+τ+1)x, (l-j+1)x) - β((l+τ+1)x, (l+1)x)`.
///
/// Both beta values sit on the line `u + v = (2l+τ+2)x`; the first is the
/// one farther from the midpoint, so by convexity the difference is
/// positive whenever `j >= 1`. Evaluated as `β₂ · expm1(ln β₁ - ln β₂)` so
/// that nearby values do not cancel.
pub fn beta_diff(l: usize, j: usize, tau: usize, x: f64) -> Result<f64> {
    if l < j {
        return Err(Error::Precondition(format!(
            "beta_diff needs l >= j, got l = {l}, j = {j}"
        )));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "beta_diff",
            arg: x,
        });
    }
    if j == 0 {
        return Ok(0.0);
    }
    let (l, j, tau) = (l as f64, j as f64, tau as f64);
    let far = ln_beta((j + l + tau + 1.0) * x, (l - j + 1.0) * x)?;
    let near = ln_beta((l + tau + 1.0) * x, (l + 1.0) * x)?;
    let base = checked_exp(near, || "beta_diff".to_string())?;
    Ok(base * (far - near).exp_m1())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub k: f64,
    pub step: f64,
    /// Grid point with the smallest `β(x, k-x)`.
    pub min_location: f64,
    pub min_value: f64,
    /// Smallest central second difference over the interior points.
    pub second_derivative_min: f64,
    /// Largest relative gap between `β(x, k-x)` and `β(k-x, x)`.
    pub max_symmetry_defect: f64,
}

impl ConvexityReport {
    pub fn minimizer_near_midpoint(&self) -> bool {
        (self.min_location - 0.5 * self.k).abs() <= self.step
    }

    pub fn is_convex(&self) -> bool {
        self.second_derivative_min > 0.0
    }
}

/// Samples `x ↦ β(x, k-x)` at `x_i = k i/(N+1)`, `i = 1..=N`.
pub fn check_beta_convexity(k: f64, grid_points: usize) -> Result<ConvexityReport> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain {
            func: "check_beta_convexity",
            arg: k,
        });
    }
    if grid_points < 5 {
        return Err(Error::Precondition(format!(
            "check_beta_convexity needs at least 5 grid points, got {grid_points}"
        )));
    }
    let step = k / (grid_points + 1) as f64;
    let xs: Vec<f64> = (1..=grid_points)
        .map(|i| k * i as f64 / (grid_points + 1) as f64)
        .collect();
    let values = xs
        .iter()
        .map(|&x| beta(x, k - x))
        .collect::<Result<Vec<_>>>()?;

    let mut max_symmetry_defect: f64 = 0.0;
    for (&x, &v) in xs.iter().zip(&values) {
        let mirrored = beta(k - x, x)?;
        max_symmetry_defect = max_symmetry_defect.max((v - mirrored).abs() / v);
    }

    let (imin, &min_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");

    let second_derivative_min = values
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) / (step * step))
        .fold(f64::INFINITY, f64::min);

    Ok(ConvexityReport {
        k,
        step,
        min_location: xs[imin],
        min_value,
        second_derivative_min,
        max_symmetry_defect,
    })
}
