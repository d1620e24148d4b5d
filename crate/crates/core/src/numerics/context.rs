use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How far out the radial quadrature goes before the tail is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusPolicy {
    /// Tail mass allowed beyond the cutoff, relative to `K(z,z)`.
    pub eps_tail: f64,
    /// First radius tried.
    pub initial: f64,
    /// Multiplicative growth between attempts.
    pub growth: f64,
    /// Give up beyond this radius.
    pub max: f64,
}

impl Default for RadiusPolicy {
    fn default() -> Self {
        Self {
            eps_tail: 1e-15,
            initial: 2.0,
            growth: 1.15,
            max: 1.0e4,
        }
    }
}

/// Working tolerances and truncation lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericContext {
    /// Relative tail tolerance for truncated power series.
    pub eps_series: f64,
    /// Tolerance for deciding that a coefficient vanishes.
    pub eps_match: f64,
    /// Hard cap on series terms.
    pub max_terms: usize,
    /// Gauss-Legendre points per radial panel.
    pub quad_radial_order: usize,
    /// Floor on the number of trapezoid points in the angular direction.
    pub quad_angular_points: usize,
    /// Relative error target for the adaptive radial panels.
    pub eps_quad: f64,
    /// Maximum bisection depth of a radial panel.
    pub max_panel_depth: u32,
    pub r_max_policy: RadiusPolicy,
    /// Row truncation for residual and rank decisions; `None` means `2n + 8`.
    pub rows_k: Option<usize>,
}

impl Default for NumericContext {
    fn default() -> Self {
        Self {
            eps_series: 1e-16,
            eps_match: 1e-9,
            max_terms: 20_000,
            quad_radial_order: 16,
            quad_angular_points: 16,
            eps_quad: 1e-14,
            max_panel_depth: 40,
            r_max_policy: RadiusPolicy::default(),
            rows_k: None,
        }
    }
}

impl NumericContext {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps_series", self.eps_series),
            ("eps_match", self.eps_match),
            ("eps_quad", self.eps_quad),
            ("r_max_policy.eps_tail", self.r_max_policy.eps_tail),
            ("r_max_policy.initial", self.r_max_policy.initial),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidContext(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_terms < 8 {
            return Err(Error::InvalidContext(format!(
                "max_terms must be at least 8, got {}",
                self.max_terms
            )));
        }
        if self.quad_radial_order < 4 || self.quad_angular_points < 4 {
            return Err(Error::InvalidContext(
                "quadrature orders must be at least 4".into(),
            ));
        }
        if !(self.r_max_policy.growth > 1.0) || !(self.r_max_policy.max > self.r_max_policy.initial)
        {
            return Err(Error::InvalidContext(
                "radius policy needs growth > 1 and max > initial".into(),
            ));
        }
        Ok(())
    }

    /// Residual/rank row count for polynomials of degree `n`.
    pub fn rows_for(&self, n: usize) -> usize {
        self.rows_k.unwrap_or(2 * n + 8).max(n)
    }
}

/// The weight exponent `m` together with `x = 2/m`, the scale under which
/// `d_l = 1/Γ((l+1)x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledArg {
    m: f64,
    x: f64,
}

impl ScaledArg {
    pub fn from_m(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain {
                func: "ScaledArg",
                arg: m,
            });
        }
        Ok(Self { m, x: 2.0 / m })
    }

    pub fn from_x(x: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain {
                func: "ScaledArg",
                arg: x,
            });
        }
        Ok(Self { m: 2.0 / x, x })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_context_is_valid() {
        NumericContext::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_context() {
        let ctx = NumericContext {
            max_terms: 4,
            ..Default::default()
        };
        assert!(ctx.validate().is_err());
        let ctx = NumericContext {
            eps_match: 0.0,
            ..Default::default()
        };
        assert!(ctx.validate().is_err());
        let ctx = NumericContext {
            quad_radial_order: 3,
            ..Default::default()
        };
        assert!(ctx.validate().is_err());
    }

    #[test]
    fn scaled_arg_product_is_two() {
        for m in [0.1, 0.3, 0.7, 1.0, 2.0, 3.3, 5.0, 17.0] {
            let s = ScaledArg::from_m(m).unwrap();
            assert!((s.x() * s.m() - 2.0).abs() <= 2.0 * f64::EPSILON);
        }
        assert!(ScaledArg::from_m(0.0).is_err());
        assert!(ScaledArg::from_m(-1.0).is_err());
    }
}
