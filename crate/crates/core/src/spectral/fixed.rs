use num_complex::Complex64;

use super::matrix::t_coefficient;
use crate::berezin::residual_series;
use crate::numerics::NumericContext;
use crate::poly::{decompose_strips, BiPoly, StripPoly};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Fixed,
    NotFixed {
        tau: i32,
        k: usize,
        residual: Complex64,
    },
    Indeterminate {
        reason: String,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Fixed => "fixed",
            Verdict::NotFixed { .. } => "not_fixed",
            Verdict::Indeterminate { .. } => "indeterminate",
        }
    }
}

/// Residuals `ρ_k` of one strip, with the per-row tolerance they were held to.
#[derive(Debug, Clone, PartialEq)]
pub struct StripResidual {
    pub tau: i32,
    /// Rows actually checked; fewer than requested if a guard fired.
    pub rows: usize,
    pub requested_rows: usize,
    pub residuals: Vec<Complex64>,
    pub tolerances: Vec<f64>,
    pub max_abs: f64,
}

impl StripResidual {
    pub fn truncated(&self) -> bool {
        self.rows < self.requested_rows
    }

    fn first_offender(&self) -> Option<(usize, Complex64)> {
        self.residuals
            .iter()
            .zip(&self.tolerances)
            .position(|(r, t)| r.norm() > *t)
            .map(|k| (k, self.residuals[k]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub m: f64,
    pub verdict: Verdict,
    pub strips: Vec<StripResidual>,
}

/// Decides whether the polynomial `f` satisfies `B_m f = f`, strip by strip,
/// from the residual coefficients of `K·B_m f - K·f` through row `K`.
pub fn fixed_point_check(f: &BiPoly, m: f64, ctx: &NumericContext) -> FixedPointReport {
    let indeterminate = |reason: String| FixedPointReport {
        m,
        verdict: Verdict::Indeterminate { reason },
        strips: Vec::new(),
    };
    if !(m > 0.0) || !m.is_finite() {
        return indeterminate(format!("m = {m} is not a positive finite number"));
    }
    if let Err(e) = ctx.validate() {
        return indeterminate(e.to_string());
    }
    let rows = ctx.rows_for(f.degree() as usize);
    let mut strips = Vec::new();
    let mut first: Option<Verdict> = None;
    let mut guard: Option<String> = None;
    for strip in decompose_strips(f).into_values() {
        match strip_residual(&strip, m, rows, ctx.eps_match) {
            Ok((res, err)) => {
                if first.is_none() {
                    if let Some((k, residual)) = res.first_offender() {
                        first = Some(Verdict::NotFixed {
                            tau: res.tau,
                            k,
                            residual,
                        });
                    }
                }
                if let Some(e) = err {
                    guard.get_or_insert(format!("strip τ = {}: {e}", res.tau));
                }
                strips.push(res);
            }
            Err(e) => return indeterminate(e.to_string()),
        }
    }
    let verdict = match (first, guard) {
        (Some(v), _) => v,
        (None, Some(reason)) => Verdict::Indeterminate { reason },
        (None, None) => Verdict::Fixed,
    };
    FixedPointReport { m, verdict, strips }
}

/// Residuals through `rows`, or through the longest prefix that stays in
/// range, together with the guard error that shortened it.
fn strip_residual(
    strip: &StripPoly,
    m: f64,
    rows: usize,
    eps: f64,
) -> Result<(StripResidual, Option<Error>)> {
    let n = strip.n();
    let (series, reached, err) = match residual_series(strip, m, rows) {
        Ok(s) => (s, rows, None),
        Err(e) if e.is_range_guard() => {
            let (mut lo, mut hi) = (n, rows);
            let mut best = None;
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                match residual_series(strip, m, mid) {
                    Ok(s) => {
                        best = Some((s, mid));
                        lo = mid + 1;
                    }
                    Err(_) => hi = mid,
                }
            }
            match best {
                Some((s, r)) => (s, r, Some(e)),
                None => return Err(e),
            }
        }
        Err(e) => return Err(e),
    };
    let tau = strip.tau.unsigned_abs() as usize;
    let tolerances = (0..=reached)
        .map(|k| {
            let mut scale: f64 = 0.0;
            for (j, a) in strip.coeffs.iter().enumerate() {
                if a.norm() > 0.0 {
                    scale = scale.max(a.norm() * t_coefficient(j, k, tau, m)?.abs());
                }
            }
            Ok(eps * (1.0 + scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs = series.max_abs();
    Ok((
        StripResidual {
            tau: strip.tau,
            rows: reached,
            requested_rows: rows,
            residuals: series.coeffs,
            tolerances,
            max_abs,
        },
        err,
    ))
}
