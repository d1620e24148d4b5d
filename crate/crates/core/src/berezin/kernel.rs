use crate::numerics::{ln_d_coeff, NumericContext, LN_MAX};
use crate::{Error, Result};

/// The truncated diagonal `K_m(z,z) = m Σ_{k<=L} d_k |z|^{2k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDiag {
    pub value: f64,
    /// Index of the last term kept.
    pub last_term: usize,
    /// Bound on the dropped terms.
    pub tail_bound: f64,
}

/// Sums `m Σ d_k s^k` until the term ratio drops below 1/2 and the
/// geometric tail `2·t_{L+1}` is below `eps_series` of the partial sum.
///
/// The ratio `s·Γ((2k+2)/m)/Γ((2k+4)/m)` decreases in `k` (log-convexity
/// of Γ), so once it is below 1/2 the geometric bound holds for the whole
/// tail.
pub(crate) fn kernel_series(s: f64, m: f64, ctx: &NumericContext) -> Result<KernelDiag> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain {
            func: "kernel_diag",
            arg: s,
        });
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            func: "kernel_diag",
            arg: m,
        });
    }
    let ln_m = m.ln();
    let ln_s = s.ln();
    let ln_term = |k: usize| -> Result<f64> {
        let pow = if k == 0 { 0.0 } else { k as f64 * ln_s };
        Ok(ln_m + ln_d_coeff(k, m)? + pow)
    };
    let mut ln_t = ln_term(0)?;
    let mut sum = 0.0;
    for k in 0..ctx.max_terms {
        if ln_t > LN_MAX {
            return Err(Error::overflow(
                format!("kernel term {k} at s = {s}, m = {m}"),
                ln_t,
            ));
        }
        let t = ln_t.exp();
        sum += t;
        let ln_next = if s == 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_term(k + 1)?
        };
        let next = ln_next.exp();
        let ratio = (ln_next - ln_t).exp();
        if ratio < 0.5 && 2.0 * next <= ctx.eps_series * sum {
            return Ok(KernelDiag {
                value: sum,
                last_term: k,
                tail_bound: 2.0 * next,
            });
        }
        ln_t = ln_next;
    }
    Err(Error::TruncationCap {
        what: "kernel_diag",
        terms: ctx.max_terms,
        partial: sum,
    })
}

/// `K_m(z,z)` at `|z| = r`, with certified relative tail `eps_series`.
pub fn kernel_diag(r: f64, m: f64, ctx: &NumericContext) -> Result<f64> {
    kernel_diag_detailed(r, m, ctx).map(|k| k.value)
}

pub fn kernel_diag_detailed(r: f64, m: f64, ctx: &NumericContext) -> Result<KernelDiag> {
    if !(r >= 0.0) {
        return Err(Error::Domain {
            func: "kernel_diag",
            arg: r,
        });
    }
    kernel_series(r * r, m, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_gamma;

    #[test]
    fn value_at_origin() {
        let ctx = NumericContext::default();
        for m in [0.5, 1.0, 2.0, 3.0, 7.5] {
            let want = m * (-log_gamma(2.0 / m).unwrap()).exp();
            let got = kernel_diag(0.0, m, &ctx).unwrap();
            assert!((got - want).abs() <= 1e-15 * want);
        }
        assert_eq!(kernel_diag(0.0, 2.0, &ctx).unwrap(), 2.0);
    }

    #[test]
    fn gaussian_closed_form() {
        let ctx = NumericContext::default();
        let got = kernel_diag(1.0, 2.0, &ctx).unwrap();
        assert!((got - 2.0 * std::f64::consts::E).abs() < 1e-14);
        for i in 0..=30 {
            let r = 0.1 * i as f64;
            let got = kernel_diag(r, 2.0, &ctx).unwrap();
            let want = 2.0 * (r * r).exp();
            assert!((got / want - 1.0).abs() < 1e-10, "r = {r}");
        }
    }

    #[test]
    fn monotone_in_radius() {
        let ctx = NumericContext::default();
        for m in [0.7, 1.0, 4.0] {
            let mut prev = 0.0;
            for i in 0..40 {
                let v = kernel_diag(0.05 * i as f64, m, &ctx).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn truncation_cap_carries_partial_sum() {
        let ctx = NumericContext {
            max_terms: 8,
            ..Default::default()
        };
        match kernel_diag(3.0, 2.0, &ctx) {
            Err(Error::TruncationCap { partial, terms, .. }) => {
                assert_eq!(terms, 8);
                assert!(partial > 0.0);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        assert!(kernel_diag(-1.0, 2.0, &ctx).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let ctx = NumericContext::default();
        assert!(matches!(
            kernel_diag(40.0, 2.0, &ctx),
            Err(Error::Overflow { .. })
        ));
    }
}
