//! Gamma-family special functions and the working tolerances shared by the
//! rest of the crate.
//!
//! Everything that involves a quotient of gamma values goes through
//! [`gamma_ratio`] or [`ln_d_coeff`]; the arguments `(2j+2)/m` leave the
//! range of `f64` gamma values very quickly once `m` is small.

mod beta;
mod context;
mod gamma;
mod gauss;
mod incomplete;

pub use beta::{beta, beta_diff, check_beta_convexity, ln_beta, ConvexityReport};
pub use context::{NumericContext, RadiusPolicy, ScaledArg};
pub use gamma::{d_coeff, gamma_ratio, ln_d_coeff, ln_gamma_ratio, log_gamma};
pub use gauss::GaussLegendre;
pub use incomplete::ln_upper_gamma;

/// Largest log-magnitude that still exponentiates to a finite `f64`.
pub const LN_MAX: f64 = 709.0;

/// `exp(ln_value)` or an overflow error naming `context`.
pub(crate) fn checked_exp(ln_value: f64, context: impl FnOnce() -> String) -> crate::Result<f64> {
    if ln_value > LN_MAX {
        return Err(crate::Error::overflow(context(), ln_value));
    }
    Ok(ln_value.exp())
}
