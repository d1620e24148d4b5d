//! The Berezin transform `B_m f(z) = ∫ f(w) |k_{m,z}(w)|² e^{-|w|^m} dA(w)`
//! on polynomial symbols.
//!
//! Two independent routes are provided. The series route expands
//! `K_m(z,z)·B_m f` strip by strip with gamma-function ratios; the
//! quadrature route integrates the definition numerically. At `m = 2` the
//! transform is also available in closed form.

mod exact;
mod kernel;
mod quadrature;
mod series;

pub use exact::{berezin_m2_exact, m2_weight};
pub use kernel::{kernel_diag, kernel_diag_detailed, KernelDiag};
pub use quadrature::{berezin_quadrature, QuadratureOracle};
pub use series::{
    berezin_series, kb_strip_series, kb_strip_series_on_disk, lambda_coeff, residual_series,
    StripSeries,
};

pub(crate) use exact::{binomial, factorial};
pub(crate) use series::ln_kb_weight;
