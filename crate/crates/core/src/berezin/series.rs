use num_complex::Complex64;

use super::kernel::kernel_diag;
use crate::numerics::{checked_exp, d_coeff, ln_gamma_ratio, log_gamma, NumericContext, LN_MAX};
use crate::poly::{decompose_strips, BiPoly, StripPoly};
use crate::{Error, Result};

/// A truncated element of the strip `τ`:
/// `Σ_{l<=L} c_l z^{l+τ} z̄^l` (or `z^l z̄^{l+|τ|}` when `τ < 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct StripSeries {
    pub tau: i32,
    pub coeffs: Vec<Complex64>,
    /// Radius of the disk on which `tail_bound` holds.
    pub radius: f64,
    /// Bound on `|Σ_{l>L} c_l z^{l+τ} z̄^l|` for `|z| <= radius`.
    pub tail_bound: f64,
}

impl StripSeries {
    /// `L`, the highest index kept.
    pub fn truncation(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let rho2 = z.norm_sqr();
        let radial = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, &c| acc * rho2 + c);
        let a = self.tau.unsigned_abs();
        if self.tau >= 0 {
            radial * z.powu(a)
        } else {
            radial * z.conj().powu(a)
        }
    }

    /// Largest `|c_l|`.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `m·d_{l+τ} d_l / d_{j+τ+l} = m Γ((2(j+τ+l)+2)/m) / (Γ((2(l+τ)+2)/m) Γ((2l+2)/m))`,
/// in log space.
pub(crate) fn ln_kb_weight(j: usize, l: usize, tau: usize, m: f64) -> Result<f64> {
    let g = |i: usize| (2 * i + 2) as f64 / m;
    Ok(m.ln() + ln_gamma_ratio(&[g(j + tau + l)], &[g(l + tau), g(l)])?)
}

fn kb_weight(j: usize, l: usize, tau: usize, m: f64) -> Result<f64> {
    let ln = ln_kb_weight(j, l, tau, m)?;
    checked_exp(ln, || format!("K·B weight (j={j}, l={l}, τ={tau}, m={m})"))
}

/// `Σ_{w ∈ 𝐂} f(w) w̄^k w^l e^{-|w|^m} dA(w)`, evaluated with the angular
/// selection rule: `w^p w̄^q` contributes only when `p + l = q + k`, and
/// then `Γ((p+q+k+l+2)/m)/m` times its coefficient.
pub fn lambda_coeff(f: &BiPoly, k: u32, l: u32, m: f64) -> Result<Complex64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            func: "lambda_coeff",
            arg: m,
        });
    }
    let mut acc = Complex64::default();
    for ((p, q), c) in f.terms() {
        if p + l != q + k {
            continue;
        }
        let a = (p + q + k + l + 2) as f64 / m;
        let v = checked_exp(log_gamma(a)? - m.ln(), || {
            format!("λ_{{{k},{l}}} at m = {m}")
        })?;
        acc += c * v;
    }
    Ok(acc)
}

fn kb_coeff(f: &StripPoly, l: usize, tau: usize, m: f64) -> Result<Complex64> {
    let mut c = Complex64::default();
    for (j, &a) in f.coeffs.iter().enumerate() {
        if a != Complex64::default() {
            c += a * kb_weight(j, l, tau, m)?;
        }
    }
    Ok(c)
}

/// The strip coefficients of `K_m(z,z)·B_m f` for `f` in a strip, indices
/// `0..=len`:
/// `c_l = m Σ_j a_j d_{l+τ} d_l / d_{j+τ+l}`.
///
/// Negative strips use `|τ|`: the weights are real, so conjugating twice
/// leaves the coefficients of `f` untouched. The tail bound is zero on the
/// returned radius 0; use [`kb_strip_series_on_disk`] for a certified tail
/// on a larger disk.
pub fn kb_strip_series(f: &StripPoly, m: f64, len: usize) -> Result<StripSeries> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            func: "kb_strip_series",
            arg: m,
        });
    }
    if len < f.n() {
        return Err(Error::Precondition(format!(
            "series length {len} shorter than strip degree {}",
            f.n()
        )));
    }
    let tau = f.tau.unsigned_abs() as usize;
    let coeffs = (0..=len)
        .map(|l| kb_coeff(f, l, tau, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(StripSeries {
        tau: f.tau,
        coeffs,
        radius: 0.0,
        tail_bound: 0.0,
    })
}

/// Like [`kb_strip_series`], but keeps adding terms until the dropped part
/// is certified below `eps_series` of the majorant on `|z| <= radius`.
///
/// Uses the majorant `u_l = Σ_j |a_j| w_{j,l} R^{2l+|τ|}` and the same
/// ratio rule as the kernel: stop when `u_{L+1}/u_L < 1/2` and
/// `2 u_{L+1} < eps_series Σ u`.
pub fn kb_strip_series_on_disk(
    f: &StripPoly,
    m: f64,
    radius: f64,
    ctx: &NumericContext,
) -> Result<StripSeries> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Domain {
            func: "kb_strip_series_on_disk",
            arg: radius,
        });
    }
    let tau = f.tau.unsigned_abs() as usize;
    let mut series = kb_strip_series(f, m, f.n())?;
    series.radius = radius;
    if radius == 0.0 || f.coeffs.iter().all(|a| *a == Complex64::default()) {
        return Ok(series);
    }
    let ln_r = radius.ln();
    // ln u_l, through log-sum-exp over the occupied slots.
    let ln_majorant = |l: usize| -> Result<f64> {
        let logs = f
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::default())
            .map(|(j, a)| Ok(a.norm().ln() + ln_kb_weight(j, l, tau, m)?))
            .collect::<Result<Vec<f64>>>()?;
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = logs.iter().map(|v| (v - top).exp()).sum();
        Ok(top + s.ln() + (2 * l + tau) as f64 * ln_r)
    };
    let mut ln_u: Vec<f64> = (0..=f.n()).map(&ln_majorant).collect::<Result<_>>()?;
    let top = ln_u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top > LN_MAX {
        return Err(Error::overflow(
            format!("K·B series majorant on radius {radius}"),
            top,
        ));
    }
    let mut total: f64 = ln_u.iter().map(|v| v.exp()).sum();
    loop {
        let l = series.coeffs.len();
        if l > ctx.max_terms {
            return Err(Error::TruncationCap {
                what: "kb_strip_series",
                terms: ctx.max_terms,
                partial: total,
            });
        }
        let ln_next = ln_majorant(l)?;
        if ln_next > LN_MAX {
            return Err(Error::overflow(
                format!("K·B series term {l} on radius {radius}"),
                ln_next,
            ));
        }
        let ratio = (ln_next - ln_u[l - 1]).exp();
        let next = ln_next.exp();
        if ratio < 0.5 && 2.0 * next <= ctx.eps_series * total {
            series.tail_bound = 2.0 * next;
            return Ok(series);
        }
        series.coeffs.push(kb_coeff(f, l, tau, m)?);
        ln_u.push(ln_next);
        total += next;
    }
}

/// Coefficients `ρ_k`, `k = 0..=rows`, of `T f = K·B_m f - K·f` for `f` in a
/// strip. `K·f` contributes `m Σ_{j<=k} a_j d_{k-j}`.
///
/// `B_m f = f` exactly when every `ρ_k` vanishes, since `K(z,z) > 0`.
pub fn residual_series(f: &StripPoly, m: f64, rows: usize) -> Result<StripSeries> {
    let mut series = kb_strip_series(f, m, rows)?;
    for (k, c) in series.coeffs.iter_mut().enumerate() {
        for (j, &a) in f.coeffs.iter().enumerate().take(k + 1) {
            if a != Complex64::default() {
                *c -= a * m * d_coeff(k - j, m)?;
            }
        }
    }
    Ok(series)
}

/// `B_m f(z)` through the strip series: `Σ_τ (K·B_m f_τ)(z) / K(z,z)`.
pub fn berezin_series(f: &BiPoly, z: Complex64, m: f64, ctx: &NumericContext) -> Result<Complex64> {
    let radius = z.norm();
    let k = kernel_diag(radius, m, ctx)?;
    let mut acc = Complex64::default();
    for strip in decompose_strips(f).values() {
        acc += kb_strip_series_on_disk(strip, m, radius, ctx)?.eval(z);
    }
    Ok(acc / k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn lambda_examples() {
        let one = parse_poly("1").unwrap();
        assert!((lambda_coeff(&one, 0, 0, 2.0).unwrap() - c(0.5)).norm() < 1e-15);
        let ww = parse_poly("z*zb").unwrap();
        assert!((lambda_coeff(&ww, 0, 0, 2.0).unwrap() - c(0.5)).norm() < 1e-15);
        let w = parse_poly("z").unwrap();
        assert_eq!(lambda_coeff(&w, 0, 0, 1.7).unwrap(), Complex64::default());
        // w · w̄ selects k = 1, l = 0: ∫ |w|² e^{-|w|²} dA = Γ(2)/2
        assert!((lambda_coeff(&w, 1, 0, 2.0).unwrap() - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn harmonic_monomial_gives_kernel_times_itself() {
        for m in [0.6, 1.0, 2.0, 4.5] {
            for tau in 0..4 {
                let s = kb_strip_series(&StripPoly::monomial(tau, 0), m, 12).unwrap();
                for (l, cl) in s.coeffs.iter().enumerate() {
                    let want = m * d_coeff(l, m).unwrap();
                    assert!((cl.re - want).abs() <= 1e-14 * want, "m={m} τ={tau} l={l}");
                }
            }
        }
    }

    #[test]
    fn z_zbar_at_m2() {
        // 2 e^{|z|²}(|z|²+1) = Σ 2(l+1)/l! |z|^{2l}
        let s = kb_strip_series(&StripPoly::monomial(0, 1), 2.0, 15).unwrap();
        for (l, cl) in s.coeffs.iter().enumerate() {
            let want = 2.0 * (l as f64 + 1.0) / factorial(l);
            assert!((cl.re - want).abs() < 1e-12 * want, "l = {l}");
        }
    }

    #[test]
    fn zeroth_coefficient_is_holomorphic_and_nonzero() {
        for m in [0.5, 1.0, 3.0] {
            for tau in 0..3usize {
                for alpha in 1..4usize {
                    let s =
                        kb_strip_series(&StripPoly::monomial(tau as i32, alpha), m, alpha).unwrap();
                    let want = m * d_coeff(tau, m).unwrap() * d_coeff(0, m).unwrap()
                        / d_coeff(alpha + tau, m).unwrap();
                    assert!(want > 0.0);
                    assert!((s.coeffs[0].re - want).abs() < 1e-12 * want);
                }
            }
        }
    }

    #[test]
    fn residual_examples() {
        for tau in [0, 2, -3] {
            let r = residual_series(&StripPoly::monomial(tau, 0), 1.3, 20).unwrap();
            assert!(r.max_abs() < 1e-15);
        }
        let r = residual_series(&StripPoly::monomial(0, 1), 2.0, 12).unwrap();
        for (k, rk) in r.coeffs.iter().enumerate() {
            let want = 2.0 / factorial(k);
            assert!((rk.re - want).abs() < 1e-13, "k = {k}: {rk} vs {want}");
        }
        // below the diagonal only the K·B part survives
        for m in [0.8, 2.0, 3.5] {
            let (j, tau) = (3usize, 1usize);
            let r = residual_series(&StripPoly::monomial(tau as i32, j), m, 8).unwrap();
            for k in 0..j {
                let want = m * d_coeff(k + tau, m).unwrap() * d_coeff(k, m).unwrap()
                    / d_coeff(j + tau + k, m).unwrap();
                assert!(want > 0.0);
                assert!((r.coeffs[k].re - want).abs() < 1e-12 * want);
            }
        }
    }

    #[test]
    fn series_length_precondition() {
        let f = StripPoly::monomial(0, 4);
        assert!(matches!(
            kb_strip_series(&f, 2.0, 3),
            Err(Error::Precondition(_))
        ));
        assert!(residual_series(&f, 2.0, 2).is_err());
    }

    #[test]
    fn disk_series_certifies_tail() {
        let ctx = NumericContext::default();
        let f = StripPoly::new(1, vec![c(1.0), c(-2.0), c(0.5)]);
        let s = kb_strip_series_on_disk(&f, 1.5, 2.0, &ctx).unwrap();
        assert!(s.truncation() > f.n());
        assert!(s.tail_bound > 0.0);
        let longer = kb_strip_series(&f, 1.5, s.truncation() + 40).unwrap();
        let z = Complex64::new(1.2, -1.6);
        let diff = (longer.eval(z) - s.eval(z)).norm();
        assert!(diff <= s.tail_bound + 1e-12 * s.eval(z).norm());
    }

    #[test]
    fn series_transform_fixes_harmonic_polynomials() {
        let ctx = NumericContext::default();
        let f = parse_poly("z^3 - 2*zb^2 + (1+1i)*z + 5").unwrap();
        for m in [0.7, 2.0, 3.5] {
            for z in [Complex64::new(0.3, 0.4), Complex64::new(-1.5, 1.0)] {
                let got = berezin_series(&f, z, m, &ctx).unwrap();
                let want = f.eval(z);
                assert!(
                    (got - want).norm() < 1e-12 * (1.0 + want.norm()),
                    "m={m} z={z}"
                );
            }
        }
    }
}
