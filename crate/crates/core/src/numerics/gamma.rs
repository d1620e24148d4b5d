use std::sync::LazyLock;

use super::checked_exp;
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Stirling correction coefficients `B_2k / (2k (2k-1))`.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const ZETA_TERMS: usize = 64;

/// `ζ(k) - 1` for `k = 0..ZETA_TERMS` (entries 0 and 1 unused).
static ZETA_MINUS_ONE: LazyLock<[f64; ZETA_TERMS]> = LazyLock::new(|| {
    const N: usize = 1000;
    let nf = N as f64;
    let mut table = [0.0; ZETA_TERMS];
    for (k, slot) in table.iter_mut().enumerate().skip(2) {
        let kf = k as f64;
        // Euler-Maclaurin remainder for n > N, then the explicit sum
        // accumulated from the small end.
        let mut s = nf.powf(1.0 - kf) / (kf - 1.0) - 0.5 * nf.powf(-kf)
            + kf / 12.0 * nf.powf(-kf - 1.0)
            - kf * (kf + 1.0) * (kf + 2.0) / 720.0 * nf.powf(-kf - 3.0);
        for n in (2..=N).rev() {
            s += (n as f64).powf(-kf);
        }
        *slot = s;
    }
    table
});

/// `ln Γ(2 + eps)` for `|eps| <= 1/2`, from the Taylor series about 2.
fn ln_gamma_two_plus(eps: f64) -> f64 {
    let zeta = &*ZETA_MINUS_ONE;
    let mut sum = 0.0;
    let mut pow = eps * eps;
    for (k, z) in zeta.iter().enumerate().skip(2) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * pow * z / k as f64;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        pow *= eps;
    }
    eps * (1.0 - EULER_GAMMA) + sum
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING {
        corr += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + corr
}

/// `ln Γ(x)` for `x > 0`.
///
/// Stirling's series with eight correction terms above 10; below that the
/// argument is moved into `[1.5, 2.5]` by the recurrence and finished with
/// the zeta-function Taylor series about 2, which keeps full relative
/// accuracy around the zeros at 1 and 2.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain {
            func: "log_gamma",
            arg: x,
        });
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let v = if x < 0.5 {
        // Γ(x) = Γ(x+2) / (x (x+1))
        ln_gamma_two_plus(x) - (x * (x + 1.0)).ln()
    } else if x < 1.5 {
        // Γ(x) = Γ(x+1) / x, with x+1 in [1.5, 2.5)
        ln_gamma_two_plus(x - 1.0) - x.ln()
    } else if x <= 2.5 {
        ln_gamma_two_plus(x - 2.0)
    } else if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        ln_gamma_two_plus(y - 2.0) + prod.ln()
    } else {
        ln_gamma_stirling(x)
    };
    Ok(v)
}

fn sum_ln_gamma(args: &[f64], what: &'static str) -> Result<f64> {
    args.iter().try_fold(0.0, |acc, &a| {
        if !(a > 0.0) {
            return Err(Error::Domain { func: what, arg: a });
        }
        Ok(acc + log_gamma(a)?)
    })
}

/// `Σ ln Γ(numer) - Σ ln Γ(denom)`.
pub fn ln_gamma_ratio(numer: &[f64], denom: &[f64]) -> Result<f64> {
    Ok(sum_ln_gamma(numer, "gamma_ratio")? - sum_ln_gamma(denom, "gamma_ratio")?)
}

/// `Π Γ(numer) / Π Γ(denom)`, formed in log space.
pub fn gamma_ratio(numer: &[f64], denom: &[f64]) -> Result<f64> {
    let ln = ln_gamma_ratio(numer, denom)?;
    checked_exp(ln, || format!("gamma_ratio({numer:?} / {denom:?})"))
}

/// `ln d_j = -ln Γ((2j+2)/m)`.
pub fn ln_d_coeff(j: usize, m: f64) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            func: "d_coeff",
            arg: m,
        });
    }
    Ok(-log_gamma((2 * j + 2) as f64 / m)?)
}

/// The norm weight `d_j = 1/Γ((2j+2)/m)`; the monomials `sqrt(m d_j) z^j`
/// are orthonormal in the weighted space.
///
/// Underflows to zero (with a warning) once `Γ((2j+2)/m)` leaves the `f64`
/// range.
pub fn d_coeff(j: usize, m: f64) -> Result<f64> {
    let ln = ln_d_coeff(j, m)?;
    let v = ln.exp();
    if v == 0.0 {
        log::warn!("d_{j} underflowed at m = {m} (ln d = {ln:.3})");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert!(close(log_gamma(0.5).unwrap(), 0.572_364_942_925, 1e-12));
        assert!(close(log_gamma(3.0).unwrap(), 2f64.ln(), 1e-15));
        assert!(close(log_gamma(11.0).unwrap(), 3_628_800f64.ln(), 1e-15));
        // Γ(1/2)² = π
        let lg = log_gamma(0.5).unwrap();
        assert!(close((2.0 * lg).exp(), std::f64::consts::PI, 1e-15));
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain { .. })));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain { .. })));
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_recurrence_across_branches() {
        // ln Γ(x+1) - ln Γ(x) = ln x, across every branch boundary.
        for &x in &[
            1e-3, 0.3, 0.49, 0.5, 0.77, 1.2, 1.49, 1.5, 2.3, 2.5, 2.51, 7.9, 9.99, 10.0, 55.5,
        ] {
            let lhs = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
            assert!(close(lhs, x.ln(), 2e-14), "x = {x}: {lhs} vs {}", x.ln());
        }
    }

    #[test]
    fn d_coeff_examples() {
        assert!(close(d_coeff(2, 2.0).unwrap(), 0.5, 1e-15));
        assert!(close(d_coeff(1, 1.0).unwrap(), 1.0 / 6.0, 1e-15));
        assert!(close(
            d_coeff(0, 4.0).unwrap(),
            0.564_189_583_547_756_3,
            1e-14
        ));
        assert!(d_coeff(0, 0.0).is_err());
    }

    #[test]
    fn d_coeff_underflows_to_zero() {
        // Γ(2e6) is far outside f64 but its log is fine.
        assert_eq!(d_coeff(999_999, 1.0).unwrap(), 0.0);
        assert!(ln_d_coeff(999_999, 1.0).unwrap().is_finite());
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!(close(gamma_ratio(&[3.0], &[2.0, 2.0]).unwrap(), 2.0, 1e-15));
        assert!(close(gamma_ratio(&[1.0], &[1.0]).unwrap(), 1.0, 1e-15));
        assert!(close(
            gamma_ratio(&[4.0, 2.0], &[3.0, 3.0]).unwrap(),
            1.5,
            1e-15
        ));
        assert!(gamma_ratio(&[0.0], &[1.0]).is_err());
        assert!(gamma_ratio(&[1.0], &[-2.0]).is_err());
    }

    #[test]
    fn gamma_ratio_survives_huge_arguments() {
        // Γ(400)/Γ(399) = 399 even though both overflow f64.
        assert!(close(
            gamma_ratio(&[400.0], &[399.0]).unwrap(),
            399.0,
            1e-12
        ));
        assert!(matches!(
            gamma_ratio(&[400.0], &[1.0]),
            Err(Error::Overflow { .. })
        ));
    }
}
