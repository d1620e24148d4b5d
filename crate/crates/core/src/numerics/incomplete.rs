use super::log_gamma;
use crate::{Error, Result};

const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// `ln Γ(a, x)`, the unregularized upper incomplete gamma function
/// `∫_x^∞ t^{a-1} e^{-t} dt`.
///
/// Series for the lower function when `x < a + 1`, Lentz continued
/// fraction otherwise.
pub fn ln_upper_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            func: "ln_upper_gamma",
            arg: a,
        });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain {
            func: "ln_upper_gamma",
            arg: x,
        });
    }
    let lg = log_gamma(a)?;
    if x == 0.0 {
        return Ok(lg);
    }
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    if x < a + 1.0 {
        // P(a, x) = e^{-x} x^a / Γ(a) · Σ x^n / (a (a+1) ... (a+n))
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let p = (-x + a * x.ln() - lg + sum.ln()).exp();
        Ok(lg + (-p.min(1.0)).ln_1p())
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(-x + a * x.ln() + h.ln())
    }
}
