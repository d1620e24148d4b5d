use crate::numerics::{d_coeff, ln_gamma_ratio, ScaledArg};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionCase {
    /// Both terms on the same side of the diagonal, in different strips.
    DistinctStrips,
    /// Both terms in one strip; decided by the determinant `A_m`.
    SameStrip,
    /// One term on each side of the diagonal.
    OppositeSides,
}

impl ObstructionCase {
    pub fn tag(&self) -> &'static str {
        match self {
            ObstructionCase::DistinctStrips => "distinct_strips",
            ObstructionCase::SameStrip => "same_strip",
            ObstructionCase::OppositeSides => "opposite_sides",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObstructionValue {
    Determinant(f64),
    Forcing([f64; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstruction {
    pub case: ObstructionCase,
    /// `(a, b, c, d)` after reordering so the first term has `a >= b`
    /// (and `b < d` in the same-strip case).
    pub normalized: (u32, u32, u32, u32),
    pub value: ObstructionValue,
}

impl Obstruction {
    /// True when the value rules out `c_1 z^a z̄^b + c_2 z^c z̄^d` being fixed
    /// unless `c_1 = c_2 = 0`.
    pub fn obstructs(&self) -> bool {
        match self.value {
            ObstructionValue::Determinant(a) => a > 0.0,
            ObstructionValue::Forcing([x, y]) => x != 0.0 && y != 0.0,
        }
    }
}

/// Case analysis for `c_1 z^a z̄^b + c_2 z^c z̄^d`.
pub fn binomial_obstruction(a: u32, b: u32, c: u32, d: u32, m: f64) -> Result<Obstruction> {
    if a == 0 || b == 0 || c == 0 || d == 0 {
        return Err(Error::Precondition(
            "binomial exponents must all be positive".into(),
        ));
    }
    if (a, b) == (c, d) {
        return Err(Error::Precondition(
            "a single monomial; use the fixed-point check".into(),
        ));
    }
    let x = ScaledArg::from_m(m)?.x();
    let (mut t1, mut t2) = ((a, b), (c, d));
    if t1.0 < t1.1 {
        if t2.0 >= t2.1 {
            std::mem::swap(&mut t1, &mut t2);
        } else {
            t1 = (t1.1, t1.0);
            t2 = (t2.1, t2.0);
        }
    }
    let d0 = d_coeff(0, m)?;
    if t2.0 < t2.1 {
        let ((a, b), (c, d)) = (t1, t2);
        let first = d_coeff((a - b) as usize, m)? * d0 / d_coeff(a as usize, m)?;
        let second = d0 * d_coeff((d - c) as usize, m)? / d_coeff(d as usize, m)?;
        return Ok(Obstruction {
            case: ObstructionCase::OppositeSides,
            normalized: (a, b, c, d),
            value: ObstructionValue::Forcing([first, second]),
        });
    }
    let (j, k) = (t1.0 - t1.1, t2.0 - t2.1);
    if j != k {
        let ((a, _), (c, _)) = (t1, t2);
        let first = d_coeff(j as usize, m)? * d0 / d_coeff(a as usize, m)?;
        let second = d_coeff(k as usize, m)? * d0 / d_coeff(c as usize, m)?;
        return Ok(Obstruction {
            case: ObstructionCase::DistinctStrips,
            normalized: (t1.0, t1.1, t2.0, t2.1),
            value: ObstructionValue::Forcing([first, second]),
        });
    }
    if t1.1 > t2.1 {
        std::mem::swap(&mut t1, &mut t2);
    }
    let ((a, b), (c, d)) = (t1, t2);
    let r = d - b;
    let g = |v: u32| v as f64 * x;
    let denom = [g(j + b + r), g(b + r)];
    let ln_t1 = ln_gamma_ratio(&[g(a + 1), g(c + b + r)], &denom)?;
    let ln_t2 = ln_gamma_ratio(&[g(c + 1), g(a + b + r)], &denom)?;
    let ln_t3 = ln_gamma_ratio(&[g(c + 1)], &[g(r)])?;
    // the first two terms nearly cancel for large m
    let diff = crate::numerics::checked_exp(ln_t2, || "A_m".into())? * (ln_t1 - ln_t2).exp_m1();
    let t3 = crate::numerics::checked_exp(ln_t3, || "A_m".into())?;
    Ok(Obstruction {
        case: ObstructionCase::SameStrip,
        normalized: (a, b, c, d),
        value: ObstructionValue::Determinant(diff + t3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_strip_example() {
        let o = binomial_obstruction(2, 1, 3, 2, 2.0).unwrap();
        assert_eq!(o.case, ObstructionCase::SameStrip);
        match o.value {
            ObstructionValue::Determinant(v) => assert!((v - 12.0).abs() < 1e-12, "{v}"),
            _ => panic!(),
        }
        let swapped = binomial_obstruction(3, 2, 2, 1, 2.0).unwrap();
        assert_eq!(swapped.value, o.value);
        let conj = binomial_obstruction(1, 2, 2, 3, 2.0).unwrap();
        assert_eq!(conj.value, o.value);
    }

    #[test]
    fn opposite_sides() {
        for m in [0.5, 1.0, 2.0, 4.5] {
            let o = binomial_obstruction(2, 1, 1, 2, m).unwrap();
            assert_eq!(o.case, ObstructionCase::OppositeSides);
            assert!(o.obstructs());
        }
        let o = binomial_obstruction(1, 3, 4, 2, 1.0).unwrap();
        assert_eq!(o.normalized, (4, 2, 1, 3));
    }

    #[test]
    fn distinct_strips() {
        let o = binomial_obstruction(3, 1, 2, 2, 1.5).unwrap();
        assert_eq!(o.case, ObstructionCase::DistinctStrips);
        assert!(o.obstructs());
    }

    #[test]
    fn preconditions() {
        assert!(binomial_obstruction(2, 1, 2, 1, 1.0).is_err());
        assert!(binomial_obstruction(0, 1, 2, 1, 1.0).is_err());
    }
}
