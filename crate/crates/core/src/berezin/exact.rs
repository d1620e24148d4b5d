use num_complex::Complex64;

use crate::poly::BiPoly;

pub(crate) fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub(crate) fn factorial(n: u32) -> u128 {
    (1..=n).fold(1u128, |acc, i| acc * i as u128)
}

/// Integer weight of `z^{p-i} z̄^{q-i}` in `B_2(z^p z̄^q)`:
/// `C(p, i)·C(q, i)·i!`.
///
/// Equivalently, with `p = j + τ`, `q = j`, `s = j - i`: the entry
/// `C(j+τ, s+τ)·C(j, s)·Γ(j-s+1)`.
pub fn m2_weight(p: u32, q: u32, i: u32) -> u128 {
    binomial(p, i) * binomial(q, i) * factorial(i)
}

/// The transform at `m = 2`, where the kernel is Gaussian and `B_2` maps
/// every polynomial to a polynomial:
/// `B_2(z^p z̄^q) = Σ_{i <= min(p,q)} C(p,i) C(q,i) i! z^{p-i} z̄^{q-i}`.
///
/// Exact up to the conversion of the integer weights to `f64` (exact
/// below 2^53).
pub fn berezin_m2_exact(f: &BiPoly) -> BiPoly {
    let mut out = BiPoly::zero();
    for ((p, q), c) in f.terms() {
        for i in 0..=p.min(q) {
            out.add_term(
                p - i,
                q - i,
                c * Complex64::new(m2_weight(p, q, i) as f64, 0.0),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn examples() {
        let f = parse_poly("z*zb").unwrap();
        assert_eq!(berezin_m2_exact(&f), parse_poly("z*zb + 1").unwrap());
        let f = parse_poly("z^2*zb").unwrap();
        assert_eq!(berezin_m2_exact(&f), parse_poly("z^2*zb + 2*z").unwrap());
        let f = parse_poly("z^3").unwrap();
        assert_eq!(berezin_m2_exact(&f), f);
        let f = parse_poly("zb^4 + 3i").unwrap();
        assert_eq!(berezin_m2_exact(&f), f);
    }

    #[test]
    fn conjugation_commutes() {
        let f = parse_poly("(1+2i)*z^3*zb - 4*z*zb^2 + zb").unwrap();
        assert_eq!(berezin_m2_exact(&f.conj()), berezin_m2_exact(&f).conj());
    }

    #[test]
    fn weights() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(10), 3_628_800);
        // superdiagonal: (j+τ)·j
        for j in 1..8 {
            for tau in 0..6 {
                assert_eq!(m2_weight(j + tau, j, 1), ((j + tau) * j) as u128);
            }
        }
    }
}
