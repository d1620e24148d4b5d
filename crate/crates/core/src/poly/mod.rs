//! Polynomials in `z` and `z̄` with complex coefficients.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::numerics::{checked_exp, log_gamma};
use crate::{Error, Result};

pub use parse::{parse_poly, ParseError};

/// Sparse polynomial `Σ c_{pq} z^p z̄^q`. No stored coefficient is zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(p: u32, q: u32, c: Complex64) -> Self {
        let mut f = Self::zero();
        f.add_term(p, q, c);
        f
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut f = Self::zero();
        for ((p, q), c) in terms {
            f.add_term(p, q, c);
        }
        f
    }

    /// Adds `c z^p z̄^q`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, p: u32, q: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry((p, q)).or_default();
        *slot += c;
        if *slot == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(p, q));
        }
    }

    pub fn coeff(&self, p: u32, q: u32) -> Complex64 {
        self.terms.get(&(p, q)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    /// Number of nonzero terms.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `p + q`; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(p, q)| p + q).max().unwrap_or(0)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|&(_, q)| q == 0)
    }

    /// No term mixes `z` and `z̄`.
    pub fn is_harmonic(&self) -> bool {
        self.terms.keys().all(|&(p, q)| p == 0 || q == 0)
    }

    /// Complex conjugate as a function: `z^p z̄^q ↦ z^q z̄^p`, coefficients conjugated.
    pub fn conj(&self) -> Self {
        Self::from_terms(self.terms().map(|((p, q), c)| ((q, p), c.conj())))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        self.terms()
            .map(|((p, q), c)| c * z.powu(p) * zb.powu(q))
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    /// Coefficient-wise comparison with tolerance `eps·(1 + |c|)`.
    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        let keys: std::collections::BTreeSet<_> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        keys.into_iter().all(|(p, q)| {
            let a = self.coeff(p, q);
            let b = other.coeff(p, q);
            (a - b).norm() <= eps * (1.0 + b.norm())
        })
    }

    /// Terms in display order: highest total degree first, then higher
    /// power of `z` first.
    pub fn sorted_terms(&self) -> Vec<((u32, u32), Complex64)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|a, b| {
            let (pa, qa) = a.0;
            let (pb, qb) = b.0;
            (pb + qb).cmp(&(pa + qa)).then(pb.cmp(&pa))
        });
        v
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for ((p, q), c) in rhs.terms() {
            out.add_term(p, q, c);
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for ((p, q), c) in rhs.terms() {
            out.add_term(p, q, -c);
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for ((p1, q1), c1) in self.terms() {
            for ((p2, q2), c2) in rhs.terms() {
                out.add_term(p1 + p2, q1 + q2, c1 * c2);
            }
        }
        out
    }
}

fn write_factors(f: &mut fmt::Formatter<'_>, p: u32, q: u32) -> fmt::Result {
    let mut first = true;
    for (name, e) in [("z", p), ("zb", q)] {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if e == 1 {
            f.write_str(name)?;
        } else {
            write!(f, "{name}^{e}")?;
        }
    }
    Ok(())
}

/// Canonical text form, accepted back by [`parse_poly`].
impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, ((p, q), c)) in self.sorted_terms().into_iter().enumerate() {
            // Pull the sign out so the magnitude prints without one.
            let negative = if c.im == 0.0 {
                c.re < 0.0
            } else if c.re == 0.0 {
                c.im < 0.0
            } else {
                c.re < 0.0
            };
            let c = if negative { -c } else { c };
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let constant = p == 0 && q == 0;
            let unit = c == Complex64::new(1.0, 0.0);
            if !unit || constant {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)?;
                } else if c.re == 0.0 {
                    write!(f, "{}i", c.im)?;
                } else if c.im < 0.0 {
                    write!(f, "({}-{}i)", c.re, -c.im)?;
                } else {
                    write!(f, "({}+{}i)", c.re, c.im)?;
                }
                if !constant {
                    f.write_str("*")?;
                }
            }
            write_factors(f, p, q)?;
        }
        Ok(())
    }
}

/// An element of a strip: `Σ a_j z^{j+τ} z̄^j` for `τ >= 0`, or
/// `Σ a_j z^j z̄^{j-τ}` for `τ < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripPoly {
    pub tau: i32,
    pub coeffs: Vec<Complex64>,
}

impl StripPoly {
    pub fn new(tau: i32, coeffs: Vec<Complex64>) -> Self {
        Self { tau, coeffs }
    }

    /// `z^{j+τ} z̄^j` (or the conjugate shape) as a single strip element.
    pub fn monomial(tau: i32, j: usize) -> Self {
        let mut coeffs = vec![Complex64::default(); j + 1];
        coeffs[j] = Complex64::new(1.0, 0.0);
        Self { tau, coeffs }
    }

    /// Exponents `(p, q)` of the `j`-th basis monomial of strip `tau`.
    pub fn exponents(tau: i32, j: usize) -> (u32, u32) {
        let j = j as u32;
        let a = tau.unsigned_abs();
        if tau >= 0 {
            (j + a, j)
        } else {
            (j, j + a)
        }
    }

    /// Highest `j` with a stored slot.
    pub fn n(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn to_bipoly(&self) -> BiPoly {
        BiPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (Self::exponents(self.tau, j), c)),
        )
    }

    /// Only the `j = 0` slot, `z^τ` or `z̄^{|τ|}`, is occupied.
    pub fn is_harmonic(&self) -> bool {
        self.coeffs
            .iter()
            .skip(1)
            .all(|c| *c == Complex64::default())
    }
}

/// Splits `f` into strips `τ = p - q`. Only non-empty strips are returned.
pub fn decompose_strips(f: &BiPoly) -> BTreeMap<i32, StripPoly> {
    let mut out: BTreeMap<i32, StripPoly> = BTreeMap::new();
    for ((p, q), c) in f.terms() {
        let tau = p as i32 - q as i32;
        let j = p.min(q) as usize;
        let strip = out
            .entry(tau)
            .or_insert_with(|| StripPoly::new(tau, Vec::new()));
        if strip.coeffs.len() <= j {
            strip.coeffs.resize(j + 1, Complex64::default());
        }
        strip.coeffs[j] = c;
    }
    out
}

pub fn is_harmonic(f: &BiPoly) -> bool {
    f.is_harmonic()
}

fn require_holomorphic(f: &BiPoly, what: &str) -> Result<()> {
    if f.is_holomorphic() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} is only defined for holomorphic polynomials; got {f}"
        )))
    }
}

/// `‖z^j‖² = Γ((2j+2)/m)/m`.
fn monomial_norm_sq(j: u32, m: f64) -> Result<f64> {
    let ln = log_gamma((2 * j + 2) as f64 / m)? - m.ln();
    checked_exp(ln, || format!("norm of z^{j} at m = {m}"))
}

pub fn fock_norm_sq(f: &BiPoly, m: f64) -> Result<f64> {
    Ok(fock_inner(f, f, m)?.re)
}

/// `⟨f, g⟩ = ∫ f ḡ e^{-|z|^m} dA` for holomorphic `f`, `g`, using the
/// orthogonality of monomials.
pub fn fock_inner(f: &BiPoly, g: &BiPoly, m: f64) -> Result<Complex64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            func: "fock_inner",
            arg: m,
        });
    }
    require_holomorphic(f, "fock_inner")?;
    require_holomorphic(g, "fock_inner")?;
    let mut acc = Complex64::default();
    for ((j, _), c) in f.terms() {
        let other = g.coeff(j, 0);
        if other != Complex64::default() {
            acc += c * other.conj() * monomial_norm_sq(j, m)?;
        }
    }
    Ok(acc)
}
