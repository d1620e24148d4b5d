//! The series route, the quadrature route and the closed form at m = 2
//! must agree.

use berezin_lab::berezin::{
    berezin_m2_exact, berezin_quadrature, berezin_series, kernel_diag, lambda_coeff,
    QuadratureOracle,
};
use berezin_lab::numerics::{GaussLegendre, NumericContext};
use berezin_lab::poly::{parse_poly, BiPoly, StripPoly};
use num_complex::Complex64;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn points() -> Vec<Complex64> {
    vec![
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(-1.5, 0.0),
        Complex64::new(-0.3, 0.7),
    ]
}

#[test]
fn series_matches_quadrature_on_strip_monomials() {
    let ctx = NumericContext::default();
    for m in [1.0, 2.0, 4.0] {
        for z in points() {
            let oracle = QuadratureOracle::new(z, m, 4, &ctx).unwrap();
            for tau in -4..=4i32 {
                for j in 0..=4usize {
                    let f = StripPoly::monomial(tau, j).to_bipoly();
                    if f.degree() > 4 {
                        continue;
                    }
                    let s = berezin_series(&f, z, m, &ctx).unwrap();
                    let q = oracle.apply(&f).unwrap();
                    assert!(
                        rel(s, q) < 1e-9,
                        "m={m} z={z} f={f}: series {s} quadrature {q}"
                    );
                }
            }
        }
    }
}

#[test]
fn both_routes_match_closed_form_at_m2() {
    let ctx = NumericContext::default();
    let f = parse_poly("z^3*zb - (2-1i)*z*zb^2 + 4*z*zb + zb^3 - 1").unwrap();
    let exact = berezin_m2_exact(&f);
    for z in points() {
        let want = exact.eval(z);
        let s = berezin_series(&f, z, 2.0, &ctx).unwrap();
        let q = berezin_quadrature(&f, z, 2.0, &ctx).unwrap();
        assert!(rel(s, want) < 1e-12, "series at {z}: {s} vs {want}");
        assert!(rel(q, want) < 1e-10, "quadrature at {z}: {q} vs {want}");
    }
}

#[test]
fn large_weights_and_radii() {
    let ctx = NumericContext::default();
    let f = parse_poly("z^3*zb^2 + 2*z*zb - zb").unwrap();
    for m in [0.7, 3.5, 5.0] {
        let z = Complex64::new(1.2, -1.6);
        let s = berezin_series(&f, z, m, &ctx).unwrap();
        let q = berezin_quadrature(&f, z, m, &ctx).unwrap();
        assert!(rel(s, q) < 1e-8, "m={m}: {s} vs {q}");
    }
}

// λ_{k,l} against a plain polar product rule (trapezoid in θ, panel
// Gauss-Legendre in r) of ∫ f(w) w̄^k w^l e^{-|w|^m} r dr dθ/2π.
fn lambda_by_quadrature(f: &BiPoly, k: u32, l: u32, m: f64) -> Complex64 {
    let rule = GaussLegendre::new(24);
    let n_theta = 64;
    let big_r = 60f64.powf(1.0 / m).max(8.0);
    let panels = 120;
    let h = big_r / panels as f64;
    let mut acc = Complex64::default();
    for p in 0..panels {
        for (r, w) in rule.mapped(p as f64 * h, (p + 1) as f64 * h) {
            let mut ang = Complex64::default();
            for t in 0..n_theta {
                let theta = 2.0 * std::f64::consts::PI * t as f64 / n_theta as f64;
                let z = Complex64::from_polar(r, theta);
                ang += f.eval(z) * z.conj().powu(k) * z.powu(l);
            }
            acc += ang / n_theta as f64 * (r * (-r.powf(m)).exp() * w);
        }
    }
    acc
}

#[test]
fn lambda_selection_rule_matches_quadrature() {
    let fs = [
        "1",
        "z*zb",
        "z^2 + zb",
        "(1+1i)*z^3*zb - 2*zb^2",
        "z^2*zb^2",
    ];
    for m in [1.0, 2.0, 4.0] {
        for text in fs {
            let f = parse_poly(text).unwrap();
            for k in 0..=2 {
                for l in 0..=2 {
                    if f.degree() + k + l > 6 {
                        continue;
                    }
                    let a = lambda_coeff(&f, k, l, m).unwrap();
                    let b = lambda_by_quadrature(&f, k, l, m);
                    let scale = a.norm().max(b.norm()).max(1e-12);
                    assert!(
                        (a - b).norm() < 1e-8 * scale.max(1.0),
                        "f={f} k={k} l={l} m={m}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn kernel_matches_gaussian_on_grid() {
    let ctx = NumericContext::default();
    for i in 0..=60 {
        let r = 0.05 * i as f64;
        let k = kernel_diag(r, 2.0, &ctx).unwrap();
        assert!((k / (2.0 * (r * r).exp()) - 1.0).abs() < 1e-10);
    }
}
