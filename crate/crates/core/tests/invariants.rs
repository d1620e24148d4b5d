use berezin_lab::berezin::{berezin_m2_exact, kb_strip_series};
use berezin_lab::numerics::{beta, d_coeff, log_gamma};
use berezin_lab::poly::{decompose_strips, parse_poly, BiPoly, StripPoly};
use berezin_lab::spectral::{
    binomial_obstruction, t_coefficient, ObstructionValue, OperatorMatrix,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    let part = prop_oneof![Just(0.0), -1e6f64..1e6, (-20i32..20).prop_map(f64::from)];
    (part.clone(), part)
        .prop_filter("nonzero", |(a, b)| *a != 0.0 || *b != 0.0)
        .prop_map(|(a, b)| Complex64::new(a, b))
}

fn bipoly() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec(((0u32..7, 0u32..7), coeff()), 0..8).prop_map(BiPoly::from_terms)
}

proptest! {
    #[test]
    fn display_parses_back(f in bipoly()) {
        let text = f.to_string();
        let g = parse_poly(&text).unwrap();
        prop_assert_eq!(&g, &f, "{}", text);
        prop_assert_eq!(g.to_string(), text);
    }

    #[test]
    fn strips_partition_terms(f in bipoly()) {
        let strips = decompose_strips(&f);
        let mut total = BiPoly::zero();
        let mut count = 0;
        for (tau, s) in &strips {
            let part = s.to_bipoly();
            for ((p, q), _) in part.terms() {
                prop_assert_eq!(p as i32 - q as i32, *tau);
            }
            count += part.len();
            total = &total + &part;
        }
        prop_assert_eq!(count, f.len());
        prop_assert_eq!(total, f);
    }

    #[test]
    fn beta_is_symmetric(x in 0.01f64..40.0, y in 0.01f64..40.0) {
        let (a, b) = (beta(x, y).unwrap(), beta(y, x).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a.abs());
    }
}

#[test]
fn log_gamma_matches_libm() {
    let mut worst: f64 = 0.0;
    let n = 20_000;
    for i in 0..=n {
        // log-uniform over [1e-3, 1e4]
        let x = 10f64.powf(-3.0 + 7.0 * i as f64 / n as f64);
        let got = log_gamma(x).unwrap();
        let want = libm::lgamma(x);
        let err = (got - want).abs() / want.abs().max(1.0);
        worst = worst.max(err);
    }
    assert!(worst < 1e-13, "worst scaled error {worst:e}");
}

#[test]
fn first_sum_entries_positive() {
    for m in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for tau in 0..=6 {
            let a = OperatorMatrix::build(tau, 6, m, 14).unwrap();
            assert!(a.entries.column(0).iter().all(|v| *v == 0.0));
            for j in 1..=6 {
                for k in 0..j {
                    assert!(a.get(k, j) > 0.0, "a_{{{j},{k}}} at τ={tau}, m={m}");
                }
            }
        }
    }
}

#[test]
fn kb_series_at_m2_matches_exact_transform() {
    // K(z,z) = 2 e^{|z|²} at m = 2, so K·B_2 f has coefficients
    // 2 Σ_{s<=l} b_s / (l-s)! where b_s are those of B_2 f.
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    for tau in -3..=3i32 {
        for j in 0..=5 {
            let strip = StripPoly::monomial(tau, j);
            let exact = berezin_m2_exact(&strip.to_bipoly());
            let b: Vec<f64> = (0..=j)
                .map(|s| {
                    let (p, q) = StripPoly::exponents(tau, s);
                    exact.coeff(p, q).re
                })
                .collect();
            let series = kb_strip_series(&strip, 2.0, 20).unwrap();
            for (l, c) in series.coeffs.iter().enumerate() {
                let want: f64 = (0..=l.min(j)).map(|s| 2.0 * b[s] / fact(l - s)).sum();
                assert!(
                    (c.re - want).abs() <= 1e-12 * want.abs().max(1.0) && c.im == 0.0,
                    "τ={tau} j={j} l={l}: {c} vs {want}"
                );
            }
        }
    }
}

#[test]
fn obstruction_matches_matrix_entries() {
    // A_m assembled from the strip-j operator entries a_{d,d-1} and a_{b,d-1}.
    for m in [0.5, 0.9, 1.7, 2.0, 3.3, 6.0] {
        for b in 1..=4u32 {
            for d in b + 1..=5 {
                for j in 0..=3u32 {
                    let (a, c) = (b + j, d + j);
                    let o = binomial_obstruction(a, b, c, d, m).unwrap();
                    let ObstructionValue::Determinant(direct) = o.value else {
                        panic!("expected same-strip case")
                    };
                    let (du, k, t) = (d as usize, d as usize - 1, j as usize);
                    let inv = |i: u32| 1.0 / d_coeff(i as usize, m).unwrap();
                    let other = inv(a) * t_coefficient(du, k, t, m).unwrap() / m
                        - inv(c) * t_coefficient(b as usize, k, t, m).unwrap() / m;
                    assert!(
                        (direct - other).abs() <= 1e-10 * direct.abs(),
                        "({a},{b},{c},{d}) m={m}: {direct} vs {other}"
                    );
                }
            }
        }
    }
}
