use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::kernel::{kernel_diag, kernel_series};
use crate::numerics::{ln_d_coeff, ln_upper_gamma, GaussLegendre, NumericContext};
use crate::poly::BiPoly;
use crate::{Error, Result};

const INITIAL_PANELS: usize = 16;
const ROUNDOFF: f64 = 256.0 * f64::EPSILON;

/// Direct two-dimensional quadrature of
/// `B_m f(z) = ∫ f(w) |K_m(w,z)|² e^{-|w|^m} dA(w) / K_m(z,z)`,
/// `dA = r dr dθ / 2π`, for every monomial `w^p w̄^q` with `p + q <= D`.
///
/// The kernel is the power series truncated at `L` terms, with `L` chosen
/// by the kernel ratio rule on the largest `|w z̄|` that occurs. In `θ` the
/// truncated integrand is a trigonometric polynomial of degree `L + D`, so
/// the trapezoid rule on `N >= 4(L + D + 2)` points is exact; the samples of
/// `K(r e^{iθ}, z)` come from one FFT per radius. In `r` the integral runs
/// over `[0, R]` with adaptive Gauss-Legendre panels; `R` is grown until the
/// incomplete-gamma bound on the dropped tail is below `eps_tail`.
///
/// None of this uses the angular selection rule, so it checks the series
/// route independently.
#[derive(Debug, Clone)]
pub struct QuadratureOracle {
    z: Complex64,
    m: f64,
    max_degree: u32,
    radius: f64,
    kernel_terms: usize,
    angular_points: usize,
    /// `∫ w^p w̄^q |K(w,z)|² e^{-|w|^m} dA / K(z,z)` in the order of
    /// [`moment_index`].
    moments: Vec<Complex64>,
    moment_errors: Vec<f64>,
    tail_bound: f64,
}

fn moment_index(p: u32, q: u32) -> usize {
    let e = (p + q) as usize;
    e * (e + 1) / 2 + q as usize
}

fn pairwise_sum(parts: &[Vec<Complex64>], width: usize) -> Vec<Complex64> {
    match parts.len() {
        0 => vec![Complex64::default(); width],
        1 => parts[0].clone(),
        n => {
            let (a, b) = parts.split_at(n / 2);
            let (sa, sb) = (pairwise_sum(a, width), pairwise_sum(b, width));
            sa.into_iter().zip(sb).map(|(x, y)| x + y).collect()
        }
    }
}

struct Integrand {
    m: f64,
    rho: f64,
    phi: f64,
    ln_kzz: f64,
    ln_g: Vec<f64>,
    degree: u32,
    n_theta: usize,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
}

impl Integrand {
    fn moment_count(&self) -> usize {
        let d = self.degree as usize;
        (d + 1) * (d + 2) / 2
    }

    fn width(&self) -> usize {
        self.moment_count() + self.degree as usize + 1
    }

    /// Total degree `p + q` of the moment stored at `index`.
    fn order_of(&self, index: usize) -> usize {
        let mut e = 0;
        while (e + 1) * (e + 2) / 2 <= index {
            e += 1;
        }
        e
    }

    /// Radial integrand at `r`: the angular means of `w^p w̄^q |K|² e^{-r^m}/K(z,z)`
    /// times `r`, followed by the envelopes `r^{e+1}·mean(|K|² e^{-r^m})/K(z,z)`.
    fn eval(&self, r: f64, out: &mut [Complex64]) {
        let n = self.n_theta;
        let mut buf = vec![Complex64::default(); n];
        let ln_scale = -0.5 * r.powf(self.m) - 0.5 * self.ln_kzz;
        let ln_s = (r * self.rho).ln();
        for (k, &lg) in self.ln_g.iter().enumerate() {
            let pow = if k == 0 { 0.0 } else { k as f64 * ln_s };
            let mag = (lg + pow + ln_scale).exp();
            buf[k] = Complex64::from_polar(mag, -(k as f64) * self.phi);
        }
        self.inverse.process(&mut buf);
        for v in buf.iter_mut() {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
        self.forward.process(&mut buf);
        let inv_n = 1.0 / n as f64;
        // mean over θ of W e^{iνθ} is the forward coefficient at -ν.
        let mean = |nu: i64| buf[nu.rem_euclid(n as i64) as usize] * inv_n;
        let d = self.degree;
        for e in 0..=d {
            let re = r.powi(e as i32 + 1);
            for q in 0..=e {
                let p = e - q;
                out[moment_index(p, q)] = mean(q as i64 - p as i64) * re;
            }
        }
        let base = (d as usize + 1) * (d as usize + 2) / 2;
        let a0 = mean(0).re.max(0.0);
        for e in 0..=d as usize {
            out[base + e] = Complex64::new(a0 * r.powi(e as i32 + 1), 0.0);
        }
    }

    fn panel(&self, rule: &GaussLegendre, a: f64, b: f64) -> Vec<Complex64> {
        let w = self.width();
        let mut acc = vec![Complex64::default(); w];
        let mut tmp = vec![Complex64::default(); w];
        for (x, wt) in rule.mapped(a, b) {
            self.eval(x, &mut tmp);
            for (s, v) in acc.iter_mut().zip(&tmp) {
                *s += v * wt;
            }
        }
        acc
    }
}

struct Adaptive<'a> {
    f: &'a Integrand,
    rule: &'a GaussLegendre,
    /// Per-entry absolute tolerance per unit length.
    tol_density: Vec<f64>,
    max_depth: u32,
}

struct PanelResult {
    value: Vec<Complex64>,
    error: Vec<f64>,
    converged: bool,
}

impl Adaptive<'_> {
    fn run(&self, a: f64, b: f64, coarse: Vec<Complex64>, depth: u32) -> PanelResult {
        let mid = 0.5 * (a + b);
        let left = self.f.panel(self.rule, a, mid);
        let right = self.f.panel(self.rule, mid, b);
        let fine: Vec<Complex64> = left.iter().zip(&right).map(|(x, y)| x + y).collect();
        let error: Vec<f64> = fine
            .iter()
            .zip(&coarse)
            .map(|(x, y)| (x - y).norm())
            .collect();
        // Round-off in the FFT samples sets a floor relative to the panel's
        // own envelope, which a narrow peak can push above the global target.
        let base = self.f.moment_count();
        let d = self.f.degree as usize;
        let floor = |e: usize| ROUNDOFF * fine[base + e.min(d)].re.abs();
        let ok = error
            .iter()
            .zip(&self.tol_density)
            .enumerate()
            .all(|(i, (e, t))| {
                let order = if i < base {
                    self.f.order_of(i)
                } else {
                    i - base
                };
                *e <= (t * (b - a)).max(floor(order))
            });
        if ok {
            return PanelResult {
                value: fine,
                error,
                converged: true,
            };
        }
        if depth >= self.max_depth {
            return PanelResult {
                value: fine,
                error,
                converged: false,
            };
        }
        let l = self.run(a, mid, left, depth + 1);
        let r = self.run(mid, b, right, depth + 1);
        PanelResult {
            value: l.value.iter().zip(&r.value).map(|(x, y)| x + y).collect(),
            error: l.error.iter().zip(&r.error).map(|(x, y)| x + y).collect(),
            converged: l.converged && r.converged,
        }
    }
}

fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// `ln` of a bound on `∫_R^∞ r^{e+1} (Σ_k g_k r^k)² e^{-r^m} dr` over
/// `e ∈ {0, D}`, with `g_k = m d_k ρ^k`.
fn ln_tail_bound(ln_g: &[f64], rho: f64, m: f64, radius: f64, degree: u32) -> Result<f64> {
    let ln_rho = rho.ln();
    let ln_c: Vec<f64> = ln_g
        .iter()
        .enumerate()
        .map(|(k, lg)| if k == 0 { *lg } else { lg + k as f64 * ln_rho })
        .collect();
    let top = ln_c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c: Vec<f64> = ln_c.iter().map(|v| (v - top).exp()).collect();
    let mut h = vec![0.0; 2 * c.len() - 1];
    for (i, ci) in c.iter().enumerate() {
        for (j, cj) in c.iter().enumerate() {
            h[i + j] += ci * cj;
        }
    }
    let x = radius.powf(m);
    let mut worst = f64::NEG_INFINITY;
    for e in [0, degree] {
        let mut terms = Vec::with_capacity(h.len());
        for (s, hs) in h.iter().enumerate() {
            if *hs > 0.0 {
                let a = (s as u32 + e + 2) as f64 / m;
                terms.push(hs.ln() + 2.0 * top + ln_upper_gamma(a, x)? - m.ln());
            }
        }
        worst = worst.max(log_sum_exp(terms));
    }
    Ok(worst)
}

impl QuadratureOracle {
    pub fn new(z: Complex64, m: f64, max_degree: u32, ctx: &NumericContext) -> Result<Self> {
        ctx.validate()?;
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Domain {
                func: "berezin_quadrature",
                arg: m,
            });
        }
        let rho = z.norm();
        let kzz = kernel_diag(rho, m, ctx)?;
        let ln_kzz = kzz.ln();
        let policy = ctx.r_max_policy;

        let ln_g_upto = |l: usize| -> Result<Vec<f64>> {
            (0..=l).map(|k| Ok(m.ln() + ln_d_coeff(k, m)?)).collect()
        };
        let terms_for = |radius: f64| -> Result<usize> {
            if rho == 0.0 {
                Ok(0)
            } else {
                Ok(kernel_series(radius * rho, m, ctx)?.last_term)
            }
        };

        let mut radius = policy.initial.max(1.0);
        let (kernel_terms, ln_tail) = loop {
            let l = terms_for(radius)?;
            let ln_tail = ln_tail_bound(&ln_g_upto(l)?, rho, m, radius, max_degree)?;
            if ln_tail - ln_kzz <= policy.eps_tail.ln() {
                break (l, ln_tail);
            }
            radius *= policy.growth;
            if radius > policy.max {
                return Err(Error::Quadrature {
                    achieved: (ln_tail - ln_kzz).exp(),
                    requested: policy.eps_tail,
                });
            }
        };

        let d = max_degree as usize;
        let n_theta = ctx
            .quad_angular_points
            .max(4 * (kernel_terms + d + 2))
            .next_power_of_two();
        let mut planner = FftPlanner::new();
        let integrand = Integrand {
            m,
            rho,
            phi: z.arg(),
            ln_kzz,
            ln_g: ln_g_upto(kernel_terms)?,
            degree: max_degree,
            n_theta,
            inverse: planner.plan_fft_inverse(n_theta),
            forward: planner.plan_fft_forward(n_theta),
        };
        let rule = GaussLegendre::new(ctx.quad_radial_order);
        let width = integrand.width();
        let h = radius / INITIAL_PANELS as f64;
        let panels: Vec<(f64, f64)> = (0..INITIAL_PANELS)
            .map(|i| {
                (
                    i as f64 * h,
                    if i + 1 == INITIAL_PANELS {
                        radius
                    } else {
                        (i + 1) as f64 * h
                    },
                )
            })
            .collect();

        let coarse: Vec<Vec<Complex64>> = panels
            .par_iter()
            .map(|&(a, b)| integrand.panel(&rule, a, b))
            .collect();
        let coarse_total = pairwise_sum(&coarse, width);

        // |moment(p,q)| <= envelope(p+q); tolerate eps_quad of the envelope.
        let base = (d + 1) * (d + 2) / 2;
        let mut tol_density = vec![0.0; width];
        for e in 0..=d {
            let env = coarse_total[base + e].re.abs();
            let t = ctx.eps_quad * env / radius;
            for q in 0..=e {
                tol_density[moment_index((e - q) as u32, q as u32)] = t;
            }
            tol_density[base + e] = t;
        }
        let adaptive = Adaptive {
            f: &integrand,
            rule: &rule,
            tol_density,
            max_depth: ctx.max_panel_depth,
        };
        let results: Vec<PanelResult> = panels
            .par_iter()
            .zip(coarse)
            .map(|(&(a, b), c)| adaptive.run(a, b, c, 0))
            .collect();

        let values: Vec<Vec<Complex64>> = results.iter().map(|r| r.value.clone()).collect();
        let total = pairwise_sum(&values, width);
        let mut errors = vec![0.0; width];
        for r in &results {
            for (e, x) in errors.iter_mut().zip(&r.error) {
                *e += x;
            }
        }
        if !results.iter().all(|r| r.converged) {
            // report the entry furthest over its tolerance
            let (achieved, requested) = errors[..base]
                .iter()
                .zip(&adaptive.tol_density)
                .map(|(e, t)| (*e, t * radius))
                .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)))
                .unwrap_or((0.0, 0.0));
            return Err(Error::Quadrature {
                achieved,
                requested,
            });
        }

        Ok(Self {
            z,
            m,
            max_degree,
            radius,
            kernel_terms,
            angular_points: n_theta,
            moments: total[..base].to_vec(),
            moment_errors: errors[..base].to_vec(),
            tail_bound: (ln_tail - ln_kzz).exp(),
        })
    }

    /// `∫ w^p w̄^q |k_{m,z}(w)|² e^{-|w|^m} dA(w)`, i.e. `B_m(w^p w̄^q)(z)`.
    pub fn moment(&self, p: u32, q: u32) -> Option<Complex64> {
        (p + q <= self.max_degree).then(|| self.moments[moment_index(p, q)])
    }

    pub fn apply(&self, f: &BiPoly) -> Result<Complex64> {
        if f.degree() > self.max_degree {
            return Err(Error::Precondition(format!(
                "oracle built for degree {} but f has degree {}",
                self.max_degree,
                f.degree()
            )));
        }
        Ok(f.terms()
            .map(|((p, q), c)| c * self.moments[moment_index(p, q)])
            .sum())
    }

    /// Estimated absolute error of [`apply`](Self::apply) on `f`.
    pub fn error_estimate(&self, f: &BiPoly) -> f64 {
        f.terms()
            .map(|((p, q), c)| {
                c.norm() * (self.moment_errors[moment_index(p, q)] + self.tail_bound)
            })
            .sum()
    }

    pub fn point(&self) -> Complex64 {
        self.z
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kernel_terms(&self) -> usize {
        self.kernel_terms
    }

    pub fn angular_points(&self) -> usize {
        self.angular_points
    }
}

/// `B_m f(z)` by direct quadrature of the defining integral.
pub fn berezin_quadrature(
    f: &BiPoly,
    z: Complex64,
    m: f64,
    ctx: &NumericContext,
) -> Result<Complex64> {
    QuadratureOracle::new(z, m, f.degree(), ctx)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_gamma;
    use crate::poly::parse_poly;

    #[test]
    fn modulus_squared_at_origin() {
        let ctx = NumericContext::default();
        let f = parse_poly("z*zb").unwrap();
        for m in [1.0, 2.0, 3.0, 4.0] {
            let got = berezin_quadrature(&f, Complex64::default(), m, &ctx).unwrap();
            let want = (log_gamma(4.0 / m).unwrap() - log_gamma(2.0 / m).unwrap()).exp();
            assert!(
                (got.re - want).abs() < 1e-12 * want,
                "m = {m}: {got} vs {want}"
            );
            assert!(got.im.abs() < 1e-12);
        }
        let got = berezin_quadrature(&f, Complex64::default(), 4.0, &ctx).unwrap();
        assert!((got.re - 0.564_189_583_547_756_3).abs() < 1e-12);
    }

    #[test]
    fn harmonic_example() {
        let ctx = NumericContext::default();
        let f = parse_poly("z^2").unwrap();
        let z = Complex64::new(1.0, 1.0);
        let got = berezin_quadrature(&f, z, 3.0, &ctx).unwrap();
        assert!((got - Complex64::new(0.0, 2.0)).norm() < 1e-10, "{got}");
    }

    #[test]
    fn degree_guard() {
        let ctx = NumericContext::default();
        let oracle = QuadratureOracle::new(Complex64::new(0.5, 0.0), 2.0, 2, &ctx).unwrap();
        assert!(oracle.apply(&parse_poly("z^3").unwrap()).is_err());
        assert!(oracle.moment(2, 1).is_none());
        assert!(oracle.moment(1, 1).is_some());
    }
}
