use nalgebra::DMatrix;

use super::rank::singular_values;
use crate::berezin::{binomial, factorial, ln_kb_weight};
use crate::numerics::{checked_exp, ln_d_coeff};
use crate::{Error, Result};

/// Coefficient `a_{j,k}(m)` of `z^{k+τ} z̄^k` in
/// `T(z^{j+τ} z̄^j) = K·B_m(z^{j+τ} z̄^j) - K·z^{j+τ} z̄^j`:
///
/// * `m·d_{k+τ} d_k / d_{j+τ+k}` for `k < j`,
/// * `m·(d_{k+τ} d_k / d_{j+τ+k} - d_{k-j})` for `k >= j`.
///
/// Column `j = 0` is returned as an exact zero.
pub fn t_coefficient(j: usize, k: usize, tau: usize, m: f64) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            func: "t_coefficient",
            arg: m,
        });
    }
    if j == 0 {
        return Ok(0.0);
    }
    let ln_w = ln_kb_weight(j, k, tau, m)?;
    let context = || format!("a_{{{j},{k}}} (τ={tau}, m={m})");
    let w = checked_exp(ln_w, context)?;
    if k < j {
        return Ok(w);
    }
    // m·ratio - m·d_{k-j} = -m·ratio·expm1(ln d_{k-j} - ln ratio)
    let ln_d = ln_d_coeff(k - j, m)? + m.ln();
    Ok(-w * (ln_d - ln_w).exp_m1())
}

/// `[a_{j,k}(m)]` for `k = 0..=rows`, `j = 0..=n`; row `k`, column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub tau: usize,
    pub n: usize,
    pub rows: usize,
    pub m: f64,
    pub entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn build(tau: usize, n: usize, m: f64, rows: usize) -> Result<Self> {
        let mut entries = DMatrix::zeros(rows + 1, n + 1);
        for j in 0..=n {
            for k in 0..=rows {
                entries[(k, j)] = t_coefficient(j, k, tau, m)?;
            }
        }
        Ok(Self {
            tau,
            n,
            rows,
            m,
            entries,
        })
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.entries[(k, j)]
    }

    /// Columns `1..=n`, the non-harmonic directions.
    pub fn nonharmonic_block(&self) -> DMatrix<f64> {
        self.entries.columns(1, self.n).into_owned()
    }

    /// Square submatrix on the given rows and columns `1..=n`.
    pub fn square_block(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), self.n, |i, c| self.entries[(rows[i], c + 1)])
    }
}

/// `[B_2]` on the basis `z^τ, z^{1+τ} z̄, …, z^{n+τ} z̄^n`: entry `(s, j)` is
/// `C(j+τ, s+τ)·C(j, s)·(j-s)!` for `s <= j`, zero below the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B2Matrix {
    pub n: usize,
    pub tau: usize,
    pub entries: Vec<Vec<u128>>,
}

impl B2Matrix {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n + 1, self.n + 1, |s, j| self.entries[s][j] as f64)
    }
}

/// Singular values of `[B_2] - I`, descending, and the right singular
/// vector belonging to the smallest.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectProfile {
    pub singular_values: Vec<f64>,
    pub null_vector: Vec<f64>,
}

impl B2Matrix {
    /// `[B_2] - I` has a zero first column and a zero last row; what is left
    /// is the upper triangular block `N` on rows `0..n`, columns `1..=n`.
    /// Its entries reach `1e10` by `n = 10`, so a plain SVD only resolves
    /// singular values down to about `1e-6`. Each `σ_i(N)` is taken either
    /// from `N` directly or as `1/σ(N⁻¹)`, whichever has the smaller error
    /// bound; the triangular inverse is accurate to working precision here.
    pub fn defect_profile(&self) -> Result<DefectProfile> {
        let n = self.n;
        let full = self.to_dmatrix() - DMatrix::identity(n + 1, n + 1);
        let null_vector = equilibrated_null_vector(&full)?;
        if n == 0 {
            return Ok(DefectProfile {
                singular_values: vec![0.0],
                null_vector,
            });
        }
        let block = full.view((0, 1), (n, n)).into_owned();
        let inverse = block
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::LinearAlgebra("singular triangular block".into()))?;
        let direct = singular_values(block)?;
        let inv = singular_values(inverse)?;
        let (hi, lo) = (direct[0], 1.0 / inv[0]);
        let mut values: Vec<f64> = (0..n)
            .map(|i| {
                let d = direct[i];
                let r = 1.0 / inv[n - 1 - i];
                // direct error ~ ε·σ_max/σ, inverse error ~ ε·σ/σ_min
                if d * d >= hi * lo {
                    d
                } else {
                    r
                }
            })
            .collect();
        values.push(0.0);
        Ok(DefectProfile {
            singular_values: values,
            null_vector,
        })
    }
}

/// Right singular vector of the smallest singular value, computed after
/// scaling rows and columns to unit max-norm and mapped back. Row scaling
/// leaves the null space alone; column scaling `D` maps it by `D⁻¹`.
fn equilibrated_null_vector(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let scale = |v: f64| if v > 0.0 { 1.0 / v } else { 1.0 };
    let rows: Vec<f64> = a.row_iter().map(|r| scale(r.amax())).collect();
    let mut b = a.clone();
    for (i, mut r) in b.row_iter_mut().enumerate() {
        r *= rows[i];
    }
    let cols: Vec<f64> = b.column_iter().map(|c| scale(c.amax())).collect();
    for (j, mut c) in b.column_iter_mut().enumerate() {
        c *= cols[j];
    }
    let svd = b
        .try_svd(false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::LinearAlgebra("SVD did not converge".into()))?;
    let smallest = (0..svd.singular_values.len())
        .min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
        .unwrap_or(0);
    let v_t = svd.v_t.expect("requested");
    let mut v: Vec<f64> = v_t
        .row(smallest)
        .iter()
        .zip(&cols)
        .map(|(x, c)| x * c)
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lead = v
        .iter()
        .copied()
        .fold(0.0, |acc: f64, x| if x.abs() > acc.abs() { x } else { acc });
    let sign = if lead < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign / norm);
    Ok(v)
}

pub fn b2_matrix(n: usize, tau: usize) -> B2Matrix {
    let entries = (0..=n)
        .map(|s| {
            (0..=n)
                .map(|j| {
                    if s > j {
                        0
                    } else {
                        let (j, s, t) = (j as u32, s as u32, tau as u32);
                        binomial(j + t, s + t) * binomial(j, s) * factorial(j - s)
                    }
                })
                .collect()
        })
        .collect();
    B2Matrix { n, tau, entries }
}
