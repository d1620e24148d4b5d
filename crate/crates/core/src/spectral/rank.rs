use nalgebra::DMatrix;

use super::matrix::OperatorMatrix;
use crate::numerics::NumericContext;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub tau: usize,
    pub n: usize,
    pub m: f64,
    pub rows: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
}

impl RankProfile {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Numerical rank at `tol·σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let cut = tol * self.sigma_max();
        self.singular_values.iter().filter(|s| **s > cut).count()
    }
}

pub(crate) fn singular_values(a: DMatrix<f64>) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let svd = a
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::LinearAlgebra("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Singular values of the `(K+1)×n` block `[a_{j,k}]`, `j = 1..=n`.
pub fn rank_profile(tau: usize, n: usize, m: f64, rows: usize) -> Result<RankProfile> {
    if rows < n {
        return Err(Error::Precondition(format!(
            "K = {rows} is smaller than n = {n}"
        )));
    }
    let a = OperatorMatrix::build(tau, n, m, rows)?;
    Ok(RankProfile {
        tau,
        n,
        m,
        rows,
        singular_values: singular_values(a.nonharmonic_block())?,
    })
}

/// [`rank_profile`] at the context's row count, doubled once if `σ_n`
/// moves by more than 1%.
pub fn rank_profile_converged(
    tau: usize,
    n: usize,
    m: f64,
    ctx: &NumericContext,
) -> Result<RankProfile> {
    let rows = ctx.rows_for(n);
    let first = rank_profile(tau, n, m, rows)?;
    let second = match rank_profile(tau, n, m, 2 * rows) {
        Ok(p) => p,
        Err(e) if e.is_range_guard() => return Ok(first),
        Err(e) => return Err(e),
    };
    let (a, b) = (first.sigma_min(), second.sigma_min());
    if (b - a).abs() > 0.01 * a.abs() {
        Ok(second)
    } else {
        Ok(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m2_full_rank() {
        for n in 1..=10 {
            for tau in [0, 3] {
                let p = rank_profile(tau, n, 2.0, 2 * n + 8).unwrap();
                assert_eq!(p.singular_values.len(), n);
                assert!(p.sigma_min() > 0.0);
                assert!(p.singular_values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn single_column_norm() {
        let rows = 60;
        let p = rank_profile(0, 1, 2.0, rows).unwrap();
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 0..=rows {
            if k > 0 {
                fact *= k as f64;
            }
            s += 1.0 / (fact * fact);
        }
        let want = 2.0 * f64::sqrt(s);
        assert!((p.sigma_max() - want).abs() < 1e-13 * want);
    }

    #[test]
    fn zero_column_caps_rank() {
        let a = OperatorMatrix::build(1, 4, 1.3, 16).unwrap();
        let s = singular_values(a.entries).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s[4] <= 1e-12 * s[0]);
    }

    #[test]
    fn rows_below_n_rejected() {
        assert!(matches!(
            rank_profile(0, 4, 2.0, 3),
            Err(Error::Precondition(_))
        ));
        assert!(rank_profile(0, 0, 2.0, 8)
            .unwrap()
            .singular_values
            .is_empty());
    }

    #[test]
    fn converged_profile() {
        let ctx = NumericContext::default();
        let p = rank_profile_converged(2, 4, 3.0, &ctx).unwrap();
        assert!(p.rows == 16 || p.rows == 32);
        assert!(p.sigma_min() > 0.0);
    }
}
