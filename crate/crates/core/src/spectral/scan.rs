use nalgebra::DMatrix;
use rayon::prelude::*;

use super::matrix::OperatorMatrix;
use super::rank::singular_values;
use crate::numerics::NumericContext;
use crate::{Error, Result};

/// Bisection stops once the bracket is this narrow.
pub const ROOT_WIDTH: f64 = 1e-8;
/// A refined sign change is kept only if `σ_min < RANK_TOL·σ_max` there, on
/// the column-scaled block.
pub const RANK_TOL: f64 = 1e-9;
const SINGULAR_AT_2: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct M2Check {
    pub det: f64,
    /// `|det|` relative to the product of column norms.
    pub relative_det: f64,
    pub nonsingular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRoot {
    pub m: f64,
    pub bracket: (f64, f64),
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// A sign change that did not survive refinement or the σ cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedBracket {
    pub bracket: (f64, f64),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedPoint {
    pub index: usize,
    pub m: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub tau: usize,
    pub n: usize,
    /// Row count minus one of the matrix behind `sigma_min`.
    pub rows: usize,
    /// Rows `k` forming the square block `S_n`.
    pub row_set: Vec<usize>,
    pub m_grid: Vec<f64>,
    /// `det S_n(m)`; NaN at flagged points.
    pub det_values: Vec<f64>,
    /// Smallest singular value of columns `1..=n` after scaling each to unit
    /// norm; NaN at flagged points.
    pub sigma_min: Vec<f64>,
    pub flagged: Vec<FlaggedPoint>,
    pub roots: Vec<CandidateRoot>,
    pub rejected: Vec<RejectedBracket>,
    pub m2_check: Option<M2Check>,
}

impl ScanReport {
    pub fn is_complete(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub fn scan_grid(m_lo: f64, m_hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(m_lo > 0.0 && m_hi > m_lo && m_hi.is_finite()) {
        return Err(Error::Precondition(format!(
            "need 0 < m_lo < m_hi, got [{m_lo}, {m_hi}]"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Precondition(format!(
            "step must be positive, got {step}"
        )));
    }
    let count = ((m_hi - m_lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((m_lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn det_at(tau: usize, n: usize, rows: &[usize], m: f64) -> Result<f64> {
    let k_max = *rows.iter().max().unwrap_or(&0);
    let a = OperatorMatrix::build(tau, n, m, k_max)?;
    Ok(a.square_block(rows).lu().determinant())
}

/// Extreme singular values of columns `1..=n` scaled to unit norm. The raw
/// columns span many orders of magnitude, which would make `σ_min/σ_max`
/// small whatever the rank.
fn sigma_extremes(tau: usize, n: usize, rows: usize, m: f64) -> Result<(f64, f64)> {
    let mut block = OperatorMatrix::build(tau, n, m, rows)?.nonharmonic_block();
    for mut col in block.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let s = singular_values(block)?;
    Ok((s[s.len() - 1], s[0]))
}

/// [`sigma_extremes`] at `rows`, replaced by `2·rows` if `σ_min` moves by
/// more than 1%.
fn sigma_extremes_converged(tau: usize, n: usize, rows: usize, m: f64) -> Result<(f64, f64)> {
    let first = sigma_extremes(tau, n, rows, m)?;
    match sigma_extremes(tau, n, 2 * rows, m) {
        Ok(second) if (second.0 - first.0).abs() > 0.01 * first.0 => Ok(second),
        Ok(_) => Ok(first),
        Err(e) if e.is_range_guard() => Ok(first),
        Err(e) => Err(e),
    }
}

fn hadamard_relative(a: &DMatrix<f64>) -> f64 {
    let norms: f64 = a.column_iter().map(|c| c.norm()).product();
    if norms == 0.0 {
        0.0
    } else {
        a.clone().lu().determinant().abs() / norms
    }
}

/// Chooses `n` rows of `a` greedily by residual norm, i.e. column-pivoted
/// QR of `aᵀ`. Returned in ascending order.
pub fn pivoted_rows(a: &DMatrix<f64>, n: usize) -> Vec<usize> {
    let mut work: Vec<Vec<f64>> = a.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut chosen = Vec::with_capacity(n);
    for _ in 0..n.min(work.len()) {
        let (best, _) = work
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, r.iter().map(|v| v * v).sum::<f64>()))
            .fold(
                (usize::MAX, -1.0),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        if best == usize::MAX {
            break;
        }
        chosen.push(best);
        let q: Vec<f64> = {
            let r = &work[best];
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            r.iter().map(|v| v / norm).collect()
        };
        for (i, row) in work.iter_mut().enumerate() {
            if i != best {
                let dot: f64 = row.iter().zip(&q).map(|(a, b)| a * b).sum();
                row.iter_mut().zip(&q).for_each(|(v, b)| *v -= dot * b);
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Fixed rows for `S_n`: `0..n` unless that block is numerically singular
/// at `m = 2`, in which case the pivoted choice over rows `0..=K` is used.
fn choose_rows(tau: usize, n: usize, rows: usize) -> Result<(Vec<usize>, M2Check)> {
    let a = OperatorMatrix::build(tau, n, 2.0, rows)?;
    let default: Vec<usize> = (0..n).collect();
    let check = |set: &[usize]| {
        let s = a.square_block(set);
        let relative_det = hadamard_relative(&s);
        M2Check {
            det: s.lu().determinant(),
            relative_det,
            nonsingular: relative_det > SINGULAR_AT_2,
        }
    };
    let first = check(&default);
    if first.nonsingular {
        return Ok((default, first));
    }
    let set = pivoted_rows(&a.nonharmonic_block(), n);
    let second = check(&set);
    Ok((set, second))
}

/// Scans `det S_n(m)` over a grid, refines sign changes by bisection and
/// keeps those where the full column block is numerically rank deficient.
/// Every reported root is a candidate only.
pub fn scan_exceptional(
    tau: usize,
    n: usize,
    m_lo: f64,
    m_hi: f64,
    step: f64,
    ctx: &NumericContext,
) -> Result<ScanReport> {
    ctx.validate()?;
    let m_grid = scan_grid(m_lo, m_hi, step)?;
    let rows = ctx.rows_for(n);
    if n == 0 {
        return Ok(ScanReport {
            tau,
            n,
            rows,
            row_set: Vec::new(),
            m_grid,
            det_values: Vec::new(),
            sigma_min: Vec::new(),
            flagged: Vec::new(),
            roots: Vec::new(),
            rejected: Vec::new(),
            m2_check: None,
        });
    }
    let (row_set, m2) = choose_rows(tau, n, rows)?;

    let points: Vec<Result<(f64, f64)>> = m_grid
        .par_iter()
        .map(|&m| {
            let det = det_at(tau, n, &row_set, m)?;
            let (smin, _) = sigma_extremes(tau, n, rows, m)?;
            Ok((det, smin))
        })
        .collect();

    let mut det_values = Vec::with_capacity(points.len());
    let mut sigma_min = Vec::with_capacity(points.len());
    let mut flagged = Vec::new();
    for (index, p) in points.into_iter().enumerate() {
        match p {
            Ok((d, s)) => {
                det_values.push(d);
                sigma_min.push(s);
            }
            Err(e) if e.is_range_guard() || matches!(e, Error::LinearAlgebra(_)) => {
                det_values.push(f64::NAN);
                sigma_min.push(f64::NAN);
                flagged.push(FlaggedPoint {
                    index,
                    m: m_grid[index],
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }

    let brackets: Vec<(f64, f64, f64, f64)> = (0..m_grid.len().saturating_sub(1))
        .filter_map(|i| {
            let (a, b) = (det_values[i], det_values[i + 1]);
            let change = a.is_finite() && b.is_finite() && (a * b < 0.0 || a == 0.0);
            change.then_some((m_grid[i], m_grid[i + 1], a, b))
        })
        .collect();

    let refined: Vec<std::result::Result<CandidateRoot, RejectedBracket>> = brackets
        .par_iter()
        .map(|&(lo, hi, dlo, _)| refine(tau, n, rows, &row_set, lo, hi, dlo))
        .collect();
    let mut roots = Vec::new();
    let mut rejected = Vec::new();
    for r in refined {
        match r {
            Ok(root) => roots.push(root),
            Err(rej) => rejected.push(rej),
        }
    }

    Ok(ScanReport {
        tau,
        n,
        rows,
        row_set,
        m_grid,
        det_values,
        sigma_min,
        flagged,
        roots,
        rejected,
        m2_check: Some(m2),
    })
}

fn refine(
    tau: usize,
    n: usize,
    rows: usize,
    row_set: &[usize],
    lo: f64,
    hi: f64,
    dlo: f64,
) -> std::result::Result<CandidateRoot, RejectedBracket> {
    let bracket = (lo, hi);
    let reject = |reason: String| RejectedBracket { bracket, reason };
    let (mut a, mut b, mut fa) = (lo, hi, dlo);
    if fa != 0.0 {
        while b - a > ROOT_WIDTH {
            let mid = 0.5 * (a + b);
            let fm = det_at(tau, n, row_set, mid).map_err(|e| reject(e.to_string()))?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
    } else {
        b = a;
    }
    let m = 0.5 * (a + b);
    let (sigma_min, sigma_max) =
        sigma_extremes_converged(tau, n, rows, m).map_err(|e| reject(e.to_string()))?;
    if sigma_min < RANK_TOL * sigma_max {
        Ok(CandidateRoot {
            m,
            bracket,
            sigma_min,
            sigma_max,
        })
    } else {
        Err(reject(format!(
            "sign change at m = {m} but σ_min/σ_max = {:e}",
            sigma_min / sigma_max
        )))
    }
}
