use num_complex::Complex64;
use serde::Serialize;

use super::output::{csv_table, fmt_complex, fmt_f64, to_json, C, SCHEMA_VERSION};
use super::{Command, Format, Outcome};
use crate::berezin::{berezin_m2_exact, berezin_series, kb_strip_series_on_disk, QuadratureOracle};
use crate::numerics::NumericContext;
use crate::poly::{decompose_strips, parse_poly, BiPoly};
use crate::spectral::{
    b2_matrix, fixed_point_check, rank_profile_converged, scan_exceptional, OperatorMatrix,
    ScanReport, Verdict,
};
use crate::{Error, Result};

pub const ORACLE_TOL: f64 = 1e-6;
pub const EXACT_TOL: f64 = 1e-10;

pub(super) fn dispatch(cmd: &Command, format: Format, ctx: &NumericContext) -> Result<Outcome> {
    match cmd {
        Command::Transform {
            m,
            poly,
            at,
            radius,
        } => transform(*m, poly, *at, *radius, format, ctx),
        Command::Check { m, poly } => check(*m, poly, format, ctx),
        Command::Matrix { n, tau, m } => matrix(*n, *tau, *m, format, ctx),
        Command::Scan {
            n,
            tau,
            from,
            to,
            step,
        } => scan(*n, *tau, *from, *to, *step, format, ctx),
        Command::OracleDiff { m, poly, at } => oracle_diff(m, poly.as_deref(), at, format, ctx),
    }
}

fn ok(text: String) -> Result<Outcome> {
    Ok(Outcome { text, code: 0 })
}

fn io(e: std::io::Error) -> Error {
    Error::Precondition(format!("output: {e}"))
}

#[derive(Serialize)]
struct Term {
    p: u32,
    q: u32,
    coeff: C,
}

fn terms(f: &BiPoly) -> Vec<Term> {
    f.sorted_terms()
        .into_iter()
        .map(|((p, q), c)| Term {
            p,
            q,
            coeff: c.into(),
        })
        .collect()
}

#[derive(Serialize)]
struct StripOut {
    tau: i32,
    radius: f64,
    tail_bound: f64,
    coeffs: Vec<C>,
}

#[derive(Serialize)]
struct TransformOut {
    schema_version: u32,
    command: &'static str,
    m: f64,
    poly: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<Term>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    at: Option<C>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<C>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strips: Option<Vec<StripOut>>,
}

fn transform(
    m: f64,
    poly: &str,
    at: Option<Complex64>,
    radius: f64,
    format: Format,
    ctx: &NumericContext,
) -> Result<Outcome> {
    let f = parse_poly(poly)?;
    let mut out = TransformOut {
        schema_version: SCHEMA_VERSION,
        command: "transform",
        m,
        poly: f.to_string(),
        exact: None,
        terms: None,
        at: at.map(C::from),
        value: None,
        strips: None,
    };
    if let Some(z) = at {
        let v = if m == 2.0 {
            berezin_m2_exact(&f).eval(z)
        } else {
            berezin_series(&f, z, m, ctx)?
        };
        out.value = Some(v.into());
        return ok(match format {
            Format::Json => to_json(&out).map_err(io)?,
            Format::Csv => csv_table(
                &["m", "re", "im"],
                &[vec![fmt_f64(m), fmt_f64(v.re), fmt_f64(v.im)]],
            )
            .map_err(io)?,
            Format::Plain => format!("{}\n", fmt_complex(v)),
        });
    }
    if m == 2.0 {
        let g = berezin_m2_exact(&f);
        let text = match format {
            Format::Json => {
                out.exact = Some(g.to_string());
                out.terms = Some(terms(&g));
                to_json(&out).map_err(io)?
            }
            Format::Csv => {
                let rows: Vec<Vec<String>> = g
                    .sorted_terms()
                    .into_iter()
                    .map(|((p, q), c)| {
                        vec![p.to_string(), q.to_string(), fmt_f64(c.re), fmt_f64(c.im)]
                    })
                    .collect();
                csv_table(&["p", "q", "re", "im"], &rows).map_err(io)?
            }
            Format::Plain => format!("{g}\n"),
        };
        return ok(text);
    }
    let strips = decompose_strips(&f)
        .into_values()
        .map(|s| kb_strip_series_on_disk(&s, m, radius, ctx))
        .collect::<Result<Vec<_>>>()?;
    let text = match format {
        Format::Json => {
            out.strips = Some(
                strips
                    .iter()
                    .map(|s| StripOut {
                        tau: s.tau,
                        radius: s.radius,
                        tail_bound: s.tail_bound,
                        coeffs: s.coeffs.iter().map(|c| (*c).into()).collect(),
                    })
                    .collect(),
            );
            to_json(&out).map_err(io)?
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for s in &strips {
                for (l, c) in s.coeffs.iter().enumerate() {
                    rows.push(vec![
                        s.tau.to_string(),
                        l.to_string(),
                        fmt_f64(c.re),
                        fmt_f64(c.im),
                    ]);
                }
            }
            csv_table(&["tau", "l", "re", "im"], &rows).map_err(io)?
        }
        Format::Plain => {
            let mut t = format!("K(z,z)·B_m f on |z| <= {radius}, m = {m}\n");
            for s in &strips {
                t.push_str(&format!(
                    "tau = {}: {} terms, tail <= {:e}\n",
                    s.tau,
                    s.coeffs.len(),
                    s.tail_bound
                ));
                for (l, c) in s.coeffs.iter().enumerate() {
                    t.push_str(&format!("  {l}: {}\n", fmt_complex(*c)));
                }
            }
            t
        }
    };
    ok(text)
}

#[derive(Serialize)]
struct Offender {
    tau: i32,
    k: usize,
    residual: C,
}

#[derive(Serialize)]
struct StripCheck {
    tau: i32,
    rows: usize,
    truncated: bool,
    max_abs: f64,
    residuals: Vec<C>,
}

#[derive(Serialize)]
struct CheckOut {
    schema_version: u32,
    command: &'static str,
    m: f64,
    poly: String,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_offender: Option<Offender>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    strips: Vec<StripCheck>,
}

fn check(m: f64, poly: &str, format: Format, ctx: &NumericContext) -> Result<Outcome> {
    let f = parse_poly(poly)?;
    let report = fixed_point_check(&f, m, ctx);
    let code = match report.verdict {
        Verdict::Fixed => 0,
        Verdict::NotFixed { .. } => 1,
        Verdict::Indeterminate { .. } => 2,
    };
    let text = match format {
        Format::Json => {
            let (first_offender, reason) = match &report.verdict {
                Verdict::NotFixed { tau, k, residual } => (
                    Some(Offender {
                        tau: *tau,
                        k: *k,
                        residual: (*residual).into(),
                    }),
                    None,
                ),
                Verdict::Indeterminate { reason } => (None, Some(reason.clone())),
                Verdict::Fixed => (None, None),
            };
            to_json(&CheckOut {
                schema_version: SCHEMA_VERSION,
                command: "check",
                m,
                poly: f.to_string(),
                verdict: report.verdict.label(),
                first_offender,
                reason,
                strips: report
                    .strips
                    .iter()
                    .map(|s| StripCheck {
                        tau: s.tau,
                        rows: s.rows,
                        truncated: s.truncated(),
                        max_abs: s.max_abs,
                        residuals: s.residuals.iter().map(|c| (*c).into()).collect(),
                    })
                    .collect(),
            })
            .map_err(io)?
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for s in &report.strips {
                for (k, (r, t)) in s.residuals.iter().zip(&s.tolerances).enumerate() {
                    rows.push(vec![
                        s.tau.to_string(),
                        k.to_string(),
                        fmt_f64(r.re),
                        fmt_f64(r.im),
                        fmt_f64(*t),
                    ]);
                }
            }
            csv_table(&["tau", "k", "re", "im", "tolerance"], &rows).map_err(io)?
        }
        Format::Plain => {
            let mut t = match &report.verdict {
                Verdict::Fixed => "fixed\n".to_string(),
                Verdict::NotFixed { tau, k, residual } => format!(
                    "not fixed: tau = {tau}, k = {k}, rho_k = {}\n",
                    fmt_complex(*residual)
                ),
                Verdict::Indeterminate { reason } => format!("indeterminate: {reason}\n"),
            };
            for s in &report.strips {
                t.push_str(&format!(
                    "  tau = {:>3}  rows = {:>3}{}  max |rho| = {:e}\n",
                    s.tau,
                    s.rows,
                    if s.truncated() { " (truncated)" } else { "" },
                    s.max_abs
                ));
            }
            t
        }
    };
    Ok(Outcome { text, code })
}

#[derive(Serialize)]
struct B2Out {
    schema_version: u32,
    command: &'static str,
    kind: &'static str,
    n: usize,
    tau: i32,
    entries: Vec<Vec<u128>>,
    /// Singular values of `[B_2] - I`, descending.
    defect_singular_values: Vec<f64>,
}

#[derive(Serialize)]
struct OperatorOut {
    schema_version: u32,
    command: &'static str,
    kind: &'static str,
    n: usize,
    tau: i32,
    m: f64,
    rows: usize,
    /// Row `k`, column `j`.
    entries: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
    rank_rows: usize,
}

fn matrix(
    n: usize,
    tau: i32,
    m: Option<f64>,
    format: Format,
    ctx: &NumericContext,
) -> Result<Outcome> {
    let t = tau.unsigned_abs() as usize;
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = match m {
        None => {
            let b = b2_matrix(n, t);
            if format == Format::Json {
                let defect = b.defect_profile()?;
                return ok(to_json(&B2Out {
                    schema_version: SCHEMA_VERSION,
                    command: "matrix",
                    kind: "b2",
                    n,
                    tau,
                    entries: b.entries,
                    defect_singular_values: defect.singular_values,
                })
                .map_err(io)?);
            }
            let header = std::iter::once("s".to_string())
                .chain((0..=n).map(|j| format!("j{j}")))
                .collect();
            let rows = b
                .entries
                .iter()
                .enumerate()
                .map(|(s, r)| {
                    std::iter::once(s.to_string())
                        .chain(r.iter().map(|v| v.to_string()))
                        .collect()
                })
                .collect();
            (header, rows)
        }
        Some(m) => {
            let k = ctx.rows_for(n);
            let a = OperatorMatrix::build(t, n, m, k)?;
            let profile = rank_profile_converged(t, n, m, ctx)?;
            if format == Format::Json {
                return ok(to_json(&OperatorOut {
                    schema_version: SCHEMA_VERSION,
                    command: "matrix",
                    kind: "operator",
                    n,
                    tau,
                    m,
                    rows: k,
                    entries: a
                        .entries
                        .row_iter()
                        .map(|r| r.iter().copied().collect())
                        .collect(),
                    singular_values: profile.singular_values,
                    rank_rows: profile.rows,
                })
                .map_err(io)?);
            }
            let header = std::iter::once("k".to_string())
                .chain((0..=n).map(|j| format!("j{j}")))
                .collect();
            let rows = a
                .entries
                .row_iter()
                .enumerate()
                .map(|(k, r)| {
                    std::iter::once(k.to_string())
                        .chain(r.iter().map(|v| fmt_f64(*v)))
                        .collect()
                })
                .collect();
            (header, rows)
        }
    };
    let text = match format {
        Format::Csv => {
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_table(&h, &rows).map_err(io)?
        }
        _ => {
            let mut t = String::new();
            for r in std::iter::once(&header).chain(&rows) {
                t.push_str(&r.join("\t"));
                t.push('\n');
            }
            t
        }
    };
    ok(text)
}

#[derive(Serialize)]
struct RootOut {
    m: f64,
    bracket: [f64; 2],
    sigma_min: f64,
    sigma_max: f64,
}

#[derive(Serialize)]
struct RejectedOut {
    bracket: [f64; 2],
    reason: String,
}

#[derive(Serialize)]
struct FlagOut {
    m: f64,
    reason: String,
}

#[derive(Serialize)]
struct M2Out {
    m: f64,
    det: f64,
    relative_det: f64,
    nonsingular: bool,
}

#[derive(Serialize)]
struct ScanOut {
    schema_version: u32,
    command: &'static str,
    tau: i32,
    scanned_tau: usize,
    n: usize,
    rows: usize,
    row_set: Vec<usize>,
    complete: bool,
    m_grid: Vec<f64>,
    det_values: Vec<f64>,
    sigma_min: Vec<f64>,
    flagged: Vec<FlagOut>,
    /// Candidates only; nothing here is a confirmed exceptional weight.
    roots: Vec<RootOut>,
    rejected: Vec<RejectedOut>,
    m2_check: Option<M2Out>,
}

fn scan_json(tau: i32, r: ScanReport) -> ScanOut {
    ScanOut {
        schema_version: SCHEMA_VERSION,
        command: "scan",
        tau,
        scanned_tau: r.tau,
        n: r.n,
        rows: r.rows,
        complete: r.is_complete(),
        row_set: r.row_set,
        m_grid: r.m_grid,
        det_values: r.det_values,
        sigma_min: r.sigma_min,
        flagged: r
            .flagged
            .into_iter()
            .map(|f| FlagOut {
                m: f.m,
                reason: f.reason,
            })
            .collect(),
        roots: r
            .roots
            .into_iter()
            .map(|c| RootOut {
                m: c.m,
                bracket: [c.bracket.0, c.bracket.1],
                sigma_min: c.sigma_min,
                sigma_max: c.sigma_max,
            })
            .collect(),
        rejected: r
            .rejected
            .into_iter()
            .map(|b| RejectedOut {
                bracket: [b.bracket.0, b.bracket.1],
                reason: b.reason,
            })
            .collect(),
        m2_check: r.m2_check.map(|c| M2Out {
            m: 2.0,
            det: c.det,
            relative_det: c.relative_det,
            nonsingular: c.nonsingular,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn scan(
    n: usize,
    tau: i32,
    from: f64,
    to: f64,
    step: f64,
    format: Format,
    ctx: &NumericContext,
) -> Result<Outcome> {
    let report = scan_exceptional(tau.unsigned_abs() as usize, n, from, to, step, ctx)?;
    if !report.is_complete() {
        eprintln!(
            "warning: {} grid points flagged by overflow guards",
            report.flagged.len()
        );
    }
    let text = match format {
        Format::Json => to_json(&scan_json(tau, report)).map_err(io)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .m_grid
                .iter()
                .zip(report.det_values.iter().zip(&report.sigma_min))
                .map(|(m, (d, s))| vec![fmt_f64(*m), fmt_f64(*d), fmt_f64(*s)])
                .collect();
            csv_table(&["m", "det", "sigma_min"], &rows).map_err(io)?
        }
        Format::Plain => {
            let mut t = format!(
                "n = {n}, tau = {tau}, {} grid points in [{from}, {to}], rows {:?}\n",
                report.m_grid.len(),
                report.row_set
            );
            if let Some(c) = &report.m2_check {
                t.push_str(&format!(
                    "det S_n(2) = {:e} ({})\n",
                    c.det,
                    if c.nonsingular {
                        "nonsingular"
                    } else {
                        "numerically singular"
                    }
                ));
            }
            t.push_str(&format!("flagged points: {}\n", report.flagged.len()));
            t.push_str(&format!("candidate roots: {}\n", report.roots.len()));
            for r in &report.roots {
                t.push_str(&format!(
                    "  m = {} (sigma_min/sigma_max = {:e})\n",
                    r.m,
                    r.sigma_min / r.sigma_max
                ));
            }
            t.push_str(&format!(
                "rejected sign changes: {}\n",
                report.rejected.len()
            ));
            t
        }
    };
    ok(text)
}

#[derive(Serialize)]
struct DiffRow {
    m: f64,
    z: C,
    poly: String,
    series: C,
    quadrature: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<C>,
    deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_deviation: Option<f64>,
}

#[derive(Serialize)]
struct DiffOut {
    schema_version: u32,
    command: &'static str,
    tolerance: f64,
    exact_tolerance: f64,
    max_deviation: f64,
    max_exact_deviation: f64,
    pass: bool,
    rows: Vec<DiffRow>,
}

fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn oracle_diff(
    ms: &[f64],
    poly: Option<&str>,
    at: &[Complex64],
    format: Format,
    ctx: &NumericContext,
) -> Result<Outcome> {
    let ms = if ms.is_empty() {
        vec![1.0, 2.0, 4.0]
    } else {
        ms.to_vec()
    };
    let points = if at.is_empty() {
        vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-1.5, 0.0),
        ]
    } else {
        at.to_vec()
    };
    let polys: Vec<BiPoly> = match poly {
        Some(text) => vec![parse_poly(text)?],
        None => (0..=4u32)
            .flat_map(|d| {
                (0..=d).map(move |p| BiPoly::monomial(p, d - p, Complex64::new(1.0, 0.0)))
            })
            .collect(),
    };
    let max_degree = polys.iter().map(BiPoly::degree).max().unwrap_or(0);
    let mut rows = Vec::new();
    for &m in &ms {
        for &z in &points {
            let oracle = QuadratureOracle::new(z, m, max_degree, ctx)?;
            for f in &polys {
                let series = berezin_series(f, z, m, ctx)?;
                let quadrature = oracle.apply(f)?;
                let exact = (m == 2.0).then(|| berezin_m2_exact(f).eval(z));
                rows.push(DiffRow {
                    m,
                    z: z.into(),
                    poly: f.to_string(),
                    series: series.into(),
                    quadrature: quadrature.into(),
                    exact: exact.map(C::from),
                    deviation: rel_dev(series, quadrature),
                    exact_deviation: exact.map(|e| rel_dev(series, e).max(rel_dev(quadrature, e))),
                });
            }
        }
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let max_exact_deviation = rows
        .iter()
        .filter_map(|r| r.exact_deviation)
        .fold(0.0, f64::max);
    let pass = max_deviation <= ORACLE_TOL && max_exact_deviation <= EXACT_TOL;
    let text = match format {
        Format::Json => to_json(&DiffOut {
            schema_version: SCHEMA_VERSION,
            command: "oracle-diff",
            tolerance: ORACLE_TOL,
            exact_tolerance: EXACT_TOL,
            max_deviation,
            max_exact_deviation,
            pass,
            rows,
        })
        .map_err(io)?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.m),
                        fmt_f64(r.z.re),
                        fmt_f64(r.z.im),
                        r.poly.clone(),
                        fmt_f64(r.series.re),
                        fmt_f64(r.series.im),
                        fmt_f64(r.quadrature.re),
                        fmt_f64(r.quadrature.im),
                        fmt_f64(r.deviation),
                        r.exact_deviation.map(fmt_f64).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_table(
                &[
                    "m", "z_re", "z_im", "poly", "series_re", "series_im", "quad_re", "quad_im",
                    "deviation", "exact_deviation",
                ],
                &table,
            )
            .map_err(io)?
        }
        Format::Plain => format!(
            "{} comparisons, max deviation {:e} (tolerance {:e}), max deviation from exact {:e} (tolerance {:e}): {}\n",
            rows.len(),
            max_deviation,
            ORACLE_TOL,
            max_exact_deviation,
            EXACT_TOL,
            if pass { "pass" } else { "FAIL" }
        ),
    };
    Ok(Outcome {
        text,
        code: if pass { 0 } else { 1 },
    })
}
