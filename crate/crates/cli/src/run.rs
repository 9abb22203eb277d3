//! Command implementations, independent of argument parsing.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::time::Instant;

use hill_spectral::oracle::{finite_difference_lambda, integrate_reference};
use hill_spectral::potential::PeriodicPotential;
use hill_spectral::shooting::{monodromy_at, run_ladder, LadderConfig};
use hill_spectral::spectral::{
    density, density_curve, density_from, discriminant_coefficients, find_bands, in_band,
    BandSearch, BoundaryCondition, EdgeTag,
};
use hill_spectral::variational::{
    density_near_edge, growth_rate, locate_edge, variational_monodromy,
};
use hill_spectral::Error;

use crate::format::{write_csv, write_json, Format, Row};
use crate::report::{
    BandRow, BenchRow, DensityRow, EdgeRow, EdgeSummary, OracleRow, Report, VariationalRow,
};

/// How a run ended, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration; nothing was computed. Exit code 2.
    Usage(String),
    /// A numerical failure; whatever was computed has been written. Exit
    /// code 1.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn numerical(e: Error) -> Failure {
    match e {
        Error::InvalidArgument(m) | Error::Parse(m) => Failure::Usage(m),
        Error::NotFound(m) => Failure::Usage(format!("unknown potential {m}")),
        Error::UnsupportedBoundary { alpha } => {
            Failure::Usage(format!("edge formulas need alpha = 0 or pi/2, got {alpha}"))
        }
        other => Failure::Numerical(other.to_string()),
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PeriodicPotential,
    pub alpha: Option<f64>,
    pub tol: f64,
    pub format: Format,
}

pub const TOL_RANGE: (f64, f64) = (1e-12, 1e-2);

impl RunConfig {
    pub fn new(
        potential: PeriodicPotential,
        alpha: Option<f64>,
        tol: f64,
        format: Format,
    ) -> Result<Self, Failure> {
        if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
            return Err(Failure::Usage(format!(
                "tolerance must lie in [1e-12, 1e-2], got {tol}"
            )));
        }
        Ok(RunConfig {
            potential,
            alpha,
            tol,
            format,
        })
    }

    fn boundary(&self) -> Result<BoundaryCondition, Failure> {
        BoundaryCondition::new(self.alpha.unwrap_or(0.0)).map_err(numerical)
    }

    fn report<R>(&self, command: &str, alpha: Option<f64>, rows: Vec<R>) -> Report<R> {
        Report {
            command: command.to_string(),
            potential: self.potential.name().to_string(),
            period: self.potential.period(),
            alpha,
            tol: self.tol,
            edge: None,
            rows,
        }
    }
}

fn emit<R: Row>(out: &mut dyn Write, format: Format, report: &Report<R>) -> Result<(), Failure> {
    let res = match format {
        Format::Csv => write_csv(out, &report.rows),
        Format::Json => write_json(out, report),
    };
    res.map_err(|e| Failure::Numerical(format!("cannot write output: {e}")))
}

/// Parses `lo:hi`.
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("need finite lo < hi, got {s:?}"));
    }
    Ok((lo, hi))
}

/// Parses an angle given as a number, `pi`, `pi/k` or `m*pi/k`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (
            n.to_string(),
            d.parse::<f64>().map_err(|_| format!("bad angle {s:?}"))?,
        ),
        None => (t.clone(), 1.0),
    };
    let factor = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(m) => m
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| format!("bad angle {s:?}"))?,
        None => return Err(format!("bad angle {s:?}")),
    };
    Ok(factor * PI / den)
}

/// λ values from a comma-separated list, or else from a file holding
/// whitespace- or comma-separated numbers (`#` starts a comment).
pub fn parse_lambdas(spec: &str) -> Result<Vec<f64>, String> {
    let inline: Result<Vec<f64>, _> = spec.split(',').map(|x| x.trim().parse::<f64>()).collect();
    if let Ok(v) = inline {
        return Ok(v);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            out.push(
                tok.parse()
                    .map_err(|_| format!("{spec}: bad number {tok:?}"))?,
            );
        }
    }
    if out.is_empty() {
        return Err(format!("{spec}: no lambda values"));
    }
    Ok(out)
}

/// `n` evenly spaced points on `[lo, hi]`; one point means `lo`.
pub fn grid((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn bands(
    cfg: &RunConfig,
    out: &mut dyn Write,
    range: (f64, f64),
    scan_points: usize,
    edge_tol: f64,
) -> Result<(), Failure> {
    if scan_points < 2 {
        return Err(Failure::Usage("band scans need --grid >= 2".into()));
    }
    let search = BandSearch {
        scan_points,
        edge_tol,
        tol: cfg.tol,
    };
    let chart = find_bands(&cfg.potential, range, &search).map_err(numerical)?;
    let rows: Vec<BandRow> = chart.bands.iter().map(BandRow::from).collect();
    emit(out, cfg.format, &cfg.report("bands", None, rows))
}

pub fn density_grid(
    cfg: &RunConfig,
    out: &mut dyn Write,
    lambdas: &[f64],
    rho: bool,
) -> Result<(), Failure> {
    let bc = cfg.boundary()?;
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut problems = Vec::new();
    for (r, &l) in density_curve(&cfg.potential, &bc, lambdas, cfg.tol)
        .into_iter()
        .zip(lambdas)
    {
        match r {
            Ok(p) => {
                if !p.converged {
                    problems.push(format!("no convergence at lambda = {l}"));
                }
                rows.push(DensityRow::from_point(&p));
            }
            Err(Error::Indeterminate { .. }) => rows.push(DensityRow::indeterminate(l)),
            Err(e) => {
                problems.push(e.to_string());
                break;
            }
        }
    }
    if rho {
        // cumulative trapezoid of f over the grid; indeterminate rows add
        // nothing
        let mut acc = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for r in rows.iter_mut() {
            let f = r.f.unwrap_or(0.0);
            if let Some((l0, f0)) = prev {
                acc += 0.5 * (f0 + f) * (r.lambda - l0);
            }
            prev = Some((r.lambda, f));
            r.rho_trapezoid = Some(acc);
        }
    }
    emit(
        out,
        cfg.format,
        &cfg.report("density", Some(bc.alpha()), rows),
    )?;
    match problems.first() {
        None => Ok(()),
        Some(first) => Err(Failure::Numerical(format!(
            "{} of {} points failed; first: {first}",
            problems.len(),
            lambdas.len()
        ))),
    }
}

/// Edge report: locates `λ*` in `bracket`, then compares the clamped and
/// near-edge densities on an approach sequence.
pub fn edge(
    cfg: &RunConfig,
    out: &mut dyn Write,
    bracket: (f64, f64),
    approach: Option<Vec<f64>>,
    steps: usize,
    spacing: f64,
) -> Result<(), Failure> {
    let width = (cfg.tol * 1e-4).max(1e-13);
    let star = locate_edge(&cfg.potential, bracket, width).map_err(numerical)?;
    let (c, _) = discriminant_coefficients(&cfg.potential, star, 1e-12).map_err(numerical)?;
    let tag = EdgeTag::classify(&c);
    let alpha = match (cfg.alpha, tag) {
        (Some(a), _) => a,
        (None, EdgeTag::NeumannIndeterminate) => FRAC_PI_2,
        (None, _) => 0.0,
    };
    let bc = BoundaryCondition::new(alpha).map_err(numerical)?;
    if !(bc.is_dirichlet() || bc.is_neumann()) {
        return Err(Failure::Usage(format!(
            "edge formulas need alpha = 0 or pi/2, got {alpha}"
        )));
    }
    let lambdas = match approach {
        Some(v) => v,
        None => {
            let probe =
                discriminant_coefficients(&cfg.potential, star + 10.0 * spacing.min(1e-4), cfg.tol)
                    .map_err(numerical)?
                    .0;
            let side = if in_band(probe.discriminant_defect()) {
                1.0
            } else {
                -1.0
            };
            (1..=steps)
                .rev()
                .map(|k| star + side * k as f64 * spacing)
                .collect()
        }
    };
    let mut rows: Vec<EdgeRow> = Vec::with_capacity(lambdas.len());
    let mut failure = None;
    for &l in &lambdas {
        let step = density(&cfg.potential, &bc, l, cfg.tol)
            .and_then(|p| Ok((p, density_near_edge(&cfg.potential, &bc, l, star, cfg.tol)?)));
        let (p, fix) = match step {
            Ok(v) => v,
            Err(e) => {
                failure = Some(numerical(e));
                break;
            }
        };
        let rate = rows
            .last()
            .filter(|prev| prev.f_clamped > 0.0 && p.f > 0.0)
            .and_then(|prev| growth_rate((prev.lambda, prev.f_clamped), (l, p.f), star).ok());
        rows.push(EdgeRow {
            lambda_star: star,
            lambda: l,
            f_clamped: p.f,
            f_near_edge: fix,
            rate,
        });
    }
    let mut report = cfg.report("edge", Some(alpha), rows);
    report.edge = Some(EdgeSummary {
        lambda_star: star,
        tag,
    });
    emit(out, cfg.format, &report)?;
    failure.map_or(Ok(()), Err)
}

pub fn vcheck(
    cfg: &RunConfig,
    out: &mut dyn Write,
    lambdas: &[f64],
    step: f64,
) -> Result<(), Failure> {
    let p = &cfg.potential;
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut failure = None;
    for &l in lambdas {
        let row = (|| {
            let (_, d) = variational_monodromy(p, l, cfg.tol)?;
            let fd = |k: usize| {
                finite_difference_lambda(
                    |x| monodromy_at(p, x, cfg.tol).map(|(c, _)| [c.c12, c.c21][k]),
                    l,
                    step,
                )
            };
            let (fd_u_xl, fd_v_l) = (fd(0)?, fd(1)?);
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
            Ok::<_, Error>(VariationalRow {
                lambda: l,
                fd_u_xl,
                u_xl: d.u_xl,
                fd_v_l,
                v_l: d.v_l,
                rel_diff: rel(d.u_xl, fd_u_xl).max(rel(d.v_l, fd_v_l)),
            })
        })();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                failure = Some(numerical(e));
                break;
            }
        }
    }
    emit(out, cfg.format, &cfg.report("vcheck", None, rows))?;
    failure.map_or(Ok(()), Err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Shooting {
    Simple,
    Double,
}

/// Times `repetitions` passes over the grid and counts the points whose
/// ladder does not converge.
pub fn bench(
    cfg: &RunConfig,
    out: &mut dyn Write,
    lambdas: &[f64],
    repetitions: usize,
    modes: &[Shooting],
) -> Result<(), Failure> {
    if repetitions == 0 {
        return Err(Failure::Usage("need at least one repetition".into()));
    }
    let bc = cfg.boundary()?;
    let mut rows = Vec::new();
    for &mode in modes {
        let config = match mode {
            Shooting::Simple => LadderConfig::simple_shooting(),
            Shooting::Double => LadderConfig::default(),
        };
        let pass = || {
            lambdas
                .iter()
                .filter(|&&l| {
                    !run_ladder(&cfg.potential, l, cfg.tol, &config, |c| {
                        Ok(density_from(c, &bc))
                    })
                    .is_ok_and(|ladder| ladder.converged)
                })
                .count()
        };
        let t = Instant::now();
        let mut failures = 0;
        for _ in 0..repetitions {
            failures = pass();
        }
        rows.push(BenchRow {
            shooting: format!("{mode:?}").to_lowercase(),
            points: lambdas.len(),
            repetitions,
            mean_seconds: t.elapsed().as_secs_f64() / repetitions as f64,
            failures,
        });
    }
    emit(
        out,
        cfg.format,
        &cfg.report("bench", Some(bc.alpha()), rows),
    )
}

pub fn oracle(
    cfg: &RunConfig,
    out: &mut dyn Write,
    lambdas: &[f64],
    rel_tol: f64,
) -> Result<(), Failure> {
    let mut rows = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let s = integrate_reference(&cfg.potential, l, rel_tol).map_err(numerical)?;
        rows.push(OracleRow {
            lambda: l,
            u: s.u,
            u_x: s.u_x,
            v: s.v,
            v_x: s.v_x,
            error_estimate: s.error_estimate,
        });
    }
    emit(out, cfg.format, &cfg.report("oracle", None, rows))
}
