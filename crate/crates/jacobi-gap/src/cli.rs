//! Command-line front end.
//!
//! One invocation runs one method. The density grid goes out as CSV with
//! header `theta,phi,t,E,nu`; `compare` and `glue` also produce a JSON
//! report. With `--output FILE` the CSV lands in the file and the report on
//! stdout; without it the CSV goes to stdout and the report to stderr, so a
//! bare invocation can still be piped into a plotting tool.
//!
//! Exit codes: 0 success, 2 argument error, 3 solver failure, 4 `compare`
//! found a disagreement.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::harness::{self, OverlapPolicy, Verdict};
use crate::mc_oracle::{self, McConfig};
use crate::ode_solver::{self, OdeConfig, RkStatus};
use crate::params::{phi_to_t, EnsembleParams, GridRow, Method, Seam, SolutionGrid};
use crate::series_solver::{default_degree, SeriesSolution};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 2;
const EXIT_SOLVER: i32 = 3;
const EXIT_DISAGREE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Adaptive Runge-Kutta integration of the sigma form.
    Rk,
    /// Exact rational series about t = 0.
    Series,
    /// Accept-reject Monte Carlo estimate of the first-eigenphase law.
    Mc,
    /// Run both methods and report their agreement.
    Compare,
    /// Full-interval grid glued from expansion, integrator and series.
    Glue,
}

#[derive(Debug, Parser)]
#[command(
    name = "jacobi-gap",
    version,
    about = "Lowest-eigenphase distribution of the Jacobi ensemble J_N^(a,b)"
)]
struct Cli {
    /// Computation to run.
    #[arg(long, value_enum)]
    method: MethodArg,

    /// Exponent a, as a rational like "-1/2" or a decimal.
    #[arg(long, allow_hyphen_values = true)]
    a: String,

    /// Exponent b, same formats as --a.
    #[arg(long, allow_hyphen_values = true)]
    b: String,

    /// Number of levels N.
    #[arg(long = "N", allow_hyphen_values = true)]
    n: String,

    /// Series truncation degree [default: 100 for N <= 2, 300 for N <= 5].
    #[arg(long)]
    degree: Option<usize>,

    /// Offset of the integration start, t0 = 1 - eps.
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,

    /// Relative step tolerance of the integrator.
    #[arg(long, default_value_t = 1e-5)]
    reltol: f64,

    /// Absolute step tolerance of the integrator.
    #[arg(long, default_value_t = 1e-6)]
    abstol: f64,

    /// Where the integration stops.
    #[arg(long = "t-end", default_value_t = 0.01)]
    t_end: f64,

    /// Accepted Monte Carlo sample count.
    #[arg(long, default_value_t = 200_000)]
    samples: usize,

    /// Monte Carlo RNG seed.
    #[arg(long, default_value_t = 0x6a61636f62)]
    seed: u64,

    /// Rows in the output grid [default: 400 N + 1].
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,

    /// Write the CSV here; the report then goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parse `argv`, run the request, and return the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with code 0, usage errors
            // on stderr with code 2
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            let code = match &e {
                Error::Domain(_) => {
                    eprintln!("error: {e}");
                    eprintln!("run with --help for flag syntax and defaults");
                    EXIT_USAGE
                }
                Error::Io(_) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
                _ => {
                    eprintln!("solver failure: {e}");
                    EXIT_SOLVER
                }
            };
            code
        }
    }
}

fn dispatch(cli: &Cli) -> crate::Result<i32> {
    let params = EnsembleParams::parse(&cli.a, &cli.b, &cli.n)?;
    let ode_cfg = OdeConfig {
        eps: cli.eps,
        reltol: cli.reltol,
        abstol: cli.abstol,
        t_end: cli.t_end,
        ..OdeConfig::default()
    };
    let points = cli
        .grid_points
        .unwrap_or(((400.0 * params.n).round() as usize) + 1);
    let degree = || {
        cli.degree.or_else(|| default_degree(params.n)).ok_or_else(|| {
            Error::domain("no default series degree for N > 5; pass --degree explicitly")
        })
    };

    match cli.method {
        MethodArg::Series => {
            let sol = SeriesSolution::solve(&params, degree()?)?;
            let grid = sol.density_grid(points)?;
            emit(cli, &grid, None)?;
            Ok(EXIT_OK)
        }
        MethodArg::Rk => {
            let sol = ode_solver::integrate(&params, &ode_cfg)?;
            if params.a > 0.0 {
                eprintln!("warning: a > 0: the square-root branch of the sigma form is unreliable");
            }
            if let RkStatus::Warned(detail) = &sol.status {
                eprintln!("warning: {detail}");
            }
            let grid = sol.density_grid(1.0 / 400.0)?;
            if let RkStatus::Failed(detail) = &sol.status {
                eprintln!(
                    "solver failure: {detail} (reached t = {:.6e})",
                    sol.t_span.0
                );
                emit(cli, &grid, None)?;
                return Ok(EXIT_SOLVER);
            }
            emit(cli, &grid, None)?;
            Ok(EXIT_OK)
        }
        MethodArg::Mc => {
            let cfg = McConfig {
                samples: cli.samples,
                seed: cli.seed,
                ..McConfig::default()
            };
            let grid = mc_grid(&params, &cfg, points)?;
            emit(cli, &grid, None)?;
            Ok(EXIT_OK)
        }
        MethodArg::Compare => {
            let report = harness::compare(&params, &ode_cfg, degree()?, &OverlapPolicy::default())?;
            let grid = compare_grid(&params, &report)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(cli, &grid, Some(&json))?;
            Ok(match report.verdict {
                Verdict::Agree => EXIT_OK,
                Verdict::Disagree => EXIT_DISAGREE,
                Verdict::RkFailed => {
                    eprintln!(
                        "solver failure: {}",
                        report.rk_detail.as_deref().unwrap_or("integration failed")
                    );
                    EXIT_SOLVER
                }
            })
        }
        MethodArg::Glue => {
            let grid = harness::glue(&params, &ode_cfg, degree()?, points)?;
            let report = GlueReport::from_grid(&grid);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(cli, &grid, Some(&json))?;
            Ok(EXIT_OK)
        }
    }
}

/// Report record accompanying a glued grid.
#[derive(Debug, Serialize)]
struct GlueReport<'a> {
    method: Method,
    params: (f64, f64, f64),
    points: usize,
    seams: &'a [Seam],
    integral_nu_dphi: f64,
}

impl<'a> GlueReport<'a> {
    fn from_grid(grid: &'a SolutionGrid) -> Self {
        GlueReport {
            method: grid.method,
            params: grid.params,
            points: grid.rows.len(),
            seams: &grid.seams,
            integral_nu_dphi: grid.integral_nu_dphi(),
        }
    }
}

/// Empirical gap probability and density of the first eigenphase, tabulated
/// on a uniform theta-grid. `E` is one minus the empirical CDF of the
/// smallest angle; `nu` is its centered finite difference.
fn mc_grid(params: &EnsembleParams, cfg: &McConfig, points: usize) -> crate::Result<SolutionGrid> {
    if points < 2 {
        return Err(Error::domain("grid needs at least 2 points"));
    }
    let n = params.n;
    let pi = std::f64::consts::PI;
    let phis: Vec<f64> = (0..points)
        .map(|i| pi * i as f64 / (points - 1) as f64)
        .collect();
    let cdf = mc_oracle::empirical_first_cdf(params, cfg, &phis)?;
    let mut rows = Vec::with_capacity(points);
    for (i, &phi) in phis.iter().enumerate() {
        let (ilo, ihi) = (i.saturating_sub(1), (i + 1).min(points - 1));
        let nu = (cdf[ihi] - cdf[ilo]) / (phis[ihi] - phis[ilo]);
        rows.push(GridRow {
            t: phi_to_t(phi)?,
            phi,
            theta: n * phi / pi,
            e: 1.0 - cdf[i],
            nu,
        });
    }
    Ok(SolutionGrid::new(Method::Mc, params, rows))
}

/// Series-method values on the comparison window, as the CSV counterpart of
/// the report record.
fn compare_grid(
    params: &EnsembleParams,
    report: &harness::ComparisonReport,
) -> crate::Result<SolutionGrid> {
    let sol = SeriesSolution::solve(params, report.series_degree)?;
    let (lo, hi) = match report.overlap_theta {
        Some(window) => window,
        // integration collapsed before any overlap existed; fall back to the
        // series trust region so the CSV is still meaningful
        None => (0.25 * params.n, 0.75 * params.n),
    };
    let spacing = OverlapPolicy::default().max_theta_spacing;
    let points = (((hi - lo) / spacing).ceil() as usize + 1).max(2);
    let pi = std::f64::consts::PI;
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let theta = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let phi = theta * pi / params.n;
        let t = phi_to_t(phi)?;
        rows.push(GridRow {
            t,
            phi,
            theta,
            e: sol.e_tilde(t),
            nu: sol.nu_t(t),
        });
    }
    Ok(SolutionGrid::new(Method::Series, params, rows))
}

fn render_csv(grid: &SolutionGrid) -> String {
    let mut out = String::with_capacity(32 + grid.rows.len() * 110);
    out.push_str("theta,phi,t,E,nu\n");
    for row in &grid.rows {
        // 17 significant digits: round-trips f64 exactly, reruns match bytewise
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.theta, row.phi, row.t, row.e, row.nu
        );
    }
    out
}

fn emit(cli: &Cli, grid: &SolutionGrid, report_json: Option<&str>) -> crate::Result<()> {
    let csv = render_csv(grid);
    match &cli.output {
        Some(path) => {
            std::fs::write(path, csv.as_bytes())?;
            if let Some(json) = report_json {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(json.as_bytes())?;
                stdout.write_all(b"\n")?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(csv.as_bytes())?;
            if let Some(json) = report_json {
                let mut stderr = std::io::stderr().lock();
                stderr.write_all(json.as_bytes())?;
                stderr.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> Vec<String> {
        let mut v = vec!["jacobi-gap".to_string()];
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    }

    #[test]
    fn rejects_unknown_method() {
        assert_eq!(run(args(&["--method", "magic", "--a", "0", "--b", "0", "--N", "1"])), 2);
    }

    #[test]
    fn rejects_malformed_rational() {
        assert_eq!(
            run(args(&["--method", "series", "--a", "1/0", "--b", "0", "--N", "1"])),
            2
        );
    }

    #[test]
    fn requires_degree_above_default_tiers() {
        assert_eq!(
            run(args(&["--method", "series", "--a", "0", "--b", "0", "--N", "7"])),
            2
        );
    }

    #[test]
    fn csv_layout_is_stable() {
        let p = EnsembleParams::parse("-1/2", "-1/2", "1").unwrap();
        let sol = SeriesSolution::solve(&p, 12).unwrap();
        let grid = sol.density_grid(5).unwrap();
        let csv = render_csv(&grid);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,phi,t,E,nu"));
        assert_eq!(lines.clone().count(), 5);
        for line in lines {
            assert_eq!(line.split(',').count(), 5);
            for field in line.split(',') {
                let v: f64 = field.parse().unwrap();
                assert!(v.is_finite());
            }
        }
    }

    #[test]
    fn mc_grid_monotone_cdf() {
        let p = EnsembleParams::parse("-1/2", "-1/2", "2").unwrap();
        let cfg = McConfig {
            samples: 2_000,
            seed: 3,
            ..McConfig::default()
        };
        let grid = mc_grid(&p, &cfg, 41).unwrap();
        assert_eq!(grid.rows.len(), 41);
        assert_eq!(grid.rows[0].e, 1.0);
        assert_eq!(grid.rows[40].e, 0.0);
        for pair in grid.rows.windows(2) {
            assert!(pair[1].e <= pair[0].e);
        }
    }
}
