//! Cross-validation of the two solution methods, and glueing of a
//! full-interval density from the pieces that are trustworthy where.
//!
//! The comparison evaluates both densities on a shared `theta`-grid inside
//! an overlap window where both methods should be reliable: by default the
//! central half `[0.25 N, 0.75 N]`, clipped to the series trust region
//! (`t <= 0.9`) and to the span the integrator actually reached. The RK
//! density is read off a dense sample of its continuous output by linear
//! interpolation in `theta`; the series density is evaluated directly.
//!
//! A glued grid covers `theta in [0, N]` with three pieces: the small-angle
//! expansion near `theta = 0`, the integrator in the middle, and the series
//! in the tail. Crossover points are placed where the adjacent pieces agree
//! best, and each seam's residual mismatch is recorded in the grid metadata.
//! When the integrator did not finish cleanly the middle piece is dropped
//! and the expansion hands over to the series directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc_oracle::{self, McConfig};
use crate::ode_solver::{self, OdeConfig, RkSolution, RkStatus};
use crate::params::{phi_to_t, EnsembleParams, GridRow, Method, Seam, SolutionGrid};
use crate::series_solver::{default_degree, SeriesSolution};
use crate::special::TaylorE;

/// Largest density mismatch tolerated at a glue seam.
pub const MAX_SEAM_GAP: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct OverlapPolicy {
    /// Window `[lo_frac N, hi_frac N]` in `theta` before clipping.
    pub lo_frac: f64,
    pub hi_frac: f64,
    /// Series values at `t` beyond this are not trusted.
    pub trust_t: f64,
    /// Agreement threshold on the sup density difference.
    pub threshold: f64,
    /// Grid resolution of the comparison (and of the RK dense sample).
    pub max_theta_spacing: f64,
}

impl Default for OverlapPolicy {
    fn default() -> Self {
        OverlapPolicy {
            lo_frac: 0.25,
            hi_frac: 0.75,
            trust_t: 0.9,
            threshold: 5e-3,
            max_theta_spacing: 1.0 / 400.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Agree,
    Disagree,
    RkFailed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Agree => "agree",
            Verdict::Disagree => "disagree",
            Verdict::RkFailed => "rk-failed",
        })
    }
}

/// Outcome record of one comparison; serializes to a single JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// `(a, b, N)`.
    pub params: (f64, f64, f64),
    pub series_degree: usize,
    /// Clipped window actually used, `None` when it came out empty.
    pub overlap_theta: Option<(f64, f64)>,
    /// Sup of `|nu_series - nu_rk|` over the window.
    pub sup_diff_nu: Option<f64>,
    /// Root mean square of the same differences.
    pub l2_diff_nu: Option<f64>,
    pub rk_status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk_detail: Option<String>,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn theta_of_t(t: f64, n: f64) -> f64 {
    (2.0 * t - 1.0).clamp(-1.0, 1.0).acos() * n / std::f64::consts::PI
}

/// Run both methods and quantify their agreement on the overlap window.
pub fn compare(
    params: &EnsembleParams,
    ode_cfg: &OdeConfig,
    degree: usize,
    policy: &OverlapPolicy,
) -> Result<ComparisonReport> {
    let series = SeriesSolution::solve(params, degree)?;
    let rk = ode_solver::integrate(params, ode_cfg)?;
    compare_solved(params, &series, &rk, policy)
}

/// Comparison core over already-computed solutions.
pub fn compare_solved(
    params: &EnsembleParams,
    series: &SeriesSolution,
    rk: &RkSolution,
    policy: &OverlapPolicy,
) -> Result<ComparisonReport> {
    let n = params.n;
    let trust_theta = theta_of_t(policy.trust_t, n);
    let lo = (policy.lo_frac * n)
        .max(trust_theta)
        .max(theta_of_t(rk.t_span.1, n));
    let hi = (policy.hi_frac * n).min(theta_of_t(rk.t_span.0, n));

    let (rk_detail, warning) = status_notes(params, &rk.status);

    if !(lo < hi) {
        if matches!(rk.status, RkStatus::Failed(_)) {
            // the integrator stopped before reaching the window
            return Ok(ComparisonReport {
                params: (params.a, params.b, params.n),
                series_degree: series.degree,
                overlap_theta: None,
                sup_diff_nu: None,
                l2_diff_nu: None,
                rk_status: rk.status.as_str(),
                rk_detail,
                threshold: policy.threshold,
                verdict: Verdict::RkFailed,
                warning,
            });
        }
        return Err(Error::domain(format!(
            "empty overlap window [{lo:.4}, {hi:.4}] with a healthy integration"
        )));
    }

    let rk_grid = rk.density_grid(policy.max_theta_spacing)?;
    let points = ((hi - lo) / policy.max_theta_spacing).ceil() as usize + 1;
    let mut sup: f64 = 0.0;
    let mut sumsq = 0.0;
    for i in 0..points {
        let theta = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let t = phi_to_t(theta * std::f64::consts::PI / n)?;
        let nu_series = series.nu_t(t);
        let nu_rk = rk_grid
            .interp_nu(theta)
            .ok_or_else(|| Error::domain(format!("theta {theta} left the RK span")))?;
        let d = (nu_series - nu_rk).abs();
        sup = sup.max(d);
        sumsq += d * d;
    }
    let l2 = (sumsq / points as f64).sqrt();

    let verdict = match &rk.status {
        RkStatus::Failed(_) => Verdict::RkFailed,
        RkStatus::Ok if sup <= policy.threshold => Verdict::Agree,
        _ => Verdict::Disagree,
    };
    Ok(ComparisonReport {
        params: (params.a, params.b, params.n),
        series_degree: series.degree,
        overlap_theta: Some((lo, hi)),
        sup_diff_nu: Some(sup),
        l2_diff_nu: Some(l2),
        rk_status: rk.status.as_str(),
        rk_detail,
        threshold: policy.threshold,
        verdict,
        warning,
    })
}

fn status_notes(params: &EnsembleParams, status: &RkStatus) -> (Option<String>, Option<String>) {
    let detail = match status {
        RkStatus::Ok => None,
        RkStatus::Warned(d) | RkStatus::Failed(d) => Some(d.clone()),
    };
    let warning = if params.a > 0.0 {
        Some("a > 0: the square-root branch of the sigma form is unreliable".into())
    } else if let RkStatus::Warned(d) = status {
        Some(d.clone())
    } else {
        None
    };
    (detail, warning)
}

/// Scan `[lo, hi]` for the `theta` where two density evaluators agree best.
fn best_seam(lo: f64, hi: f64, n: f64, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
    const CANDIDATES: usize = 200;
    let mut best = (0.5 * (lo + hi), f64::INFINITY);
    for i in 0..=CANDIDATES {
        let theta = lo + (hi - lo) * i as f64 / CANDIDATES as f64;
        if theta <= 0.0 || theta >= n {
            continue;
        }
        let gap = (f(theta) - g(theta)).abs();
        if gap < best.1 {
            best = (theta, gap);
        }
    }
    best
}

/// Assemble a full-interval density grid from the expansion, the integrator
/// and the series, joined at the seams where they agree best.
pub fn glue(
    params: &EnsembleParams,
    ode_cfg: &OdeConfig,
    degree: usize,
    points: usize,
) -> Result<SolutionGrid> {
    let series = SeriesSolution::solve(params, degree)?;
    let rk = ode_solver::integrate(params, ode_cfg)?;
    glue_solved(params, &series, &rk, points)
}

/// Gluing core over already-computed solutions.
pub fn glue_solved(
    params: &EnsembleParams,
    series: &SeriesSolution,
    rk: &RkSolution,
    points: usize,
) -> Result<SolutionGrid> {
    if points < 2 {
        return Err(Error::domain("glued grid needs at least 2 points"));
    }
    let taylor = TaylorE::new(params)?;

    let n = params.n;
    let pi = std::f64::consts::PI;
    let nu_taylor = |theta: f64| taylor.nu(theta * pi / n);
    let nu_series = |theta: f64| series.nu_t(phi_to_t(theta * pi / n).unwrap());
    let nu_rk = |theta: f64| {
        rk.nu_at(phi_to_t(theta * pi / n).unwrap())
            .unwrap_or(f64::INFINITY)
    };

    let use_rk = rk.status.is_ok();
    let mut seams = Vec::new();
    if use_rk {
        let theta_rk_min = theta_of_t(rk.t_span.1, n);
        let theta_rk_max = theta_of_t(rk.t_span.0, n);
        let (s1, g1) = best_seam(
            (0.01 * n).max(theta_rk_min),
            0.15 * n,
            n,
            &nu_taylor,
            &nu_rk,
        );
        let (s2, g2) = best_seam(
            0.25 * n,
            (0.9 * n).min(theta_rk_max),
            n,
            &nu_rk,
            &nu_series,
        );
        let worst = g1.max(g2);
        if !(worst <= MAX_SEAM_GAP) {
            return Err(Error::GlueFailure {
                best_gap: worst,
                max_gap: MAX_SEAM_GAP,
            });
        }
        seams.push(Seam {
            theta: s1,
            gap: g1,
            lower_method: Method::Taylor,
            upper_method: Method::Rk,
        });
        seams.push(Seam {
            theta: s2,
            gap: g2,
            lower_method: Method::Rk,
            upper_method: Method::Series,
        });
    } else {
        let (s, g) = best_seam(0.02 * n, 0.35 * n, n, &nu_taylor, &nu_series);
        if !(g <= MAX_SEAM_GAP) {
            return Err(Error::GlueFailure {
                best_gap: g,
                max_gap: MAX_SEAM_GAP,
            });
        }
        seams.push(Seam {
            theta: s,
            gap: g,
            lower_method: Method::Taylor,
            upper_method: Method::Series,
        });
    }

    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let theta = n * i as f64 / (points - 1) as f64;
        let phi = (theta * pi / n).min(pi);
        let t = phi_to_t(phi)?;
        let piece = seams
            .iter()
            .take_while(|s| theta >= s.theta)
            .last()
            .map(|s| s.upper_method)
            .unwrap_or(Method::Taylor);
        let (e, nu) = match piece {
            Method::Taylor => (taylor.e(phi), taylor.nu(phi)),
            Method::Rk => {
                let t = t.clamp(rk.t_span.0, rk.t_span.1);
                (rk.e_at(t).unwrap(), rk.nu_at(t).unwrap())
            }
            _ => (series.e_tilde(t), series.nu_t(t)),
        };
        rows.push(GridRow { t, phi, theta, e, nu });
    }
    let mut grid = SolutionGrid::new(Method::Glued, params, rows);
    grid.seams = seams;
    Ok(grid)
}

/// Binomial concentration bound used to judge the Monte Carlo CDF distance:
/// `sqrt(ln(2/delta) / (2 samples))`.
pub fn dkw_bound(samples: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

/// Sup distance between the sampler's empirical first-eigenphase CDF and
/// `1 - E` from the series method, over the given angles.
pub fn validate_mc(
    params: &EnsembleParams,
    cfg: &McConfig,
    phis: &[f64],
    degree: Option<usize>,
) -> Result<f64> {
    if phis.is_empty() {
        return Err(Error::domain("need at least one probe angle"));
    }
    let degree = degree
        .or_else(|| default_degree(params.n))
        .ok_or_else(|| Error::domain("no default series degree for this N; pass one"))?;
    let series = SeriesSolution::solve(params, degree)?;
    let empirical = mc_oracle::empirical_first_cdf(params, cfg, phis)?;
    let mut sup: f64 = 0.0;
    for (&phi, &emp) in phis.iter().zip(&empirical) {
        let reference = 1.0 - series.e(phi)?;
        sup = sup.max((emp - reference).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dkw_bound_reference_value() {
        // ln(2/1e-3) / (2 * 2e5), square root, frozen from a 30-digit run
        let b = dkw_bound(200_000, 1e-3);
        assert!((b - 0.0043591577338810769).abs() < 1e-16, "b = {b}");
    }

    #[test]
    fn arcsine_compare_agrees() {
        let p = EnsembleParams::parse("-1/2", "-1/2", "1").unwrap();
        let report = compare(&p, &OdeConfig::default(), 50, &OverlapPolicy::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Agree);
        assert_eq!(report.rk_status, "ok");
        assert!(report.warning.is_none());
        let (lo, hi) = report.overlap_theta.unwrap();
        assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.75).abs() < 1e-12);
        let sup = report.sup_diff_nu.unwrap();
        assert!(sup <= 5e-3, "sup = {sup}");
        assert!(report.l2_diff_nu.unwrap() <= sup);
        // deterministic: a second run reproduces the numbers exactly
        let again = compare(&p, &OdeConfig::default(), 50, &OverlapPolicy::default()).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&report).unwrap());
    }

    #[test]
    fn arcsine_glue_has_seams_and_unit_mass() {
        let p = EnsembleParams::parse("-1/2", "-1/2", "1").unwrap();
        let grid = glue(&p, &OdeConfig::default(), 50, 401).unwrap();
        assert_eq!(grid.rows.len(), 401);
        assert_eq!(grid.seams.len(), 2);
        assert!(grid.seams.iter().all(|s| s.gap <= MAX_SEAM_GAP));
        assert!(grid.seams[0].theta < grid.seams[1].theta);
        let mass = grid.integral_nu_dphi();
        assert!((mass - 1.0).abs() < 5e-3, "mass = {mass}");
        // uniform ensemble: every row density is 1/pi
        for row in &grid.rows {
            assert!(
                (row.nu - std::f64::consts::FRAC_1_PI).abs() < 1e-4,
                "theta = {}, nu = {}",
                row.theta,
                row.nu
            );
        }
    }

    #[test]
    fn validate_mc_uniform_within_dkw() {
        let p = EnsembleParams::parse("-1/2", "-1/2", "1").unwrap();
        let cfg = McConfig {
            samples: 20_000,
            seed: 17,
            envelope_scale: 1.1,
        };
        let phis: Vec<f64> = (1..40).map(|i| std::f64::consts::PI * i as f64 / 40.0).collect();
        let sup = validate_mc(&p, &cfg, &phis, Some(40)).unwrap();
        assert!(sup <= dkw_bound(20_000, 1e-3), "sup = {sup}");
    }

    #[test]
    fn validate_mc_rejects_empty_grid() {
        let p = EnsembleParams::parse("-1/2", "-1/2", "1").unwrap();
        assert!(validate_mc(&p, &McConfig::default(), &[], Some(20)).is_err());
    }
}
