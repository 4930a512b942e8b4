//! Adaptive Runge-Kutta integration of the sigma-form as a first-order
//! system in `H = (Ẽ, h, h')`, from `t0 = 1 - eps` down toward `t = 0`:
//!
//! ```text
//! dẼ/dt  = Ẽ (h - t e2' + e2/2) / (t(t-1))
//! dh/dt  = h'
//! dh'/dt = sqrt[ ( Π_k (h' + bk^2) - (h'[2h - (2t-1)h'] + b1b2b3b4)^2 ) / h' ]
//!            / (t(1-t))
//! ```
//!
//! taking the positive square-root branch. Initial data comes from the
//! two-term small-angle expansion of `E_N` evaluated at `phi0 = 2 asin(sqrt
//! eps)`. The stepper is the Dormand-Prince 5(4) pair with PI step control
//! and the standard quartic dense-output interpolant, so the solution can be
//! sampled on any grid afterwards without re-integration.
//!
//! The radicand is clamped at zero: near the right endpoint `h'` passes
//! through values of order `-1e-13` (exactly zero in degenerate cases) and
//! the analytically nonnegative quotient dips below zero by rounding.
//!
//! For `a > 0` the square-root branch is known to become unreliable partway
//! into the interval; solutions are produced but flagged.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{phi_to_t, EnsembleParams, GridRow, HamiltonianState, Method, SolutionGrid};
use crate::special::TaylorE;

#[derive(Debug, Clone)]
pub struct OdeConfig {
    /// Offset of the starting point `t0 = 1 - eps`.
    pub eps: f64,
    pub reltol: f64,
    pub abstol: f64,
    /// Where integration stops (the sigma form is singular at `t = 0`).
    pub t_end: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            eps: 1e-7,
            reltol: 1e-5,
            abstol: 1e-6,
            t_end: 0.01,
            max_steps: 200_000,
        }
    }
}

/// Outcome quality of an integration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "detail")]
pub enum RkStatus {
    Ok,
    Warned(String),
    Failed(String),
}

impl RkStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RkStatus::Ok => "ok",
            RkStatus::Warned(_) => "warned",
            RkStatus::Failed(_) => "failed",
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, RkStatus::Ok)
    }
}

/// Initial state at `t0 = 1 - eps` from the small-angle expansion:
///
/// `h(t0)  = t0 e2' - e2/2 + sqrt(t0(1-t0)) E'/E`
/// `h'(t0) = e2' - cot(phi0) E'/E - E''/E + (E'/E)^2`
///
/// with `E, E', E''` the expansion values at `phi0` and derivatives taken
/// in `phi`.
pub fn initial_state(params: &EnsembleParams, eps: f64) -> Result<HamiltonianState> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps must be in (0, 1/2), got {eps}")));
    }
    let phi0 = 2.0 * eps.sqrt().asin();
    let t0 = 1.0 - eps;
    let taylor = TaylorE::new(params)?;
    let e = taylor.e(phi0);
    if !(e > 0.0) {
        return Err(Error::domain(format!(
            "small-angle expansion gives nonpositive E({phi0}) = {e}; eps too large"
        )));
    }
    let ratio = taylor.ep(phi0) / e;
    let (sin0, cos0) = phi0.sin_cos();
    let h = t0 * params.e2p - params.e2 / 2.0 + 0.5 * sin0 * ratio;
    let hp = params.e2p - cos0 / sin0 * ratio - taylor.epp(phi0) / e + ratio * ratio;
    Ok(HamiltonianState { t: t0, e, h, hp })
}

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step's quartic interpolant over `[t_old + step, t_old]`
/// (`step < 0`: integration runs right to left).
#[derive(Debug, Clone)]
struct DenseSegment {
    t_old: f64,
    step: f64,
    cont: [[f64; 3]; 5],
}

impl DenseSegment {
    fn eval(&self, t: f64) -> [f64; 3] {
        let s = (t - self.t_old) / self.step;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        y
    }
}

/// Integrated solution with dense output.
#[derive(Debug, Clone)]
pub struct RkSolution {
    pub params: EnsembleParams,
    pub status: RkStatus,
    /// Closed interval of `t` covered, `t_span.0 <= t <= t_span.1`.
    pub t_span: (f64, f64),
    pub naccepted: usize,
    pub nrejected: usize,
    pub nfev: usize,
    segments: Vec<DenseSegment>,
    start: HamiltonianState,
}

impl RkSolution {
    /// Dense-output state `(Ẽ, h, h')` at `t`, or `None` outside the span.
    pub fn state_at(&self, t: f64) -> Option<[f64; 3]> {
        if t < self.t_span.0 || t > self.t_span.1 {
            return None;
        }
        if self.segments.is_empty() {
            return Some([self.start.e, self.start.h, self.start.hp]);
        }
        // segments are ordered by decreasing t; find the first one whose
        // lower end lies at or below t
        let idx = self
            .segments
            .partition_point(|seg| seg.t_old + seg.step > t)
            .min(self.segments.len() - 1);
        Some(self.segments[idx].eval(t))
    }

    pub fn e_at(&self, t: f64) -> Option<f64> {
        self.state_at(t).map(|y| y[0])
    }

    /// `nu = sqrt(t(1-t)) Ẽ' = -Ẽ (h - t e2' + e2/2) / sqrt(t(1-t))`.
    pub fn nu_at(&self, t: f64) -> Option<f64> {
        self.state_at(t).map(|y| {
            -y[0] * (y[1] - t * self.params.e2p + self.params.e2 / 2.0) / (t * (1.0 - t)).sqrt()
        })
    }

    /// Sample on a uniform `theta` grid covering the reached span, with
    /// spacing at most `max_spacing`.
    pub fn density_grid(&self, max_spacing: f64) -> Result<SolutionGrid> {
        if !(max_spacing > 0.0) {
            return Err(Error::domain("grid spacing must be positive"));
        }
        let n = self.params.n;
        let theta_of = |t: f64| (2.0 * t - 1.0).clamp(-1.0, 1.0).acos() * n / std::f64::consts::PI;
        let (theta_lo, theta_hi) = (theta_of(self.t_span.1), theta_of(self.t_span.0));
        let span = theta_hi - theta_lo;
        let points = ((span / max_spacing).ceil() as usize + 1).max(2);
        let mut rows = Vec::with_capacity(points);
        for i in 0..points {
            let theta = theta_lo + span * i as f64 / (points - 1) as f64;
            let phi = theta * std::f64::consts::PI / n;
            let t = phi_to_t(phi)?;
            let t = t.clamp(self.t_span.0, self.t_span.1);
            let y = self.state_at(t).unwrap();
            let nu = -y[0] * (y[1] - t * self.params.e2p + self.params.e2 / 2.0)
                / (t * (1.0 - t)).sqrt();
            rows.push(GridRow {
                t,
                phi,
                theta,
                e: y[0],
                nu,
            });
        }
        Ok(SolutionGrid::new(Method::Rk, &self.params, rows))
    }
}

/// Right side of the system; defined for `t` strictly inside `(0, 1)`.
pub fn rhs(params: &EnsembleParams, t: f64, y: &[f64; 3]) -> [f64; 3] {
    let [e, h, hp] = *y;
    let b = &params.bvec;
    let de = e * (h - t * params.e2p + params.e2 / 2.0) / (t * (t - 1.0));
    let mut prod = 1.0;
    for bk in b {
        prod *= hp + bk * bk;
    }
    let inner = hp * (2.0 * h - (2.0 * t - 1.0) * hp) + b[0] * b[1] * b[2] * b[3];
    // max() also absorbs the NaN from h' = 0 exactly
    let rad = ((prod - inner * inner) / hp).max(0.0);
    [de, hp, rad.sqrt() / (t * (1.0 - t))]
}

/// Hairer's starting-step heuristic, adapted for leftward integration.
fn initial_step(
    params: &EnsembleParams,
    t0: f64,
    y0: &[f64; 3],
    f0: &[f64; 3],
    cfg: &OdeConfig,
    hmax: f64,
) -> f64 {
    let sc =
        |i: usize| cfg.abstol + cfg.reltol * y0[i].abs();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..3 {
        dnf += (f0[i] / sc(i)).powi(2);
        dny += (y0[i] / sc(i)).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(hmax);
    let y1: [f64; 3] = std::array::from_fn(|i| y0[i] - h * f0[i]);
    let f1 = rhs(params, t0 - h, &y1);
    let mut der2 = 0.0;
    for i in 0..3 {
        der2 += ((f1[i] - f0[i]) / sc(i)).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (1e-6f64).max(h * 1e-3)
    } else {
        (0.01 / der12).powf(0.2)
    };
    let step = (100.0 * h).min(h1).min(hmax);
    -step
}

/// Integrate from `t0 = 1 - eps` down to `t_end`. Hard parameter errors are
/// `Err`; a mid-interval breakdown yields a partial solution with
/// `RkStatus::Failed` so callers can still inspect the covered span.
pub fn integrate(params: &EnsembleParams, cfg: &OdeConfig) -> Result<RkSolution> {
    let t_end = cfg.t_end;
    if !(t_end > 0.0) || t_end >= 1.0 - cfg.eps {
        return Err(Error::domain(format!(
            "t_end must lie in (0, 1 - eps), got {t_end}"
        )));
    }
    let start = initial_state(params, cfg.eps)?;
    let mut status = if params.a > 0.0 {
        RkStatus::Warned(
            "a > 0: the square-root branch of the sigma form loses reliability; \
             treat this solution as indicative only"
                .into(),
        )
    } else {
        RkStatus::Ok
    };

    let mut t = start.t;
    let mut y = [start.e, start.h, start.hp];
    let mut k1 = rhs(params, t, &y);
    let mut nfev = 1usize;
    let hmax = (start.t - t_end).abs();
    let mut hs = initial_step(params, t, &y, &k1, cfg, hmax);
    nfev += 1;

    // PI controller constants as in standard DOPRI5
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const SAFE: f64 = 0.9;
    const FACC1: f64 = 5.0; // 1/fac1, fac1 = 0.2
    const FACC2: f64 = 0.1; // 1/fac2, fac2 = 10
    let mut facold = 1e-4f64;

    let mut segments: Vec<DenseSegment> = Vec::new();
    let mut naccepted = 0usize;
    let mut nrejected = 0usize;
    let mut last = false;
    let mut reject = false;

    for _ in 0..cfg.max_steps {
        if (t + hs - t_end) < 0.0 {
            hs = t_end - t;
            last = true;
        }
        let st = |frac: f64, incr: &[f64; 3]| -> ([f64; 3], f64) {
            let yn: [f64; 3] = std::array::from_fn(|i| y[i] + hs * incr[i]);
            (yn, t + frac * hs)
        };
        let (y2, t2) = st(C2, &std::array::from_fn(|i| A21 * k1[i]));
        let k2 = rhs(params, t2, &y2);
        let (y3, t3) = st(C3, &std::array::from_fn(|i| A31 * k1[i] + A32 * k2[i]));
        let k3 = rhs(params, t3, &y3);
        let (y4, t4) = st(C4, &std::array::from_fn(|i| {
            A41 * k1[i] + A42 * k2[i] + A43 * k3[i]
        }));
        let k4 = rhs(params, t4, &y4);
        let (y5, t5) = st(C5, &std::array::from_fn(|i| {
            A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]
        }));
        let k5 = rhs(params, t5, &y5);
        let (y6, t6) = st(1.0, &std::array::from_fn(|i| {
            A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
        }));
        let k6 = rhs(params, t6, &y6);
        let (ynew, tnew) = st(1.0, &std::array::from_fn(|i| {
            A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]
        }));
        let k7 = rhs(params, tnew, &ynew);
        nfev += 6;

        let mut err = 0.0;
        let mut finite = ynew.iter().all(|v| v.is_finite());
        if finite {
            for i in 0..3 {
                let sc = cfg.abstol + cfg.reltol * y[i].abs().max(ynew[i].abs());
                let ee = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                err += (ee / sc).powi(2);
                finite &= ee.is_finite();
            }
            err = (err / 3.0).sqrt();
        }
        if !finite {
            err = 1e10;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            facold = err.max(1e-4);
            naccepted += 1;
            let ydiff: [f64; 3] = std::array::from_fn(|i| ynew[i] - y[i]);
            let cont3: [f64; 3] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let cont4: [f64; 3] = std::array::from_fn(|i| ydiff[i] - hs * k7[i] - cont3[i]);
            let cont5: [f64; 3] = std::array::from_fn(|i| {
                hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                    + D7 * k7[i])
            });
            segments.push(DenseSegment {
                t_old: t,
                step: hs,
                cont: [y, ydiff, cont3, cont4, cont5],
            });
            k1 = k7;
            y = ynew;
            t = tnew;
            if last {
                break;
            }
            let mut hnew = hs / fac;
            if reject {
                // after a rejection, do not grow
                hnew = if hnew.abs() < hs.abs() { hnew } else { hs };
            }
            reject = false;
            hs = hnew;
        } else {
            nrejected += 1;
            reject = true;
            last = false;
            hs /= (fac11 / SAFE).min(FACC1);
        }
        if t + hs == t || !hs.is_finite() {
            status = RkStatus::Failed(format!("step size underflow at t = {t}"));
            break;
        }
    }
    if !last && !matches!(status, RkStatus::Failed(_)) {
        status = RkStatus::Failed(format!(
            "integration stalled at t = {t} after {naccepted} accepted steps"
        ));
    }

    Ok(RkSolution {
        params: params.clone(),
        status,
        t_span: (t, start.t),
        naccepted,
        nrejected,
        nfev,
        segments,
        start,
    })
}
