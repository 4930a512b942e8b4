//! Ensemble parameters and the constants derived from them.
//!
//! Everything downstream (both solvers, the sampler, the harness) reads the
//! shared symbols from [`EnsembleParams`]: the weight exponents `a, b`, the
//! angular exponents `alpha = a + 1/2`, `beta = b + 1/2`, the quadruple
//! `(b1, b2, b3, b4)`, the elementary symmetric combinations `e2`, `e2p`, and
//! the leading exponent `N(N+b)` of `Ẽ_N` at `t = 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exact rational copies of the inputs and derived constants, present when
/// the parameters were supplied exactly. The series method requires these.
#[derive(Debug, Clone)]
pub struct ExactParams {
    pub a: BigRational,
    pub b: BigRational,
    pub n: BigRational,
    pub bvec: [BigRational; 4],
    pub e2: BigRational,
    pub e2p: BigRational,
    /// `N(N+b)`, the power of `t` in `Ẽ_N(t) = C t^{N(N+b)} F(t)`.
    pub lead_exp: BigRational,
}

/// Parameters of the ensemble `J_N^(a,b)` with all shared derived constants.
///
/// Immutable after construction; cheap to clone.
#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `(b1, b2, b3, b4) = (N+(a+b)/2, (a-b)/2, -(a+b)/2, -N-(a+b)/2)`.
    pub bvec: [f64; 4],
    /// `e2' = b1 b3 + b1 b4 + b3 b4`.
    pub e2p: f64,
    /// `e2 = e2' + b2 (b1 + b3 + b4)`.
    pub e2: f64,
    /// `N(N+b)`.
    pub lead_exp: f64,
    /// Present iff all three inputs were supplied as exact rationals.
    pub exact: Option<ExactParams>,
}

fn big(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

fn derive_exact(a: &BigRational, b: &BigRational, n: &BigRational) -> ExactParams {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let b1 = n + (a + b) * &half;
    let b2 = (a - b) * &half;
    let b3 = -(a + b) * &half;
    let b4 = -n - (a + b) * &half;
    let e2p = &b1 * &b3 + &b1 * &b4 + &b3 * &b4;
    let e2 = &e2p + &b2 * (&b1 + &b3 + &b4);
    let lead_exp = n * (n + b);
    ExactParams {
        a: a.clone(),
        b: b.clone(),
        n: n.clone(),
        bvec: [b1, b2, b3, b4],
        e2,
        e2p,
        lead_exp,
    }
}

/// Best-effort conversion of an arbitrary-precision rational to `f64`.
///
/// Works for operands far beyond `f64` range by shifting both parts down to a
/// bounded width first; plain `numer/denom` conversion would produce
/// `inf/inf = NaN` for the large coefficients the series method generates.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    if numer.is_zero() {
        return 0.0;
    }
    let nb = numer.bits() as i64;
    let db = denom.bits() as i64;
    // Keep ~80 significant bits in each part; the quotient keeps full f64
    // precision and the scale difference is reapplied as a power of two.
    let shift_n = (nb - 80).max(0);
    let shift_d = (db - 80).max(0);
    let n_red = (numer >> shift_n as usize).to_f64().unwrap_or(f64::NAN);
    let d_red = (denom >> shift_d as usize).to_f64().unwrap_or(f64::NAN);
    let q = n_red / d_red;
    let exp = (shift_n - shift_d) as i32;
    q * f64::powi(2.0, exp)
}

/// Parse `"p/q"` or a plain decimal (`"-0.5"`, `"3"`, `"2.25"`) into an exact
/// rational. Scientific notation is rejected.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::domain("empty rational literal"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let numer = BigInt::from_str(p.trim())
            .map_err(|_| Error::domain(format!("bad numerator in {s:?}")))?;
        let denom = BigInt::from_str(q.trim())
            .map_err(|_| Error::domain(format!("bad denominator in {s:?}")))?;
        if denom.is_zero() {
            return Err(Error::domain(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(numer, denom));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::domain(format!("bad rational literal {s:?}")));
    }
    let valid = |d: &str| d.chars().all(|c| c.is_ascii_digit());
    if !valid(int_part) || !valid(frac_part) {
        return Err(Error::domain(format!("bad rational literal {s:?}")));
    }
    let mut numer = if int_part.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(int_part).unwrap()
    };
    let mut denom = BigInt::one();
    for c in frac_part.chars() {
        numer = numer * 10 + (c as u8 - b'0');
        denom *= 10;
    }
    Ok(BigRational::new(numer * sign, denom))
}

impl EnsembleParams {
    /// Exact-rational construction; enables the series method.
    pub fn from_rationals(a: BigRational, b: BigRational, n: BigRational) -> Result<Self> {
        if a <= -big(1) {
            return Err(Error::domain("require a > -1"));
        }
        if b <= -big(1) {
            return Err(Error::domain("require b > -1"));
        }
        if n <= big(0) {
            return Err(Error::domain("require N > 0"));
        }
        let exact = derive_exact(&a, &b, &n);
        Ok(Self::project(exact))
    }

    /// Parse `"p/q"` or decimal strings; always exact.
    pub fn parse(a: &str, b: &str, n: &str) -> Result<Self> {
        Self::from_rationals(parse_rational(a)?, parse_rational(b)?, parse_rational(n)?)
    }

    /// Floating-point construction. The result has no exact part and cannot
    /// drive the series method.
    pub fn from_f64(a: f64, b: f64, n: f64) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::domain("require a > -1"));
        }
        if !(b > -1.0) {
            return Err(Error::domain("require b > -1"));
        }
        if !(n > 0.0) {
            return Err(Error::domain("require N > 0"));
        }
        let (ab2, amb2) = ((a + b) / 2.0, (a - b) / 2.0);
        let bvec = [n + ab2, amb2, -ab2, -n - ab2];
        let e2p = bvec[0] * bvec[2] + bvec[0] * bvec[3] + bvec[2] * bvec[3];
        let e2 = e2p + bvec[1] * (bvec[0] + bvec[2] + bvec[3]);
        Ok(EnsembleParams {
            a,
            b,
            n,
            alpha: a + 0.5,
            beta: b + 0.5,
            bvec,
            e2p,
            e2,
            lead_exp: n * (n + b),
            exact: None,
        })
    }

    fn project(exact: ExactParams) -> Self {
        let f = rational_to_f64;
        EnsembleParams {
            a: f(&exact.a),
            b: f(&exact.b),
            n: f(&exact.n),
            alpha: f(&exact.a) + 0.5,
            beta: f(&exact.b) + 0.5,
            bvec: [
                f(&exact.bvec[0]),
                f(&exact.bvec[1]),
                f(&exact.bvec[2]),
                f(&exact.bvec[3]),
            ],
            e2p: f(&exact.e2p),
            e2: f(&exact.e2),
            lead_exp: f(&exact.lead_exp),
            exact: Some(exact),
        }
    }

    /// True when the parameters carry exact rationals.
    pub fn rational_mode(&self) -> bool {
        self.exact.is_some()
    }

    /// N as an integer when it is one (needed by the Selberg product form and
    /// the sampler).
    pub fn integer_n(&self) -> Option<u32> {
        match &self.exact {
            Some(e) => {
                if e.n.is_integer() {
                    e.n.numer().to_u32()
                } else {
                    None
                }
            }
            None => {
                let r = self.n.round();
                if (self.n - r).abs() < 1e-12 && r >= 1.0 && r <= u32::MAX as f64 {
                    Some(r as u32)
                } else {
                    None
                }
            }
        }
    }
}

/// `t = (1 + cos phi)/2`; maps `phi = 0` to `t = 1` and `phi = pi` to `t = 0`.
pub fn phi_to_t(phi: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::domain(format!("phi = {phi} outside [0, pi]")));
    }
    Ok((1.0 + phi.cos()) / 2.0)
}

/// Inverse of [`phi_to_t`].
pub fn t_to_phi(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [0, 1]")));
    }
    Ok((2.0 * t - 1.0).clamp(-1.0, 1.0).acos())
}

/// State vector `H = (Ẽ_N(t), h(t), h'(t))` evolved by the ODE method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianState {
    pub t: f64,
    pub e: f64,
    pub h: f64,
    pub hp: f64,
}

/// Which method produced a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk,
    Series,
    Mc,
    Glued,
    /// Small-angle expansion piece inside a glued grid.
    Taylor,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Rk => "rk",
            Method::Series => "series",
            Method::Mc => "mc",
            Method::Glued => "glued",
            Method::Taylor => "taylor",
        };
        f.write_str(s)
    }
}

/// One sampled point of a solution.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GridRow {
    pub t: f64,
    pub phi: f64,
    /// Rescaled eigenphase `theta = N phi / pi` (mean unit spacing on `[0,N]`).
    pub theta: f64,
    /// Gap probability `E_N(phi)`.
    pub e: f64,
    /// First-eigenphase density `nu_N(phi) = -dE_N/dphi`.
    pub nu: f64,
}

/// Join point between two methods in a glued grid, with the density mismatch
/// measured there.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Seam {
    pub theta: f64,
    pub gap: f64,
    pub lower_method: Method,
    pub upper_method: Method,
}

/// Sampled solution columns `(t, phi, theta, E, nu)` from one method.
#[derive(Debug, Clone)]
pub struct SolutionGrid {
    pub method: Method,
    /// `(a, b, N)` snapshot of the producing parameters.
    pub params: (f64, f64, f64),
    /// Rows in strictly increasing `phi`.
    pub rows: Vec<GridRow>,
    /// Seam metadata; nonempty exactly for glued grids.
    pub seams: Vec<Seam>,
}

impl SolutionGrid {
    pub fn new(method: Method, params: &EnsembleParams, rows: Vec<GridRow>) -> Self {
        SolutionGrid {
            method,
            params: (params.a, params.b, params.n),
            rows,
            seams: Vec::new(),
        }
    }

    /// Trapezoid value of the density integral over the grid's `phi` span.
    pub fn integral_nu_dphi(&self) -> f64 {
        let mut acc = 0.0;
        for w in self.rows.windows(2) {
            acc += 0.5 * (w[0].nu + w[1].nu) * (w[1].phi - w[0].phi);
        }
        acc
    }

    /// Density at `theta` by linear interpolation between grid rows.
    /// Returns `None` outside the covered span.
    pub fn interp_nu(&self, theta: f64) -> Option<f64> {
        interp(&self.rows, theta, |r| r.nu)
    }

    /// Gap probability at `theta` by linear interpolation.
    pub fn interp_e(&self, theta: f64) -> Option<f64> {
        interp(&self.rows, theta, |r| r.e)
    }
}

fn interp(rows: &[GridRow], theta: f64, col: impl Fn(&GridRow) -> f64) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let first = rows.first().unwrap().theta;
    let last = rows.last().unwrap().theta;
    if theta < first || theta > last {
        return None;
    }
    let idx = rows.partition_point(|r| r.theta < theta);
    if idx == 0 {
        return Some(col(&rows[0]));
    }
    if idx >= rows.len() {
        return Some(col(rows.last().unwrap()));
    }
    let (lo, hi) = (&rows[idx - 1], &rows[idx]);
    let width = hi.theta - lo.theta;
    if width <= 0.0 {
        return Some(col(lo));
    }
    let w = (theta - lo.theta) / width;
    Some(col(lo) * (1.0 - w) + col(hi) * w)
}
