//! Exact power-series solution of the sigma-form about `t = 0`.
//!
//! The Jimbo-Miwa-Okamoto sigma form satisfied by the auxiliary Hamiltonian
//! `h(t)` is, with `(b1, b2, b3, b4)` the parameter quadruple and `e2 =
//! e2(b)` its second elementary symmetric function,
//!
//! ```text
//! h' ( t(1-t) h'' )^2  +  ( h' [2h - (2t-1) h'] + b1 b2 b3 b4 )^2
//!     = Π_{k=1..4} ( h' + bk^2 )
//! ```
//!
//! Every coefficient of `h` past the two boundary values is a rational
//! number determined by a triangular recursion: with `c_0 .. c_{k-1}` fixed,
//! substituting `h = Σ c_j t^j + X t^k + O(t^{k+2})` makes the coefficient of
//! `t^k` in the residual a polynomial in `X` (quadratic at `k = 2`, linear
//! afterwards) whose root is `c_k`. The zero padding at `t^{k+1}` is sound:
//! at a correct prefix the residual coefficient `t^k` does not depend on
//! `c_{k+1}`, which can be checked by differentiating the sigma form at
//! `t = 0`.
//!
//! From `h` the gap probability is reconstructed as
//! `Ẽ_N(t) = C t^{N(N+b)} F(t)` with `F(0) = 1` and
//! `F = exp ∫ (h_1(t) - e2' - N(N+b)) / (t-1) dt`, `h_1 = (h - h(0))/t`.
//! All series coefficients are exact rationals end to end; floating point
//! enters only at evaluation time.
//!
//! Evaluation does not sum the `t`-series directly. `F` and the logarithmic
//! derivative series are analytic on the plane cut along `[1, ∞)`, so they
//! are re-expanded (still in exact arithmetic) in the variable `u` of the
//! substitution `t = 4u/(1+u)^2`, which maps the unit disk onto that cut
//! plane. The pullback `u(t) = t/(1+sqrt(1-t))^2` is much smaller than `t`
//! over the whole trust region (`u = 0.52` at `t = 0.9`), so a truncation
//! that is useless near `t = 0.85` in the `t`-variable is accurate to
//! near machine precision in `u`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::{
    phi_to_t, rational_to_f64, EnsembleParams, GridRow, Method, SolutionGrid,
};
use crate::ratseries::{QuadPoly, RationalSeries, UnknownSeries, INF_PREC};
use crate::special;

fn rat_int(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

/// Degree heuristic giving roughly single-precision accuracy over the trust
/// region `t <= 0.9`: `100` for `N <= 2`, `300` for `N <= 5`, none beyond
/// (the caller must choose explicitly).
pub fn default_degree(n: f64) -> Option<usize> {
    if n <= 2.0 {
        Some(100)
    } else if n <= 5.0 {
        Some(300)
    } else {
        None
    }
}

/// Boundary values `(h(0), h'(0))` in closed form:
/// `h(0) = -e2/2 - N(b+N)`, `h'(0) = e2' + N(N+b)(2N+a+b)/(2N+b)`.
pub fn boundary_values(params: &EnsembleParams) -> Result<(BigRational, BigRational)> {
    let ex = params
        .exact
        .as_ref()
        .ok_or_else(|| Error::domain("boundary values need exact rational parameters"))?;
    let denom = rat_int(2) * &ex.n + &ex.b;
    if denom.is_zero() {
        return Err(Error::domain("boundary value h'(0) undefined at b = -2N"));
    }
    let h0 = -&ex.e2 / rat_int(2) - &ex.lead_exp;
    let numer = rat_int(2) * &ex.n + &ex.a + &ex.b;
    let h1 = &ex.e2p + &ex.lead_exp * numer / denom;
    Ok((h0, h1))
}

/// Sigma-form residual of a series with one unknown coefficient in flight,
/// truncated at `cap`.
fn residual_unknown(bvec: &[BigRational; 4], h: &UnknownSeries, cap: usize) -> UnknownSeries {
    let hp = h.derivative();
    let hpp = hp.derivative();
    // (t(1-t))^2 = t^2 - 2t^3 + t^4
    let sq = UnknownSeries::poly(vec![
        BigRational::zero(),
        BigRational::zero(),
        BigRational::one(),
        rat_int(-2),
        BigRational::one(),
    ]);
    let term1 = hpp
        .mul_cap(&hpp, cap)
        .mul_cap(&sq, cap)
        .mul_cap(&hp, cap);

    let two_t_minus_1 = UnknownSeries::poly(vec![rat_int(-1), rat_int(2)]);
    let b_prod = &bvec[0] * &bvec[1] * &bvec[2] * &bvec[3];
    let inner = hp
        .mul_cap(
            &h.scale(&rat_int(2)).sub(&two_t_minus_1.mul_cap(&hp, cap)),
            cap,
        )
        .add_constant(&b_prod);
    let term2 = inner.mul_cap(&inner, cap);

    let mut term3 = hp.add_constant(&(&bvec[0] * &bvec[0]));
    for bj in &bvec[1..] {
        term3 = term3.mul_cap(&hp.add_constant(&(bj * bj)), cap);
    }

    term1.add(&term2).sub(&term3)
}

/// Sigma-form residual of a fully determined rational series, at the natural
/// precision `prec(h) - 1`. A correct degree-`D` solution has every
/// computable coefficient (`t^0 .. t^{D-2}`) exactly zero.
pub fn sigma_residual(params: &EnsembleParams, h: &RationalSeries) -> Result<RationalSeries> {
    let ex = params
        .exact
        .as_ref()
        .ok_or_else(|| Error::domain("sigma residual needs exact rational parameters"))?;
    let lifted = UnknownSeries::from_rational(h);
    residual_unknown(&ex.bvec, &lifted, INF_PREC).into_rational()
}

/// Incremental caches for the coefficient recursion over the residual
///
/// ```text
/// R = h'·sq·(h'')² + inner² - v1·v2,        sq = t²(1-t)²,
/// inner = h'[2h-(2t-1)h'] + b1b2b3b4,
/// v1 = (h'+b1²)(h'+b2²),  v2 = (h'+b3²)(h'+b4²).
/// ```
///
/// `R` is never formed as a series. Step `k` reads the single coefficient
/// `R[k]` of the current partial sum by convolutions over the cached factor
/// series, and appending `x t^k` to `h` corrects each cache with monomial
/// shifts (the full multilinear expansion in `Δ = x t^k`, so the caches stay
/// exact at every index). Total cost is `O(degree²)` coefficient operations
/// against `O(degree³)` for recomputing the residual from scratch per step.
struct Recursion {
    p: usize,
    /// `b1² + b2²` and `b3² + b4²`.
    sum12: BigRational,
    sum34: BigRational,
    /// Second elementary symmetric function of `c_i = h_1 + b_i²`.
    e2c: BigRational,
    h: Vec<BigRational>,
    hp: Vec<BigRational>,
    hpp: Vec<BigRational>,
    /// `2h - (2t-1)h'`.
    g: Vec<BigRational>,
    inner: Vec<BigRational>,
    /// `(h'')²`.
    hpp_sq: Vec<BigRational>,
    v1: Vec<BigRational>,
    v2: Vec<BigRational>,
}

impl Recursion {
    fn new(bvec: &[BigRational; 4], h0: BigRational, h1: BigRational, p: usize) -> Self {
        let zero = BigRational::zero();
        let b_prod = &bvec[0] * &bvec[1] * &bvec[2] * &bvec[3];
        let bsq: Vec<BigRational> = bvec.iter().map(|b| b * b).collect();
        let c: Vec<BigRational> = bsq.iter().map(|sq| &h1 + sq).collect();
        let mut e2c = BigRational::zero();
        for i in 0..4 {
            for j in (i + 1)..4 {
                e2c += &c[i] * &c[j];
            }
        }
        let mut hp = vec![zero.clone(); p];
        hp[0] = h1.clone();
        let mut g = vec![zero.clone(); p];
        g[0] = rat_int(2) * &h0 + &h1;
        let mut inner = vec![zero.clone(); p];
        inner[0] = &h1 * &g[0] + b_prod;
        let mut v1 = vec![zero.clone(); p];
        v1[0] = &c[0] * &c[1];
        let mut v2 = vec![zero.clone(); p];
        v2[0] = &c[2] * &c[3];
        Recursion {
            p,
            sum12: &bsq[0] + &bsq[1],
            sum34: &bsq[2] + &bsq[3],
            e2c,
            h: vec![h0, h1],
            hp,
            hpp: vec![zero.clone(); p],
            g,
            inner,
            hpp_sq: vec![zero; p],
            v1,
            v2,
        }
    }

    /// Coefficient `k` of the residual of the current partial sum.
    fn residual_at(&self, k: usize) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..=k {
            if self.hp[i].is_zero() {
                continue;
            }
            // (sq · hpp_sq)[k-i] unfolded through sq = t² - 2t³ + t⁴
            let j = k - i;
            let mut s = BigRational::zero();
            if j >= 2 {
                s += &self.hpp_sq[j - 2];
            }
            if j >= 3 {
                s -= rat_int(2) * &self.hpp_sq[j - 3];
            }
            if j >= 4 {
                s += &self.hpp_sq[j - 4];
            }
            if !s.is_zero() {
                acc += &self.hp[i] * s;
            }
        }
        for i in 0..=k {
            let j = k - i;
            if !self.inner[i].is_zero() && !self.inner[j].is_zero() {
                acc += &self.inner[i] * &self.inner[j];
            }
            if !self.v1[i].is_zero() && !self.v2[j].is_zero() {
                acc -= &self.v1[i] * &self.v2[j];
            }
        }
        acc
    }

    /// Linear response of `R[k]` to appending `x t^k`, for `k >= 3`. The
    /// direction `t^k` is concentrated at one degree, so reading coefficient
    /// `k` of the derivative probes only fixed low-order cache entries and
    /// the response is a quadratic polynomial in `k`:
    ///
    /// ```text
    /// λ(k) = 4 h1 h2 k(k-1) + 4 (h0+h1) inner[1] k
    ///        + 2 inner[0] (4 h2 k + (2-2k) h1) - 4 h2 e2(c) k
    /// ```
    ///
    /// All degree-two-and-higher terms in `x` land at `t^{2k-4}` and beyond,
    /// past `t^k` once `k >= 3`, so `R[k]` is affine in `x` there.
    fn lambda(&self, k: usize) -> BigRational {
        let kq = rat_int(k as i64);
        let h0 = &self.h[0];
        let h1 = &self.h[1];
        let h2 = &self.h[2];
        let four = rat_int(4);
        let mut lam = &four * h1 * h2 * &kq * (&kq - BigRational::one());
        lam += &four * (h0 + h1) * &self.inner[1] * &kq;
        lam += rat_int(2)
            * &self.inner[0]
            * (&four * h2 * &kq + rat_int(2) * (BigRational::one() - &kq) * h1);
        lam -= four * h2 * &self.e2c * &kq;
        lam
    }

    /// Append `h_k = x` and shift every cache by its exact correction. The
    /// shifts read pre-update arrays throughout, so the elementary series
    /// `h', h'', g` are bumped last.
    fn apply(&mut self, k: usize, x: BigRational) {
        self.h.push(x.clone());
        if x.is_zero() {
            return;
        }
        let p = self.p;
        let kx = rat_int(k as i64) * &x;
        let kk1x = &kx * rat_int(k as i64 - 1);
        let w1 = rat_int(2 - 2 * k as i64) * &x;

        // inner += Δ'g + h'w + Δ'w, w = kx t^{k-1} + w1 t^k
        for m in (k - 1)..p {
            let mut d = &kx * (&self.g[m + 1 - k] + &self.hp[m + 1 - k]);
            if m >= k {
                d += &w1 * &self.hp[m - k];
            }
            if !d.is_zero() {
                self.inner[m] += d;
            }
        }
        if 2 * k - 2 < p {
            self.inner[2 * k - 2] += &kx * &kx;
        }
        if 2 * k - 1 < p {
            self.inner[2 * k - 1] += &kx * &w1;
        }

        // (h'')² += 2 Δ'' h'' + Δ''²
        for m in (k.max(2) - 2)..p {
            let d = rat_int(2) * &kk1x * &self.hpp[m + 2 - k];
            if !d.is_zero() {
                self.hpp_sq[m] += d;
            }
        }
        if k >= 2 && 2 * k - 4 < p {
            self.hpp_sq[2 * k - 4] += &kk1x * &kk1x;
        }

        // v += Δ'(2h' + const) + Δ'²
        for m in (k - 1)..p {
            if self.hp[m + 1 - k].is_zero() {
                continue;
            }
            let d = rat_int(2) * &kx * &self.hp[m + 1 - k];
            self.v1[m] += &d;
            self.v2[m] += d;
        }
        self.v1[k - 1] += &kx * &self.sum12;
        self.v2[k - 1] += &kx * &self.sum34;
        if 2 * k - 2 < p {
            let dsq = &kx * &kx;
            self.v1[2 * k - 2] += &dsq;
            self.v2[2 * k - 2] += dsq;
        }

        self.hp[k - 1] += &kx;
        if k >= 2 {
            self.hpp[k - 2] += &kk1x;
        }
        self.g[k - 1] += kx;
        self.g[k] += w1;
    }
}

/// Solve the coefficient recursion up to (excluding) `t^degree`.
pub fn solve_h(params: &EnsembleParams, degree: usize) -> Result<RationalSeries> {
    let ex = params
        .exact
        .as_ref()
        .ok_or_else(|| Error::domain("series method needs exact rational parameters"))?;
    if degree < 2 {
        return Err(Error::domain("series degree must be at least 2"));
    }
    let (h0, h1) = boundary_values(params)?;
    if degree == 2 {
        return Ok(RationalSeries::from_coeffs(vec![h0, h1], 2));
    }

    // k = 2 is the one genuinely quadratic step; run it through the symbolic
    // residual and keep the nonzero root
    let x2 = {
        let lifted = vec![
            QuadPoly::constant(h0.clone()),
            QuadPoly::constant(h1.clone()),
            QuadPoly::unknown(),
            QuadPoly::zero(),
        ];
        let trial = UnknownSeries::from_parts(lifted, 4);
        let [c0, c1, c2] = residual_unknown(&ex.bvec, &trial, 3).coeff(2).c;
        if !c0.is_zero() {
            return Err(Error::RecursionStall {
                k: 2,
                detail: "quadratic step has a nonzero constant term".into(),
            });
        }
        if !c2.is_zero() {
            -c1 / c2
        } else {
            BigRational::zero()
        }
    };
    let mut rec = Recursion::new(&ex.bvec, h0, h1, degree);
    rec.apply(2, x2);

    for k in 3..degree {
        let c0 = rec.residual_at(k);
        let c1 = rec.lambda(k);
        let x = if c1.is_zero() {
            if c0.is_zero() {
                // degenerate step: residual already vanishes identically
                BigRational::zero()
            } else {
                return Err(Error::RecursionStall {
                    k,
                    detail: "linear coefficient vanished with nonzero remainder".into(),
                });
            }
        } else {
            -c0 / c1
        };
        rec.apply(k, x);
    }
    Ok(RationalSeries::from_coeffs(rec.h, degree))
}

/// The original per-step recomputation of the full symbolic residual, kept
/// as an independent cross-check of the incremental path.
#[cfg(test)]
fn solve_h_reference(params: &EnsembleParams, degree: usize) -> Result<RationalSeries> {
    let ex = params.exact.as_ref().unwrap();
    let (h0, h1) = boundary_values(params)?;
    let mut coeffs = vec![h0, h1];
    for k in 2..degree {
        let mut lifted: Vec<QuadPoly> = coeffs.iter().cloned().map(QuadPoly::constant).collect();
        lifted.push(QuadPoly::unknown());
        lifted.push(QuadPoly::zero());
        let trial = UnknownSeries::from_parts(lifted, k + 2);
        let [c0, c1, c2] = residual_unknown(&ex.bvec, &trial, k + 1).coeff(k).c;
        let x = if k == 2 {
            assert!(c0.is_zero());
            if !c2.is_zero() {
                -c1 / c2
            } else {
                BigRational::zero()
            }
        } else {
            assert!(c2.is_zero(), "quadratic term past k = 2");
            if c1.is_zero() {
                assert!(c0.is_zero(), "stalled reference recursion");
                BigRational::zero()
            } else {
                -c0 / c1
            }
        };
        coeffs.push(x);
    }
    Ok(RationalSeries::from_coeffs(coeffs, degree))
}

/// Exact re-expansion of a series in the conformal variable `u`, where
/// `t = 4u/(1+u)^2`. Coefficientwise,
///
/// ```text
/// g_k = sum_{j=1..k} f_j 4^j (-1)^{k-j} binom(j+k-1, k-j),   g_0 = f_0,
/// ```
///
/// from `(1+u)^{-2j} = sum_m (-1)^m binom(2j+m-1, m) u^m`. The inner sum
/// runs over a common denominator so only integers are combined.
fn conformal_u_coeffs(s: &RationalSeries) -> Vec<BigRational> {
    let d = s.prec();
    debug_assert!(d < INF_PREC, "conformal re-expansion needs finite precision");
    if d == 0 {
        return Vec::new();
    }
    let coeffs: Vec<BigRational> = (0..d).map(|k| s.coeff(k)).collect();
    let mut q = BigInt::one();
    for c in &coeffs {
        q = q.lcm(c.denom());
    }
    // w_j = numerator of f_j over the common denominator, times 4^j
    let mut w = Vec::with_capacity(d);
    let mut pow4 = BigInt::one();
    for (j, c) in coeffs.iter().enumerate() {
        if j > 0 {
            pow4 *= 4;
        }
        w.push(c.numer() * (&q / c.denom()) * &pow4);
    }
    let mut fact = Vec::with_capacity(2 * d);
    fact.push(BigInt::one());
    for i in 1..2 * d {
        let next = &fact[i - 1] * i;
        fact.push(next);
    }
    let mut out = Vec::with_capacity(d);
    out.push(coeffs[0].clone());
    for k in 1..d {
        let mut acc = BigInt::zero();
        for j in 1..=k {
            let binom = &fact[j + k - 1] / (&fact[k - j] * &fact[2 * j - 1]);
            let term = &w[j] * binom;
            if (k - j) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        out.push(BigRational::new(acc, q.clone()));
    }
    out
}

/// `u(t)`: inverse of `t = 4u/(1+u)^2` mapping `[0,1]` onto itself.
fn u_of_t(t: f64) -> f64 {
    let root = (1.0 - t).max(0.0).sqrt();
    t / ((1.0 + root) * (1.0 + root))
}

/// Fully reconstructed series solution, with flattened `u`-coefficient
/// caches for evaluation.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub params: EnsembleParams,
    pub degree: usize,
    h: RationalSeries,
    f: RationalSeries,
    /// `(h - h(0))/t - e2'`, precision `degree - 1`; drives `Ẽ'`.
    htilde: RationalSeries,
    log_c: f64,
    lead_exp: f64,
    f_u: Vec<f64>,
    htilde_u: Vec<f64>,
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

impl SeriesSolution {
    pub fn solve(params: &EnsembleParams, degree: usize) -> Result<Self> {
        let h = solve_h(params, degree)?;
        let ex = params.exact.as_ref().unwrap();
        let h0 = h.coeff(0);
        let h1_series = h.add_constant(&-h0).shift_down(1)?;
        let htilde = h1_series.add_constant(&-&ex.e2p);
        let shift = &ex.e2p + &ex.lead_exp;
        let integrand = h1_series.add_constant(&-shift).div_by_t_minus_1();
        let f = integrand.integrate().exp()?;
        let log_c = special::leading_constant_log(params.a, params.b, params.n)?;
        let f_u = conformal_u_coeffs(&f).iter().map(rational_to_f64).collect();
        let htilde_u = conformal_u_coeffs(&htilde)
            .iter()
            .map(rational_to_f64)
            .collect();
        Ok(SeriesSolution {
            params: params.clone(),
            degree,
            h,
            f,
            htilde,
            log_c,
            lead_exp: rational_to_f64(&ex.lead_exp),
            f_u,
            htilde_u,
        })
    }

    pub fn h_series(&self) -> &RationalSeries {
        &self.h
    }

    pub fn f_series(&self) -> &RationalSeries {
        &self.f
    }

    pub fn htilde_series(&self) -> &RationalSeries {
        &self.htilde
    }

    pub fn f_coefficient(&self, k: usize) -> BigRational {
        self.f.coeff(k)
    }

    /// `Ẽ_N(t) = C t^{N(N+b)} F(t)`.
    pub fn e_tilde(&self, t: f64) -> f64 {
        if t == 0.0 {
            return if self.lead_exp > 0.0 {
                0.0
            } else if self.lead_exp == 0.0 {
                self.log_c.exp()
            } else {
                f64::INFINITY
            };
        }
        (self.log_c + self.lead_exp * t.ln()).exp() * horner(&self.f_u, u_of_t(t))
    }

    /// Density in `t`-form:
    /// `nu = sqrt(t(1-t)) Ẽ' = C t^{L-1/2} (1-t)^{-1/2} F(t) [L - t htilde(t)]`,
    /// `L = N(N+b)`. The power form keeps the `t -> 0` endpoint exact.
    pub fn nu_t(&self, t: f64) -> f64 {
        let l = self.lead_exp;
        if t == 0.0 {
            // t^{L-1/2} limit: 0, C L F(0), or divergent
            return if l > 0.5 {
                0.0
            } else if l == 0.5 {
                self.log_c.exp() * l * horner(&self.f_u, 0.0)
            } else {
                f64::INFINITY
            };
        }
        let u = u_of_t(t);
        let bracket = l - t * horner(&self.htilde_u, u);
        let pow = (self.log_c + (l - 0.5) * t.ln() - 0.5 * (1.0 - t).ln()).exp();
        pow * horner(&self.f_u, u) * bracket
    }

    /// Gap probability at angle `phi`.
    pub fn e(&self, phi: f64) -> Result<f64> {
        Ok(self.e_tilde(phi_to_t(phi)?))
    }

    /// First-eigenphase density at angle `phi`.
    pub fn nu(&self, phi: f64) -> Result<f64> {
        Ok(self.nu_t(phi_to_t(phi)?))
    }

    /// Sample on a uniform `theta` grid over `[0, N]`. Rows within `1e-6`
    /// of either `phi` endpoint get `nu = 0`: the density form is 0/0 at
    /// `phi = 0` and the truncated series is meaningless that close to the
    /// singular point anyway.
    pub fn density_grid(&self, points: usize) -> Result<SolutionGrid> {
        if points < 2 {
            return Err(Error::domain("grid needs at least 2 points"));
        }
        let n = self.params.n;
        let mut rows = Vec::with_capacity(points);
        for i in 0..points {
            let theta = n * i as f64 / (points - 1) as f64;
            let phi = (theta * std::f64::consts::PI / n).min(std::f64::consts::PI);
            let t = phi_to_t(phi)?;
            let guarded = phi < 1e-6 || phi > std::f64::consts::PI - 1e-6;
            let nu = if guarded { 0.0 } else { self.nu_t(t) };
            rows.push(GridRow {
                t,
                phi,
                theta,
                e: self.e_tilde(t),
                nu,
            });
        }
        Ok(SolutionGrid::new(Method::Series, &self.params, rows))
    }

    /// Interior limit of the density at `phi = 0` (`N H1` when the hard-edge
    /// exponent `alpha` vanishes, else `0` or divergent).
    pub fn nu_at_zero(&self) -> Result<f64> {
        let alpha = self.params.alpha;
        if alpha > 0.0 {
            Ok(0.0)
        } else if alpha == 0.0 {
            let (h1, _) = special::h1_h2(alpha, self.params.beta, self.params.n)?;
            Ok(self.params.n * h1)
        } else {
            Ok(f64::INFINITY)
        }
    }

    /// Exact coefficients of `F`, one `k<TAB>numer/denom` line per order.
    pub fn coefficients_text(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.f.coeffs().iter().enumerate() {
            out.push_str(&format!("{k}\t{c}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i128, q: i128) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn params_n1() -> EnsembleParams {
        EnsembleParams::parse("-1/2", "-1/2", "1").unwrap()
    }

    #[test]
    fn boundary_values_closed_form() {
        let (h0, h1) = boundary_values(&params_n1()).unwrap();
        assert_eq!(h0, rat(-3, 8));
        assert_eq!(h1, rat(1, 12));
        let p = EnsembleParams::parse("-1/2", "1/2", "2").unwrap();
        let (h0, h1) = boundary_values(&p).unwrap();
        assert_eq!(h0, rat(-3, 1));
        assert_eq!(h1, rat(4, 9));
    }

    #[test]
    fn h_coefficients_match_arcsine_expansion() {
        // N = 1, a = b = -1/2 has the closed form
        // h = -t/4 + 1/8 - sqrt(t(1-t)) / (2 arcsin sqrt(t));
        // reference coefficients were expanded independently.
        let want = [
            rat(-3, 8),
            rat(1, 12),
            rat(2, 45),
            rat(4, 189),
            rat(184, 14175),
            rat(4208, 467775),
            rat(4281184, 638512875),
            rat(10048576, 1915538625),
            rat(2075529088, 488462349375),
            rat(688500216064, 194896477400625),
            rat(13769276687872, 4593988395871875),
            rat(5735169974445056, 2218896395206115625),
            rat(6841603104807380992, 3028793579456347828125),
            rat(3627609279641071616, 1817276147673808696875),
            rat(7038583095474980036608, 3952575621190533915703125),
        ];
        let h = solve_h(&params_n1(), 15).unwrap();
        for (k, w) in want.iter().enumerate() {
            assert_eq!(&h.coeff(k), w, "h coefficient {k}");
        }
    }

    #[test]
    fn h_coefficients_nondegenerate_n2() {
        let p = EnsembleParams::parse("-1/2", "1/2", "2").unwrap();
        let h = solve_h(&p, 6).unwrap();
        let want = [
            rat(-3, 1),
            rat(4, 9),
            rat(800, 6237),
            rat(47360, 729729),
            rat(20767360, 505702197),
            rat(2255882240, 77372436141),
        ];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(&h.coeff(k), w, "h coefficient {k}");
        }
    }

    #[test]
    fn degenerate_case_h_constant() {
        // N = 2, a = b = 0: Ẽ = t^4, so h = -2 identically and each
        // recursion step hits the 0 = 0 fallback.
        let p = EnsembleParams::parse("0", "0", "2").unwrap();
        let h = solve_h(&p, 20).unwrap();
        assert_eq!(h.coeff(0), rat(-2, 1));
        for k in 1..20 {
            assert!(h.coeff(k).is_zero(), "coefficient {k} should vanish");
        }
    }

    #[test]
    fn sigma_residual_vanishes() {
        let p = EnsembleParams::parse("-1/2", "1/2", "2").unwrap();
        let h = solve_h(&p, 12).unwrap();
        let r = sigma_residual(&p, &h).unwrap();
        assert!(r.prec() >= 11);
        for k in 0..11.min(r.prec()) {
            assert!(r.coeff(k).is_zero(), "residual coefficient {k}");
        }
    }

    #[test]
    fn incremental_recursion_matches_reference() {
        // the cache-shift fast path against the full symbolic residual,
        // across degenerate, generic, and large-N parameter sets
        let cases = [
            ("0", "0", "1"),
            ("0", "0", "2"),
            ("-1/2", "-1/2", "1"),
            ("-1/2", "1/2", "2"),
            ("1/3", "3/4", "3"),
            ("-1/2", "1/2", "5"),
        ];
        for (a, b, n) in cases {
            let p = EnsembleParams::parse(a, b, n).unwrap();
            let fast = solve_h(&p, 14).unwrap();
            let slow = solve_h_reference(&p, 14).unwrap();
            for k in 0..14 {
                assert_eq!(
                    fast.coeff(k),
                    slow.coeff(k),
                    "coefficient {k} for ({a}, {b}, {n})"
                );
            }
        }
    }

    #[test]
    fn f_coefficients_central_binomial() {
        // N = 1, a = b = -1/2: F_k = binom(2k, k) / (4^k (2k+1))
        let sol = SeriesSolution::solve(&params_n1(), 50).unwrap();
        let pins = [
            (0usize, rat(1, 1)),
            (1, rat(1, 6)),
            (2, rat(3, 40)),
            (3, rat(5, 112)),
            (5, rat(63, 2816)),
            (10, rat(46189, 5505024)),
            (20, rat(34461632205, 11269994184704)),
        ];
        for (k, w) in pins {
            assert_eq!(sol.f_coefficient(k), w, "F coefficient {k}");
        }
        // and the closed form holds at every order
        let mut binom = BigRational::one(); // binom(2k,k)/4^k
        for k in 0..50usize {
            if k > 0 {
                let kk = k as i128;
                binom = binom * rat(2 * kk - 1, 2 * kk);
            }
            let want = &binom / rat(2 * k as i128 + 1, 1);
            assert_eq!(sol.f_coefficient(k), want, "closed form at {k}");
        }
    }

    #[test]
    fn multiply_back_identity() {
        // For N = 1, a = b = -1/2: (h + t/4 - 1/8) * 2F = -sqrt(1-t)
        // exactly, coefficient by coefficient.
        let sol = SeriesSolution::solve(&params_n1(), 30).unwrap();
        let shift = RationalSeries::poly(vec![rat(-1, 8), rat(1, 4)]);
        let lhs = sol
            .h_series()
            .add(&shift)
            .mul(&sol.f_series().scale(&rat(2, 1)));
        // coefficients of sqrt(1-t): s_0 = 1, s_{k+1} = s_k (2k-1)/(2k+2)
        let mut s = BigRational::one();
        for k in 0..28usize {
            assert_eq!(lhs.coeff(k), -&s, "coefficient {k}");
            let kk = k as i128;
            s = s * rat(2 * kk - 1, 2 * kk + 2);
        }
    }

    #[test]
    fn conformal_coefficients_closed_form() {
        // F = arcsin(sqrt t)/sqrt t turns into (1+u) arctan(sqrt u)/sqrt u,
        // whose coefficients are g_0 = 1, g_k = (-1)^{k+1} 2/(4k^2 - 1)
        let sol = SeriesSolution::solve(&params_n1(), 30).unwrap();
        let g = conformal_u_coeffs(sol.f_series());
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], rat(1, 1));
        for k in 1..30i128 {
            let want = rat(if k % 2 == 1 { 2 } else { -2 }, 4 * k * k - 1);
            assert_eq!(g[k as usize], want, "u coefficient {k}");
        }
    }

    #[test]
    fn arcsine_law_evaluation() {
        // Ẽ_1(t) = (2/pi) arcsin sqrt(t) and nu = 1/pi identically; the
        // conformal evaluation holds the truncation error near machine
        // precision even at t = 0.85 (u = 0.45), where the plain t-sum
        // of 50 terms is off by ~7e-7
        let sol = SeriesSolution::solve(&params_n1(), 50).unwrap();
        assert!((sol.e_tilde(0.5) - 0.5).abs() < 1e-12);
        assert!((sol.e_tilde(0.25) - 1.0 / 3.0).abs() < 1e-12);
        for phi in [std::f64::consts::FRAC_PI_4, 1.2, 2.0, 3.0] {
            let nu = sol.nu(phi).unwrap();
            assert!(
                (nu - std::f64::consts::FRAC_1_PI).abs() < 1e-12,
                "phi = {phi}, nu = {nu}"
            );
        }
        // hard-edge endpoint: L = 1/2 exactly, nu(pi) = C L F(0) = 1/pi
        assert!((sol.nu_t(0.0) - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
    }

    #[test]
    fn degenerate_e_is_quartic() {
        // N = 2, a = b = 0: Ẽ = t^4
        let p = EnsembleParams::parse("0", "0", "2").unwrap();
        let sol = SeriesSolution::solve(&p, 20).unwrap();
        for t in [0.1, 0.5, 0.9, 1.0] {
            assert!((sol.e_tilde(t) - t.powi(4)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn grid_shape_and_endpoints() {
        let sol = SeriesSolution::solve(&params_n1(), 30).unwrap();
        let grid = sol.density_grid(101).unwrap();
        assert_eq!(grid.rows.len(), 101);
        assert_eq!(grid.rows[0].theta, 0.0);
        assert!((grid.rows[100].theta - 1.0).abs() < 1e-15);
        assert!((grid.rows[0].t - 1.0).abs() < 1e-15);
        // both endpoint rows are guarded to zero density
        assert_eq!(grid.rows[0].nu, 0.0);
        assert_eq!(grid.rows[100].nu, 0.0);
        // the interior limit itself is still available: N H1 = 1/pi here
        assert!((sol.nu_at_zero().unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
        assert!(grid.rows.windows(2).all(|w| w[0].phi < w[1].phi));
    }

    #[test]
    fn rejects_inexact_parameters() {
        let p = EnsembleParams::from_f64(0.25, 0.0, 2.0).unwrap();
        assert!(solve_h(&p, 10).is_err());
    }

    #[test]
    fn default_degree_tiers() {
        assert_eq!(default_degree(1.0), Some(100));
        assert_eq!(default_degree(2.0), Some(100));
        assert_eq!(default_degree(3.0), Some(300));
        assert_eq!(default_degree(5.0), Some(300));
        assert_eq!(default_degree(6.0), None);
    }
}
