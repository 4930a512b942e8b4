//! Gamma-family special functions and the closed-form constants built from
//! them: Selberg/Aomoto integral values, the Jacobi weight normalization, and
//! the two-term small-angle expansion of the gap probability.
//!
//! Everything is computed in log space; the raw values overflow `f64` well
//! before the parameter ranges of interest are exhausted.

use crate::error::{Error, Result};
use crate::params::EnsembleParams;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// `zeta'(-1)`; `ln A = 1/12 - zeta'(-1)` with `A` the Glaisher constant.
const ZETA_PRIME_NEG1: f64 = -0.165_421_143_700_450_93;

/// Bernoulli numbers `B_2 .. B_16` as (numerator, denominator).
const BERNOULLI: [(f64, f64); 8] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
];

/// Stirling series for `ln Gamma`, valid for `x >= 15` where the truncation
/// error is below 1e-22 relative.
fn log_gamma_stirling(x: f64) -> f64 {
    let mut sum = (x - 0.5) * x.ln() - x + 0.5 * LN_2PI;
    let x2 = x * x;
    let mut xp = x;
    for (k, (num, den)) in BERNOULLI.iter().enumerate() {
        let n = (k + 1) as f64;
        sum += num / (den * 2.0 * n * (2.0 * n - 1.0) * xp);
        xp *= x2;
    }
    sum
}

/// `ln Gamma(x)` for `x > 0`, accurate to ~1e-14 relative.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log_gamma needs x > 0, got {x}")));
    }
    if x >= 15.0 {
        return Ok(log_gamma_stirling(x));
    }
    // Gamma(x) = Gamma(x + m) / (x (x+1) ... (x+m-1)); sum the logs with
    // compensation since the recursion partially cancels the Stirling value.
    let m = (15.0 - x).ceil() as usize;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 0..m {
        let term = (x + j as f64).ln();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(log_gamma_stirling(x + m as f64) - sum)
}

/// Hybrid asymptotic for `ln G(w)` (Barnes G), `w >= 11`.
fn log_barnes_g_asymptotic(w: f64) -> f64 {
    let z = w - 1.0;
    let ln_a = 1.0 / 12.0 - ZETA_PRIME_NEG1;
    let mut sum = 0.25 * z * z + z * log_gamma_stirling(z + 1.0)
        - (0.5 * z * (z + 1.0) + 1.0 / 12.0) * z.ln()
        - ln_a;
    let z2 = z * z;
    let mut zp = z2;
    // B_{2k+2} / (2k (2k+1) (2k+2) z^{2k}), k = 1..6
    for (k, (num, den)) in BERNOULLI.iter().enumerate().skip(1).take(6) {
        let n = k as f64; // 2k+2 = 2(k+1)
        sum += num / (den * 2.0 * n * (2.0 * n + 1.0) * (2.0 * n + 2.0) * zp);
        zp *= z2;
    }
    sum
}

/// `ln G(x)` for `x > 0`, with `G` the Barnes G-function
/// (`G(x+1) = Gamma(x) G(x)`, `G(1) = G(2) = G(3) = 1`). Accurate to ~1e-12.
pub fn log_barnes_g(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log_barnes_g needs x > 0, got {x}")));
    }
    if x >= 11.0 {
        return Ok(log_barnes_g_asymptotic(x));
    }
    let m = (11.0 - x).ceil() as usize;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 0..m {
        let term = log_gamma(x + j as f64)?;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(log_barnes_g_asymptotic(x + m as f64) - sum)
}

fn check_selberg_domain(n: u32, rho: f64, eta: f64, gamma: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("selberg integral needs n >= 1"));
    }
    if !(rho > 0.0) || !(eta > 0.0) {
        return Err(Error::domain(format!(
            "selberg integral needs rho, eta > 0, got ({rho}, {eta})"
        )));
    }
    let nf = n as f64;
    let mut bound = 1.0 / nf;
    if n > 1 {
        bound = bound.min(rho / (nf - 1.0)).min(eta / (nf - 1.0));
    }
    if !(gamma > -bound) {
        return Err(Error::domain(format!(
            "selberg integral needs gamma > {}, got {gamma}",
            -bound
        )));
    }
    Ok(())
}

/// Log of the Selberg integral
/// `S_n(rho, eta; gamma) = ∫_{[0,1]^n} Π t_i^{rho-1} (1-t_i)^{eta-1} Π_{i<j} |t_i - t_j|^{2 gamma} dt`.
pub fn selberg_log(n: u32, rho: f64, eta: f64, gamma: f64) -> Result<f64> {
    check_selberg_domain(n, rho, eta, gamma)?;
    let lg = |x: f64| log_gamma(x);
    let mut sum = 0.0;
    for j in 0..n {
        let jg = j as f64 * gamma;
        sum += lg(1.0 + gamma + jg)? + lg(rho + jg)? + lg(eta + jg)?
            - lg(1.0 + gamma)?
            - lg(rho + eta + (n as f64 + j as f64 - 1.0) * gamma)?;
    }
    Ok(sum)
}

/// Log of the Aomoto integral: the Selberg integrand with the extra factor
/// `Π_{i=1}^{r} t_i`. `r = 0` reduces to the Selberg integral.
pub fn aomoto_log(n: u32, r: u32, rho: f64, eta: f64, gamma: f64) -> Result<f64> {
    if r > n {
        return Err(Error::domain(format!(
            "aomoto integral needs r <= n, got r = {r}, n = {n}"
        )));
    }
    let mut log_pref = 0.0;
    for j in 1..=r {
        let (jf, nf) = (j as f64, n as f64);
        log_pref += ((rho + (nf - jf) * gamma) / (rho + eta + (2.0 * nf - jf - 1.0) * gamma)).ln();
    }
    Ok(log_pref + selberg_log(n, rho, eta, gamma)?)
}

/// Log of `S_nu(rho, eta; 1)` for real `nu`, through Barnes G:
/// `S_nu = G(nu+2) G(rho+nu)/G(rho) · G(eta+nu)/G(eta) · G(rho+eta+nu-1)/G(rho+eta+2nu-1)`.
/// Agrees with [`selberg_log`] at `gamma = 1` for integer `nu`.
pub fn selberg_log_real(nu: f64, rho: f64, eta: f64) -> Result<f64> {
    if !(nu > 0.0) || !(rho > 0.0) || !(eta > 0.0) {
        return Err(Error::domain(format!(
            "selberg_log_real needs nu, rho, eta > 0, got ({nu}, {rho}, {eta})"
        )));
    }
    if !(rho + eta + nu > 1.0) {
        return Err(Error::domain("selberg_log_real needs rho + eta + nu > 1"));
    }
    Ok(log_barnes_g(nu + 2.0)? + log_barnes_g(rho + nu)? - log_barnes_g(rho)?
        + log_barnes_g(eta + nu)?
        - log_barnes_g(eta)?
        + log_barnes_g(rho + eta + nu - 1.0)?
        - log_barnes_g(rho + eta + 2.0 * nu - 1.0)?)
}

/// Log of the partition normalization `C_N` of the angular ensemble with
/// weight `(1-cos phi)^alpha (1+cos phi)^beta`:
/// `1/C_N = 2^{N(N+alpha+beta-1)} Π_{j=0}^{N-1} Γ(2+j) Γ(beta+1/2+j) Γ(alpha+1/2+j) / Γ(alpha+beta+N+j)`.
pub fn normalization_log(alpha: f64, beta: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("normalization needs n >= 1"));
    }
    let nf = n as f64;
    let mut log_inv = nf * (nf + alpha + beta - 1.0) * std::f64::consts::LN_2;
    for j in 0..n {
        let jf = j as f64;
        log_inv += log_gamma(2.0 + jf)? + log_gamma(beta + 0.5 + jf)?
            + log_gamma(alpha + 0.5 + jf)?
            - log_gamma(alpha + beta + nf + jf)?;
    }
    Ok(-log_inv)
}

/// The constant `C = S_N(1, b+1; 1) / S_N(a+1, b+1; 1)` in
/// `Ẽ_N(t) = C t^{N(N+b)} F(t)`; works for real `N`.
pub fn leading_constant_log(a: f64, b: f64, n: f64) -> Result<f64> {
    Ok(selberg_log_real(n, 1.0, b + 1.0)? - selberg_log_real(n, a + 1.0, b + 1.0)?)
}

/// First two coefficients of the small-angle expansion of `E_N(phi)`:
///
/// `H1 = Γ(α+N+1/2) Γ(α+β+N) / (2^{2α} Γ(α+1/2) Γ(α+3/2) Γ(N+1) Γ(β+N-1/2))`
/// `H2 = Γ(α+N+1/2) Γ(α+β+N+1) / (2^{2α+1} Γ(N+1) Γ(β+N-1/2) Γ(α+1/2) Γ(α+5/2))`
pub fn h1_h2(alpha: f64, beta: f64, n: f64) -> Result<(f64, f64)> {
    let common = log_gamma(alpha + n + 0.5)? - log_gamma(n + 1.0)?
        - log_gamma(beta + n - 0.5)?
        - log_gamma(alpha + 0.5)?;
    let log_h1 = common + log_gamma(alpha + beta + n)?
        - 2.0 * alpha * std::f64::consts::LN_2
        - log_gamma(alpha + 1.5)?;
    let log_h2 = common + log_gamma(alpha + beta + n + 1.0)?
        - (2.0 * alpha + 1.0) * std::f64::consts::LN_2
        - log_gamma(alpha + 2.5)?;
    Ok((log_h1.exp(), log_h2.exp()))
}

/// Two-term expansion of the gap probability near `phi = 0`:
///
/// `E = 1 - N [ H1 phi^{2α+1}/(2α+1) - c2 phi^{2α+3}/(2α+3) ]`,
/// `c2 = (N-1) H2 + (α/12 + β/4) H1`,
///
/// with the matching derivatives. Used for initial data at `t0 = 1 - eps`
/// and as the small-angle piece when gluing.
#[derive(Debug, Clone)]
pub struct TaylorE {
    alpha: f64,
    /// `N * H1`
    a1: f64,
    /// `N * ((N-1) H2 + (alpha/12 + beta/4) H1)`
    a2: f64,
}

impl TaylorE {
    pub fn new(params: &EnsembleParams) -> Result<Self> {
        let (alpha, beta, n) = (params.alpha, params.beta, params.n);
        let (h1, h2) = h1_h2(alpha, beta, n)?;
        Ok(TaylorE {
            alpha,
            a1: n * h1,
            a2: n * ((n - 1.0) * h2 + (alpha / 12.0 + beta / 4.0) * h1),
        })
    }

    pub fn e(&self, phi: f64) -> f64 {
        let a = self.alpha;
        1.0 - self.a1 * phi.powf(2.0 * a + 1.0) / (2.0 * a + 1.0)
            + self.a2 * phi.powf(2.0 * a + 3.0) / (2.0 * a + 3.0)
    }

    pub fn ep(&self, phi: f64) -> f64 {
        let a = self.alpha;
        let lead = if phi == 0.0 && a == 0.0 {
            self.a1
        } else {
            self.a1 * phi.powf(2.0 * a)
        };
        -lead + self.a2 * phi.powf(2.0 * a + 2.0)
    }

    pub fn epp(&self, phi: f64) -> f64 {
        let a = self.alpha;
        // the phi^{2α-1} term carries a 2α factor, so it vanishes
        // identically at α = 0 rather than blowing up
        let lead = if a == 0.0 {
            0.0
        } else {
            2.0 * a * self.a1 * phi.powf(2.0 * a - 1.0)
        };
        -lead + self.a2 * (2.0 * a + 2.0) * phi.powf(2.0 * a + 1.0)
    }

    /// Density `nu = -dE/dphi` from the expansion.
    pub fn nu(&self, phi: f64) -> f64 {
        -self.ep(phi)
    }
}
