//! Accept-reject sampler for the N-level joint density, used as a
//! statistical oracle against the analytic methods.
//!
//! The unnormalized density on `(0, pi)^N` is
//!
//! ```text
//! prod_{j<k} (cos phi_j - cos phi_k)^2
//!     * prod_j (1 - cos phi_j)^alpha (1 + cos phi_j)^beta
//! ```
//!
//! with `alpha = a + 1/2`, `beta = b + 1/2`. Proposals are independent
//! uniforms on `(0, pi)^N`, so the density must be bounded: the sampler
//! requires `a, b >= -1/2`. The envelope is `envelope_scale` times a
//! numerically located maximum (deterministic coordinate-ascent, no
//! randomness); if a proposal ever beats the envelope the run restarts
//! with the envelope doubled.
//!
//! Reproducibility contract: proposal `i` of restart `r` reads from its own
//! ChaCha12 stream (key derived from the seed and `r`, stream index `i`), so
//! the accepted set depends only on `(seed, params, envelope)` and can be
//! sharded across workers by partitioning proposal indices.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::params::EnsembleParams;

const MAX_RESTARTS: u32 = 32;
/// Coordinate-ascent sweep count and scan resolution for the envelope search.
const SWEEPS: usize = 6;
const SCAN_POINTS: usize = 1024;

#[derive(Debug, Clone)]
pub struct McConfig {
    /// Accepted sample count.
    pub samples: usize,
    pub seed: u64,
    /// Safety factor on the located density maximum, at least 1.
    pub envelope_scale: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 200_000,
            seed: 0x6a61636f62,
            envelope_scale: 1.1,
        }
    }
}

/// Accepted tuples plus bookkeeping from the rejection loop.
#[derive(Debug, Clone)]
pub struct McSamples {
    /// Accepted level tuples, each of length `N`, in proposal order.
    pub tuples: Vec<Vec<f64>>,
    /// Envelope doublings that were needed before a clean pass.
    pub restarts: u32,
    /// Proposals consumed by the final (clean) pass.
    pub proposals: u64,
    /// Log of the envelope constant actually used.
    pub log_envelope: f64,
}

/// Log of the unnormalized joint density; `-inf` on the boundary when an
/// exponent is positive. Zero exponents skip their factor so the hard-wall
/// cases stay finite at the endpoints.
pub fn log_density(params: &EnsembleParams, phis: &[f64]) -> f64 {
    let (alpha, beta) = (params.alpha, params.beta);
    let mut ld = 0.0;
    for (j, &pj) in phis.iter().enumerate() {
        let c = pj.cos();
        if alpha != 0.0 {
            ld += alpha * (1.0 - c).ln();
        }
        if beta != 0.0 {
            ld += beta * (1.0 + c).ln();
        }
        for &pk in &phis[j + 1..] {
            ld += 2.0 * (c - pk.cos()).abs().ln();
        }
    }
    ld
}

fn check_sampler_domain(params: &EnsembleParams) -> Result<u32> {
    let n = params
        .integer_n()
        .ok_or_else(|| Error::domain("sampler needs an integer N"))?;
    if n == 0 || n > 6 {
        return Err(Error::domain(format!(
            "sampler supports 1 <= N <= 6 (rejection rate explodes beyond), got {n}"
        )));
    }
    if params.alpha < 0.0 || params.beta < 0.0 {
        return Err(Error::domain(
            "uniform-proposal rejection sampling needs a bounded density: \
             require a >= -1/2 and b >= -1/2",
        ));
    }
    Ok(n)
}

/// Deterministic search for `max log_density` over `[0, pi]^N`: a few
/// structured starting configurations, then coordinate sweeps that scan
/// each coordinate on a fine grid and bisect around the best cell.
fn locate_log_max(params: &EnsembleParams, n: u32) -> f64 {
    let n = n as usize;
    let pi = std::f64::consts::PI;
    let mut best = f64::NEG_INFINITY;
    let starts: [Box<dyn Fn(usize) -> f64>; 3] = [
        Box::new(move |j| pi * (j + 1) as f64 / (n + 1) as f64),
        Box::new(move |j| pi * (2 * j + 1) as f64 / (2 * n) as f64),
        Box::new(move |j| pi * ((j + 1) as f64 / (n + 1) as f64).powf(0.6)),
    ];
    for start in starts {
        let mut phis: Vec<f64> = (0..n).map(&*start).collect();
        let mut val = log_density(params, &phis);
        for _ in 0..SWEEPS {
            for j in 0..n {
                let saved = phis[j];
                let mut cell = 0usize;
                let mut cell_val = f64::NEG_INFINITY;
                for m in 0..=SCAN_POINTS {
                    phis[j] = pi * m as f64 / SCAN_POINTS as f64;
                    let v = log_density(params, &phis);
                    if v > cell_val {
                        cell_val = v;
                        cell = m;
                    }
                }
                // golden-section polish inside the two cells around the peak
                let mut lo = pi * cell.saturating_sub(1) as f64 / SCAN_POINTS as f64;
                let mut hi = pi * (cell + 1).min(SCAN_POINTS) as f64 / SCAN_POINTS as f64;
                const INV_GOLD: f64 = 0.618_033_988_749_894_9;
                for _ in 0..40 {
                    let m1 = hi - INV_GOLD * (hi - lo);
                    let m2 = lo + INV_GOLD * (hi - lo);
                    phis[j] = m1;
                    let v1 = log_density(params, &phis);
                    phis[j] = m2;
                    let v2 = log_density(params, &phis);
                    if v1 > v2 {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                phis[j] = 0.5 * (lo + hi);
                let v = log_density(params, &phis);
                if v >= val {
                    val = v;
                } else {
                    // a pathological polish step must not lose ground
                    phis[j] = if cell_val > val { pi * cell as f64 / SCAN_POINTS as f64 } else { saved };
                    val = log_density(params, &phis);
                }
            }
        }
        if val > best {
            best = val;
        }
    }
    best
}

fn stream_rng(seed: u64, restart: u32, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&restart.to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

fn sample_with_envelope(
    params: &EnsembleParams,
    cfg: &McConfig,
    n: u32,
    mut log_envelope: f64,
) -> Result<McSamples> {
    let pi = std::f64::consts::PI;
    let mut restart = 0u32;
    'restart: loop {
        let mut tuples = Vec::with_capacity(cfg.samples);
        let mut index = 0u64;
        while tuples.len() < cfg.samples {
            let mut rng = stream_rng(cfg.seed, restart, index);
            index += 1;
            let phis: Vec<f64> = (0..n).map(|_| pi * rng.random::<f64>()).collect();
            let ld = log_density(params, &phis);
            if ld > log_envelope {
                restart += 1;
                if restart > MAX_RESTARTS {
                    return Err(Error::EnvelopeViolation { restarts: restart });
                }
                log_envelope += std::f64::consts::LN_2;
                continue 'restart;
            }
            if rng.random::<f64>().ln() < ld - log_envelope {
                tuples.push(phis);
            }
        }
        return Ok(McSamples {
            tuples,
            restarts: restart,
            proposals: index,
            log_envelope,
        });
    }
}

/// Draw `cfg.samples` accepted tuples from the joint density.
pub fn sample_levels(params: &EnsembleParams, cfg: &McConfig) -> Result<McSamples> {
    let n = check_sampler_domain(params)?;
    if cfg.samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    if !(cfg.envelope_scale >= 1.0) {
        return Err(Error::domain("envelope_scale must be at least 1"));
    }
    let log_envelope = cfg.envelope_scale.ln() + locate_log_max(params, n);
    sample_with_envelope(params, cfg, n, log_envelope)
}

/// Empirical CDF of the smallest component: for each requested `phi`, the
/// fraction of accepted tuples whose minimum is `<= phi`. Estimates
/// `1 - E_N(phi)`.
pub fn empirical_first_cdf(
    params: &EnsembleParams,
    cfg: &McConfig,
    phis: &[f64],
) -> Result<Vec<f64>> {
    let samples = sample_levels(params, cfg)?;
    let mut mins: Vec<f64> = samples
        .tuples
        .iter()
        .map(|tuple| tuple.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    mins.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    let m = mins.len() as f64;
    Ok(phis
        .iter()
        .map(|&phi| mins.partition_point(|&v| v <= phi) as f64 / m)
        .collect())
}
