//! Distribution of the lowest eigenphase of Jacobi random-matrix ensembles.
//!
//! The ensemble `J_N^(a,b)` puts `N` levels on `[0,1]` with density
//! proportional to `prod x_j^b (1-x_j)^a * prod (x_k - x_j)^2`. In angular
//! variables `x = (1+cos phi)/2` the quantity of interest is the gap
//! probability `E_N(phi)` (no eigenphase in `[0,phi]`) and the density of the
//! first eigenphase `nu_N(phi) = -dE_N/dphi`.
//!
//! Two independent methods compute `nu_N`:
//!
//! * [`ode_solver`] integrates the Painlevé VI sigma-form as a three-component
//!   first-order system for `(Ẽ_N, h, h')` from `t = 1 - eps` down to small
//!   `t`, starting from Selberg-integral asymptotics near `phi = 0`.
//! * [`series_solver`] determines the exact rational Taylor coefficients of
//!   the auxiliary Hamiltonian `h(t)` about `t = 0` by a coefficient
//!   recursion, then reconstructs `Ẽ_N` and `nu_N`; accurate near `phi = pi`.
//!
//! [`mc_oracle`] adds an accept-reject sampler of the joint density as a
//! statistical cross-check, and [`harness`] quantifies the agreement of the
//! methods on an overlap window.

pub mod cli;
pub mod error;
pub mod harness;
pub mod mc_oracle;
pub mod ode_solver;
pub mod params;
pub mod ratseries;
pub mod series_solver;
pub mod special;

pub use error::{Error, Result};
pub use params::{EnsembleParams, GridRow, HamiltonianState, Method, SolutionGrid};
