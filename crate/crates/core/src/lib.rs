//! Simulation and verification tools for the time-changed backward Loewner
//! flow.
//!
//! The tracked point z_t = h_t(i) − √κ·B_t of the backward SLE_κ flow becomes,
//! after the random time change u = ∫ dt/y_t², the autonomous diffusion
//!
//! ```text
//! dT_u = −4 T_u / (1 + κ T_u²) du + dB̃_u,   T_0 = 0,
//! ```
//!
//! with T_u = (x/y)/√κ evaluated at capacity time c(u). For κ < 8 it has the
//! stationary density C (1 + κT²)^{−4/κ}.
//!
//! Modules:
//! - [`flow`]: Euler–Maruyama integration of the flow.
//! - [`time_change`]: the clock ũ, its inverse c, hitting times, extraction of T.
//! - [`diffusion`]: direct simulation of T, scale and speed densities, ergodic averages.
//! - [`special`]: digamma, Pochhammer, and the Gauss ₂F₁ engine.
//! - [`stationary`]: the closed-form stationary law and the general solution
//!   of the stationary forward equation.
//! - [`stats`]: ECDF, Kolmogorov–Smirnov distances, histograms.
//! - [`ensemble`]: parallel, seed-deterministic Monte Carlo ensembles.

pub mod diffusion;
pub mod ensemble;
pub mod error;
pub mod flow;
pub mod kappa;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stationary;
pub mod stats;
pub mod time_change;

pub use error::{Error, Result};
pub use kappa::Kappa;
