//! The random clock ũ(t) = ∫₀ᵗ ds/y_s², its inverse c(u), and the diffusion
//! T_u = D_{c(u)}/√κ read off a flow path.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::flow::{cot_arg, interpolate, FlowPath, FlowState};
use crate::kappa::Kappa;

/// Tabulated clock: `u[k] = ũ(t[k])`, strictly increasing from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChangeMap {
    t: Vec<f64>,
    u: Vec<f64>,
}

/// Cumulative trapezoidal integral of 1/y² along the path's time grid.
pub fn u_tilde(path: &FlowPath) -> TimeChangeMap {
    let states = path.states();
    let mut t = Vec::with_capacity(states.len());
    let mut u = Vec::with_capacity(states.len());
    t.push(states[0].t);
    u.push(0.0);
    let mut acc = 0.0;
    for w in states.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        acc += 0.5 * (b.t - a.t) * (1.0 / (a.y * a.y) + 1.0 / (b.y * b.y));
        t.push(b.t);
        u.push(acc);
    }
    TimeChangeMap { t, u }
}

impl TimeChangeMap {
    /// Builds a map from explicit tables, checking the invariants.
    pub fn from_tables(t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != u.len() {
            return Err(invalid(
                "map",
                "tables must be nonempty and of equal length",
            ));
        }
        if u[0] != 0.0 {
            return Err(invalid("map", "u must start at 0"));
        }
        if !u.windows(2).all(|w| w[1] > w[0]) || !t.windows(2).all(|w| w[1] > w[0]) {
            return Err(invalid("map", "tables must be strictly increasing"));
        }
        Ok(Self { t, u })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u
    }

    pub fn max_u(&self) -> f64 {
        *self.u.last().expect("nonempty map")
    }

    /// Index k and weight λ with u = (1−λ)·u[k] + λ·u[k+1].
    fn locate(&self, u: f64) -> Result<(usize, f64)> {
        ensure_finite("u", u)?;
        if u < 0.0 {
            return Err(invalid("u", "must be nonnegative"));
        }
        let max = self.max_u();
        if u > max {
            return Err(Error::HorizonExceeded {
                requested: u,
                available: max,
            });
        }
        // first index with u[k] >= u
        let j = self.u.partition_point(|&v| v < u);
        if self.u[j] == u {
            return Ok((j, 0.0));
        }
        let k = j - 1;
        Ok((k, (u - self.u[k]) / (self.u[k + 1] - self.u[k])))
    }

    /// c(u) = inf{t : ũ(t) ≥ u}, linear between grid points.
    pub fn inverse_c(&self, u: f64) -> Result<f64> {
        let (k, lambda) = self.locate(u)?;
        if lambda == 0.0 {
            return Ok(self.t[k]);
        }
        Ok(self.t[k] + lambda * (self.t[k + 1] - self.t[k]))
    }

    /// s = inf{t : ũ(t) = a}; the same quantity as [`Self::inverse_c`].
    pub fn hitting_time(&self, a: f64) -> Result<f64> {
        self.inverse_c(a)
    }

    /// CSV with header `t,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,u")?;
        for (t, u) in self.t.iter().zip(&self.u) {
            writeln!(w, "{t},{u}")?;
        }
        Ok(())
    }
}

/// a_n = ln(1 + 4n/κ).
pub fn schedule_a(kappa: Kappa, n: u64) -> f64 {
    (4.0 * n as f64 / kappa.value()).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    DirectSde,
    ExtractedFromFlow,
}

/// Samples of T on a grid of clock values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionPath {
    pub kappa: Kappa,
    pub u: Vec<f64>,
    pub values: Vec<f64>,
    pub origin: Origin,
    pub seed: Option<u64>,
}

impl DiffusionPath {
    /// Grid spacing; zero for a single-point grid.
    pub fn du(&self) -> f64 {
        if self.u.len() < 2 {
            0.0
        } else {
            self.u[1] - self.u[0]
        }
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }

    /// CSV with header `u,T`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "u,T")?;
        for (u, v) in self.u.iter().zip(&self.values) {
            writeln!(w, "{u},{v}")?;
        }
        Ok(())
    }
}

/// Flow state at capacity time c(u), interpolating x and y linearly.
pub fn state_at_clock(path: &FlowPath, map: &TimeChangeMap, u: f64) -> Result<FlowState> {
    let (k, lambda) = map.locate(u)?;
    let states = path.states();
    if lambda == 0.0 {
        return Ok(states[k]);
    }
    Ok(interpolate(&states[k], &states[k + 1], lambda))
}

/// T_u = D_{c(u)}/√κ for every u in `u_grid`.
pub fn extract_t(path: &FlowPath, map: &TimeChangeMap, u_grid: &[f64]) -> Result<DiffusionPath> {
    if map.t_grid().len() != path.states().len() {
        return Err(invalid("map", "does not belong to this path"));
    }
    let sqrt_kappa = path.kappa().sqrt();
    let values = u_grid
        .iter()
        .map(|&u| state_at_clock(path, map, u).map(|s| cot_arg(&s) / sqrt_kappa))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiffusionPath {
        kappa: path.kappa(),
        u: u_grid.to_vec(),
        values,
        origin: Origin::ExtractedFromFlow,
        seed: path.seed(),
    })
}
