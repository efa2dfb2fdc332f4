//! Backward Loewner flow of the tracked point z_t = h_t(z0) − √κ·B_t.
//!
//! The point obeys dz = −2/z dt − √κ dB, i.e.
//!
//! ```text
//! dx = −2x/(x²+y²) dt − √κ dB
//! dy =  2y/(x²+y²) dt
//! ```
//!
//! and is integrated with explicit Euler–Maruyama. The imaginary part carries
//! no noise and has positive drift, so paths started in the upper half-plane
//! move away from the real axis.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::kappa::Kappa;
use crate::rng::Noise;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    /// Capacity time.
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl FlowState {
    pub fn start(x: f64, y: f64) -> Self {
        Self { t: 0.0, x, y }
    }

    /// z = i.
    pub fn at_i() -> Self {
        Self::start(0.0, 1.0)
    }
}

/// Drift (−2x/|z|², 2y/|z|²) of the real and imaginary parts.
#[inline]
pub fn drift(state: &FlowState) -> (f64, f64) {
    let r2 = state.x * state.x + state.y * state.y;
    (-2.0 * state.x / r2, 2.0 * state.y / r2)
}

/// One Euler–Maruyama step driven by the unscaled Brownian increment `db`.
pub fn step(state: &FlowState, db: f64, dt: f64, kappa: Kappa) -> Result<FlowState> {
    ensure_positive("dt", dt)?;
    ensure_finite("dB", db)?;
    if state.y.is_nan() || state.y <= 0.0 {
        return Err(invalid("state.y", "must be positive"));
    }
    Ok(euler(state, db, dt, kappa.sqrt()))
}

#[inline]
fn euler(state: &FlowState, db: f64, dt: f64, sqrt_kappa: f64) -> FlowState {
    let (bx, by) = drift(state);
    FlowState {
        t: state.t + dt,
        x: state.x + dt * bx - sqrt_kappa * db,
        y: state.y + dt * by,
    }
}

/// D = x/y, the cotangent of arg z.
#[inline]
pub fn cot_arg(state: &FlowState) -> f64 {
    state.x / state.y
}

/// arg z ∈ (0, π), equivalently arccot(D).
#[inline]
pub fn arg(state: &FlowState) -> f64 {
    state.y.atan2(state.x)
}

/// How the capacity-time axis is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeGrid {
    /// t_k = k·dt.
    Uniform { dt: f64 },
    /// dt_k = dt0·y_k², so each step advances the random clock by about dt0.
    ///
    /// The clock ũ grows only logarithmically in t, so reaching clock values of
    /// order ten on a uniform grid would take ~e^{20} steps.
    ClockAdapted { dt0: f64 },
}

impl TimeGrid {
    fn base_step(&self) -> f64 {
        match *self {
            TimeGrid::Uniform { dt } => dt,
            TimeGrid::ClockAdapted { dt0 } => dt0,
        }
    }
}

/// When to stop integrating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StopRule {
    /// Capacity time reaches (at least, on a uniform grid) this value.
    Horizon(f64),
    /// The random clock ũ reaches this value.
    Clock(f64),
}

pub const DEFAULT_MAX_STEPS: usize = 200_000_000;

/// Full description of one flow trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kappa: Kappa,
    pub start: FlowState,
    pub grid: TimeGrid,
    pub stop: StopRule,
    pub noise: Noise,
    pub max_steps: usize,
}

impl FlowSpec {
    /// A path from z0 = i.
    pub fn from_i(kappa: Kappa, grid: TimeGrid, stop: StopRule, noise: Noise) -> Self {
        Self {
            kappa,
            start: FlowState::at_i(),
            grid,
            stop,
            noise,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_start(mut self, x0: f64, y0: f64) -> Self {
        self.start = FlowState::start(x0, y0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("x0", self.start.x)?;
        ensure_positive("y0", self.start.y)?;
        let base = self.grid.base_step();
        ensure_positive("dt", base)?;
        match self.stop {
            StopRule::Horizon(h) => {
                ensure_positive("horizon", h)?;
                if let TimeGrid::Uniform { dt } = self.grid {
                    if h < dt {
                        return Err(invalid("horizon", "must be at least dt"));
                    }
                }
            }
            StopRule::Clock(u) => {
                ensure_finite("clock target", u)?;
                if u < 0.0 {
                    return Err(invalid("clock target", "must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Drives the integrator, handing every accepted step to `visit` as
    /// `(previous, next, clock at previous, clock at next, dB)`.
    ///
    /// The clock is the trapezoidal running integral of 1/y², the same rule
    /// [`crate::time_change::u_tilde`] applies to a stored path.
    pub fn integrate<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(&FlowState, &FlowState, f64, f64, f64),
    {
        self.validate()?;
        let sqrt_kappa = self.kappa.sqrt();
        let mut noise = self.noise.stream();
        let mut state = self.start;
        let mut clock = 0.0;

        let uniform_steps = match (self.grid, self.stop) {
            (TimeGrid::Uniform { dt }, StopRule::Horizon(h)) => {
                Some(((h / dt) * (1.0 - 1e-12)).ceil() as usize)
            }
            _ => None,
        };

        let mut k = 0usize;
        loop {
            let done = match (uniform_steps, self.stop) {
                (Some(n), _) => k >= n,
                (None, StopRule::Horizon(h)) => state.t >= h,
                (None, StopRule::Clock(u)) => clock >= u,
            };
            if done {
                return Ok(());
            }
            if k >= self.max_steps {
                return Err(Error::HorizonExceeded {
                    requested: match self.stop {
                        StopRule::Horizon(h) | StopRule::Clock(h) => h,
                    },
                    available: match self.stop {
                        StopRule::Horizon(_) => state.t,
                        StopRule::Clock(_) => clock,
                    },
                });
            }

            let (dt, land_on) = match (self.grid, self.stop) {
                (TimeGrid::Uniform { dt }, _) => (dt, Some((k + 1) as f64 * dt)),
                (TimeGrid::ClockAdapted { dt0 }, StopRule::Horizon(h)) => {
                    let dt = dt0 * state.y * state.y;
                    if state.t + dt >= h {
                        (h - state.t, Some(h))
                    } else {
                        (dt, None)
                    }
                }
                (TimeGrid::ClockAdapted { dt0 }, StopRule::Clock(_)) => {
                    (dt0 * state.y * state.y, None)
                }
            };
            let db = noise.increment(dt);
            let mut next = euler(&state, db, dt, sqrt_kappa);
            if let Some(t) = land_on {
                next.t = t;
            }
            let next_clock =
                clock + 0.5 * dt * (1.0 / (state.y * state.y) + 1.0 / (next.y * next.y));
            visit(&state, &next, clock, next_clock, db);
            state = next;
            clock = next_clock;
            k += 1;
        }
    }

    pub fn simulate(&self) -> Result<FlowPath> {
        let mut states = vec![self.start];
        let mut increments = Vec::new();
        self.integrate(|_, next, _, _, db| {
            states.push(*next);
            increments.push(db);
        })?;
        Ok(FlowPath {
            spec: *self,
            states,
            driver_increments: increments,
        })
    }

    /// Final state without storing the trajectory.
    pub fn terminal(&self) -> Result<FlowState> {
        let mut last = self.start;
        self.integrate(|_, next, _, _, _| last = *next)?;
        Ok(last)
    }

    /// State at the exact clock value `u` (linear interpolation inside the
    /// bracketing step), without storing the trajectory.
    pub fn state_at_clock(&self, u: f64) -> Result<FlowState> {
        let mut spec = *self;
        spec.stop = StopRule::Clock(u);
        if u == 0.0 {
            return Ok(self.start);
        }
        let mut bracket = None;
        spec.integrate(|prev, next, u0, u1, _| {
            if u1 >= u && bracket.is_none() {
                bracket = Some((*prev, *next, u0, u1));
            }
        })?;
        let (prev, next, u0, u1) = bracket.expect("clock target reached");
        Ok(interpolate(&prev, &next, (u - u0) / (u1 - u0)))
    }
}

pub(crate) fn interpolate(a: &FlowState, b: &FlowState, lambda: f64) -> FlowState {
    FlowState {
        t: a.t + lambda * (b.t - a.t),
        x: a.x + lambda * (b.x - a.x),
        y: a.y + lambda * (b.y - a.y),
    }
}

/// A stored trajectory of the flow with its driver.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPath {
    spec: FlowSpec,
    states: Vec<FlowState>,
    /// Unscaled Brownian increments; √κ is applied inside the step.
    driver_increments: Vec<f64>,
}

/// Metadata written next to an exported flow CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSidecar {
    pub kappa: f64,
    pub dt: f64,
    pub seed: Option<u64>,
    pub horizon: f64,
    pub grid: TimeGrid,
    pub x0: f64,
    pub y0: f64,
}

/// Uniform-grid path from i with driver stream 0 of `seed`.
pub fn simulate_flow(kappa: Kappa, horizon: f64, dt: f64, seed: u64) -> Result<FlowPath> {
    FlowSpec::from_i(
        kappa,
        TimeGrid::Uniform { dt },
        StopRule::Horizon(horizon),
        Noise::brownian(seed, 0),
    )
    .simulate()
}

impl FlowPath {
    /// Replays a given driver on a uniform grid, e.g. one Brownian sample
    /// under several values of κ.
    pub fn from_driver(
        kappa: Kappa,
        start: FlowState,
        dt: f64,
        increments: &[f64],
    ) -> Result<Self> {
        ensure_positive("dt", dt)?;
        ensure_positive("y0", start.y)?;
        let sqrt_kappa = kappa.sqrt();
        let mut states = Vec::with_capacity(increments.len() + 1);
        states.push(start);
        let mut state = start;
        for (k, &db) in increments.iter().enumerate() {
            ensure_finite("dB", db)?;
            state = euler(&state, db, dt, sqrt_kappa);
            state.t = (k + 1) as f64 * dt;
            states.push(state);
        }
        let horizon = state.t;
        Ok(Self {
            spec: FlowSpec {
                kappa,
                start,
                grid: TimeGrid::Uniform { dt },
                stop: StopRule::Horizon(horizon),
                noise: Noise::Silent,
                max_steps: increments.len(),
            },
            states,
            driver_increments: increments.to_vec(),
        })
    }

    /// Wraps externally produced states (t strictly increasing, y > 0).
    pub fn from_states(kappa: Kappa, states: Vec<FlowState>) -> Result<Self> {
        let first = *states
            .first()
            .ok_or_else(|| invalid("states", "must be nonempty"))?;
        if states
            .iter()
            .any(|s| s.y.is_nan() || s.y <= 0.0 || !s.x.is_finite() || !s.t.is_finite())
        {
            return Err(invalid("states", "need finite x, t and y > 0"));
        }
        if !states.windows(2).all(|w| w[1].t > w[0].t) {
            return Err(invalid("states", "t must be strictly increasing"));
        }
        let last = *states.last().unwrap();
        let dt = if states.len() > 1 {
            states[1].t - states[0].t
        } else {
            0.0
        };
        Ok(Self {
            spec: FlowSpec {
                kappa,
                start: first,
                grid: TimeGrid::Uniform { dt },
                stop: StopRule::Horizon(last.t),
                noise: Noise::Silent,
                max_steps: states.len() - 1,
            },
            driver_increments: Vec::new(),
            states,
        })
    }

    pub fn spec(&self) -> &FlowSpec {
        &self.spec
    }

    pub fn kappa(&self) -> Kappa {
        self.spec.kappa
    }

    pub fn states(&self) -> &[FlowState] {
        &self.states
    }

    pub fn driver_increments(&self) -> &[f64] {
        &self.driver_increments
    }

    pub fn seed(&self) -> Option<u64> {
        self.spec.noise.seed()
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("a path holds at least its start")
    }

    pub fn sidecar(&self) -> FlowSidecar {
        FlowSidecar {
            kappa: self.spec.kappa.value(),
            dt: self.spec.grid.base_step(),
            seed: self.seed(),
            horizon: self.last().t,
            grid: self.spec.grid,
            x0: self.spec.start.x,
            y0: self.spec.start.y,
        }
    }

    /// CSV with header `t,x,y`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y")?;
        for s in &self.states {
            writeln!(w, "{},{},{}", s.t, s.x, s.y)?;
        }
        Ok(())
    }
}
