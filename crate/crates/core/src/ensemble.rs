//! Parallel Monte Carlo ensembles.
//!
//! Path `k` always draws from stream `k` of the master seed, and results are
//! returned in path order, so output does not depend on the thread count.

use rayon::prelude::*;

use crate::diffusion::DiffusionSpec;
use crate::error::{invalid, Result};
use crate::flow::{arg, cot_arg, FlowSpec, FlowState, StopRule, TimeGrid};
use crate::kappa::Kappa;
use crate::rng::Noise;
use crate::time_change::schedule_a;

/// Runs `f` for paths `0..paths` in parallel and collects in index order.
pub fn run<T, F>(paths: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if paths == 0 {
        return Err(invalid("paths", "must be at least 1"));
    }
    (0..paths as u64).into_par_iter().map(&f).collect()
}

/// T at clock `u_max` from the direct SDE, started at 0.
pub fn direct_terminal(
    kappa: Kappa,
    du: f64,
    u_max: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    DiffusionSpec::new(kappa, du, u_max, seed, 0).validate()?;
    run(paths, |k| {
        DiffusionSpec::new(kappa, du, u_max, seed, k).terminal()
    })
}

/// Flow state from i at the clock value `u`, on a clock-adapted grid.
fn flow_at_clock(kappa: Kappa, dt0: f64, u: f64, seed: u64, path: u64) -> Result<FlowState> {
    FlowSpec::from_i(
        kappa,
        TimeGrid::ClockAdapted { dt0 },
        StopRule::Clock(u),
        Noise::brownian(seed, path),
    )
    .state_at_clock(u)
}

/// D_{c(u)}/√κ read off flow paths from i.
pub fn extracted_at_clock(
    kappa: Kappa,
    dt0: f64,
    u: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sk = kappa.sqrt();
    run(paths, |k| {
        Ok(cot_arg(&flow_at_clock(kappa, dt0, u, seed, k)?) / sk)
    })
}

/// arg z at the hitting time of ũ = a_n.
pub fn embedded_angles(
    kappa: Kappa,
    n_index: u64,
    dt0: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let a = schedule_a(kappa, n_index);
    run(paths, |k| Ok(arg(&flow_at_clock(kappa, dt0, a, seed, k)?)))
}

/// D = x/y at capacity time `horizon` from the start z0 = x0 + i·y0.
pub fn cot_at_horizon(
    kappa: Kappa,
    start: (f64, f64),
    horizon: f64,
    grid: TimeGrid,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    run(paths, |k| {
        let spec = FlowSpec::from_i(
            kappa,
            grid,
            StopRule::Horizon(horizon),
            Noise::brownian(seed, k),
        )
        .with_start(start.0, start.1);
        Ok(cot_arg(&spec.terminal()?))
    })
}
