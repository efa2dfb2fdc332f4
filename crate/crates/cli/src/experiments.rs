//! One function per experiment; each writes its tables and returns metrics.

use std::f64::consts::PI;

use loewner_lab::diffusion::DiffusionSpec;
use loewner_lab::ensemble::{
    cot_at_horizon, direct_terminal, embedded_angles, extracted_at_clock, run,
};
use loewner_lab::flow::{FlowSpec, StopRule, TimeGrid};
use loewner_lab::rng::{derive_seed, Noise};
use loewner_lab::special::{hyp2f1, Branch};
use loewner_lab::stationary::{
    first_solution, kfe_residual, normalization_closed_form, phase_scan, StationaryLaw,
};
use loewner_lab::stats::{histogram, ks_one_sample, ks_two_sample, Sample};
use loewner_lab::time_change::{schedule_a, u_tilde};
use loewner_lab::Kappa;
use serde_json::{json, Map, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::{line_plot, Cell, Outputs, Table};

pub type Metrics = Map<String, Value>;

/// Two-sample KS threshold of the equivalence and scaling experiments.
pub const TWO_SAMPLE_THRESHOLD: f64 = 0.05;

pub fn dispatch(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    match cfg.experiment {
        Experiment::Flow => flow(cfg, out),
        Experiment::Diffusion => diffusion(cfg, out),
        Experiment::StationaryCurves => {
            let law = StationaryLaw::new(cfg.kappa)?;
            emit_curves(&law, cfg.points, cfg.t_max, cfg.svg, out)
        }
        Experiment::Ergodic => ergodic(cfg, out),
        Experiment::Embed => embed(cfg, out),
        Experiment::Equivalence => equivalence(cfg, out),
        Experiment::PhaseScan => phase(cfg, out),
        Experiment::Scaling => scaling(cfg, out),
        Experiment::Conjecture => conjecture(cfg, out),
        Experiment::HypergeomEval => hypergeom(cfg, out),
    }
}

fn metrics(pairs: Vec<(&str, Value)>) -> Metrics {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `points` values spread evenly over [−t_max, t_max]; a single point is 0.
pub fn symmetric_grid(points: usize, t_max: f64) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|i| -t_max + 2.0 * t_max * i as f64 / (points - 1) as f64)
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn flow(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let spec = |path: u64| {
        let mut s = FlowSpec::from_i(
            cfg.kappa,
            TimeGrid::Uniform { dt: cfg.dt },
            StopRule::Horizon(cfg.horizon),
            Noise::brownian(cfg.seed, path),
        );
        s.max_steps = cfg.max_steps;
        s
    };
    // per path: terminal state, clock, and invariant violation counts
    let per_path = run(cfg.paths, |p| {
        let mut v = [0usize; 4];
        let mut excess: f64 = 0.0;
        let mut last = (spec(p).start, 0.0);
        spec(p).integrate(|prev, next, _, u, _| {
            let t = next.t;
            v[0] += (next.y <= prev.y) as usize;
            let e = next.y * next.y - (1.0 + 4.0 * t);
            if e > 0.0 {
                v[1] += 1;
                excess = excess.max(e);
            }
            v[2] += (u < 0.25 * (4.0 * t).ln_1p()) as usize;
            v[3] += (u > t) as usize;
            last = (*next, u);
        })?;
        Ok((last, v, excess))
    })?;

    let path0 = spec(0).simulate()?;
    let mut traj = Table::new(&["t", "x", "y"]);
    for s in path0.states() {
        traj.push(vec![s.t.into(), s.x.into(), s.y.into()]);
    }
    out.table("flow", &traj)?;
    let map = u_tilde(&path0);
    let mut clock = Table::new(&["t", "u"]);
    for (t, u) in map.t_grid().iter().zip(map.u_values()) {
        clock.push(vec![(*t).into(), (*u).into()]);
    }
    out.table("clock", &clock)?;
    let sidecar = serde_json::to_string_pretty(&path0.sidecar()).expect("serializable") + "\n";
    out.document("flow_sidecar.json", "flow_sidecar", &sidecar)?;

    let mut terminal = Table::new(&["path", "x", "y", "D", "u"]);
    for (p, ((s, u), _, _)) in per_path.iter().enumerate() {
        terminal.push(vec![
            p.into(),
            s.x.into(),
            s.y.into(),
            (s.x / s.y).into(),
            (*u).into(),
        ]);
    }
    out.table("terminal", &terminal)?;

    let total = |i: usize| per_path.iter().map(|r| r.1[i]).sum::<usize>();
    let us: Vec<f64> = per_path.iter().map(|r| r.0 .1).collect();
    Ok(metrics(vec![
        ("violations_y_monotone", total(0).into()),
        ("violations_y2_bound", total(1).into()),
        ("violations_u_lower", total(2).into()),
        ("violations_u_upper", total(3).into()),
        (
            "max_y2_excess",
            per_path.iter().map(|r| r.2).fold(0.0, f64::max).into(),
        ),
        (
            "u_lower_bound_at_horizon",
            (0.25 * (4.0 * cfg.horizon).ln_1p()).into(),
        ),
        ("u_terminal_mean", mean(&us).into()),
        (
            "u_terminal_min",
            us.iter().copied().fold(f64::INFINITY, f64::min).into(),
        ),
    ]))
}

fn diffusion(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let law = StationaryLaw::new(cfg.kappa)?;
    let values = direct_terminal(cfg.kappa, cfg.du, cfg.u_max, cfg.paths, cfg.seed)?;
    let path0 = DiffusionSpec::new(cfg.kappa, cfg.du, cfg.u_max, cfg.seed, 0).simulate()?;
    let mut traj = Table::new(&["u", "T"]);
    for (u, t) in path0.u.iter().zip(&path0.values) {
        traj.push(vec![(*u).into(), (*t).into()]);
    }
    out.table("diffusion_path", &traj)?;
    let mut term = Table::new(&["path", "T"]);
    for (p, t) in values.iter().enumerate() {
        term.push(vec![p.into(), (*t).into()]);
    }
    out.table("terminal", &term)?;
    let sample = Sample::new(values)?;
    let bars = histogram(&sample, -3.0, 3.0, 50)?;
    let mut hist = Table::new(&["center", "density"]);
    for (c, d) in &bars {
        hist.push(vec![(*c).into(), (*d).into()]);
    }
    out.table("histogram", &hist)?;
    Ok(metrics(vec![
        (
            "ks_stationary",
            ks_one_sample(&sample, |t| law.cdf(t)).into(),
        ),
        ("mean_T", sample.mean().into()),
        ("normalization_C", law.normalization().into()),
        (
            "max_histogram_deviation",
            bars.iter()
                .map(|&(c, d)| (d - law.pdf(c)).abs())
                .fold(0.0, f64::max)
                .into(),
        ),
    ]))
}

/// Writes `T,pdf,cdf` and `theta,argument_pdf` tables, plus SVG plots if asked.
pub fn emit_curves(
    law: &StationaryLaw,
    points: usize,
    t_max: f64,
    svg: bool,
    out: &mut Outputs,
) -> Result<Metrics> {
    let grid = symmetric_grid(points, t_max);
    let mut curve = Table::new(&["T", "pdf", "cdf"]);
    for &t in &grid {
        curve.push(vec![t.into(), law.pdf(t).into(), law.cdf(t).into()]);
    }
    out.table("stationary_curve", &curve)?;
    let thetas: Vec<f64> = (0..points)
        .map(|i| PI * (i as f64 + 0.5) / points as f64)
        .collect();
    let mut arg = Table::new(&["theta", "argument_pdf"]);
    for &th in &thetas {
        arg.push(vec![th.into(), law.argument_pdf(th).into()]);
    }
    out.table("argument_curve", &arg)?;
    let k = law.kappa();
    if svg {
        let title = format!("stationary density of T, kappa = {k}");
        out.document(
            "stationary_curve.svg",
            "svg",
            &line_plot(
                &title,
                "T",
                "density",
                &[("pdf", curve.series(0, 1)), ("cdf", curve.series(0, 2))],
            ),
        )?;
        let title = format!("density of the argument, kappa = {k}");
        out.document(
            "argument_curve.svg",
            "svg",
            &line_plot(&title, "theta", "density", &[("pdf", arg.series(0, 1))]),
        )?;
    }
    let centre = if k.value() < 4.0 {
        "mode"
    } else if k.value() > 4.0 {
        "antimode"
    } else {
        "flat"
    };
    Ok(metrics(vec![
        ("normalization_C", law.normalization().into()),
        (
            "normalization_C_closed_form",
            normalization_closed_form(k)?.into(),
        ),
        ("C_inverse", (1.0 / law.normalization()).into()),
        ("exponent", law.exponent().into()),
        ("pdf_at_0", law.pdf(0.0).into()),
        ("argument_at_half_pi", centre.into()),
    ]))
}

fn ergodic(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let law = StationaryLaw::new(cfg.kappa)?;
    let spec = DiffusionSpec::new(cfg.kappa, cfg.du, cfg.u_max, cfg.seed, 0);
    let n = spec.steps();
    let every = (n / 1000).max(1);
    let f = |t: f64| (t.abs() <= 1.0) as u8 as f64;
    let mut table = Table::new(&["u", "average"]);
    let (mut sum, mut prev) = (0.0, 0.0);
    spec.integrate(|k, t| {
        if k > 0 {
            sum += 0.5 * (prev + f(t));
            if k % every == 0 || k == n {
                let u = k as f64 * cfg.du;
                table.push(vec![u.into(), (sum / k as f64).into()]);
            }
        }
        prev = f(t);
    })?;
    out.table("ergodic", &table)?;
    let z = sum / n as f64;
    let target = law.cdf(1.0) - law.cdf(-1.0);
    Ok(metrics(vec![
        ("observable", "1{|T|<=1}".into()),
        ("ergodic_average", z.into()),
        ("stationary_target", target.into()),
        ("abs_error", (z - target).abs().into()),
    ]))
}

fn embed(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let law = StationaryLaw::new(cfg.kappa)?;
    let a = schedule_a(cfg.kappa, cfg.n_index);
    let theta = embedded_angles(cfg.kappa, cfg.n_index, cfg.dt, cfg.paths, cfg.seed)?;
    let mut table = Table::new(&["path", "theta", "D"]);
    for (p, th) in theta.iter().enumerate() {
        table.push(vec![p.into(), (*th).into(), (1.0 / th.tan()).into()]);
    }
    out.table("angles", &table)?;
    let sample = Sample::new(theta)?;
    Ok(metrics(vec![
        ("a_n", a.into()),
        (
            "ks_argument_law",
            ks_one_sample(&sample, |th| law.argument_cdf(th)).into(),
        ),
        (
            "ks_uniform",
            ks_one_sample(&sample, |th| (th / PI).clamp(0.0, 1.0)).into(),
        ),
    ]))
}

fn equivalence(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let extracted = extracted_at_clock(
        cfg.kappa,
        cfg.dt,
        cfg.u_max,
        cfg.paths,
        derive_seed(cfg.seed, 1),
    )?;
    let direct = direct_terminal(
        cfg.kappa,
        cfg.du,
        cfg.u_max,
        cfg.paths,
        derive_seed(cfg.seed, 2),
    )?;
    let mut table = Table::new(&["path", "extracted", "direct"]);
    for (p, (e, d)) in extracted.iter().zip(&direct).enumerate() {
        table.push(vec![p.into(), (*e).into(), (*d).into()]);
    }
    out.table("samples", &table)?;
    let d = ks_two_sample(&Sample::new(extracted)?, &Sample::new(direct)?);
    Ok(metrics(vec![
        ("ks_two_sample", d.into()),
        ("threshold", TWO_SAMPLE_THRESHOLD.into()),
        ("within_threshold", (d <= TWO_SAMPLE_THRESHOLD).into()),
    ]))
}

fn phase(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let rows = phase_scan(&cfg.kappa_grid)?;
    let mut table = Table::new(&["kappa", "exponent", "normalizable", "C_inverse"]);
    for r in &rows {
        table.push(vec![
            r.kappa.into(),
            r.exponent.into(),
            r.normalizable.into(),
            r.c_inverse.unwrap_or(f64::INFINITY).into(),
        ]);
    }
    out.table("phase_scan", &table)?;
    let finite: Vec<f64> = rows.iter().filter_map(|r| r.c_inverse).collect();
    let flagged: Vec<Value> = rows
        .iter()
        .filter(|r| !r.normalizable)
        .map(|r| r.kappa.into())
        .collect();
    Ok(metrics(vec![
        ("non_normalizable_kappas", Value::Array(flagged)),
        ("normalizable_count", finite.len().into()),
    ]))
}

fn scaling(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    // z_S(i)/2 has the law of z_{S/4}(i/2); x/y is unchanged by the halving
    let big = cot_at_horizon(
        cfg.kappa,
        (0.0, 1.0),
        cfg.horizon,
        TimeGrid::Uniform { dt: cfg.dt },
        cfg.paths,
        derive_seed(cfg.seed, 1),
    )?;
    let small = cot_at_horizon(
        cfg.kappa,
        (0.0, 0.5),
        cfg.horizon / 4.0,
        TimeGrid::Uniform { dt: cfg.dt / 4.0 },
        cfg.paths,
        derive_seed(cfg.seed, 2),
    )?;
    let mut table = Table::new(&["path", "D_from_i", "D_from_half_i"]);
    for (p, (a, b)) in big.iter().zip(&small).enumerate() {
        table.push(vec![p.into(), (*a).into(), (*b).into()]);
    }
    out.table("scaling", &table)?;
    let d = ks_two_sample(&Sample::new(big)?, &Sample::new(small)?);
    Ok(metrics(vec![
        ("ks_two_sample", d.into()),
        ("threshold", TWO_SAMPLE_THRESHOLD.into()),
        ("within_threshold", (d <= TWO_SAMPLE_THRESHOLD).into()),
    ]))
}

fn conjecture(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let law = StationaryLaw::new(cfg.kappa)?;
    let sk = cfg.kappa.sqrt();
    let mut samples = Table::new(&["S", "path", "T"]);
    let mut summary = Table::new(&["S", "ks"]);
    let mut ks = Vec::new();
    for (j, &s) in cfg.horizons.iter().enumerate() {
        let d = cot_at_horizon(
            cfg.kappa,
            (0.0, 1.0),
            s,
            TimeGrid::ClockAdapted { dt0: cfg.dt },
            cfg.paths,
            derive_seed(cfg.seed, j as u64),
        )?;
        let t: Vec<f64> = d.iter().map(|v| v / sk).collect();
        for (p, v) in t.iter().enumerate() {
            samples.push(vec![s.into(), p.into(), (*v).into()]);
        }
        let dist = ks_one_sample(&Sample::new(t)?, |x| law.cdf(x));
        summary.push(vec![s.into(), dist.into()]);
        ks.push(dist);
    }
    out.table("conjecture_samples", &samples)?;
    out.table("conjecture_ks", &summary)?;
    Ok(metrics(vec![
        ("ks_by_horizon", json!(ks)),
        ("nonincreasing", ks.windows(2).all(|w| w[1] <= w[0]).into()),
    ]))
}

fn hypergeom(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Metrics> {
    let k: Kappa = cfg.kappa;
    let m = k.exponent();
    let mut table = Table::new(&[
        "T",
        "x",
        "branch",
        "hyp2f1",
        "first_solution",
        "kfe_residual",
    ]);
    let mut counts = Map::new();
    let mut worst: f64 = 0.0;
    for t in symmetric_grid(cfg.points, cfg.t_max) {
        let x = -k.value() * t * t;
        let e = hyp2f1(0.5, -m, 1.5, x)?;
        let g = first_solution(t, k)?;
        let r = kfe_residual(k, t, 1.0, 0.0)?;
        worst = worst.max(r.abs() / g.abs().max(1.0));
        let n = counts.entry(e.branch.name()).or_insert(Value::from(0u64));
        *n = (n.as_u64().unwrap_or(0) + 1).into();
        table.push(vec![
            t.into(),
            x.into(),
            Cell::Text(e.branch.name().into()),
            e.value.into(),
            g.into(),
            r.into(),
        ]);
    }
    out.table("hypergeom", &table)?;
    let logarithmic = loewner_lab::special::select_branch(0.5, -m, 1.5, -2.0)
        .map(|b| b == Branch::Logarithmic)?;
    Ok(metrics(vec![
        ("branch_counts", Value::Object(counts)),
        ("max_relative_residual", worst.into()),
        ("integer_parameter_difference", logarithmic.into()),
    ]))
}
