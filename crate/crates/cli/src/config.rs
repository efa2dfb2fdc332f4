//! Experiment configuration: built-in defaults, an optional TOML file, and
//! command-line flags, in increasing precedence.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use loewner_lab::flow::DEFAULT_MAX_STEPS;
use loewner_lab::Kappa;
use serde::{Serialize, Serializer};

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LOEWNER_LAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "loewner-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Flow,
    Diffusion,
    StationaryCurves,
    Ergodic,
    Embed,
    Equivalence,
    PhaseScan,
    Scaling,
    Conjecture,
    HypergeomEval,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Flow => "flow",
            Experiment::Diffusion => "diffusion",
            Experiment::StationaryCurves => "stationary-curves",
            Experiment::Ergodic => "ergodic",
            Experiment::Embed => "embed",
            Experiment::Equivalence => "equivalence",
            Experiment::PhaseScan => "phase-scan",
            Experiment::Scaling => "scaling",
            Experiment::Conjecture => "conjecture",
            Experiment::HypergeomEval => "hypergeom-eval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn parse_kappa(s: &str) -> std::result::Result<Kappa, String> {
    Kappa::from_str(s.trim()).map_err(|e| e.to_string())
}

/// Settings given on the command line or in a config file; unset fields
/// fall through to the next source.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// SLE parameter κ, as a decimal or a ratio such as 8/3.
    #[arg(long, value_parser = parse_kappa)]
    pub kappa: Option<Kappa>,
    /// Number of independent paths.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Flow step in capacity time (the initial step on clock-adapted grids).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Step of the direct diffusion in clock time u.
    #[arg(long)]
    pub du: Option<f64>,
    /// Capacity-time horizon S of the flow.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Terminal clock value u of the diffusion.
    #[arg(long)]
    pub u_max: Option<f64>,
    /// Index n of the embedding time a_n = ln(1 + 4n/κ).
    #[arg(long)]
    pub n_index: Option<u64>,
    /// Master seed; path k uses stream k.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: $LOEWNER_LAB_OUT or ./loewner-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of the data tables; the report is always JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Grid size for curve and hypergeometric tables.
    #[arg(long)]
    pub points: Option<usize>,
    /// Curve grids span [−t_max, t_max].
    #[arg(long)]
    pub t_max: Option<f64>,
    /// κ values for phase-scan, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_kappa)]
    pub kappa_grid: Option<Vec<Kappa>>,
    /// Horizons S for conjecture, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Step cap per flow path.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Also write SVG plots of the curves.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
    /// TOML file of `key = value` settings (snake_case keys); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(format!("`{key}` must be a number"))),
    }
}

fn as_u64(key: &str, v: &toml::Value) -> Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(bad(format!("`{key}` must be a nonnegative integer"))),
    }
}

fn as_kappa(key: &str, v: &toml::Value) -> Result<Kappa> {
    match v {
        toml::Value::String(s) => parse_kappa(s).map_err(|e| bad(format!("`{key}`: {e}"))),
        other => Kappa::new(as_f64(key, other)?).map_err(|e| bad(format!("`{key}`: {e}"))),
    }
}

fn as_array<'a>(key: &str, v: &'a toml::Value) -> Result<&'a Vec<toml::Value>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{key}` must be an array")))
}

impl Overrides {
    /// Parses a TOML settings file.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| bad(format!("config file: {e}")))?;
        let mut o = Overrides::default();
        for (key, v) in &table {
            let k = key.as_str();
            match k {
                "kappa" => o.kappa = Some(as_kappa(k, v)?),
                "paths" => o.paths = Some(as_u64(k, v)? as usize),
                "dt" => o.dt = Some(as_f64(k, v)?),
                "du" => o.du = Some(as_f64(k, v)?),
                "horizon" => o.horizon = Some(as_f64(k, v)?),
                "u_max" => o.u_max = Some(as_f64(k, v)?),
                "n_index" => o.n_index = Some(as_u64(k, v)?),
                "seed" => o.seed = Some(as_u64(k, v)?),
                "out" => {
                    o.out = Some(PathBuf::from(
                        v.as_str().ok_or_else(|| bad("`out` must be a string"))?,
                    ))
                }
                "format" => {
                    let s = v.as_str().ok_or_else(|| bad("`format` must be a string"))?;
                    o.format = Some(
                        Format::from_str(s, true)
                            .map_err(|_| bad(format!("unknown format `{s}`")))?,
                    );
                }
                "points" => o.points = Some(as_u64(k, v)? as usize),
                "t_max" => o.t_max = Some(as_f64(k, v)?),
                "kappa_grid" => {
                    o.kappa_grid = Some(
                        as_array(k, v)?
                            .iter()
                            .map(|x| as_kappa(k, x))
                            .collect::<Result<_>>()?,
                    )
                }
                "horizons" => {
                    o.horizons = Some(
                        as_array(k, v)?
                            .iter()
                            .map(|x| as_f64(k, x))
                            .collect::<Result<_>>()?,
                    )
                }
                "max_steps" => o.max_steps = Some(as_u64(k, v)? as usize),
                "svg" => o.svg = Some(v.as_bool().ok_or_else(|| bad("`svg` must be a boolean"))?),
                _ => return Err(bad(format!("unknown config key `{key}`"))),
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` wins over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            kappa: self.kappa.or(base.kappa),
            paths: self.paths.or(base.paths),
            dt: self.dt.or(base.dt),
            du: self.du.or(base.du),
            horizon: self.horizon.or(base.horizon),
            u_max: self.u_max.or(base.u_max),
            n_index: self.n_index.or(base.n_index),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            points: self.points.or(base.points),
            t_max: self.t_max.or(base.t_max),
            kappa_grid: self.kappa_grid.or(base.kappa_grid),
            horizons: self.horizons.or(base.horizons),
            max_steps: self.max_steps.or(base.max_steps),
            svg: self.svg.or(base.svg),
            config: self.config.or(base.config),
        }
    }
}

fn kappa_text<S: Serializer>(k: &Kappa, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&k.to_string())
}

fn kappas_text<S: Serializer>(ks: &[Kappa], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ks.iter().map(|k| k.to_string()))
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(serialize_with = "kappa_text")]
    pub kappa: Kappa,
    pub paths: usize,
    pub dt: f64,
    pub du: f64,
    pub horizon: f64,
    pub u_max: f64,
    pub n_index: u64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: Format,
    pub points: usize,
    pub t_max: f64,
    #[serde(serialize_with = "kappas_text")]
    pub kappa_grid: Vec<Kappa>,
    pub horizons: Vec<f64>,
    pub max_steps: usize,
    pub svg: bool,
}

/// Per-experiment defaults.
///
/// | experiment        | paths | dt   | du   | horizon | u_max | other                    |
/// |-------------------|-------|------|------|---------|-------|--------------------------|
/// | flow              | 100   | 1e-3 |      | 10      |       |                          |
/// | diffusion         | 1000  |      | 1e-3 |         | 20    |                          |
/// | stationary-curves |       |      |      |         |       | points 201, t_max 5      |
/// | ergodic           |       |      | 1e-3 |         | 1e4   |                          |
/// | embed             | 10000 | 1e-4 |      |         |       | n_index 50               |
/// | equivalence       | 2000  | 1e-4 | 1e-3 |         | 10    |                          |
/// | phase-scan        |       |      |      |         |       | kappa_grid 1,…,10        |
/// | scaling           | 5000  | 1e-3 |      | 4       |       |                          |
/// | conjecture        | 2000  | 1e-3 |      |         |       | horizons 10, 100, 1000   |
/// | hypergeom-eval    |       |      |      |         |       | points 201, t_max 10     |
///
/// Every experiment defaults to κ = 4, seed 1 and CSV tables.
pub fn defaults(experiment: Experiment) -> ExperimentConfig {
    use Experiment as E;
    let mut c = ExperimentConfig {
        experiment,
        kappa: Kappa::new(4.0).expect("positive"),
        paths: 1000,
        dt: 1e-3,
        du: 1e-3,
        horizon: 10.0,
        u_max: 20.0,
        n_index: 50,
        seed: 1,
        output_dir: std::env::var_os(OUT_DIR_ENV)
            .map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from),
        format: Format::Csv,
        points: 201,
        t_max: 5.0,
        kappa_grid: (1..=10)
            .map(|v| Kappa::new(v as f64).expect("positive"))
            .collect(),
        horizons: vec![10.0, 100.0, 1000.0],
        max_steps: DEFAULT_MAX_STEPS,
        svg: false,
    };
    match experiment {
        E::Flow => c.paths = 100,
        E::Ergodic => c.u_max = 1e4,
        E::Embed => {
            c.paths = 10_000;
            c.dt = 1e-4;
        }
        E::Equivalence => {
            c.paths = 2000;
            c.dt = 1e-4;
            c.u_max = 10.0;
        }
        E::Scaling => {
            c.paths = 5000;
            c.horizon = 4.0;
        }
        E::Conjecture => c.paths = 2000,
        E::HypergeomEval => c.t_max = 10.0,
        E::Diffusion | E::StationaryCurves | E::PhaseScan => {}
    }
    c
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(format!(
            "`{name}` must be a positive finite number, got {v}"
        )))
    }
}

impl ExperimentConfig {
    /// Defaults, then the config file named in `flags` (if any), then `flags`.
    pub fn resolve(experiment: Experiment, flags: Overrides) -> Result<Self> {
        let merged = match &flags.config {
            Some(path) => {
                let file = Overrides::from_file(path)?;
                flags.over(file)
            }
            None => flags,
        };
        let mut c = defaults(experiment);
        let o = merged;
        if let Some(v) = o.kappa {
            c.kappa = v;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = o.$f { c.$f = v; })* };
        }
        set!(
            paths, dt, du, horizon, u_max, n_index, seed, format, points, t_max, kappa_grid,
            horizons, max_steps, svg
        );
        if let Some(v) = o.out {
            c.output_dir = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(bad("`paths` must be at least 1"));
        }
        positive("dt", self.dt)?;
        positive("du", self.du)?;
        positive("horizon", self.horizon)?;
        positive("u_max", self.u_max)?;
        positive("t_max", self.t_max)?;
        if self.n_index == 0 {
            return Err(bad("`n_index` must be at least 1"));
        }
        if self.points == 0 {
            return Err(bad("`points` must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(bad("`max_steps` must be at least 1"));
        }
        if self.kappa_grid.is_empty() {
            return Err(bad("`kappa_grid` must be nonempty"));
        }
        if self.horizons.is_empty() {
            return Err(bad("`horizons` must be nonempty"));
        }
        for &h in &self.horizons {
            positive("horizons", h)?;
        }
        match self.experiment {
            Experiment::Flow | Experiment::Scaling if self.horizon < self.dt => {
                Err(bad("`horizon` must be at least `dt`"))
            }
            Experiment::Diffusion | Experiment::Equivalence | Experiment::Ergodic
                if self.u_max < self.du =>
            {
                Err(bad("`u_max` must be at least `du`"))
            }
            _ => Ok(()),
        }
    }
}
