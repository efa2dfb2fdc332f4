use std::process::ExitCode;

use clap::{Parser, Subcommand};
use loewner_cli::{run, Experiment, ExperimentConfig, Overrides};

/// Seed-deterministic experiments on the time-changed backward Loewner flow.
///
/// Each run writes its data tables and a `report.json` into the output
/// directory and prints the report. Exit status: 0 success, 2 invalid
/// configuration, 3 stationary law not normalizable (κ ≥ 8), 4 step or clock
/// horizon exceeded, 1 any other failure.
#[derive(Debug, Parser)]
#[command(name = "loewner-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flow paths from i: trajectory, clock, and invariant counts.
    Flow(Overrides),
    /// Direct simulation of T to u_max, compared with the stationary law.
    Diffusion(Overrides),
    /// Stationary density, cdf and argument density on a grid.
    StationaryCurves(Overrides),
    /// Time average of 1{|T| ≤ 1} along one long path.
    Ergodic(Overrides),
    /// Angles arg z at the embedding time a_n.
    Embed(Overrides),
    /// T read off flow paths versus the direct diffusion at u_max.
    Equivalence(Overrides),
    /// Normalizability and C⁻¹ across a κ grid.
    PhaseScan(Overrides),
    /// Brownian scaling z_S(i)/2 versus z_{S/4}(i/2).
    Scaling(Overrides),
    /// Law of ctg(arg z_S)/√κ at large S, report only.
    Conjecture(Overrides),
    /// ₂F₁(1/2, −4/κ; 3/2; −κT²), its branch, and the odd solution.
    HypergeomEval(Overrides),
}

impl Command {
    fn split(self) -> (Experiment, Overrides) {
        use Command as C;
        match self {
            C::Flow(o) => (Experiment::Flow, o),
            C::Diffusion(o) => (Experiment::Diffusion, o),
            C::StationaryCurves(o) => (Experiment::StationaryCurves, o),
            C::Ergodic(o) => (Experiment::Ergodic, o),
            C::Embed(o) => (Experiment::Embed, o),
            C::Equivalence(o) => (Experiment::Equivalence, o),
            C::PhaseScan(o) => (Experiment::PhaseScan, o),
            C::Scaling(o) => (Experiment::Scaling, o),
            C::Conjecture(o) => (Experiment::Conjecture, o),
            C::HypergeomEval(o) => (Experiment::HypergeomEval, o),
        }
    }
}

fn main() -> ExitCode {
    let (experiment, flags) = Cli::parse().command.split();
    let outcome = ExperimentConfig::resolve(experiment, flags).and_then(|cfg| run(&cfg));
    match outcome {
        Ok((report, _)) => {
            print!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error ({}): {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
