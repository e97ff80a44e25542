//! `glider`: one front end for the four laboratory workflows.
//!
//! * `simulate` — fly one scenario (closed- or open-loop) and record the
//!   trajectory.
//! * `estimate` — identify the twelve hydrodynamic coefficients from logged
//!   or synthetic runs with an ensemble of Metropolis-Hastings chains.
//! * `compare` — score the nonlinear law against the PID baseline over a
//!   grid of pitch and depth steps under a shared disturbance.
//! * `maneuver` — fly banked yo-yo patterns (circle, S, or one chained into
//!   the other) under the hybrid NLC/PID supervisor.
//!
//! Every command reads one TOML scenario (built-in defaults when `--config`
//! is omitted), resolves the seed (flag beats file), writes its artifacts
//! into `--out`, and re-loads everything it wrote before declaring success.
//! Outputs are a pure function of (config, seed): rerunning a command
//! reproduces its files byte for byte.

mod artifacts;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use glider_core::config::{default_vehicle, VehicleFile};
use glider_core::scenarios::{
    run_compare, run_estimation, run_maneuver, run_simulate, ChannelReport, CompareScenario,
    EstimateScenario, ManeuverScenario, SimulateScenario,
};
use glider_core::sysid::CoefficientSummary;
use glider_core::vehicle::{ActuatorRanges, VehicleParams};
use glider_core::{GliderError, Result};

use artifacts::{
    control_log, fmt_f64, sha256_json, write_chain, write_report, write_table, write_trajectory,
    Format, RunReportFile,
};

#[derive(Parser)]
#[command(
    name = "glider",
    version,
    about = "Desk-scale underwater glider lab: simulate, identify, control",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Scenario file (TOML); the command's built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides the scenario file's `seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Run-report format; data tables are always CSV.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Suppress status lines on stdout (errors still go to stderr).
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fly one scenario and write the trajectory plus a run report.
    Simulate,
    /// Estimate the hydrodynamic coefficients; writes chains and a posterior table.
    Estimate,
    /// Grid comparison of the nonlinear law against the PID baseline.
    Compare,
    /// Fly a banked glide pattern under the hybrid supervisor.
    Maneuver {
        /// Flight pattern; overrides `kind` from the scenario file.
        #[arg(value_enum)]
        pattern: Pattern,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pattern {
    #[value(name = "circle")]
    Circle,
    #[value(name = "s_curve")]
    SCurve,
    #[value(name = "circle_to_s")]
    CircleToS,
}

impl Pattern {
    fn kind(self) -> &'static str {
        match self {
            Pattern::Circle => "circle",
            Pattern::SCurve => "s_curve",
            Pattern::CircleToS => "circle_to_s",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version exit 0; anything else is a validation failure
            // and follows the documented exit-code map, not clap's own 2.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_default_env().format_timestamp(None).init();

    let started = Instant::now();
    match run(&cli) {
        Ok(lines) => {
            if !cli.quiet {
                for line in lines {
                    println!("{line}");
                }
                println!("done in {:.2} s", started.elapsed().as_secs_f64());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>> {
    std::fs::create_dir_all(&cli.out).map_err(|e| GliderError::io(&cli.out, e))?;
    match &cli.command {
        Cmd::Simulate => cmd_simulate(cli),
        Cmd::Estimate => cmd_estimate(cli),
        Cmd::Compare => cmd_compare(cli),
        Cmd::Maneuver { pattern } => cmd_maneuver(cli, *pattern),
    }
}

/// The directory scenario-relative paths resolve against: where the scenario
/// file lives, or the working directory for built-in defaults.
fn config_dir(cli: &Cli) -> Option<PathBuf> {
    cli.config.as_ref().and_then(|p| p.parent()).map(Path::to_path_buf)
}

fn resolve(dir: Option<&Path>, path: &Path) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}

/// Loads the vehicle named by the scenario (or the stock one) and returns
/// its parameters plus the digest reports embed.
fn load_vehicle(
    vehicle: Option<&Path>,
    dir: Option<&Path>,
) -> Result<(VehicleParams, ActuatorRanges, String)> {
    let file = match vehicle {
        None => default_vehicle(),
        Some(path) => VehicleFile::load(&resolve(dir, path))?,
    };
    let sha = sha256_json(&file)?;
    let (params, ranges) = file.into_params()?;
    Ok((params, ranges, sha))
}

fn cmd_simulate(cli: &Cli) -> Result<Vec<String>> {
    let sc = match &cli.config {
        Some(p) => SimulateScenario::load(p)?,
        None => SimulateScenario::default(),
    };
    let config_sha256 = sha256_json(&sc)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let (params, ranges, vehicle_sha256) =
        load_vehicle(sc.vehicle.as_deref(), config_dir(cli).as_deref())?;

    let (output, report) = run_simulate(&sc, &params, &ranges, seed)?;

    let traj_path = cli.out.join("trajectory.csv");
    write_trajectory(&traj_path, &output.trajectory, ranges.ballast_travel_gain)?;

    let envelope = RunReportFile {
        command: "simulate",
        seed,
        config_sha256,
        vehicle_sha256,
        outputs: vec!["trajectory.csv".into(), cli.format.report_name().into()],
        control_log: control_log(&output, sc.controller.pitch.epsilon, sc.controller.depth.epsilon),
        report: &report,
    };
    let report_path = write_report(&cli.out, cli.format, &envelope)?;

    let mut lines = vec![format!(
        "simulate: strategy {}, {:.1} s, {} samples, {} mode switches, {} clamped commands",
        report.strategy,
        report.duration,
        report.samples,
        report.mode_switches,
        report.clamped_commands.total(),
    )];
    for (name, ch) in
        [("pitch", &report.pitch), ("depth", &report.depth), ("roll", &report.roll)]
    {
        if let Some(ch) = ch {
            lines.push(channel_line(name, ch));
        }
    }
    lines.push(format!("wrote {} and {}", traj_path.display(), report_path.display()));
    Ok(lines)
}

fn channel_line(name: &str, ch: &ChannelReport) -> String {
    format!(
        "  {name}: target {:.4}, tail rms {:.3e}, {:.2}% of target",
        ch.target, ch.metrics.rms_error, ch.metrics.percent_error_of_target
    )
}

/// Per-chain sampler accounting for the run report.
#[derive(Serialize)]
struct ChainMeta {
    seed: u64,
    samples: usize,
    accepted: usize,
    proposed: usize,
    acceptance_rate: f64,
    final_scale: f64,
}

/// Posterior-vs-truth distance, reported for synthetic sources where the
/// generating coefficients are known.
#[derive(Serialize)]
struct RecoveryRow {
    name: &'static str,
    truth: f64,
    error: f64,
    /// |error| in posterior standard deviations; absent for a degenerate
    /// (zero-width) posterior.
    #[serde(skip_serializing_if = "Option::is_none")]
    sigmas: Option<f64>,
}

#[derive(Serialize)]
struct EstimateReport {
    n_runs: usize,
    n_observations: usize,
    dropped_gimbal: usize,
    sigma_noise: f64,
    n_chains: usize,
    n_samples: usize,
    acceptance_rate: f64,
    coefficients: Vec<CoefficientSummary>,
    /// Unconstrained least-squares solution the chains start from (after
    /// projection into the prior box).
    ls_solution: Vec<f64>,
    chains: Vec<ChainMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovery: Option<Vec<RecoveryRow>>,
    /// Worst coefficient distance from truth, in posterior standard
    /// deviations.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_recovery_sigmas: Option<f64>,
}

fn cmd_estimate(cli: &Cli) -> Result<Vec<String>> {
    let mut sc = match &cli.config {
        Some(p) => EstimateScenario::load(p)?,
        None => EstimateScenario::default(),
    };
    let config_sha256 = sha256_json(&sc)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let dir = config_dir(cli);
    let (params, ranges, vehicle_sha256) = load_vehicle(sc.vehicle.as_deref(), dir.as_deref())?;
    for run in &mut sc.source.runs {
        run.mocap = resolve(dir.as_deref(), &run.mocap);
        run.actuators = resolve(dir.as_deref(), &run.actuators);
    }

    let runs = sc.assemble_runs(&params, &ranges)?;
    let outcome = run_estimation(&runs, &params, &ranges, &sc.prior.to_box(), &sc.mcmc, seed)?;

    let chains_dir = cli.out.join("chains");
    std::fs::create_dir_all(&chains_dir).map_err(|e| GliderError::io(&chains_dir, e))?;
    let mut outputs = Vec::new();
    for (i, chain) in outcome.chains.iter().enumerate() {
        let name = format!("chains/chain_{i:02}.csv");
        write_chain(&cli.out.join(&name), chain)?;
        outputs.push(name);
    }

    let posterior_rows: Vec<Vec<String>> = outcome
        .summary
        .coefficients
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                fmt_f64(c.mean),
                fmt_f64(c.std),
                fmt_f64(c.q05),
                fmt_f64(c.q50),
                fmt_f64(c.q95),
            ]
        })
        .collect();
    write_table(
        &cli.out.join("posterior.csv"),
        "name,mean,std,q05,q50,q95",
        &posterior_rows,
        &[1, 2, 3, 4, 5],
    )?;
    outputs.push("posterior.csv".into());
    outputs.push(cli.format.report_name().into());

    // Synthetic sources come from a known vehicle, so the posterior can be
    // scored against the generating coefficients.
    let recovery: Option<Vec<RecoveryRow>> = (sc.source.kind == "synthetic").then(|| {
        let truth = params.hydro.to_array();
        outcome
            .summary
            .coefficients
            .iter()
            .zip(truth)
            .map(|(c, tru)| RecoveryRow {
                name: c.name,
                truth: tru,
                error: c.mean - tru,
                sigmas: (c.std > 0.0).then(|| (c.mean - tru).abs() / c.std),
            })
            .collect()
    });
    let max_recovery_sigmas = recovery.as_ref().map(|rows| {
        rows.iter().filter_map(|r| r.sigmas).fold(0.0f64, f64::max)
    });

    let report = EstimateReport {
        n_runs: outcome.n_runs,
        n_observations: outcome.n_observations,
        dropped_gimbal: outcome.dropped_gimbal,
        sigma_noise: outcome.sigma_noise,
        n_chains: outcome.summary.n_chains,
        n_samples: outcome.summary.n_samples,
        acceptance_rate: outcome.summary.acceptance_rate,
        coefficients: outcome.summary.coefficients.clone(),
        ls_solution: outcome.ls_solution.to_vec(),
        chains: outcome
            .chains
            .iter()
            .map(|c| ChainMeta {
                seed: c.seed,
                samples: c.samples.len(),
                accepted: c.accepted,
                proposed: c.proposed,
                acceptance_rate: c.acceptance_rate(),
                final_scale: c.final_scale,
            })
            .collect(),
        recovery,
        max_recovery_sigmas,
    };

    let envelope = RunReportFile {
        command: "estimate",
        seed,
        config_sha256,
        vehicle_sha256,
        outputs,
        control_log: None,
        report: &report,
    };
    let report_path = write_report(&cli.out, cli.format, &envelope)?;

    let mut lines = vec![format!(
        "estimate: {} runs, {} observations, {} chains x {} draws, acceptance {:.2}",
        report.n_runs,
        report.n_observations,
        report.n_chains,
        report.n_samples / report.n_chains.max(1),
        report.acceptance_rate,
    )];
    if let Some(sigmas) = report.max_recovery_sigmas {
        lines.push(format!(
            "  synthetic truth recovered within {sigmas:.2} posterior standard deviations"
        ));
    }
    lines.push(format!(
        "wrote {} chain files, {} and {}",
        report.chains.len(),
        cli.out.join("posterior.csv").display(),
        report_path.display()
    ));
    Ok(lines)
}

fn cmd_compare(cli: &Cli) -> Result<Vec<String>> {
    let sc = match &cli.config {
        Some(p) => CompareScenario::load(p)?,
        None => CompareScenario::default(),
    };
    let config_sha256 = sha256_json(&sc)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let (params, ranges, vehicle_sha256) =
        load_vehicle(sc.vehicle.as_deref(), config_dir(cli).as_deref())?;

    let report = run_compare(&sc, &params, &ranges, seed)?;

    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let cell_rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.channel.clone(),
                fmt_f64(c.target),
                fmt_f64(c.step),
                c.seed.to_string(),
                c.diverged.to_string(),
                opt(c.nlc.map(|m| m.rms_error)),
                opt(c.nlc.map(|m| m.percent_error_of_target)),
                opt(c.pid.map(|m| m.rms_error)),
                opt(c.pid.map(|m| m.percent_error_of_target)),
                opt(c.rms_ratio),
                c.nlc_better.to_string(),
            ]
        })
        .collect();
    write_table(
        &cli.out.join("cells.csv"),
        "name,channel,target,step,seed,diverged,nlc_rms,nlc_percent,pid_rms,pid_percent,rms_ratio,nlc_better",
        &cell_rows,
        &[2, 3, 4],
    )?;

    let envelope = RunReportFile {
        command: "compare",
        seed,
        config_sha256,
        vehicle_sha256,
        outputs: vec!["cells.csv".into(), cli.format.report_name().into()],
        control_log: None,
        report: &report,
    };
    let report_path = write_report(&cli.out, cli.format, &envelope)?;

    let mut lines = vec![format!(
        "compare: {} beats pid in {}/{} cells{}",
        report.nlc_strategy,
        report.nlc_wins,
        report.cells.len(),
        if report.all_nlc_better { "" } else { " (not all)" },
    )];
    for c in &report.cells {
        let verdict = if c.diverged {
            "diverged".to_string()
        } else {
            format!(
                "nlc {:.2}% vs pid {:.2}% of step",
                c.nlc.map(|m| m.percent_error_of_target).unwrap_or(f64::NAN),
                c.pid.map(|m| m.percent_error_of_target).unwrap_or(f64::NAN),
            )
        };
        lines.push(format!("  {}: {verdict}", c.name));
    }
    lines.push(format!(
        "wrote {} and {}",
        cli.out.join("cells.csv").display(),
        report_path.display()
    ));
    Ok(lines)
}

fn cmd_maneuver(cli: &Cli, pattern: Pattern) -> Result<Vec<String>> {
    let mut sc = match &cli.config {
        Some(p) => ManeuverScenario::load(p)?,
        None => ManeuverScenario { kind: pattern.kind().into(), ..ManeuverScenario::default() },
    };
    sc.kind = pattern.kind().into();
    let config_sha256 = sha256_json(&sc)?;
    let seed = cli.seed.unwrap_or(sc.seed);
    let (params, ranges, vehicle_sha256) =
        load_vehicle(sc.vehicle.as_deref(), config_dir(cli).as_deref())?;

    let (output, report) = run_maneuver(&sc, &params, &ranges, seed)?;

    let traj_path = cli.out.join("trajectory.csv");
    write_trajectory(&traj_path, &output.trajectory, ranges.ballast_travel_gain)?;

    let envelope = RunReportFile {
        command: "maneuver",
        seed,
        config_sha256,
        vehicle_sha256,
        outputs: vec!["trajectory.csv".into(), cli.format.report_name().into()],
        control_log: control_log(&output, sc.controller.pitch.epsilon, sc.controller.depth.epsilon),
        report: &report,
    };
    let report_path = write_report(&cli.out, cli.format, &envelope)?;

    let mut lines = vec![format!(
        "maneuver {}: {:.0} s, heading travel {:.0} deg, depth {:.2}..{:.2} m, {} mode switches",
        report.kind,
        report.duration,
        report.total_heading_travel.to_degrees(),
        report.min_depth,
        report.max_depth,
        output.mode_switches.len(),
    )];
    for phase in &report.phases {
        lines.push(format!(
            "  {}: {:.1}..{:.1} s, heading travel {:.0} deg",
            phase.name,
            phase.t0,
            phase.t1,
            phase.heading_travel.to_degrees()
        ));
    }
    lines.push(format!("wrote {} and {}", traj_path.display(), report_path.display()));
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn pattern_names_match_scenario_kinds() {
        for (pattern, kind) in [
            (Pattern::Circle, "circle"),
            (Pattern::SCurve, "s_curve"),
            (Pattern::CircleToS, "circle_to_s"),
        ] {
            assert_eq!(pattern.kind(), kind);
            // The value the parser accepts is exactly the scenario kind.
            let cli =
                Cli::try_parse_from(["glider", "maneuver", kind, "--out", "x"]).unwrap();
            match cli.command {
                Cmd::Maneuver { pattern: p } => assert_eq!(p, pattern),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn global_flags_parse_after_the_subcommand() {
        let cli = Cli::try_parse_from([
            "glider", "simulate", "--seed", "9", "--format", "csv", "--quiet",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(9));
        assert_eq!(cli.format, Format::Csv);
        assert!(cli.quiet);
        assert_eq!(cli.out, PathBuf::from("out"));
    }
}
