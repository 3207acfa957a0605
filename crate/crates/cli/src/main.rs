use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polaromech::io::{
    plot_data, sweep_csv, to_toml, write_file, OptimizeReport, PointSummary, RunConfig, TuneReport,
    TwoModeEntry,
};
use polaromech::{evaluate_network, optimize, run_sweep, tune_two_mode, AveragesMode, Error};

/// Sideband cooling of mechanical modes through magnon-photon polaritons.
///
/// Configuration files are TOML with frequencies in Hz; see the bundled
/// presets for the layout.
#[derive(Parser, Debug)]
#[command(name = "polaromech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean fields, stability, numeric and analytic occupations at one point.
    Simulate(Common),
    /// Analytic sideband rates and effective occupations at one point.
    Rates(Common),
    /// Sweep θ, temperature, power or field; writes CSV and plot data.
    Sweep(Common),
    /// Frequency schedule that puts each mechanical mode on a red sideband.
    Tune(Common),
    /// Minimize the worst mechanical occupation over bounded variables.
    Optimize(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output file; defaults to `[output].path` in the config, else stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Exit with status 3 if any evaluated point is unstable.
    #[arg(long)]
    require_stable: bool,
    /// Overrides the config's mean-field treatment.
    #[arg(long, value_name = "approx|selfconsistent")]
    averages: Option<AveragesMode>,
    /// Worker threads for sweeps and optimization.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

enum Outcome {
    Done,
    Unstable,
}

fn emit(path: Option<&Path>, text: &str) -> polaromech::Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn warn(summary: &PointSummary) {
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
}

fn point_summary(config: &RunConfig, mode: AveragesMode) -> polaromech::Result<PointSummary> {
    if config.uses_n_mode() {
        let (_, net) = config.n_mode_network()?;
        let evaluation = evaluate_network(&net, mode)?;
        Ok(PointSummary::new(&net, &evaluation, None))
    } else {
        let report = config.scenario()?.evaluate(mode)?;
        Ok(PointSummary::from_point(&report))
    }
}

fn run(command: &Command, common: &Common) -> polaromech::Result<Outcome> {
    let config = RunConfig::load(&common.config)?;
    let mode = common.averages.unwrap_or(config.averages);
    let out = common.out.as_deref().or(config.output.path.as_deref());
    let unstable = |stable: bool| if stable || !common.require_stable { Outcome::Done } else { Outcome::Unstable };
    match command {
        Command::Simulate(_) => {
            let summary = point_summary(&config, mode)?;
            warn(&summary);
            emit(out, &to_toml(&summary)?)?;
            Ok(unstable(summary.stable))
        }
        Command::Rates(_) => {
            let summary = point_summary(&config, mode)?.analytic_only();
            warn(&summary);
            emit(out, &to_toml(&summary)?)?;
            Ok(unstable(summary.stable))
        }
        Command::Sweep(_) => {
            let spec = config.sweep_spec()?;
            let rows = run_sweep(&config.scenario()?, &spec, mode)?;
            let csv = sweep_csv(&rows)?;
            let plot = plot_data(&rows, spec.variable, !spec.theta.is_empty())?;
            emit(out, &csv)?;
            if let Some(p) = &config.output.plot {
                write_file(p, &plot)?;
            }
            let failed = rows.iter().filter(|r| !r.stable).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} points unstable or failed", rows.len());
            }
            Ok(unstable(failed == 0))
        }
        Command::Tune(_) => {
            let report = if config.uses_n_mode() {
                let (tuning, _) = config.n_mode_network()?;
                TuneReport { two_mode: Vec::new(), n_mode: Some((&tuning).into()) }
            } else {
                let mechanics = config.mechanics();
                if mechanics.len() < 2 {
                    return Err(Error::InvalidParameter {
                        field: "system.mechanics".into(),
                        reason: "tuning needs at least two mechanical modes".into(),
                    });
                }
                let cavity = config.scenario()?.params.cavity_freq;
                let thetas = match config.tune.as_ref().map(|t| t.theta.clone()) {
                    Some(t) if !t.is_empty() => t,
                    _ => config.system.theta.into_iter().collect(),
                };
                if thetas.is_empty() {
                    return Err(Error::InvalidParameter {
                        field: "tune.theta".into(),
                        reason: "give at least one mixing angle".into(),
                    });
                }
                let two_mode = thetas
                    .iter()
                    .map(|&th| tune_two_mode(cavity, mechanics[0].freq, mechanics[1].freq, th))
                    .map(|t| t.map(|t| TwoModeEntry::from(&t)))
                    .collect::<polaromech::Result<Vec<_>>>()?;
                TuneReport { two_mode, n_mode: None }
            };
            emit(out, &to_toml(&report)?)?;
            Ok(Outcome::Done)
        }
        Command::Optimize(_) => {
            let spec = config.optimize_spec()?;
            let result = optimize(&config.scenario()?, &spec, mode)?;
            let report = OptimizeReport::new(&spec, &result);
            warn(&report.point);
            emit(out, &to_toml(&report)?)?;
            Ok(unstable(report.point.stable))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let common = match &cli.command {
        Command::Simulate(c)
        | Command::Rates(c)
        | Command::Sweep(c)
        | Command::Tune(c)
        | Command::Optimize(c) => c,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&cli.command, common)),
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Unstable) => {
            eprintln!("error: unstable operating point");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        1
    } else {
        2
    }
}
