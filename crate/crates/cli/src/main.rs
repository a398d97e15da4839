//! `fronthaul`: validate instances, solve, sweep, export, verify and render.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rust_decimal::Decimal;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fronthaul", version, about = "Delay-constrained TWDM-PON fronthaul planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Parameter overrides applied to the instance before anything else.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Maximum CO to RU/ONU propagation delay, µs.
    #[arg(long = "delay-us")]
    pub delay_us: Option<Decimal>,
    /// Splitter fan-out n of a 1:n splitter.
    #[arg(long)]
    pub ratio: Option<u32>,
    /// Accept ratios other than 4, 8 and 16.
    #[arg(long)]
    pub allow_nonstandard_ratio: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ExactBnb,
    BruteForce,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an instance and list its warnings.
    Validate {
        /// Instance JSON, or `case_study` for the bundled one.
        instance: String,
    },
    /// Optimize one instance and write the plan and its cost report.
    Solve {
        instance: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Wall-clock budget, seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, value_enum, default_value = "exact-bnb")]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Relative gap at which to stop.
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long, default_value = "plan.json")]
        plan: PathBuf,
        /// Cost report; JSON when the name ends in `.json`, CSV otherwise.
        #[arg(long, default_value = "report.csv")]
        report: PathBuf,
    },
    /// Solve every delay-threshold x split-ratio cell and check the trends.
    Sweep {
        instance: String,
        /// Grid JSON; the 10-50 µs x {1:4, 1:8, 1:16} grid by default.
        #[arg(long)]
        grid_file: Option<PathBuf>,
        /// Per-cell budget, seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Cells solved at the same time.
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Full report with plans, as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write the model as an LP file (`-` for stdout).
    ExportLp {
        instance: String,
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a plan against every model row.
    Verify {
        instance: String,
        plan: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Draw a plan as an SVG map.
    Render {
        instance: String,
        plan: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Pixels per km.
        #[arg(long)]
        scale: Option<f64>,
        /// Leave out candidate sites the plan does not use.
        #[arg(long)]
        hide_unused: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = config::load()?;
    match cli.command {
        Command::Validate { instance } => commands::validate(&instance),
        Command::Solve {
            instance,
            overrides,
            time_limit,
            mode,
            seed,
            workers,
            gap,
            plan,
            report,
        } => {
            let opts = commands::solve_options(&config, mode, time_limit, seed, workers, gap);
            commands::solve(&instance, &overrides, opts, &plan, &report)
        }
        Command::Sweep {
            instance,
            grid_file,
            time_limit,
            seed,
            parallel,
            out,
            json,
        } => {
            let mut opts = fronthaul_core::scenario::SweepOptions {
                solve: commands::solve_options(&config, Mode::ExactBnb, time_limit, seed, None, None),
                global_time_limit: config.sweep.global_time_limit,
                ..Default::default()
            };
            if let Some(n) = parallel.or(config.sweep.parallel_cells) {
                opts.parallel_cells = n;
            }
            commands::sweep(&instance, grid_file.as_deref(), &opts, &out, json.as_deref())
        }
        Command::ExportLp {
            instance,
            out,
            overrides,
        } => commands::export_lp(&instance, &overrides, &out),
        Command::Verify {
            instance,
            plan,
            overrides,
        } => commands::verify(&instance, &overrides, &plan),
        Command::Render {
            instance,
            plan,
            out,
            overrides,
            scale,
            hide_unused,
        } => {
            let mut style = fronthaul_core::render::RenderStyle::default();
            if let Some(s) = scale.or(config.render.scale) {
                style.scale = s;
            }
            style.show_unused = !hide_unused && config.render.show_unused.unwrap_or(true);
            commands::render(&instance, &overrides, &plan, &out, &style)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "fronthaul", "solve", "case_study", "--delay-us", "30", "--ratio", "16", "--seed", "3", "--mode", "brute-force",
        ])
        .unwrap();
        match cli.command {
            Command::Solve {
                overrides, mode, seed, ..
            } => {
                assert_eq!(overrides.delay_us, Some(Decimal::from(30)));
                assert_eq!(overrides.ratio, Some(16));
                assert_eq!(mode, Mode::BruteForce);
                assert_eq!(seed, Some(3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let err = Cli::try_parse_from(["fronthaul", "solve", "case_study", "--frobnicate"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
