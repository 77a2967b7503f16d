use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ssr::commands::{self, FitModel, Outcome};
use ssr::{scenarios, CliError, CliResult, Scenario};

#[derive(Parser)]
#[command(name = "ssr", version, about = "Spin self-rephasing simulation and clock-stability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario name (see `ssr scenarios`).
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: the scenario's output_dir, else out/<name>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Rates, SSR conditions and mean shift for each scenario point.
    Predict(Common),
    /// Ramsey records for each scenario point, or synthetic shift data.
    Simulate(Common),
    /// Fit a model to a data file.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = FitModel::Ssr)]
        model: FitModel,
    },
    /// Overlapping Allan deviation of a shot series, read or synthesized.
    Allan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        cycle_time_s: Option<f64>,
    },
    /// Noise budget of a stability scenario.
    Budget(Common),
    /// List the built-in scenarios.
    Scenarios,
}

impl Common {
    fn load(&self) -> CliResult<Option<Scenario>> {
        match (&self.scenario, &self.config) {
            (Some(name), None) => scenarios::load(name).map(Some),
            (None, Some(path)) => Scenario::from_path(path).map(Some),
            _ => Ok(None),
        }
    }

    fn require(&self) -> CliResult<Scenario> {
        self.load()?
            .ok_or_else(|| CliError::input("give --scenario <name> or --config <path>"))
    }

    fn out_dir(&self, scenario: Option<&Scenario>) -> PathBuf {
        if let Some(o) = &self.out {
            return o.clone();
        }
        match scenario {
            Some(s) => s
                .output_dir
                .clone()
                .unwrap_or_else(|| Path::new("out").join(&s.name)),
            None => PathBuf::from("out"),
        }
    }
}

fn run(cli: Cli) -> CliResult<Option<Outcome>> {
    Ok(Some(match cli.command {
        Command::Predict(c) => {
            let s = c.require()?;
            commands::predict(&s, &c.out_dir(Some(&s)))?
        }
        Command::Simulate(c) => {
            let s = c.require()?;
            commands::simulate(&s, &c.out_dir(Some(&s)), c.seed)?
        }
        Command::Fit { common, data, model } => {
            let s = common.load()?;
            commands::fit(s.as_ref(), &data, model, &common.out_dir(s.as_ref()))?
        }
        Command::Allan {
            common,
            data,
            cycle_time_s,
        } => {
            let s = common.load()?;
            commands::allan(
                s.as_ref(),
                data.as_deref(),
                cycle_time_s,
                &common.out_dir(s.as_ref()),
                common.seed,
            )?
        }
        Command::Budget(c) => {
            let s = c.require()?;
            commands::budget(&s, &c.out_dir(Some(&s)))?
        }
        Command::Scenarios => {
            let mut out = std::io::stdout().lock();
            for (name, text) in scenarios::BUILTIN {
                let desc = Scenario::from_toml(text).map(|s| s.description).unwrap_or_default();
                // a closed pipe (e.g. `| head`) is not an error
                let _ = writeln!(out, "{name:<14} {desc}");
            }
            return Ok(None);
        }
    }))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(outcome)) => {
            let mut out = std::io::stdout().lock();
            let _ = write!(out, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
