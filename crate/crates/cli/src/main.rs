mod args;
mod commands;
mod experiments;
mod output;
mod settings;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::CommandFactory;

use crate::args::Cli;
use crate::settings::Settings;

fn run() -> Result<()> {
    let cmd = Cli::command();
    let matches = cmd.clone().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let sub_cmd = cmd.find_subcommand(name).expect("known subcommand");
    let settings = Settings::resolve(sub_cmd, sub)?;

    let job = || -> Result<output::Bundle> {
        match name {
            "geocp" => commands::cmd_geocp(&settings),
            "bootstrap" => commands::cmd_bootstrap(&settings),
            "experiment" => experiments::cmd_experiment(&settings),
            "synth" => commands::cmd_synth(&settings),
            "moran" => commands::cmd_moran(&settings),
            other => unreachable!("unhandled subcommand {other}"),
        }
    };
    let bundle = match commands::threads(&settings)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(job)?,
        None => job()?,
    };
    bundle.commit()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_flag_is_documented() {
        let mut root = Cli::command();
        for sub in root.get_subcommands_mut() {
            let help = sub.render_long_help().to_string();
            for arg in sub.get_arguments() {
                if arg.get_id() == "help" {
                    continue;
                }
                assert!(
                    arg.get_help().is_some(),
                    "{} --{} has no help",
                    sub.get_name(),
                    arg.get_id()
                );
                let shown = arg
                    .get_long()
                    .map(|l| format!("--{l}"))
                    .unwrap_or_else(|| arg.get_value_names().unwrap()[0].to_string());
                assert!(
                    help.contains(&shown),
                    "{} help misses {shown}",
                    sub.get_name()
                );
            }
        }
    }

    #[test]
    fn spec_flags_exist() {
        let cmd = Cli::command();
        let geocp = cmd.find_subcommand("geocp").unwrap();
        for flag in [
            "data",
            "x-col",
            "y-col",
            "target-col",
            "feature-cols",
            "crs",
            "predictor",
            "kernel",
            "bandwidth",
            "epsilon",
            "split",
            "seed",
            "out",
            "threads",
            "config",
        ] {
            assert!(
                geocp.get_arguments().any(|a| a.get_long() == Some(flag)),
                "missing --{flag}"
            );
        }
        for name in ["geocp", "bootstrap", "experiment", "synth", "moran"] {
            assert!(cmd.find_subcommand(name).is_some());
        }
    }

    #[test]
    fn flags_override_config_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "epsilon = 0.2\nseed = 5\n").unwrap();
        let cmd = Cli::command();
        let m = cmd
            .clone()
            .try_get_matches_from([
                "geoconformal",
                "geocp",
                "--config",
                cfg.to_str().unwrap(),
                "--seed",
                "9",
            ])
            .unwrap();
        let s = Settings::resolve(
            cmd.find_subcommand("geocp").unwrap(),
            m.subcommand_matches("geocp").unwrap(),
        )
        .unwrap();
        assert_eq!(s.str("seed").unwrap(), "9");
        assert_eq!(s.str("epsilon").unwrap(), "0.2");
        assert_eq!(s.str("kernel").unwrap(), "gaussian");

        std::fs::write(&cfg, "epsilon = 0.2\nsmoothness = 3\n").unwrap();
        let m = cmd
            .clone()
            .try_get_matches_from(["geoconformal", "geocp", "--config", cfg.to_str().unwrap()])
            .unwrap();
        assert!(Settings::resolve(
            cmd.find_subcommand("geocp").unwrap(),
            m.subcommand_matches("geocp").unwrap()
        )
        .is_err());
    }
}
