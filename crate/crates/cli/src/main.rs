//! `genlab`: run an experiment, write CSV tables, optional SVG plots and a
//! manifest into the output directory.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

mod commands;
mod config;
mod output;
mod svg;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Arg, ArgAction, ArgMatches};

use commands::COMMANDS;
use config::{ConfigError, Kind, RunConfig, COMMON_KEYS};
use output::{manifest_hash, Outputs};

/// `x_low` becomes `--x-low`. The command tree is built once per process.
fn flag_name(key: &str) -> &'static str {
    Box::leak(key.replace('_', "-").into_boxed_str())
}

fn cli() -> clap::Command {
    let mut root = clap::Command::new("genlab")
        .version(output::VERSION)
        .about("Generalization experiments: bounds, capacity, soft inductive bias, double descent, evidence")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in COMMANDS {
        let mut sub = clap::Command::new(c.name).about(c.about).arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("flat key = value file; flags override it"),
        );
        for k in COMMON_KEYS.iter().chain(c.keys) {
            let arg = Arg::new(k.name).long(flag_name(k.name));
            let arg = match k.kind {
                Kind::Bool => arg.action(ArgAction::SetTrue).help(k.help.to_string()),
                _ => arg
                    .value_name("VALUE")
                    .allow_negative_numbers(true)
                    .help(format!("{} [default: {}]", k.help, k.default)),
            };
            sub = sub.arg(arg);
        }
        root = root.subcommand(sub);
    }
    root
}

fn flags(command: &commands::Command, m: &ArgMatches) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    for k in COMMON_KEYS.iter().chain(command.keys) {
        match k.kind {
            Kind::Bool => {
                if m.get_flag(k.name) {
                    out.push((k.name, "true".to_string()));
                }
            }
            _ => {
                if let Some(v) = m.get_one::<String>(k.name) {
                    out.push((k.name, v.clone()));
                }
            }
        }
    }
    out
}

fn run() -> Result<()> {
    let matches = cli().get_matches();
    let (name, m) = matches.subcommand().expect("subcommand required");
    let command = COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand");

    let file = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
            Some((path.clone(), text))
        }
        None => None,
    };
    let config = RunConfig::resolve(
        command.name,
        command.keys,
        file.as_ref().map(|(p, t)| (p.as_path(), t.as_str())),
        &flags(command, m),
    )?;

    let start = Instant::now();
    let mut outputs = Outputs::new(manifest_hash(&config));
    (command.run)(&config, &mut outputs).with_context(|| format!("{} failed", command.name))?;
    let names: Vec<String> = outputs.names().map(str::to_string).collect();
    let dir = config.out();
    outputs.commit(&dir, &config, start.elapsed().as_secs_f64())?;
    println!("wrote {} and {}.manifest.json to {}", names.join(", "), command.name, dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
