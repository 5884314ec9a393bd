use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use beamsplit_cli::{parse_complex, parse_config, render_json, render_table, run, CliError, CliResult, Experiment, ExperimentSpec};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Parser)]
#[command(name = "beamsplit", version, about = "Seeded simulations of beamsplitter-based quantum optics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its report
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    experiment: Experiment,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Complex amplitude as `re,im`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    alpha: Option<Complex64>,
    /// Complex amplitude as `re,im`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    beta: Option<Complex64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cutoff: Option<u32>,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Flat `key = value` file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| CliError::Validation(format!("config key {key}: cannot parse {v:?}")))
}

fn build(args: RunArgs) -> CliResult<(ExperimentSpec, Option<PathBuf>, Format)> {
    let config: BTreeMap<String, String> = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let cfg = |k: &str| config.get(k).map(String::as_str);

    let mut spec = ExperimentSpec::new(args.experiment);
    let p = &mut spec.params;
    macro_rules! merge {
        ($field:ident, $target:expr) => {
            if let Some(v) = args.$field {
                $target = v;
            } else if let Some(v) = cfg(stringify!($field)) {
                $target = parse_value(stringify!($field), v)?;
            }
        };
    }
    merge!(theta, p.theta);
    merge!(phi, p.phi);
    merge!(r, p.r);
    merge!(s, p.s);
    merge!(cutoff, p.cutoff);
    merge!(seed, spec.seed);
    let p = &mut spec.params;
    for (key, flag, target) in [("alpha", args.alpha, &mut p.alpha), ("beta", args.beta, &mut p.beta)] {
        if let Some(v) = flag {
            *target = v;
        } else if let Some(v) = cfg(key) {
            *target = parse_complex(v).map_err(CliError::Validation)?;
        }
    }
    p.trials = match (args.trials, cfg("trials")) {
        (Some(t), _) => Some(t),
        (None, Some(v)) => Some(parse_value("trials", v)?),
        (None, None) => None,
    };
    let out = args.out.or_else(|| cfg("out").map(PathBuf::from));
    let format = match (args.format, cfg("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => Format::from_str(v, true).map_err(|_| CliError::Validation(format!("unknown format {v:?}")))?,
        (None, None) => Format::Json,
    };
    Ok((spec, out, format))
}

fn execute(args: RunArgs) -> CliResult<String> {
    let (spec, out, format) = build(args)?;
    let result = run(&spec)?;
    let json = render_json(&result);
    if let Some(path) = out {
        std::fs::write(&path, format!("{json}\n"))
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(match format {
        Format::Json => json,
        Format::Table => render_table(&result),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{}", CliError::Validation(e.to_string().trim().to_string()).to_json());
            return ExitCode::from(2);
        }
        Err(e) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let Command::Run(args) = cli.command;
    match execute(args) {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
