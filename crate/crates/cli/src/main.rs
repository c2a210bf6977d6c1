//! Command-line front end for the delayed-feedback amplifier analysis.
//!
//! Every command emits deterministic CSV (metadata in `#` comments, no
//! timestamps) either to stdout or to `--output`; `figure` writes one or more
//! files into `--outdir`. All rates are in units of the total cavity decay
//! rate. Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod csvout;
mod figures;

use std::process::ExitCode;

use commands::CliError;
use config::RunConfig;

const USAGE: &str = "\
dpa-feedback — squeezing spectra and delayed-feedback dynamics of a
parametric amplifier with a time-delayed coherent feedback loop.

USAGE:
    dpa-feedback <command> [--config FILE] [key=value ...] [-o FILE]
    dpa-feedback figure <id> [--outdir DIR]
    dpa-feedback figure --list

COMMANDS:
    spectrum         quadrature spectrum over a frequency grid
    critical-point   singular sideband/delay pair and its squeezing floor
    stability-roots  certified rightmost characteristic roots
    steady-states    classical steady-state branches with stability flags
    evolve           integrate the classical delay equations
    hopf-locus       trace the Hopf locus over a delay grid
    figure <id>      regenerate a standard dataset (fig2..fig17)
    sweep            evaluate a named quantity over 1-2 swept parameters

KEYS (kappa = 1 units; value `a:b:n` denotes an n-point grid):
    kappa_b kappa_c | k0      mirror split, or lossless coupling 2 sqrt(kb kc)
    loss phi tau delta        loop loss, phase (suffix `pi` allowed), delay,
                              detuning
    eps theta theta_d         pump magnitude/phase, quadrature offset
    nu nu_grid                sideband frequency / grid
    kappa_p x                 pump decay rate and drive (classical model)
    t_end step stride         integration horizon, step, output decimation
    eps0_re eps0_im eps_p0_re eps_p0_im   initial amplitudes (evolve)
    tau_grid x_range variant  Hopf-locus controls (variant depleted|frozen|both)
    quantity                  sweep target: variance db nu_c tau_c
                              squeezed_floor squeezed_floor_db max_lambda_re
                              max_lambda_im sign_max_lambda_re x_th omega_hopf
    re_min re_max im_max      stability-roots search rectangle
    kappa_hz                  absolute decay rate, echoed for axis labels only

EXIT CODES:
    0 success | 2 config error | 3 numerical failure
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::from(0),
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(message)) => {
            eprintln!("numerical failure: {message}");
            ExitCode::from(3)
        }
    }
}

fn run(args: &[String]) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        println!("{USAGE}");
        return Ok(());
    };
    if command == "--help" || command == "-h" || command == "help" {
        println!("{USAGE}");
        return Ok(());
    }
    if command == "figure" {
        return run_figure_command(&args[1..]);
    }

    let mut config_path = None;
    let mut output_path = None;
    let mut overrides = Vec::new();
    let mut rest = args[1..].iter();
    while let Some(arg) = rest.next() {
        match arg.as_str() {
            "--config" => {
                config_path = Some(next_value(&mut rest, "--config")?);
            }
            "-o" | "--output" => {
                output_path = Some(next_value(&mut rest, "--output")?);
            }
            token if token.contains('=') && !token.starts_with('-') => {
                overrides.push(token.to_string());
            }
            other => {
                return Err(CliError::Config(format!("unexpected argument `{other}`")));
            }
        }
    }

    let mut cfg = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read `{path}`: {e}")))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::parse("")?,
    };
    cfg.apply_overrides(&overrides)?;

    let (csv, deferred_failure) = match command.as_str() {
        "spectrum" => (commands::spectrum(&cfg)?, None),
        "critical-point" => (commands::critical_point(&cfg)?, None),
        "stability-roots" => (commands::stability_roots(&cfg)?, None),
        "steady-states" => (commands::steady_states_cmd(&cfg)?, None),
        "evolve" => {
            let (csv, undecidable) = commands::evolve(&cfg)?;
            (csv, undecidable)
        }
        "hopf-locus" => (commands::hopf_locus_cmd(&cfg)?, None),
        "sweep" => (commands::sweep(&cfg)?, None),
        other => {
            return Err(CliError::Config(format!(
                "unknown command `{other}`; see --help"
            )));
        }
    };

    let text = csv.to_string();
    match output_path {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write `{path}`: {e}")))?,
        None => print!("{text}"),
    }
    if let Some(message) = deferred_failure {
        // The data is written; the undecidable verdict is still a numerical
        // failure by contract.
        return Err(CliError::Numerical(message));
    }
    Ok(())
}

fn run_figure_command(args: &[String]) -> Result<(), CliError> {
    let mut id = None;
    let mut outdir = "figures".to_string();
    let mut rest = args.iter();
    while let Some(arg) = rest.next() {
        match arg.as_str() {
            "--list" => {
                for known in figures::FIGURE_IDS {
                    println!("{known}");
                }
                return Ok(());
            }
            "--outdir" => {
                outdir = next_value(&mut rest, "--outdir")?;
            }
            token if !token.starts_with('-') && id.is_none() => {
                id = Some(token.to_string());
            }
            other => {
                return Err(CliError::Config(format!("unexpected argument `{other}`")));
            }
        }
    }
    let Some(id) = id else {
        return Err(CliError::Config(
            "figure needs an id (see `figure --list`)".into(),
        ));
    };
    let files = figures::run_figure(&id)?;
    std::fs::create_dir_all(&outdir)
        .map_err(|e| CliError::Config(format!("cannot create `{outdir}`: {e}")))?;
    for (name, text) in files {
        let path = std::path::Path::new(&outdir).join(&name);
        std::fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write `{}`: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn next_value(rest: &mut std::slice::Iter<'_, String>, flag: &str) -> Result<String, CliError> {
    rest.next()
        .cloned()
        .ok_or_else(|| CliError::Config(format!("{flag} needs a value")))
}
