use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csg_shrink::egraph::Limits;
use csg_shrink::lang::{eval_to_core, pretty};
use csg_shrink::pipeline::{bench, load, perturb, shrink, validate, Config, PerturbOptions};

/// Shrinks flat CSG programs into structured ones.
#[derive(Parser)]
#[command(name = "csg-shrink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true, default_value_t = 30)]
    max_iters: usize,
    #[arg(long, global = true, default_value_t = 100_000)]
    max_nodes: usize,
    #[arg(long, global = true, default_value_t = 10.0)]
    max_seconds: f64,
    #[arg(long, global = true, default_value_t = 1e-3)]
    solver_eps: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    equiv_eps: f64,
    /// Disable the CAD identity rules.
    #[arg(long, global = true)]
    no_cad_identities: bool,
    /// Disable inverse transformations (sorted/spherical solving, partitioning).
    #[arg(long, global = true)]
    no_inverse: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

impl Opts {
    fn config(&self) -> Config {
        Config {
            limits: Limits { max_iters: self.max_iters, max_nodes: self.max_nodes, max_seconds: self.max_seconds },
            solver_eps: self.solver_eps,
            equiv_eps: self.equiv_eps,
            cad_identities: !self.no_cad_identities,
            inverse: !self.no_inverse,
            rng_seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Shrink a Core Caddy file and print the structured program.
    Shrink {
        input: PathBuf,
        /// Write the program here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check that a Caddy program is equivalent to a Core Caddy file.
    Validate { input: PathBuf, output: PathBuf },
    /// Print a seeded perturbation of a Core Caddy file.
    Perturb {
        input: PathBuf,
        #[arg(long)]
        no_substitute: bool,
        #[arg(long)]
        no_drop: bool,
        #[arg(long)]
        no_interchange: bool,
        #[arg(long)]
        no_shuffle: bool,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
    },
    /// Evaluate a Caddy program to Core Caddy.
    Eval { input: PathBuf },
    /// Shrink every .csexp file in a directory and print one report per file.
    Bench {
        dir: PathBuf,
        /// Emit JSON (the only format).
        #[arg(long)]
        json: bool,
    },
}

const INPUT_ERROR: u8 = 2;
const VALIDATION_FAILURE: u8 = 1;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), ExitCode> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| fail(INPUT_ERROR, format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    let config = cli.opts.config();
    config.check().map_err(|e| fail(INPUT_ERROR, e))?;
    let load = |p: &Path| load(p).map_err(|e| fail(INPUT_ERROR, e));
    match cli.command {
        Command::Shrink { input, output, json } => {
            let expr = load(&input)?;
            let (out, report) = shrink(&expr, &config).map_err(|e| fail(INPUT_ERROR, e))?;
            write_or_print(output.as_deref(), &pretty(&out))?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match json {
                Some(p) => write_or_print(Some(&p), &text)?,
                None => eprintln!("{text}"),
            }
            match report.validated {
                Some(true) => Ok(ExitCode::SUCCESS),
                Some(false) => Err(fail(VALIDATION_FAILURE, "output is not equivalent to the input")),
                None => Err(fail(VALIDATION_FAILURE, "the equivalence oracle could not decide")),
            }
        }
        Command::Validate { input, output } => {
            let (a, b) = (load(&input)?, load(&output)?);
            if !a.is_core() {
                return Err(fail(INPUT_ERROR, format!("{} is not Core Caddy", input.display())));
            }
            match validate(&a, &b, config.equiv_eps) {
                Ok(true) => {
                    println!("equivalent");
                    Ok(ExitCode::SUCCESS)
                }
                Ok(false) => Err(fail(VALIDATION_FAILURE, "not equivalent")),
                Err(e) => Err(fail(VALIDATION_FAILURE, e)),
            }
        }
        Command::Perturb { input, no_substitute, no_drop, no_interchange, no_shuffle, jitter } => {
            let expr = load(&input)?;
            if !expr.is_core() {
                return Err(fail(INPUT_ERROR, format!("{} is not Core Caddy", input.display())));
            }
            let options = PerturbOptions {
                substitute_identities: !no_substitute,
                drop_identities: !no_drop,
                interchange: !no_interchange,
                shuffle_ac: !no_shuffle,
                jitter,
            };
            println!("{}", pretty(&perturb(&expr, config.rng_seed, &options)));
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { input } => {
            let core = eval_to_core(&load(&input)?).map_err(|e| fail(INPUT_ERROR, e))?;
            println!("{}", pretty(&core));
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { dir, json: _ } => {
            let entries = bench(&dir, &config).map_err(|e| fail(INPUT_ERROR, e))?;
            println!("{}", serde_json::to_string_pretty(&entries).expect("reports serialize"));
            let all_valid = entries.iter().all(|e| e.report.as_ref().is_some_and(|r| r.validated == Some(true)));
            Ok(if all_valid { ExitCode::SUCCESS } else { ExitCode::from(VALIDATION_FAILURE) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(cli).unwrap_or_else(|code| code)
}
