//! End-to-end driver: ingest flat CSG, saturate, extract, validate.

mod perturb;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use perturb::{perturb, PerturbOptions};

use crate::egraph::{run_saturation, EGraph, Limits, StopReason};
use crate::lang::{cost, eval_to_core, parse, semantic_equiv, Cost, EquivError, EvalError, Expr, ParseError};
use crate::rewrites::{rules, RuleConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub limits: Limits,
    /// Maximum residual accepted by the arithmetic solvers.
    pub solver_eps: f64,
    /// Tolerance of the validation oracle.
    pub equiv_eps: f64,
    pub cad_identities: bool,
    pub inverse: bool,
    pub rng_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            limits: Limits::default(),
            solver_eps: 1e-3,
            equiv_eps: 1e-6,
            cad_identities: true,
            inverse: true,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

/// False for zero, negative and NaN values.
fn is_positive(x: f64) -> bool {
    x > 0.0
}

impl Config {
    pub fn check(&self) -> Result<(), ConfigError> {
        let l = &self.limits;
        if l.max_iters == 0 {
            return Err(ConfigError::NonPositive("max_iters"));
        }
        if l.max_nodes == 0 {
            return Err(ConfigError::NonPositive("max_nodes"));
        }
        if !is_positive(l.max_seconds) {
            return Err(ConfigError::NonPositive("max_seconds"));
        }
        if !is_positive(self.solver_eps) {
            return Err(ConfigError::NonPositive("solver_eps"));
        }
        if !is_positive(self.equiv_eps) {
            return Err(ConfigError::NonPositive("equiv_eps"));
        }
        Ok(())
    }

    /// The rule configuration for this run. The solver tolerance is capped
    /// at `equiv_eps`: a fit looser than the validation tolerance would
    /// produce outputs that fail validation.
    pub fn rule_config(&self) -> RuleConfig {
        RuleConfig {
            cad_identities: self.cad_identities,
            inverse: self.inverse,
            solver_eps: self.solver_eps.min(self.equiv_eps),
        }
    }
}

/// Machine-readable summary of one shrink run. Key names are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub input: String,
    pub output: String,
    pub input_cost: Cost,
    pub output_cost: Cost,
    pub iterations: usize,
    pub enodes: usize,
    pub eclasses: usize,
    pub stop_reason: StopReason,
    pub wall_seconds: f64,
    /// Solver tolerance of the run that produced `output`.
    pub solver_eps: f64,
    /// Reruns after outputs that failed validation.
    pub retries: usize,
    /// `None` when the oracle could not decide (e.g. a degenerate scale).
    pub validated: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShrinkError {
    #[error("input is not flat Core Caddy")]
    NotCore,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// How many times shrinking is retried with a tenfold tighter solver
/// tolerance when the output fails validation.
pub const MAX_RETRIES: usize = 3;

/// Runs the full pipeline on a Core Caddy program and returns the cheapest
/// equivalent program found, with a report. The output is validated against
/// the input with the analytic oracle at `config.equiv_eps`.
///
/// Solver fits are approximate, and a fit within tolerance can still drift
/// out of it once a later `Scale` multiplies the error. When validation
/// fails, the run is repeated with a tenfold tighter solver tolerance (up to
/// [`MAX_RETRIES`] times, within the one time budget); the report gives the
/// tolerance of the run whose output is returned.
pub fn shrink(input: &Expr, config: &Config) -> Result<(Expr, ShrinkReport), ShrinkError> {
    config.check()?;
    if !input.is_core() {
        return Err(ShrinkError::NotCore);
    }
    let start = Instant::now();
    let input_cost = cost(input);
    let mut rule_config = config.rule_config();
    let mut attempt = 0;
    loop {
        let remaining = config.limits.max_seconds - start.elapsed().as_secs_f64();
        let limits = Limits { max_seconds: remaining.max(f64::MIN_POSITIVE), ..config.limits };
        let mut g = EGraph::new();
        let root = g.add_expr(input);
        let sat = run_saturation(&mut g, &rules(&rule_config), &limits);
        let output = g.extract(root).expect("the finite-cost input is always represented at the root");
        let output_cost = cost(&output);
        assert!(output_cost <= input_cost, "extraction returned a costlier program than the input");
        let validated = validate(input, &output, config.equiv_eps).ok();
        let out_of_time = start.elapsed().as_secs_f64() >= config.limits.max_seconds;
        if validated != Some(false) || attempt == MAX_RETRIES || out_of_time {
            let report = ShrinkReport {
                input: crate::lang::print(input),
                output: crate::lang::print(&output),
                input_cost,
                output_cost,
                iterations: sat.iterations,
                enodes: sat.nodes,
                eclasses: sat.classes,
                stop_reason: sat.stop_reason,
                wall_seconds: start.elapsed().as_secs_f64(),
                solver_eps: rule_config.solver_eps,
                retries: attempt,
                validated,
            };
            return Ok((output, report));
        }
        attempt += 1;
        rule_config.solver_eps /= 10.0;
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error("output does not evaluate: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("output contains inverse transformations")]
    InverseInOutput,
}

/// Whether `output` evaluates to a Core Caddy program equivalent to `input`.
pub fn validate(input: &Expr, output: &Expr, eps: f64) -> Result<bool, ValidateError> {
    if output.contains_inverse() {
        return Err(ValidateError::InverseInOutput);
    }
    let core = eval_to_core(output)?;
    Ok(semantic_equiv(&core, input, eps)?)
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
}

/// Reads and parses a program file.
pub fn load(path: &Path) -> Result<Expr, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_owned(), source })?;
    parse(&text).map_err(|source| InputError::Parse { path: path.to_owned(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ShrinkReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Shrinks every `.csexp` file in `dir` (sorted by name), one independent
/// e-graph per file, in parallel.
pub fn bench(dir: &Path, config: &Config) -> Result<Vec<BenchEntry>, InputError> {
    let io = |source| InputError::Io { path: dir.to_owned(), source };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csexp"))
        .collect();
    files.sort();
    Ok(files
        .par_iter()
        .map(|path| {
            let file = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let outcome = load(path).map_err(|e| e.to_string()).and_then(|e| shrink(&e, config).map_err(|e| e.to_string()));
            match outcome {
                Ok((_, report)) => BenchEntry { file, report: Some(report), error: None },
                Err(error) => BenchEntry { file, report: None, error: Some(error) },
            }
        })
        .collect())
}
