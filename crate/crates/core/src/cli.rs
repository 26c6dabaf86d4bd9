//! Command-line interface of the `gmnl` binary.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on invalid input.
//! Failures are reported on stderr as a JSON object.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compose::{
    compose_qutrit_tripartite, improved00, ineq_i1, ineq_isym, star_depth, symmetric_depth,
    tri_improved, ComposedInequality,
};
use crate::error::{Error, Result};
use crate::experiments::{
    config_digest, depth_demo, noise_threshold, qutrit_ghz, qutrit_survey, theorem2_batch, write_sweep_csv,
};
use crate::io::{load_behavior, load_expression, load_state, write_json, ExpressionFile, VERSION};
use crate::measurement::born_behavior_pure;
use crate::oracle::vertices::{cache_file_name, default_cache_path, read_cache, regenerate_cache, CACHE_DIR_ENV};
use crate::oracle::{bilocal_bound, kproducible_bound, local_bound, ns_vertices_2x2xd, Bound};
use crate::quantum::appendix::{appendix_measurements, solve_alpha};
use crate::quantum::canonical::canonical_sample;
use crate::quantum::OptimizationConfig;
use crate::scenario::Scenario;
use crate::seeds::{cglmp_seeds, chsh_seed, tri_seed};
use crate::state::{ghz_state, PureState};

#[derive(Debug, Parser, Serialize)]
#[command(name = "gmnl", version, about = "Bell inequalities for genuine multipartite nonlocality")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Ineq {
    Chsh,
    Tri,
    J3,
    J3t,
    Improved00,
    I1,
    Isym,
    TriImproved,
    StarDepth,
    SymDepth,
    QutritSym,
    QutritStar,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IneqArgs {
    /// Built-in inequality.
    #[arg(long, value_enum)]
    pub ineq: Option<Ineq>,
    /// Expression or composed-inequality JSON file.
    #[arg(long, conflicts_with = "ineq")]
    pub expr: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Block size for the depth inequalities.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    /// JSON file with optimizer settings; `--seed` and `--restarts` override it.
    #[arg(long)]
    pub optimizer: Option<PathBuf>,
}

impl OptArgs {
    fn config(&self) -> Result<OptimizationConfig> {
        let base: OptimizationConfig = match &self.optimizer {
            Some(p) => crate::io::read_json(p)?,
            None => OptimizationConfig::default(),
        };
        let cfg = base.with_restarts(self.restarts).with_seed(self.seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum BoundMode {
    Local,
    Bilocal,
    Depth,
    Ns,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Evaluate an expression (or the margin of a composed inequality) on a behavior.
    Evaluate {
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long)]
        behavior: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact classical bound of an expression.
    Bound {
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long, value_enum, default_value = "local")]
        mode: BoundMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// White-noise threshold of an inequality on a state.
    Sweep {
        #[command(flatten)]
        ineq: IneqArgs,
        /// ghz2, ghz3, or a state JSON file.
        #[arg(long, default_value = "ghz2")]
        state: String,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        tie_parties: bool,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Batch check of the explicit three-qubit construction.
    Thm2 {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Qutrit inequalities: GHZ fixture and random symmetric states.
    Qutrit {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify nonlocality depth of a noisy GHZ state.
    Depth {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in inequality, or the behavior of the explicit
    /// three-qubit construction for a seeded random state, as JSON.
    Export {
        #[command(flatten)]
        ineq: IneqArgs,
        /// Export the construction's behavior for this sample seed instead.
        #[arg(long, conflicts_with = "ineq")]
        construction_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate, cache or regenerate non-signaling vertices.
    Vertices {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        regenerate: bool,
        /// Cache directory (default: the GMNL_VERTEX_CACHE variable).
        #[arg(long)]
        vertex_cache: Option<PathBuf>,
    },
}

fn builtin(args: &IneqArgs) -> Result<ExpressionFile> {
    if let Some(path) = &args.expr {
        return load_expression(path);
    }
    let which = args
        .ineq
        .ok_or_else(|| Error::OutOfRange("either --ineq or --expr is required".into()))?;
    let n = args.n;
    let k = || args.k.ok_or_else(|| Error::OutOfRange("--k is required for depth inequalities".into()));
    let composed = |c: ComposedInequality| Ok(ExpressionFile::Composed(Box::new(c)));
    match which {
        Ineq::Chsh => Ok(ExpressionFile::Plain(chsh_seed())),
        Ineq::Tri => Ok(ExpressionFile::Plain(tri_seed())),
        Ineq::J3 => Ok(ExpressionFile::Plain(cglmp_seeds().0)),
        Ineq::J3t => Ok(ExpressionFile::Plain(cglmp_seeds().1)),
        Ineq::Improved00 => composed(improved00(n)?),
        Ineq::I1 => composed(ineq_i1(n)?),
        Ineq::Isym => composed(ineq_isym(n)?),
        Ineq::TriImproved => composed(tri_improved(n)?),
        Ineq::StarDepth => composed(star_depth(n, k()?)?),
        Ineq::SymDepth => composed(symmetric_depth(n, k()?)?),
        Ineq::QutritSym => composed(compose_qutrit_tripartite()?.0),
        Ineq::QutritStar => composed(compose_qutrit_tripartite()?.1),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config_digest: String,
    command: &'a Command,
    result: T,
}

fn emit<T: Serialize>(command: &Command, out: Option<&Path>, result: T) -> Result<()> {
    let env = Envelope {
        version: VERSION,
        config_digest: config_digest(command),
        command,
        result,
    };
    match out {
        Some(path) => write_json(path, &env),
        None => {
            println!("{}", serde_json::to_string_pretty(&env)?);
            Ok(())
        }
    }
}

fn select_state(spec: &str, s: Scenario) -> Result<PureStateOrFile> {
    match spec {
        "ghz2" | "ghz3" => {
            let d = if spec == "ghz2" { 2 } else { 3 };
            if d != s.d {
                return Err(Error::ScenarioMismatch {
                    expected: format!("d = {}", s.d),
                    found: format!("state {spec}"),
                });
            }
            Ok(PureStateOrFile::Pure(ghz_state(s.n, d)?))
        }
        path => Ok(PureStateOrFile::File(PathBuf::from(path))),
    }
}

enum PureStateOrFile {
    Pure(PureState),
    File(PathBuf),
}

#[derive(Serialize)]
struct BoundOut {
    label: String,
    mode: BoundMode,
    bound: Option<Bound>,
    exact: String,
    value: f64,
}

#[derive(Serialize)]
struct VerticesOut {
    d: usize,
    count: usize,
    deterministic: usize,
    cache: Option<PathBuf>,
}

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> Result<()> {
    let cmd = &cli.command;
    match cmd {
        Command::Evaluate { ineq, behavior, out } => {
            let file = builtin(ineq)?;
            let b = load_behavior(behavior)?;
            let expr = file.expression();
            let value = expr.evaluate(&b)?;
            let label = match &file {
                ExpressionFile::Composed(c) => c.label.clone(),
                ExpressionFile::Plain(e) => e.label.clone(),
            };
            #[derive(Serialize)]
            struct EvalOut {
                label: String,
                value: f64,
                margin: Option<f64>,
                violated: Option<bool>,
            }
            let composed = matches!(file, ExpressionFile::Composed(_));
            emit(
                cmd,
                out.as_deref(),
                EvalOut {
                    label,
                    value,
                    margin: composed.then_some(value),
                    violated: composed.then_some(value > 0.0),
                },
            )
        }
        Command::Bound { ineq, mode, out } => {
            let file = builtin(ineq)?;
            let expr = file.expression();
            let (exact, value, bound) = match mode {
                BoundMode::Local => {
                    let b = local_bound(&expr)?;
                    (b.exact.to_string(), b.value, Some(b))
                }
                BoundMode::Bilocal => {
                    let b = bilocal_bound(&expr)?;
                    (b.exact.to_string(), b.value, Some(b))
                }
                BoundMode::Depth => {
                    let k = ineq
                        .k
                        .ok_or_else(|| Error::OutOfRange("--k is required for --mode depth".into()))?;
                    let b = kproducible_bound(&expr, k)?;
                    (b.exact.to_string(), b.value, Some(b))
                }
                BoundMode::Ns => {
                    if expr.scenario.n > 4 {
                        return Err(Error::CapExceeded(format!(
                            "non-signaling bound supports n ≤ 4, got {}",
                            expr.scenario.n
                        )));
                    }
                    let q = crate::oracle::ns_bound(&expr)?;
                    (q.to_string(), crate::oracle::bounds::to_f64(&q), None)
                }
            };
            emit(
                cmd,
                out.as_deref(),
                BoundOut {
                    label: expr.label.clone(),
                    mode: *mode,
                    bound,
                    exact,
                    value,
                },
            )
        }
        Command::Sweep {
            ineq,
            state,
            tie_parties,
            opt,
            out,
            csv,
        } => {
            let composed = match builtin(ineq)? {
                ExpressionFile::Composed(c) => *c,
                ExpressionFile::Plain(_) => {
                    return Err(Error::InvalidExpression("sweep needs a composed inequality".into()))
                }
            };
            let cfg = opt.config()?;
            let psi = match select_state(state, composed.scenario())? {
                PureStateOrFile::Pure(p) => p,
                PureStateOrFile::File(path) => {
                    let rho = load_state(&path)?;
                    let sf = rho.spectral_form();
                    if sf.identity_weight > 1e-12 || sf.components.len() != 1 {
                        return Err(Error::InvalidState("sweep needs a pure state".into()));
                    }
                    PureState::normalized(rho.dims, sf.components[0].1.clone())?
                }
            };
            let r = noise_threshold(&composed, &psi, &cfg, *tie_parties)?;
            if let Some(csv) = csv {
                write_sweep_csv(csv, std::slice::from_ref(&r))?;
            }
            eprintln!("{}: q* = {:.4} in [{:.4}, {:.4}]", r.label, r.threshold, r.bracket.0, r.bracket.1);
            emit(cmd, out.as_deref(), r)
        }
        Command::Thm2 { count, seed, out } => {
            let r = theorem2_batch(*count, *seed)?;
            eprintln!("{}/{} states violate", r.violations, r.count);
            let failed = !r.all_violated();
            emit(cmd, out.as_deref(), &r)?;
            if failed {
                return Err(Error::Numerical(format!("{} states without violation", r.failures.len())));
            }
            Ok(())
        }
        Command::Qutrit { count, opt, out } => {
            let cfg = opt.config()?;
            let ghz = qutrit_ghz(&cfg)?;
            let survey = qutrit_survey(*count, opt.seed, &cfg)?;
            eprintln!(
                "GHZ margins: sym {:.3e}, star {:.3e}; {}/{} random states violate",
                ghz.sym_margin, ghz.star_margin, survey.violations, survey.count
            );
            #[derive(Serialize)]
            struct QutritOut {
                ghz: crate::experiments::QutritGhzReport,
                survey: crate::experiments::SurveyReport,
            }
            emit(cmd, out.as_deref(), QutritOut { ghz, survey })
        }
        Command::Depth { n, k, q, opt, out } => {
            let r = depth_demo(*n, *k, *q, &opt.config()?)?;
            eprintln!("depth ≥ {}", r.certified_depth);
            emit(cmd, out.as_deref(), r)
        }
        Command::Export {
            ineq,
            construction_seed,
            out,
        } => {
            if let Some(seed) = construction_seed {
                let st = canonical_sample(&mut ChaCha8Rng::seed_from_u64(*seed), true);
                let alpha = solve_alpha(&st)?;
                let b = born_behavior_pure(&st.state(), &appendix_measurements(&st, alpha)?)?;
                return write_json(out, &b);
            }
            match builtin(ineq)? {
                ExpressionFile::Composed(c) => write_json(out, &c),
                ExpressionFile::Plain(e) => write_json(out, &e),
            }
        }
        Command::Vertices {
            d,
            regenerate,
            vertex_cache,
        } => {
            let s = Scenario { n: 2, m: 2, d: *d };
            if !matches!(d, 2 | 3) {
                return Err(Error::Unsupported(format!("vertices are available for d ∈ {{2,3}}, got {d}")));
            }
            let path = vertex_cache
                .as_ref()
                .map(|dir| dir.join(cache_file_name(*d)))
                .or_else(|| default_cache_path(*d));
            let verts = match (&path, regenerate) {
                (Some(p), true) => regenerate_cache(p, s)?,
                (Some(p), false) if p.exists() => read_cache(p, s)?,
                (Some(p), false) => regenerate_cache(p, s)?,
                (None, true) => {
                    return Err(Error::OutOfRange(format!(
                        "--regenerate needs --vertex-cache or {CACHE_DIR_ENV}"
                    )))
                }
                (None, false) => ns_vertices_2x2xd(*d)?.to_vec(),
            };
            emit(
                cmd,
                None,
                VerticesOut {
                    d: *d,
                    count: verts.len(),
                    deterministic: verts.iter().filter(|v| v.is_deterministic()).count(),
                    cache: path,
                },
            )
        }
    }
}

#[derive(Serialize)]
struct Failure {
    error: &'static str,
    message: String,
    exit_code: i32,
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidScenario(_) => "invalid_scenario",
        Error::DimensionOverflow { .. } => "dimension_overflow",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::ScenarioMismatch { .. } => "scenario_mismatch",
        Error::InvalidState(_) => "invalid_state",
        Error::InvalidMeasurement(_) => "invalid_measurement",
        Error::InvalidBehavior(_) => "invalid_behavior",
        Error::OutOfRange(_) => "out_of_range",
        Error::InvalidExpression(_) => "invalid_expression",
        Error::Composition(_) => "composition",
        Error::CapExceeded(_) => "cap_exceeded",
        Error::Unsupported(_) => "unsupported",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Exit code for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        1
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let f = Failure {
                error: kind(&e),
                message: e.to_string(),
                exit_code: code,
            };
            eprintln!("{}", serde_json::to_string(&f).unwrap_or_else(|_| e.to_string()));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bound_command() {
        let cli = Cli::try_parse_from(["gmnl", "bound", "--ineq", "improved00", "--n", "3", "--mode", "bilocal"]).unwrap();
        assert!(matches!(cli.command, Command::Bound { mode: BoundMode::Bilocal, .. }));
    }

    #[test]
    fn missing_k_is_input_error() {
        let cli = Cli::try_parse_from(["gmnl", "bound", "--ineq", "star-depth", "--n", "3"]).unwrap();
        let e = execute(&cli).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn oversized_bound_is_refused() {
        assert_eq!(main_with_args(["gmnl", "bound", "--ineq", "improved00", "--n", "8", "--mode", "bilocal"]), 2);
    }
}
