//! The `opa` command line.
//!
//! Exit codes: `0` success, `1` numerical failure, `2` invalid input,
//! `3` a solve did not converge (artifacts are still written), `4` an
//! internal consistency check failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{Command, DegreeSpec, Format, OutputSpec, ProblemSpec, RunConfig, SpaceSpec};
use crate::error::OpaError;
use crate::opa::{solve_flat, solve_structural, ClosedForm, OpaResult, SolverKind, SolverOpts};
use crate::poly::Poly;
use crate::rates::{
    classify, fit_rate, lower_bound, lower_bound_spec, run_sweep, write_csv, Regime, SweepProblem,
    SweepSolver, DEFAULT_MIN_N,
};
use crate::space::Exponent;
use crate::verify::run_verification;
use crate::weights::WeightSpec;

/// Slack allowed when comparing an optimal norm with its lower bound.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "opa",
    version,
    about = "Optimal polynomial approximants to 1/f in weighted l^p spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Solve for one approximant and write it as JSON.
    Compute {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        space: SpaceArgs,
        /// Degree of the approximant.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve over a geometric degree grid `a..b` and write the rates CSV.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        space: SpaceArgs,
        /// Degree range `a..b` (doubling grid) or a single degree.
        #[arg(long)]
        n: String,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Report wall-clock milliseconds instead of 0.
        #[arg(long)]
        timing: bool,
    },
    /// Run the cross-solver and inequality checks and write a JSON report.
    Verify {
        /// Seed for the randomized probes.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form approximant to 1/(1 - z^d).
    ClosedForm {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Predicted decay regime and cyclicity for a power weight.
    Classify {
        #[arg(long)]
        p: String,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run a JSON configuration file.
    Run { config: PathBuf },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("problem").required(true).args(["roots", "coeffs", "problem_file"])))]
pub struct ProblemArgs {
    /// Zeros on the unit circle as `angle:mult,...`, e.g. `0:1,pi/2:2`;
    /// `f` is scaled so that `f(0) = 1`.
    #[arg(long)]
    pub roots: Option<String>,
    /// Coefficients of `f` from degree 0 up, e.g. `1,-1` or `1,0.5+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// JSON problem: `{"coeffs":[[re,im],...]}` or `{"circle_roots":[...]}`.
    #[arg(long)]
    pub problem_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("weight").required(true).args(["alpha", "weight_file"])))]
pub struct SpaceArgs {
    /// Exponent `p` in [1, inf]; `inf` is accepted.
    #[arg(long)]
    pub p: String,
    /// Power weight exponent: `w_k = (k+1)^alpha`.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// JSON weight: `{"kind":"power","alpha":0.5}` or
    /// `{"kind":"table","values":[...],"tail":"power"}`.
    #[arg(long)]
    pub weight_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// `convex`, `hilbert`, `structural`, `flat`, `closed` or `composite`.
    /// `compute` defaults to `convex` (`flat` at `p = 1, inf`); `sweep`
    /// picks the closed form, the Hilbert solve or the flat solver where
    /// they apply and `convex` otherwise.
    #[arg(long)]
    pub solver: Option<SolverKind>,
    /// Gradient tolerance of the convex solver and gap tolerance of the
    /// flat solver.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Newton step budget of the iterative solvers.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Start the convex solver from `P = 0`.
    #[arg(long)]
    pub cold_start: bool,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed run, with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<OpaError> for CliError {
    fn from(e: OpaError) -> Self {
        let code = match &e {
            OpaError::Argument(_)
            | OpaError::Parse(_)
            | OpaError::Admissibility(_)
            | OpaError::UnsupportedExponent(_)
            | OpaError::Inapplicable(_)
            | OpaError::NTooSmall { .. } => 2,
            OpaError::Sweep(_) => 3,
            OpaError::Internal(_) => 4,
            OpaError::InexactDivision { .. } | OpaError::IllConditioned { .. } => 1,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new(1, format!("i/o error: {e}"))
    }
}

/// Turns parsed arguments into a validated configuration.
pub fn to_config(cli: Cli) -> Result<RunConfig, CliError> {
    let output = |out: OutArgs, format: Format| OutputSpec {
        path: out.out,
        format,
    };
    let config = match cli.command {
        Commands::Run { config } => return Ok(RunConfig::from_file(&config)?),
        Commands::Compute {
            problem,
            space,
            n,
            solve,
            out,
        } => RunConfig {
            command: Command::Compute,
            problem: Some(problem.spec()?),
            space: Some(space.spec()?),
            n: Some(DegreeSpec::Single(n)),
            d: None,
            solver: solve.solver,
            opts: solve.opts(),
            output: output(out, Format::Json),
            seed: None,
            timing: false,
        },
        Commands::Sweep {
            problem,
            space,
            n,
            solve,
            out,
            timing,
        } => RunConfig {
            command: Command::Sweep,
            problem: Some(problem.spec()?),
            space: Some(space.spec()?),
            n: Some(DegreeSpec::parse(&n)?),
            d: None,
            solver: solve.solver,
            opts: solve.opts(),
            output: output(out, Format::Csv),
            seed: None,
            timing,
        },
        Commands::Verify { seed, out } => RunConfig {
            command: Command::Verify,
            problem: None,
            space: None,
            n: None,
            d: None,
            solver: None,
            opts: SolverOpts::default(),
            output: output(out, Format::Json),
            seed,
            timing: false,
        },
        Commands::ClosedForm { d, space, n, out } => RunConfig {
            command: Command::ClosedForm,
            problem: None,
            space: Some(space.spec()?),
            n: Some(DegreeSpec::Single(n)),
            d: Some(d),
            solver: None,
            opts: SolverOpts::default(),
            output: output(out, Format::Json),
            seed: None,
            timing: false,
        },
        Commands::Classify { p, alpha, json } => RunConfig {
            command: Command::Classify,
            problem: None,
            space: Some(SpaceSpec {
                p: p.parse()?,
                weight: WeightSpec::Power { alpha },
            }),
            n: None,
            d: None,
            solver: None,
            opts: SolverOpts::default(),
            output: OutputSpec {
                path: None,
                format: if json { Format::Json } else { Format::Text },
            },
            seed: None,
            timing: false,
        },
    };
    config.validate()?;
    Ok(config)
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, CliError> {
        Ok(match (&self.roots, &self.coeffs, &self.problem_file) {
            (Some(r), _, _) => ProblemSpec::from_roots(r)?,
            (_, Some(c), _) => ProblemSpec::from_coeffs(c)?,
            (_, _, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::new(2, format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::new(2, format!("problem file {}: {e}", path.display()))
                })?
            }
            _ => {
                return Err(CliError::new(
                    2,
                    "one of --roots, --coeffs, --problem-file is required",
                ))
            }
        })
    }
}

impl SpaceArgs {
    fn spec(&self) -> Result<SpaceSpec, CliError> {
        let p: Exponent = self.p.parse()?;
        let weight = match (&self.alpha, &self.weight_file) {
            (Some(alpha), _) => WeightSpec::Power { alpha: *alpha },
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::new(2, format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::new(2, format!("weight file {}: {e}", path.display())))?
            }
            (None, None) => {
                return Err(CliError::new(
                    2,
                    "one of --alpha, --weight-file is required",
                ))
            }
        };
        Ok(SpaceSpec { p, weight })
    }
}

impl SolveArgs {
    fn opts(&self) -> SolverOpts {
        let mut opts = SolverOpts::default();
        if let Some(tol) = self.tol {
            opts.grad_tol = tol;
            opts.flat_tol = tol;
        }
        if let Some(iters) = self.max_iters {
            opts.max_iters = iters;
        }
        opts.warm_start = !self.cold_start;
        opts
    }
}

/// Executes a configuration, writing its artifact before reporting
/// non-convergence or inconsistency.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    match config.command {
        Command::Compute => compute(config),
        Command::Sweep => sweep(config),
        Command::Verify => verify(config),
        Command::ClosedForm => closed_form(config),
        Command::Classify => classify_cmd(config),
    }
}

fn open_output(spec: &OutputSpec) -> Result<Box<dyn Write>, CliError> {
    Ok(match &spec.path {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::new(1, format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Pretty JSON with every float written to 17 significant digits.
struct PreciseFormatter(PrettyFormatter<'static>);

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with full float precision.
pub fn to_precise_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    buf
}

fn write_json<T: Serialize>(spec: &OutputSpec, value: &T) -> Result<(), CliError> {
    let mut out = open_output(spec)?;
    out.write_all(&to_precise_json(value))?;
    out.flush()?;
    Ok(())
}

fn pairs(p: &Poly) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

#[derive(Serialize)]
struct ComputeReport {
    n: usize,
    p: Exponent,
    weight: WeightSpec,
    solver: SolverKind,
    f: Vec<[f64; 2]>,
    coefficients: Vec<[f64; 2]>,
    residual: Vec<[f64; 2]>,
    optimal_norm: f64,
    norm_p_power: f64,
    norm_sq: f64,
    lower_bound: Option<f64>,
    ortho_residual_max: Option<f64>,
    iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    structural: Option<StructuralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flat: Option<FlatReport>,
}

#[derive(Serialize)]
struct StructuralReport {
    /// `(i, j, A_ij)` with `i` the zero-based root index.
    constants: Vec<(usize, usize, [f64; 2])>,
    constant_sum: [f64; 2],
    fit_residual: f64,
    system_residual: f64,
}

#[derive(Serialize)]
struct FlatReport {
    optimal_value: f64,
    gap_bound: f64,
    non_unique: bool,
    /// `(coefficient, imaginary, lower, upper)` for every probe along which
    /// the objective stays flat.
    flat_directions: Vec<(usize, bool, f64, f64)>,
}

fn compute(config: &RunConfig) -> Result<(), CliError> {
    let problem = config.problem.as_ref().expect("validated").resolve()?;
    let space = config.space.as_ref().expect("validated");
    let sp = space.build()?;
    let n = config.n.as_ref().expect("validated").single()?;
    let opts = &config.opts;
    let kind = match config.solver {
        Some(kind) => kind,
        None if sp.p().is_flat() => SolverKind::Flat,
        None => SolverKind::Convex,
    };

    let mut structural = None;
    let mut flat = None;
    let result: OpaResult = match kind {
        SolverKind::Structural => {
            let spec = problem
                .spec
                .as_ref()
                .ok_or_else(|| CliError::new(2, "the structural solver needs --roots"))?;
            let (res, fit) = solve_structural(spec, n, &sp, None, opts)?;
            let sum: Complex64 = fit.constant_sum();
            structural = Some(StructuralReport {
                constants: fit
                    .constants
                    .iter()
                    .map(|(&(i, j), a)| (i, j, [a.re, a.im]))
                    .collect(),
                constant_sum: [sum.re, sum.im],
                fit_residual: fit.fit_residual,
                system_residual: fit.system_residual,
            });
            res
        }
        SolverKind::Flat => {
            let (res, diag) = solve_flat(&problem.f, n, &sp, opts)?;
            flat = Some(FlatReport {
                optimal_value: diag.optimal_value,
                gap_bound: diag.gap_bound,
                non_unique: diag.non_unique,
                flat_directions: diag
                    .flat_directions()
                    .map(|p| (p.coefficient, p.imaginary, p.lower, p.upper))
                    .collect(),
            });
            res
        }
        other => {
            let sweep_problem = SweepProblem {
                f: problem.f.clone(),
                spec: problem.spec.clone(),
            };
            sweep_problem.solve(n, &sp, SweepSolver::Fixed(other), opts)?
        }
    };
    let bound = match &problem.spec {
        Some(spec) => lower_bound_spec(spec, n, &sp).ok(),
        None => lower_bound(&problem.f, n, &sp).ok(),
    };
    let report = ComputeReport {
        n,
        p: sp.p(),
        weight: space.weight.clone(),
        solver: result.solver,
        f: pairs(&problem.f),
        coefficients: pairs(&result.approximant),
        residual: pairs(&result.residual),
        optimal_norm: result.optimal_norm,
        norm_p_power: result.norm_p_power(),
        norm_sq: result.optimal_norm * result.optimal_norm,
        lower_bound: bound,
        ortho_residual_max: result.ortho_residual_max,
        iterations: result.iterations,
        converged: result.converged,
        structural,
        flat,
    };
    write_json(&config.output, &report)?;
    if !result.converged {
        return Err(CliError::new(
            3,
            format!("solver {} did not converge at n = {n}", result.solver),
        ));
    }
    if let Some(lb) = bound {
        if result.optimal_norm < lb - BOUND_SLACK {
            return Err(CliError::new(
                4,
                format!(
                    "optimal norm {:e} is below the lower bound {lb:e}",
                    result.optimal_norm
                ),
            ));
        }
    }
    Ok(())
}

fn sweep(config: &RunConfig) -> Result<(), CliError> {
    let problem = config.problem.as_ref().expect("validated").resolve()?;
    let sp = config.space.as_ref().expect("validated").build()?;
    let grid = config.n.as_ref().expect("validated").grid()?;
    let choice = config.solver.map_or(SweepSolver::Auto, SweepSolver::Fixed);
    let sweep_problem = SweepProblem {
        f: problem.f,
        spec: problem.spec,
    };
    let points = run_sweep(&sweep_problem, &sp, &grid, choice, &config.opts)?;

    let mut out = open_output(&config.output)?;
    write_csv(&points, &sp, config.timing, &mut out)?;
    out.flush()?;
    drop(out);

    let prediction = sp.weight().alpha().map(|alpha| classify(sp.p(), alpha));
    let min_n = if grid.iter().filter(|&&n| n >= DEFAULT_MIN_N).count() >= 2 {
        DEFAULT_MIN_N
    } else {
        0
    };
    if let Ok(fit) = fit_rate(&points, min_n, prediction) {
        eprintln!(
            "fitted exponent {:.4} (r^2 {:.4}) over n >= {min_n}",
            fit.fitted_exponent, fit.r_squared
        );
        if let Some(ratio) = fit.band_ratio {
            eprintln!("log band ratio {ratio:.4}");
        }
    }

    let failed: Vec<usize> = points
        .iter()
        .filter(|pt| !pt.result.converged)
        .map(|pt| pt.n)
        .collect();
    if !failed.is_empty() {
        return Err(OpaError::Sweep(failed).into());
    }
    if let Some(pt) = points.iter().find(|pt| {
        pt.lower_bound
            .is_some_and(|lb| pt.result.optimal_norm < lb - BOUND_SLACK)
    }) {
        return Err(CliError::new(
            4,
            format!("optimal norm below the lower bound at n = {}", pt.n),
        ));
    }
    Ok(())
}

fn verify(config: &RunConfig) -> Result<(), CliError> {
    let report = run_verification(config.seed.unwrap_or(0));
    write_json(&config.output, &report)?;
    for check in &report.checks {
        eprintln!(
            "{} {}: max deviation {:e} (tolerance {:e}, {} cases)",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.max_deviation,
            check.tolerance,
            check.cases
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::new(4, "verification failed"))
    }
}

#[derive(Serialize)]
struct ClosedFormReport {
    d: usize,
    n: usize,
    p: Exponent,
    weight: WeightSpec,
    formula: &'static str,
    reduced_order: usize,
    delta_q: Vec<f64>,
    coefficients: Vec<[f64; 2]>,
    optimal_norm: f64,
    norm_p_power: f64,
}

fn closed_form(config: &RunConfig) -> Result<(), CliError> {
    let space = config.space.as_ref().expect("validated");
    let sp = space.build()?;
    let n = config.n.as_ref().expect("validated").single()?;
    let d = config.d.unwrap_or(1);
    let cf = ClosedForm::compute(d, n, &sp)?;
    let report = ClosedFormReport {
        d,
        n,
        p: sp.p(),
        weight: space.weight.clone(),
        formula: "P_n(z) = sum_{t=0}^{N} (1 - D_t / D_{N+1}) z^{d t}, N = floor(n/d), \
                  D_k = sum_{s<=k} w_{d s}^{-1/(p-1)}; ||1 - P_n f||^p = D_{N+1}^{1-p}",
        reduced_order: cf.reduced_order,
        delta_q: cf.delta_q.clone(),
        coefficients: pairs(&cf.result.approximant),
        optimal_norm: cf.result.optimal_norm,
        norm_p_power: cf.norm_p_power,
    };
    write_json(&config.output, &report)
}

#[derive(Serialize)]
struct ClassifyReport {
    p: Exponent,
    alpha: f64,
    cyclic: bool,
    verdict: &'static str,
    regime: Regime,
    /// `norm` at `p = inf`, otherwise `norm^p`.
    quantity: &'static str,
}

fn classify_cmd(config: &RunConfig) -> Result<(), CliError> {
    let space = config.space.as_ref().expect("validated");
    let WeightSpec::Power { alpha } = space.weight else {
        return Err(CliError::new(2, "classification needs a power weight"));
    };
    let prediction = classify(space.p, alpha);
    let quantity = if space.p == Exponent::Infinity {
        "norm"
    } else {
        "norm^p"
    };
    if config.output.format == Format::Json {
        return write_json(
            &config.output,
            &ClassifyReport {
                p: space.p,
                alpha,
                cyclic: prediction.cyclic,
                verdict: prediction.verdict(),
                regime: prediction.regime,
                quantity,
            },
        );
    }
    let regime = match prediction.regime {
        Regime::PowerDecay { exponent } => format!("{quantity} ~ (n+d+1)^({exponent})"),
        Regime::LogDecay { log_exponent } => format!("{quantity} ~ log(n+d+2)^({log_exponent})"),
        Regime::Stagnation => format!("{quantity} bounded below (no decay)"),
    };
    let mut out = open_output(&config.output)?;
    writeln!(out, "{}", prediction.verdict())?;
    writeln!(out, "{regime}")?;
    out.flush()?;
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match to_config(cli).and_then(|config| run(&config)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precise_json_uses_seventeen_digits() {
        let text = String::from_utf8(to_precise_json(&vec![1.0 / 3.0, 2.0])).unwrap();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
        assert!(text.contains("2.0000000000000000e0"), "{text}");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![1.0 / 3.0, 2.0]);
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(
            main_with_args(["opa", "classify", "--p", "x", "--alpha", "0"]),
            2
        );
        assert_eq!(
            main_with_args(["opa", "compute", "--p", "2", "--alpha", "0", "--n", "1"]),
            2
        );
    }
}
