//! `combed`: spectra, filters, classification and combing over files.
//!
//! Grids are CSV (`theta,value,defined`, or `x,...` on a physical domain)
//! with an optional `<file>.json` sidecar; coefficient sequences are JSON.
//! Exit codes: 0 ok, 2 usage or validation error, 3 numeric failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use combed::catalog::{self, CatalogEntry, ClassifiedBy};
use combed::classify::{
    classify_coefficients, classify_grid, classify_pointwise, comb_by_disk, comb_by_filter_limit,
    comb_coefficients_by_fourier, comb_grid, ClassificationReport, DiskCombOptions, FourierComb, FourierOptions,
};
use combed::disk::BoundaryEvaluator;
use combed::grid::{nodes, GridFunction};
use combed::io::to_json_string;
use combed::realfilter::{kernel_filter_grid, multiplier_filter};
use combed::rescale::IntervalMap;
use combed::spectrum::{compute_coefficients, QuadratureOptions, DEFAULT_COEFFICIENT_TOL, DEFAULT_N};
use combed::{CoefficientSequence, Error};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "combed", version, about = "Low-pass filtering and combing of generalized functions on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fourier coefficients of a grid or catalog entry, as JSON.
    Spectrum(SpectrumArgs),
    /// First-order low-pass filter; output has the input's format.
    Filter(FilterArgs),
    /// Combed/ragged report, as JSON.
    Classify(ClassifyArgs),
    /// Combed representative on a grid, as CSV.
    Comb(CombArgs),
    /// Disk representation on a circle or its boundary limit, as CSV.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Grid CSV (with optional `<file>.json` sidecar) or coefficient JSON.
    #[arg(long, conflicts_with = "catalog")]
    input: Option<PathBuf>,
    /// Catalog entry name.
    #[arg(long, required_unless_present = "input")]
    catalog: Option<String>,
    #[command(flatten)]
    params: CatalogParams,
    /// Physical interval `a,b` for grid coordinates.
    #[arg(long, value_parser = parse_domain)]
    domain: Option<IntervalMap>,
    /// Write here instead of standard output (grids also get a sidecar).
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Catalog parameters; each entry accepts only its own.
#[derive(Args)]
struct CatalogParams {
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    /// Derivative order of `delta_derivative`.
    #[arg(long)]
    order: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    left: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    right: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    at_jump: Option<f64>,
    /// Base entry of `spiked`.
    #[arg(long)]
    base: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    point: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    value: Option<f64>,
}

impl CatalogParams {
    fn to_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(key.to_string(), v);
            }
        };
        put("theta0", self.theta0.map(Value::from));
        put("n", self.order.map(Value::from));
        put("c", self.c.map(Value::from));
        put("k", self.k.map(Value::from));
        put("left", self.left.map(Value::from));
        put("right", self.right.map(Value::from));
        put("at_jump", self.at_jump.map(Value::from));
        put("base", self.base.as_ref().map(|b| json!({ "name": b })));
        put("point", self.point.map(Value::from));
        put("value", self.value.map(Value::from));
        m
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Truncation N.
    #[arg(long, default_value_t = DEFAULT_N, value_parser = at_least_one())]
    n: usize,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_COEFFICIENT_TOL, value_parser = positive)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterKind {
    Multiplier,
    Kernel,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Half-width of the window (physical units on a domain grid).
    #[arg(long, value_parser = positive)]
    eps: f64,
    /// Defaults to `multiplier` for coefficients and `kernel` for grids.
    #[arg(long)]
    method: Option<FilterKind>,
    /// Truncation N for catalog entries.
    #[arg(long, default_value_t = DEFAULT_N, value_parser = at_least_one())]
    n: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifyKind {
    /// Filter limit of the function against its node values.
    Pointwise,
    /// Local reconstruction from neighbouring samples (grids only).
    Grid,
    /// Certificate for coefficient objects.
    Coefficients,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Decreasing filter widths for the limit, comma separated.
    #[arg(long, value_parser = parse_list, default_value = "0.2,0.1,0.05,0.025")]
    eps_schedule: List,
    #[arg(long, default_value_t = combed::classify::DEFAULT_TOL, value_parser = positive)]
    tol: f64,
    /// Number of nodes for catalog entries.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Defaults to `grid` for grids and to the entry's own test for catalog input.
    #[arg(long)]
    method: Option<ClassifyKind>,
    /// Truncation N for catalog coefficient objects.
    #[arg(long, default_value_t = DEFAULT_N, value_parser = at_least_one())]
    n: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CombKind {
    FilterLimit,
    Fourier,
    Disk,
}

#[derive(Args)]
struct CombArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value_t = CombKind::FilterLimit)]
    method: CombKind,
    /// Truncation N for the Fourier and disk methods.
    #[arg(long, default_value_t = DEFAULT_N, value_parser = at_least_one())]
    n: usize,
    /// Number of output nodes (grid input keeps its own).
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long, value_parser = parse_list, default_value = "0.2,0.1,0.05,0.025")]
    eps_schedule: List,
    /// Recovery tolerance for grid input.
    #[arg(long, default_value_t = combed::classify::DEFAULT_TOL, value_parser = positive)]
    tol: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Radius of the evaluation circle.
    #[arg(long, conflicts_with = "rho_schedule", required_unless_present = "rho_schedule")]
    rho: Option<f64>,
    /// Increasing radii below 1 for the boundary limit, comma separated.
    #[arg(long, value_parser = parse_list)]
    rho_schedule: Option<List>,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Truncation N for catalog entries.
    #[arg(long, default_value_t = DEFAULT_N, value_parser = at_least_one())]
    n: usize,
}

fn at_least_one() -> clap::builder::RangedU64ValueParser<usize> {
    clap::builder::RangedU64ValueParser::new().range(1..)
}

fn positive(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// A comma-separated list given as one flag value.
#[derive(Clone, Debug)]
struct List(Vec<f64>);

fn parse_list(s: &str) -> Result<List, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

fn parse_domain(s: &str) -> Result<IntervalMap, String> {
    match parse_list(s)?.0.as_slice() {
        &[a, b] => IntervalMap::new(a, b).map_err(|e| e.to_string()),
        _ => Err("expected `a,b`".to_string()),
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

enum Input {
    Grid(GridFunction),
    Coefficients(CoefficientSequence),
    Catalog(CatalogEntry),
}

impl SourceArgs {
    fn load(&self) -> Outcome<Input> {
        let params = self.params.to_map();
        match (&self.input, &self.catalog) {
            (Some(path), None) => {
                if !params.is_empty() {
                    return usage("catalog parameters need --catalog");
                }
                if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
                    if self.domain.is_some() {
                        return usage("--domain applies to grid input");
                    }
                    let text = std::fs::read_to_string(path)?;
                    let c = serde_json::from_str(&text).map_err(Error::from)?;
                    Ok(Input::Coefficients(c))
                } else {
                    Ok(Input::Grid(GridFunction::load_with_domain(path, self.domain)?))
                }
            }
            (None, Some(name)) => Ok(Input::Catalog(catalog::make(name, &params)?)),
            _ => usage("give exactly one of --input and --catalog"),
        }
    }

    fn emit_text(&self, text: &str) -> Outcome {
        match &self.output {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_json<T: serde::Serialize>(&self, value: &T) -> Outcome {
        self.emit_text(&to_json_string(value)?)
    }

    fn emit_grid(&self, grid: &GridFunction) -> Outcome {
        let grid = match (self.domain, grid.domain()) {
            (Some(map), None) => grid.clone().with_domain(map),
            _ => grid.clone(),
        };
        match &self.output {
            Some(path) => grid.save(path)?,
            None => grid.write_csv(std::io::stdout().lock())?,
        }
        Ok(())
    }
}

fn spectrum(args: &SpectrumArgs) -> Outcome {
    let opts = QuadratureOptions {
        tol: args.tol,
        ..QuadratureOptions::default()
    };
    let c = match args.source.load()? {
        Input::Catalog(e) => e.coefficients(args.n)?,
        Input::Grid(g) => compute_coefficients(&g.to_evaluator(), args.n, &opts)?.coefficients,
        Input::Coefficients(_) => return usage("spectrum takes a grid or a catalog entry"),
    };
    args.source.emit_json(&c)
}

fn filter(args: &FilterArgs) -> Outcome {
    match args.source.load()? {
        Input::Grid(g) => {
            if args.method == Some(FilterKind::Multiplier) {
                return usage("grids are filtered with the kernel method");
            }
            let eps = match g.domain() {
                Some(map) => map.epsilon_to_canonical(args.eps)?,
                None => args.eps,
            };
            args.source.emit_grid(&kernel_filter_grid(&g, eps)?)
        }
        input => {
            if args.method == Some(FilterKind::Kernel) {
                return usage("coefficients are filtered with the multiplier method");
            }
            let c = match input {
                Input::Catalog(e) => e.coefficients(args.n)?,
                Input::Coefficients(c) => c,
                Input::Grid(_) => unreachable!("handled above"),
            };
            args.source.emit_json(&multiplier_filter(&c, args.eps)?)
        }
    }
}

/// Reports on a physical domain keep the `theta` key but hold physical `x`.
fn to_physical(mut report: ClassificationReport, map: IntervalMap) -> ClassificationReport {
    for node in &mut report.nodes {
        node.theta = map.from_canonical(node.theta).unwrap_or(map.a());
    }
    report.params.insert("domain".into(), json!([map.a(), map.b()]));
    report
}

fn classify(args: &ClassifyArgs) -> Outcome {
    combed::realfilter::check_schedule(&args.eps_schedule.0, std::f64::consts::PI)?;
    let pointwise = |f: &combed::EvaluatorFunction, n: usize| {
        classify_pointwise(f, n, &args.eps_schedule.0, args.tol)
    };
    let report = match args.source.load()? {
        Input::Grid(g) => {
            let report = match args.method.unwrap_or(ClassifyKind::Grid) {
                ClassifyKind::Grid => classify_grid(&g, args.tol)?,
                ClassifyKind::Pointwise => pointwise(&g.to_evaluator(), g.len())?,
                ClassifyKind::Coefficients => return usage("grid input has no coefficients to certify"),
            };
            match g.domain() {
                Some(map) => to_physical(report, map),
                None => report,
            }
        }
        Input::Coefficients(c) => match args.method {
            None | Some(ClassifyKind::Coefficients) => classify_coefficients(&c).into_report(),
            Some(_) => return usage("coefficient input is classified with the coefficients method"),
        },
        Input::Catalog(e) => {
            let by = match (args.method, e.known_classification().1) {
                (Some(ClassifyKind::Grid), _) => return usage("the grid method needs grid input"),
                (Some(ClassifyKind::Pointwise), _) | (None, ClassifiedBy::Pointwise) => ClassifiedBy::Pointwise,
                (Some(ClassifyKind::Coefficients), _) | (None, ClassifiedBy::Coefficients) => {
                    ClassifiedBy::Coefficients
                }
            };
            match by {
                ClassifiedBy::Pointwise => match e.evaluator() {
                    Some(f) => pointwise(&f, args.grid)?,
                    None => return usage(format!("`{}` has no point values", e.name())),
                },
                ClassifiedBy::Coefficients => classify_coefficients(&e.coefficients(args.n)?).into_report(),
            }
        }
    };
    args.source.emit_json(&report)
}

fn warn_if_divergent(r: &FourierComb) {
    if r.non_convergent {
        log::warn!(
            "the Fourier series has not settled: sup |S_N - S_N/2| = {:e}",
            r.diagnostic
        );
    }
}

fn fourier(c: &CoefficientSequence, n_grid: usize) -> Outcome<GridFunction> {
    let r = comb_coefficients_by_fourier(c, n_grid, &FourierOptions::default())?;
    warn_if_divergent(&r);
    Ok(r.grid)
}

fn comb(args: &CombArgs) -> Outcome {
    combed::realfilter::check_schedule(&args.eps_schedule.0, std::f64::consts::PI)?;
    let disk = DiskCombOptions::default();
    let out = match (args.source.load()?, args.method) {
        (Input::Grid(g), CombKind::FilterLimit) => comb_grid(&g, args.tol)?,
        (Input::Grid(g), method) => {
            let f = g.to_evaluator();
            let c = compute_coefficients(&f, args.n, &QuadratureOptions::default())?.coefficients;
            let combed = match method {
                CombKind::Fourier => fourier(&c, g.len())?,
                _ => comb_by_disk(&c, g.len(), &disk)?,
            };
            let combed = combed.with_singular_points(g.singular_points().iter().copied());
            match g.domain() {
                Some(map) => combed.with_domain(map),
                None => combed,
            }
        }
        (Input::Coefficients(_), CombKind::FilterLimit) => {
            return usage("the filter-limit method needs point values; use fourier or disk")
        }
        (Input::Coefficients(c), CombKind::Fourier) => fourier(&c, args.grid)?,
        (Input::Coefficients(c), CombKind::Disk) => comb_by_disk(&c, args.grid, &disk)?,
        (Input::Catalog(e), CombKind::FilterLimit) => match e.evaluator() {
            Some(f) => comb_by_filter_limit(&f, args.grid, &args.eps_schedule.0)?,
            None => return usage(format!("`{}` has no point values; use fourier or disk", e.name())),
        },
        (Input::Catalog(e), CombKind::Fourier) => fourier(&e.coefficients(args.n)?, args.grid)?,
        (Input::Catalog(e), CombKind::Disk) => comb_by_disk(&e.coefficients(args.n)?, args.grid, &disk)?,
    };
    args.source.emit_grid(&out)
}

fn eval(args: &EvalArgs) -> Outcome {
    let c = match args.source.load()? {
        Input::Coefficients(c) => c,
        Input::Catalog(e) => e.coefficients(args.n)?,
        Input::Grid(_) => return usage("eval takes coefficients or a catalog entry"),
    };
    if args.grid < 2 {
        return usage("--grid needs at least two nodes");
    }
    let ev = BoundaryEvaluator::new(&c);
    let thetas = nodes(args.grid);
    let (values, note): (Vec<Option<f64>>, String) = match (args.rho, &args.rho_schedule) {
        (Some(rho), _) => {
            if !(0.0..1.0).contains(&rho) {
                return usage(format!("--rho must lie in [0, 1), got {rho}"));
            }
            let values = thetas
                .iter()
                .map(|&t| ev.complex_at(t, rho).map(|z| Some(z.re)))
                .collect::<Result<_, _>>()?;
            (values, format!("disk representation at rho = {rho}"))
        }
        (None, Some(rhos)) => {
            let deltas: Vec<f64> = rhos.0.iter().map(|r| 1.0 - r).collect();
            let mut values = Vec::with_capacity(thetas.len());
            for &t in &thetas {
                values.push(match ev.boundary_value(t, &deltas) {
                    Ok(r) => Some(r.value),
                    Err(Error::DivergenceDetected { .. }) => None,
                    Err(e) => return Err(e.into()),
                });
            }
            (values, "boundary limit of the disk representation".to_string())
        }
        (None, None) => return usage("give --rho or --rho-schedule"),
    };
    let defined: Vec<bool> = values.iter().map(Option::is_some).collect();
    let grid = GridFunction::new(values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(), defined)?
        .with_note(note);
    args.source.emit_grid(&grid)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Filter(a) => filter(a),
        Command::Classify(a) => classify(a),
        Command::Comb(a) => comb(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
