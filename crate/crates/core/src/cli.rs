//! Command-line interface: basis construction, correlator evaluation,
//! sampling, Hermitean-limit sweeps and verification suites.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::correlators::{
    char_poly_expectation, default_sequence, hermitean_limit_sweep, partition_function, perturb_masses, Correlator,
    CorrelatorResult, Observable, RealCorrelator,
};
use crate::error::{Error, Result};
use crate::numerics::{build_grid, quad2d, QuadratureRule};
use crate::oracle::{mcmc_sample, McmcOptions};
use crate::skewortho::{chgse_skew_polys, chgse_unit_norms, gse_skew_polys, SkewBasis};
use crate::verify::{
    basis_residual, char_identities, hermitean_limit, kernel_basis_independence, mcmc_consistency,
    pfaffian_identities, theorem1, HermiteanOptions, McmcSuiteOptions, SuiteReport, Theorem1Options,
};
use crate::weights::{chgse_weight, gse_weight, projected_chgse, projected_gse, Family, RealWeightSpec, WeightSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "sympf", version, about = "Pfaffian correlators of complex symplectic random matrix ensembles")]
pub struct Cli {
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// JSON file whose keys override command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a closed-form skew-orthogonal basis as JSON.
    Skewpoly(SkewpolyArgs),
    /// Evaluate k-point correlators at points or on a grid.
    Correlator(CorrelatorArgs),
    /// Expectation value of a product of characteristic polynomials.
    Charpoly(MassArgs),
    /// Massive partition function.
    Partition(MassArgs),
    /// Run a verification suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Sample eigenvalue configurations with Metropolis updates.
    Sample(SampleArgs),
    /// Follow an observable towards the Hermitean limit.
    Sweep(SweepArgs),
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EnsembleArgs {
    /// gse or chgse.
    #[arg(long, default_value = "gse", value_parser = parse_family)]
    pub family: Family,
    /// Number of eigenvalue pairs.
    #[arg(long = "n", default_value_t = 1)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Non-Hermiticity of gse, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Non-Hermiticity of chgse, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    /// Topological index of chgse.
    #[arg(long, default_value_t = 0)]
    pub nu: usize,
}

impl EnsembleArgs {
    fn check_family(&self) -> Result<()> {
        if self.family == Family::Custom {
            return Err(Error::Unsupported("custom weights are available through the library only".into()));
        }
        Ok(())
    }

    pub fn weight(&self) -> Result<WeightSpec> {
        self.check_family()?;
        match self.family {
            Family::Gse => gse_weight(self.n, self.tau),
            _ => chgse_weight(self.n, self.mu, self.nu),
        }
    }

    pub fn basis(&self, count: usize) -> Result<SkewBasis> {
        self.check_family()?;
        match self.family {
            Family::Gse => gse_skew_polys(self.n, self.tau, count),
            _ => chgse_skew_polys(self.n, self.mu, self.nu, count),
        }
    }

    /// Real-line weight and basis of the Hermitean limit.
    pub fn projected(&self, count: usize) -> Result<(RealWeightSpec, SkewBasis)> {
        self.check_family()?;
        match self.family {
            Family::Gse => Ok((projected_gse(self.n), gse_skew_polys(self.n, 1.0, count)?)),
            _ => Ok((projected_chgse(self.n, self.nu), chgse_skew_polys(self.n, 0.0, self.nu, count)?)),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SkewpolyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Number of polynomials q_0 .. q_{count-1}.
    #[arg(long, default_value_t = 4)]
    pub count: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check skew-orthogonality by quadrature and print the residual.
    #[arg(long)]
    #[serde(default)]
    pub verify: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CorrelatorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Number of arguments of the correlator.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Points `a+bi,...`; for k > 1, `;` separates k-tuples.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// `xmin:xmax:nx,ymin:ymax:ny` (projected: `xmin:xmax:nx`), k = 1 only.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Masses `a+bi,...`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    #[serde(default)]
    pub masses: String,
    /// Real-eigenvalue correlators of the Hermitean limit.
    #[arg(long)]
    #[serde(default)]
    pub projected: bool,
    /// Spread coincident masses apart by this spacing.
    #[arg(long)]
    pub perturb_masses: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MassArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Masses `a+bi,...`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    #[serde(default)]
    pub masses: String,
    /// Spread coincident masses apart by this spacing.
    #[arg(long)]
    pub perturb_masses: Option<f64>,
    /// Evaluate in the Hermitean limit (tau = 1, mu = 0).
    #[arg(long)]
    #[serde(default)]
    pub projected: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Theorem1,
    Theorem2,
    Mcmc,
    Identities,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Overrides the suite's default tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Sweeps per chain (mcmc suite).
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: usize,
    /// Largest N sampled (mcmc suite).
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Real masses.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    #[serde(default)]
    pub masses: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Density,
    Charpoly,
    Norms,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "gse", value_parser = parse_family)]
    pub family: Family,
    #[arg(long = "n", default_value_t = 1)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub nu: usize,
    /// Parameter sequence; defaults to 0.9,0.99,0.999 (gse) or 0.3,0.1,0.03 (chgse).
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, value_enum, default_value_t = ObservableKind::Density)]
    pub observable: ObservableKind,
    /// Points of the density comparison, `xmin:xmax:nx` or a list.
    #[arg(long, default_value = "-3:3:13", allow_hyphen_values = true)]
    pub xs: String,
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    pub masses: String,
    #[arg(long, default_value_t = 3)]
    pub pairs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with exponents such as `1e-3-2e-2i`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Validation(format!("cannot parse complex number '{s}' (expected a+bi)"));
    if t.is_empty() {
        return Err(bad());
    }
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (num(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => num(x)?,
    };
    Ok(Complex64::new(re, im))
}

pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(parse_complex).collect()
}

fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::Validation(format!("cannot parse real number '{p}'"))))
        .collect()
}

/// `min:max:n` as `n` equally spaced values including both ends.
pub fn parse_axis(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Validation(format!("cannot parse axis '{s}' (expected min:max:n)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// `xmin:xmax:nx,ymin:ymax:ny` as two axes.
pub fn parse_grid(s: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::Validation(format!("cannot parse grid '{s}' (expected xmin:xmax:nx,ymin:ymax:ny)")))?;
    Ok((parse_axis(x)?, parse_axis(y)?))
}

fn parse_masses(s: &str, perturb: Option<f64>, chiral: bool) -> Result<Vec<Complex64>> {
    let m = parse_complex_list(s)?;
    Ok(match perturb {
        Some(eps) if eps > 0.0 => perturb_masses(&m, eps, chiral),
        Some(eps) => return Err(Error::Validation(format!("--perturb-masses must be positive, got {eps}"))),
        None => m,
    })
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Overlays `overrides` on the serialized `args`.
fn merge<T: Serialize + DeserializeOwned>(args: &T, overrides: &Map<String, Value>) -> Result<T> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(ref mut m) = v {
        for (k, val) in overrides {
            m.insert(k.clone(), val.clone());
        }
    }
    Ok(serde_json::from_value(v)?)
}

fn header(command: &str, config: &Value) -> String {
    format!("# sympf {VERSION}\n# command: {command}\n# config: {config}\n")
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn to_pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Entry point used by the binary: parses `args`, runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command on a pool of `--threads` workers.
pub fn run(cli: Cli) -> Result<i32> {
    let overrides = match &cli.config {
        Some(path) => match serde_json::from_str::<Value>(&fs::read_to_string(path)?)? {
            Value::Object(m) => m,
            _ => return Err(Error::Config(format!("{} must contain a JSON object", path.display()))),
        },
        None => Map::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cli.threads)))?;
    pool.install(|| match &cli.command {
        Command::Skewpoly(a) => cmd_skewpoly(&merge(a, &overrides)?),
        Command::Correlator(a) => cmd_correlator(&merge(a, &overrides)?),
        Command::Charpoly(a) => cmd_mass(&merge(a, &overrides)?, false),
        Command::Partition(a) => cmd_mass(&merge(a, &overrides)?, true),
        Command::Verify(a) => cmd_verify(&merge(a, &overrides)?),
        Command::Sample(a) => cmd_sample(&merge(a, &overrides)?),
        Command::Sweep(a) => cmd_sweep(&merge(a, &overrides)?),
    })
}

pub fn cmd_skewpoly(a: &SkewpolyArgs) -> Result<i32> {
    let e = &a.ensemble;
    let basis = e.basis(a.count)?;
    let mut out = match serde_json::to_value(basis.to_json())? {
        Value::Object(m) => m,
        _ => unreachable!("basis serializes to an object"),
    };
    out.insert("version".into(), json!(VERSION));
    out.insert("config".into(), serde_json::to_value(a)?);
    let mut code = 0;
    if a.verify {
        let pairs = a.count / 2;
        if pairs == 0 {
            return Err(Error::Size("--verify needs at least two polynomials".into()));
        }
        let residual = match e.family {
            Family::Gse => {
                let norms: Vec<f64> = basis.norms().iter().map(|r| r.re).collect();
                basis_residual(&basis.truncated(pairs), &e.weight()?, &norms)?
            }
            _ => basis_residual(
                &basis.truncated(pairs),
                &e.weight()?.unit_normalized(),
                &chgse_unit_norms(e.n, e.mu, e.nu, pairs)?,
            )?,
        };
        out.insert("max_residual".into(), json!(residual));
        eprintln!("max skew-orthogonality residual {residual:.3e} (tolerance {:.1e})", a.tolerance);
        if !(residual < a.tolerance) {
            code = 1;
        }
    }
    emit(a.out.as_deref(), &to_pretty(&Value::Object(out))?)?;
    Ok(code)
}

struct Evaluation {
    args: Vec<Vec<f64>>,
    results: Vec<CorrelatorResult>,
}

fn tuples<T: Clone>(list: Vec<T>, k: usize, what: &str) -> Result<Vec<Vec<T>>> {
    if list.is_empty() || !list.len().is_multiple_of(k) {
        return Err(Error::Validation(format!("{} {what} do not form {k}-tuples", list.len())));
    }
    Ok(list.chunks(k).map(<[T]>::to_vec).collect())
}

fn parse_point_tuples<T: Clone>(s: &str, k: usize, parse: impl Fn(&str) -> Result<Vec<T>>) -> Result<Vec<Vec<T>>> {
    if k == 1 {
        return tuples(parse(s)?, 1, "points");
    }
    s.split(';').map(|t| tuples(parse(t)?, k, "points").map(|mut v| v.remove(0))).collect::<Result<Vec<_>>>().and_then(
        |v| {
            if v.iter().any(|t| t.len() != k) {
                Err(Error::Validation(format!("every tuple needs {k} points")))
            } else {
                Ok(v)
            }
        },
    )
}

/// Trapezoid rule over a tensor grid of values stored x-major.
fn trapezoid(xs: &[f64], ys: &[f64], vals: &[f64]) -> f64 {
    let w = |v: &[f64], i: usize| -> f64 {
        if v.len() < 2 {
            return 0.0;
        }
        let left = if i > 0 { v[i] - v[i - 1] } else { 0.0 };
        let right = if i + 1 < v.len() { v[i + 1] - v[i] } else { 0.0 };
        0.5 * (left + right)
    };
    let mut acc = 0.0;
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            acc += w(xs, i) * w(ys, j) * vals[i * ys.len() + j];
        }
    }
    acc
}

fn diagnostics_summary(results: &[CorrelatorResult]) -> Value {
    let canc = results.iter().map(|r| r.diagnostics.cancellation).fold(1.0, f64::max);
    let den = results.first().map(|r| r.diagnostics.denominator_ratio).unwrap_or(1.0);
    let flagged = results.iter().filter(|r| !r.diagnostics.warnings.is_empty()).count();
    let mut warnings: Vec<String> = results.iter().flat_map(|r| r.diagnostics.warnings.clone()).collect();
    warnings.sort();
    warnings.dedup();
    warnings.truncate(10);
    json!({
        "max_cancellation": if canc.is_finite() { json!(canc) } else { json!("inf") },
        "points_with_warnings": flagged,
        "denominator_ratio": den,
        "warnings": warnings,
        "r_index": results.first().map(|r| r.r_index),
        "parity": results.first().map(|r| r.parity),
    })
}

pub fn cmd_correlator(a: &CorrelatorArgs) -> Result<i32> {
    let e = &a.ensemble;
    if a.k == 0 || a.k > e.n {
        return Err(Error::Validation(format!("need 1 <= k <= N, got k = {} and N = {}", a.k, e.n)));
    }
    let chiral = e.family == Family::Chgse;
    let masses = parse_masses(&a.masses, a.perturb_masses, chiral)?;
    let count = 2 * (e.n + masses.len() / 2) + 1;
    let config = serde_json::to_value(a)?;
    let mut meta = Map::new();
    meta.insert("version".into(), json!(VERSION));
    meta.insert("config".into(), config.clone());

    let (eval, grid_axes) = if a.projected {
        let (wb, basis) = e.projected(count)?;
        let corr = RealCorrelator::new(&basis, &wb, e.n, &masses)?;
        let (args, axes): (Vec<Vec<f64>>, Option<(Vec<f64>, Vec<f64>)>) = match (&a.points, &a.grid) {
            (Some(p), None) => (parse_point_tuples(p, a.k, parse_real_list)?, None),
            (None, Some(g)) if a.k == 1 => {
                let xs = parse_axis(g)?;
                (xs.iter().map(|&x| vec![x]).collect(), Some((xs, vec![])))
            }
            _ => return Err(Error::Validation("give either --points or (for k = 1) --grid".into())),
        };
        let results = args.par_iter().map(|xs| corr.eval(xs)).collect::<Result<Vec<_>>>()?;
        if a.k == 1 {
            // real-line normalization, split at the origin where chiral weights have a kink
            let (lo, hi) = wb.support;
            let mut total = 0.0;
            for (p, q) in [(lo.min(0.0), 0.0), (0.0, hi.max(0.0))] {
                if q > p {
                    let rule = QuadratureRule::new(p, q, 200)?;
                    for (&x, &h) in rule.nodes.iter().zip(&rule.weights) {
                        total += h * corr.eval(&[x])?.value.re;
                    }
                }
            }
            meta.insert("normalization".into(), json!({"integral": total, "expected": e.n, "relative_error": (total / e.n as f64 - 1.0).abs()}));
        }
        (Evaluation { args, results }, axes)
    } else {
        let w = e.weight()?;
        let basis = e.basis(count)?;
        let corr = Correlator::new(&basis, &w, e.n, &masses)?;
        let (points, axes): (Vec<Vec<Complex64>>, Option<(Vec<f64>, Vec<f64>)>) = match (&a.points, &a.grid) {
            (Some(p), None) => (parse_point_tuples(p, a.k, parse_complex_list)?, None),
            (None, Some(g)) if a.k == 1 => {
                let (xs, ys) = parse_grid(g)?;
                let pts = xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![Complex64::new(x, y)])).collect();
                (pts, Some((xs, ys)))
            }
            _ => return Err(Error::Validation("give either --points or (for k = 1) --grid".into())),
        };
        let results = points.par_iter().map(|z| corr.eval(z)).collect::<Result<Vec<_>>>()?;
        if a.k == 1 {
            let grid = build_grid(&w, 120)?;
            let total = quad2d(|x, y| corr.eval(&[Complex64::new(x, y)]).map(|r| r.value).unwrap_or(Complex64::new(f64::NAN, 0.0)), &grid)?;
            meta.insert(
                "normalization".into(),
                json!({"integral": [total.re, total.im], "expected": e.n, "relative_error": (total / e.n as f64 - 1.0).norm()}),
            );
        }
        let args = points.iter().map(|t| t.iter().flat_map(|z| [z.re, z.im]).collect()).collect();
        (Evaluation { args, results }, axes)
    };

    if let Some((xs, ys)) = &grid_axes {
        let vals: Vec<f64> = eval.results.iter().map(|r| r.value.re).collect();
        let integral = if ys.is_empty() { trapz1(xs, &vals) } else { trapezoid(xs, ys, &vals) };
        meta.insert("grid_integral".into(), json!(integral));
    }
    meta.insert("diagnostics".into(), diagnostics_summary(&eval.results));

    match a.format {
        Format::Csv => {
            let mut text = header("correlator", &config);
            let coords: Vec<String> = if a.projected {
                (1..=a.k).map(|i| if a.k == 1 { "x".into() } else { format!("x{i}") }).collect()
            } else if a.k == 1 {
                vec!["x".into(), "y".into()]
            } else {
                (1..=a.k).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect()
            };
            text.push_str(&coords.join(","));
            text.push_str(",re,im\n");
            for (args, r) in eval.args.iter().zip(&eval.results) {
                let mut row: Vec<String> = args.iter().map(|&v| num(v)).collect();
                row.push(num(r.value.re));
                row.push(num(r.value.im));
                text.push_str(&row.join(","));
                text.push('\n');
            }
            emit(a.out.as_deref(), &text)?;
            if let Some(p) = &a.out {
                fs::write(sidecar(p), to_pretty(&Value::Object(meta))?)?;
            }
        }
        Format::Json => {
            let records: Vec<Value> = eval
                .args
                .iter()
                .zip(&eval.results)
                .map(|(args, r)| json!({"args": args, "value": [r.value.re, r.value.im], "r_index": r.r_index, "parity": r.parity, "diagnostics": r.diagnostics}))
                .collect();
            meta.insert("records".into(), Value::Array(records));
            emit(a.out.as_deref(), &to_pretty(&Value::Object(meta))?)?;
        }
    }
    Ok(0)
}

fn trapz1(xs: &[f64], vals: &[f64]) -> f64 {
    xs.windows(2).zip(vals.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
}

pub fn cmd_mass(a: &MassArgs, partition: bool) -> Result<i32> {
    let e = &a.ensemble;
    let chiral = e.family == Family::Chgse;
    let masses = parse_masses(&a.masses, a.perturb_masses, chiral)?;
    let count = 2 * (e.n + masses.len() / 2) + 1;
    let basis = if a.projected { e.projected(count)?.1 } else { e.basis(count)? };
    let res = if partition {
        partition_function(&basis, e.n, &masses)?
    } else {
        char_poly_expectation(&basis, e.n, &masses)?
    };
    let out = json!({
        "version": VERSION,
        "config": serde_json::to_value(a)?,
        "quantity": if partition { "partition" } else { "charpoly" },
        "masses": masses.iter().map(|m| [m.re, m.im]).collect::<Vec<_>>(),
        "value": [res.value.re, res.value.im],
        "r_index": res.r_index,
        "parity": res.parity,
        "diagnostics": res.diagnostics,
    });
    emit(a.out.as_deref(), &to_pretty(&out)?)?;
    Ok(0)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let reports: Vec<SuiteReport> = match a.suite {
        Suite::Theorem1 => {
            let tol = a.tolerance.unwrap_or(1e-5);
            vec![theorem1(&Theorem1Options { tolerance: tol, ..Default::default() }), char_identities(tol, 80)]
        }
        Suite::Theorem2 => {
            let mut o = HermiteanOptions::default();
            if let Some(t) = a.tolerance {
                o.brute_tolerance = t;
            }
            vec![hermitean_limit(&o)]
        }
        Suite::Mcmc => {
            if a.max_n < 2 {
                return Err(Error::Validation("--max-n must be at least 2".into()));
            }
            let mut o = McmcSuiteOptions { sizes: (2..=a.max_n).collect(), steps: a.steps, seed: a.seed, ..Default::default() };
            o.burn_in = o.burn_in.min(a.steps.max(1));
            if let Some(t) = a.tolerance {
                o.max_fraction = t;
            }
            vec![mcmc_consistency(&o)]
        }
        Suite::Identities => {
            let tol = a.tolerance.unwrap_or(1e-9);
            vec![pfaffian_identities(tol, 20, a.seed), kernel_basis_independence(tol, 50, 1e-8, a.seed)]
        }
    };
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        write!(stdout, "{r}")?;
    }
    let passed = reports.iter().all(SuiteReport::passed);
    writeln!(stdout, "{}", if passed { "PASS" } else { "FAIL" })?;
    if let Some(p) = &a.out {
        let v = json!({"version": VERSION, "config": serde_json::to_value(a)?, "passed": passed, "suites": reports});
        fs::write(p, to_pretty(&v)?)?;
    }
    Ok(if passed { 0 } else { 1 })
}

pub fn cmd_sample(a: &SampleArgs) -> Result<i32> {
    let e = &a.ensemble;
    let w = e.weight()?;
    let masses = parse_complex_list(&a.masses)?;
    let opts = McmcOptions { steps: a.steps, burn_in: a.burn_in, thin: a.thin, seed: a.seed, ..Default::default() };
    let run = mcmc_sample(&w, e.n, &masses, &opts)?;
    let config = serde_json::to_value(a)?;
    let mut text = header("sample", &config);
    let cols: Vec<String> = (1..=e.n).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect();
    text.push_str(&cols.join(","));
    text.push('\n');
    for c in &run.samples {
        let row: Vec<String> = c.z.iter().flat_map(|z| [num(z.re), num(z.im)]).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)?;
    let stats = json!({"version": VERSION, "config": config, "stats": run.stats});
    match &a.out {
        Some(p) => fs::write(sidecar(p), to_pretty(&stats)?)?,
        None => eprintln!("{}", serde_json::to_string(&stats)?),
    }
    Ok(0)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let params = match &a.params {
        Some(p) => parse_real_list(p)?,
        None => default_sequence(a.family),
    };
    let observable = match a.observable {
        ObservableKind::Density => {
            let xs = if a.xs.contains(':') { parse_axis(&a.xs)? } else { parse_real_list(&a.xs)? };
            Observable::Density { xs }
        }
        ObservableKind::Charpoly => Observable::CharPoly { masses: parse_complex_list(&a.masses)? },
        ObservableKind::Norms => Observable::Norms { pairs: a.pairs },
    };
    let rep = hermitean_limit_sweep(a.family, a.n, a.nu, &params, &observable)?;
    let out = json!({"version": VERSION, "config": serde_json::to_value(a)?, "report": rep});
    emit(a.out.as_deref(), &to_pretty(&out)?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("0.3+0.1i").unwrap(), c(0.3, 0.1));
        assert_eq!(parse_complex("0.3-0.1i").unwrap(), c(0.3, -0.1));
        assert_eq!(parse_complex("-2").unwrap(), c(-2.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert_eq!(parse_complex("1e-3-2e-2i").unwrap(), c(1e-3, -2e-2));
        assert_eq!(parse_complex(" 1 + 2i ").unwrap(), c(1.0, 2.0));
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("").is_err());
        assert_eq!(parse_complex_list("0.3+0.1i,0.3-0.1i").unwrap().len(), 2);
        assert!(parse_complex_list("").unwrap().is_empty());
    }

    #[test]
    fn axes_and_grids() {
        assert_eq!(parse_axis("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        let (x, y) = parse_grid("0:1:2,-1:1:5").unwrap();
        assert_eq!((x.len(), y.len()), (2, 5));
        assert!(parse_axis("0:1").is_err());
        assert!(parse_grid("0:1:2").is_err());
    }

    #[test]
    fn trapezoid_integrates_linear_functions() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 2.0];
        let vals: Vec<f64> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| x + y)).collect();
        assert!((trapezoid(&xs, &ys, &vals) - 3.0).abs() < 1e-15);
        assert!((trapz1(&xs, &[0.0, 0.5, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn config_overrides_flags() {
        let cli = Cli::try_parse_from(["sympf", "skewpoly", "--family", "gse", "--n", "1", "--count", "4"]).unwrap();
        let Command::Skewpoly(a) = cli.command else { panic!() };
        let o: Map<String, Value> = serde_json::from_str(r#"{"N": 3, "tau": 0.2}"#).unwrap();
        let m = merge(&a, &o).unwrap();
        assert_eq!((m.ensemble.n, m.ensemble.tau, m.count), (3, 0.2, 4));
    }
}
