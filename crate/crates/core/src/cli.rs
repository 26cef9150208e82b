//! Command-line front end. `run` parses arguments, executes one command and
//! returns the process exit code: 0 success, 1 accuracy or assertion
//! failure, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::cbf::{self, check_cbf, PsiTable};
use crate::error::{KreinError, Result};
use crate::extension::{self, form_boundary, form_halfspace, harmonic_extension, GridFunction, PsiSource};
use crate::nodal;
use crate::ode;
use crate::selftest;
use crate::spectral::{self, SpectralProblem};
use crate::string::spec::{parse_string, StringSpec};
use crate::string::KreinString;

#[derive(Debug, Parser)]
#[command(name = "krein", version, about = "Krein strings, harmonic extensions and spectra of psi(-Laplacian) + V")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate psi(lambda) as `lambda,psi` CSV.
    Psi(PsiArgs),
    /// Tabulate phi_lambda(s) and its right derivative.
    Phi(PhiArgs),
    /// Harmonic extension of boundary data into the half-space.
    Extend(ExtendArgs),
    /// Lowest eigenpairs of psi(-Laplacian) + V.
    Spectrum(SpectrumArgs),
    /// Eigenvalue comparison with -Laplacian + gamma V.
    Bound(BoundArgs),
    /// Nodal parts of an eigenfunction and of its extension.
    Nodal(NodalArgs),
    /// Closed-form strings.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Run the acceptance suites and emit a JSON report.
    Selftest(SelftestArgs),
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// All entries at their reference parameters.
    List,
    /// One entry, e.g. `caffarelli_silvestre:alpha=0.5` or `shifted:mu=2,base=classical`.
    Show { name: String },
}

/// Where a string comes from: a JSON spec file or a catalog description.
#[derive(Debug, Args)]
pub struct StringSource {
    /// JSON string spec.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Catalog entry instead of a spec file.
    #[arg(long, conflicts_with = "input")]
    pub catalog: Option<String>,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[command(flatten)]
    pub source: StringSource,
    /// Geometric grid `a:b:n`.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// Explicit comma-separated λ values.
    #[arg(long, conflicts_with = "lambda_grid")]
    pub lambda: Option<String>,
    /// Relative tail tolerance of the ψ integral.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    /// Also check the complete-Bernstein conditions (exit 1 on violation).
    #[arg(long)]
    pub check_cbf: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    #[command(flatten)]
    pub source: StringSource,
    #[arg(long)]
    pub lambda: f64,
    /// Linear grid `a:b:n`; defaults to `0:R:101`, or `0:10:101` for R = ∞.
    #[arg(long)]
    pub s_grid: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[command(flatten)]
    pub source: StringSource,
    /// Boundary data as `x,value` CSV; the grid is read from the x column.
    #[arg(long)]
    pub boundary: PathBuf,
    /// Levels `first:last:count` (0 is prepended, geometric spacing).
    #[arg(long, default_value = "1e-3:100:200")]
    pub levels: String,
    /// Write `{form_halfspace, form_boundary}` JSON here.
    #[arg(long)]
    pub forms: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Operator and potential for `spectrum`, `bound` and `nodal`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub string: Option<StringSpec>,
    #[serde(default)]
    pub catalog: Option<String>,
    /// Use `ψ(λ) = λ`.
    #[serde(default)]
    pub laplacian: bool,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub half_length: Option<f64>,
}

/// `scale · |x|^power`, or explicit grid values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub power: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// JSON problem spec.
    #[arg(long)]
    pub input: PathBuf,
    /// Grid size override.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half period X override.
    #[arg(long)]
    pub half_length: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Directory for `eigenvector_<j>.csv` files.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NodalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Eigenfunction index (1-based).
    #[arg(long)]
    pub index: usize,
    #[arg(long, default_value = "1e-3:20:80")]
    pub levels: String,
    /// Relative threshold for the sign of a cell.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Write the label matrix as CSV here.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn input_err(msg: impl Into<String>) -> KreinError {
    KreinError::Input(msg.into())
}

/// Exit code for an error.
pub fn exit_code(e: &KreinError) -> i32 {
    match e {
        KreinError::Accuracy { .. } | KreinError::Numerical(_) => 1,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn std::io::Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input_err(format!("cannot write {}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn json_text(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn load_string(src: &StringSource) -> Result<KreinString> {
    match (&src.input, &src.catalog) {
        (Some(p), _) => parse_string(&read(p)?).map_err(|e| match e {
            KreinError::Json(j) => input_err(format!("{}: {j}", p.display())),
            other => other,
        }),
        (None, Some(c)) => Ok(catalog::lookup_str(c)?.string),
        (None, None) => Err(input_err("give --input <spec.json> or --catalog <name>")),
    }
}

/// `a:b:n` as three numbers.
fn triple(text: &str, what: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || input_err(format!("{what} must look like a:b:n, got '{text}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || n == 0 {
        return Err(bad());
    }
    Ok((a, b, n))
}

pub fn parse_lambda_grid(text: &str) -> Result<Vec<f64>> {
    let (a, b, n) = triple(text, "--lambda-grid")?;
    if !(a > 0.0 && b >= a) {
        return Err(input_err("--lambda-grid needs 0 < a ≤ b"));
    }
    Ok(cbf::geometric_grid(a, b, n))
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| input_err(format!("bad number '{t}' in --lambda"))))
        .collect()
}

pub fn parse_levels(text: &str) -> Result<Vec<f64>> {
    let (a, b, n) = triple(text, "--levels")?;
    if !(a > 0.0 && b > a) || n < 3 {
        return Err(input_err("--levels needs 0 < first < last and count ≥ 3"));
    }
    Ok(extension::geometric_levels(a, b, n))
}

fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

fn cmd_psi(args: &PsiArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let string = load_string(&args.source)?;
    let grid = match (&args.lambda_grid, &args.lambda) {
        (Some(g), _) => parse_lambda_grid(g)?,
        (None, Some(l)) => parse_list(l)?,
        (None, None) => return Err(input_err("give --lambda-grid a:b:n or --lambda v1,v2,...")),
    };
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(input_err("--tol must lie in (0, 1)"));
    }
    let psi = grid.iter().map(|&l| ode::psi(&string, l, args.tol)).collect::<Result<Vec<_>>>()?;
    let table = PsiTable { lambda: grid, psi, source: "string".into() };
    emit(args.output.as_deref(), &table.to_csv(), out)?;
    if args.check_cbf {
        let report = check_cbf(&table, 1e-7)?;
        if !report.passed() {
            for v in &report.violations {
                eprintln!("cbf violation: {} at λ = {:.16e} (excess {:.3e})", v.condition.as_str(), v.lambda, v.excess);
            }
            return Ok(1);
        }
    }
    Ok(0)
}

fn cmd_phi(args: &PhiArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let string = load_string(&args.source)?;
    let grid = match &args.s_grid {
        Some(g) => {
            let (a, b, n) = triple(g, "--s-grid")?;
            linear_grid(a, b, n)
        }
        None => {
            let top = if string.length().is_finite() { string.length() } else { 10.0 };
            linear_grid(0.0, top, 101)
        }
    };
    if !(args.lambda >= 0.0) {
        return Err(input_err("--lambda must be nonnegative"));
    }
    let p = ode::phi(&string, args.lambda, &grid)?;
    let mut text = String::from("s,phi,phi_prime\n");
    for i in 0..grid.len() {
        let _ = writeln!(text, "{:.16e},{:.16e},{:.16e}", p.s_grid[i], p.phi[i], p.phi_prime[i]);
    }
    emit(args.output.as_deref(), &text, out)?;
    Ok(0)
}

/// Reads `x,value` CSV on a uniform periodic grid starting at `-X`.
pub fn read_grid_csv(text: &str) -> Result<GridFunction> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('x')) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 2 {
            return Err(input_err(format!("line {}: expected 'x,value'", i + 1)));
        }
        let x: f64 = cols[0].trim().parse().map_err(|_| input_err(format!("line {}: bad x", i + 1)))?;
        let v: f64 = cols[1].trim().parse().map_err(|_| input_err(format!("line {}: bad value", i + 1)))?;
        xs.push(x);
        vs.push(v);
    }
    if xs.len() < 2 {
        return Err(input_err("boundary data needs at least two points"));
    }
    let dx = xs[1] - xs[0];
    let half_length = -xs[0];
    if !(dx > 0.0) || (half_length - 0.5 * dx * xs.len() as f64).abs() > 1e-9 * half_length.abs().max(1.0) {
        return Err(input_err("boundary grid must be x_k = -X + k·2X/n"));
    }
    if xs.windows(2).any(|w| ((w[1] - w[0]) / dx - 1.0).abs() > 1e-6) {
        return Err(input_err("boundary grid must be uniform"));
    }
    GridFunction::new(half_length, vs)
}

fn cmd_extend(args: &ExtendArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let string = load_string(&args.source)?;
    let f = read_grid_csv(&read(&args.boundary)?)?;
    let levels = parse_levels(&args.levels)?;
    let u = harmonic_extension(&string, &f, &levels)?;
    emit(args.output.as_deref(), &u.to_csv(), out)?;
    if let Some(p) = &args.forms {
        let eh = form_halfspace(&string, &u)?;
        let eb = form_boundary(&PsiSource::String(string.clone()), &f)?;
        let v = serde_json::json!({ "form_halfspace": eh, "form_boundary": eb });
        emit(Some(p), &json_text(&v)?, out)?;
    }
    Ok(0)
}

fn load_problem(args: &ProblemArgs) -> Result<(SpectralProblem, Option<KreinString>)> {
    let text = read(&args.input)?;
    let spec: ProblemSpec = serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", args.input.display())))?;
    let n = args.n.or(spec.n).unwrap_or(256);
    let half_length = args.half_length.or(spec.half_length).unwrap_or(12.0);
    if !(8..=4096).contains(&n) || !n.is_power_of_two() {
        return Err(input_err(format!("n = {n} must be a power of two in [8, 4096]")));
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(input_err("half_length must be positive"));
    }
    let chosen = [spec.string.is_some(), spec.catalog.is_some(), spec.laplacian].iter().filter(|&&b| b).count();
    if chosen != 1 {
        return Err(input_err("the problem needs exactly one of string, catalog or laplacian"));
    }
    let (source, string) = if let Some(s) = &spec.string {
        let s = s.to_string_model()?;
        (PsiSource::String(s.clone()), Some(s))
    } else if let Some(c) = &spec.catalog {
        let e = catalog::lookup_str(c)?;
        let s = e.string.clone();
        (PsiSource::Catalog(e), Some(s))
    } else {
        (PsiSource::Laplacian, None)
    };
    let pot = &spec.potential;
    let potential = match (&pot.values, pot.power) {
        (Some(v), None) => {
            if v.len() != n {
                return Err(input_err(format!("potential has {} values, grid has {n}", v.len())));
            }
            GridFunction::new(half_length, v.clone())?
        }
        (None, Some(p)) => {
            let c = pot.scale.unwrap_or(1.0);
            GridFunction::from_fn(n, half_length, |x| c * x.abs().powf(p))?
        }
        _ => return Err(input_err("potential needs exactly one of power or values")),
    };
    Ok((SpectralProblem::new(source, potential), string))
}

#[derive(Serialize)]
struct SpectrumOut {
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let (problem, _) = load_problem(&args.problem)?;
    let eig = spectral::solve_problem(&problem, args.count)?;
    if let Some(dir) = &args.vectors {
        std::fs::create_dir_all(dir)?;
        for (j, v) in eig.eigenvectors.iter().enumerate() {
            std::fs::write(dir.join(format!("eigenvector_{}.csv", j + 1)), v.to_csv())?;
        }
    }
    let body = SpectrumOut { eigenvalues: eig.eigenvalues, residuals: eig.residuals };
    emit(args.output.as_deref(), &json_text(&body)?, out)?;
    Ok(0)
}

fn cmd_bound(args: &BoundArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let (problem, string) = load_problem(&args.problem)?;
    let string = string.ok_or_else(|| input_err("bound needs a string or catalog entry, not the Laplacian"))?;
    let report = spectral::check_theorem_est(&string, &problem.potential, args.lambda)?;
    emit(args.output.as_deref(), &json_text(&report)?, out)?;
    Ok(if report.pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct NodalOut {
    index: usize,
    eigenvalue: f64,
    rel_threshold: f64,
    halfspace_components: usize,
    boundary_components: usize,
    boundary_bound: usize,
    verdict: nodal::CourantVerdict,
}

fn cmd_nodal(args: &NodalArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let (problem, string) = load_problem(&args.problem)?;
    let string = string.ok_or_else(|| input_err("nodal needs a string or catalog entry to extend into the half-space"))?;
    if args.index == 0 {
        return Err(input_err("--index is 1-based"));
    }
    let levels = parse_levels(&args.levels)?;
    let eig = spectral::solve_problem(&problem, args.index + 1)?;
    let f = &eig.eigenvectors[args.index - 1];
    let u = harmonic_extension(&string, f, &levels)?;
    let labels = nodal::nodal_components(&u, args.tol)?;
    let boundary = nodal::boundary_nodal_count(f, args.tol)?;
    let verdict = nodal::courant_check(&eig.eigenvalues, args.index, labels.count(), 1e-8, string.positive_lipschitz())?;
    if let Some(p) = &args.labels {
        emit(Some(p), &labels.to_csv(), out)?;
    }
    let body = NodalOut {
        index: args.index,
        eigenvalue: eig.eigenvalues[args.index - 1],
        rel_threshold: args.tol,
        halfspace_components: labels.count(),
        boundary_components: boundary,
        boundary_bound: 2 * args.index - 1,
        verdict: verdict.clone(),
    };
    emit(args.output.as_deref(), &json_text(&body)?, out)?;
    let ok = verdict.weak_pass && verdict.strong_pass != Some(false) && boundary < 2 * args.index;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_catalog(action: &CatalogAction, out: &mut dyn std::io::Write) -> Result<i32> {
    let v = match action {
        CatalogAction::List => {
            let mut entries: Vec<serde_json::Value> = catalog::standard_entries().iter().map(|e| e.to_json()).collect();
            entries.push(catalog::shifted(&catalog::classical(), 1.0)?.to_json());
            serde_json::Value::Array(entries)
        }
        CatalogAction::Show { name } => catalog::lookup_str(name)?.to_json(),
    };
    out.write_all(json_text(&v)?.as_bytes())?;
    Ok(0)
}

fn cmd_selftest(args: &SelftestArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let suite = selftest::Suite::parse(&args.suite)?;
    let outcomes = selftest::run_suite(suite);
    for o in &outcomes {
        eprintln!("{}", selftest::summary_line(o));
    }
    let report = selftest::report_json(&args.suite, &outcomes);
    let pass = report["pass"].as_bool().unwrap_or(false);
    emit(args.output.as_deref(), &json_text(&report)?, out)?;
    Ok(if pass { 0 } else { 1 })
}

/// Applies `KREIN_THREADS` to the global thread pool.
fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("KREIN_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| input_err(format!("KREIN_THREADS = '{v}' is not a positive integer")))?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn std::io::Write) -> Result<i32> {
    configure_threads()?;
    match &cli.command {
        Command::Psi(a) => cmd_psi(a, out),
        Command::Phi(a) => cmd_phi(a, out),
        Command::Extend(a) => cmd_extend(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::Nodal(a) => cmd_nodal(a, out),
        Command::Catalog { action } => cmd_catalog(action, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_lambda_grid("1:100:3").unwrap(), vec![1.0, 10.000000000000002, 100.0]);
        assert!(parse_lambda_grid("0:1:3").is_err());
        assert!(parse_lambda_grid("1:2").is_err());
        let l = parse_levels("0.01:1:3").unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l[0], 0.0);
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_csv_round_trip() {
        let f = GridFunction::from_fn(8, 2.0, |x| x * x).unwrap();
        let g = read_grid_csv(&f.to_csv()).unwrap();
        assert_eq!(g, f);
        assert!(read_grid_csv("x,value\n0,1\n1,2\n5,3\n").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&KreinError::Input("x".into())), 2);
        assert_eq!(exit_code(&KreinError::Numerical("x".into())), 1);
        let mut out = Vec::new();
        assert_eq!(run(["krein", "psi", "--catalog", "classical"], &mut out), 2);
        assert_eq!(run(["krein", "no-such-command"], &mut out), 2);
    }
}
