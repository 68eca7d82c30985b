//! Command-line surface: every experiment as a subcommand emitting CSV tables, each
//! with a JSON sidecar recording family parameters, tolerances and truncation sizes.
//!
//! Exit codes: 0 success, 1 computational failure, 2 usage error. Failures print one
//! line of JSON (`{"error": kind, "message": …, "exit_code": …}`) to stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics;
use crate::coeffs::{self, CoefficientFamily};
use crate::error::Error;
use crate::limits;
use crate::spectral::{self, ExtensionParam, Truncation};
use crate::squeezing::{self, FockVector, GridSpec, VacuumConfig};
use crate::Complex64;

#[derive(Debug, Parser)]
#[command(name = "limit-circle", version, about = "Jacobi operators J(λ) with off-diagonal a_n and diagonal λ f_n near the limit-circle limit λ → 0")]
pub struct Cli {
    /// Output directory for CSV tables and JSON sidecars (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Coefficient family `squeezing:K,H,M` (block M of the order-K squeezing operator with diagonal power H).
    #[arg(long, global = true, default_value = "squeezing:3,3,0")]
    pub family: String,

    /// TOML family definition; overrides `--family`. Keys: kind = "squeezing" (k, hpow, m) or
    /// kind = "explicit" (alpha, beta, c_a, c_f, a = [...], f = [...]).
    #[arg(long, global = true)]
    pub family_file: Option<PathBuf>,

    /// Relative tolerance for truncation stabilisation.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub trunc_tol: f64,

    /// Largest truncation size tried before giving up.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub n_max: usize,

    #[command(subcommand)]
    pub command: Command,
}

/// λ grid: either an explicit list or a logarithmic grid from `lambda-max` down to `lambda-min`.
#[derive(Debug, Clone, Args)]
pub struct LambdaGrid {
    /// Explicit comma-separated λ values (overrides min/max/points).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lambda_grid: Option<Vec<f64>>,
    /// Smallest λ of the logarithmic grid.
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Largest λ of the logarithmic grid.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Number of points of the logarithmic grid.
    #[arg(long)]
    pub lambda_points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite-window check of the growth and variation hypotheses.
    Validate {
        /// Window length N (>= 10).
        #[arg(long, default_value_t = 2000)]
        window: usize,
    },
    /// Weyl function M(z, λ) along a λ grid with the limit circle at z
    /// (default grid: 40 log points from 1 down to 1e-4).
    Spiral {
        /// Spectral parameter `re,im` (or `i`).
        #[arg(long, default_value = "0,1")]
        z: String,
        #[command(flatten)]
        grid: LambdaGrid,
        /// Number of extension samples m(z, t) on the circle.
        #[arg(long, default_value_t = 100)]
        circle_points: usize,
    },
    /// Eigenvalue curves E^(j)(λ) with Hellmann–Feynman derivatives
    /// (default grid: 30 log points from 1 down to 1e-4).
    Eigencurves {
        /// Comma-separated eigenvalue indices.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        levels: Vec<usize>,
        #[command(flatten)]
        grid: LambdaGrid,
    },
    /// Coupling sequence λ_j → 0 keeping E in σ(J(λ_j)), converging to the extension J_t.
    Select {
        /// Extension parameter: a real number or `inf`.
        #[arg(long, default_value = "inf")]
        t: String,
        /// Target eigenvalue of J_t (default: smallest-modulus eigenvalue in [-10, 10]).
        #[arg(long = "E", alias = "e")]
        e: Option<f64>,
        /// Number of sequence elements.
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Bisection tolerance |E^(l)(λ) - E|.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Point at which |M(z, λ_j) - m(z, t)| is reported.
        #[arg(long, default_value = "0,1")]
        z: String,
    },
    /// Suprema of the scaled recessive solution r_n over n >= n0
    /// (default grid: λ_j = 1/(10j), j = 1..40).
    Bound {
        #[arg(long, default_value = "0,1")]
        z: String,
        /// Comma-separated lower indices n0.
        #[arg(long, value_delimiter = ',', default_value = "5,20,50")]
        n0: Vec<usize>,
        #[command(flatten)]
        grid: LambdaGrid,
        /// Also write the full r_n profile per λ.
        #[arg(long)]
        profiles: bool,
    },
    /// Sup error of the Airy approximation to the recessive solution and its h-scaling
    /// (default grid: h_j = 0.04·0.7^j, j = 0..7, λ = h^δ).
    Turning {
        #[arg(long, default_value = "0,1")]
        z: String,
        #[command(flatten)]
        grid: LambdaGrid,
    },
    /// Vacuum dynamics along a selected sequence against the extension dynamics Φ_k(t, T),
    /// with Wigner functions of the limit and final states.
    Squeeze {
        /// Squeezing order k.
        #[arg(long, default_value_t = 3)]
        k: u32,
        /// Diagonal power h.
        #[arg(long = "h", default_value_t = 3)]
        hpow: u32,
        /// Target extension: a real number or `inf`.
        #[arg(long, default_value = "inf")]
        t_target: String,
        /// Evolution time T.
        #[arg(long = "T", default_value_t = 1.0)]
        time: f64,
        /// Number of sequence elements.
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Eigenvalue window `lo,hi` for the spectral synthesis of Φ_k.
        #[arg(long, default_value = "-100,100")]
        window: String,
        /// Largest admissible completeness defect of the synthesis.
        #[arg(long, default_value_t = 1e-4)]
        completeness_tol: f64,
        /// Basis components kept in Φ_k.
        #[arg(long, default_value_t = 400)]
        components: usize,
        /// Stabilisation tolerance for truncated evolutions.
        #[arg(long, default_value_t = 1e-8)]
        evolve_tol: f64,
        /// Wigner grid points per axis (0 disables Wigner output).
        #[arg(long, default_value_t = 121)]
        wigner_points: usize,
        /// Wigner grid half-width in x and p.
        #[arg(long, default_value_t = 6.0)]
        wigner_range: f64,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(msg) | Error::Config(msg) => CliError::Usage(msg),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(msg) => json!({"error": "usage", "message": msg, "exit_code": 2}),
            CliError::Compute(e) => json!({"error": e.kind(), "message": e.to_string(), "exit_code": 1}),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.render().to_string();
            eprintln!("{}", json!({"error": "usage", "message": msg.trim(), "exit_code": 2}));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Runs a parsed command; returns the summary printed on stdout.
pub fn execute(cli: &Cli) -> CliResult<Value> {
    let tr = Truncation { tol: cli.trunc_tol, n_max: cli.n_max };
    if !(tr.tol > 0.0) || tr.n_max < 2 {
        return usage("--trunc-tol must be > 0 and --n-max >= 2");
    }
    let out = Output::new(&cli.out)?;
    match &cli.command {
        Command::Validate { window } => {
            let fam = load_family(cli)?;
            run_validate(&out, &fam, *window)
        }
        Command::Spiral { z, grid, circle_points } => {
            let fam = load_family(cli)?;
            let z = parse_upper_z(z)?;
            let grid = grid.resolve(|| log_grid(1e-4, 1.0, 40))?;
            if *circle_points < 3 {
                return usage("--circle-points must be >= 3");
            }
            run_spiral(&out, &fam, z, &grid, *circle_points, &tr)
        }
        Command::Eigencurves { levels, grid } => {
            let fam = load_family(cli)?;
            let grid = grid.resolve(|| log_grid(1e-4, 1.0, 30))?;
            if levels.is_empty() {
                return usage("--levels needs at least one index");
            }
            run_eigencurves(&out, &fam, levels, &grid, &tr)
        }
        Command::Select { t, e, count, tol, z } => {
            let fam = load_family(cli)?;
            let t = parse_t(t)?;
            let z = parse_upper_z(z)?;
            if *count == 0 || !(*tol > 0.0) {
                return usage("--count must be >= 1 and --tol > 0");
            }
            run_select(&out, &fam, t, *e, *count, *tol, z, &tr)
        }
        Command::Bound { z, n0, grid, profiles } => {
            let fam = load_family(cli)?;
            let z = parse_upper_z(z)?;
            let grid = grid.resolve(|| (1..=40).map(|j| 1.0 / (10.0 * j as f64)).collect())?;
            if n0.is_empty() {
                return usage("--n0 needs at least one index");
            }
            run_bound(&out, &fam, z, n0, &grid, *profiles)
        }
        Command::Turning { z, grid } => {
            let fam = load_family(cli)?;
            let z = parse_upper_z(z)?;
            let delta = fam.delta();
            let grid = grid.resolve(|| (0..8).map(|j| (0.04 * 0.7f64.powi(j)).powf(delta)).collect())?;
            if grid.len() < 2 {
                return usage("turning needs at least 2 lambda values");
            }
            run_turning(&out, &fam, z, &grid)
        }
        Command::Squeeze {
            k,
            hpow,
            t_target,
            time,
            count,
            window,
            completeness_tol,
            components,
            evolve_tol,
            wigner_points,
            wigner_range,
        } => {
            let t = parse_t(t_target)?;
            let window = parse_pair(window, "--window")?;
            if *count == 0 || !time.is_finite() || !(*wigner_range > 0.0) {
                return usage("--count must be >= 1, --T finite and --wigner-range > 0");
            }
            let cfg = VacuumConfig {
                window,
                completeness_tol: *completeness_tol,
                components: *components,
                evolve_tol: *evolve_tol,
                ..VacuumConfig::default()
            };
            run_squeeze(&out, *k, *hpow, t, *time, *count, &cfg, *wigner_points, *wigner_range)
        }
    }
}

// ---------------------------------------------------------------------------
// Argument parsing helpers

impl LambdaGrid {
    fn resolve(&self, default: impl FnOnce() -> Vec<f64>) -> CliResult<Vec<f64>> {
        let grid = match (&self.lambda_grid, self.lambda_min, self.lambda_max, self.lambda_points) {
            (Some(list), None, None, None) => list.clone(),
            (Some(_), ..) => return usage("--lambda-grid cannot be combined with --lambda-min/max/points"),
            (None, None, None, None) => default(),
            (None, min, max, points) => {
                let (Some(min), Some(max)) = (min, max) else {
                    return usage("a logarithmic grid needs both --lambda-min and --lambda-max");
                };
                let points = points.unwrap_or(30);
                if points == 0 {
                    return usage("empty lambda grid (--lambda-points 0)");
                }
                if !(min > 0.0 && max >= min && max.is_finite()) {
                    return usage("logarithmic grid needs 0 < lambda-min <= lambda-max");
                }
                log_grid(min, max, points)
            }
        };
        if grid.is_empty() {
            return usage("empty lambda grid");
        }
        if grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return usage("lambda grid values must be positive and finite");
        }
        Ok(grid)
    }
}

/// `points` values from `max` down to `min`, equally spaced in `ln λ`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![max];
    }
    let (a, b) = (max.ln(), min.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// `re,im`, a bare real, `i`, or `a+bi` / `a-bi`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        return Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?));
    }
    if let Some(body) = s.strip_suffix('i') {
        let body = body.trim();
        if body.is_empty() || body == "+" {
            return Some(Complex64::new(0.0, 1.0));
        }
        if body == "-" {
            return Some(Complex64::new(0.0, -1.0));
        }
        // Split at the last sign that is not an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        return match split {
            Some(i) => {
                let re: f64 = body[..i].trim().parse().ok()?;
                let im_s = body[i..].trim();
                let im = match im_s {
                    "+" => 1.0,
                    "-" => -1.0,
                    other => other.parse().ok()?,
                };
                Some(Complex64::new(re, im))
            }
            None => Some(Complex64::new(0.0, body.parse().ok()?)),
        };
    }
    s.parse().ok().map(|re| Complex64::new(re, 0.0))
}

fn parse_upper_z(s: &str) -> CliResult<Complex64> {
    match parse_complex(s) {
        Some(z) if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() => Ok(z),
        Some(_) => usage(format!("--z {s}: need Im z > 0")),
        None => usage(format!("--z {s}: expected `re,im`")),
    }
}

fn parse_t(s: &str) -> CliResult<ExtensionParam> {
    ExtensionParam::parse(s).map_or_else(|| usage(format!("extension parameter {s}: expected a real number or `inf`")), Ok)
}

fn parse_pair(s: &str, flag: &str) -> CliResult<(f64, f64)> {
    let parsed = s.split_once(',').and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
    match parsed {
        Some((a, b)) if a < b && a.is_finite() && b.is_finite() => Ok((a, b)),
        _ => usage(format!("{flag} {s}: expected `lo,hi` with lo < hi")),
    }
}

/// On-disk family definition.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilyFile {
    Squeezing { k: u32, hpow: u32, #[serde(default)] m: u32 },
    Explicit { alpha: f64, beta: f64, #[serde(default)] c_a: f64, #[serde(default)] c_f: f64, a: Vec<f64>, f: Vec<f64> },
}

impl FamilyFile {
    pub fn build(self) -> crate::Result<CoefficientFamily> {
        match self {
            FamilyFile::Squeezing { k, hpow, m } => coeffs::squeezing_family(k, hpow, m),
            FamilyFile::Explicit { alpha, beta, c_a, c_f, a, f } => coeffs::explicit_family(alpha, beta, c_a, c_f, a, f),
        }
    }
}

fn load_family(cli: &Cli) -> CliResult<CoefficientFamily> {
    if let Some(path) = &cli.family_file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let spec: FamilyFile = toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return Ok(spec.build()?);
    }
    let Some(rest) = cli.family.strip_prefix("squeezing:") else {
        return usage(format!("--family {}: expected `squeezing:K,H,M` (use --family-file for explicit families)", cli.family));
    };
    let parts: Option<Vec<u32>> = rest.split(',').map(|p| p.trim().parse().ok()).collect();
    match parts.as_deref() {
        Some([k, h, m]) => Ok(coeffs::squeezing_family(*k, *h, *m)?),
        Some([k, h]) => Ok(coeffs::squeezing_family(*k, *h, 0)?),
        _ => usage(format!("--family {}: expected `squeezing:K,H,M`", cli.family)),
    }
}

// ---------------------------------------------------------------------------
// Output

struct Output {
    dir: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Compute(Error::Io(format!("{}: {e}", path.display())))
}

impl Output {
    fn new(dir: &Path) -> CliResult<Output> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    /// Writes `name.csv` from serialisable rows.
    fn csv<S: Serialize>(&self, name: &str, rows: &[S]) -> CliResult<PathBuf> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    /// Writes a headerless numeric matrix as `name.csv`.
    fn matrix(&self, name: &str, rows: &[Vec<f64>]) -> CliResult<PathBuf> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(|e| io_err(&path, e))?;
        for r in rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    /// Writes the sidecar `name.json` next to `name.csv`.
    fn sidecar(&self, name: &str, meta: Value) -> CliResult<PathBuf> {
        let path = self.dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(&meta).map_err(|e| io_err(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    fn emit<S: Serialize>(&self, name: &str, rows: &[S], meta: Value) -> CliResult<()> {
        self.csv(name, rows)?;
        self.sidecar(name, meta)?;
        Ok(())
    }
}

fn truncation_json(tr: &Truncation) -> Value {
    json!({"tol": tr.tol, "n_max": tr.n_max})
}

fn z_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

// ---------------------------------------------------------------------------
// Commands

#[derive(Serialize)]
struct ValidateRow<'a> {
    check: &'a str,
    pass: bool,
    value: f64,
    detail: &'a str,
}

fn run_validate(out: &Output, fam: &CoefficientFamily, window: usize) -> CliResult<Value> {
    let report = coeffs::validate_hypothesis(fam, window)?;
    let rows: Vec<ValidateRow> = report
        .checks
        .iter()
        .map(|c| ValidateRow { check: c.name, pass: c.pass, value: c.value, detail: &c.detail })
        .collect();
    let summary = json!({
        "command": "validate",
        "all_pass": report.all_pass(),
        "ratio_increasing": report.ratio_increasing,
    });
    out.emit(
        "validate",
        &rows,
        json!({"command": "validate", "family": fam.describe(), "window": window, "summary": summary}),
    )?;
    Ok(summary)
}

#[derive(Serialize)]
struct SpiralRow {
    lambda: f64,
    m_re: f64,
    m_im: f64,
    circle_distance: f64,
    n_used: usize,
    crosscheck: f64,
}

#[derive(Serialize)]
struct CircleRow {
    theta: f64,
    t: String,
    m_re: f64,
    m_im: f64,
}

fn run_spiral(out: &Output, fam: &CoefficientFamily, z: Complex64, grid: &[f64], circle_points: usize, tr: &Truncation) -> CliResult<Value> {
    let spiral = limits::spiral_samples(fam, z, grid, circle_points, tr)?;
    let rows: Vec<SpiralRow> = spiral
        .samples
        .iter()
        .zip(&spiral.distances)
        .map(|(s, d)| SpiralRow { lambda: s.lambda, m_re: s.m.0, m_im: s.m.1, circle_distance: *d, n_used: s.n_used, crosscheck: s.crosscheck })
        .collect();
    let circle = &spiral.circle;
    let circle_rows: Vec<CircleRow> = circle
        .samples
        .iter()
        .map(|&(theta, m)| CircleRow { theta, t: ExtensionParam::from_angle(theta).label(), m_re: m.0, m_im: m.1 })
        .collect();
    let summary = json!({
        "command": "spiral",
        "z": z_json(z),
        "center": [circle.center.0, circle.center.1],
        "radius": circle.radius,
        "max_radial_deviation": circle.max_deviation,
        "distance_first": spiral.distances.first(),
        "distance_last": spiral.distances.last(),
    });
    let meta = json!({
        "command": "spiral",
        "family": fam.describe(),
        "z": z_json(z),
        "lambda_grid": grid,
        "circle_points": circle_points,
        "truncation": truncation_json(tr),
        "quad_tail_tol": 1e-8,
        "summary": summary,
    });
    out.emit("spiral", &rows, meta.clone())?;
    out.emit("circle", &circle_rows, meta)?;
    Ok(summary)
}

#[derive(Serialize)]
struct CurveRow {
    level: usize,
    lambda: f64,
    value: f64,
    derivative: f64,
    n_used: usize,
}

fn run_eigencurves(out: &Output, fam: &CoefficientFamily, levels: &[usize], grid: &[f64], tr: &Truncation) -> CliResult<Value> {
    let mut rows = Vec::new();
    for &level in levels {
        for s in spectral::eigenvalue_curve(fam, level, grid, tr)? {
            rows.push(CurveRow { level, lambda: s.lambda, value: s.value, derivative: s.derivative, n_used: s.n_used });
        }
    }
    let summary = json!({"command": "eigencurves", "levels": levels, "points": grid.len()});
    out.emit(
        "eigencurves",
        &rows,
        json!({"command": "eigencurves", "family": fam.describe(), "lambda_grid": grid, "truncation": truncation_json(tr), "summary": summary}),
    )?;
    Ok(summary)
}

#[derive(Serialize)]
struct SelectRow {
    j: usize,
    lambda: f64,
    level: usize,
    ratio: f64,
    residual: f64,
    spectrum_distance: f64,
    n_used: usize,
    m_error: f64,
}

/// Smallest-modulus eigenvalue of `J_t` in `window`.
fn default_eigenvalue(fam: &CoefficientFamily, t: ExtensionParam, window: (f64, f64)) -> crate::Result<f64> {
    let spec = spectral::extension_spectrum(fam, t, window, 1e-12, 400)?;
    spec.eigenvalues
        .iter()
        .cloned()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| Error::Bracket(format!("no eigenvalue of J_t in [{}, {}]", window.0, window.1)))
}

#[allow(clippy::too_many_arguments)]
fn run_select(
    out: &Output,
    fam: &CoefficientFamily,
    t: ExtensionParam,
    e: Option<f64>,
    count: usize,
    tol: f64,
    z: Complex64,
    tr: &Truncation,
) -> CliResult<Value> {
    let (e, e_source) = match e {
        Some(v) => (v, "flag"),
        None => (default_eigenvalue(fam, t, (-10.0, 10.0))?, "smallest-modulus eigenvalue of J_t in [-10, 10]"),
    };
    let seq = limits::select_sequence(fam, t, e, count, tol, tr)?;
    let quad = spectral::nevanlinna_quad(fam, z, 1e-8)?;
    let m_limit = limits::extension_value(&quad, t)?;
    let mut rows = Vec::with_capacity(seq.len());
    for el in &seq {
        let m = spectral::weyl_m(fam, el.lambda, z, tr)?;
        rows.push(SelectRow {
            j: el.j,
            lambda: el.lambda,
            level: el.level,
            ratio: el.ratio,
            residual: el.residual,
            spectrum_distance: el.spectrum_distance,
            n_used: el.n_used,
            m_error: (m.value() - m_limit).norm(),
        });
    }
    let summary = json!({
        "command": "select",
        "t": t.label(),
        "E": e,
        "E_source": e_source,
        "max_ratio": rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        "final_m_error": rows.last().map(|r| r.m_error),
    });
    out.emit(
        "select",
        &rows,
        json!({
            "command": "select",
            "family": fam.describe(),
            "t": t.label(),
            "E": e,
            "count": count,
            "bisection_tol": tol,
            "z": z_json(z),
            "m_limit": [m_limit.re, m_limit.im],
            "truncation": truncation_json(tr),
            "summary": summary,
        }),
    )?;
    Ok(summary)
}

#[derive(Serialize)]
struct BoundCsvRow {
    lambda: f64,
    h: f64,
    n0: usize,
    sup: f64,
    argmax: usize,
    argmax_scaled: f64,
    n_last: usize,
}

#[derive(Serialize)]
struct ProfileRow {
    lambda: f64,
    n: usize,
    r: f64,
}

fn run_bound(out: &Output, fam: &CoefficientFamily, z: Complex64, n0: &[usize], grid: &[f64], profiles: bool) -> CliResult<Value> {
    let table = asymptotics::bound_diagnostic(fam, z, grid, n0)?;
    let mut rows = Vec::new();
    for r in &table.rows {
        for s in &r.sups {
            rows.push(BoundCsvRow { lambda: r.lambda, h: r.h, n0: s.n0, sup: s.sup, argmax: s.argmax, argmax_scaled: s.argmax_scaled, n_last: r.n_last });
        }
    }
    let ranges: Vec<Value> = n0
        .iter()
        .map(|&k| {
            let (lo, hi) = table.range(k).unwrap_or((f64::NAN, f64::NAN));
            json!({"n0": k, "min": lo, "max": hi, "ratio": hi / lo})
        })
        .collect();
    let admissible = asymptotics::max_admissible_lambda(fam).ok();
    let summary = json!({"command": "bound", "z": z_json(z), "ranges": ranges, "max_admissible_lambda": admissible});
    let meta = json!({"command": "bound", "family": fam.describe(), "z": z_json(z), "n0": n0, "lambda_grid": grid, "summary": summary});
    out.emit("bound", &rows, meta.clone())?;
    if profiles {
        let mut prof = Vec::new();
        for r in &table.rows {
            let ratios = asymptotics::bound_ratios(fam, r.lambda, z, r.n_last)?;
            prof.extend(ratios.into_iter().enumerate().map(|(n, v)| ProfileRow { lambda: r.lambda, n, r: v }));
        }
        out.emit("bound_profile", &prof, meta)?;
    }
    Ok(summary)
}

fn run_turning(out: &Output, fam: &CoefficientFamily, z: Complex64, grid: &[f64]) -> CliResult<Value> {
    let report = asymptotics::turning_point_error(fam, grid, z)?;
    let summary = json!({"command": "turning", "z": z_json(z), "slope": report.slope, "points": report.samples.len()});
    out.emit(
        "turning",
        &report.samples,
        json!({"command": "turning", "family": fam.describe(), "z": z_json(z), "lambda_grid": grid, "summary": summary}),
    )?;
    Ok(summary)
}

#[derive(Serialize)]
struct FidelityRow {
    j: usize,
    lambda: f64,
    coupling: f64,
    n_used: usize,
    fidelity: f64,
}

/// Block state → normalised full Fock vector.
fn fock_state(block: &FockVector, k: u32) -> FockVector {
    let full = block.block_to_fock(k as usize, 0);
    let norm = full.norm();
    FockVector { coeffs: full.coeffs.iter().map(|c| c / norm).collect() }
}

#[allow(clippy::too_many_arguments)]
fn run_squeeze(
    out: &Output,
    k: u32,
    hpow: u32,
    t: ExtensionParam,
    time: f64,
    count: usize,
    cfg: &VacuumConfig,
    wigner_points: usize,
    wigner_range: f64,
) -> CliResult<Value> {
    let fam = coeffs::squeezing_family(k, hpow, 0)?;
    let report = squeezing::vacuum_experiment(k, hpow, t, time, count, cfg)?;
    let rows: Vec<FidelityRow> = report
        .rows
        .iter()
        .map(|r| FidelityRow { j: r.j, lambda: r.lambda, coupling: r.coupling, n_used: r.n_used, fidelity: r.fidelity })
        .collect();
    let summary = json!({
        "command": "squeeze",
        "t_target": t.label(),
        "E": report.e_target,
        "completeness_defect": report.completeness_defect,
        "final_fidelity": rows.last().map(|r| r.fidelity),
    });
    let meta = json!({
        "command": "squeeze",
        "family": fam.describe(),
        "k": k,
        "hpow": hpow,
        "t_target": t.label(),
        "E": report.e_target,
        "E_source": "smallest-modulus eigenvalue of J_t in the window",
        "T": time,
        "config": cfg,
        "completeness_defect": report.completeness_defect,
        "summary": summary,
    });
    out.emit("fidelity", &rows, meta)?;
    if wigner_points > 0 {
        let spec = GridSpec { x_range: (-wigner_range, wigner_range), p_range: (-wigner_range, wigner_range), nx: wigner_points, np: wigner_points };
        for (name, block) in [("wigner_limit", &report.limit_state), ("wigner_final", &report.final_state)] {
            let state = fock_state(block, k);
            let w = squeezing::wigner(&state, &spec)?;
            out.matrix(name, &w.values)?;
            out.sidecar(
                name,
                json!({
                    "command": "squeeze",
                    "state": name,
                    "x_range": spec.x_range,
                    "p_range": spec.p_range,
                    "resolution": [spec.nx, spec.np],
                    "layout": "row i = x_i, column j = p_j",
                    "convention": w.convention,
                    "fock_dimension": state.len(),
                    "grid_integral": w.integral(),
                }),
            )?;
        }
    }
    Ok(summary)
}
