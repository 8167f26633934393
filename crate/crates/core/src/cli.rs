//! Command-line runner.
//!
//! Every invocation is first turned into a [`RunConfig`]. A JSON config file
//! (`--config`) supplies the starting values and command-line flags override
//! them, so a run can always be reproduced from its config document alone.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{fit_checked, fit_expansion, geometric_grid, sample_logdetq, ExpansionFit, Sample};
use crate::bfk::{
    default_suite, run_suite, DiscreteConfig, DiscreteShape, Resolution, Verification, VerificationReport,
};
use crate::discrete_lab::generator::{random_chain, random_grid};
use crate::discrete_lab::{lab_records, DiscreteBoundaryProblem};
use crate::dtn_models::DtnOperator;
use crate::error::{Error, Result};
use crate::model_geometries::{BesselZeroCache, BoundaryCondition, CircleModel, DiskModel, IntervalModel, Potential};
use crate::report::{CheckRecord, SCHEMA_VERSION};
use crate::zeta_engine::{zeta, zeta_prime_zero, SpectrumSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    #[default]
    Lab,
    Verify,
    Zeta,
    DtnScan,
    Fit,
    Cache,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    #[default]
    Interval,
    Circle,
    CutCircle,
    Disk,
    Discrete,
    /// The standard suite of every geometry.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BcKind {
    #[default]
    Dirichlet,
    Neumann,
    Robin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    #[default]
    Chain,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CacheAction {
    #[default]
    Build,
    Verify,
    Clear,
}

/// Smooth bump potential on the interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: f64,
    pub half_width: f64,
    pub height: f64,
    #[serde(default = "default_bump_samples")]
    pub samples: usize,
}

fn default_bump_samples() -> usize {
    401
}

/// `|x|` range and sample count of a `dtn-scan`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub abs_min: Option<f64>,
    pub abs_max: Option<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            abs_min: None,
            abs_max: None,
            points: 48,
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub geometry: GeometryKind,
    pub m: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub bump: Option<BumpSpec>,
    pub bc: BcKind,
    /// Robin parameter when `bc = robin`.
    pub robin_t: f64,
    /// Spectral cutoff for `zeta`; `None` picks `8·10⁵/L²` or `1.6·10⁵/R²`.
    pub cutoff: Option<f64>,
    /// Extra real point at which `zeta` evaluates `ζ(s)`.
    pub s: Option<f64>,
    pub resolution: Resolution,
    pub grid: GridSpec,
    pub d: u32,
    pub j_max: Option<i32>,
    /// Largest accepted fit residual for `fit`.
    pub max_residual: Option<f64>,
    pub seed: u64,
    /// Node count for generated discrete chains (or `n × n` grids).
    pub n: usize,
    pub shape: ShapeKind,
    /// Discrete problem JSON for `lab` instead of a generated one.
    pub problem: Option<PathBuf>,
    /// Sample CSV for `fit`.
    pub input: Option<PathBuf>,
    /// JSON (or CSV for `dtn-scan`) output path.
    pub output: Option<PathBuf>,
    /// CSV summary output for `verify`.
    pub csv: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Use the Bessel-zero cache in disk computations.
    pub use_cache: bool,
    pub cache_action: CacheAction,
    /// Zeros up to this argument are built by `cache build`.
    pub cache_x_max: f64,
    /// Fraction of cached zeros re-derived by `cache verify`.
    pub verify_fraction: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::Lab,
            geometry: GeometryKind::Interval,
            m: 1.0,
            length: 1.0,
            radius: 1.0,
            bump: None,
            bc: BcKind::Dirichlet,
            robin_t: 0.5,
            cutoff: None,
            s: None,
            resolution: Resolution::default(),
            grid: GridSpec::default(),
            d: 1,
            j_max: None,
            max_residual: None,
            seed: 7,
            n: 40,
            shape: ShapeKind::Chain,
            problem: None,
            input: None,
            output: None,
            csv: None,
            cache_dir: None,
            use_cache: false,
            cache_action: CacheAction::Build,
            cache_x_max: 410.0,
            verify_fraction: 0.01,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("L", self.length),
            ("R", self.radius),
            ("cache_x_max", self.cache_x_max),
            ("verify_fraction", self.verify_fraction),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::ConfigInvalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("cutoff", self.cutoff), ("max_residual", self.max_residual)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::ConfigInvalid(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.verify_fraction > 1.0 {
            return Err(Error::ConfigInvalid("verify_fraction must not exceed 1".into()));
        }
        if self.d == 0 || self.d > 2 {
            return Err(Error::ConfigInvalid(format!("d = {} is not supported (1 or 2)", self.d)));
        }
        if self.n < 4 {
            return Err(Error::ConfigInvalid(format!("n = {} is too small", self.n)));
        }
        Ok(())
    }

    fn cache(&self) -> BesselZeroCache {
        self.cache_dir.as_ref().map_or_else(BesselZeroCache::from_env, BesselZeroCache::new)
    }

    fn interval_model(&self) -> Result<IntervalModel> {
        let potential = self
            .bump
            .map(|b| Potential::bump(self.length, b.center, b.half_width, b.height, b.samples))
            .transpose()?;
        IntervalModel::with_potential(self.length, self.m, potential)
    }

    fn boundary_condition(&self) -> BoundaryCondition {
        match self.bc {
            BcKind::Dirichlet => BoundaryCondition::Dirichlet,
            BcKind::Neumann => BoundaryCondition::Neumann,
            BcKind::Robin => BoundaryCondition::Robin(self.robin_t),
        }
    }

    fn discrete_problem(&self) -> Result<DiscreteBoundaryProblem> {
        if let Some(path) = &self.problem {
            let text = fs::read_to_string(path)?;
            return serde_json::from_str(&text)
                .map_err(|e| Error::ConfigInvalid(format!("problem {}: {e}", path.display())));
        }
        Ok(match self.shape {
            ShapeKind::Chain => random_chain(self.seed, self.n),
            ShapeKind::Grid => {
                let side = (self.n as f64).sqrt().round().max(2.0) as usize;
                random_grid(self.seed, side, side)
            }
        })
    }

    fn discrete_config(&self) -> DiscreteConfig {
        let shape = match self.shape {
            ShapeKind::Chain => DiscreteShape::Chain { nodes: self.n },
            ShapeKind::Grid => {
                let side = (self.n as f64).sqrt().round().max(2.0) as usize;
                DiscreteShape::Grid { nx: side, ny: side }
            }
        };
        DiscreteConfig {
            seed: self.seed,
            shape,
            degenerate: false,
        }
    }

    fn dtn_operator(&self) -> Result<DtnOperator> {
        Ok(match self.geometry {
            GeometryKind::Interval => DtnOperator::Interval(self.interval_model()?),
            GeometryKind::Circle | GeometryKind::CutCircle => {
                DtnOperator::CutCircle(CircleModel::new(self.length, self.m)?)
            }
            GeometryKind::Disk => DtnOperator::Disk(DiskModel::new(self.radius, self.m)?),
            g => return Err(Error::ConfigInvalid(format!("dtn-scan does not support geometry {g:?}"))),
        })
    }
}

/// Result of a successful run: whether all assertions held, plus the text
/// printed for the user.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn record_table(records: &[CheckRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<32} {:>12} {:>10}  result", "check", "value", "tolerance");
    for r in records {
        let _ = writeln!(
            out,
            "{:<32} {:>12.3e} {:>10.1e}  {}",
            r.name,
            r.value,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    out
}

/// Executes the pipeline selected by `config.command`.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    match config.command {
        CommandKind::Lab => run_lab(config),
        CommandKind::Verify => run_verify(config),
        CommandKind::Zeta => run_zeta(config),
        CommandKind::DtnScan => run_dtn_scan(config),
        CommandKind::Fit => run_fit(config),
        CommandKind::Cache => cache_manage(&config.cache(), config.cache_action, config).map(|(pass, summary)| Outcome { pass, summary }),
    }
}

fn run_lab(config: &RunConfig) -> Result<Outcome> {
    let problem = config.discrete_problem()?;
    let label = config
        .problem
        .as_ref()
        .map_or_else(|| format!("{:?} seed {} n {}", config.shape, config.seed, config.n), |p| p.display().to_string());
    let records = lab_records(&problem, &label)?;
    let pass = records.iter().all(|r| r.pass);
    if let Some(out) = &config.output {
        write_output(out, &to_json(&json!({"schema_version": SCHEMA_VERSION, "problem": label, "checks": records}))?)?;
    }
    Ok(Outcome {
        pass,
        summary: format!("discrete lab: {label} (n_total = {})\n{}", problem.n_total, record_table(&records)),
    })
}

fn run_verify(config: &RunConfig) -> Result<Outcome> {
    let items = match config.geometry {
        GeometryKind::Interval => vec![Verification::Interval(config.interval_model()?)],
        GeometryKind::Circle | GeometryKind::CutCircle => {
            vec![Verification::CutCircle(CircleModel::new(config.length, config.m)?)]
        }
        GeometryKind::Disk => vec![Verification::Disk(DiskModel::new(config.radius, config.m)?)],
        GeometryKind::Discrete => vec![Verification::Discrete(config.discrete_config())],
        GeometryKind::All => default_suite()?,
    };
    let mut res = config.resolution.clone();
    if config.j_max.is_some() {
        res.j_max = config.j_max;
    }
    let cache = config.use_cache.then(|| config.cache());
    let results = run_suite(&items, &res, cache.as_ref());
    // surface the first numerical failure, keeping its context
    let reports: Vec<VerificationReport> = results.into_iter().collect::<Result<_>>()?;
    let pass = reports.iter().all(|r| r.pass);

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{:<28} {:>14} {:>14} {:>12} {:>10} {:>9}  result",
        "geometry", "lhs", "rhs", "c", "rel.err", "tol"
    );
    for r in &reports {
        let _ = writeln!(
            summary,
            "{:<28} {:>14.8} {:>14.8} {:>12.8} {:>10.2e} {:>9.0e}  {}",
            r.label(),
            r.lhs,
            r.rhs,
            r.c,
            r.relative_error,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
        for c in r.failed_checks() {
            let _ = writeln!(summary, "    failed check {}: {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
        }
    }
    if let Some(out) = &config.output {
        let body = if reports.len() == 1 { to_json(&reports[0])? } else { to_json(&reports)? };
        write_output(out, &body)?;
    }
    if let Some(csv) = &config.csv {
        let mut body = String::from(VerificationReport::csv_header());
        body.push('\n');
        for r in &reports {
            body.push_str(&r.csv_row());
            body.push('\n');
        }
        write_output(csv, &body)?;
    }
    Ok(Outcome { pass, summary })
}

fn run_zeta(config: &RunConfig) -> Result<Outcome> {
    let bc = config.boundary_condition();
    let source = match config.geometry {
        GeometryKind::Interval => {
            let model = config.interval_model()?;
            let cutoff = config.cutoff.unwrap_or(8e5 / (config.length * config.length) + config.m * config.m);
            SpectrumSource::interval(&model, bc, cutoff)?
        }
        GeometryKind::Circle | GeometryKind::CutCircle => {
            let cutoff = config.cutoff.unwrap_or(3.2e6 / (config.length * config.length) + config.m * config.m);
            SpectrumSource::circle(&CircleModel::new(config.length, config.m)?, cutoff)?
        }
        GeometryKind::Disk => {
            let cutoff = config.cutoff.unwrap_or(1.6e5 / (config.radius * config.radius) + config.m * config.m);
            let cache = config.use_cache.then(|| config.cache());
            SpectrumSource::disk(&DiskModel::new(config.radius, config.m)?, bc, cutoff, cache.as_ref())?
        }
        g => return Err(Error::ConfigInvalid(format!("zeta does not support geometry {g:?}"))),
    };
    let result = zeta_prime_zero(&source)?;
    let mut summary = format!(
        "zeta'(0) = {:.12}  det = {:.12e}  error estimate {:.2e}  ({} eigenvalues below {:.4e})\n",
        result.zeta_prime_zero, result.determinant, result.error_estimate, result.diagnostics.eigenvalue_count, source.cutoff
    );
    let mut doc = serde_json::to_value(&result)?;
    if let Some(s) = config.s {
        let v = zeta(&source, num_complex::Complex64::new(s, 0.0))?;
        let _ = writeln!(summary, "zeta({s}) = {:.12}  error estimate {:.2e}", v.value.re, v.error_estimate);
        doc["zeta_s"] = json!({"s": s, "value": v.value.re, "error_estimate": v.error_estimate});
    }
    doc["schema_version"] = json!(SCHEMA_VERSION);
    if let Some(out) = &config.output {
        write_output(out, &to_json(&doc)?)?;
    }
    Ok(Outcome { pass: true, summary })
}

/// Default scan range: four decades above `10⁴·max(m², 1/L²)` in one
/// dimension, three decades above `10²·max(m², 1/R²)` for the disk.
fn default_scan_range(config: &RunConfig) -> (f64, f64) {
    let m2 = config.m * config.m;
    match config.geometry {
        GeometryKind::Disk => {
            let lo = 1e2 * m2.max(1.0 / (config.radius * config.radius));
            (lo, 1e3 * lo)
        }
        _ => {
            let lo = 1e4 * m2.max(1.0 / (config.length * config.length));
            (lo, 1e4 * lo)
        }
    }
}

/// `x,logdetq,err` with 15 significant digits, `x` descending.
pub fn samples_to_csv(samples: &[Sample]) -> String {
    let mut out = String::from("x,logdetq,err\n");
    for s in samples {
        let _ = writeln!(out, "{:.14e},{:.14e},{:.14e}", s.x, s.logdetq, s.err);
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<Vec<Sample>> {
    if text.trim().is_empty() {
        return Err(Error::ConfigInvalid("sample file is empty".into()));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::ConfigInvalid(format!("sample CSV: {e}")))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "logdetq", "err"] {
        return Err(Error::ConfigInvalid(format!("sample CSV header must be x,logdetq,err, got {headers:?}")));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::ConfigInvalid(format!("sample CSV: {e}"))))
        .collect()
}

fn run_dtn_scan(config: &RunConfig) -> Result<Outcome> {
    let op = config.dtn_operator()?;
    let (lo, hi) = default_scan_range(config);
    let (lo, hi) = (config.grid.abs_min.unwrap_or(lo), config.grid.abs_max.unwrap_or(hi));
    if !(lo > 0.0 && hi > lo) || config.grid.points < 2 {
        return Err(Error::ConfigInvalid(format!("bad scan range [{lo}, {hi}] with {} points", config.grid.points)));
    }
    let samples = sample_logdetq(&op, &geometric_grid(lo, hi, config.grid.points))?;
    let csv = samples_to_csv(&samples);
    match &config.output {
        Some(out) => write_output(out, &csv)?,
        None => print!("{csv}"),
    }
    Ok(Outcome {
        pass: true,
        summary: format!("{} samples of log det Q on |x| in [{lo:.3e}, {hi:.3e}]\n", samples.len()),
    })
}

fn run_fit(config: &RunConfig) -> Result<Outcome> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("fit needs an input CSV (--input)".into()))?;
    let text = fs::read_to_string(input)
        .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", input.display())))?;
    let samples = samples_from_csv(&text)?;
    let j_max = config.j_max.unwrap_or_else(|| crate::asymptotics::default_j_max(config.d));
    let fit: ExpansionFit = match config.max_residual {
        Some(r) => fit_checked(&samples, config.d, j_max, r)?,
        None => fit_expansion(&samples, config.d, j_max)?,
    };
    let body = to_json(&fit)?;
    match &config.output {
        Some(out) => write_output(out, &body)?,
        None => print!("{body}"),
    }
    Ok(Outcome {
        pass: true,
        summary: format!(
            "pi0 = {:.10}  c = {:.10}  q0 = {:.10}  residual {:.2e}  cond {:.2e}\n",
            fit.pi0(),
            (-fit.pi0()).exp(),
            fit.q0(),
            fit.residual,
            fit.condition_number
        ),
    })
}

/// Builds, verifies or clears the Bessel-zero cache.
pub fn cache_manage(cache: &BesselZeroCache, action: CacheAction, config: &RunConfig) -> Result<(bool, String)> {
    let dir = cache.dir().display();
    match action {
        CacheAction::Build => {
            let count = cache.build(config.cache_x_max)?;
            Ok((true, format!("cached {count} zeros below {} in {dir}\n", config.cache_x_max)))
        }
        CacheAction::Verify => {
            let audit = cache.verify(config.verify_fraction, config.seed)?;
            if audit.checked == 0 {
                return Ok((false, format!("cache in {dir} is empty\n")));
            }
            Ok((
                audit.pass,
                format!(
                    "re-derived {} zeros: max relative error {:.2e} (tolerance {:.0e}) {}\n",
                    audit.checked,
                    audit.max_relative_error,
                    audit.tolerance,
                    if audit.pass { "pass" } else { "FAIL" }
                ),
            ))
        }
        CacheAction::Clear => {
            cache.clear()?;
            Ok((true, format!("cleared {dir}\n")))
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bfk", version, about = "Checks of the determinant gluing formula on model geometries")]
pub struct Cli {
    /// JSON config document; flags given on the command line override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (JSON report, or CSV for dtn-scan).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args, Default)]
pub struct ModelFlags {
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Bump potential height on the interval (centred, half-width L/5).
    #[arg(long)]
    pub bump_height: Option<f64>,
    #[arg(long)]
    pub bump_center: Option<f64>,
    #[arg(long)]
    pub bump_width: Option<f64>,
    /// Use the on-disk Bessel-zero cache.
    #[arg(long)]
    pub use_cache: bool,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Discrete-lab identity checks on a generated or loaded problem.
    Lab {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        shape: Option<ShapeKind>,
        /// Problem JSON instead of a generated problem.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
    /// End-to-end check of det A1 / det A0 = c det Q.
    Verify {
        #[arg(value_enum)]
        geometry: Option<GeometryKind>,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cutoff_scale: Option<f64>,
        #[arg(long)]
        fit_points: Option<usize>,
        #[arg(long)]
        j_max: Option<i32>,
        /// CSV summary, one row per geometry.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// zeta'(0) and the determinant of one spectrum.
    Zeta {
        #[arg(value_enum)]
        geometry: Option<GeometryKind>,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long, value_enum)]
        bc: Option<BcKind>,
        #[arg(long)]
        robin_t: Option<f64>,
        #[arg(long)]
        cutoff: Option<f64>,
        /// Also evaluate zeta(s) at this real s.
        #[arg(long, allow_negative_numbers = true)]
        s: Option<f64>,
    },
    /// Samples of log det Q on the negative axis as x,logdetq,err CSV.
    DtnScan {
        #[arg(value_enum)]
        geometry: Option<GeometryKind>,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        abs_min: Option<f64>,
        #[arg(long)]
        abs_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Fits the large-|x| expansion to a dtn-scan CSV.
    Fit {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        j_max: Option<i32>,
        #[arg(long)]
        max_residual: Option<f64>,
    },
    /// Manages the Bessel-zero cache.
    Cache {
        #[arg(value_enum)]
        action: Option<CacheAction>,
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        fraction: Option<f64>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ModelFlags {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.m, self.m);
        set(&mut c.length, self.length);
        set(&mut c.radius, self.radius);
        if let Some(height) = self.bump_height {
            let base = c.bump.unwrap_or(BumpSpec {
                center: 0.5 * c.length,
                half_width: 0.2 * c.length,
                height,
                samples: default_bump_samples(),
            });
            c.bump = Some(BumpSpec { height, ..base });
        }
        if let Some(b) = c.bump.as_mut() {
            set(&mut b.center, self.bump_center);
            set(&mut b.half_width, self.bump_width);
        }
        c.use_cache |= self.use_cache;
        if self.cache_dir.is_some() {
            c.cache_dir = self.cache_dir;
        }
    }
}

impl Cli {
    /// The config file (if any) with every given flag applied on top.
    pub fn into_config(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if self.out.is_some() {
            c.output = self.out;
        }
        set(&mut c.seed, self.seed);
        match self.command {
            Cmd::Lab { n, shape, problem } => {
                c.command = CommandKind::Lab;
                set(&mut c.n, n);
                set(&mut c.shape, shape);
                if problem.is_some() {
                    c.problem = problem;
                }
            }
            Cmd::Verify {
                geometry,
                model,
                n,
                cutoff_scale,
                fit_points,
                j_max,
                csv,
            } => {
                c.command = CommandKind::Verify;
                set(&mut c.geometry, geometry);
                model.apply(&mut c);
                set(&mut c.n, n);
                set(&mut c.resolution.cutoff_scale, cutoff_scale);
                set(&mut c.resolution.fit_points, fit_points);
                if j_max.is_some() {
                    c.j_max = j_max;
                }
                if csv.is_some() {
                    c.csv = csv;
                }
            }
            Cmd::Zeta {
                geometry,
                model,
                bc,
                robin_t,
                cutoff,
                s,
            } => {
                c.command = CommandKind::Zeta;
                set(&mut c.geometry, geometry);
                model.apply(&mut c);
                set(&mut c.bc, bc);
                set(&mut c.robin_t, robin_t);
                if cutoff.is_some() {
                    c.cutoff = cutoff;
                }
                if s.is_some() {
                    c.s = s;
                }
            }
            Cmd::DtnScan {
                geometry,
                model,
                abs_min,
                abs_max,
                points,
            } => {
                c.command = CommandKind::DtnScan;
                set(&mut c.geometry, geometry);
                model.apply(&mut c);
                if abs_min.is_some() {
                    c.grid.abs_min = abs_min;
                }
                if abs_max.is_some() {
                    c.grid.abs_max = abs_max;
                }
                set(&mut c.grid.points, points);
            }
            Cmd::Fit {
                input,
                d,
                j_max,
                max_residual,
            } => {
                c.command = CommandKind::Fit;
                if input.is_some() {
                    c.input = input;
                }
                set(&mut c.d, d);
                if j_max.is_some() {
                    c.j_max = j_max;
                }
                if max_residual.is_some() {
                    c.max_residual = max_residual;
                }
            }
            Cmd::Cache {
                action,
                dir,
                x_max,
                fraction,
            } => {
                c.command = CommandKind::Cache;
                set(&mut c.cache_action, action);
                if dir.is_some() {
                    c.cache_dir = dir;
                }
                set(&mut c.cache_x_max, x_max);
                set(&mut c.verify_fraction, fraction);
            }
        }
        Ok(c)
    }
}

/// Parses `args`, runs, prints the summary and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.into_config().and_then(|c| run(&c)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        Cli::try_parse_from(std::iter::once("bfk").chain(args.iter().copied()))
            .unwrap()
            .into_config()
            .unwrap()
    }

    #[test]
    fn flags_fill_config() {
        let c = parse(&["verify", "interval", "--m", "2", "--L", "1"]);
        assert_eq!(c.command, CommandKind::Verify);
        assert_eq!(c.geometry, GeometryKind::Interval);
        assert_eq!((c.m, c.length), (2.0, 1.0));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"command": "verify", "geometry": "disk", "m": 3.0, "R": 2.0, "seed": 11}"#).unwrap();
        let c = parse(&["--config", path.to_str().unwrap(), "verify", "--m", "1"]);
        assert_eq!(c.geometry, GeometryKind::Disk);
        assert_eq!((c.m, c.radius, c.seed), (1.0, 2.0, 11));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"mass": 3.0}"#).unwrap();
        assert!(matches!(RunConfig::from_json_file(&path), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn csv_round_trip() {
        let s = vec![
            Sample { x: -10.0, logdetq: 10f64.ln(), err: 1e-15 },
            Sample { x: -100.0, logdetq: 100f64.ln(), err: 0.0 },
        ];
        let text = samples_to_csv(&s);
        assert!(text.starts_with("x,logdetq,err\n-1.00000000000000e1,"));
        let back = samples_from_csv(&text).unwrap();
        for (a, b) in s.iter().zip(&back) {
            assert!((a.logdetq - b.logdetq).abs() <= 1e-14 * a.logdetq.abs());
        }
    }

    #[test]
    fn non_positive_tolerances_are_rejected() {
        let c = RunConfig {
            max_residual: Some(0.0),
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::ConfigInvalid(_))));
    }
}
