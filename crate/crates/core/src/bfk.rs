//! End-to-end checks of `det A₁ / det A₀ = c · det Q` on the model
//! geometries and on discrete problems.
//!
//! The two sides are computed by separate pipelines: the determinants come
//! from [`zeta_engine`](crate::zeta_engine) over enumerated spectra, while
//! `det Q` and `c` come from [`dtn_models`](crate::dtn_models) and
//! [`asymptotics`](crate::asymptotics).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{fit_expansion, geometric_grid, locality_audit, sample_logdetq, ExpansionFit};
use crate::contour::{contour_zeta_difference, ContourSpec, GrowthModel};
use crate::discrete_lab::generator::{random_chain, random_grid};
use crate::discrete_lab::{lab_records, q_matrix, DiscreteBoundaryProblem};
use crate::dtn_models::{positivity_selfadjointness_audit, DtnOperator};
use crate::error::{Error, Result};
use crate::model_geometries::{
    gelfand_yaglom_det, BesselZeroCache, BoundaryCondition, CircleModel, DiskModel, IntervalModel, ModelDescriptor,
};
use crate::report::{CheckRecord, SCHEMA_VERSION};
use crate::zeta_engine::{zeta_prime_zero, SpectrumSource, ZetaResult};

/// Identity tolerance for the interval without potential.
pub const INTERVAL_TOLERANCE: f64 = 1e-6;
/// Identity tolerance for the interval with a potential.
pub const POTENTIAL_TOLERANCE: f64 = 1e-5;
pub const CUT_CIRCLE_TOLERANCE: f64 = 1e-4;
pub const DISK_TOLERANCE: f64 = 1e-3;
pub const DISCRETE_TOLERANCE: f64 = 1e-10;

/// Points of the negative axis used by the positivity audit.
const AUDIT_GRID: [f64; 6] = [-0.01, -0.1, -1.0, -10.0, -100.0, -1000.0];

/// A determinant with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub error_estimate: f64,
}

impl From<&ZetaResult> for Measured {
    fn from(z: &ZetaResult) -> Self {
        Self {
            value: z.determinant,
            error_estimate: z.determinant * z.error_estimate,
        }
    }
}

/// Outcome of one verification.
///
/// The JSON form leaves out wall-clock time so that equal inputs give
/// byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub geometry: serde_json::Value,
    pub det_a0: Measured,
    pub det_a1: Measured,
    pub det_q: f64,
    pub pi0: f64,
    pub c: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ExpansionFit>,
    /// Grids, cutoffs and node counts behind every number above.
    pub provenance: serde_json::Value,
    pub pass: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        geometry: serde_json::Value,
        det_a0: Measured,
        det_a1: Measured,
        log_det_q: f64,
        pi0: f64,
        tolerance: f64,
        checks: Vec<CheckRecord>,
        fit: Option<ExpansionFit>,
        provenance: serde_json::Value,
        started: Instant,
    ) -> Self {
        let lhs = det_a1.value / det_a0.value;
        let rhs = (log_det_q - pi0).exp();
        let relative_error = (lhs - rhs).abs() / lhs.abs();
        let pass = relative_error < tolerance && checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            geometry,
            det_a0,
            det_a1,
            det_q: log_det_q.exp(),
            pi0,
            c: (-pi0).exp(),
            lhs,
            rhs,
            relative_error,
            tolerance,
            checks,
            fit,
            provenance,
            pass,
            elapsed: started.elapsed(),
        }
    }

    /// `|lhs − rhs| / |lhs|` from the stored fields.
    pub fn recomputed_relative_error(&self) -> f64 {
        let lhs = self.det_a1.value / self.det_a0.value;
        let rhs = self.c * self.det_q;
        (lhs - rhs).abs() / lhs.abs()
    }

    /// Relative error of `lhs` implied by the determinant error estimates.
    pub fn lhs_error_estimate(&self) -> f64 {
        self.det_a0.error_estimate / self.det_a0.value + self.det_a1.error_estimate / self.det_a1.value
    }

    pub fn failed_checks(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn csv_header() -> &'static str {
        "geometry,det_a0,det_a1,det_q,c,lhs,rhs,relative_error,tolerance,pass"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "\"{}\",{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e},{:.1e},{}",
            self.label(),
            self.det_a0.value,
            self.det_a1.value,
            self.det_q,
            self.c,
            self.lhs,
            self.rhs,
            self.relative_error,
            self.tolerance,
            self.pass
        )
    }

    /// Short label such as `interval(m=2,L=1)`.
    pub fn label(&self) -> String {
        let g = &self.geometry;
        let num = |k: &str| g.get(k).and_then(|v| v.as_f64()).map_or("?".to_string(), |v| format!("{v}"));
        match g.get("type").and_then(|v| v.as_str()) {
            Some("interval") if g.get("V_samples").is_some() => format!("interval(m={},L={},V)", num("m"), num("L")),
            Some("interval") => format!("interval(m={},L={})", num("m"), num("L")),
            Some("circle") => format!("cut_circle(m={},L={})", num("m"), num("L")),
            Some("disk") => format!("disk(m={},R={})", num("m"), num("R")),
            Some("discrete") => format!("discrete(seed={})", num("seed")),
            _ => "unknown".into(),
        }
    }
}

/// Resolution knobs shared by all continuum verifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Resolution {
    /// Multiplies every spectral cutoff.
    pub cutoff_scale: f64,
    /// Number of samples of `log det Q` in the expansion fit.
    pub fit_points: usize,
    /// Highest inverse power in the fit; `None` uses the geometry default.
    pub j_max: Option<i32>,
    /// Gauss nodes per panel on the contour rays.
    pub contour_nodes: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            cutoff_scale: 1.0,
            fit_points: 48,
            j_max: None,
            contour_nodes: 12,
        }
    }
}

impl Resolution {
    /// Every knob doubled.
    pub fn doubled(&self) -> Self {
        Self {
            cutoff_scale: 2.0 * self.cutoff_scale,
            fit_points: 2 * self.fit_points,
            j_max: self.j_max,
            contour_nodes: 2 * self.contour_nodes,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cutoff_scale > 0.0) || self.fit_points < 8 || self.contour_nodes < 2 {
            return Err(Error::ConfigInvalid(format!("invalid resolution {self:?}")));
        }
        Ok(())
    }
}

fn descriptor_json(d: ModelDescriptor) -> serde_json::Value {
    serde_json::to_value(d).expect("descriptors serialize")
}

/// Interval fit grid: `|x|` over four decades above `10⁴·max(m², 1/L²)`.
fn interval_grid(m: f64, l: f64, points: usize) -> (f64, f64, Vec<f64>) {
    let lo = 1e4 * (m * m).max(1.0 / (l * l));
    let hi = 1e4 * lo;
    (lo, hi, geometric_grid(lo, hi, points))
}

fn fit_records(fit: &ExpansionFit, expected: &[(&str, f64, f64)], tol: f64) -> Vec<CheckRecord> {
    expected
        .iter()
        .map(|&(name, got, want)| {
            CheckRecord::below(
                name,
                json!({"expected": want, "fitted": got, "cond": fit.condition_number}),
                (got - want).abs(),
                tol,
            )
        })
        .collect()
}

fn positivity_record(op: &DtnOperator) -> Result<CheckRecord> {
    let audit = positivity_selfadjointness_audit(op, &AUDIT_GRID)?;
    Ok(CheckRecord {
        name: "positivity_selfadjointness".into(),
        inputs: json!({"z_grid": AUDIT_GRID, "min_eigenvalue": audit.min_eigenvalue}),
        value: audit.max_asymmetry,
        tolerance: 1e-12,
        pass: audit.pass,
    })
}

/// `(s/2πi) ∮ z^{−s−1} log det Q(z) dz` for the free interval, compared
/// with `ζ_N(s) − ζ_D(s) = m^{−2s}`.
///
/// The Neumann spectrum is the Dirichlet one plus the constant mode `m²`,
/// so the difference of the explicit spectral sums is exactly `m^{−2s}`.
pub fn interval_contour_record(model: &IntervalModel, s: f64, ray_nodes: usize) -> Result<CheckRecord> {
    let m2 = model.mass * model.mass;
    let op = DtnOperator::Interval(model.clone());
    let spec = ContourSpec {
        ray_nodes,
        ..ContourSpec::with_epsilon(0.5 * m2)
    };
    // |log(m² + r)| ≤ (1 + |ln m²|)(1 + ln r) for r ≥ 1
    let growth = GrowthModel::new(2.0 * (1.0 + m2.ln().abs()), 0.0);
    let rhs = contour_zeta_difference(Complex64::new(s, 0.0), |z| op.log_det_complex(z), &growth, &spec)?;
    let oracle = m2.powf(-s);
    Ok(CheckRecord::below(
        "contour_zeta_difference",
        json!({"s": s, "epsilon": spec.epsilon, "ray_nodes": ray_nodes, "rhs": rhs.value.re, "oracle": oracle}),
        (rhs.value - oracle).norm() / oracle,
        1e-8,
    ))
}

/// Interval `[0, L]` with Dirichlet (`A₀`) and Neumann (`A₁`) ends,
/// optionally with an interior potential.
pub fn verify_interval(model: &IntervalModel, res: &Resolution) -> Result<VerificationReport> {
    res.validate()?;
    let started = Instant::now();
    let (m, l) = (model.mass, model.length);
    let vmax = model.potential.as_ref().map_or(0.0, |p| p.range().1);
    let cutoff = res.cutoff_scale * 8e5 / (l * l) + m * m + vmax;
    let src_d = SpectrumSource::interval(model, BoundaryCondition::Dirichlet, cutoff)?;
    let src_n = SpectrumSource::interval(model, BoundaryCondition::Neumann, cutoff)?;
    let (zd, zn) = rayon::join(|| zeta_prime_zero(&src_d), || zeta_prime_zero(&src_n));
    let (zd, zn) = (zd?, zn?);

    let op = DtnOperator::Interval(model.clone());
    let log_det_q = op.logdet_q(0.0)?.value;
    let (lo, hi, grid) = interval_grid(m, l, res.fit_points);
    let j_max = res.j_max.unwrap_or(4);
    let fit = fit_expansion(&sample_logdetq(&op, &grid)?, 1, j_max)?;

    let mut checks = Vec::new();
    let gy = gelfand_yaglom_det(model, BoundaryCondition::Dirichlet)?;
    checks.push(CheckRecord::below(
        "dirichlet_vs_gelfand_yaglom",
        json!({"zeta": zd.determinant, "gelfand_yaglom": gy}),
        (zd.determinant - gy).abs() / gy,
        1e-6,
    ));
    checks.extend(fit_records(&fit, &[("fit_pi0", fit.pi0(), 0.0), ("fit_q0", fit.q0(), 1.0)], 1e-6));
    if model.potential.is_none() {
        // with a potential the ODE samples are good to ~1e-10 relative,
        // which leaves π₂ resolved only to ~1e-5
        checks.extend(fit_records(&fit, &[("fit_pi2", fit.pi[&2], m * m)], 1e-6));
    }
    checks.push(positivity_record(&op)?);
    let tolerance = if model.potential.is_none() {
        for s in [0.5, 1.0, 2.0] {
            checks.push(interval_contour_record(model, s, res.contour_nodes)?);
        }
        INTERVAL_TOLERANCE
    } else {
        let base = IntervalModel::new(l, m)?;
        let audit = locality_audit(&base, model, &grid)?;
        checks.push(CheckRecord {
            name: "locality_pi0".into(),
            inputs: json!({"pi0_base": audit.pi0_base, "pi0_perturbed": audit.pi0_perturbed,
                           "q0_base": audit.q0_base, "q0_perturbed": audit.q0_perturbed}),
            value: (audit.pi0_base - audit.pi0_perturbed).abs(),
            tolerance: audit.tolerance,
            pass: audit.pass,
        });
        POTENTIAL_TOLERANCE
    };
    let provenance = json!({
        "zeta_cutoff": cutoff,
        "eigenvalues": {"dirichlet": zd.diagnostics.eigenvalue_count, "neumann": zn.diagnostics.eigenvalue_count},
        "split_point": zd.diagnostics.split_point,
        "fit_grid": {"abs_min": lo, "abs_max": hi, "points": grid.len(), "d": 1, "j_max": j_max},
        "contour_ray_nodes": res.contour_nodes,
    });
    Ok(VerificationReport::assemble(
        descriptor_json(model.descriptor()),
        Measured::from(&zd),
        Measured::from(&zn),
        log_det_q,
        fit.pi0(),
        tolerance,
        checks,
        Some(fit),
        provenance,
        started,
    ))
}

/// Circle of circumference `L` cut at one point: `A₁` is the circle itself
/// (transmission condition at the cut), `A₀` the Dirichlet interval.
pub fn verify_cut_circle(model: &CircleModel, res: &Resolution) -> Result<VerificationReport> {
    res.validate()?;
    let started = Instant::now();
    let (m, l) = (model.mass, model.circumference);
    let cut = model.cut();
    let cutoff = res.cutoff_scale * 8e5 / (l * l) + m * m;
    let src_circle = SpectrumSource::circle(model, 4.0 * cutoff)?;
    let src_d = SpectrumSource::interval(&cut, BoundaryCondition::Dirichlet, cutoff)?;
    let (zc, zd) = rayon::join(|| zeta_prime_zero(&src_circle), || zeta_prime_zero(&src_d));
    let (zc, zd) = (zc?, zd?);

    let op = DtnOperator::CutCircle(*model);
    let log_det_q = op.logdet_q(0.0)?.value;
    let (lo, hi, grid) = interval_grid(m, l, res.fit_points);
    let j_max = res.j_max.unwrap_or(4);
    let fit = fit_expansion(&sample_logdetq(&op, &grid)?, 1, j_max)?;

    let mut checks = Vec::new();
    let closed = 4.0 * (0.5 * m * l).sinh().powi(2);
    checks.push(CheckRecord::below(
        "circle_vs_closed_form",
        json!({"zeta": zc.determinant, "closed_form": closed}),
        (zc.determinant - closed).abs() / closed,
        1e-4,
    ));
    let gy = gelfand_yaglom_det(&cut, BoundaryCondition::Dirichlet)?;
    checks.push(CheckRecord::below(
        "dirichlet_vs_gelfand_yaglom",
        json!({"zeta": zd.determinant, "gelfand_yaglom": gy}),
        (zd.determinant - gy).abs() / gy,
        1e-6,
    ));
    let c = (-fit.pi0()).exp();
    checks.push(CheckRecord::below(
        "local_constant_half",
        json!({"c": c, "pi0": fit.pi0()}),
        (c - 0.5).abs(),
        1e-4,
    ));
    checks.extend(fit_records(&fit, &[("fit_q0", fit.q0(), 0.5), ("fit_pi2", fit.pi[&2], 0.5 * m * m)], 1e-6));
    checks.push(positivity_record(&op)?);
    let provenance = json!({
        "zeta_cutoff": {"circle": 4.0 * cutoff, "interval": cutoff},
        "eigenvalues": {"circle": zc.diagnostics.eigenvalue_count, "dirichlet": zd.diagnostics.eigenvalue_count},
        "fit_grid": {"abs_min": lo, "abs_max": hi, "points": grid.len(), "d": 1, "j_max": j_max},
    });
    Ok(VerificationReport::assemble(
        descriptor_json(ModelDescriptor::Circle { length: l, m }),
        Measured::from(&zd),
        Measured::from(&zc),
        log_det_q,
        fit.pi0(),
        CUT_CIRCLE_TOLERANCE,
        checks,
        Some(fit),
        provenance,
        started,
    ))
}

/// Disk of radius `R` with Dirichlet (`A₀`) and Neumann (`A₁`) boundary.
pub fn verify_disk(model: &DiskModel, res: &Resolution, cache: Option<&BesselZeroCache>) -> Result<VerificationReport> {
    res.validate()?;
    let started = Instant::now();
    let (m, r) = (model.mass, model.radius);
    let cutoff = res.cutoff_scale * 1.6e5 / (r * r) + m * m;
    let (zd, zn) = rayon::join(
        || zeta_prime_zero(&SpectrumSource::disk(model, BoundaryCondition::Dirichlet, cutoff, cache)?),
        || zeta_prime_zero(&SpectrumSource::disk(model, BoundaryCondition::Neumann, cutoff, cache)?),
    );
    let (zd, zn) = (zd?, zn?);

    let op = DtnOperator::Disk(*model);
    let ld = op.logdet_q(0.0)?;
    let lo = 1e2 * (m * m).max(1.0 / (r * r));
    let hi = 1e3 * lo;
    let grid = geometric_grid(lo, hi, res.fit_points);
    let j_max = res.j_max.unwrap_or(5);
    let fit = fit_expansion(&sample_logdetq(&op, &grid)?, 2, j_max)?;

    let checks = vec![
        positivity_record(&op)?,
        CheckRecord::below(
            "fit_residual",
            json!({"cond": fit.condition_number}),
            fit.residual,
            1e-8,
        ),
        CheckRecord::below(
            "logdet_q_error",
            json!({"mode_cutoff": ld.mode_cutoff}),
            ld.error_estimate,
            1e-8,
        ),
    ];
    let provenance = json!({
        "zeta_cutoff": cutoff,
        "eigenvalues": {"dirichlet": zd.diagnostics.eigenvalue_count, "neumann": zn.diagnostics.eigenvalue_count},
        "mode_cutoff": ld.mode_cutoff,
        "fit_grid": {"abs_min": lo, "abs_max": hi, "points": grid.len(), "d": 2, "j_max": j_max},
    });
    Ok(VerificationReport::assemble(
        descriptor_json(ModelDescriptor::Disk { radius: r, m }),
        Measured::from(&zd),
        Measured::from(&zn),
        ld.value,
        fit.pi0(),
        DISK_TOLERANCE,
        checks,
        Some(fit),
        provenance,
        started,
    ))
}

/// Shape of a generated discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscreteShape {
    Chain { nodes: usize },
    Grid { nx: usize, ny: usize },
}

/// A seeded discrete problem; `degenerate` sets `B₁ = B₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteConfig {
    pub seed: u64,
    pub shape: DiscreteShape,
    #[serde(default)]
    pub degenerate: bool,
}

impl DiscreteConfig {
    pub fn problem(&self) -> Result<DiscreteBoundaryProblem> {
        let p = match self.shape {
            DiscreteShape::Chain { nodes } if nodes >= 4 => random_chain(self.seed, nodes),
            DiscreteShape::Grid { nx, ny } if nx >= 2 && ny >= 2 => random_grid(self.seed, nx, ny),
            _ => return Err(Error::ConfigInvalid(format!("discrete shape {:?} is too small", self.shape))),
        };
        Ok(if self.degenerate { p.with_b1_equal_b0() } else { p })
    }
}

/// Finite-dimensional form, where `c = 1`: `det(A, B₁)/det(A, B₀) = det Q(0)`
/// together with the discrete-lab checks on the same problem.
pub fn verify_discrete(config: &DiscreteConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let problem = config.problem()?;
    let z0 = Complex64::new(0.0, 0.0);
    let l0 = problem.log_det(0.0, z0)?;
    let l1 = problem.log_det(1.0, z0)?;
    let q = q_matrix(&problem, z0)?;
    let log_det_q = q.determinant().ln();
    let label = format!("seed {}", config.seed);
    let checks = lab_records(&problem, &label)?;
    let geometry = json!({"type": "discrete", "seed": config.seed, "shape": config.shape,
                          "degenerate": config.degenerate, "n_total": problem.n_total, "n_bdy": problem.n_bdy});
    // the assembled determinants may be negative; only the ratio is compared
    let ratio = (l1 - l0).exp();
    let sign = if ratio.re < 0.0 { -1.0 } else { 1.0 };
    let lhs_log = (l1 - l0).re;
    Ok(VerificationReport::assemble(
        geometry,
        Measured {
            value: 1.0,
            error_estimate: 0.0,
        },
        Measured {
            value: sign * lhs_log.exp(),
            error_estimate: 0.0,
        },
        log_det_q.re,
        0.0,
        DISCRETE_TOLERANCE,
        checks,
        None,
        json!({"z": 0.0, "contour": "half the smallest eigenvalue modulus", "interpolation_nodes": 64}),
        started,
    ))
}

/// One requested verification.
#[derive(Debug, Clone, PartialEq)]
pub enum Verification {
    Interval(IntervalModel),
    CutCircle(CircleModel),
    Disk(DiskModel),
    Discrete(DiscreteConfig),
}

impl Verification {
    pub fn run(&self, res: &Resolution, cache: Option<&BesselZeroCache>) -> Result<VerificationReport> {
        match self {
            Verification::Interval(m) => verify_interval(m, res),
            Verification::CutCircle(c) => verify_cut_circle(c, res),
            Verification::Disk(d) => verify_disk(d, res, cache),
            Verification::Discrete(c) => verify_discrete(c),
        }
    }
}

/// Runs independent verifications concurrently; results keep input order.
pub fn run_suite(items: &[Verification], res: &Resolution, cache: Option<&BesselZeroCache>) -> Vec<Result<VerificationReport>> {
    items.par_iter().map(|v| v.run(res, cache)).collect()
}

/// The standard set of model verifications.
pub fn default_suite() -> Result<Vec<Verification>> {
    let mut out = Vec::new();
    for (m, l) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        out.push(Verification::Interval(IntervalModel::new(l, m)?));
    }
    for (m, l) in [(1.0, 2.0 * PI), (2.0, 1.0)] {
        out.push(Verification::CutCircle(CircleModel::new(l, m)?));
    }
    for m in [1.0, 2.0] {
        out.push(Verification::Disk(DiskModel::new(1.0, m)?));
    }
    for seed in [1, 2, 3] {
        out.push(Verification::Discrete(DiscreteConfig {
            seed,
            shape: DiscreteShape::Chain { nodes: 40 },
            degenerate: false,
        }));
    }
    Ok(out)
}
