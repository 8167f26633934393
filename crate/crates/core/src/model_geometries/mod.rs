//! Exactly solvable model geometries: the interval `[0, L]`, the circle of
//! circumference `L` (cut at one point), and the disk of radius `R`, all
//! with the operator `−Δ + m² (+ V)`.

pub mod bessel;
pub mod cache;
mod potential;

pub use bessel::{bessel_i_ratio, bessel_j, bessel_j_zero, bessel_jp_zero, BesselZero, ZeroKind};
pub use cache::BesselZeroCache;
pub use potential::Potential;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{brent, dopri45, OdeOptions};

/// `−d²/dx² + m² + V` on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalModel {
    pub length: f64,
    pub mass: f64,
    pub potential: Option<Potential>,
}

/// `−d²/dx² + m²` on the circle of circumference `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleModel {
    pub circumference: f64,
    pub mass: f64,
}

/// `−Δ + m²` on the disk of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskModel {
    pub radius: f64,
    pub mass: f64,
}

/// Boundary condition of the interpolating family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// `(1 − t)·u + t·∂_n u = 0`, `t ∈ [0, 1]`.
    Robin(f64),
    /// Twisted transmission condition across a cut.
    Transmission(f64),
}

impl BoundaryCondition {
    /// Robin parameter `t` of a condition in the Dirichlet–Neumann family.
    fn robin_t(self) -> Result<f64> {
        match self {
            BoundaryCondition::Dirichlet => Ok(0.0),
            BoundaryCondition::Neumann => Ok(1.0),
            BoundaryCondition::Robin(t) if (0.0..=1.0).contains(&t) => Ok(t),
            BoundaryCondition::Robin(t) => Err(Error::InvalidModel(format!("Robin parameter {t} outside [0, 1]"))),
            BoundaryCondition::Transmission(_) => {
                Err(Error::InvalidModel("transmission conditions apply to a cut, not to the interval ends".into()))
            }
        }
    }
}

/// JSON description of a model: `{type, L or R, m, V_samples}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelDescriptor {
    Interval {
        #[serde(rename = "L")]
        length: f64,
        m: f64,
        #[serde(rename = "V_samples", default, skip_serializing_if = "Option::is_none")]
        v_samples: Option<Vec<f64>>,
    },
    Circle {
        #[serde(rename = "L")]
        length: f64,
        m: f64,
    },
    Disk {
        #[serde(rename = "R")]
        radius: f64,
        m: f64,
    },
}

impl IntervalModel {
    pub fn new(length: f64, mass: f64) -> Result<Self> {
        Self::with_potential(length, mass, None)
    }

    pub fn with_potential(length: f64, mass: f64, potential: Option<Potential>) -> Result<Self> {
        if !(length > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidModel(format!("need L > 0 and m > 0, got L = {length}, m = {mass}")));
        }
        if let Some(p) = &potential {
            p.validate_for(length)?;
        }
        Ok(Self { length, mass, potential })
    }

    /// `q(x) = m² + V(x)`.
    pub fn q(&self, x: f64) -> f64 {
        self.mass * self.mass + self.potential.as_ref().map_or(0.0, |p| p.value(x))
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::Interval {
            length: self.length,
            m: self.mass,
            v_samples: self.potential.as_ref().map(|p| p.samples().to_vec()),
        }
    }

    fn ode_options(&self) -> OdeOptions {
        let max_step = self.potential.as_ref().map_or(f64::INFINITY, |p| p.spacing());
        OdeOptions {
            max_step,
            ..OdeOptions::default()
        }
    }
}

impl ModelDescriptor {
    /// Interval model described by this record, if it is one.
    pub fn interval(&self) -> Result<IntervalModel> {
        match self {
            ModelDescriptor::Interval { length, m, v_samples } => {
                let pot = v_samples.as_ref().map(|s| Potential::from_samples(*length, s.clone())).transpose()?;
                IntervalModel::with_potential(*length, *m, pot)
            }
            _ => Err(Error::InvalidModel("not an interval model".into())),
        }
    }
}

impl CircleModel {
    pub fn new(circumference: f64, mass: f64) -> Result<Self> {
        if !(circumference > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidModel("need L > 0 and m > 0".into()));
        }
        Ok(Self { circumference, mass })
    }

    /// The interval obtained by cutting the circle at one point.
    pub fn cut(&self) -> IntervalModel {
        IntervalModel {
            length: self.circumference,
            mass: self.mass,
            potential: None,
        }
    }
}

impl DiskModel {
    pub fn new(radius: f64, mass: f64) -> Result<Self> {
        if !(radius > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidModel("need R > 0 and m > 0".into()));
        }
        Ok(Self { radius, mass })
    }
}

/// Robin eigencondition for `V = 0`: roots `κ > 0` of
/// `2t(1−t)κ cos κL + ((1−t)² − t²κ²) sin κL`.
fn robin_condition(t: f64, l: f64, kappa: f64) -> f64 {
    2.0 * t * (1.0 - t) * kappa * (kappa * l).cos() + ((1.0 - t).powi(2) - t * t * kappa * kappa) * (kappa * l).sin()
}

/// The first `count` eigenvalues of `−d² + m²` (`V = 0`) under `bc`.
fn free_interval_spectrum(length: f64, mass: f64, t: f64, count: usize) -> Result<Vec<f64>> {
    let m2 = mass * mass;
    let step = PI / length;
    (0..count)
        .map(|k| {
            let kappa = if t == 0.0 {
                (k + 1) as f64 * step
            } else if t == 1.0 {
                k as f64 * step
            } else {
                let lo = if k == 0 { 1e-12 * step } else { k as f64 * step };
                let hi = (k + 1) as f64 * step;
                brent(|x| robin_condition(t, length, x), lo, hi, 1e-15 * hi)?
            };
            Ok(m2 + kappa * kappa)
        })
        .collect()
}

/// Prüfer angle at `x = L` for spectral value `λ` with scale `ω`.
fn pruefer_angle(model: &IntervalModel, t: f64, lambda: f64, omega: f64) -> Result<f64> {
    let theta0 = (omega * t).atan2(1.0 - t);
    let rhs = |x: f64, y: &[f64; 1]| {
        let (s, c) = y[0].sin_cos();
        [omega * c * c + (lambda - model.q(x)) / omega * s * s]
    };
    Ok(dopri45(rhs, 0.0, model.length, [theta0], model.ode_options())?[0])
}

/// First `count` eigenvalues of the interval operator under `bc`, ascending.
///
/// For `V = 0` the transcendental eigencondition is solved by Brent's
/// method in the bracket between consecutive Neumann and Dirichlet roots.
/// With a potential, a Prüfer-angle shooting method is bracketed by the
/// free eigenvalues shifted by `[min V, max V]`.
pub fn interval_spectrum(model: &IntervalModel, bc: BoundaryCondition, count: usize) -> Result<Vec<f64>> {
    let t = bc.robin_t()?;
    let free = free_interval_spectrum(model.length, model.mass, t, count)?;
    let Some(pot) = &model.potential else {
        return Ok(free);
    };
    let (vmin, vmax) = pot.range();
    free.iter()
        .enumerate()
        .map(|(k, &base)| {
            let omega = base.max(1.0).sqrt();
            let target = (omega * t).atan2(-(1.0 - t)) + k as f64 * PI;
            let f = |lambda: f64| pruefer_angle(model, t, lambda, omega).map(|th| th - target);
            let mut lo = base + vmin - 1e-9 * base.abs().max(1.0);
            let mut hi = base + vmax + 1e-9 * base.abs().max(1.0);
            let mut flo = f(lo)?;
            let mut fhi = f(hi)?;
            let mut widen = 0;
            while flo.signum() == fhi.signum() {
                widen += 1;
                if widen > 20 {
                    return Err(Error::BracketFailure(format!("eigenvalue {k} of {bc:?}")));
                }
                let w = (hi - lo).max(1e-6);
                if flo > 0.0 {
                    lo -= w;
                    flo = f(lo)?;
                } else {
                    hi += w;
                    fhi = f(hi)?;
                }
            }
            let mut err = None;
            let root = brent(
                |l| match f(l) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                },
                lo,
                hi,
                1e-14 * hi.abs(),
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok(root)
        })
        .collect()
}

/// First `count` circle eigenvalues `m² + (2πk/L)²` listed with multiplicity.
pub fn circle_spectrum(model: &CircleModel, count: usize) -> Vec<f64> {
    let m2 = model.mass * model.mass;
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let v = m2 + (2.0 * PI * k as f64 / model.circumference).powi(2);
        out.push(v);
        if k > 0 && out.len() < count {
            out.push(v);
        }
        k += 1;
    }
    out
}

/// Disk eigenvalues below `cutoff`, ascending, with multiplicity.
///
/// Dirichlet values are `m² + (j_{n,k}/R)²`, Neumann values
/// `m² + (j′_{n,k}/R)²` plus the constant mode `m²`; orders `n ≥ 1` count
/// twice. Completeness is certified by [`weyl_audit`].
pub fn disk_spectrum(
    model: &DiskModel,
    bc: BoundaryCondition,
    cutoff: f64,
    cache: Option<&BesselZeroCache>,
) -> Result<Vec<f64>> {
    let m2 = model.mass * model.mass;
    if cutoff <= m2 {
        return Ok(Vec::new());
    }
    let x_max = model.radius * (cutoff - m2).sqrt();
    let kind = match bc {
        BoundaryCondition::Dirichlet => ZeroKind::J,
        BoundaryCondition::Neumann => ZeroKind::JPrime,
        other => return Err(Error::InvalidModel(format!("disk spectrum supports Dirichlet/Neumann, not {other:?}"))),
    };
    let zeros = match cache {
        Some(c) => c.zeros_below(kind, x_max)?,
        None => bessel::zeros_below(kind, x_max)?,
    };
    let mut out = Vec::with_capacity(2 * zeros.len() + 1);
    if kind == ZeroKind::JPrime {
        out.push(m2);
    }
    for z in &zeros {
        let v = m2 + (z.value / model.radius).powi(2);
        out.push(v);
        if z.n >= 1 {
            out.push(v);
        }
    }
    out.sort_by(f64::total_cmp);
    let audit = weyl_audit(&out, 2, PI * model.radius * model.radius, m2);
    if !audit.pass {
        return Err(Error::IncompleteEnumeration(format!(
            "Weyl audit deviation {:.3} at cutoff {cutoff}",
            audit.deviation
        )));
    }
    Ok(out)
}

/// Dirichlet determinant `2·y(L)` with `y″ = (m² + V) y`, `y(0) = 0`, `y′(0) = 1`.
pub fn gelfand_yaglom_det(model: &IntervalModel, bc: BoundaryCondition) -> Result<f64> {
    if bc != BoundaryCondition::Dirichlet {
        return Err(Error::InvalidModel("the Gelfand–Yaglom oracle is fixed to Dirichlet conditions".into()));
    }
    let y = dopri45(
        |x, y: &[f64; 2]| [y[1], model.q(x) * y[0]],
        0.0,
        model.length,
        [0.0, 1.0],
        model.ode_options(),
    )?;
    Ok(2.0 * y[0])
}

/// Outcome of a Weyl-law audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylAudit {
    /// Fitted leading coefficient of `N(λ)` in `λ^{d/2}`.
    pub fitted: f64,
    /// Weyl prediction `vol·ω_d/(2π)^d`.
    pub expected: f64,
    /// `|fitted/expected − 1|`.
    pub deviation: f64,
    pub pass: bool,
}

/// Fits the counting function of a sorted spectrum against
/// `a·μ^{d/2} + b·μ^{(d−1)/2}` with `μ = λ − shift`, over the upper three
/// quarters of the enumerated range, and compares `a` with the Weyl constant
/// for the given volume (length in d = 1, area in d = 2). Passes within 5%.
pub fn weyl_audit(spectrum: &[f64], d: u32, volume: f64, shift: f64) -> WeylAudit {
    let expected = match d {
        1 => volume / PI,
        2 => volume / (4.0 * PI),
        _ => volume / (2.0 * PI).powi(d as i32) * PI.powf(d as f64 / 2.0) / crate::numerics::gamma(num_complex::Complex64::new(d as f64 / 2.0 + 1.0, 0.0)).re,
    };
    let n = spectrum.len();
    if n < 8 {
        return WeylAudit {
            fitted: f64::NAN,
            expected,
            deviation: f64::INFINITY,
            pass: false,
        };
    }
    let top = spectrum[n - 1] - shift;
    let mut rows = Vec::new();
    for i in 1..=40 {
        let mu = top * (0.25 + 0.75 * i as f64 / 40.0);
        let count = spectrum.partition_point(|&l| l - shift <= mu) as f64;
        rows.push((mu, count));
    }
    let p1 = d as f64 / 2.0;
    let p2 = (d as f64 - 1.0) / 2.0;
    // 2×2 normal equations
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(mu, c) in &rows {
        let (f1, f2) = (mu.powf(p1), mu.powf(p2));
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        r1 += f1 * c;
        r2 += f2 * c;
    }
    let det = s11 * s22 - s12 * s12;
    let fitted = (r1 * s22 - r2 * s12) / det;
    let deviation = (fitted / expected - 1.0).abs();
    WeylAudit {
        fitted,
        expected,
        deviation,
        pass: deviation < 0.05,
    }
}
