//! Spectral zeta functions and zeta-regularized determinants.
//!
//! An enumerated spectrum, complete below a cutoff `Λ`, is split in Mellin
//! time at `T = 37/Λ`, where `e^{−ΛT}` is below double precision. Above `T`
//! the heat trace is summed exactly from the eigenvalues (closed form through
//! incomplete gamma functions); below `T` it is replaced by its small-time
//! expansion `Σ c_α t^α`, with the coefficients fitted to the enumerated
//! heat trace on `[T, 20T]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_geometries::{
    circle_spectrum, disk_spectrum, interval_spectrum, BesselZeroCache, BoundaryCondition, CircleModel, DiskModel,
    IntervalModel,
};
use crate::numerics::{expint_e1, recip_gamma, upper_gamma_regularized, CompensatedSum, EULER_GAMMA};

/// `e^{−ΛT}` at the split point.
const SPLIT_FACTOR: f64 = 37.0;
/// Fit window `[T, FIT_SPAN·T]`.
const FIT_SPAN: f64 = 20.0;
const FIT_POINTS: usize = 80;

/// One term `c·t^α` of the small-time heat trace expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTerm {
    pub exponent: f64,
    pub coefficient: f64,
}

/// Least-squares fit of the heat trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatFit {
    pub terms: Vec<HeatTerm>,
    /// Max absolute deviation on the fit grid divided by `θ(t_min)`.
    pub residual: f64,
    pub condition: f64,
    pub window: (f64, f64),
}

/// An ascending spectrum (with multiplicity), complete below `cutoff`.
///
/// Finite spectra have `cutoff = ∞` and no heat terms; their zeta function
/// is the plain sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSource {
    pub eigenvalues: Vec<f64>,
    pub dimension: u32,
    /// Order of the operator (2 throughout).
    pub order: u32,
    pub cutoff: f64,
    pub heat: Option<HeatFit>,
}

/// `ζ(s)` with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub value: Complex64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaDiagnostics {
    pub split_point: f64,
    pub eigenvalue_count: usize,
    pub cutoff: f64,
    /// Bound on the heat trace contribution of eigenvalues above the cutoff at `T`.
    pub tail_magnitude: f64,
    pub fit_residual: f64,
    pub heat_terms: Vec<HeatTerm>,
    /// `ζ(0)`, the constant heat coefficient.
    pub zeta_zero: f64,
}

/// Result of [`zeta_prime_zero`]; `determinant = exp(−zeta_prime_zero)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub zeta_prime_zero: f64,
    pub determinant: f64,
    pub error_estimate: f64,
    pub diagnostics: ZetaDiagnostics,
}

impl ZetaResult {
    /// Error estimate relative to the determinant.
    pub fn relative_error(&self) -> f64 {
        // d(det)/det = d(ζ′(0))
        self.error_estimate
    }
}

fn check_spectrum(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InsufficientSpectrum("empty spectrum".into()));
    }
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidModel("eigenvalues must be finite and positive".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidModel("eigenvalues must be ascending".into()));
    }
    Ok(())
}

/// Heat trace `Σ e^{−λt}` in ascending order with compensated summation.
pub fn heat_trace(eigenvalues: &[f64], t: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &l in eigenvalues {
        let v = (-l * t).exp();
        if v == 0.0 {
            break;
        }
        acc.add(v);
    }
    acc.value()
}

/// Fits `θ(t)` on a geometric grid of `window` against the ladder
/// `t^{(k−d)/ω}`, `k = 0..n_terms`.
///
/// The columns are scaled by `t_min^α` and the rows by `1/θ(t)`, and the
/// system is solved through an SVD.
pub fn heat_fit(eigenvalues: &[f64], d: u32, omega: u32, n_terms: usize, window: (f64, f64)) -> Result<HeatFit> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0) || n_terms == 0 {
        return Err(Error::ConfigInvalid(format!("bad heat fit window {window:?} / {n_terms} terms")));
    }
    let exps: Vec<f64> = (0..n_terms).map(|k| (k as f64 - d as f64) / omega as f64).collect();
    let ts: Vec<f64> = (0..FIT_POINTS)
        .map(|i| t0 * (t1 / t0).powf(i as f64 / (FIT_POINTS - 1) as f64))
        .collect();
    let theta: Vec<f64> = ts.iter().map(|&t| heat_trace(eigenvalues, t)).collect();
    let a = DMatrix::from_fn(FIT_POINTS, n_terms, |i, k| (ts[i] / t0).powf(exps[k]) / theta[i]);
    let b = DVector::from_fn(FIT_POINTS, |_, _| 1.0);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition < 1e13) {
        return Err(Error::IllConditioned(format!("heat fit condition number {condition:.3e}")));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::IllConditioned(format!("heat fit solve failed: {e}")))?;
    let fitted = &a * &x;
    let residual = (0..FIT_POINTS)
        .map(|i| ((fitted[i] - 1.0) * theta[i]).abs())
        .fold(0.0, f64::max)
        / theta[0];
    let terms = exps
        .iter()
        .zip(x.iter())
        .map(|(&exponent, &c)| HeatTerm {
            exponent,
            coefficient: c / t0.powf(exponent),
        })
        .collect();
    Ok(HeatFit {
        terms,
        residual,
        condition,
        window,
    })
}

/// Ladder length: `d + 8` for `d = 1`; in two dimensions the longer
/// ladder loses conditioning faster than it gains accuracy, so `d + 6`.
fn default_terms(d: u32) -> usize {
    if d <= 1 {
        d as usize + 8
    } else {
        d as usize + 6
    }
}

impl SpectrumSource {
    /// A finite spectrum; `ζ(s) = Σ λ^{−s}` exactly.
    pub fn finite(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        check_spectrum(&values)?;
        Ok(Self {
            eigenvalues: values,
            dimension: 0,
            order: 2,
            cutoff: f64::INFINITY,
            heat: None,
        })
    }

    /// An infinite spectrum known completely below `cutoff`; heat
    /// coefficients are fitted from the enumeration.
    pub fn enumerated(mut values: Vec<f64>, dimension: u32, cutoff: f64) -> Result<Self> {
        values.retain(|&v| v < cutoff);
        check_spectrum(&values)?;
        if values.len() < 20 {
            return Err(Error::InsufficientSpectrum(format!(
                "only {} eigenvalues below the cutoff {cutoff}",
                values.len()
            )));
        }
        let mut src = Self {
            eigenvalues: values,
            dimension,
            order: 2,
            cutoff,
            heat: None,
        };
        src.heat = Some(src.fit(default_terms(dimension), 1.0)?);
        Ok(src)
    }

    pub fn is_finite(&self) -> bool {
        self.heat.is_none()
    }

    /// Mellin split point `T = 37/Λ`.
    pub fn split_point(&self) -> f64 {
        SPLIT_FACTOR / self.cutoff
    }

    fn fit(&self, n_terms: usize, shift: f64) -> Result<HeatFit> {
        let t0 = self.split_point() * shift;
        let fit = heat_fit(&self.eigenvalues, self.dimension, self.order, n_terms, (t0, FIT_SPAN * t0))?;
        if fit.residual > 1e-6 {
            return Err(Error::InsufficientSpectrum(format!(
                "heat trace fit residual {:.3e} exceeds 1e-6; raise the cutoff",
                fit.residual
            )));
        }
        Ok(fit)
    }

    /// Interval spectrum under `bc` below `cutoff`.
    pub fn interval(model: &IntervalModel, bc: BoundaryCondition, cutoff: f64) -> Result<Self> {
        let m2 = model.mass * model.mass;
        let vmax = model.potential.as_ref().map_or(0.0, |p| p.range().1);
        // the k-th eigenvalue is at least m² + (kπ/L)² − … ; enumerate with margin
        let count = ((cutoff - m2).max(0.0).sqrt() * model.length / std::f64::consts::PI).ceil() as usize + 2;
        let mut ev = interval_spectrum(model, bc, count)?;
        while ev.last().is_some_and(|&v| v < cutoff + vmax) {
            ev = interval_spectrum(model, bc, ev.len() + 8)?;
        }
        Self::enumerated(ev, 1, cutoff)
    }

    /// Circle spectrum below `cutoff`.
    pub fn circle(model: &CircleModel, cutoff: f64) -> Result<Self> {
        let m2 = model.mass * model.mass;
        let kmax = ((cutoff - m2).max(0.0).sqrt() * model.circumference / (2.0 * std::f64::consts::PI)).ceil() as usize;
        Self::enumerated(circle_spectrum(model, 2 * kmax + 3), 1, cutoff)
    }

    /// Disk spectrum (Dirichlet or Neumann) below `cutoff`.
    pub fn disk(model: &DiskModel, bc: BoundaryCondition, cutoff: f64, cache: Option<&BesselZeroCache>) -> Result<Self> {
        Self::enumerated(disk_spectrum(model, bc, cutoff, cache)?, 2, cutoff)
    }

    /// Disjoint union of two spectra of the same dimension.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut values: Vec<f64> = self.eigenvalues.iter().chain(&other.eigenvalues).copied().collect();
        values.sort_by(f64::total_cmp);
        match (self.is_finite(), other.is_finite()) {
            (true, true) => Self::finite(values),
            (false, false) if self.dimension == other.dimension => {
                let (fa, fb) = (self.heat.as_ref().unwrap(), other.heat.as_ref().unwrap());
                let same_ladder = fa.terms.len() == fb.terms.len()
                    && fa.terms.iter().zip(&fb.terms).all(|(a, b)| a.exponent == b.exponent);
                if self.cutoff == other.cutoff && same_ladder {
                    // heat traces add, so do their expansions
                    let terms = fa
                        .terms
                        .iter()
                        .zip(&fb.terms)
                        .map(|(a, b)| HeatTerm {
                            exponent: a.exponent,
                            coefficient: a.coefficient + b.coefficient,
                        })
                        .collect();
                    Ok(Self {
                        eigenvalues: values,
                        dimension: self.dimension,
                        order: self.order,
                        cutoff: self.cutoff,
                        heat: Some(HeatFit {
                            terms,
                            residual: fa.residual + fb.residual,
                            condition: fa.condition.max(fb.condition),
                            window: fa.window,
                        }),
                    })
                } else {
                    Self::enumerated(values, self.dimension, self.cutoff.min(other.cutoff))
                }
            }
            _ => Err(Error::InvalidModel("union needs two finite or two enumerated spectra of one dimension".into())),
        }
    }
}

/// Zeta function from explicit heat terms at split point `t_split`.
fn zeta_split(eigs: &[f64], terms: &[HeatTerm], t_split: f64, s: Complex64) -> Result<Complex64> {
    let rg = recip_gamma(s);
    let mut total = Complex64::new(0.0, 0.0);
    for term in terms {
        let denom = s + term.exponent;
        if denom.norm() < 1e-12 {
            let k = -s.re;
            let is_nonpositive_int = s.im.abs() < 1e-12 && k >= -1e-12 && (k - k.round()).abs() < 1e-12;
            if is_nonpositive_int && term.coefficient != 0.0 {
                // (1/Γ)′(−k) = (−1)^k k!
                let k = k.round() as i32;
                let fact: f64 = (1..=k).map(f64::from).product();
                total += term.coefficient * if k % 2 == 0 { fact } else { -fact };
                continue;
            }
            if term.coefficient == 0.0 {
                continue;
            }
            // genuine pole: report the regular part
            let h = 1e-5;
            let drg = (recip_gamma(s + h) - recip_gamma(s - h)) / (2.0 * h);
            let mut rest = Complex64::new(0.0, 0.0);
            for other in terms {
                if std::ptr::eq(other, term) {
                    continue;
                }
                rest += other.coefficient * (t_split.ln() * (s + other.exponent)).exp() / (s + other.exponent);
            }
            rest += large_time(eigs, t_split, s);
            let regular = rg * (rest + term.coefficient * t_split.ln()) + term.coefficient * drg;
            return Err(Error::PoleHit {
                s: s.to_string(),
                regular_part: regular.to_string(),
            });
        }
        total += rg * term.coefficient * (t_split.ln() * denom).exp() / denom;
    }
    Ok(total + large_time(eigs, t_split, s))
}

/// `Σ λ^{−s} Γ(s, λT)/Γ(s)`.
fn large_time(eigs: &[f64], t_split: f64, s: Complex64) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for &l in eigs {
        let v = (-s * l.ln()).exp() * upper_gamma_regularized(s, l * t_split);
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `ζ(s)` for any complex `s` away from the poles.
pub fn zeta(source: &SpectrumSource, s: Complex64) -> Result<ZetaValue> {
    let Some(fit) = &source.heat else {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for &l in &source.eigenvalues {
            let v = (-s * l.ln()).exp();
            re.add(v.re);
            im.add(v.im);
        }
        return Ok(ZetaValue {
            value: Complex64::new(re.value(), im.value()),
            error_estimate: 0.0,
        });
    };
    let t = source.split_point();
    let value = zeta_split(&source.eigenvalues, &fit.terms, t, s)?;
    let alt_terms = source.fit(fit.terms.len() + 1, 1.0)?;
    let alt_split = source.fit(fit.terms.len(), 1.5)?;
    let v1 = zeta_split(&source.eigenvalues, &alt_terms.terms, t, s)?;
    let v2 = zeta_split(&source.eigenvalues, &alt_split.terms, 1.5 * t, s)?;
    let error_estimate = (v1 - value).norm().max((v2 - value).norm()) + 1e-12 * value.norm();
    Ok(ZetaValue { value, error_estimate })
}

/// `ζ′(0) = γ c₀ + c₀ log T + Σ_{α≠0} c_α T^α/α + Σ_λ E₁(λT)`.
fn zeta_prime_split(eigs: &[f64], terms: &[HeatTerm], t_split: f64) -> (f64, f64) {
    let mut acc = CompensatedSum::new();
    let mut c0 = 0.0;
    for term in terms {
        if term.exponent == 0.0 {
            c0 = term.coefficient;
            acc.add(term.coefficient * (EULER_GAMMA + t_split.ln()));
        } else {
            acc.add(term.coefficient * t_split.powf(term.exponent) / term.exponent);
        }
    }
    for &l in eigs {
        let x = l * t_split;
        if x > 745.0 {
            break;
        }
        acc.add(expint_e1(x));
    }
    (acc.value(), c0)
}

/// `ζ′(0)` and the determinant `exp(−ζ′(0))`.
pub fn zeta_prime_zero(source: &SpectrumSource) -> Result<ZetaResult> {
    let Some(fit) = &source.heat else {
        let zp = -source.eigenvalues.iter().map(|l| l.ln()).collect::<CompensatedSum>().value();
        return Ok(ZetaResult {
            zeta_prime_zero: zp,
            determinant: (-zp).exp(),
            error_estimate: 0.0,
            diagnostics: ZetaDiagnostics {
                split_point: 0.0,
                eigenvalue_count: source.eigenvalues.len(),
                cutoff: source.cutoff,
                tail_magnitude: 0.0,
                fit_residual: 0.0,
                heat_terms: Vec::new(),
                zeta_zero: source.eigenvalues.len() as f64,
            },
        });
    };
    let t = source.split_point();
    let (zp, c0) = zeta_prime_split(&source.eigenvalues, &fit.terms, t);
    let alt_terms = source.fit(fit.terms.len() + 1, 1.0)?;
    let alt_split = source.fit(fit.terms.len(), 1.5)?;
    let (z1, _) = zeta_prime_split(&source.eigenvalues, &alt_terms.terms, t);
    let (z2, _) = zeta_prime_split(&source.eigenvalues, &alt_split.terms, 1.5 * t);
    let error_estimate = (z1 - zp).abs().max((z2 - zp).abs()) + 1e-14 * zp.abs().max(1.0);
    let lead = fit.terms.first().map_or(0.0, |h| h.coefficient.abs() * t.powf(h.exponent));
    Ok(ZetaResult {
        zeta_prime_zero: zp,
        determinant: (-zp).exp(),
        error_estimate,
        diagnostics: ZetaDiagnostics {
            split_point: t,
            eigenvalue_count: source.eigenvalues.len(),
            cutoff: source.cutoff,
            tail_magnitude: lead * (-SPLIT_FACTOR).exp(),
            fit_residual: fit.residual,
            heat_terms: fit.terms.clone(),
            zeta_zero: c0,
        },
    })
}
