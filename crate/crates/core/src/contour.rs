//! Keyhole contour around the negative real axis.
//!
//! The contour runs in along the upper side of `(−∞, −ε]`, around the circle
//! `|z| = ε` clockwise and back out along the lower side. With the principal
//! branch of `z^{−s}` and a function `g` that is continuous across `ℝ₋`, the
//! two rays collapse into
//!
//! ```text
//! (s/π) sin(πs) ∫_ε^∞ r^{−s−1} g(−r) dr
//! ```
//!
//! and the circle contributes `(s/2πi) ∮ z^{−s−1} g(z) dz`. For `g = log(λ − z)`
//! with `λ > ε` the sum is `λ^{−s}`, which is the building block of every
//! spectral identity in this crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre_on, unwrap_log};

/// Width in `u = ln(r/ε)` of one ray panel.
const PANEL_WIDTH: f64 = 2.0;

/// Geometry and node budget of the contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    /// Radius of the small circle.
    pub epsilon: f64,
    /// Offset of the rays from the axis; only the explicit path uses it.
    pub delta: f64,
    /// Truncation radius of the rays.
    pub r_max: f64,
    /// Gauss nodes per ray panel.
    pub ray_nodes: usize,
    /// Equispaced nodes on the circle.
    pub circle_nodes: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            delta: 0.0,
            r_max: 1e32,
            ray_nodes: 12,
            circle_nodes: 64,
        }
    }
}

impl ContourSpec {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.r_max > self.epsilon) || self.ray_nodes < 2 || self.circle_nodes < 8 {
            return Err(Error::ConfigInvalid(format!("invalid contour {self:?}")));
        }
        if self.delta < 0.0 || self.delta >= 2.0 * self.epsilon {
            return Err(Error::ConfigInvalid(format!(
                "delta = {} must lie in [0, 2·epsilon)",
                self.delta
            )));
        }
        Ok(())
    }

    /// Fails unless every point of `spectrum` lies strictly outside the
    /// circle and off the negative real axis.
    pub fn check_encloses(&self, spectrum: &[Complex64]) -> Result<()> {
        for &l in spectrum {
            if l.norm() <= self.epsilon * (1.0 + 1e-12) {
                return Err(Error::SpectrumNotEnclosed(format!("eigenvalue {l} lies inside |z| = {}", self.epsilon)));
            }
            if l.re <= 0.0 && l.im.abs() <= 1e-12 * l.norm() {
                return Err(Error::SpectrumNotEnclosed(format!("eigenvalue {l} lies on the cut")));
            }
        }
        Ok(())
    }
}

/// Declared growth of `g` along the ray:
/// `|g(−r)| ≤ coefficient · ρ^power · (1 + ln ρ)` with `ρ = max(r, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthModel {
    pub coefficient: f64,
    pub power: f64,
}

impl GrowthModel {
    pub fn new(coefficient: f64, power: f64) -> Self {
        Self { coefficient, power }
    }

    pub fn bound(&self, r: f64) -> f64 {
        let rho = r.max(1.0);
        self.coefficient * rho.powf(self.power) * (1.0 + rho.ln())
    }

    /// Bound on `∫_R^∞ r^{−σ−1} |g(−r)| dr`.
    fn tail(&self, sigma: f64, r_max: f64) -> Result<f64> {
        let a = sigma - self.power;
        if !(a > 0.0) {
            return Err(Error::TailBoundViolated(format!(
                "Re s = {sigma} does not exceed the growth power {}",
                self.power
            )));
        }
        let r = r_max.max(1.0);
        Ok(self.coefficient * r.powf(-a) * ((1.0 + r.ln()) / a + 1.0 / (a * a)))
    }
}

/// Value of a contour piece with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourValue {
    pub value: Complex64,
    /// Quadrature estimate plus analytic tail bound.
    pub error_estimate: f64,
    pub tail_bound: f64,
    pub evaluations: usize,
}

impl std::ops::Add for ContourValue {
    type Output = ContourValue;

    fn add(self, o: ContourValue) -> ContourValue {
        ContourValue {
            value: self.value + o.value,
            error_estimate: self.error_estimate + o.error_estimate,
            tail_bound: self.tail_bound + o.tail_bound,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

type VecFn<'a> = dyn Fn(f64) -> Result<Vec<Complex64>> + Sync + 'a;

/// Ray nodes `r` in ascending order, with weights for `∫ ... du`, for the
/// fine rule (two half-panels) and the coarse rule (one panel).
struct RayRule {
    fine: Vec<(f64, f64)>,
    coarse: Vec<(f64, f64)>,
}

fn ray_rule(spec: &ContourSpec) -> RayRule {
    let total = (spec.r_max / spec.epsilon).ln();
    let panels = (total / PANEL_WIDTH).ceil().max(1.0) as usize;
    let width = total / panels as f64;
    let mut fine = Vec::new();
    let mut coarse = Vec::new();
    for p in 0..panels {
        let a = p as f64 * width;
        let b = a + width;
        let (x, w) = gauss_legendre_on(spec.ray_nodes, a, b);
        coarse.extend(x.into_iter().zip(w));
        for (lo, hi) in [(a, 0.5 * (a + b)), (0.5 * (a + b), b)] {
            let (x, w) = gauss_legendre_on(spec.ray_nodes, lo, hi);
            fine.extend(x.into_iter().zip(w));
        }
    }
    let to_r = |v: Vec<(f64, f64)>| v.into_iter().map(|(u, w)| (spec.epsilon * u.exp(), w)).collect();
    RayRule {
        fine: to_r(fine),
        coarse: to_r(coarse),
    }
}

fn sample_ray(g: &VecFn, rs: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    rs.par_iter().map(|&r| g(-r)).collect()
}

fn check_growth(samples: &[Vec<Complex64>], rs: &[f64], growth: &GrowthModel) -> Result<()> {
    for (vals, &r) in samples.iter().zip(rs) {
        let m = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !m.is_finite() || m > growth.bound(r) * (1.0 + 1e-9) {
            return Err(Error::TailBoundViolated(format!(
                "|g(-{r:.3e})| = {m:.3e} exceeds the declared bound {:.3e}",
                growth.bound(r)
            )));
        }
    }
    Ok(())
}

/// `(s/π) sin(πs) ∫_ε^{r_max} r^{−s−1} g(−r) dr` for each component, with a
/// component-wise error estimate (rule comparison plus tail bound).
fn ray_core(
    s: Complex64,
    g: &VecFn,
    growth: &GrowthModel,
    spec: &ContourSpec,
    transform: Option<&dyn Fn(&mut [Complex64])>,
) -> Result<(Vec<Complex64>, f64, f64, usize)> {
    spec.validate()?;
    let rule = ray_rule(spec);
    let fine_r: Vec<f64> = rule.fine.iter().map(|p| p.0).collect();
    let coarse_r: Vec<f64> = rule.coarse.iter().map(|p| p.0).collect();
    let mut fine_s = sample_ray(g, &fine_r)?;
    let mut coarse_s = sample_ray(g, &coarse_r)?;
    check_growth(&fine_s, &fine_r, growth)?;
    check_growth(&coarse_s, &coarse_r, growth)?;
    if let Some(tf) = transform {
        for v in fine_s.iter_mut().chain(coarse_s.iter_mut()) {
            tf(v);
        }
    }
    let width = fine_s.first().map_or(0, |v| v.len());
    let integrate = |samples: &[Vec<Complex64>], nodes: &[(f64, f64)]| {
        let mut acc = vec![Complex64::new(0.0, 0.0); width];
        for (vals, &(r, w)) in samples.iter().zip(nodes) {
            // r^{-s-1} dr = r^{-s} du
            let kernel = w * (-s * r.ln()).exp();
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += kernel * v;
            }
        }
        acc
    };
    let fine = integrate(&fine_s, &rule.fine);
    let coarse = integrate(&coarse_s, &rule.coarse);
    let pref = s / PI * (PI * s).sin();
    let quad_err = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        * pref.norm();
    let tail = growth.tail(s.re, spec.r_max)? * pref.norm();
    let value = fine.into_iter().map(|v| pref * v).collect();
    Ok((value, quad_err, tail, fine_r.len() + coarse_r.len()))
}

/// Collapsed ray integral `(s/π) sin(πs) ∫_{−∞}^{−ε} (−x)^{−s−1} g(x) dx`.
///
/// `g` is evaluated at negative reals `x`. Samples are audited against the
/// declared [`GrowthModel`]; the tail beyond `r_max` enters the error
/// estimate through that model.
pub fn collapsed_ray_integral<G>(s: Complex64, g: G, growth: &GrowthModel, spec: &ContourSpec) -> Result<ContourValue>
where
    G: Fn(f64) -> Result<Complex64> + Sync,
{
    let gv = |x: f64| g(x).map(|v| vec![v]);
    let (v, err, tail, n) = ray_core(s, &gv, growth, spec, None)?;
    Ok(ContourValue {
        value: v[0],
        error_estimate: err + tail,
        tail_bound: tail,
        evaluations: n,
    })
}

/// Circle nodes in clockwise order starting at `θ = π`.
fn circle_points(spec: &ContourSpec) -> Vec<(f64, Complex64)> {
    let n = spec.circle_nodes;
    (0..n)
        .map(|j| {
            let theta = PI - 2.0 * PI * j as f64 / n as f64;
            (theta, Complex64::from_polar(spec.epsilon, theta))
        })
        .collect()
}

/// `sin(π(k − s))/(k − s)`, equal to π at `k = s`.
fn sinc_weight(k: i64, s: Complex64) -> Complex64 {
    let d = Complex64::new(k as f64, 0.0) - s;
    if d.norm() < 1e-12 {
        Complex64::new(PI, 0.0)
    } else {
        (PI * d).sin() / d
    }
}

/// Circle integral from samples taken at [`circle_points`].
///
/// The samples are expanded in a discrete Fourier series in `θ`, which for a
/// function analytic in a larger disk gives its Taylor coefficients, and each
/// monomial is integrated in closed form against the branch of `z^{−s−1}`.
fn circle_from_samples(s: Complex64, pts: &[(f64, Complex64)], samples: &[Vec<Complex64>], eps: f64) -> (Vec<Complex64>, f64) {
    let n = pts.len() as i64;
    let width = samples[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); width];
    let mut err = 0.0f64;
    let pref = -s / PI * (-s * eps.ln()).exp();
    for k in (-(n / 2) + 1)..=(n / 2) {
        let phases: Vec<Complex64> = pts.iter().map(|&(th, _)| Complex64::from_polar(1.0, -(k as f64) * th)).collect();
        let w = sinc_weight(k, s);
        for c in 0..width {
            let mut b = Complex64::new(0.0, 0.0);
            for (ph, smp) in phases.iter().zip(samples) {
                b += ph * smp[c];
            }
            b /= n as f64;
            out[c] += pref * b * w;
            if k.abs() >= n / 4 {
                err = err.max((pref * b).norm() * PI * (n / 2) as f64);
            }
        }
    }
    (out, err)
}

/// Clockwise circle integral `(s/2πi) ∮_{|z|=ε} z^{−s−1} g(z) dz`.
///
/// `g` must be analytic on a disk slightly larger than the circle. Its
/// values are continued along the circle by the branch tracker, so `g` may
/// return any branch of a logarithm; a nonzero winding raises `BranchJump`.
pub fn small_circle_integral<G>(s: Complex64, g: G, spec: &ContourSpec) -> Result<ContourValue>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    spec.validate()?;
    let pts = circle_points(spec);
    let raw: Vec<Complex64> = pts.par_iter().map(|&(_, z)| g(z)).collect::<Result<_>>()?;
    let closing = g(Complex64::from_polar(spec.epsilon, -PI))?;
    let tracked = track_branch(&raw, closing)?;
    let samples: Vec<Vec<Complex64>> = tracked.into_iter().map(|v| vec![v]).collect();
    let (v, err) = circle_from_samples(s, &pts, &samples, spec.epsilon);
    Ok(ContourValue {
        value: v[0],
        error_estimate: err,
        tail_bound: 0.0,
        evaluations: pts.len() + 1,
    })
}

/// Continues a logarithm along the clockwise circle samples, anchored at
/// the first sample, and checks that it closes up again at `θ = −π`.
fn track_branch(raw: &[Complex64], closing: Complex64) -> Result<Vec<Complex64>> {
    let start = raw[0];
    let mut seq: Vec<Complex64> = raw.iter().map(|v| v.exp()).collect();
    seq.push(closing.exp());
    let tracked = unwrap_log(&seq, start, PI / 2.0)?;
    let end = tracked[tracked.len() - 1];
    if (end - start).norm() > 1e-6 * (1.0 + start.norm()) {
        return Err(Error::BranchJump(format!(
            "logarithm does not close around the circle: start {start}, end {end}"
        )));
    }
    Ok(tracked[..raw.len()].to_vec())
}

/// Right-hand side `(s/2πi) ∫_γ z^{−s−1} log det Q(z) dz` on the collapsed
/// contour.
///
/// `log_det_q` may return any branch; the ray values are continued from the
/// value at `−ε` and the circle values are tracked in the same way.
pub fn contour_zeta_difference<G>(s: Complex64, log_det_q: G, growth: &GrowthModel, spec: &ContourSpec) -> Result<ContourValue>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    spec.validate()?;
    let anchor = log_det_q(Complex64::new(-spec.epsilon, 0.0))?;
    let on_ray = |x: f64| log_det_q(Complex64::new(x, 0.0)).map(|v| vec![v]);
    let fix_branch = |vals: &mut [Complex64]| {
        // real-axis values: shift each onto the branch continuous with the anchor
        for v in vals.iter_mut() {
            let turns = ((v.im - anchor.im) / (2.0 * PI)).round();
            v.im -= turns * 2.0 * PI;
        }
    };
    let (rv, rerr, tail, rn) = ray_core(s, &on_ray, growth, spec, Some(&fix_branch))?;
    let circle = small_circle_integral(s, &log_det_q, spec)?;
    Ok(ContourValue {
        value: rv[0],
        error_estimate: rerr + tail,
        tail_bound: tail,
        evaluations: rn,
    } + circle)
}

/// `A_t^{−s}` on the reduced space by contour integration of the resolvent.
///
/// Uses `A^{−s} = −(1/2πi) ∮ z^{−s} (A − z)^{−1} dz`, written as the collapsed
/// contour applied to `g(z) = −z (A − z)^{−1}` and divided by `s`. For
/// `Re s ≤ 0` the power is shifted by integer powers of `A`.
pub fn seeley_power_discrete(
    problem: &crate::discrete_lab::DiscreteBoundaryProblem,
    t: f64,
    s: Complex64,
    spec: &ContourSpec,
) -> Result<DMatrix<Complex64>> {
    let a = problem.reduced_operator(t)?;
    let spectrum = crate::discrete_lab::spectrum(problem, t)?;
    spec.check_encloses(&spectrum)?;
    let n = a.nrows();
    let ac = a.map(|v| Complex64::new(v, 0.0));
    if s.norm() == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    if s.re <= 0.0 {
        let shift = (-s.re).floor() + 1.0;
        let base = seeley_power_discrete(problem, t, s + shift, spec)?;
        let mut out = base;
        for _ in 0..shift as usize {
            out = &ac * out;
        }
        return Ok(out);
    }
    let g = |x: f64| -> Result<Vec<Complex64>> {
        let z = Complex64::new(x, 0.0);
        let res = resolvent_of(&ac, z)?;
        Ok((res * (-z)).iter().copied().collect())
    };
    // r (A + r)^{-1} stays below the eigenvector condition number; bound it
    // generously through the norm of the resolvent at the circle.
    let gap = spectrum.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    let coefficient = 4.0 * (1.0 + a.norm() / gap) * n as f64;
    let growth = GrowthModel::new(coefficient, 0.0);
    let (ray, _, _, _) = ray_core(s, &g, &growth, spec, None)?;
    let pts = circle_points(spec);
    let samples: Vec<Vec<Complex64>> = pts
        .par_iter()
        .map(|&(_, z)| resolvent_of(&ac, z).map(|r| (r * (-z)).iter().copied().collect()))
        .collect::<Result<_>>()?;
    let (circ, _) = circle_from_samples(s, &pts, &samples, spec.epsilon);
    let flat: Vec<Complex64> = ray.iter().zip(&circ).map(|(a, b)| (a + b) / s).collect();
    Ok(DMatrix::from_column_slice(n, n, &flat))
}

fn resolvent_of(a: &DMatrix<Complex64>, z: Complex64) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let m = a - DMatrix::<Complex64>::identity(n, n) * z;
    m.try_inverse()
        .ok_or_else(|| Error::SpectrumNotEnclosed(format!("resolvent singular at z = {z}")))
}

/// Contour integral on the explicit path with rays at `±iδ/2`.
///
/// This exists to validate the collapsed form: for `δ → 0` both agree.
pub fn explicit_path_integral<G>(s: Complex64, g: G, spec: &ContourSpec) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    spec.validate()?;
    if spec.delta <= 0.0 {
        return Err(Error::ConfigInvalid("explicit path needs delta > 0".into()));
    }
    let half = 0.5 * spec.delta;
    let xc = (spec.epsilon * spec.epsilon - half * half).sqrt();
    let f = |z: Complex64| -> Result<Complex64> {
        Ok(s / Complex64::new(0.0, 2.0 * PI) * (-(s + 1.0) * z.ln()).exp() * g(z)?)
    };
    let total = (spec.r_max / xc).ln();
    let panels = (total / (0.5 * PANEL_WIDTH)).ceil() as usize;
    let width = total / panels as f64;
    let mut nodes = Vec::new();
    for p in 0..panels {
        let (x, w) = gauss_legendre_on(spec.ray_nodes, p as f64 * width, (p + 1) as f64 * width);
        nodes.extend(x.into_iter().zip(w));
    }
    let ray: Complex64 = nodes
        .par_iter()
        .map(|&(u, w)| -> Result<Complex64> {
            let rho = xc * u.exp();
            // upper ray inward, lower ray outward; dz = −dρ on both
            let up = f(Complex64::new(-rho, half))? * rho;
            let down = f(Complex64::new(-rho, -half))? * (-rho);
            Ok((up + down) * w)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let theta_c = half.atan2(-xc);
    let arc_panels = 16;
    let mut arc = Complex64::new(0.0, 0.0);
    for p in 0..arc_panels {
        let a = -theta_c + 2.0 * theta_c * p as f64 / arc_panels as f64;
        let b = -theta_c + 2.0 * theta_c * (p + 1) as f64 / arc_panels as f64;
        let (x, w) = gauss_legendre_on(spec.ray_nodes, a, b);
        for (th, wi) in x.into_iter().zip(w) {
            let z = Complex64::from_polar(spec.epsilon, th);
            // clockwise: integrate from θ_c down to −θ_c
            arc -= f(z)? * Complex64::new(0.0, 1.0) * z * wi;
        }
    }
    Ok(ray + arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn ray_of_constant_is_closed_form() {
        let spec = ContourSpec::with_epsilon(0.3);
        for s in [0.5, 1.0, 2.0, 1.3] {
            let v = collapsed_ray_integral(c(s), |_| Ok(c(1.0)), &GrowthModel::new(1.0, 0.0), &spec).unwrap();
            let exact = (PI * s).sin() / PI * 0.3f64.powf(-s);
            assert!((v.value - c(exact)).norm() < 1e-12, "s = {s}: {} vs {exact}", v.value);
        }
    }

    #[test]
    fn constant_over_full_contour_vanishes() {
        let spec = ContourSpec::with_epsilon(0.25);
        for s in [0.5, 1.0, 1.7] {
            let r = collapsed_ray_integral(c(s), |_| Ok(c(1.0)), &GrowthModel::new(1.0, 0.0), &spec).unwrap();
            let k = small_circle_integral(c(s), |_| Ok(c(1.0)), &spec).unwrap();
            assert!((r.value + k.value).norm() < 1e-12);
        }
    }

    #[test]
    fn single_eigenvalue_identity() {
        let spec = ContourSpec::with_epsilon(0.5);
        let growth = GrowthModel::new(2.0, 0.0);
        for m in [1.0f64, 2.0] {
            for s in [0.5, 1.0, 2.0] {
                let v = contour_zeta_difference(c(s), |z| Ok((c(m * m) - z).ln()), &growth, &spec).unwrap();
                assert_relative_eq!(v.value.re, m.powf(-2.0 * s), max_relative = 1e-10);
                assert!(v.value.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn circle_derivative_at_zero_is_minus_g0() {
        let spec = ContourSpec::with_epsilon(0.4);
        let g = |z: Complex64| Ok((c(3.0) + z).exp());
        let h = 1e-5;
        let p = small_circle_integral(c(h), g, &spec).unwrap().value;
        let m = small_circle_integral(c(-h), g, &spec).unwrap().value;
        let d = (p - m) / (2.0 * h);
        assert!((d + c(3.0f64.exp())).norm() < 1e-6 * 3.0f64.exp());
    }

    #[test]
    fn circle_of_identity_function_is_order_epsilon() {
        for eps in [0.1, 0.01] {
            let spec = ContourSpec::with_epsilon(eps);
            let v = small_circle_integral(c(0.5), Ok, &spec).unwrap().value;
            assert!(v.norm() < 2.0 * eps.sqrt());
        }
    }

    #[test]
    fn growth_violation_is_reported() {
        let spec = ContourSpec::with_epsilon(0.5);
        let err = collapsed_ray_integral(c(1.0), |x| Ok(c(x * x)), &GrowthModel::new(1.0, 0.5), &spec).unwrap_err();
        assert!(matches!(err, Error::TailBoundViolated(_)));
    }

    #[test]
    fn winding_log_is_a_branch_jump() {
        let spec = ContourSpec::with_epsilon(0.5);
        let err = small_circle_integral(c(1.0), |z| Ok(z.ln()), &spec).unwrap_err();
        assert!(matches!(err, Error::BranchJump(_)), "{err}");
    }

    #[test]
    fn explicit_path_matches_collapsed_form() {
        let growth = GrowthModel::new(2.0, 0.0);
        let g = |z: Complex64| Ok((c(4.0) - z).ln());
        for delta in [1e-2, 1e-3] {
            let spec = ContourSpec {
                epsilon: 0.5,
                delta,
                r_max: 1e30,
                ray_nodes: 16,
                ..ContourSpec::default()
            };
            for s in [1.0, 2.0] {
                let e = explicit_path_integral(c(s), g, &spec).unwrap();
                let k = contour_zeta_difference(c(s), g, &growth, &spec).unwrap();
                assert!((e - k.value).norm() < 1e-8, "delta {delta}, s {s}: {e} vs {}", k.value);
            }
        }
    }
}
