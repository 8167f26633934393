//! Bessel functions of integer order: `J_n` by Miller's backward recurrence,
//! zeros of `J_n` and `J_n′`, and the ratio `I_n′/I_n`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::safeguarded_newton;

/// Which family of zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZeroKind {
    /// Zeros of `J_n`.
    J,
    /// Zeros of `J_n′` (positive ones; `x = 0` is excluded).
    JPrime,
}

/// `J_0(x), …, J_{nmax}(x)` for `x > 0` by Miller's algorithm, normalized
/// through `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "bessel_j_all needs x > 0");
    let top = (nmax as f64).max(x);
    let mut m = (top + 30.0 + 15.0 * x.cbrt()).ceil() as usize;
    m += m % 2;
    let mut out = vec![0.0; nmax + 1];
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        // J_{k-1} = (2k/x) J_k − J_{k+1}
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += cur; // J_0
    // `out[nmax]` may have been stored before later rescalings; all stored
    // values were rescaled together, so a single normalization suffices.
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `J_n(x)`; accepts `x = 0`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    bessel_j_all(n + 1, x.abs())[n] * if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 }
}

/// `(J_n, J_n′, J_n″)` at `x > 0`.
fn j_with_derivatives(n: usize, x: f64) -> (f64, f64, f64) {
    let all = bessel_j_all(n + 1, x);
    let j = all[n];
    let jp = if n == 0 { -all[1] } else { all[n - 1] - n as f64 / x * j };
    let nf = n as f64;
    let jpp = -jp / x - (1.0 - nf * nf / (x * x)) * j;
    (j, jp, jpp)
}

fn refine(kind: ZeroKind, n: usize, lo: f64, hi: f64) -> Result<f64> {
    let fdf = |x: f64| {
        let (j, jp, jpp) = j_with_derivatives(n, x);
        match kind {
            ZeroKind::J => (j, jp),
            ZeroKind::JPrime => (jp, jpp),
        }
    };
    safeguarded_newton(fdf, lo, hi, 0.5 * (lo + hi), 1e-15 * hi)
}

/// Strict sign change; values that underflowed to zero never count.
fn opposite_signs(a: f64, b: f64) -> bool {
    (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)
}

/// One zero with its indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselZero {
    pub kind: ZeroKind,
    pub n: usize,
    pub k: usize,
    pub value: f64,
}

/// All zeros of the given kind below `x_max`, for every order `n`.
///
/// A grid in `x` with step 1/4 is swept once; at each grid point the whole
/// sequence `J_0 … J_{nmax+1}` comes from one backward recurrence, sign
/// changes bracket the zeros, and each bracket is refined by safeguarded
/// Newton. Consecutive zeros of both kinds are more than 1/4 apart.
pub fn zeros_below(kind: ZeroKind, x_max: f64) -> Result<Vec<BesselZero>> {
    let nmax = x_max.ceil() as usize + 1;
    let step = 0.25;
    let npts = (x_max / step).ceil() as usize + 1;
    let value_at = |x: f64| -> Vec<f64> {
        let all = bessel_j_all(nmax + 1, x);
        match kind {
            ZeroKind::J => all[..=nmax].to_vec(),
            ZeroKind::JPrime => (0..=nmax)
                .map(|n| if n == 0 { -all[1] } else { all[n - 1] - n as f64 / x * all[n] })
                .collect(),
        }
    };
    let xs: Vec<f64> = (1..=npts).map(|i| (i as f64 * step).min(x_max)).collect();
    use rayon::prelude::*;
    let table: Vec<Vec<f64>> = xs.par_iter().map(|&x| value_at(x)).collect();
    let mut brackets = Vec::new();
    for n in 0..=nmax {
        for i in 1..xs.len() {
            let (a, b) = (table[i - 1][n], table[i][n]);
            if xs[i] <= xs[i - 1] {
                continue;
            }
            if opposite_signs(a, b) {
                brackets.push((n, xs[i - 1], xs[i]));
            }
        }
    }
    let mut zeros: Vec<(usize, f64)> = brackets
        .par_iter()
        .map(|&(n, lo, hi)| refine(kind, n, lo, hi).map(|z| (n, z)))
        .collect::<Result<_>>()?;
    zeros.retain(|&(_, z)| z < x_max);
    zeros.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::with_capacity(zeros.len());
    let mut last_n = usize::MAX;
    let mut k = 0;
    for (n, z) in zeros {
        if n != last_n {
            last_n = n;
            k = 0;
        }
        k += 1;
        out.push(BesselZero { kind, n, k, value: z });
    }
    Ok(out)
}

/// The `k`-th positive zero (k ≥ 1) of `J_n`.
pub fn bessel_j_zero(n: usize, k: usize) -> f64 {
    single_zero(ZeroKind::J, n, k)
}

/// The `k`-th positive zero (k ≥ 1) of `J_n′`.
pub fn bessel_jp_zero(n: usize, k: usize) -> f64 {
    single_zero(ZeroKind::JPrime, n, k)
}

fn single_zero(kind: ZeroKind, n: usize, k: usize) -> f64 {
    assert!(k >= 1, "zeros are numbered from 1");
    // McMahon-type upper estimate: zeros lie below n + (k + n/2 + 1)·π + 4.
    let mut x_hi = n as f64 + (k as f64 + 0.5 * n as f64 + 1.0) * std::f64::consts::PI + 4.0;
    loop {
        let f = |x: f64| {
            let (j, jp, _) = j_with_derivatives(n, x);
            match kind {
                ZeroKind::J => j,
                ZeroKind::JPrime => jp,
            }
        };
        let mut count = 0;
        let mut x = 0.25;
        let mut prev = f(x);
        while x < x_hi {
            let xn = x + 0.25;
            let v = f(xn);
            if opposite_signs(prev, v) {
                count += 1;
                if count == k {
                    return refine(kind, n, x, xn).expect("sign change brackets a zero");
                }
            }
            prev = v;
            x = xn;
        }
        x_hi *= 2.0;
    }
}

/// `I_{n+1}(x)/I_n(x)` by the continued fraction `1/(2(n+1)/x + 1/(2(n+2)/x + …))`.
fn i_ratio_cf(n: usize, x: f64) -> f64 {
    // modified Lentz
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..200_000 {
        let b = 2.0 * (n + j) as f64 / x;
        d += b;
        if d == 0.0 {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() <= 2e-16 {
            break;
        }
    }
    // with b_0 = 0 the recursion yields f = 1/(b_1 + 1/(b_2 + ...))
    f
}

/// `I_n′(x)/I_n(x)` for `x > 0`.
pub fn bessel_i_ratio(n: usize, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_i_ratio needs x > 0");
    n as f64 / x + i_ratio_cf(n, x)
}

/// `I_{n+1}(x)/I_n(x)` for every `n = 0..=nmax`, from one continued
/// fraction at the top order and the stable downward recurrence
/// `r_{n−1} = 1/(2n/x + r_n)`.
pub fn bessel_i_next_ratios(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0);
    let mut out = vec![0.0; nmax + 1];
    out[nmax] = i_ratio_cf(nmax, x);
    for n in (1..=nmax).rev() {
        out[n - 1] = 1.0 / (2.0 * n as f64 / x + out[n]);
    }
    out
}
