//! Scalar and small-vector numerics shared by the rest of the crate:
//! the stepsize constant `ν`, dense vector helpers, finite-difference
//! gradients, and a matrix-free Hessian spectral-norm estimate.

use crate::{Error, Result};

/// The unique positive root of `ν·exp(ν) = 1` (equivalently `ν = exp(−ν)`).
///
/// This constant is the largest normalized stepsize for which the
/// gradient-clipped descent step is guaranteed to decrease the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuConstant {
    /// The root itself, `≈ 0.567143`.
    pub value: f64,
    /// Residual `|ν·exp(ν) − 1|` at the returned value.
    pub residual: f64,
}

/// Solves `ν·exp(ν) = 1` by bisection on `[0.5, 0.6]`.
///
/// The map `t ↦ t·exp(t) − 1` is strictly increasing and changes sign on
/// this bracket, so 60 halvings pin the root to well below `1e-14`.
pub fn solve_nu() -> NuConstant {
    let f = |t: f64| t * t.exp() - 1.0;
    let (mut lo, mut hi) = (0.5_f64, 0.6_f64);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    NuConstant {
        value,
        residual: f(value).abs(),
    }
}

/// Convenience accessor: the value of `ν` without the residual bookkeeping.
pub fn nu() -> f64 {
    solve_nu().value
}

// ---------------------------------------------------------------------------
// Dense vector helpers.  The problems in this crate are low-dimensional, so
// plain `&[f64]` slices are the lingua franca; no linear-algebra crate needed.
// ---------------------------------------------------------------------------

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of the values produced by an iterator, scaled by the
/// largest magnitude so squaring cannot underflow or overflow (solvers can
/// drive iterates down to ~1e-162, where naive squares flush to zero).
fn scaled_norm(values: impl Iterator<Item = f64> + Clone) -> f64 {
    // f64::max ignores NaN, so propagate it explicitly.
    let scale = values.clone().fold(0.0_f64, |m, v| {
        if m.is_nan() || v.is_nan() {
            f64::NAN
        } else {
            m.max(v.abs())
        }
    });
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = values.map(|v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    scaled_norm(a.iter().copied())
}

/// `a − b`.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s·b`.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// `‖a − b‖`.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    scaled_norm(a.iter().zip(b).map(|(x, y)| x - y))
}

/// Central-difference gradient of `f` at `x`.
///
/// The step is `h·max(1, ‖x‖)` per coordinate; callers pick `h` (`1e-6` is a
/// good default for well-scaled objectives).  Errors if any evaluation is
/// non-finite.
pub fn fd_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let step = h * norm(x).max(1.0);
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + step;
        let fp = f(&xp);
        xp[i] = xi - step;
        let fm = f(&xp);
        xp[i] = xi;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!(
                "finite-difference probe at coordinate {i}"
            )));
        }
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// Estimates `‖∇²f(x)‖` (spectral norm) by power iteration on
/// finite-difference Hessian-vector products.
///
/// Each product is the central difference
/// `(∇f(x + δv) − ∇f(x − δv)) / (2δ)` with `δ = h·max(1, ‖x‖)` for a unit
/// vector `v`.  The iteration starts from `(1, 1, …, 1)/√d`; if the Hessian
/// annihilates that vector it retries from `(1, 0, …, 0)`, and if that is
/// annihilated too the Hessian is reported as zero.  Converges when two
/// consecutive estimates agree to `tol` relatively, or after `max_iter`
/// rounds.
pub fn hessian_norm_estimate<G>(grad: G, x: &[f64], h: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let d = x.len();
    let delta = h * norm(x).max(1.0);
    let hvp = |v: &[f64]| -> Result<Vec<f64>> {
        let gp = grad(&axpy(x, delta, v));
        let gm = grad(&axpy(x, -delta, v));
        let out: Vec<f64> = gp
            .iter()
            .zip(&gm)
            .map(|(p, m)| (p - m) / (2.0 * delta))
            .collect();
        if out.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("Hessian-vector probe".into()));
        }
        Ok(out)
    };

    let mut v: Vec<f64> = vec![1.0 / (d as f64).sqrt(); d];
    let mut w = hvp(&v)?;
    if norm(&w) == 0.0 {
        // The all-ones direction may sit in the kernel; retry along e1.
        v = vec![0.0; d];
        v[0] = 1.0;
        w = hvp(&v)?;
        if norm(&w) == 0.0 {
            return Ok(0.0);
        }
    }
    let mut lambda = norm(&w);
    for _ in 0..max_iter {
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w.iter().map(|t| t / nw).collect();
        w = hvp(&v)?;
        let next = norm(&w);
        if (next - lambda).abs() <= tol * next.max(1e-300) {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}

// ---------------------------------------------------------------------------
// Counter-based pseudo-randomness.  Every stochastic draw in the crate is a
// pure function of (seed, counter), so replays are bitwise identical and
// replicates never share state.
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer: a high-quality 64-bit mix of `(seed, counter)`.
pub fn mix64(seed: u64, counter: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(counter)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` from `(seed, counter)`.
pub fn uniform01(seed: u64, counter: u64) -> f64 {
    (mix64(seed, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `{0, …, n−1}` from `(seed, counter)`.
pub fn uniform_index(seed: u64, counter: u64, n: usize) -> usize {
    (mix64(seed, counter) % n as u64) as usize
}

/// Standard normal draw from `(seed, counter)` via Box–Muller.
pub fn standard_normal(seed: u64, counter: u64) -> f64 {
    let u1 = uniform01(seed, 2 * counter).max(f64::MIN_POSITIVE);
    let u2 = uniform01(seed, 2 * counter + 1);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
