//! Numeric certificates for generalized smoothness.
//!
//! Given an oracle with recorded constants `(L0, L1)`, these checks evaluate
//! the defining inequalities and their consequences on concrete point pairs
//! and report signed margins.  The envelope fitter goes the other way:
//! given sampled `(‖∇f‖, ‖∇²f‖)` pairs it recovers the smallest affine
//! envelope `h ≤ L0 + L1·g` under a mean-weighted objective.

use crate::problems::{Oracle, SmoothnessParams};
use crate::scalar::{dist, dot, norm, sub};
use crate::{Error, Result};

/// Outcome of a single inequality evaluation.
#[derive(Debug, Clone, Copy)]
pub struct InequalityMargin {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; nonnegative (up to the tolerance) means the inequality holds.
    pub slack: f64,
    pub pass: bool,
}

impl InequalityMargin {
    fn evaluate(lhs: f64, rhs: f64, atol: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            lhs,
            rhs,
            slack,
            pass: slack >= -atol,
        }
    }
}

fn params(o: &Oracle) -> Result<SmoothnessParams> {
    o.smoothness()
        .ok_or_else(|| Error::Config(format!("oracle {} has no smoothness constants", o.name())))
}

/// Pointwise gradient-Lipschitz bound anchored at `y`:
/// `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1·‖∇f(y)‖)·‖x − y‖`.
///
/// Only valid within the trust region where the gradient norm cannot grow
/// too much between the points; see [`check_symmetric`] for the form that
/// holds on any pair.
pub fn check_asymmetric(o: &Oracle, x: &[f64], y: &[f64], atol: f64) -> Result<InequalityMargin> {
    let p = params(o)?;
    let lhs = dist(&o.gradient(x), &o.gradient(y));
    let rhs = (p.l0 + p.l1 * norm(&o.gradient(y))) * dist(x, y);
    Ok(InequalityMargin::evaluate(lhs, rhs, atol))
}

/// Segment form of the gradient-Lipschitz bound:
/// `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1·sup_{u∈[x,y]}‖∇f(u)‖)·‖x − y‖`.
///
/// The supremum is approximated by a uniform grid over the segment
/// (`grid` points, endpoints included); 101 points is the default used by
/// the acceptance suite.  For every oracle in this crate the gradient norm
/// is monotone or unimodal-with-endpoint-maximum along segments, so the
/// grid maximum equals the true supremum.
pub fn check_symmetric(
    o: &Oracle,
    x: &[f64],
    y: &[f64],
    grid: usize,
    atol: f64,
) -> Result<InequalityMargin> {
    if grid < 2 {
        return Err(Error::Config("segment grid needs at least 2 points".into()));
    }
    let p = params(o)?;
    let lhs = dist(&o.gradient(x), &o.gradient(y));
    let mut sup = 0.0_f64;
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let u: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect();
        sup = sup.max(norm(&o.gradient(&u)));
    }
    let rhs = (p.l0 + p.l1 * sup) * dist(x, y);
    Ok(InequalityMargin::evaluate(lhs, rhs, atol))
}

/// Exponential-envelope corollary of the segment bound:
/// `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1·‖∇f(y)‖)·exp(L1·‖x − y‖)·‖x − y‖`.
pub fn check_exp_corollary(
    o: &Oracle,
    x: &[f64],
    y: &[f64],
    atol: f64,
) -> Result<InequalityMargin> {
    let p = params(o)?;
    let r = dist(x, y);
    let lhs = dist(&o.gradient(x), &o.gradient(y));
    let rhs = (p.l0 + p.l1 * norm(&o.gradient(y))) * (p.l1 * r).exp() * r;
    Ok(InequalityMargin::evaluate(lhs, rhs, atol))
}

/// Quadratic upper model with the exponential correction:
/// `f(y) ≤ f(x) + ⟨∇f(x), y−x⟩ + ((L0 + L1·‖∇f(x)‖)/2)·exp(L1·‖x−y‖)·‖x−y‖²`.
pub fn check_quadratic_upper(
    o: &Oracle,
    x: &[f64],
    y: &[f64],
    atol: f64,
) -> Result<InequalityMargin> {
    let p = params(o)?;
    let r = dist(x, y);
    let gx = o.gradient(x);
    let lhs = o.value(y);
    let rhs = o.value(x)
        + dot(&gx, &sub(y, x))
        + 0.5 * (p.l0 + p.l1 * norm(&gx)) * (p.l1 * r).exp() * r * r;
    Ok(InequalityMargin::evaluate(lhs, rhs, atol))
}

/// Gradient-norm lower bound on the suboptimality gap:
/// `ν·‖∇f(x)‖² / (2(L0 + L1·‖∇f(x)‖)) ≤ f(x) − f*`.
///
/// Requires the oracle to know its optimum.
pub fn check_grad_lower_bound(
    o: &Oracle,
    x: &[f64],
    nu: f64,
    atol: f64,
) -> Result<InequalityMargin> {
    let p = params(o)?;
    let (_, f_star) = o
        .optimum()
        .ok_or_else(|| Error::Config(format!("oracle {} has no recorded optimum", o.name())))?;
    let gn = norm(&o.gradient(x));
    let lhs = nu * gn * gn / (2.0 * (p.l0 + p.l1 * gn));
    let rhs = o.value(x) - f_star;
    Ok(InequalityMargin::evaluate(lhs, rhs, atol))
}

/// Bundle returned by [`check_cocoercivity`].
#[derive(Debug, Clone, Copy)]
pub struct CocoercivityReport {
    /// Whether the proximity condition `L1·‖x−y‖·exp(L1·‖x−y‖) ≤ 1` holds;
    /// the remaining inequalities are only claimed under it.
    pub proximity_ok: bool,
    /// Bregman-gap bound anchored at `x`:
    /// `ν·‖∇f(x)−∇f(y)‖²/(2(L0+L1·‖∇f(y)‖)) ≤ f(y) − f(x) − ⟨∇f(x), y−x⟩`.
    pub bregman_xy: InequalityMargin,
    /// The same bound with the roles of `x` and `y` swapped.
    pub bregman_yx: InequalityMargin,
    /// Cocoercivity: the sum of the two `ν`-weighted terms is at most
    /// `⟨∇f(x)−∇f(y), x−y⟩`.
    pub cocoercive: InequalityMargin,
}

/// Evaluates the Bregman and cocoercivity bounds for a convex oracle.
///
/// When the proximity condition fails the margins are still reported (the
/// inequalities may or may not hold out of hypothesis) with
/// `proximity_ok = false`; callers should not treat a negative slack as a
/// failure in that case.
pub fn check_cocoercivity(
    o: &Oracle,
    x: &[f64],
    y: &[f64],
    nu: f64,
    atol: f64,
) -> Result<CocoercivityReport> {
    let p = params(o)?;
    let r = dist(x, y);
    let proximity_ok = p.l1 * r * (p.l1 * r).exp() <= 1.0 + 1e-15;
    let gx = o.gradient(x);
    let gy = o.gradient(y);
    let dg2 = dist(&gx, &gy).powi(2);
    let term_at = |anchor_grad_norm: f64| nu * dg2 / (2.0 * (p.l0 + p.l1 * anchor_grad_norm));

    let bregman_xy = InequalityMargin::evaluate(
        term_at(norm(&gy)),
        o.value(y) - o.value(x) - dot(&gx, &sub(y, x)),
        atol,
    );
    let bregman_yx = InequalityMargin::evaluate(
        term_at(norm(&gx)),
        o.value(x) - o.value(y) - dot(&gy, &sub(x, y)),
        atol,
    );
    let cocoercive = InequalityMargin::evaluate(
        term_at(norm(&gx)) + term_at(norm(&gy)),
        dot(&sub(&gx, &gy), &sub(x, y)),
        atol,
    );
    Ok(CocoercivityReport {
        proximity_ok,
        bregman_xy,
        bregman_yx,
        cocoercive,
    })
}

/// One `(‖∇f‖, ‖∇²f‖)` measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessGradSample {
    pub grad_norm: f64,
    pub hess_norm: f64,
}

/// Samples gradient-norm/Hessian-norm pairs at the given points.
///
/// Points where the Hessian-norm estimate fails (non-finite probes) are
/// skipped; a human-readable warning is recorded for each skip.
pub fn sample_hess_vs_grad(
    o: &Oracle,
    points: &[Vec<f64>],
) -> (Vec<HessGradSample>, Vec<String>) {
    let mut samples = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    for (i, x) in points.iter().enumerate() {
        let g = o.gradient(x);
        if g.iter().any(|t| !t.is_finite()) {
            warnings.push(format!("point {i}: non-finite gradient, skipped"));
            continue;
        }
        match crate::scalar::hessian_norm_estimate(|y| o.gradient(y), x, 1e-5, 1e-9, 300) {
            Ok(h) => samples.push(HessGradSample {
                grad_norm: norm(&g),
                hess_norm: h,
            }),
            Err(e) => warnings.push(format!("point {i}: {e}, skipped")),
        }
    }
    (samples, warnings)
}

/// Renders samples as a `grad_norm,hess_norm` CSV.
pub fn samples_to_csv(samples: &[HessGradSample]) -> String {
    let mut out = String::from("grad_norm,hess_norm\n");
    for s in samples {
        out.push_str(&format!("{},{}\n", s.grad_norm, s.hess_norm));
    }
    out
}

/// Fits the tightest affine envelope `hess_norm ≤ L0 + L1·grad_norm`.
///
/// Among all feasible envelopes with `L0, L1 ≥ 0`, returns the one
/// minimizing `L0 + L1·mean(grad_norm)`.  The optimum of this linear
/// objective over the feasibility polyhedron is attained at a line through
/// two samples on the upper convex hull of the cloud, or on one of the two
/// axis-aligned extremes (`L1 = 0` at the max Hessian norm, or `L0 = 0` at
/// the max ratio), so those are the candidates enumerated.
pub fn fit_l0_l1(samples: &[HessGradSample]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Config(format!(
            "envelope fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|s| !s.grad_norm.is_finite() || !s.hess_norm.is_finite() || s.hess_norm < 0.0)
    {
        return Err(Error::Config("envelope fit needs finite, nonnegative samples".into()));
    }

    let mut pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.grad_norm, s.hess_norm)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // For equal gradient norms only the largest Hessian norm can bind.
    pts.dedup_by(|next, kept| {
        if next.0 == kept.0 {
            kept.1 = kept.1.max(next.1);
            true
        } else {
            false
        }
    });

    let mean_g: f64 =
        samples.iter().map(|s| s.grad_norm).sum::<f64>() / samples.len() as f64;
    let feasible = |l0: f64, l1: f64| {
        l0 >= 0.0
            && l1 >= 0.0
            && pts
                .iter()
                .all(|&(g, h)| h <= l0 + l1 * g + 1e-9 * h.abs().max(1.0))
    };

    // Upper convex hull of the (deduplicated, g-sorted) cloud.
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Pop b when a→b→p turns left or is straight (b under the chord).
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let mut best: Option<(f64, f64, f64)> = None; // (objective, l0, l1)
    let mut consider = |l0: f64, l1: f64| {
        if feasible(l0, l1) {
            let obj = l0 + l1 * mean_g;
            if best.map_or(true, |(o, _, _)| obj < o) {
                best = Some((obj, l0, l1));
            }
        }
    };

    // Flat envelope.
    let max_h = pts.iter().map(|p| p.1).fold(0.0_f64, f64::max);
    consider(max_h, 0.0);
    // Envelope through the origin (only when no sample has h > 0 at g = 0).
    let max_ratio = pts
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|p| p.1 / p.0)
        .fold(0.0_f64, f64::max);
    consider(0.0, max_ratio);
    // Hull edges.
    for w in hull.windows(2) {
        let (g1, h1) = w[0];
        let (g2, h2) = w[1];
        let l1 = (h2 - h1) / (g2 - g1);
        let l0 = h1 - l1 * g1;
        consider(l0, l1);
    }

    let (_, l0, l1) = best.ok_or_else(|| Error::Config("no feasible envelope found".into()))?;
    Ok((l0, l1))
}
