//! Deterministic first-order methods and the trace-producing runner.
//!
//! Six methods share one driver: plain gradient descent, gradient descent
//! with the gradient-clipped stepsize `η/(L0 + L1·‖∇f‖)`, the Polyak
//! stepsize, a similar-triangles accelerated method with two curvature
//! rules, and an adaptive method whose stepsize tracks the local inverse
//! curvature ratio `‖Δx‖/‖Δg‖` (plain and strongly convex variants).
//!
//! Trace conventions: record `k` holds the iterate `x^k` (for the
//! accelerated method, the output point `y^k`), its objective value and the
//! norm of the gradient the method evaluated at step `k`, plus the stepsize
//! applied when moving from `x^k` to `x^{k+1}` (`NaN` on the final record
//! when that stepsize is not yet defined).

use crate::problems::{Oracle, SmoothnessParams};
use crate::scalar::{axpy, dist, norm};
use crate::{Error, Result};

/// Which update rule the runner applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Gradient descent with the constant stepsize `eta`.
    Gd,
    /// Gradient descent with stepsize `eta / (L0 + L1·‖∇f(x)‖)`.
    L0L1Gd,
    /// Polyak stepsize `(f(x) − f*) / ‖∇f(x)‖²`.
    GdPs,
    /// Similar-triangles acceleration, curvature re-estimated each step.
    Stm,
    /// Similar-triangles acceleration, curvature kept at its running max.
    StmMax,
    /// Adaptive stepsizes from local curvature ratios.
    Adgd,
    /// Strongly convex variant of the adaptive method.
    AdgdSc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gd => "GD",
            Method::L0L1Gd => "L0L1GD",
            Method::GdPs => "GDPS",
            Method::Stm => "STM",
            Method::StmMax => "STM_MAX",
            Method::Adgd => "ADGD",
            Method::AdgdSc => "ADGD_SC",
        }
    }
}

/// Configuration of a deterministic run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Stepsize scale: the literal stepsize for [`Method::Gd`], the
    /// normalized stepsize for the clipped and accelerated methods.
    pub eta: f64,
    /// Ratio coefficient for the adaptive method, in `(0, 1/2]`.
    pub gamma: f64,
    /// Warm-up stepsize for the adaptive method's first step.
    pub lambda0: f64,
    /// Number of iterations; the trace has records `0..=iters` unless the
    /// gradient tolerance stops it early.
    pub iters: usize,
    pub x0: Vec<f64>,
    /// Early-stop threshold on the evaluated gradient norm; `0` disables.
    pub grad_tol: f64,
}

impl RunConfig {
    pub fn new(method: Method, x0: Vec<f64>) -> Self {
        Self {
            method,
            eta: 0.5 * crate::scalar::nu(),
            gamma: 0.25,
            lambda0: 1e-3,
            iters: 100,
            x0,
            grad_tol: 0.0,
        }
    }

    fn validate(&self) -> Result<Vec<String>> {
        if !(self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1/2], got {}",
                self.gamma
            )));
        }
        if !(self.lambda0 > 0.0) {
            return Err(Error::Config(format!(
                "lambda0 must be positive, got {}",
                self.lambda0
            )));
        }
        if self.x0.is_empty() {
            return Err(Error::Config("x0 must be nonempty".into()));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::Config("grad_tol must be nonnegative".into()));
        }
        let mut warnings = Vec::new();
        let half_nu = 0.5 * crate::scalar::nu();
        if matches!(self.method, Method::L0L1Gd | Method::Stm | Method::StmMax)
            && self.eta > half_nu * (1.0 + 1e-12)
        {
            warnings.push(format!(
                "eta = {} exceeds the guaranteed range (≤ {half_nu}); convergence bounds may not apply",
                self.eta
            ));
        }
        Ok(warnings)
    }
}

/// Method-specific per-record state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodState {
    None,
    /// Accumulated weight `A_k`, curvature estimate `G_k`, and the distance
    /// of the dual point `z^k` to the optimum when the latter is known.
    Stm { a: f64, g: f64, z_dist: Option<f64> },
    /// Current stepsize `λ_k` and ratio `θ_k = λ_k/λ_{k−1}` (`∞` at `k = 0`).
    Adgd { lambda: f64, theta: f64 },
}

/// One row of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub dist_to_opt: Option<f64>,
    pub state: MethodState,
}

/// Full history of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    pub method: Method,
    pub records: Vec<Record>,
    /// True when the gradient tolerance stopped the run early.
    pub converged: bool,
    pub warnings: Vec<String>,
    /// Weighted ergodic iterate of the adaptive method, when defined.
    pub averaged_iterate: Option<Vec<f64>>,
}

impl IterateTrace {
    pub fn last(&self) -> &Record {
        self.records.last().expect("trace always has record 0")
    }
}

// ---------------------------------------------------------------------------
// Pure step operations.
// ---------------------------------------------------------------------------

/// `x − step·g`.
pub fn gd_step(x: &[f64], g: &[f64], step: f64) -> Vec<f64> {
    axpy(x, -step, g)
}

/// Gradient-clipped step: returns the new point and the stepsize
/// `eta / (L0 + L1·‖g‖)`.
pub fn l0l1_gd_step(x: &[f64], g: &[f64], eta: f64, p: &SmoothnessParams) -> (Vec<f64>, f64) {
    let step = eta / (p.l0 + p.l1 * norm(g));
    (axpy(x, -step, g), step)
}

/// Polyak step: returns the new point and the stepsize `(f − f*)/‖g‖²`.
///
/// A zero gradient yields a zero step (the method has terminated).  A value
/// strictly below the declared optimum (beyond `1e-12` relative) means the
/// optimum is wrong and is reported as an error.
pub fn gd_ps_step(x: &[f64], g: &[f64], f_val: f64, f_star: f64) -> Result<(Vec<f64>, f64)> {
    if f_val < f_star - 1e-12 * f_star.abs().max(1.0) {
        return Err(Error::InconsistentOptimum {
            observed: f_val,
            declared: f_star,
        });
    }
    let gn2 = g.iter().map(|t| t * t).sum::<f64>();
    if gn2 == 0.0 || f_val <= f_star {
        return Ok((x.to_vec(), 0.0));
    }
    let step = (f_val - f_star) / gn2;
    Ok((axpy(x, -step, g), step))
}

/// Curvature rule for the accelerated method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureRule {
    /// `G_{k+1} = L0 + L1·‖∇f(x^{k+1})‖` (heuristic; no convergence proof).
    Instant,
    /// `G_{k+1} = max(G_k, L0 + L1·‖∇f(x^{k+1})‖)`.
    Max,
}

/// State of the similar-triangles method between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct StmState {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub a: f64,
    pub g: f64,
    pub k: usize,
}

/// One similar-triangles iteration.  Returns the updated state along with
/// the probe point `x^{k+1}` and its gradient norm (for trace reporting);
/// the applied dual stepsize is `alpha/state.g` of the returned state.
pub fn stm_step(
    state: &StmState,
    oracle: &Oracle,
    eta: f64,
    p: &SmoothnessParams,
    rule: CurvatureRule,
) -> (StmState, Vec<f64>, f64, f64) {
    let alpha = eta * (state.k as f64 + 2.0) / 2.0;
    let a_next = state.a + alpha;
    let x_probe: Vec<f64> = state
        .y
        .iter()
        .zip(&state.z)
        .map(|(yi, zi)| (state.a * yi + alpha * zi) / a_next)
        .collect();
    let gp = oracle.gradient(&x_probe);
    let gn = norm(&gp);
    let local = p.l0 + p.l1 * gn;
    let g_next = match rule {
        CurvatureRule::Instant => local,
        CurvatureRule::Max => state.g.max(local),
    };
    let step = alpha / g_next;
    let z_next = axpy(&state.z, -step, &gp);
    let y_next: Vec<f64> = state
        .y
        .iter()
        .zip(&z_next)
        .map(|(yi, zi)| (state.a * yi + alpha * zi) / a_next)
        .collect();
    (
        StmState {
            y: y_next,
            z: z_next,
            a: a_next,
            g: g_next,
            k: state.k + 1,
        },
        x_probe,
        gn,
        step,
    )
}

/// Stepsize rule for the adaptive method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdgdRule {
    /// Growth `√(1+θ)·λ`, ratio `γ·‖Δx‖/‖Δg‖`.
    Convex,
    /// Growth `√(1+3θ/4)·λ`, ratio `‖Δx‖/(4‖Δg‖)`.
    StronglyConvex,
}

/// State of the adaptive method between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct AdgdState {
    pub x_prev: Vec<f64>,
    pub grad_prev: Vec<f64>,
    /// Most recent stepsize `λ_k`.
    pub lambda: f64,
    /// Ratio `θ_k = λ_k / λ_{k−1}` (`∞` before the first adaptive step).
    pub theta: f64,
    /// Running `S = λ_1θ_1 + Σ λ_k` for the ergodic average.
    pub sum_weights: f64,
    /// Running `Σ w_k x^k` for the ergodic average.
    pub weighted_sum: Vec<f64>,
    /// Running `Σ ‖x^{i+1} − x^i‖²`.
    pub sum_sq_steps: f64,
}

/// Computes the next stepsize from the growth and ratio branches.
///
/// `Δg = 0` with `Δx > 0` (identical gradients) leaves only the growth
/// branch.  `Δx = Δg = 0` means the iterate is stationary and the ratio is
/// `0/0`; the previous stepsize is kept, since any choice produces the same
/// iterates and growing it forever would overflow.  If the growth branch
/// itself is unbounded (`θ = ∞`) the previous stepsize is kept too.
pub fn adgd_stepsize(
    lambda_prev: f64,
    theta_prev: f64,
    dx: f64,
    dg: f64,
    gamma: f64,
    rule: AdgdRule,
) -> f64 {
    if dx == 0.0 && dg == 0.0 {
        return lambda_prev;
    }
    let growth = match rule {
        AdgdRule::Convex => {
            if theta_prev.is_finite() {
                (1.0 + theta_prev).sqrt() * lambda_prev
            } else {
                f64::INFINITY
            }
        }
        AdgdRule::StronglyConvex => {
            if theta_prev.is_finite() {
                (1.0 + 0.75 * theta_prev).sqrt() * lambda_prev
            } else {
                f64::INFINITY
            }
        }
    };
    let coeff = match rule {
        AdgdRule::Convex => gamma,
        AdgdRule::StronglyConvex => 0.25,
    };
    // `dx/dg` first: both can sit at the subnormal floor, where scaling
    // `dx` by the coefficient would flush the numerator to zero.
    let ratio = if dg > 0.0 { coeff * (dx / dg) } else { f64::INFINITY };
    let lambda = growth.min(ratio);
    if lambda.is_finite() {
        lambda
    } else {
        lambda_prev
    }
}

/// Finalizes the ergodic average `x̂ = (Σ w_k x^k + λ_M(1+θ_M)x^M) / S`.
///
/// `x_last` is the last iterate whose outgoing stepsize is known.  Errors
/// when the accumulated weight is not positive.
pub fn adgd_weighted_average(state: &AdgdState, x_last: &[f64]) -> Result<Vec<f64>> {
    let s = state.sum_weights;
    if !(s > 0.0) {
        return Err(Error::Config(format!(
            "ergodic average undefined: total weight {s}"
        )));
    }
    let w_last = state.lambda * (1.0 + state.theta);
    Ok(state
        .weighted_sum
        .iter()
        .zip(x_last)
        .map(|(acc, xi)| (acc + w_last * xi) / s)
        .collect())
}

// ---------------------------------------------------------------------------
// Runner.
// ---------------------------------------------------------------------------

fn require_params(oracle: &Oracle) -> Result<SmoothnessParams> {
    oracle.smoothness().ok_or_else(|| {
        Error::Config(format!(
            "method requires smoothness constants, but oracle {} has none",
            oracle.name()
        ))
    })
}

fn require_f_star(oracle: &Oracle) -> Result<f64> {
    oracle
        .optimum()
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Config(format!("oracle {} has no recorded optimum", oracle.name())))
}

/// Executes a configured run and records the full trace.
pub fn run(oracle: &Oracle, cfg: &RunConfig) -> Result<IterateTrace> {
    let mut warnings = cfg.validate()?;
    if cfg.x0.len() != oracle.dimension() {
        return Err(Error::Config(format!(
            "x0 has dimension {}, oracle {} expects {}",
            cfg.x0.len(),
            oracle.name(),
            oracle.dimension()
        )));
    }
    let opt_x: Option<Vec<f64>> = oracle.optimum().map(|(x, _)| x.to_vec());
    let dist_to = |x: &[f64]| opt_x.as_ref().map(|xs| dist(x, xs));

    let mut records: Vec<Record> = Vec::with_capacity(cfg.iters + 1);
    let mut converged = false;
    let mut averaged_iterate = None;

    match cfg.method {
        Method::Gd | Method::L0L1Gd | Method::GdPs => {
            let p = if cfg.method == Method::L0L1Gd {
                Some(require_params(oracle)?)
            } else {
                None
            };
            let f_star = if cfg.method == Method::GdPs {
                Some(require_f_star(oracle)?)
            } else {
                None
            };
            let mut x = cfg.x0.clone();
            for k in 0..=cfg.iters {
                let g = oracle.gradient(&x);
                let gn = norm(&g);
                let f = oracle.value(&x);
                if !f.is_finite() || !gn.is_finite() {
                    return Err(Error::NonFinite(format!("iteration {k} of {}", cfg.method.name())));
                }
                let (x_next, step) = match cfg.method {
                    Method::Gd => (gd_step(&x, &g, cfg.eta), cfg.eta),
                    Method::L0L1Gd => l0l1_gd_step(&x, &g, cfg.eta, p.as_ref().unwrap()),
                    Method::GdPs => gd_ps_step(&x, &g, f, f_star.unwrap())?,
                    _ => unreachable!(),
                };
                records.push(Record {
                    k,
                    f,
                    grad_norm: gn,
                    step,
                    dist_to_opt: dist_to(&x),
                    state: MethodState::None,
                    x: std::mem::replace(&mut x, x_next),
                });
                if cfg.grad_tol > 0.0 && gn <= cfg.grad_tol {
                    converged = true;
                    break;
                }
            }
        }
        Method::Stm | Method::StmMax => {
            let p = require_params(oracle)?;
            let rule = if cfg.method == Method::StmMax {
                CurvatureRule::Max
            } else {
                CurvatureRule::Instant
            };
            let g0 = oracle.gradient(&cfg.x0);
            let gn0 = norm(&g0);
            let mut state = StmState {
                y: cfg.x0.clone(),
                z: cfg.x0.clone(),
                a: 0.0,
                g: p.l0 + p.l1 * gn0,
                k: 0,
            };
            let mut probe_gn = gn0;
            for k in 0..=cfg.iters {
                let f = oracle.value(&state.y);
                if !f.is_finite() || !probe_gn.is_finite() {
                    return Err(Error::NonFinite(format!("iteration {k} of {}", cfg.method.name())));
                }
                let stop = cfg.grad_tol > 0.0 && probe_gn <= cfg.grad_tol;
                let (next, _x_probe, next_gn, step) = if k < cfg.iters && !stop {
                    stm_step(&state, oracle, cfg.eta, &p, rule)
                } else {
                    (state.clone(), Vec::new(), probe_gn, f64::NAN)
                };
                records.push(Record {
                    k,
                    x: state.y.clone(),
                    f,
                    grad_norm: probe_gn,
                    step,
                    dist_to_opt: dist_to(&state.y),
                    state: MethodState::Stm {
                        a: state.a,
                        g: state.g,
                        z_dist: dist_to(&state.z),
                    },
                });
                if stop {
                    converged = true;
                    break;
                }
                if k < cfg.iters {
                    state = next;
                    probe_gn = next_gn;
                }
            }
        }
        Method::Adgd | Method::AdgdSc => {
            let rule = if cfg.method == Method::AdgdSc {
                AdgdRule::StronglyConvex
            } else {
                AdgdRule::Convex
            };
            let d = cfg.x0.len();
            let mut x = cfg.x0.clone();
            let mut g = oracle.gradient(&x);
            let mut state = AdgdState {
                x_prev: x.clone(),
                grad_prev: g.clone(),
                lambda: cfg.lambda0,
                theta: f64::INFINITY,
                sum_weights: 0.0,
                weighted_sum: vec![0.0; d],
                sum_sq_steps: 0.0,
            };
            // Whether the ergodic accumulators have absorbed λ1θ1 yet.
            let mut seeded = false;
            for k in 0..=cfg.iters {
                let gn = norm(&g);
                let f = oracle.value(&x);
                if !f.is_finite() || !gn.is_finite() {
                    return Err(Error::NonFinite(format!("iteration {k} of {}", cfg.method.name())));
                }
                let step_here = if k == 0 { cfg.lambda0 } else { state.lambda };
                records.push(Record {
                    k,
                    x: x.clone(),
                    f,
                    grad_norm: gn,
                    step: if k < cfg.iters { step_here } else { f64::NAN },
                    dist_to_opt: dist_to(&x),
                    state: MethodState::Adgd {
                        lambda: step_here,
                        theta: if k == 0 { f64::INFINITY } else { state.theta },
                    },
                });
                if cfg.grad_tol > 0.0 && gn <= cfg.grad_tol {
                    converged = true;
                    break;
                }
                if k == cfg.iters {
                    break;
                }

                let x_next = axpy(&x, -step_here, &g);
                let g_next = oracle.gradient(&x_next);
                state.sum_sq_steps += dist(&x_next, &x).powi(2);

                // Stepsize for the *next* move, computed from the pair just
                // produced; this also fixes the ergodic weight of x^k.
                let dx = dist(&x_next, &x);
                let dg = dist(&g_next, &g);
                let lambda_next = adgd_stepsize(step_here,
                    if k == 0 { f64::INFINITY } else { state.theta },
                    dx, dg, cfg.gamma, rule);
                let theta_next = lambda_next / step_here;

                if cfg.method == Method::Adgd {
                    if !seeded {
                        // S starts at λ1θ1 + λ1 once the first adaptive
                        // stepsize exists.
                        state.sum_weights = lambda_next * theta_next + lambda_next;
                        seeded = true;
                    } else {
                        // Weight of x^k is w_k = λ_k(1+θ_k) − λ_{k+1}θ_{k+1}.
                        let mut w = step_here * (1.0 + state.theta) - lambda_next * theta_next;
                        if w < 0.0 {
                            if w < -1e-12 * step_here.max(1.0) {
                                warnings.push(format!(
                                    "ergodic weight clamped at k = {k} (was {w})"
                                ));
                            }
                            w = 0.0;
                        }
                        for (acc, xi) in state.weighted_sum.iter_mut().zip(&x) {
                            *acc += w * xi;
                        }
                        state.sum_weights += lambda_next;
                    }
                }

                state.x_prev = std::mem::replace(&mut x, x_next);
                state.grad_prev = std::mem::replace(&mut g, g_next);
                state.lambda = lambda_next;
                state.theta = theta_next;
            }
            if cfg.method == Method::Adgd && seeded {
                // state.lambda/theta are the outgoing stepsize of the last
                // recorded iterate, so it closes the telescoping sum.
                averaged_iterate =
                    adgd_weighted_average(&state, &records[records.len() - 1].x).ok();
            }
        }
    }

    Ok(IterateTrace {
        method: cfg.method,
        records,
        converged,
        warnings,
        averaged_iterate,
    })
}

/// Renders a trace as CSV.  Columns are `k,f,grad_norm,step,dist_to_opt`
/// plus `A,G` for the accelerated method and `lambda,theta` for the
/// adaptive one; unknown distances serialize as `nan`.
pub fn trace_to_csv(trace: &IterateTrace) -> String {
    let extra = match trace.records.first().map(|r| &r.state) {
        Some(MethodState::Stm { .. }) => ",A,G",
        Some(MethodState::Adgd { .. }) => ",lambda,theta",
        _ => "",
    };
    let mut out = format!("k,f,grad_norm,step,dist_to_opt{extra}\n");
    for r in &trace.records {
        let d = r
            .dist_to_opt
            .map_or_else(|| "nan".to_string(), |v| v.to_string());
        out.push_str(&format!("{},{},{},{},{}", r.k, r.f, r.grad_norm, r.step, d));
        match r.state {
            MethodState::Stm { a, g, .. } => out.push_str(&format!(",{a},{g}")),
            MethodState::Adgd { lambda, theta } => out.push_str(&format!(",{lambda},{theta}")),
            MethodState::None => {}
        }
        out.push('\n');
    }
    out
}
