//! Stochastic variants of the clipped-stepsize and Polyak methods for
//! finite-sum objectives whose components share a minimizer.
//!
//! Sampling is counter-based: the component drawn at iteration `k` of a
//! replicate is a pure function of `(seed, k)`, so every run is bitwise
//! reproducible and replicates are independent streams.

use crate::problems::{Oracle, SmoothnessParams};
use crate::scalar::{axpy, norm, uniform_index};
use crate::{Error, Result};

/// Which stochastic update the runner applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StochasticMethod {
    /// Component step `eta / (L0 + L1·‖∇f_ξ(x)‖)`.
    L0L1Sgd,
    /// Component Polyak step `(f_ξ(x) − f_ξ(x*)) / ‖∇f_ξ(x)‖²`.
    SgdPs,
}

impl StochasticMethod {
    pub fn name(self) -> &'static str {
        match self {
            StochasticMethod::L0L1Sgd => "L0L1SGD",
            StochasticMethod::SgdPs => "SGDPS",
        }
    }
}

/// Configuration of a stochastic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticRunConfig {
    pub method: StochasticMethod,
    pub eta: f64,
    pub iters: usize,
    pub x0: Vec<f64>,
    pub seed: u64,
    /// Number of independent replicates in the Monte-Carlo summary.
    pub replicate_count: usize,
}

impl StochasticRunConfig {
    pub fn new(method: StochasticMethod, x0: Vec<f64>, seed: u64) -> Self {
        Self {
            method,
            eta: 0.5 * crate::scalar::nu(),
            iters: 1000,
            x0,
            seed,
            replicate_count: 64,
        }
    }
}

/// One row of a stochastic trace: the sampled component and the resulting
/// full-objective statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticRecord {
    pub k: usize,
    pub x: Vec<f64>,
    /// Full objective value (not the sampled component's).
    pub f: f64,
    pub sampled: usize,
    pub step: f64,
}

/// Clipped component step.
pub fn l0l1_sgd_step(x: &[f64], g_comp: &[f64], eta: f64, p: &SmoothnessParams) -> (Vec<f64>, f64) {
    let step = eta / (p.l0 + p.l1 * norm(g_comp));
    (axpy(x, -step, g_comp), step)
}

/// Component Polyak step; `f_comp_star` is that component's value at the
/// shared minimizer.  Mirrors the deterministic rule, including the zero
/// gradient and inconsistent-optimum handling.
pub fn sgd_ps_step(
    x: &[f64],
    g_comp: &[f64],
    f_comp: f64,
    f_comp_star: f64,
) -> Result<(Vec<f64>, f64)> {
    if f_comp < f_comp_star - 1e-12 * f_comp_star.abs().max(1.0) {
        return Err(Error::InconsistentOptimum {
            observed: f_comp,
            declared: f_comp_star,
        });
    }
    let gn2 = g_comp.iter().map(|t| t * t).sum::<f64>();
    if gn2 == 0.0 || f_comp <= f_comp_star {
        return Ok((x.to_vec(), 0.0));
    }
    let step = (f_comp - f_comp_star) / gn2;
    Ok((axpy(x, -step, g_comp), step))
}

/// Runs a single replicate and records the trajectory.
pub fn run_stochastic(oracle: &Oracle, cfg: &StochasticRunConfig) -> Result<Vec<StochasticRecord>> {
    let n = oracle.component_count();
    if n == 0 {
        return Err(Error::Config(format!(
            "oracle {} is not a finite sum",
            oracle.name()
        )));
    }
    if cfg.x0.len() != oracle.dimension() {
        return Err(Error::Config("x0 dimension mismatch".into()));
    }
    if !(cfg.eta > 0.0) {
        return Err(Error::Config(format!("eta must be positive, got {}", cfg.eta)));
    }
    let p = oracle
        .smoothness()
        .ok_or_else(|| Error::Config("stochastic run needs smoothness constants".into()))?;
    let comp_star = oracle.component_optima().map(|c| c.to_vec());
    if cfg.method == StochasticMethod::SgdPs && comp_star.is_none() {
        return Err(Error::Config(
            "component Polyak steps need per-component optimal values".into(),
        ));
    }

    let mut records = Vec::with_capacity(cfg.iters + 1);
    let mut x = cfg.x0.clone();
    for k in 0..=cfg.iters {
        let f = oracle.value(&x);
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("iteration {k} of {}", cfg.method.name())));
        }
        let xi = uniform_index(cfg.seed, k as u64, n);
        let (x_next, step) = if k < cfg.iters {
            let g = oracle.component_gradient(xi, &x);
            match cfg.method {
                StochasticMethod::L0L1Sgd => l0l1_sgd_step(&x, &g, cfg.eta, &p),
                StochasticMethod::SgdPs => {
                    let fc = oracle.component_value(xi, &x);
                    sgd_ps_step(&x, &g, fc, comp_star.as_ref().unwrap()[xi])?
                }
            }
        } else {
            (x.clone(), f64::NAN)
        };
        records.push(StochasticRecord {
            k,
            f,
            sampled: xi,
            step,
            x: std::mem::replace(&mut x, x_next),
        });
    }
    Ok(records)
}

/// Monte-Carlo summary over replicates of the capped-gap criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCriterionSummary {
    /// `E[min{cap, f(x^k) − f*}]` estimated per iteration.
    pub mean: Vec<f64>,
    /// Standard error of each mean.
    pub stderr: Vec<f64>,
    /// Running minimum of the mean over iterations.
    pub running_min: Vec<f64>,
}

/// Runs `replicate_count` independent replicates (seeds `seed, seed+1, …`)
/// and estimates `E[min{cap, f(x^k) − f*}]` per iteration.
pub fn expected_min_criterion(
    oracle: &Oracle,
    cfg: &StochasticRunConfig,
    cap: f64,
) -> Result<MinCriterionSummary> {
    if cfg.replicate_count == 0 {
        return Err(Error::Config("replicate count must be positive".into()));
    }
    let (_, f_star) = oracle
        .optimum()
        .ok_or_else(|| Error::Config("criterion needs the optimal value".into()))?;
    let len = cfg.iters + 1;
    let mut sum = vec![0.0; len];
    let mut sum_sq = vec![0.0; len];
    for r in 0..cfg.replicate_count {
        let mut rep_cfg = cfg.clone();
        rep_cfg.seed = cfg.seed.wrapping_add(r as u64);
        let records = run_stochastic(oracle, &rep_cfg)?;
        for (k, rec) in records.iter().enumerate() {
            let v = cap.min(rec.f - f_star);
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let m = cfg.replicate_count as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let stderr: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, mu)| {
            if cfg.replicate_count < 2 {
                0.0
            } else {
                let var = (sq / m - mu * mu).max(0.0) * m / (m - 1.0);
                (var / m).sqrt()
            }
        })
        .collect();
    let mut running = Vec::with_capacity(len);
    let mut cur = f64::INFINITY;
    for &v in &mean {
        cur = cur.min(v);
        running.push(cur);
    }
    Ok(MinCriterionSummary {
        mean,
        stderr,
        running_min: running,
    })
}

/// Renders a summary as a `k,mean_min_criterion,stderr,running_min` CSV.
pub fn summary_to_csv(s: &MinCriterionSummary) -> String {
    let mut out = String::from("k,mean_min_criterion,stderr,running_min\n");
    for k in 0..s.mean.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k, s.mean[k], s.stderr[k], s.running_min[k]
        ));
    }
    out
}
