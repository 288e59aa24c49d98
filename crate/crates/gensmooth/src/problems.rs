//! Objective oracles with known smoothness structure.
//!
//! Every oracle exposes exact values and gradients; the analytic
//! constructors also record the `(L0, L1)` pair for which
//! `‖∇²f(x)‖ ≤ L0 + L1·‖∇f(x)‖` holds, the strong-convexity modulus when
//! there is one, and the minimizer when it is known in closed form.

use crate::libsvm::SparseDataset;
use crate::scalar::{dot, norm, standard_normal, uniform_index};
use crate::{Error, Result};

/// Smoothness constants attached to an oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    /// Additive constant in the Hessian-norm bound; strictly positive.
    pub l0: f64,
    /// Gradient-proportional constant; nonnegative.
    pub l1: f64,
    /// Strong-convexity modulus; zero when merely convex.
    pub mu: f64,
    /// Global Lipschitz constant of the gradient, when finite.
    pub l_classical: Option<f64>,
}

impl SmoothnessParams {
    pub fn new(l0: f64, l1: f64, mu: f64, l_classical: Option<f64>) -> Result<Self> {
        if !(l0 > 0.0) {
            return Err(Error::Config(format!("L0 must be positive, got {l0}")));
        }
        if !(l1 >= 0.0) {
            return Err(Error::Config(format!("L1 must be nonnegative, got {l1}")));
        }
        if !(mu >= 0.0) {
            return Err(Error::Config(format!("mu must be nonnegative, got {mu}")));
        }
        Ok(Self { l0, l1, mu, l_classical })
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// One addend of a finite-sum objective.
pub struct Component {
    value: ValueFn,
    gradient: GradFn,
}

/// A differentiable objective with optional finite-sum structure,
/// optional known optimum, and optional smoothness constants.
pub struct Oracle {
    name: String,
    dim: usize,
    value: ValueFn,
    gradient: GradFn,
    components: Vec<Component>,
    optimum: Option<(Vec<f64>, f64)>,
    component_optima: Option<Vec<f64>>,
    smoothness: Option<SmoothnessParams>,
}

impl Oracle {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.gradient)(x)
    }

    /// Number of finite-sum components; zero when the objective is monolithic.
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        (self.components[i].value)(x)
    }

    pub fn component_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        (self.components[i].gradient)(x)
    }

    /// The minimizer and minimum value, when known exactly.
    pub fn optimum(&self) -> Option<(&[f64], f64)> {
        self.optimum.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    /// Per-component minimum values `f_i(x*)` at the shared minimizer,
    /// when every component is minimized at the same point.
    pub fn component_optima(&self) -> Option<&[f64]> {
        self.component_optima.as_deref()
    }

    pub fn smoothness(&self) -> Option<SmoothnessParams> {
        self.smoothness
    }

    /// Replaces the recorded optimum (used when a minimizer is found
    /// numerically for an objective without a closed form).
    pub fn with_numeric_optimum(mut self, x_star: Vec<f64>, f_star: f64) -> Self {
        self.optimum = Some((x_star, f_star));
        self
    }
}

/// `f(x) = ‖x‖^{2n}` for integer `n ≥ 1`.
///
/// Satisfies the Hessian-norm bound with `L0 = 2n`, `L1 = 2n − 1`; for
/// `n = 1` the gradient is globally 2-Lipschitz.
pub fn make_power_norm(d: usize, n: u32) -> Result<Oracle> {
    if d == 0 || n == 0 {
        return Err(Error::Config("power norm needs d ≥ 1 and n ≥ 1".into()));
    }
    let p = n as i32;
    let value = move |x: &[f64]| {
        let n2: f64 = x.iter().map(|t| t * t).sum();
        n2.powi(p)
    };
    let gradient = move |x: &[f64]| {
        let n2: f64 = x.iter().map(|t| t * t).sum();
        let c = 2.0 * p as f64 * n2.powi(p - 1);
        x.iter().map(|t| c * t).collect()
    };
    Ok(Oracle {
        name: format!("power_norm(d={d},n={n})"),
        dim: d,
        value: Box::new(value),
        gradient: Box::new(gradient),
        components: Vec::new(),
        optimum: Some((vec![0.0; d], 0.0)),
        component_optima: None,
        smoothness: Some(SmoothnessParams::new(
            2.0 * n as f64,
            2.0 * n as f64 - 1.0,
            0.0,
            if n == 1 { Some(2.0) } else { None },
        )?),
    })
}

/// `f(x) = exp(aᵀx)`.
///
/// The Hessian norm is exactly `‖a‖·‖∇f(x)‖`, so `L1 = ‖a‖` with a tiny
/// positive `L0` placeholder (the additive constant is not needed but must
/// stay positive).  No finite minimizer and no finite classical constant.
pub fn make_exp_inner(a: Vec<f64>) -> Result<Oracle> {
    if a.is_empty() {
        return Err(Error::Config("exp inner product needs a nonempty vector".into()));
    }
    let na = norm(&a);
    let d = a.len();
    let a2 = a.clone();
    let value = move |x: &[f64]| dot(&a, x).exp();
    let gradient = move |x: &[f64]| {
        let e = dot(&a2, x).exp();
        a2.iter().map(|t| t * e).collect()
    };
    Ok(Oracle {
        name: "exp_inner".into(),
        dim: d,
        value: Box::new(value),
        gradient: Box::new(gradient),
        components: Vec::new(),
        optimum: None,
        component_optima: None,
        smoothness: Some(SmoothnessParams::new(1e-12, na, 0.0, None)?),
    })
}

/// `f(x) = (μ/2)‖x‖² + ‖x‖⁴`, strongly convex for `μ > 0`.
///
/// `∇²f = (μ + 4‖x‖²)I + 8xxᵀ`, so `‖∇²f‖ = μ + 12‖x‖²` and the bound
/// holds with `L0 = μ + 12`, `L1 = 3`.
pub fn make_quartic_regularized(d: usize, mu: f64) -> Result<Oracle> {
    if d == 0 || !(mu >= 0.0) {
        return Err(Error::Config("regularized quartic needs d ≥ 1, mu ≥ 0".into()));
    }
    let value = move |x: &[f64]| {
        let n2: f64 = x.iter().map(|t| t * t).sum();
        0.5 * mu * n2 + n2 * n2
    };
    let gradient = move |x: &[f64]| {
        let n2: f64 = x.iter().map(|t| t * t).sum();
        x.iter().map(|t| (mu + 4.0 * n2) * t).collect()
    };
    Ok(Oracle {
        name: format!("quartic_reg(d={d},mu={mu})"),
        dim: d,
        value: Box::new(value),
        gradient: Box::new(gradient),
        components: Vec::new(),
        optimum: Some((vec![0.0; d], 0.0)),
        component_optima: None,
        smoothness: Some(SmoothnessParams::new(mu + 12.0, 3.0, mu, None)?),
    })
}

/// Finite sum of quartics with a shared minimizer:
/// `f_i(x) = (a_iᵀx − b_i)⁴` with `b_i = a_iᵀx*`, so every component
/// vanishes at `x*`.  Constants: `L0 = 12·max_i‖a_i‖²`, `L1 = 3·max_i‖a_i‖`
/// (each component is a scalar quartic composed with a linear map).
pub fn make_shared_min_quartic(rows: Vec<Vec<f64>>, x_star: Vec<f64>) -> Result<Oracle> {
    if rows.is_empty() {
        return Err(Error::Config("shared-minimum quartic needs at least one row".into()));
    }
    let d = x_star.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config("row length does not match the minimizer dimension".into()));
    }
    let n = rows.len();
    let b: Vec<f64> = rows.iter().map(|r| dot(r, &x_star)).collect();
    let max_norm = rows.iter().map(|r| norm(r)).fold(0.0_f64, f64::max);
    if max_norm == 0.0 {
        return Err(Error::Config("all rows are zero".into()));
    }

    let mut components = Vec::with_capacity(n);
    for (row, bi) in rows.iter().cloned().zip(b.iter().copied()) {
        let row_v = row.clone();
        let value = move |x: &[f64]| {
            let t = dot(&row, x) - bi;
            t * t * t * t
        };
        let gradient = move |x: &[f64]| {
            let t = dot(&row_v, x) - bi;
            let c = 4.0 * t * t * t;
            row_v.iter().map(|a| c * a).collect()
        };
        components.push(Component {
            value: Box::new(value),
            gradient: Box::new(gradient),
        });
    }

    let rows_v = rows.clone();
    let b_v = b.clone();
    let value = move |x: &[f64]| {
        let mut acc = 0.0;
        for (row, bi) in rows_v.iter().zip(&b_v) {
            let t = dot(row, x) - bi;
            acc += t * t * t * t;
        }
        acc / n as f64
    };
    let rows_g = rows;
    let gradient = move |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        for (row, bi) in rows_g.iter().zip(&b) {
            let c = 4.0 * (dot(row, x) - bi).powi(3) / n as f64;
            for (gj, aj) in g.iter_mut().zip(row) {
                *gj += c * aj;
            }
        }
        g
    };

    Ok(Oracle {
        name: format!("shared_min_quartic(n={n},d={d})"),
        dim: d,
        value: Box::new(value),
        gradient: Box::new(gradient),
        components,
        optimum: Some((x_star, 0.0)),
        component_optima: Some(vec![0.0; n]),
        smoothness: Some(SmoothnessParams::new(
            12.0 * max_norm * max_norm,
            3.0 * max_norm,
            0.0,
            None,
        )?),
    })
}

/// Averaged logistic loss over a sparse dataset, with an optional ridge:
/// `f(x) = (1/n) Σ_i [log(1 + exp(−y_i·a_iᵀx)) + (μ/2)‖x‖²]`.
///
/// The ridge is added to every component so that the finite-sum identity
/// `f = mean(f_i)` holds exactly.  The recorded constants are the
/// per-component ones: `L1 = max_i‖a_i‖` (the Hessian of a single loss is
/// bounded by `‖a_i‖·‖∇f_i‖` up to the ridge) and the classical constant
/// `L = max_i‖a_i‖²` (the logistic curvature factor never exceeds 1).
pub fn make_logistic(data: &SparseDataset, mu: f64) -> Result<Oracle> {
    if data.rows.is_empty() {
        return Err(Error::Config("logistic regression needs at least one row".into()));
    }
    if !(mu >= 0.0) {
        return Err(Error::Config(format!("ridge weight must be nonnegative, got {mu}")));
    }
    let d = data.dimension();
    let n = data.rows.len();

    // log(1 + exp(t)) without overflow for large |t|.
    fn log1p_exp(t: f64) -> f64 {
        if t > 0.0 {
            t + (-t).exp().ln_1p()
        } else {
            t.exp().ln_1p()
        }
    }
    // σ(t) = 1/(1 + exp(−t)) without overflow.
    fn sigmoid(t: f64) -> f64 {
        if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    }

    let mut components = Vec::with_capacity(n);
    let mut max_row_norm: f64 = 0.0;
    for (features, label) in data.rows.iter().cloned().zip(data.labels.iter().copied()) {
        let row_norm: f64 = features.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        max_row_norm = max_row_norm.max(row_norm);
        let y = label as f64;
        let feats_v = features.clone();
        let value = move |x: &[f64]| {
            let margin: f64 = features.iter().map(|&(j, v)| v * x[j]).sum::<f64>() * y;
            let ridge = 0.5 * mu * x.iter().map(|t| t * t).sum::<f64>();
            log1p_exp(-margin) + ridge
        };
        let gradient = move |x: &[f64]| {
            let margin: f64 = feats_v.iter().map(|&(j, v)| v * x[j]).sum::<f64>() * y;
            let c = -y * sigmoid(-margin);
            let mut g: Vec<f64> = x.iter().map(|t| mu * t).collect();
            for &(j, v) in &feats_v {
                g[j] += c * v;
            }
            g
        };
        components.push(Component {
            value: Box::new(value),
            gradient: Box::new(gradient),
        });
    }

    let rows_v: Vec<(Vec<(usize, f64)>, f64)> = data
        .rows
        .iter()
        .cloned()
        .zip(data.labels.iter().map(|&l| l as f64))
        .collect();
    let rows_g = rows_v.clone();
    let value = move |x: &[f64]| {
        let mut acc = 0.0;
        for (features, y) in &rows_v {
            let margin: f64 = features.iter().map(|&(j, v)| v * x[j]).sum::<f64>() * y;
            acc += log1p_exp(-margin);
        }
        acc / n as f64 + 0.5 * mu * x.iter().map(|t| t * t).sum::<f64>()
    };
    let gradient = move |x: &[f64]| {
        let mut g: Vec<f64> = x.iter().map(|t| mu * t).collect();
        for (features, y) in &rows_g {
            let margin: f64 = features.iter().map(|&(j, v)| v * x[j]).sum::<f64>() * y;
            let c = -y * sigmoid(-margin) / n as f64;
            for &(j, v) in features {
                g[j] += c * v;
            }
        }
        g
    };

    Ok(Oracle {
        name: format!("logistic(n={n},d={d},mu={mu})"),
        dim: d,
        value: Box::new(value),
        gradient: Box::new(gradient),
        components,
        optimum: None,
        component_optima: None,
        smoothness: Some(SmoothnessParams::new(
            1e-12 + mu,
            max_row_norm,
            mu,
            Some(max_row_norm * max_row_norm + mu),
        )?),
    })
}

/// A small synthetic logistic problem: 50 rows in 50 dimensions, row `i`
/// equal to `(1, 2, …, 50)` plus standard normal noise, all labels `+1`
/// except one flipped to `−1`.  The single flipped label makes the data
/// non-separable, so the minimizer is finite.
pub fn make_toy_logistic(seed: u64, flipped_index: Option<usize>) -> Result<Oracle> {
    let d = 50;
    let n = 50;
    let flipped = match flipped_index {
        Some(j) if j < n => j,
        Some(j) => {
            return Err(Error::Config(format!(
                "flipped index {j} out of range for {n} rows"
            )))
        }
        None => uniform_index(seed, u64::MAX, n),
    };
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<(usize, f64)> = (0..d)
            .map(|j| {
                let base = (j + 1) as f64;
                (j, base + standard_normal(seed, (i * d + j) as u64))
            })
            .collect();
        rows.push(row);
        labels.push(if i == flipped { -1 } else { 1 });
    }
    let data = SparseDataset { rows, labels, dim: d };
    let mut oracle = make_logistic(&data, 0.0)?;
    oracle.name = format!("toy_logistic(seed={seed},flipped={flipped})");
    Ok(oracle)
}
