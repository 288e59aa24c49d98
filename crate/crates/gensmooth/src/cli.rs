//! Experiment specs and the `gensmooth` command-line interface.
//!
//! A spec is a JSON document naming one problem, a list of runs, an output
//! directory, and which artifacts to emit.  `run` executes it, `verify`
//! re-executes it, compares previously written traces byte-for-byte, and
//! evaluates every applicable convergence bound; `figure1` materializes the
//! built-in qualitative comparison preset; `smoothness` samples the
//! gradient/Hessian-norm cloud and fits an envelope; `nu` prints the
//! stepsize constant.
//!
//! Exit codes: `0` success, `1` verification failure, `2` configuration or
//! parse error.

use crate::diagnostics::{self, BoundReport};
use crate::optimizers::{self, Method, RunConfig};
use crate::problems::{self, Oracle};
use crate::scalar::{self, mix64, uniform01};
use crate::stochastic::{self, StochasticMethod, StochasticRunConfig};
use crate::verifier;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

/// Default RNG seed for stochastic runs.
pub const DEFAULT_SEED: u64 = 20240923;

/// Problem selector of an experiment spec.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    PowerNorm { d: usize, n: u32 },
    ExpInner { a: Vec<f64> },
    QuarticReg { d: usize, mu: f64 },
    SharedMinQuartic { rows: Vec<Vec<f64>>, x_star: Vec<f64> },
    Logistic {
        dataset_path: String,
        #[serde(default)]
        mu: f64,
    },
    ToyLogistic {
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flipped_index: Option<usize>,
    },
}

impl ProblemSpec {
    /// Instantiates the oracle; paths are resolved against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Oracle> {
        match self {
            ProblemSpec::PowerNorm { d, n } => problems::make_power_norm(*d, *n),
            ProblemSpec::ExpInner { a } => problems::make_exp_inner(a.clone()),
            ProblemSpec::QuarticReg { d, mu } => problems::make_quartic_regularized(*d, *mu),
            ProblemSpec::SharedMinQuartic { rows, x_star } => {
                problems::make_shared_min_quartic(rows.clone(), x_star.clone())
            }
            ProblemSpec::Logistic { dataset_path, mu } => {
                let path = base_dir.join(dataset_path);
                let text = std::fs::read_to_string(&path)?;
                let data = crate::libsvm::parse_libsvm(&text)?;
                problems::make_logistic(&data, *mu)
            }
            ProblemSpec::ToyLogistic { seed, flipped_index } => {
                problems::make_toy_logistic(*seed, *flipped_index)
            }
        }
    }
}

/// One run inside a spec.  `method` accepts the deterministic methods
/// (`GD`, `L0L1GD`, `GDPS`, `STM`, `STM_MAX`, `ADGD`, `ADGD_SC`) and the
/// stochastic ones (`L0L1SGD`, `SGDPS`).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub method: String,
    pub x0: Vec<f64>,
    #[serde(rename = "N")]
    pub iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicate_count: Option<usize>,
    /// Basename for this run's artifacts; defaults to `run{index}_{method}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Artifacts a spec can emit.
pub const EMIT_KINDS: [&str; 4] = ["traces", "bounds", "hess_grad", "plotdata"];

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub runs: Vec<RunSpec>,
    /// Output directory, resolved against the spec file's directory.
    pub outputs: String,
    #[serde(default = "default_emit")]
    pub emit: Vec<String>,
}

fn default_emit() -> Vec<String> {
    vec!["traces".into(), "bounds".into()]
}

/// Loads and validates a spec file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Error::Spec {
        pointer: "/".into(),
        msg: e.to_string(),
    })?;
    validate_spec(&spec)?;
    Ok(spec)
}

fn spec_err(pointer: String, msg: impl Into<String>) -> Error {
    Error::Spec { pointer, msg: msg.into() }
}

fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    if spec.runs.is_empty() {
        return Err(spec_err("/runs".into(), "at least one run is required"));
    }
    for kind in &spec.emit {
        if !EMIT_KINDS.contains(&kind.as_str()) {
            return Err(spec_err(
                "/emit".into(),
                format!("unknown artifact {kind:?}; expected one of {EMIT_KINDS:?}"),
            ));
        }
    }
    for (i, r) in spec.runs.iter().enumerate() {
        let at = |field: &str| format!("/runs/{i}/{field}");
        if parse_method(&r.method).is_none() {
            return Err(spec_err(at("method"), format!("unknown method {:?}", r.method)));
        }
        if r.x0.is_empty() {
            return Err(spec_err(at("x0"), "must be nonempty"));
        }
        if let Some(eta) = r.eta {
            if !(eta > 0.0) {
                return Err(spec_err(at("eta"), "must be positive"));
            }
        }
        if r.method == "GD" && r.eta.is_none() {
            return Err(spec_err(at("eta"), "GD has no default stepsize; set eta"));
        }
        if let Some(g) = r.gamma {
            if !(g > 0.0 && g <= 0.5) {
                return Err(spec_err(at("gamma"), "must lie in (0, 1/2]"));
            }
        }
        if let Some(l) = r.lambda0 {
            if !(l > 0.0) {
                return Err(spec_err(at("lambda0"), "must be positive"));
            }
        }
        if let Some(t) = r.grad_tol {
            if !(t >= 0.0) {
                return Err(spec_err(at("grad_tol"), "must be nonnegative"));
            }
        }
        if r.replicate_count == Some(0) {
            return Err(spec_err(at("replicate_count"), "must be positive"));
        }
    }
    Ok(())
}

enum AnyMethod {
    Det(Method),
    Stoch(StochasticMethod),
}

fn parse_method(name: &str) -> Option<AnyMethod> {
    Some(match name {
        "GD" => AnyMethod::Det(Method::Gd),
        "L0L1GD" => AnyMethod::Det(Method::L0L1Gd),
        "GDPS" => AnyMethod::Det(Method::GdPs),
        "STM" => AnyMethod::Det(Method::Stm),
        "STM_MAX" => AnyMethod::Det(Method::StmMax),
        "ADGD" => AnyMethod::Det(Method::Adgd),
        "ADGD_SC" => AnyMethod::Det(Method::AdgdSc),
        "L0L1SGD" => AnyMethod::Stoch(StochasticMethod::L0L1Sgd),
        "SGDPS" => AnyMethod::Stoch(StochasticMethod::SgdPs),
        _ => return None,
    })
}

fn run_name(i: usize, r: &RunSpec) -> String {
    r.name.clone().unwrap_or_else(|| format!("run{i:02}_{}", r.method))
}

/// Result of executing a spec.
pub struct ExecutionReport {
    /// `(run name, report)` for every evaluated bound and invariant.
    pub bounds: Vec<(String, BoundReport)>,
    /// `(run name, method name, objective series)` for deterministic runs.
    pub f_series: Vec<(String, String, Vec<f64>)>,
    pub f_star: Option<f64>,
    /// Files whose on-disk bytes differed from the recomputation (verify).
    pub mismatches: Vec<String>,
    pub warnings: Vec<String>,
}

impl ExecutionReport {
    /// True when every precondition-met bound is satisfied and no trace
    /// file mismatched.
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
            && self
                .bounds
                .iter()
                .all(|(_, b)| !b.precondition_met || b.satisfied)
    }
}

fn write_or_compare(
    path: &Path,
    content: &str,
    verify: bool,
    mismatches: &mut Vec<String>,
) -> Result<()> {
    if verify && path.exists() {
        let existing = std::fs::read(path)?;
        if existing != content.as_bytes() {
            mismatches.push(path.display().to_string());
        }
        return Ok(());
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Executes every run of a spec, emitting artifacts into its output
/// directory.  With `verify = true`, files that already exist are compared
/// byte-for-byte against the recomputation instead of overwritten.
pub fn execute_spec(spec: &ExperimentSpec, base_dir: &Path, verify: bool) -> Result<ExecutionReport> {
    let oracle = spec.problem.build(base_dir)?;
    let out_dir = base_dir.join(&spec.outputs);
    std::fs::create_dir_all(&out_dir)?;
    let nu = scalar::nu();
    let emit = |kind: &str| spec.emit.iter().any(|e| e == kind);

    let mut report = ExecutionReport {
        bounds: Vec::new(),
        f_series: Vec::new(),
        f_star: oracle.optimum().map(|(_, f)| f),
        mismatches: Vec::new(),
        warnings: Vec::new(),
    };

    for (i, r) in spec.runs.iter().enumerate() {
        let name = run_name(i, r);
        match parse_method(&r.method).expect("validated") {
            AnyMethod::Det(method) => {
                let mut cfg = RunConfig::new(method, r.x0.clone());
                if let Some(eta) = r.eta {
                    cfg.eta = eta;
                }
                if let Some(g) = r.gamma {
                    cfg.gamma = g;
                }
                if let Some(l) = r.lambda0 {
                    cfg.lambda0 = l;
                }
                if let Some(t) = r.grad_tol {
                    cfg.grad_tol = t;
                }
                cfg.iters = r.iters;
                let trace = optimizers::run(&oracle, &cfg)?;
                report
                    .warnings
                    .extend(trace.warnings.iter().map(|w| format!("{name}: {w}")));
                if emit("traces") {
                    let csv = optimizers::trace_to_csv(&trace);
                    write_or_compare(
                        &out_dir.join(format!("{name}.csv")),
                        &csv,
                        verify,
                        &mut report.mismatches,
                    )?;
                }
                for b in diagnostics::evaluate_run(&trace, &oracle, &cfg, nu)? {
                    report.bounds.push((name.clone(), b));
                }
                report.f_series.push((
                    name.clone(),
                    r.method.clone(),
                    trace.records.iter().map(|rec| rec.f).collect(),
                ));
            }
            AnyMethod::Stoch(method) => {
                let mut cfg = StochasticRunConfig::new(
                    method,
                    r.x0.clone(),
                    r.seed.unwrap_or(DEFAULT_SEED),
                );
                if let Some(eta) = r.eta {
                    cfg.eta = eta;
                }
                if let Some(c) = r.replicate_count {
                    cfg.replicate_count = c;
                }
                cfg.iters = r.iters;
                let p = oracle.smoothness().ok_or_else(|| {
                    Error::Config("stochastic runs need smoothness constants".into())
                })?;
                let ncomp = oracle.component_count().max(1);
                let cap = if p.l1 > 0.0 {
                    nu * p.l0 / (4.0 * ncomp as f64 * p.l1 * p.l1)
                } else {
                    f64::INFINITY
                };
                let summary = stochastic::expected_min_criterion(&oracle, &cfg, cap)?;
                if emit("traces") {
                    let csv = stochastic::summary_to_csv(&summary);
                    write_or_compare(
                        &out_dir.join(format!("{name}_summary.csv")),
                        &csv,
                        verify,
                        &mut report.mismatches,
                    )?;
                }
                if let Some((x_star, _)) = oracle.optimum() {
                    let r0 = scalar::dist(&r.x0, x_star);
                    report
                        .bounds
                        .push((name.clone(), diagnostics::bound_stochastic(&summary, &cfg, &p, nu, r0)));
                }
            }
        }
    }

    if emit("bounds") {
        let reports: Vec<BoundReport> = report
            .bounds
            .iter()
            .map(|(n, b)| BoundReport {
                name: format!("{n}/{}", b.name),
                ..b.clone()
            })
            .collect();
        write_or_compare(
            &out_dir.join("bounds.csv"),
            &diagnostics::bounds_to_csv(&reports),
            verify,
            &mut report.mismatches,
        )?;
    }

    if emit("plotdata") {
        let content = plotdata(&report.f_series, report.f_star);
        write_or_compare(
            &out_dir.join("plotdata.txt"),
            &content,
            verify,
            &mut report.mismatches,
        )?;
    }

    if emit("hess_grad") {
        let (samples_csv, envelope_csv) = hess_grad_artifacts(&oracle, &spec.runs);
        write_or_compare(
            &out_dir.join("hess_grad.csv"),
            &samples_csv,
            verify,
            &mut report.mismatches,
        )?;
        write_or_compare(
            &out_dir.join("envelope.csv"),
            &envelope_csv,
            verify,
            &mut report.mismatches,
        )?;
    }

    Ok(report)
}

/// Log-spaced iteration indices (all of them for short runs).
fn plot_indices(n: usize) -> Vec<usize> {
    if n <= 2048 {
        return (0..=n).collect();
    }
    let mut set = BTreeSet::new();
    set.insert(0);
    let ln_n = (n as f64).ln();
    for j in 0..=1023 {
        let k = (ln_n * j as f64 / 1023.0).exp().round() as usize;
        set.insert(k.min(n));
    }
    set.into_iter().collect()
}

/// Whitespace-separated plot table: `# k` plus one column per run (method
/// names), values `f − f*` when the optimum is known, `nan` past the end of
/// shorter runs.
pub fn plotdata(series: &[(String, String, Vec<f64>)], f_star: Option<f64>) -> String {
    let shift = f_star.unwrap_or(0.0);
    let max_n = series.iter().map(|(_, _, s)| s.len().saturating_sub(1)).max().unwrap_or(0);
    let mut out = String::from("# k");
    for (_, method, _) in series {
        out.push(' ');
        out.push_str(method);
    }
    out.push('\n');
    for k in plot_indices(max_n) {
        out.push_str(&k.to_string());
        for (_, _, s) in series {
            match s.get(k) {
                Some(v) => out.push_str(&format!(" {}", v - shift)),
                None => out.push_str(" nan"),
            }
        }
        out.push('\n');
    }
    out
}

/// Samples the gradient/Hessian-norm cloud at deterministic pseudo-random
/// points (ball radius twice the largest start) plus the starts themselves,
/// and fits the affine envelope.
fn hess_grad_artifacts(oracle: &Oracle, runs: &[RunSpec]) -> (String, String) {
    let d = oracle.dimension();
    let radius = runs
        .iter()
        .map(|r| scalar::norm(&r.x0))
        .fold(1.0_f64, f64::max)
        * 2.0;
    let mut points: Vec<Vec<f64>> = runs.iter().map(|r| r.x0.clone()).collect();
    for s in 0..128u64 {
        let key = mix64(0x48455353, s);
        let raw: Vec<f64> = (0..d).map(|j| 2.0 * uniform01(key, j as u64) - 1.0).collect();
        let scale = radius * uniform01(key, d as u64) / scalar::norm(&raw).max(1e-12);
        points.push(raw.iter().map(|t| t * scale).collect());
    }
    let (samples, _warnings) = verifier::sample_hess_vs_grad(oracle, &points);
    let samples_csv = verifier::samples_to_csv(&samples);
    let envelope_csv = match verifier::fit_l0_l1(&samples) {
        Ok((l0, l1)) => format!("L0,L1\n{l0},{l1}\n"),
        Err(e) => format!("L0,L1\n# fit failed: {e}\n"),
    };
    (samples_csv, envelope_csv)
}

// ---------------------------------------------------------------------------
// The qualitative comparison preset.
// ---------------------------------------------------------------------------

/// The built-in preset: six methods on `f(x) = x⁴` from three starts.
///
/// Budgets are artifact choices: `10⁵` iterations for starts 1 and 10,
/// `10⁶` for 100 (the far start needs the longer horizon before the
/// methods separate cleanly).
pub fn figure1_spec() -> ExperimentSpec {
    let half_nu = 0.5 * scalar::nu();
    let mut runs = Vec::new();
    for &x0 in &[1.0_f64, 10.0, 100.0] {
        let iters = if x0 >= 100.0 { 1_000_000 } else { 100_000 };
        let tag = x0 as u64;
        let mut push = |method: &str, eta: Option<f64>| {
            runs.push(RunSpec {
                method: method.into(),
                x0: vec![x0],
                iters,
                eta,
                gamma: None,
                lambda0: None,
                grad_tol: None,
                seed: None,
                replicate_count: None,
                name: Some(format!("trace_x0_{tag}_{method}")),
            });
        };
        // Plain GD uses 1/L with the curvature at the start, L = 12·x0².
        push("GD", Some(1.0 / (12.0 * x0 * x0)));
        push("L0L1GD", Some(half_nu));
        push("STM", Some(half_nu));
        push("STM_MAX", Some(half_nu));
        push("GDPS", None);
        push("ADGD", None);
    }
    ExperimentSpec {
        problem: ProblemSpec::PowerNorm { d: 1, n: 2 },
        runs,
        outputs: ".".into(),
        emit: vec!["traces".into()],
    }
}

/// Materializes the preset into `out_dir`: the spec itself
/// (`figure1.json`), one trace CSV per run, and one plot table per start.
pub fn figure1(out_dir: &Path) -> Result<ExecutionReport> {
    let spec = figure1_spec();
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("figure1.json"),
        serde_json::to_string_pretty(&spec)? + "\n",
    )?;
    let report = execute_spec(&spec, out_dir, false)?;
    for &x0 in &[1u64, 10, 100] {
        let prefix = format!("trace_x0_{x0}_");
        let group: Vec<(String, String, Vec<f64>)> = report
            .f_series
            .iter()
            .filter(|(name, _, _)| name.starts_with(&prefix))
            .cloned()
            .collect();
        let content = plotdata(&group, report.f_star);
        std::fs::write(out_dir.join(format!("plotdata_x0_{x0}.txt")), content)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Command-line entry point.
// ---------------------------------------------------------------------------

const USAGE: &str = "usage: gensmooth <command> [path]
commands:
  nu                 print the stepsize constant and its residual
  run <spec.json>    execute an experiment spec
  verify <spec.json> re-execute, compare existing traces, check bounds
  figure1 [outdir]   materialize the built-in comparison preset (default ./figure1)
  smoothness <spec.json>  sample the gradient/Hessian cloud and fit an envelope";

fn check_threads_env() -> Result<()> {
    // Execution is single-threaded; the variable is validated for
    // compatibility (0 means "auto").
    if let Ok(v) = std::env::var("GENSMOOTH_THREADS") {
        v.parse::<usize>()
            .map_err(|_| Error::Config(format!("GENSMOOTH_THREADS must be an integer, got {v:?}")))?;
    }
    Ok(())
}

fn print_bounds(report: &ExecutionReport) {
    for (run, b) in &report.bounds {
        let status = if !b.precondition_met {
            "conditional"
        } else if b.satisfied {
            "ok"
        } else {
            "FAIL"
        };
        println!(
            "{status:>11}  {run}/{}  lhs={:.6e} rhs={:.6e}",
            b.name, b.lhs, b.rhs
        );
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

/// Runs the CLI with pre-split arguments; returns the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    if let Err(e) = check_threads_env() {
        eprintln!("error: {e}");
        return 2;
    }
    let cmd = match args.first() {
        Some(c) => c.as_str(),
        None => {
            eprintln!("{USAGE}");
            return 2;
        }
    };
    let result = match (cmd, args.get(1)) {
        ("nu", _) => {
            let nu = scalar::solve_nu();
            println!("nu = {}", nu.value);
            println!("residual = {:e}", nu.residual);
            Ok(0)
        }
        ("run", Some(path)) => cmd_run(Path::new(path), false),
        ("verify", Some(path)) => cmd_run(Path::new(path), true),
        ("figure1", dir) => {
            let out = dir.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("figure1"));
            figure1(&out).map(|rep| {
                println!("wrote preset artifacts to {}", out.display());
                print_bounds(&rep);
                0
            })
        }
        ("smoothness", Some(path)) => cmd_smoothness(Path::new(path)),
        _ => {
            eprintln!("{USAGE}");
            return 2;
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Spec { .. } | Error::Config(_) | Error::Parse { .. }
                | Error::Io(_) | Error::Json(_) => 2,
                _ => 1,
            }
        }
    }
}

fn cmd_run(path: &Path, verify: bool) -> Result<i32> {
    let spec = load_spec(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let report = execute_spec(&spec, base, verify)?;
    print_bounds(&report);
    for m in &report.mismatches {
        eprintln!("trace mismatch: {m}");
    }
    if verify && !report.ok() {
        eprintln!("verification failed");
        return Ok(1);
    }
    println!("{}", if verify { "verification passed" } else { "run complete" });
    Ok(0)
}

fn cmd_smoothness(path: &Path) -> Result<i32> {
    let spec = load_spec(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let oracle = spec.problem.build(base)?;
    let out_dir = base.join(&spec.outputs);
    std::fs::create_dir_all(&out_dir)?;
    let (samples_csv, envelope_csv) = hess_grad_artifacts(&oracle, &spec.runs);
    std::fs::write(out_dir.join("hess_grad.csv"), &samples_csv)?;
    std::fs::write(out_dir.join("envelope.csv"), &envelope_csv)?;
    println!("{}", envelope_csv.trim_end());
    Ok(0)
}
