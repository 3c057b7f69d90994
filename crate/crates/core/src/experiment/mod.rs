//! Configuration-driven experiments producing per-trial records and a summary.

mod config;
mod report;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    bound, exact_wce_discretization, exact_wce_recovery, triangle_combination,
    wce_nullspace_component, BoundInputs, BoundReport, WceMethod, ETA,
};
use crate::concentration::{
    binomial_se, chernoff_summary, empirical_tail, normalized_spectral_bound, t_grid,
    unnormalized_check, within_slack, ChernoffReport, TailExperiment, TailPoint, UnnormalizedCheck,
};
use crate::density::{DensityKind, SamplingDensity};
use crate::error::{Error, Result};
use crate::kernel::SpectralKernelModel;
use crate::recovery::{assemble_design, gram_eig_check};

pub use config::{ConcentrationSpec, DensitySpec, ExperimentConfig, ExperimentKind, MRule};
pub use report::write_outputs;

/// Default working truncation for exact recovery errors.
pub const DEFAULT_RECOVERY_TRUNCATION: usize = 2048;

/// Default working truncation for exact discretization errors.
pub const DEFAULT_DISCRETIZATION_TRUNCATION: usize = 128;

/// One row of `trials.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub flagged: bool,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub value: Option<f64>,
    pub value_upper: Option<f64>,
    pub residual: Option<f64>,
    pub bound_name: String,
    pub bound_value: Option<f64>,
    pub violation: bool,
    pub nullspace: Option<f64>,
    /// Whether the nullspace part respects `2 M0^2 / n`; set only when `lambda_min >= 1/2`.
    pub nullspace_envelope_ok: Option<bool>,
}

impl TrialRecord {
    fn flagged(trial: u64, seed: u64, n: usize, m: usize, bound: &BoundReport) -> Self {
        Self {
            trial,
            seed,
            n,
            m,
            flagged: true,
            lambda_min: None,
            lambda_max: None,
            value: None,
            value_upper: None,
            residual: None,
            bound_name: bound.name.clone(),
            bound_value: Some(bound.value),
            violation: true,
            nullspace: None,
            nullspace_envelope_ok: None,
        }
    }
}

/// A named pass/fail check with the observed and allowed rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predicate {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub allowed: f64,
}

impl Predicate {
    /// Rate check with three binomial standard errors of slack around `p`.
    fn rate(name: &str, observed: f64, p: f64, trials: usize) -> Self {
        Self {
            name: name.to_string(),
            pass: within_slack(observed, p, trials),
            observed,
            allowed: p + 3.0 * binomial_se(p, trials),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub median_wce: f64,
    pub bound: f64,
    pub baseline: f64,
}

/// Log-log slopes against `n` of the root errors, i.e. half the slopes of the squared
/// quantities in `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub bound_name: String,
    pub wce_slope: f64,
    pub bound_slope: f64,
    pub baseline_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub version: String,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub trials: usize,
    pub records: usize,
    pub flagged: usize,
    pub max_value: Option<f64>,
    pub median_value: Option<f64>,
    pub violation_rate: f64,
    pub bounds: Vec<BoundReport>,
    pub predicates: Vec<Predicate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chernoff: Option<ChernoffReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unnormalized: Option<UnnormalizedCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
    pub tail_curve: Vec<TailPoint>,
    pub sweep_rows: Vec<SweepRow>,
}

impl ExperimentReport {
    /// True iff every acceptance predicate passes.
    pub fn passed(&self) -> bool {
        self.summary.predicates.iter().all(|p| p.pass)
    }
}

/// Run the experiment, using `config.threads` worker threads when given.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match config.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            pool.install(|| run_inner(config))
        }
        None => run_inner(config),
    }
}

struct Parts {
    records: Vec<TrialRecord>,
    bounds: Vec<BoundReport>,
    predicates: Vec<Predicate>,
    chernoff: Option<ChernoffReport>,
    unnormalized: Option<UnnormalizedCheck>,
    tail_curve: Vec<TailPoint>,
    sweep_rows: Vec<SweepRow>,
    sweep: Option<SweepSummary>,
}

impl Parts {
    fn new(records: Vec<TrialRecord>) -> Self {
        Self {
            records,
            bounds: Vec::new(),
            predicates: Vec::new(),
            chernoff: None,
            unnormalized: None,
            tail_curve: Vec::new(),
            sweep_rows: Vec::new(),
            sweep: None,
        }
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = config.kind()?;
    let model = config.kernel.build()?;
    let parts = match kind {
        ExperimentKind::Recover => run_recover(config, &model)?,
        ExperimentKind::Discretize => run_discretize(config, &model)?,
        ExperimentKind::EigCheck => run_eig_check(config, &model)?,
        ExperimentKind::Concentration => run_concentration(config)?,
        ExperimentKind::Sweep => run_sweep(config, &model)?,
    };
    let values: Vec<f64> = parts.records.iter().filter_map(|r| r.value_upper.or(r.value)).collect();
    let flagged = parts.records.iter().filter(|r| r.flagged).count();
    let violations = parts.records.iter().filter(|r| r.violation).count();
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.name().to_string(),
        seed: config.seed,
        config_hash: config.hash(),
        trials: config.trials,
        records: parts.records.len(),
        flagged,
        max_value: values.iter().copied().reduce(f64::max),
        median_value: median(&values),
        violation_rate: violations as f64 / parts.records.len().max(1) as f64,
        bounds: parts.bounds,
        predicates: parts.predicates,
        chernoff: parts.chernoff,
        unnormalized: parts.unnormalized,
        sweep: parts.sweep,
    };
    Ok(ExperimentReport {
        config: config.clone(),
        summary,
        records: parts.records,
        tail_curve: parts.tail_curve,
        sweep_rows: parts.sweep_rows,
    })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn sample_size(config: &ExperimentConfig) -> usize {
    config.n.expect("validated")
}

/// Bound checked by recovery trials under the given density.
pub fn recovery_bound_name(kind: DensityKind) -> &'static str {
    match kind {
        DensityKind::Nonsep => "nonsep-recovery",
        DensityKind::HeadTail => "recovery-tail-sum",
        _ => "recovery-tail-function",
    }
}

/// Working truncation for recovery at approximation index `m`.
pub fn recovery_truncation(model: &SpectralKernelModel, configured: Option<usize>, m: usize) -> usize {
    let n = configured.unwrap_or(DEFAULT_RECOVERY_TRUNCATION.max(16 * m));
    let n = match model.rank() {
        Some(rank) => n.min(rank.max(1)),
        None => n,
    };
    n.max(m.saturating_sub(1)).max(1)
}

/// Everything a single recovery trial needs.
pub struct RecoveryContext<'a> {
    pub model: &'a SpectralKernelModel,
    pub density: &'a SamplingDensity,
    pub n: usize,
    pub m: usize,
    pub truncation: usize,
    pub seed: u64,
    pub bound: &'a BoundReport,
}

impl RecoveryContext<'_> {
    /// Draw nodes on `stream`, recover, and compare the exact error against the bound.
    pub fn trial(&self, trial: u64, stream: u64) -> Result<TrialRecord> {
        match self.try_trial(trial, stream) {
            Err(e) if e.is_flaggable() => Ok(TrialRecord::flagged(trial, self.seed, self.n, self.m, self.bound)),
            other => other,
        }
    }

    fn try_trial(&self, trial: u64, stream: u64) -> Result<TrialRecord> {
        let nodes = self.density.draw_nodes_on_stream(self.n, self.seed, stream)?;
        let ds = assemble_design(self.model, &nodes, self.m)?;
        let wce = exact_wce_recovery(self.model, &ds, self.truncation, WceMethod::Auto)?;
        let atom = self.model.atom_mass();
        let (value, upper, nullspace, envelope_ok) = if atom > 0.0 {
            let comp = wce_nullspace_component(atom, &ds)?;
            (
                triangle_combination(comp.value, wce.value),
                triangle_combination(comp.value, wce.upper),
                Some(comp.value),
                comp.envelope_applies().then(|| comp.within_envelope()),
            )
        } else {
            (wce.value, wce.upper, None, None)
        };
        Ok(TrialRecord {
            trial,
            seed: self.seed,
            n: self.n,
            m: self.m,
            flagged: false,
            lambda_min: Some(ds.lambda_min),
            lambda_max: Some(ds.lambda_max),
            value: Some(value),
            value_upper: Some(upper),
            residual: Some(upper - value),
            bound_name: self.bound.name.clone(),
            bound_value: Some(self.bound.value),
            violation: upper > self.bound.value,
            nullspace,
            nullspace_envelope_ok: envelope_ok,
        })
    }
}

fn run_recover(config: &ExperimentConfig, model: &SpectralKernelModel) -> Result<Parts> {
    let n = sample_size(config);
    let m = config.m_rule.resolve(model, n, config.r)?;
    if m < 2 {
        return Err(Error::config("m_rule", format!("rule yields m = {m} < 2 at n = {n}")));
    }
    let density = SamplingDensity::new(model, config.density.kind, Some(m))?;
    let inputs = BoundInputs::from_model(model, n, m, config.r);
    let report = bound(recovery_bound_name(config.density.kind), &inputs)?;
    let ctx = RecoveryContext {
        model,
        density: &density,
        n,
        m,
        truncation: recovery_truncation(model, config.truncation, m),
        seed: config.seed,
        bound: &report,
    };
    let records: Vec<TrialRecord> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| ctx.trial(t, t))
        .collect::<Result<_>>()?;
    let trials = records.len();
    let violations = records.iter().filter(|r| r.violation).count();
    let p = ETA * (n as f64).powf(1.0 - config.r);
    let mut parts = Parts::new(records);
    parts.predicates.push(Predicate::rate(
        "bound-violation-rate",
        violations as f64 / trials as f64,
        p.min(1.0),
        trials,
    ));
    if model.atom_mass() > 0.0 {
        let breaches = parts
            .records
            .iter()
            .filter(|r| r.nullspace_envelope_ok == Some(false))
            .count();
        parts.predicates.push(Predicate {
            name: "nullspace-envelope".into(),
            pass: breaches == 0,
            observed: breaches as f64,
            allowed: 0.0,
        });
    }
    parts.bounds.push(report);
    for extra in ["recovery-tail-function", "recovery-tail-sum", "recovery-half-tail", "nonsep-recovery"] {
        if extra != parts.bounds[0].name {
            parts.bounds.push(bound(extra, &inputs)?);
        }
    }
    Ok(parts)
}

fn run_discretize(config: &ExperimentConfig, model: &SpectralKernelModel) -> Result<Parts> {
    let n = sample_size(config);
    let (bound_name, weighted) = match config.density.kind {
        DensityKind::Plain => ("discretization-bounded", false),
        DensityKind::TraceNormalized => ("discretization-weighted", true),
        other => {
            return Err(Error::config(
                "density.kind",
                format!("discretization uses plain or trace-normalized densities, got {other:?}"),
            ))
        }
    };
    let density = SamplingDensity::new(model, config.density.kind, None)?;
    let inputs = BoundInputs::from_model(model, n, 0, config.r);
    let report = bound(bound_name, &inputs)?;
    let truncation = match model.rank() {
        Some(rank) => config.truncation.unwrap_or(rank).min(rank).max(1),
        None => config.truncation.unwrap_or(DEFAULT_DISCRETIZATION_TRUNCATION),
    };
    let records: Vec<TrialRecord> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<TrialRecord> {
            let nodes = density.draw_nodes_on_stream(n, config.seed, t)?;
            let wsq: Option<Vec<f64>> = weighted.then(|| nodes.density.iter().map(|r| 1.0 / r).collect());
            let out = exact_wce_discretization(model, &nodes.nodes, wsq.as_deref(), truncation)?;
            Ok(TrialRecord {
                trial: t,
                seed: config.seed,
                n,
                m: 0,
                flagged: false,
                lambda_min: None,
                lambda_max: None,
                value: Some(out.value),
                value_upper: Some(out.upper),
                residual: Some(out.residual),
                bound_name: report.name.clone(),
                bound_value: Some(report.value),
                violation: out.upper > report.value,
                nullspace: None,
                nullspace_envelope_ok: None,
            })
        })
        .collect::<Result<_>>()?;
    let trials = records.len();
    let violations = records.iter().filter(|r| r.violation).count();
    let p = (2.0 * (n as f64).powf(1.0 - config.r)).min(1.0);
    let mut parts = Parts::new(records);
    parts.predicates.push(Predicate::rate(
        "bound-violation-rate",
        violations as f64 / trials as f64,
        p,
        trials,
    ));
    parts.bounds.push(report);
    let simple = if weighted {
        "discretization-trace-simple"
    } else {
        "discretization-bounded-simple"
    };
    parts.bounds.push(bound(simple, &inputs)?);
    Ok(parts)
}

fn run_eig_check(config: &ExperimentConfig, model: &SpectralKernelModel) -> Result<Parts> {
    let n = sample_size(config);
    let m = config.m_rule.resolve(model, n, config.r)?;
    if m < 2 {
        return Err(Error::config("m_rule", format!("rule yields m = {m} < 2 at n = {n}")));
    }
    let density = SamplingDensity::new(model, config.density.kind, Some(m))?;
    let label = BoundReport {
        name: "lambda-min-half".into(),
        inputs: BoundInputs::from_model(model, n, m, config.r),
        value: 0.5,
        constants: Default::default(),
        argmin: None,
    };
    let rows: Vec<(TrialRecord, bool)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(TrialRecord, bool)> {
            let nodes = match density.draw_nodes_on_stream(n, config.seed, t) {
                Ok(nodes) => nodes,
                Err(e) if e.is_flaggable() => return Ok((TrialRecord::flagged(t, config.seed, n, m, &label), false)),
                Err(e) => return Err(e),
            };
            let ds = match assemble_design(model, &nodes, m) {
                Ok(ds) => ds,
                Err(e) if e.is_flaggable() => return Ok((TrialRecord::flagged(t, config.seed, n, m, &label), false)),
                Err(e) => return Err(e),
            };
            let check = gram_eig_check(&ds);
            let flagged = !ds.is_full_rank();
            let record = TrialRecord {
                trial: t,
                seed: config.seed,
                n,
                m,
                flagged,
                lambda_min: Some(ds.lambda_min),
                lambda_max: Some(ds.lambda_max),
                value: Some(check.pseudo_inverse_norm),
                value_upper: None,
                residual: None,
                bound_name: label.name.clone(),
                bound_value: Some(0.5),
                violation: flagged || !check.lambda_ok,
                nullspace: None,
                nullspace_envelope_ok: None,
            };
            Ok((record, !flagged && check.norm_ok))
        })
        .collect::<Result<_>>()?;
    let trials = rows.len();
    let lambda_fail = rows.iter().filter(|(r, _)| r.violation).count();
    let window_fail = rows.iter().filter(|(_, ok)| !ok).count();
    let nf = n as f64;
    let p = nf.powf(1.0 - config.r);
    let outcomes: Vec<Option<(f64, f64)>> = rows
        .iter()
        .map(|(r, _)| match (r.flagged, r.lambda_min, r.lambda_max) {
            (false, Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        })
        .collect();
    let spectral = normalized_spectral_bound(model, &density, m)?;
    let chernoff = chernoff_summary(&outcomes, n, m, config.chernoff_t, spectral);
    let mut parts = Parts::new(rows.into_iter().map(|(r, _)| r).collect());
    if model.spectral_function(m)? <= nf / (7.0 * config.r * nf.ln()) {
        parts.predicates.push(Predicate::rate(
            "lambda-min-rate",
            lambda_fail as f64 / trials as f64,
            p.min(1.0),
            trials,
        ));
    }
    if model.spectral_function(m)? <= nf / (10.0 * config.r * nf.ln()) {
        parts.predicates.push(Predicate::rate(
            "norm-window-rate",
            window_fail as f64 / trials as f64,
            (2.0 * p).min(1.0),
            trials,
        ));
    }
    parts.predicates.push(Predicate {
        name: "chernoff-lower-tail".into(),
        pass: chernoff.lower_pass,
        observed: chernoff.lower_rate,
        allowed: chernoff.lower_envelope + 3.0 * binomial_se(chernoff.lower_envelope, trials),
    });
    parts.predicates.push(Predicate {
        name: "chernoff-upper-tail".into(),
        pass: chernoff.upper_pass,
        observed: chernoff.upper_rate,
        allowed: chernoff.upper_envelope + 3.0 * binomial_se(chernoff.upper_envelope, trials),
    });
    parts.chernoff = Some(chernoff);
    Ok(parts)
}

fn run_concentration(config: &ExperimentConfig) -> Result<Parts> {
    let spec: &ConcentrationSpec = config.concentration.as_ref().expect("validated");
    let n = sample_size(config);
    let mut exp = TailExperiment::with_exact_bound(spec.family.clone(), n, config.trials, config.seed)?;
    if let Some(m) = spec.m_bound {
        exp.m_bound = m;
    }
    let deviations = exp.run()?;
    let grid = t_grid(&exp, spec.t_points);
    let tail: Vec<TailPoint> = grid.iter().map(|&t| empirical_tail(&exp, &deviations, t)).collect();
    let unnormalized = unnormalized_check(&exp, &deviations, config.r)?;
    let label = "tail-envelope".to_string();
    let records = deviations
        .iter()
        .enumerate()
        .map(|(t, &d)| TrialRecord {
            trial: t as u64,
            seed: config.seed,
            n,
            m: 0,
            flagged: false,
            lambda_min: None,
            lambda_max: None,
            value: Some(d),
            value_upper: None,
            residual: None,
            bound_name: label.clone(),
            bound_value: None,
            violation: false,
            nullspace: None,
            nullspace_envelope_ok: None,
        })
        .collect();
    let mut parts = Parts::new(records);
    let failing = tail.iter().filter(|p| !p.pass).count();
    parts.predicates.push(Predicate {
        name: "tail-envelope".into(),
        pass: failing == 0,
        observed: failing as f64,
        allowed: 0.0,
    });
    parts.predicates.push(Predicate {
        name: "unnormalized-event".into(),
        pass: unnormalized.pass,
        observed: unnormalized.rate,
        allowed: unnormalized.bound + 3.0 * binomial_se(unnormalized.bound, config.trials),
    });
    parts.tail_curve = tail;
    parts.unnormalized = Some(unnormalized);
    Ok(parts)
}

/// Bound and baseline values for a sweep grid without running trials.
pub fn sweep_bounds(
    model: &SpectralKernelModel,
    grid: &[usize],
    r: f64,
    rule: &MRule,
    bound_name: &str,
) -> Result<Vec<(usize, usize, f64, f64)>> {
    grid.iter()
        .map(|&n| {
            let m = rule.resolve(model, n, r)?;
            let inputs = BoundInputs::from_model(model, n, m.max(1), r);
            Ok((
                n,
                m,
                bound(bound_name, &inputs)?.value,
                bound("trace-baseline", &inputs)?.value,
            ))
        })
        .collect()
}

fn run_sweep(config: &ExperimentConfig, model: &SpectralKernelModel) -> Result<Parts> {
    let grid = config.n_grid.as_ref().expect("validated");
    let bound_name = recovery_bound_name(config.density.kind);
    let table = sweep_bounds(model, grid, config.r, &config.m_rule, bound_name)?;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut predicates = Vec::new();
    for (g, &(n, m, bound_value, baseline)) in table.iter().enumerate() {
        let inputs = BoundInputs::from_model(model, n, m.max(1), config.r);
        let report = bound(bound_name, &inputs)?;
        let chunk: Vec<TrialRecord> = if m < 2 {
            // Empty approximation space: the error is ||Id||^2 for every node set.
            (0..config.trials as u64)
                .map(|t| TrialRecord {
                    trial: t,
                    seed: config.seed,
                    n,
                    m,
                    flagged: false,
                    lambda_min: None,
                    lambda_max: None,
                    value: Some(model.eigenvalue(1)),
                    value_upper: Some(model.eigenvalue(1)),
                    residual: Some(0.0),
                    bound_name: report.name.clone(),
                    bound_value: Some(bound_value),
                    violation: model.eigenvalue(1) > bound_value,
                    nullspace: None,
                    nullspace_envelope_ok: None,
                })
                .collect()
        } else {
            let density = SamplingDensity::new(model, config.density.kind, Some(m))?;
            let ctx = RecoveryContext {
                model,
                density: &density,
                n,
                m,
                truncation: recovery_truncation(model, config.truncation, m),
                seed: config.seed,
                bound: &report,
            };
            (0..config.trials as u64)
                .into_par_iter()
                .map(|t| ctx.trial(t, ((g as u64) << 32) | t))
                .collect::<Result<_>>()?
        };
        let uppers: Vec<f64> = chunk.iter().filter_map(|r| r.value_upper).collect();
        let violations = chunk.iter().filter(|r| r.violation).count();
        predicates.push(Predicate::rate(
            &format!("bound-violation-rate[n={n}]"),
            violations as f64 / chunk.len() as f64,
            (ETA * (n as f64).powf(1.0 - config.r)).min(1.0),
            chunk.len(),
        ));
        rows.push(SweepRow {
            n,
            m,
            median_wce: median(&uppers).unwrap_or(f64::NAN),
            bound: bound_value,
            baseline,
        });
        records.extend(chunk);
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let pick = |f: fn(&SweepRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let sweep = SweepSummary {
        bound_name: bound_name.to_string(),
        wce_slope: 0.5 * log_log_slope(&ns, &pick(|r| r.median_wce)),
        bound_slope: 0.5 * log_log_slope(&ns, &pick(|r| r.bound)),
        baseline_slope: 0.5 * log_log_slope(&ns, &pick(|r| r.baseline)),
    };
    let mut parts = Parts::new(records);
    parts.predicates = predicates;
    parts.sweep_rows = rows;
    parts.sweep = Some(sweep);
    Ok(parts)
}
