//! Closed-form upper bounds for recovery and discretization errors.
//!
//! All logarithms are natural.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{EigenRule, SpectralKernelModel};

/// Golden ratio, `(1 + sqrt 5) / 2`.
pub const KAPPA: f64 = 1.618_033_988_749_895;

/// Failure-probability constant `2^(3/4) + 1`.
pub const ETA: f64 = 2.681_792_830_507_429;

/// Every bound the analyzer knows, by name.
pub const BOUND_NAMES: [&str; 11] = [
    "recovery-tail-function",
    "recovery-tail-sum",
    "recovery-half-tail",
    "nonsep-intermediate",
    "nonsep-recovery",
    "discretization-bounded",
    "discretization-weighted",
    "discretization-bounded-simple",
    "discretization-trace-simple",
    "trace-baseline",
    "choice-m",
];

/// Inputs to the bound formulas; missing entries are reported per bound.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub m: usize,
    pub r: f64,
    /// `sigma_m^2`.
    pub sigma_m_sq: Option<f64>,
    /// `T(m)`.
    pub tail_function: Option<f64>,
    /// `sum_{j >= m} sigma_j^2`.
    pub tail_sum: Option<f64>,
    /// `sum_{j >= floor(m/2)} sigma_j^2`, starting at 1 when `m < 2`.
    pub half_tail_sum: Option<f64>,
    pub trace: Option<f64>,
    pub trace0: Option<f64>,
    /// `M0^2`, the sup of the atom diagonal.
    pub atom_sup: Option<f64>,
    /// `||Id||^2 = sigma_1^2`.
    pub embedding_norm_sq: Option<f64>,
    /// `||K||_inf^2 = sup_x K(x, x)`.
    pub sup_kernel: Option<f64>,
    /// Eigenvalue rule for scans over the index.
    pub eigenvalues: Option<EigenRule>,
}

impl BoundInputs {
    pub fn from_model(model: &SpectralKernelModel, n: usize, m: usize, r: f64) -> Self {
        let (tr, tr0) = model.traces();
        Self {
            n,
            m,
            r,
            sigma_m_sq: Some(model.eigenvalue(m.max(1))),
            tail_function: Some(model.tail_function(m)),
            tail_sum: Some(model.tail_sum(m)),
            half_tail_sum: Some(model.tail_sum((m / 2).max(1))),
            trace: Some(tr),
            trace0: Some(tr0),
            atom_sup: Some(tr0),
            embedding_norm_sq: Some(model.eigenvalue(1)),
            sup_kernel: Some(model.sup_diag()),
            eigenvalues: Some(model.rule().clone()),
        }
    }

    fn log_ratio(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "bounds need n >= 2, got {}",
                self.n
            )));
        }
        let n = self.n as f64;
        Ok(n.ln() / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BoundInputs,
    pub value: f64,
    pub constants: BTreeMap<String, f64>,
    /// Minimizing index for scan-type bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<usize>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingInput(name))
}

/// Evaluate the named bound.
pub fn bound(name: &str, inputs: &BoundInputs) -> Result<BoundReport> {
    let mut constants = BTreeMap::new();
    let mut c = |k: &str, v: f64| {
        constants.insert(k.to_string(), v);
        v
    };
    let r = inputs.r;
    let n = inputs.n as f64;
    let mut argmin = None;
    let value = match name {
        "recovery-tail-function" => {
            let lr = inputs.log_ratio()?;
            let k2 = c("kappa", KAPPA).powi(2);
            c("5", 5.0)
                * need(inputs.sigma_m_sq, "sigma_m_sq")?.max(
                    c("8", 8.0) * r * lr * need(inputs.tail_function, "tail_function")? * k2,
                )
        }
        "recovery-tail-sum" => {
            let lr = inputs.log_ratio()?;
            let k2 = c("kappa", KAPPA).powi(2);
            c("5", 5.0)
                * need(inputs.sigma_m_sq, "sigma_m_sq")?
                    .max(c("16", 16.0) * r * k2 * lr * need(inputs.tail_sum, "tail_sum")?)
        }
        "recovery-half-tail" => {
            if inputs.m == 0 {
                return Err(Error::InvalidIndex("m must be positive".into()));
            }
            c("15", 15.0) / inputs.m as f64 * need(inputs.half_tail_sum, "half_tail_sum")?
        }
        "nonsep-intermediate" => {
            let lr = inputs.log_ratio()?;
            let k2 = c("kappa", KAPPA).powi(2);
            let eight = c("8", 8.0);
            c("7", 7.0)
                * need(inputs.sigma_m_sq, "sigma_m_sq")?
                    .max(eight * r * lr * need(inputs.tail_function, "tail_function")? * k2)
                    .max(eight * need(inputs.atom_sup, "atom_sup")? * k2 / n)
        }
        "nonsep-recovery" => {
            let lr = inputs.log_ratio()?;
            c("441", 441.0)
                * need(inputs.sigma_m_sq, "sigma_m_sq")?
                    .max(r * lr * need(inputs.tail_sum, "tail_sum")?)
                    .max(need(inputs.trace0, "trace0")? / n)
        }
        "discretization-bounded" => {
            let lr = inputs.log_ratio()?;
            need(inputs.embedding_norm_sq, "embedding_norm_sq")?.sqrt()
                * need(inputs.sup_kernel, "sup_kernel")?.sqrt()
                * (c("21", 21.0) * r * lr).sqrt()
        }
        "discretization-weighted" => {
            let lr = inputs.log_ratio()?;
            (c("21", 21.0)
                * need(inputs.trace, "trace")?
                * need(inputs.embedding_norm_sq, "embedding_norm_sq")?
                * r
                * lr)
                .sqrt()
        }
        "discretization-bounded-simple" => {
            let lr = inputs.log_ratio()?;
            c("8", 8.0) * (r * lr).sqrt() * need(inputs.sup_kernel, "sup_kernel")?
        }
        "discretization-trace-simple" => {
            let lr = inputs.log_ratio()?;
            c("8", 8.0) * need(inputs.trace, "trace")? * (r * lr).sqrt()
        }
        "trace-baseline" => {
            let rule = inputs.eigenvalues.as_ref().ok_or(Error::MissingInput("eigenvalues"))?;
            let tr = need(inputs.trace, "trace")?;
            let (l, v) = baseline_scan(rule, tr, inputs.n);
            argmin = Some(l);
            v
        }
        "choice-m" => choose_m(inputs.n, r)? as f64,
        other => return Err(Error::UnknownBound(other.to_string())),
    };
    Ok(BoundReport {
        name: name.to_string(),
        inputs: inputs.clone(),
        value,
        constants,
        argmin,
    })
}

/// `min_l (sigma_l^2 + tr * l / n)`, returning the minimizer and the minimum.
pub fn baseline_scan(rule: &EigenRule, trace: f64, n: usize) -> (usize, f64) {
    let n = n as f64;
    let mut best = (1, rule.value(1) + trace / n);
    let mut l = 2usize;
    // The penalty alone exceeds the current best from here on.
    while trace * l as f64 / n < best.1 {
        let v = rule.value(l) + trace * l as f64 / n;
        if v < best.1 {
            best = (l, v);
        }
        l += 1;
    }
    best
}

/// `m = floor(n / (14 r log n))`.
pub fn choose_m(n: usize, r: f64) -> Result<usize> {
    if n < 2 || r <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "choice of m needs n >= 2 and r > 0, got n = {n}, r = {r}"
        )));
    }
    let n = n as f64;
    Ok((n / (14.0 * r * n.ln())).floor() as usize)
}

/// Largest `m >= 2` with `N(m) <= n / (c r log n)`, or `None` if even `m = 2` fails.
pub fn max_m_under_spectral(
    model: &SpectralKernelModel,
    n: usize,
    r: f64,
    c: f64,
) -> Result<Option<usize>> {
    let nf = n as f64;
    let budget = nf / (c * r * nf.ln());
    let mut best = None;
    let mut m = 2usize;
    while model.spectral_function(m)? <= budget {
        best = Some(m);
        m += 1;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Basis;

    #[test]
    fn constants() {
        assert!((KAPPA - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((KAPPA * KAPPA - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((ETA - (2f64.powf(0.75) + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn choice_of_m() {
        assert_eq!(choose_m(1000, 2.0).unwrap(), 5);
    }

    #[test]
    fn tail_function_bound_example() {
        let inputs = BoundInputs {
            n: 1000,
            m: 5,
            r: 2.0,
            sigma_m_sq: Some(0.01),
            tail_function: Some(0.5),
            ..Default::default()
        };
        let report = bound("recovery-tail-function", &inputs).unwrap();
        // Independent evaluation: 5 * 8 * 2 * ln(1000) * 0.5 * (3 + sqrt 5) / 2 / 1000.
        assert!((report.value - 0.723_389_524_253_669_9).abs() < 1e-12);
        assert!((report.value - 0.7235).abs() < 2e-4);
        assert!(matches!(bound("nope", &inputs), Err(Error::UnknownBound(_))));
        assert!(matches!(
            bound("recovery-tail-sum", &inputs),
            Err(Error::MissingInput("tail_sum"))
        ));
    }

    #[test]
    fn every_named_bound_evaluates() {
        let model =
            SpectralKernelModel::new(Basis::Fourier, EigenRule::Polynomial { s: 1.0 }, 0.3).unwrap();
        let inputs = BoundInputs::from_model(&model, 4096, 8, 2.0);
        for name in BOUND_NAMES {
            let report = bound(name, &inputs).unwrap();
            assert!(report.value >= 0.0 && report.value.is_finite(), "{name}");
        }
    }

    #[test]
    fn spectral_budget() {
        let model =
            SpectralKernelModel::new(Basis::Cosine, EigenRule::Sobolev { s: 1.0 }, 0.0).unwrap();
        assert_eq!(max_m_under_spectral(&model, 2000, 2.0, 7.0).unwrap(), Some(10));
        assert_eq!(max_m_under_spectral(&model, 2000, 2.0, 10.0).unwrap(), Some(8));
        assert_eq!(max_m_under_spectral(&model, 10, 2.0, 10.0).unwrap(), None);
    }
}
