//! Monte Carlo validation of spectral-norm concentration for sums of random rank-one
//! operators: the exponential tail envelope, its un-normalized variant, and the
//! matrix-Chernoff eigenvalue tails of the Gram matrix.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::KAPPA;
use crate::density::SamplingDensity;
use crate::error::{Error, Result};
use crate::kernel::{BasisStream, KernelSpec, SpectralKernelModel};
use crate::linalg::{hermitian_eigenvalues, hermitize, CMatrix};
use crate::recovery::assemble_design;
use crate::rng::{trial_rng, TrialRng};

/// Two-sided 99% normal quantile used for Wilson intervals.
pub const Z99: f64 = 2.575_829_303_548_901;

/// `2^(3/4)`.
pub const TAIL_PREFACTOR: f64 = 1.681_792_830_507_429;

/// Distribution of the random vectors `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum VectorFamily {
    /// `y = scale * (e_k(x))_{k <= truncation}` with `x` uniform on the domain.
    Kernel {
        kernel: KernelSpec,
        truncation: usize,
        scale: f64,
    },
    /// Uniform on the real sphere of the given radius in `dim` dimensions.
    Sphere { dim: usize, radius: f64 },
    /// `radius * e_1` or `radius * e_2` with probability one half each.
    TwoPoint { radius: f64 },
    /// Always `radius * e_1`.
    Constant { radius: f64 },
}

#[derive(Debug, Clone)]
enum Sampler {
    Kernel {
        model: SpectralKernelModel,
        truncation: usize,
        scale: f64,
    },
    Sphere { dim: usize, radius: f64 },
    TwoPoint { radius: f64 },
    Constant { radius: f64 },
}

impl VectorFamily {
    fn sampler(&self) -> Result<Sampler> {
        Ok(match self {
            VectorFamily::Kernel {
                kernel,
                truncation,
                scale,
            } => {
                if *truncation == 0 {
                    return Err(Error::InvalidIndex("vector truncation must be positive".into()));
                }
                Sampler::Kernel {
                    model: kernel.build()?,
                    truncation: *truncation,
                    scale: *scale,
                }
            }
            VectorFamily::Sphere { dim, radius } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("sphere dimension must be positive".into()));
                }
                Sampler::Sphere {
                    dim: *dim,
                    radius: *radius,
                }
            }
            VectorFamily::TwoPoint { radius } => Sampler::TwoPoint { radius: *radius },
            VectorFamily::Constant { radius } => Sampler::Constant { radius: *radius },
        })
    }
}

impl Sampler {
    fn dim(&self) -> usize {
        match self {
            Sampler::Kernel { truncation, .. } => *truncation,
            Sampler::Sphere { dim, .. } => *dim,
            Sampler::TwoPoint { .. } => 2,
            Sampler::Constant { .. } => 1,
        }
    }

    /// Diagonal of the expectation operator `E y y*`.
    fn expectation(&self) -> Vec<f64> {
        match self {
            Sampler::Kernel {
                model,
                truncation,
                scale,
            } => (1..=*truncation)
                .map(|k| scale * scale * model.eigenvalue(k))
                .collect(),
            Sampler::Sphere { dim, radius } => vec![radius * radius / *dim as f64; *dim],
            Sampler::TwoPoint { radius } => vec![0.5 * radius * radius; 2],
            Sampler::Constant { radius } => vec![radius * radius],
        }
    }

    /// `sup ||y||`.
    fn sup_norm(&self) -> f64 {
        match self {
            Sampler::Kernel {
                model,
                truncation,
                scale,
            } => scale * (model.tail_function(1) - model.tail_function(truncation + 1)).max(0.0).sqrt(),
            Sampler::Sphere { radius, .. }
            | Sampler::TwoPoint { radius }
            | Sampler::Constant { radius } => radius.abs(),
        }
    }

    /// Fill the `n x dim` matrix of draws.
    fn draw(&self, n: usize, rng: &mut TrialRng) -> CMatrix {
        let dim = self.dim();
        let mut y = CMatrix::zeros(n, dim);
        match self {
            Sampler::Kernel {
                model,
                truncation,
                scale,
            } => {
                let domain = model.domain();
                let xs: Vec<f64> = (0..n)
                    .map(|_| match domain {
                        crate::kernel::Domain::Torus => rng.random::<f64>(),
                        crate::kernel::Domain::UnitInterval => rng.random_range(0.0..=1.0),
                    })
                    .collect();
                let mut stream = BasisStream::new(model.basis(), &xs);
                for k in 0..*truncation {
                    let s = scale * model.sigma(k + 1);
                    for (i, v) in stream.advance().iter().enumerate() {
                        y[(i, k)] = v * s;
                    }
                }
            }
            Sampler::Sphere { dim, radius } => {
                for i in 0..n {
                    let g: Vec<f64> = (0..*dim).map(|_| standard_normal(rng)).collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for (k, v) in g.iter().enumerate() {
                        y[(i, k)] = Complex64::new(radius * v / norm, 0.0);
                    }
                }
            }
            Sampler::TwoPoint { radius } => {
                for i in 0..n {
                    let k = usize::from(rng.random::<bool>());
                    y[(i, k)] = Complex64::new(*radius, 0.0);
                }
            }
            Sampler::Constant { radius } => {
                for i in 0..n {
                    y[(i, 0)] = Complex64::new(*radius, 0.0);
                }
            }
        }
        y
    }
}

fn standard_normal(rng: &mut TrialRng) -> f64 {
    // Box-Muller; the second variate is discarded to keep draws stream-aligned.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `n` i.i.d. vectors bounded by `m_bound`, repeated for `trials` seeded trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailExperiment {
    pub family: VectorFamily,
    /// The almost-sure bound `M` used in the envelope.
    pub m_bound: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl TailExperiment {
    /// Bound `M` equal to the family's exact supremum.
    pub fn with_exact_bound(family: VectorFamily, n: usize, trials: usize, seed: u64) -> Result<Self> {
        let m_bound = family.sampler()?.sup_norm();
        Ok(Self {
            family,
            m_bound,
            n,
            trials,
            seed,
        })
    }

    /// Diagonal of `Lambda = E y y*`.
    pub fn expectation(&self) -> Result<Vec<f64>> {
        Ok(self.family.sampler()?.expectation())
    }

    pub fn expectation_norm(&self) -> Result<f64> {
        Ok(self.expectation()?.into_iter().fold(0.0, f64::max))
    }

    /// One realization of `||(1/n) sum y y* - Lambda||` on stream `trial`.
    pub fn deviation_trial(&self, trial: u64) -> Result<f64> {
        let sampler = self.family.sampler()?;
        self.deviation_with(&sampler, trial)
    }

    fn deviation_with(&self, sampler: &Sampler, trial: u64) -> Result<f64> {
        let mut rng = trial_rng(self.seed, trial);
        let y = sampler.draw(self.n, &mut rng);
        let limit = self.m_bound * (1.0 + 1e-12);
        for i in 0..self.n {
            let norm = y.row(i).norm();
            if norm > limit {
                return Err(Error::Precondition(format!(
                    "vector norm {norm} exceeds the declared bound M = {}",
                    self.m_bound
                )));
            }
        }
        let dim = sampler.dim();
        let mut dev = y.ad_mul(&y) / Complex64::new(self.n as f64, 0.0);
        for (k, l) in sampler.expectation().iter().enumerate() {
            dev[(k, k)] -= *l;
        }
        let ev = hermitian_eigenvalues(hermitize(dev));
        Ok(if dim == 0 {
            0.0
        } else {
            ev[0].abs().max(ev[ev.len() - 1].abs())
        })
    }

    /// Deviations for all trials, in trial order.
    pub fn run(&self) -> Result<Vec<f64>> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter("n and trials must be positive".into()));
        }
        let sampler = self.family.sampler()?;
        (0..self.trials as u64)
            .into_par_iter()
            .map(|t| self.deviation_with(&sampler, t))
            .collect()
    }

    /// `min(1, 2^(3/4) n exp(-t^2 n / (21 M^2)))`.
    pub fn envelope(&self, t: f64) -> f64 {
        tail_envelope(t, self.n, self.m_bound)
    }

    /// Smallest `t` at which the envelope drops below one.
    pub fn envelope_threshold(&self) -> f64 {
        let n = self.n as f64;
        (21.0 * self.m_bound.powi(2) * (TAIL_PREFACTOR * n).ln() / n).sqrt()
    }
}

pub fn tail_envelope(t: f64, n: usize, m_bound: f64) -> f64 {
    let n = n as f64;
    (TAIL_PREFACTOR * n * (-t * t * n / (21.0 * m_bound * m_bound)).exp()).min(1.0)
}

/// Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Binomial standard error at the theoretical probability `p`.
pub fn binomial_se(p: f64, trials: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// One-sided check: empirical rate at most `p + 3 SE(p)`.
pub fn within_slack(rate: f64, p: f64, trials: usize) -> bool {
    rate <= p + 3.0 * binomial_se(p, trials)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub empirical_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub theoretical_bound: f64,
    pub pass: bool,
}

/// Fraction of deviations at least `t`, compared against the envelope.
pub fn empirical_tail(exp: &TailExperiment, deviations: &[f64], t: f64) -> TailPoint {
    let hits = deviations.iter().filter(|&&d| d >= t).count();
    let trials = deviations.len();
    let rate = hits as f64 / trials.max(1) as f64;
    let (lo, hi) = wilson_interval(hits, trials, Z99);
    let bound = exp.envelope(t);
    TailPoint {
        t,
        empirical_rate: rate,
        wilson_lo: lo,
        wilson_hi: hi,
        theoretical_bound: bound,
        pass: within_slack(rate, bound, trials),
    }
}

/// `points` values of `t` spaced evenly from just above the envelope threshold up to 1.
pub fn t_grid(exp: &TailExperiment, points: usize) -> Vec<f64> {
    let lo = exp.envelope_threshold() * (1.0 + 1e-9);
    if points <= 1 || lo >= 1.0 {
        return vec![lo.min(1.0)];
    }
    (0..points)
        .map(|i| lo + (1.0 - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// The event `min{F, ||D||} >= (2/sqrt n) M kappa sqrt(F) sqrt(2 r log n)` with
/// `F = max{8 r log n M^2 kappa^2 / n, ||Lambda||}`, whose probability is at most
/// `2^(3/4) n^(1-r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnnormalizedCheck {
    pub f: f64,
    pub threshold: f64,
    pub rate: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn unnormalized_check(exp: &TailExperiment, deviations: &[f64], r: f64) -> Result<UnnormalizedCheck> {
    let n = exp.n as f64;
    let m = exp.m_bound;
    let log = n.ln();
    let f = (8.0 * r * log * m * m * KAPPA * KAPPA / n).max(exp.expectation_norm()?);
    let threshold = 2.0 / n.sqrt() * m * KAPPA * f.sqrt() * (2.0 * r * log).sqrt();
    let hits = deviations.iter().filter(|&&d| d.min(f) >= threshold).count();
    let rate = hits as f64 / deviations.len().max(1) as f64;
    let bound = (TAIL_PREFACTOR * n.powf(1.0 - r)).min(1.0);
    Ok(UnnormalizedCheck {
        f,
        threshold,
        rate,
        bound,
        pass: within_slack(rate, bound, deviations.len()),
    })
}

/// `c_t = (1-t)^(1-t) e^t`.
pub fn chernoff_c(t: f64) -> f64 {
    if t >= 1.0 {
        return std::f64::consts::E;
    }
    ((1.0 - t) * (1.0 - t).ln() + t).exp()
}

/// `d_t = (1+t)^(1+t) e^(-t)`.
pub fn chernoff_d(t: f64) -> f64 {
    ((1.0 + t) * (1.0 + t).ln() - t).exp()
}

/// `m exp(-n log(c) / N)`, capped at one.
pub fn chernoff_envelope(m: usize, n: usize, c: f64, spectral: f64) -> f64 {
    (m as f64 * (-(n as f64) * c.ln() / spectral).exp()).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernoffReport {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub c_t: f64,
    pub d_t: f64,
    /// Bound on the spectral function of the density-normalized system.
    pub spectral: f64,
    pub lower_envelope: f64,
    pub upper_envelope: f64,
    pub lower_rate: f64,
    pub upper_rate: f64,
    pub flagged: usize,
    pub trials: usize,
    pub lower_vacuous: bool,
    pub upper_vacuous: bool,
    pub lower_pass: bool,
    pub upper_pass: bool,
}

/// Frequencies of `lambda_min(H) < 1 - t` and `lambda_max(H) > 1 + t`; flagged trials
/// count against both.
pub fn chernoff_eig_tails(
    model: &SpectralKernelModel,
    density: &SamplingDensity,
    n: usize,
    m: usize,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<ChernoffReport> {
    let spectral = normalized_spectral_bound(model, density, m)?;
    let outcomes: Vec<Option<(f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Option<(f64, f64)>> {
            let nodes = density.draw_nodes_on_stream(n, seed, trial)?;
            match assemble_design(model, &nodes, m) {
                Ok(ds) if ds.is_full_rank() => Ok(Some((ds.lambda_min, ds.lambda_max))),
                Ok(_) => Ok(None),
                Err(e) if e.is_flaggable() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(chernoff_summary(&outcomes, n, m, t, spectral))
}

/// Tail frequencies from per-trial `(lambda_min, lambda_max)`, `None` marking a flagged trial.
pub fn chernoff_summary(
    outcomes: &[Option<(f64, f64)>],
    n: usize,
    m: usize,
    t: f64,
    spectral: f64,
) -> ChernoffReport {
    let trials = outcomes.len();
    let flagged = outcomes.iter().filter(|o| o.is_none()).count();
    let low = outcomes
        .iter()
        .filter(|o| o.is_none_or(|(lo, _)| lo < 1.0 - t))
        .count();
    let high = outcomes
        .iter()
        .filter(|o| o.is_none_or(|(_, hi)| hi > 1.0 + t))
        .count();
    let c_t = chernoff_c(t);
    let d_t = chernoff_d(t);
    let lower_envelope = chernoff_envelope(m, n, c_t, spectral);
    let upper_envelope = chernoff_envelope(m, n, d_t, spectral);
    let lower_rate = low as f64 / trials.max(1) as f64;
    let upper_rate = high as f64 / trials.max(1) as f64;
    ChernoffReport {
        n,
        m,
        t,
        c_t,
        d_t,
        spectral,
        lower_envelope,
        upper_envelope,
        lower_rate,
        upper_rate,
        flagged,
        trials,
        lower_vacuous: lower_envelope >= 1.0,
        upper_vacuous: upper_envelope >= 1.0,
        lower_pass: within_slack(lower_rate, lower_envelope, trials),
        upper_pass: within_slack(upper_rate, upper_envelope, trials),
    }
}

/// `N(m)` for the base measure, `2(m-1)` or `3(m-1)` for the mixture densities, and
/// the sup of `N(m) / rho` otherwise.
pub fn normalized_spectral_bound(model: &SpectralKernelModel, density: &SamplingDensity, m: usize) -> Result<f64> {
    use crate::density::DensityKind;
    Ok(match density.kind() {
        DensityKind::Plain => model.spectral_function(m)?,
        DensityKind::HeadTail => 2.0 * (m - 1) as f64,
        DensityKind::Nonsep => 3.0 * (m - 1) as f64,
        DensityKind::TraceNormalized => {
            let grid = 4097;
            let mut best: f64 = 0.0;
            for i in 0..grid {
                let x = i as f64 / grid as f64;
                best = best.max(model.head_diag(x, m)? / density.eval(x)?);
            }
            best
        }
    })
}
