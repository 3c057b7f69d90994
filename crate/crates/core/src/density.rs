//! Importance densities with respect to the base measure, exact mixture sampling, and
//! the density-normalized kernel.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Basis, EigenRule, SpectralKernelModel};
use crate::rng::{trial_rng, TrialRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    /// The base measure itself, `rho = 1`.
    Plain,
    /// Half spectral head, half normalized kernel tail.
    HeadTail,
    /// Thirds: spectral head, separable tail, diagonal atom.
    Nonsep,
    /// `K(x, x) / tr(K)`.
    TraceNormalized,
}

impl DensityKind {
    pub fn needs_m(self) -> bool {
        matches!(self, DensityKind::HeadTail | DensityKind::Nonsep)
    }
}

/// One probability density of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    /// `(1/(m-1)) sum_{j<m} |eta_j|^2`.
    Head { m: usize },
    /// `sum_{j>=from} lambda_j |eta_j|^2 / sum_{j>=from} lambda_j`.
    Spectral { from: usize },
    /// The constant density; under the constant-diagonal atom this is `K0(x,x)/tr0`.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct SamplingDensity {
    kind: DensityKind,
    model: SpectralKernelModel,
    m: Option<usize>,
    weights: Vec<f64>,
    components: Vec<Component>,
    index_samplers: Vec<Option<IndexSampler>>,
}

impl SamplingDensity {
    pub fn new(model: &SpectralKernelModel, kind: DensityKind, m: Option<usize>) -> Result<Self> {
        let atom = model.atom_mass();
        let mut parts: Vec<(f64, Component)> = Vec::with_capacity(3);
        match kind {
            DensityKind::Plain => parts.push((1.0, Component::Uniform)),
            DensityKind::TraceNormalized => {
                let (tr, _) = model.traces();
                if tr <= 0.0 {
                    return Err(Error::DegenerateDensity("kernel has zero trace".into()));
                }
                parts.push((model.tail_sum(1) / tr, Component::Spectral { from: 1 }));
                parts.push((atom / tr, Component::Uniform));
            }
            DensityKind::HeadTail | DensityKind::Nonsep => {
                let m = match m {
                    Some(m) if m >= 2 => m,
                    other => {
                        return Err(Error::InvalidIndex(format!(
                            "density {kind:?} requires m >= 2, got {other:?}"
                        )))
                    }
                };
                if let Some(rank) = model.rank() {
                    if m - 1 > rank && atom == 0.0 {
                        return Err(Error::DegenerateDensity(format!(
                            "m - 1 = {} exceeds the kernel rank {rank}",
                            m - 1
                        )));
                    }
                }
                let ts = model.tail_sum(m);
                parts.push((1.0, Component::Head { m }));
                if kind == DensityKind::HeadTail {
                    let denom = ts + atom;
                    parts[0].0 = 0.5;
                    if denom > 0.0 {
                        parts.push((0.5 * ts / denom, Component::Spectral { from: m }));
                        parts.push((0.5 * atom / denom, Component::Uniform));
                    }
                } else {
                    parts.push((if ts > 0.0 { 1.0 } else { 0.0 }, Component::Spectral { from: m }));
                    parts.push((if atom > 0.0 { 1.0 } else { 0.0 }, Component::Uniform));
                }
            }
        }
        parts.retain(|(w, _)| *w > 0.0);
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let weights: Vec<f64> = parts.iter().map(|(w, _)| w / total).collect();
        let components: Vec<Component> = parts.iter().map(|(_, c)| *c).collect();
        let index_samplers = components
            .iter()
            .map(|c| match c {
                Component::Spectral { from } => Some(IndexSampler::new(model.rule(), *from)),
                _ => None,
            })
            .collect();
        Ok(Self {
            kind,
            model: model.clone(),
            m: if kind.needs_m() { m } else { None },
            weights,
            components,
            index_samplers,
        })
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn m(&self) -> Option<usize> {
        self.m
    }

    pub fn model(&self) -> &SpectralKernelModel {
        &self.model
    }

    /// Mixture weights and their components, in sampling order.
    pub fn components(&self) -> impl Iterator<Item = (f64, Component)> + '_ {
        self.weights.iter().copied().zip(self.components.iter().copied())
    }

    /// Density of a single mixture component at `x`.
    pub fn component_density(&self, component: Component, x: f64) -> Result<f64> {
        let model = &self.model;
        match component {
            Component::Head { m } => Ok(model.head_diag(x, m)? / (m - 1) as f64),
            Component::Spectral { from } => Ok(model.tail_diag(x, from)? / model.tail_sum(from)),
            Component::Uniform => {
                model.domain().check(x)?;
                Ok(1.0)
            }
        }
    }

    /// Weighted component terms `w_c * p_c(x)` whose sum is the density.
    pub fn terms(&self, x: f64) -> Result<Vec<(Component, f64)>> {
        self.components()
            .map(|(w, c)| Ok((c, w * self.component_density(c, x)?)))
            .collect()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.terms(x)?.iter().map(|(_, v)| v).sum())
    }

    /// Draw one point, returning it with the index of the component it came from.
    pub fn draw_point(&self, rng: &mut TrialRng) -> (f64, usize) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        let basis = self.model.basis();
        let x = match self.components[pick] {
            Component::Uniform => uniform_point(basis, rng),
            Component::Head { m } => {
                let j = rng.random_range(1..m as u64);
                eigenfunction_point(basis, j, rng)
            }
            Component::Spectral { .. } => {
                let j = self.index_samplers[pick]
                    .as_ref()
                    .expect("spectral component carries a sampler")
                    .sample(rng);
                eigenfunction_point(basis, j, rng)
            }
        };
        (x, pick)
    }

    /// `n` i.i.d. nodes from stream 0 of `seed`.
    pub fn draw_nodes(&self, n: usize, seed: u64) -> Result<NodeSet> {
        self.draw_nodes_on_stream(n, seed, 0)
    }

    /// `n` i.i.d. nodes from the generator stream `(seed, stream)`.
    pub fn draw_nodes_on_stream(&self, n: usize, seed: u64, stream: u64) -> Result<NodeSet> {
        if n == 0 {
            return Err(Error::InvalidParameter("node count must be at least 1".into()));
        }
        let mut rng = trial_rng(seed, stream);
        let mut nodes = Vec::with_capacity(n);
        let mut density = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, rho) = self.draw_positive(&mut rng)?;
            nodes.push(x);
            density.push(rho);
        }
        // Resample any node that collides with an earlier one.
        loop {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
            let dup: Vec<usize> = order
                .windows(2)
                .filter(|w| nodes[w[0]] == nodes[w[1]])
                .map(|w| w[0].max(w[1]))
                .collect();
            if dup.is_empty() {
                break;
            }
            for i in dup {
                let (x, rho) = self.draw_positive(&mut rng)?;
                nodes[i] = x;
                density[i] = rho;
            }
        }
        Ok(NodeSet {
            nodes,
            density,
            kind: self.kind,
            seed,
            stream,
        })
    }

    fn draw_positive(&self, rng: &mut TrialRng) -> Result<(f64, f64)> {
        for _ in 0..1000 {
            let (x, _) = self.draw_point(rng);
            let rho = self.eval(x)?;
            if rho > 0.0 {
                return Ok((x, rho));
            }
        }
        Err(Error::DegenerateDensity(
            "sampler keeps producing points of zero density".into(),
        ))
    }
}

fn uniform_point(basis: Basis, rng: &mut TrialRng) -> f64 {
    match basis {
        Basis::Fourier => rng.random::<f64>(),
        Basis::Cosine => rng.random_range(0.0..=1.0),
    }
}

/// Above this frequency the cosine density `1 + cos(2 pi f x)` is within `1/(2 pi f)`
/// of uniform in Kolmogorov distance, below double-precision resolution of the nodes.
const UNIFORM_FREQUENCY: u64 = 1 << 40;

/// Sample from `|eta_j(x)|^2 d x`.
pub fn eigenfunction_point(basis: Basis, j: u64, rng: &mut TrialRng) -> f64 {
    match basis {
        Basis::Fourier => rng.random::<f64>(),
        Basis::Cosine => {
            let f = j.saturating_sub(1);
            if f == 0 || f >= UNIFORM_FREQUENCY {
                return rng.random_range(0.0..=1.0);
            }
            // f full periods of 1 + cos(2 pi f x): pick a period, then invert within it.
            let k = rng.random_range(0..f);
            let y = invert_period_cdf(rng.random::<f64>());
            ((k as f64 + y) / f as f64).min(1.0)
        }
    }
}

/// Solve `y + sin(2 pi y) / (2 pi) = u` on `[0, 1]`.
pub fn invert_period_cdf(u: f64) -> f64 {
    let g = |y: f64| y + (TAU * y).sin() / TAU - u;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut y = u;
    for _ in 0..200 {
        let gy = g(y);
        if gy.abs() <= 1e-15 {
            return y;
        }
        if gy > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = 1.0 + (TAU * y).cos();
        let newton = y - gy / d;
        y = if d > 1e-300 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-12 {
            return 0.5 * (lo + hi);
        }
    }
    y
}

/// Exact sampler for `j >= from` with probabilities `lambda_j / sum_{i>=from} lambda_i`.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    from: u64,
    table: Vec<f64>,
    tail: Option<TailSampler>,
    geometric: Option<f64>,
}

#[derive(Debug, Clone)]
struct TailSampler {
    rule: EigenRule,
    start: f64,
    p: f64,
    bound: f64,
    mass: f64,
}

const TABLE_LEN: usize = 1024;
const INDEX_CAP: f64 = 4.0e18;

impl IndexSampler {
    pub fn new(rule: &EigenRule, from: usize) -> Self {
        let from = from.max(1);
        match rule {
            EigenRule::Geometric { q } => Self {
                from: from as u64,
                table: Vec::new(),
                tail: None,
                geometric: Some(*q),
            },
            EigenRule::Finite { values } => {
                let table = cumulative(values.iter().skip(from - 1).copied());
                Self {
                    from: from as u64,
                    table,
                    tail: None,
                    geometric: None,
                }
            }
            EigenRule::Polynomial { .. } | EigenRule::Sobolev { .. } => {
                let last = from + TABLE_LEN - 1;
                let mut table = cumulative((from..=last).map(|i| rule.value(i)));
                let head_mass = *table.last().unwrap();
                let tail_mass = rule.tail_sum(last + 1);
                let total = head_mass + tail_mass;
                for c in table.iter_mut() {
                    *c /= total;
                }
                let p = rule.decay_exponent().unwrap();
                let j = last as f64;
                let bound = match rule {
                    EigenRule::Sobolev { s } => ((j + 2.0).powi(2) / (1.0 + j * j)).powf(*s),
                    _ => ((j + 2.0) / (j + 1.0)).powf(p),
                };
                Self {
                    from: from as u64,
                    table,
                    tail: Some(TailSampler {
                        rule: rule.clone(),
                        start: j + 1.0,
                        p,
                        bound,
                        mass: tail_mass / total,
                    }),
                    geometric: None,
                }
            }
        }
    }

    /// Probability that a draw falls beyond the explicit table.
    pub fn tail_mass(&self) -> f64 {
        self.tail.as_ref().map_or(0.0, |t| t.mass)
    }

    pub fn sample(&self, rng: &mut TrialRng) -> u64 {
        if let Some(q) = self.geometric {
            let u: f64 = 1.0 - rng.random::<f64>();
            let k = (u.ln() / q.ln()).floor();
            return self.from + k.min(INDEX_CAP) as u64;
        }
        let u: f64 = rng.random();
        let pos = self.table.partition_point(|&c| c <= u);
        if pos < self.table.len() {
            return self.from + pos as u64;
        }
        match &self.tail {
            Some(tail) => tail.sample(rng),
            // Rounding at the top of a finite table.
            None => self.from + self.table.len().saturating_sub(1) as u64,
        }
    }
}

impl TailSampler {
    /// Rejection from the floored Pareto law on `[start, inf)` with exponent `p`.
    fn sample(&self, rng: &mut TrialRng) -> u64 {
        loop {
            let v: f64 = 1.0 - rng.random::<f64>();
            let x = self.start * v.powf(-1.0 / (self.p - 1.0));
            let j = x.floor().min(INDEX_CAP);
            // Proposal mass of j, up to the common factor, is the integral of t^-p over [j, j+1).
            let w = j.powf(1.0 - self.p) * -((1.0 - self.p) * (1.0 / j).ln_1p()).exp_m1()
                / (self.p - 1.0);
            let lambda = match self.rule {
                EigenRule::Sobolev { s } => (1.0 + (j - 1.0) * (j - 1.0)).powf(-s),
                _ => j.powf(-self.p),
            };
            let accept = lambda / (self.bound * w);
            if rng.random::<f64>() < accept {
                return j as u64;
            }
        }
    }
}

fn cumulative(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = values
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    if let Some(&total) = out.last() {
        if total > 0.0 {
            for c in out.iter_mut() {
                *c /= total;
            }
        }
    }
    out
}

/// Sampled nodes together with their density values and generator provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSet {
    pub nodes: Vec<f64>,
    pub density: Vec<f64>,
    pub kind: DensityKind,
    pub seed: u64,
    pub stream: u64,
}

impl NodeSet {
    /// Nodes with a prescribed density value, e.g. deterministic designs.
    pub fn from_points(nodes: Vec<f64>, density: &SamplingDensity) -> Result<Self> {
        let values = nodes
            .iter()
            .map(|&x| density.eval(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes,
            density: values,
            kind: density.kind(),
            seed: 0,
            stream: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Least-squares weights `1 / sqrt(rho(x_i))`, zero where the density vanishes.
    pub fn weights(&self) -> Vec<f64> {
        self.density
            .iter()
            .map(|&r| if r > 0.0 { 1.0 / r.sqrt() } else { 0.0 })
            .collect()
    }

    pub fn is_distinct(&self) -> bool {
        let mut sorted = self.nodes.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// Write `(index, x, rho)` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["index", "x", "rho"])?;
        for (i, (x, r)) in self.nodes.iter().zip(&self.density).enumerate() {
            w.write_record([i.to_string(), format!("{x:e}"), format!("{r:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `K(x, y) / sqrt(rho(x) rho(y))` and its spectral pieces.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedKernel<'a> {
    density: &'a SamplingDensity,
}

impl<'a> NormalizedKernel<'a> {
    pub fn new(density: &'a SamplingDensity) -> Self {
        Self { density }
    }

    fn rho(&self, x: f64) -> Result<f64> {
        let rho = self.density.eval(x)?;
        if rho > 0.0 {
            Ok(rho)
        } else {
            Err(Error::DivisionDomain { x })
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        let k = self.density.model().eval_kernel(x, y)?;
        Ok(k / (self.rho(x)? * self.rho(y)?).sqrt())
    }

    /// `sum_{k<m} |eta_k(x)|^2 / rho(x)`.
    pub fn head_diag(&self, x: f64, m: usize) -> Result<f64> {
        Ok(self.density.model().head_diag(x, m)? / self.rho(x)?)
    }

    /// `sum_{k>=m} |e_k(x)|^2 / rho(x)`.
    pub fn tail_diag(&self, x: f64, m: usize) -> Result<f64> {
        Ok(self.density.model().tail_diag(x, m)? / self.rho(x)?)
    }

    /// `K0(x, x) / rho(x)`.
    pub fn atom_diag(&self, x: f64) -> Result<f64> {
        Ok(self.density.model().atom_mass() / self.rho(x)?)
    }
}
