//! Kernels given by their singular system `(sigma_k, e_k, eta_k)` relative to the
//! uniform probability measure on a one-dimensional domain, optionally augmented by a
//! non-separable diagonal atom `K0(x, y) = tr0 * 1{x = y}`.

mod basis;
mod rule;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{Basis, BasisStream, Domain};
pub use rule::EigenRule;

/// Largest explicit truncation the model will sum term by term.
pub const MAX_TRUNCATION: usize = 1 << 20;

/// Relative default for the truncation tolerance, multiplied by the eigenvalue sum.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Declarative description of a kernel, as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub basis: Basis,
    #[serde(flatten)]
    pub rule: EigenRule,
    #[serde(default)]
    pub atom_mass: f64,
    /// Absolute truncation tolerance; defaults to `1e-10 * sum(lambda)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Explicit working truncation index `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

impl KernelSpec {
    pub fn build(&self) -> Result<SpectralKernelModel> {
        let mut model = SpectralKernelModel::new(self.basis, self.rule.clone(), self.atom_mass)?;
        if let Some(tol) = self.tolerance {
            model = model.with_tolerance(tol)?;
        }
        if let Some(n) = self.truncation {
            model = model.with_truncation(n)?;
        }
        Ok(model)
    }
}

/// Result of a grid maximization with local refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax {
    pub value: f64,
    pub argmax: f64,
    /// Spacing of the uniform grid that seeded the refinement.
    pub resolution: f64,
}

/// Smallest `N` whose tail function `T(N + 1)` is within `tolerance`; the cosine
/// diagonal peaks at twice the tail sum.
fn truncation_for(basis: Basis, rule: &EigenRule, tolerance: f64) -> usize {
    let scale = match basis {
        Basis::Fourier => 1.0,
        Basis::Cosine => 2.0,
    };
    rule.truncation_index(tolerance / scale, MAX_TRUNCATION)
}

/// Indices whose tail sums are tabulated at construction.
const TAIL_TABLE_LEN: usize = 4096;

/// `table[i - 1] = sum_{j >= i} lambda_j` for `i <= len`, summed backward from one
/// asymptotic evaluation.
fn tail_table(rule: &EigenRule) -> Arc<[f64]> {
    let len = rule.rank().map_or(TAIL_TABLE_LEN, |r| r.min(TAIL_TABLE_LEN));
    let mut table = vec![0.0; len];
    let mut acc = rule.tail_sum(len + 1);
    for i in (1..=len).rev() {
        acc += rule.value(i);
        table[i - 1] = acc;
    }
    table.into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralKernelModel {
    basis: Basis,
    rule: EigenRule,
    atom_mass: f64,
    tolerance: f64,
    truncation: usize,
    tails: Arc<[f64]>,
}

impl SpectralKernelModel {
    pub fn new(basis: Basis, rule: EigenRule, atom_mass: f64) -> Result<Self> {
        rule.validate()?;
        if !(atom_mass.is_finite() && atom_mass >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "atom mass must be finite and non-negative, got {atom_mass}"
            )));
        }
        let tolerance = DEFAULT_RELATIVE_TOLERANCE * rule.total();
        let truncation = truncation_for(basis, &rule, tolerance);
        let tails = tail_table(&rule);
        Ok(Self {
            basis,
            rule,
            atom_mass,
            tolerance,
            truncation,
            tails,
        })
    }

    /// Replace the truncation tolerance and recompute the working index.
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation tolerance must be non-negative, got {tolerance}"
            )));
        }
        self.tolerance = tolerance;
        self.truncation = truncation_for(self.basis, &self.rule, tolerance);
        Ok(self)
    }

    /// Fix the working truncation index explicitly.
    pub fn with_truncation(mut self, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_TRUNCATION {
            return Err(Error::InvalidIndex(format!(
                "truncation index must lie in 1..={MAX_TRUNCATION}, got {n}"
            )));
        }
        self.truncation = n;
        Ok(self)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn domain(&self) -> Domain {
        self.basis.domain()
    }

    pub fn rule(&self) -> &EigenRule {
        &self.rule
    }

    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn rank(&self) -> Option<usize> {
        self.rule.rank()
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.rule.value(k)
    }

    pub fn sigma(&self, k: usize) -> f64 {
        self.rule.value(k).sqrt()
    }

    /// Norm of the embedding into `L2`, i.e. `sigma_1` (zero for the atom-only model).
    pub fn embedding_norm(&self) -> f64 {
        self.sigma(1)
    }

    pub fn eigenfunction(&self, k: usize, x: f64) -> Result<Complex64> {
        if k == 0 {
            return Err(Error::InvalidIndex("eigenfunction indices start at 1".into()));
        }
        self.domain().check(x)?;
        Ok(self.basis.eval(k, x))
    }

    /// `sum_{j >= m} lambda_j`.
    pub fn tail_sum(&self, m: usize) -> f64 {
        match self.tails.get(m.max(1) - 1) {
            Some(&v) => v,
            None => self.rule.tail_sum(m),
        }
    }

    /// `(tr(K), tr0(K))`.
    pub fn traces(&self) -> (f64, f64) {
        (self.tail_sum(1) + self.atom_mass, self.atom_mass)
    }

    /// `sup_x K(x, x)`, the squared sup-norm of the kernel.
    pub fn sup_diag(&self) -> f64 {
        self.tail_function(1) + self.atom_mass
    }

    /// Bound on the pointwise error of any quantity truncated at the working index.
    pub fn truncation_residual(&self) -> f64 {
        self.tail_function(self.truncation + 1)
    }

    fn check_truncation(&self) -> Result<usize> {
        let residual = self.truncation_residual();
        if residual > self.tolerance {
            return Err(Error::Truncation {
                residual,
                tolerance: self.tolerance,
            });
        }
        Ok(self.truncation)
    }

    fn has_closed_form(&self) -> bool {
        self.basis == Basis::Cosine && self.rule == EigenRule::Sobolev { s: 1.0 }
    }

    /// `K(x, y) = sum_k e_k(x) conj(e_k(y)) + tr0 * 1{x = y}`.
    pub fn eval_kernel(&self, x: f64, y: f64) -> Result<Complex64> {
        let domain = self.domain();
        domain.check(x)?;
        domain.check(y)?;
        let atom = if x == y { self.atom_mass } else { 0.0 };
        if self.has_closed_form() {
            let v = 1.0 + cosine_sobolev_series(PI * (x - y).abs()) + cosine_sobolev_series(PI * (x + y));
            return Ok(Complex64::new(v + atom, 0.0));
        }
        let n = self.effective_terms(self.check_truncation()?);
        let points = [x, y];
        let mut stream = BasisStream::new(self.basis, &points);
        let mut terms = Vec::with_capacity(n);
        for k in 1..=n {
            let v = stream.advance();
            terms.push(self.rule.value(k) * v[0] * v[1].conj());
        }
        // Summing smallest terms first keeps the result symmetric under x <-> y.
        let sum: Complex64 = terms.into_iter().rev().sum();
        Ok(sum + atom)
    }

    /// `K(x, x)`, including the atom.
    pub fn kernel_diag(&self, x: f64) -> Result<f64> {
        Ok(self.tail_diag(x, 1)? + self.atom_mass)
    }

    /// `sum_{k < m} |eta_k(x)|^2` (unweighted spectral term).
    pub fn head_diag(&self, x: f64, m: usize) -> Result<f64> {
        self.domain().check(x)?;
        match self.basis {
            Basis::Fourier => Ok(m.saturating_sub(1) as f64),
            Basis::Cosine => {
                if m <= 1 {
                    return Ok(0.0);
                }
                let mut row = vec![Complex64::new(0.0, 0.0); m - 1];
                self.basis.eval_row(x, &mut row);
                Ok(row.iter().rev().map(|v| v.norm_sqr()).sum())
            }
        }
    }

    /// `sum_{k >= m} |e_k(x)|^2 = sum_{k >= m} lambda_k |eta_k(x)|^2`, without the atom.
    pub fn tail_diag(&self, x: f64, m: usize) -> Result<f64> {
        self.domain().check(x)?;
        let m = m.max(1);
        match self.basis {
            Basis::Fourier => Ok(self.tail_sum(m)),
            Basis::Cosine => {
                // |eta_k|^2 = 1 + cos(2 pi (k-1) x) for k >= 2.
                let first = if m == 1 { self.rule.value(1) } else { 0.0 };
                let from = m.max(2);
                let oscillating = if self.has_closed_form() {
                    let full = cosine_sobolev_series(2.0 * PI * x.min(1.0 - x));
                    let head: f64 = (2..from)
                        .rev()
                        .map(|k| self.rule.value(k) * cos_two_pi_mul((k - 1) as u64, x))
                        .sum();
                    full - head
                } else if let EigenRule::Geometric { q } = self.rule {
                    // sum_{u >= a} q^u cos(u t) = Re[(q e^{it})^a / (1 - q e^{it})].
                    let a = (from - 1) as u64;
                    let z = Complex64::from_polar(q, 2.0 * PI * x);
                    let za = Complex64::from_polar(q.powi(a as i32), 2.0 * PI * (a as f64 * x).fract());
                    (za / (1.0 - z)).re
                } else {
                    let n = self.effective_terms(self.check_truncation()?);
                    (from..=n.max(from - 1))
                        .rev()
                        .map(|k| self.rule.value(k) * cos_two_pi_mul((k - 1) as u64, x))
                        .sum()
                };
                Ok((first + self.tail_sum(from) + oscillating).max(0.0))
            }
        }
    }

    /// Cheap rigorous upper bound on [`Self::tail_diag`]: exact where a closed form
    /// exists, otherwise the tail function `T(m)`.
    pub fn tail_diag_bound(&self, x: f64, m: usize) -> f64 {
        let exact = self.basis == Basis::Fourier || self.has_closed_form();
        if exact {
            if let Ok(v) = self.tail_diag(x, m) {
                return v;
            }
        }
        self.tail_function(m)
    }

    /// Number of explicit terms needed: the working truncation, clipped to the rank.
    fn effective_terms(&self, n: usize) -> usize {
        match self.rank() {
            Some(r) => r.min(n),
            None => n,
        }
    }

    /// Spectral function `N(m) = sup_x sum_{k < m} |eta_k(x)|^2`, exact for the built-in bases.
    pub fn spectral_function(&self, m: usize) -> Result<f64> {
        if m < 2 {
            return Err(Error::InvalidIndex(format!(
                "spectral function requires m >= 2, got {m}"
            )));
        }
        Ok(match self.basis {
            Basis::Fourier => (m - 1) as f64,
            Basis::Cosine => (2 * m - 3) as f64,
        })
    }

    /// Tail function `T(m) = sup_x sum_{k >= m} |e_k(x)|^2`, attained at `x = 0`.
    pub fn tail_function(&self, m: usize) -> f64 {
        let m = m.max(1);
        match self.basis {
            Basis::Fourier => self.tail_sum(m),
            Basis::Cosine => {
                let first = if m == 1 { self.rule.value(1) } else { 0.0 };
                first + 2.0 * self.tail_sum(m.max(2))
            }
        }
    }

    /// Grid maximization of `x -> sum_{k < m} |eta_k(x)|^2`, a cross-check for [`Self::spectral_function`].
    pub fn spectral_function_on_grid(&self, m: usize, points: usize) -> Result<GridMax> {
        if m < 2 {
            return Err(Error::InvalidIndex(format!(
                "spectral function requires m >= 2, got {m}"
            )));
        }
        self.grid_maximize(points, |x| self.head_diag(x, m))
    }

    /// Grid maximization of `x -> sum_{k >= m} |e_k(x)|^2`, a cross-check for [`Self::tail_function`].
    pub fn tail_function_on_grid(&self, m: usize, points: usize) -> Result<GridMax> {
        self.grid_maximize(points, |x| self.tail_diag(x, m))
    }

    fn grid_maximize(&self, points: usize, f: impl Fn(f64) -> Result<f64>) -> Result<GridMax> {
        let points = points.max(2);
        let (lo, hi) = (0.0, 1.0);
        let last = match self.domain() {
            Domain::Torus => points - 1,
            Domain::UnitInterval => points,
        };
        let h = (hi - lo) / (points - 1) as f64;
        let mut best = (f64::NEG_INFINITY, lo);
        for i in 0..last {
            let x = (lo + i as f64 * h).min(hi);
            let v = f(x)?;
            if v > best.0 {
                best = (v, x);
            }
        }
        // Golden-section refinement on the bracketing cells.
        let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
        let upper = if self.domain() == Domain::Torus {
            hi - f64::EPSILON
        } else {
            hi
        };
        b = b.min(upper);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c)? >= f(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        let x = 0.5 * (a + b);
        let v = f(x)?;
        if v > best.0 {
            best = (v, x);
        }
        Ok(GridMax {
            value: best.0,
            argmax: best.1,
            resolution: h,
        })
    }
}

/// `S(t) = sum_{j >= 1} cos(j t) / (1 + j^2)` for `t` in `[0, 2 pi]`.
fn cosine_sobolev_series(t: f64) -> f64 {
    0.5 * (PI * (PI - t).cosh() / PI.sinh() - 1.0)
}

fn cos_two_pi_mul(f: u64, x: f64) -> f64 {
    (2.0 * PI * (f as f64 * x).fract()).cos()
}
