//! Exact worst-case errors over the unit ball of `H(K)`, computed as operator norms of
//! truncated coefficient matrices together with rigorous truncation enclosures.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{BasisStream, SpectralKernelModel};
use crate::linalg::{
    hermitian_eigenvalues, hermitize, singular_values, spectral_norm_sq, symmetric_eigenvalues,
    CMatrix,
};
use crate::recovery::DesignSystem;

/// Truncations up to this size use the dense error matrix by default.
pub const DENSE_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WceMethod {
    #[default]
    Auto,
    /// Singular values of the full `N x N` error matrix.
    Dense,
    /// Secular equation on the `(m-1)`-dimensional approximation space.
    Reduced,
}

/// A truncated operator-norm value with its enclosure `value <= exact <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WceValue {
    pub value: f64,
    pub upper: f64,
    pub residual: f64,
    pub truncation: usize,
}

fn check_truncation(ds: &DesignSystem, truncation: usize) -> Result<()> {
    if truncation < ds.m - 1 {
        return Err(Error::InvalidIndex(format!(
            "truncation {truncation} is smaller than m - 1 = {}",
            ds.m - 1
        )));
    }
    Ok(())
}

/// `sup_{||f||_H <= 1} ||f - S f||^2` for the weighted least-squares operator of `ds`.
pub fn exact_wce_recovery(
    model: &SpectralKernelModel,
    ds: &DesignSystem,
    truncation: usize,
    method: WceMethod,
) -> Result<WceValue> {
    ds.ensure_full_rank()?;
    check_truncation(ds, truncation)?;
    let b = ds.pseudo_inverse()?;
    let value = match method {
        WceMethod::Dense => dense_recovery(model, ds, &b, truncation),
        WceMethod::Reduced => reduced_recovery(model, ds, &b, truncation),
        WceMethod::Auto if truncation <= DENSE_LIMIT => dense_recovery(model, ds, &b, truncation),
        WceMethod::Auto => reduced_recovery(model, ds, &b, truncation),
    };
    // Columns beyond N contribute at most lambda_{N+1} + ||B||^2 ||G_>||_F^2.
    let b_norm_sq = ds.pseudo_inverse_norm().powi(2);
    let g_tail: f64 = ds
        .nodes
        .iter()
        .zip(&ds.weights)
        .map(|(&x, w)| w * w * model.tail_diag_bound(x, truncation + 1))
        .sum();
    let residual = model.eigenvalue(truncation + 1) + b_norm_sq * g_tail;
    Ok(WceValue {
        value,
        upper: value + residual,
        residual,
        truncation,
    })
}

/// Columns `G[i, k] = sigma_k eta_k(x_i) w_i` for `k = 1..=truncation`.
fn weighted_columns(model: &SpectralKernelModel, ds: &DesignSystem, truncation: usize) -> CMatrix {
    let mut g = CMatrix::zeros(ds.n, truncation);
    let mut stream = BasisStream::new(model.basis(), &ds.nodes);
    for k in 0..truncation {
        let sigma = model.sigma(k + 1);
        let values = stream.advance();
        for (i, (v, w)) in values.iter().zip(&ds.weights).enumerate() {
            g[(i, k)] = v * (sigma * w);
        }
    }
    g
}

/// The error matrix `E = D_sigma - P B G` of size `N x N`.
pub fn error_matrix(model: &SpectralKernelModel, ds: &DesignSystem, truncation: usize) -> Result<CMatrix> {
    ds.ensure_full_rank()?;
    check_truncation(ds, truncation)?;
    let b = ds.pseudo_inverse()?;
    Ok(build_error_matrix(model, ds, &b, truncation))
}

fn build_error_matrix(model: &SpectralKernelModel, ds: &DesignSystem, b: &CMatrix, truncation: usize) -> CMatrix {
    let g = weighted_columns(model, ds, truncation);
    let bg = b * g;
    let mut e = CMatrix::zeros(truncation, truncation);
    for k in 0..truncation {
        e[(k, k)] = Complex64::new(model.sigma(k + 1), 0.0);
    }
    for r in 0..bg.nrows() {
        for c in 0..truncation {
            e[(r, c)] -= bg[(r, c)];
        }
    }
    e
}

fn dense_recovery(model: &SpectralKernelModel, ds: &DesignSystem, b: &CMatrix, truncation: usize) -> f64 {
    let e = build_error_matrix(model, ds, b, truncation);
    singular_values(&e).first().map_or(0.0, |s| s * s)
}

/// Largest eigenvalue of `D^2 + U U*` over the excluded indices `k = m..=N`, where the
/// columns of `U*` are `sigma_k B (w * eta_k(X))`, via `lambda_max(M(lambda)) = 1` with
/// `M(lambda) = sum_k lambda_k / (lambda - lambda_k) v_k v_k*`.
fn reduced_recovery(model: &SpectralKernelModel, ds: &DesignSystem, b: &CMatrix, truncation: usize) -> f64 {
    let m = ds.m;
    if truncation < m {
        return 0.0;
    }
    let dim = m - 1;
    let mut bw = b.clone();
    for (j, w) in ds.weights.iter().enumerate() {
        bw.column_mut(j).scale_mut(*w);
    }
    let mut stream = BasisStream::new(model.basis(), &ds.nodes);
    for _ in 1..m {
        stream.advance();
    }
    let count = truncation - m + 1;
    let mut vs = CMatrix::zeros(dim, count);
    let mut lambdas = Vec::with_capacity(count);
    let mut eta = CMatrix::zeros(ds.n, 1);
    for c in 0..count {
        let values = stream.advance();
        eta.column_mut(0).copy_from_slice(values);
        let v = &bw * &eta;
        vs.column_mut(c).copy_from(&v.column(0));
        lambdas.push(model.eigenvalue(m + c));
    }
    let lambda_m = lambdas[0];
    let trace: f64 = lambdas
        .iter()
        .enumerate()
        .map(|(c, l)| l * vs.column(c).norm_squared())
        .sum();
    if trace == 0.0 {
        return lambda_m;
    }
    let top = |lambda: f64| -> f64 {
        let mut scaled = vs.clone();
        for (c, l) in lambdas.iter().enumerate() {
            let f = (l / (lambda - l)).sqrt();
            scaled.column_mut(c).scale_mut(f);
        }
        spectral_norm_sq(&scaled)
    };
    let (mut lo, mut hi) = (lambda_m, lambda_m + trace);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if top(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `||Lambda_N - (1/n) sum_i w_i^2 y_i y_i*||` with `y_i = (e_k(x_i))_{k <= N}` and
/// `weights_sq[i] = w_i^2` (all ones for the unweighted operator).
pub fn exact_wce_discretization(
    model: &SpectralKernelModel,
    nodes: &[f64],
    weights_sq: Option<&[f64]>,
    truncation: usize,
) -> Result<WceValue> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no nodes".into()));
    }
    if truncation == 0 {
        return Err(Error::InvalidIndex("truncation must be positive".into()));
    }
    if let Some(w) = weights_sq {
        if w.len() != n {
            return Err(Error::InvalidParameter("weight count differs from node count".into()));
        }
    }
    let domain = model.domain();
    for &x in nodes {
        domain.check(x)?;
    }
    let wsq = |i: usize| weights_sq.map_or(1.0, |w| w[i]);
    let real = model.basis().is_real();
    let mut re = DMatrix::<f64>::zeros(n, truncation);
    let mut im = DMatrix::<f64>::zeros(if real { 0 } else { n }, truncation);
    let mut stream = BasisStream::new(model.basis(), nodes);
    for k in 0..truncation {
        let sigma = model.sigma(k + 1);
        let values = stream.advance();
        for (i, v) in values.iter().enumerate() {
            let s = sigma * wsq(i).sqrt();
            re[(i, k)] = v.re * s;
            if !real {
                im[(i, k)] = v.im * s;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    let eigenvalues = if real {
        let mut delta = re.tr_mul(&re) * -inv_n;
        for k in 0..truncation {
            delta[(k, k)] += model.eigenvalue(k + 1);
        }
        symmetric_eigenvalues(delta.symmetrize())
    } else {
        let gram_re = re.tr_mul(&re) + im.tr_mul(&im);
        let gram_im = re.tr_mul(&im) - im.tr_mul(&re);
        let mut delta = CMatrix::from_fn(truncation, truncation, |r, c| {
            Complex64::new(-gram_re[(r, c)] * inv_n, -gram_im[(r, c)] * inv_n)
        });
        for k in 0..truncation {
            delta[(k, k)] += model.eigenvalue(k + 1);
        }
        hermitian_eigenvalues(hermitize(delta))
    };
    let value = eigenvalues
        .first()
        .map_or(0.0, |l| l.abs())
        .max(eigenvalues.last().map_or(0.0, |l| l.abs()));
    // Block bound for the coupling to indices beyond N.
    let t: f64 = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| wsq(i) * model.tail_diag_bound(x, truncation + 1))
        .sum::<f64>()
        * inv_n;
    let c = ((model.eigenvalue(1) + value) * t).sqrt();
    let d = model.eigenvalue(truncation + 1).max(t);
    let upper = 0.5 * (value + d) + (0.25 * (value - d).powi(2) + c * c).sqrt();
    Ok(WceValue {
        value,
        upper,
        residual: upper - value,
        truncation,
    })
}

trait Symmetrize {
    fn symmetrize(self) -> Self;
}

impl Symmetrize for DMatrix<f64> {
    fn symmetrize(mut self) -> Self {
        let n = self.nrows();
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
        self
    }
}

/// The contribution of the diagonal atom, `sup_{||g||_{H(K0)} <= 1} ||S g||^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullspaceComponent {
    pub value: f64,
    /// `2 M0^2 / n` with `M0^2 = tr0 * max_i w_i^2`.
    pub envelope: f64,
    pub lambda_min: f64,
}

impl NullspaceComponent {
    /// Whether the envelope applies, i.e. `lambda_min(H) >= 1/2`.
    pub fn envelope_applies(&self) -> bool {
        self.lambda_min >= 0.5
    }

    pub fn within_envelope(&self) -> bool {
        self.value <= self.envelope + 1e-12
    }
}

/// With the Gram matrix `K0[X] = tr0 I`, the unit ball of `span{K0(., x_i)}` maps to
/// coefficient vectors `tr0 B W c` with `||c|| <= tr0^(-1/2)`.
pub fn wce_nullspace_component(atom_mass: f64, ds: &DesignSystem) -> Result<NullspaceComponent> {
    let mut sorted = ds.nodes.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::CoincidentNodes);
    }
    let max_w_sq = ds.weights.iter().map(|w| w * w).fold(0.0, f64::max);
    let envelope = 2.0 * atom_mass * max_w_sq / ds.n as f64;
    if atom_mass == 0.0 {
        return Ok(NullspaceComponent {
            value: 0.0,
            envelope,
            lambda_min: ds.lambda_min,
        });
    }
    let mut bw = ds.pseudo_inverse()?;
    for (j, w) in ds.weights.iter().enumerate() {
        bw.column_mut(j).scale_mut(*w);
    }
    Ok(NullspaceComponent {
        value: atom_mass * spectral_norm_sq(&bw),
        envelope,
        lambda_min: ds.lambda_min,
    })
}

/// Triangle-inequality combination `(sqrt(a) + sqrt(b))^2` of two squared errors.
pub fn triangle_combination(atom_part: f64, separable_part: f64) -> f64 {
    (atom_part.max(0.0).sqrt() + separable_part.max(0.0).sqrt()).powi(2)
}
