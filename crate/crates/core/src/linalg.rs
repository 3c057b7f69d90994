//! Dense spectral helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::rng::TrialRng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: CMatrix) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Largest eigenvalue of `A A*` for `A` of shape `k x n`, via the smaller Gram matrix.
pub fn spectral_norm_sq(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.adjoint()
    } else {
        a.adjoint() * a
    };
    hermitian_eigenvalues(hermitize(gram))
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
}

/// Symmetrize away rounding so the eigen-solver sees an exactly Hermitian input.
pub fn hermitize(mut h: CMatrix) -> CMatrix {
    let n = h.nrows();
    for i in 0..n {
        h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

/// Power iteration for the dominant eigenvalue magnitude of a Hermitian operator.
///
/// Returns `(|lambda|, iterations)`; stops once the Rayleigh quotient changes by less
/// than `tol` relative.
pub fn power_iteration(
    apply: impl Fn(&CVector) -> CVector,
    dim: usize,
    rng: &mut TrialRng,
    max_iter: usize,
    tol: f64,
) -> (f64, usize) {
    if dim == 0 {
        return (0.0, 0);
    }
    let mut v = CVector::from_fn(dim, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut estimate = 0.0;
    for it in 1..=max_iter {
        let w = apply(&v);
        let norm = w.norm();
        if norm == 0.0 {
            return (0.0, it);
        }
        let converged = (norm - estimate).abs() <= tol * norm;
        estimate = norm;
        v = w / Complex64::new(norm, 0.0);
        if converged {
            return (estimate, it);
        }
    }
    (estimate, max_iter)
}

/// Default iteration budget and tolerance for power-iteration cross-checks.
pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-9;
