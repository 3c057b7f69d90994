//! Independent oracles shared by the integration tests. Nothing here calls the
//! library's linear algebra or closed forms.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `k`-th Fourier function (1-based, frequencies 0, 1, -1, 2, -2, ...).
pub fn fourier(k: usize, x: f64) -> Complex64 {
    let i = k as i64;
    let nu = if i % 2 == 0 { i / 2 } else { -(i - 1) / 2 };
    Complex64::from_polar(1.0, TAU * nu as f64 * x)
}

/// `k`-th cosine function (1-based).
pub fn cosine(k: usize, x: f64) -> Complex64 {
    if k == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(SQRT_2 * (PI * (k - 1) as f64 * x).cos(), 0.0)
    }
}

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.at(i, j).conj() * v[i]).sum())
            .collect()
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Gaussian elimination with partial pivoting on a square system.
pub fn solve(mut a: Mat, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = a.rows;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a.at(i, col).norm().total_cmp(&a.at(j, col).norm()))
            .unwrap();
        for j in 0..n {
            let t = a.at(col, j);
            a.set(col, j, a.at(piv, j));
            a.set(piv, j, t);
        }
        b.swap(col, piv);
        let d = a.at(col, col);
        for i in col + 1..n {
            let f = a.at(i, col) / d;
            for j in col..n {
                let v = a.at(i, j) - f * a.at(col, j);
                a.set(i, j, v);
            }
            b[i] = b[i] - f * b[col];
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: Complex64 = (i + 1..n).map(|j| a.at(i, j) * x[j]).sum();
        x[i] = (b[i] - s) / a.at(i, i);
    }
    x
}

/// Least squares through the normal equations `A* A x = A* b`.
pub fn least_squares(a: &Mat, b: &[Complex64]) -> Vec<Complex64> {
    let mut g = Mat::zeros(a.cols, a.cols);
    for i in 0..a.cols {
        for j in 0..a.cols {
            let s: Complex64 = (0..a.rows).map(|r| a.at(r, i).conj() * a.at(r, j)).sum();
            g.set(i, j, s);
        }
    }
    solve(g, a.apply_adjoint(b))
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize, complex: bool) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re = gaussian(rng);
            let im = if complex { gaussian(rng) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    let s = norm(&v);
    v.into_iter().map(|z| z / s).collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// Largest singular value of the operator `x -> op(x)` with adjoint `adj`, by power
/// iteration on `adj(op(.))` started from `start`.
pub fn top_singular(
    op: impl Fn(&[Complex64]) -> Vec<Complex64>,
    adj: impl Fn(&[Complex64]) -> Vec<Complex64>,
    start: Vec<Complex64>,
    iterations: usize,
) -> f64 {
    let mut v = start;
    let mut est = 0.0;
    for _ in 0..iterations {
        let w = adj(&op(&v));
        let s = norm(&w);
        if s == 0.0 {
            return 0.0;
        }
        est = s;
        v = w.into_iter().map(|z| z / s).collect();
    }
    est.sqrt()
}

/// Largest `|eigenvalue|` of a Hermitian matrix by power iteration.
pub fn top_abs_eigenvalue(a: &Mat, start: Vec<Complex64>, iterations: usize) -> f64 {
    let mut v = start;
    let mut est = 0.0;
    for _ in 0..iterations {
        let w = a.apply(&v);
        let s = norm(&w);
        if s == 0.0 {
            return 0.0;
        }
        est = s;
        v = w.into_iter().map(|z| z / s).collect();
    }
    est
}

/// One-sample Kolmogorov-Smirnov statistic against the CDF `cdf`.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Reference eigenfunction for the given basis.
pub fn eigenfunction(basis: rkhs_sampling::kernel::Basis, k: usize, x: f64) -> Complex64 {
    match basis {
        rkhs_sampling::kernel::Basis::Fourier => fourier(k, x),
        rkhs_sampling::kernel::Basis::Cosine => cosine(k, x),
    }
}

/// The recovery error operator on the first `truncation` coefficients, built column by
/// column: coefficient `j` is the function `sigma_j eta_j`, recovered by normal-equation
/// least squares from its weighted samples. Entry `(k, j)` is the `eta_k` coefficient
/// of `f - S f`.
pub fn recovery_error_operator(
    model: &rkhs_sampling::kernel::SpectralKernelModel,
    nodes: &[f64],
    density: &[f64],
    m: usize,
    truncation: usize,
) -> Mat {
    let n = nodes.len();
    let basis = model.basis();
    let weights: Vec<f64> = density.iter().map(|r| 1.0 / r.sqrt()).collect();
    let mut design = Mat::zeros(n, m - 1);
    for i in 0..n {
        for k in 0..m - 1 {
            design.set(i, k, eigenfunction(basis, k + 1, nodes[i]) * weights[i]);
        }
    }
    let mut e = Mat::zeros(truncation, truncation);
    for j in 0..truncation {
        let sigma = model.eigenvalue(j + 1).sqrt();
        let g: Vec<Complex64> = (0..n)
            .map(|i| eigenfunction(basis, j + 1, nodes[i]) * sigma * weights[i])
            .collect();
        let c = least_squares(&design, &g);
        for k in 0..truncation {
            let own = if k == j { Complex64::new(sigma, 0.0) } else { Complex64::new(0.0, 0.0) };
            let rec = if k < m - 1 { c[k] } else { Complex64::new(0.0, 0.0) };
            e.set(k, j, own - rec);
        }
    }
    e
}

/// Hermitian form `A[k, l] = sigma_k sigma_l (int eta_k conj(eta_l) - (1/n) sum_i w_i^2
/// eta_k(x_i) conj(eta_l(x_i)))`, with the integral by Simpson quadrature.
pub fn discretization_form(
    model: &rkhs_sampling::kernel::SpectralKernelModel,
    nodes: &[f64],
    weights_sq: Option<&[f64]>,
    truncation: usize,
) -> Mat {
    let basis = model.basis();
    let n = nodes.len() as f64;
    let mut a = Mat::zeros(truncation, truncation);
    for k in 0..truncation {
        for l in k..truncation {
            let re = simpson(|x| (eigenfunction(basis, k + 1, x) * eigenfunction(basis, l + 1, x).conj()).re, 0.0, 1.0, 4096);
            let im = simpson(|x| (eigenfunction(basis, k + 1, x) * eigenfunction(basis, l + 1, x).conj()).im, 0.0, 1.0, 4096);
            let mut s = Complex64::new(0.0, 0.0);
            for (i, &x) in nodes.iter().enumerate() {
                let w = weights_sq.map_or(1.0, |w| w[i]);
                s += eigenfunction(basis, k + 1, x) * eigenfunction(basis, l + 1, x).conj() * w;
            }
            let sk = model.eigenvalue(k + 1).sqrt();
            let sl = model.eigenvalue(l + 1).sqrt();
            let v = (Complex64::new(re, im) - s / n) * (sk * sl);
            a.set(k, l, v);
            a.set(l, k, v.conj());
        }
    }
    a
}

/// `sup_{||c|| <= 1} |c* A c|` by Monte Carlo over `samples` unit vectors followed by
/// power iteration; returns `(monte_carlo_max, refined)`.
pub fn sup_of_form(a: &Mat, samples: usize, complex: bool, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut best = 0.0f64;
    let mut best_v = random_unit(rng, a.cols, complex);
    for _ in 0..samples {
        let v = random_unit(rng, a.cols, complex);
        let av = a.apply(&v);
        let q: Complex64 = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
        if q.norm() > best {
            best = q.norm();
            best_v = v;
        }
    }
    let refined = top_abs_eigenvalue(a, best_v, 3000);
    (best, refined)
}
