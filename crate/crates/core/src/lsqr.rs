//! LSQR for dense complex least-squares problems `min ||A x - b||`.

use num_complex::Complex64;

use crate::linalg::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqrOutcome {
    pub iterations: usize,
    /// Final residual norm estimate `||A x - b||`.
    pub residual: f64,
    pub converged: bool,
}

fn scale(v: &mut CVector, s: f64) {
    *v *= Complex64::new(s, 0.0);
}

/// Solve with Golub-Kahan bidiagonalization; `tol` bounds `||A* r|| / (||A|| ||r||)`.
pub fn lsqr(a: &CMatrix, b: &CVector, tol: f64, max_iter: usize) -> (CVector, LsqrOutcome) {
    let n = a.ncols();
    let mut x = CVector::zeros(n);
    let mut u = b.clone();
    let mut beta = u.norm();
    if beta == 0.0 || n == 0 {
        return (
            x,
            LsqrOutcome {
                iterations: 0,
                residual: 0.0,
                converged: true,
            },
        );
    }
    scale(&mut u, 1.0 / beta);
    let mut v = a.ad_mul(&u);
    let mut alpha = v.norm();
    if alpha == 0.0 {
        return (
            x,
            LsqrOutcome {
                iterations: 0,
                residual: beta,
                converged: true,
            },
        );
    }
    scale(&mut v, 1.0 / alpha);
    let mut w = v.clone();
    let mut phi_bar = beta;
    let mut rho_bar = alpha;
    let mut anorm_sq = 0.0;
    for it in 1..=max_iter {
        u = a * &v - &u * Complex64::new(alpha, 0.0);
        beta = u.norm();
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
        }
        anorm_sq += alpha * alpha + beta * beta;
        v = a.ad_mul(&u) - &v * Complex64::new(beta, 0.0);
        alpha = v.norm();
        if alpha > 0.0 {
            scale(&mut v, 1.0 / alpha);
        }
        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rho_bar = -c * alpha;
        let phi = c * phi_bar;
        phi_bar *= s;
        x += &w * Complex64::new(phi / rho, 0.0);
        w = &v - &w * Complex64::new(theta / rho, 0.0);
        // ||A* r|| = phi_bar * alpha * |c|.
        let normal = phi_bar * alpha * c.abs();
        let anorm = anorm_sq.sqrt();
        if phi_bar == 0.0 || normal <= tol * anorm * phi_bar || alpha == 0.0 {
            return (
                x,
                LsqrOutcome {
                    iterations: it,
                    residual: phi_bar,
                    converged: true,
                },
            );
        }
    }
    (
        x,
        LsqrOutcome {
            iterations: max_iter,
            residual: phi_bar,
            converged: false,
        },
    )
}
