//! Weighted least-squares recovery on `span{eta_1, ..., eta_{m-1}}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::density::NodeSet;
use crate::error::{Error, Result};
use crate::kernel::{BasisStream, SpectralKernelModel};
use crate::linalg::{hermitian_eigenvalues, hermitize, singular_values, CMatrix, CVector};
use crate::lsqr::lsqr;

/// Relative singular-value threshold below which the design counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Above this many columns the iterative solver is used by default.
pub const DIRECT_SOLVE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// QR for small systems, LSQR beyond [`DIRECT_SOLVE_LIMIT`] columns.
    #[default]
    Auto,
    Qr,
    Lsqr,
}

/// Weighted design `L[j, k] = eta_k(x_j) / sqrt(rho(x_j))`, its Gram matrix
/// `H = L* L / n` and their spectral data.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    pub n: usize,
    pub m: usize,
    pub nodes: Vec<f64>,
    pub matrix: CMatrix,
    pub weights: Vec<f64>,
    pub gram: CMatrix,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

pub fn assemble_design(model: &SpectralKernelModel, nodes: &NodeSet, m: usize) -> Result<DesignSystem> {
    if m < 2 {
        return Err(Error::InvalidIndex(format!("recovery requires m >= 2, got {m}")));
    }
    let n = nodes.n();
    let cols = m - 1;
    if n < cols {
        return Err(Error::Precondition(format!(
            "need at least m - 1 = {cols} nodes, got {n}"
        )));
    }
    if !nodes.is_distinct() {
        return Err(Error::CoincidentNodes);
    }
    let domain = model.domain();
    for &x in &nodes.nodes {
        domain.check(x)?;
    }
    let weights = nodes.weights();
    let mut matrix = CMatrix::zeros(n, cols);
    let mut stream = BasisStream::new(model.basis(), &nodes.nodes);
    for k in 0..cols {
        let values = stream.advance();
        for (j, (v, w)) in values.iter().zip(&weights).enumerate() {
            matrix[(j, k)] = v * *w;
        }
    }
    let gram = hermitize(matrix.ad_mul(&matrix) / Complex64::new(n as f64, 0.0));
    let eig = hermitian_eigenvalues(gram.clone());
    let sv = singular_values(&matrix);
    Ok(DesignSystem {
        n,
        m,
        lambda_min: eig[0],
        lambda_max: *eig.last().unwrap(),
        sigma_min: *sv.last().unwrap(),
        sigma_max: sv[0],
        nodes: nodes.nodes.clone(),
        matrix,
        weights,
        gram,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub values: Vec<Complex64>,
    /// `||L c - g||`.
    pub residual: f64,
}

impl DesignSystem {
    pub fn is_full_rank(&self) -> bool {
        self.sigma_max > 0.0 && self.sigma_min >= RANK_TOLERANCE * self.sigma_max
    }

    pub fn ensure_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::RankDeficient {
                sigma_min: self.sigma_min,
                sigma_max: self.sigma_max,
            })
        }
    }

    /// `||(L* L)^-1 L*||` from the smallest singular value of `L`.
    pub fn pseudo_inverse_norm(&self) -> f64 {
        1.0 / self.sigma_min
    }

    /// The same norm through the Gram spectrum, `(n lambda_min(H))^(-1/2)`.
    pub fn pseudo_inverse_norm_from_gram(&self) -> f64 {
        1.0 / (self.n as f64 * self.lambda_min).sqrt()
    }

    /// `B = (L* L)^-1 L* = R^-1 Q*`, of shape `(m-1) x n`.
    pub fn pseudo_inverse(&self) -> Result<CMatrix> {
        self.ensure_full_rank()?;
        let qr = self.matrix.clone().qr();
        let r = qr.r();
        let qt = qr.q().adjoint();
        r.solve_upper_triangular(&qt).ok_or(Error::RankDeficient {
            sigma_min: self.sigma_min,
            sigma_max: self.sigma_max,
        })
    }

    /// Weighted right-hand side `g_j = f(x_j) / sqrt(rho(x_j))`.
    pub fn weighted_samples(&self, samples: &[Complex64]) -> Result<CVector> {
        if samples.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                self.n,
                samples.len()
            )));
        }
        Ok(CVector::from_iterator(
            self.n,
            samples.iter().zip(&self.weights).map(|(f, w)| f * *w),
        ))
    }

    pub fn solve(&self, samples: &[Complex64], solver: Solver) -> Result<Coefficients> {
        self.ensure_full_rank()?;
        let g = self.weighted_samples(samples)?;
        let use_lsqr = match solver {
            Solver::Auto => self.m - 1 > DIRECT_SOLVE_LIMIT,
            Solver::Qr => false,
            Solver::Lsqr => true,
        };
        let c = if use_lsqr {
            let (x, _) = lsqr(&self.matrix, &g, 1e-15, 4 * (self.m - 1) + 100);
            x
        } else {
            let qr = self.matrix.clone().qr();
            let qtg = qr.q().ad_mul(&g);
            qr.r()
                .solve_upper_triangular(&qtg)
                .ok_or(Error::RankDeficient {
                    sigma_min: self.sigma_min,
                    sigma_max: self.sigma_max,
                })?
        };
        let residual = (&self.matrix * &c - &g).norm();
        Ok(Coefficients {
            values: c.iter().copied().collect(),
            residual,
        })
    }
}

/// Least-squares coefficients of `f` from its samples at the nodes of `ds`.
pub fn recover(ds: &DesignSystem, samples: &[Complex64]) -> Result<Coefficients> {
    ds.solve(samples, Solver::Auto)
}

/// Evaluate `sum_k c_k eta_k(x)`.
pub fn evaluate_approximant(model: &SpectralKernelModel, coefficients: &[Complex64], x: f64) -> Complex64 {
    let mut stream = BasisStream::new(model.basis(), std::slice::from_ref(&x));
    coefficients.iter().map(|c| c * stream.advance()[0]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramCheck {
    pub lambda_min: f64,
    pub pseudo_inverse_norm: f64,
    /// `lambda_min(H) >= 1/2`.
    pub lambda_ok: bool,
    /// `sqrt(2/(3n)) <= ||(L* L)^-1 L*|| <= sqrt(2/n)`.
    pub norm_ok: bool,
}

pub fn gram_eig_check(ds: &DesignSystem) -> GramCheck {
    let n = ds.n as f64;
    let norm = if ds.is_full_rank() {
        ds.pseudo_inverse_norm()
    } else {
        f64::INFINITY
    };
    GramCheck {
        lambda_min: ds.lambda_min,
        pseudo_inverse_norm: norm,
        lambda_ok: ds.lambda_min >= 0.5,
        norm_ok: norm >= (2.0 / (3.0 * n)).sqrt() && norm <= (2.0 / n).sqrt(),
    }
}

/// Real part of the Gram matrix for a real basis, for callers that want `f64` kernels.
pub fn real_gram(ds: &DesignSystem) -> DMatrix<f64> {
    ds.gram.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{DensityKind, SamplingDensity};
    use crate::kernel::{Basis, EigenRule};

    fn fourier() -> SpectralKernelModel {
        SpectralKernelModel::new(Basis::Fourier, EigenRule::Polynomial { s: 1.0 }, 0.0).unwrap()
    }

    #[test]
    fn single_constant_column() {
        let model = fourier();
        let d = SamplingDensity::new(&model, DensityKind::Plain, None).unwrap();
        let nodes = NodeSet::from_points(vec![0.3], &d).unwrap();
        let ds = assemble_design(&model, &nodes, 2).unwrap();
        assert_eq!(ds.matrix[(0, 0)], Complex64::new(1.0, 0.0));
        assert!((ds.lambda_min - 1.0).abs() < 1e-15 && (ds.lambda_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equispaced_fourier_gram_is_identity() {
        let model = fourier();
        let d = SamplingDensity::new(&model, DensityKind::Plain, None).unwrap();
        let n = 16;
        let nodes = NodeSet::from_points((0..n).map(|i| i as f64 / n as f64).collect(), &d).unwrap();
        let ds = assemble_design(&model, &nodes, 10).unwrap();
        let eye = CMatrix::identity(9, 9);
        assert!((&ds.gram - eye).norm() < 1e-13);
        let check = gram_eig_check(&ds);
        assert!(check.lambda_ok && check.norm_ok);
        assert!((check.pseudo_inverse_norm - (1.0 / n as f64).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn synthetic_small_eigenvalue_fails_predicate() {
        let model = fourier();
        let d = SamplingDensity::new(&model, DensityKind::Plain, None).unwrap();
        let nodes = NodeSet::from_points(vec![0.1, 0.2, 0.3, 0.4], &d).unwrap();
        let mut ds = assemble_design(&model, &nodes, 3).unwrap();
        ds.lambda_min = 0.4;
        assert!(!gram_eig_check(&ds).lambda_ok);
    }

    #[test]
    fn lsqr_and_qr_agree() {
        let model = fourier();
        let d = SamplingDensity::new(&model, DensityKind::Plain, None).unwrap();
        let nodes = d.draw_nodes(60, 3).unwrap();
        let ds = assemble_design(&model, &nodes, 12).unwrap();
        let samples: Vec<Complex64> = nodes
            .nodes
            .iter()
            .map(|&x| Complex64::new((7.0 * x).sin(), x * x))
            .collect();
        let a = ds.solve(&samples, Solver::Qr).unwrap();
        let b = ds.solve(&samples, Solver::Lsqr).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_design_is_flagged() {
        let model = fourier();
        let d = SamplingDensity::new(&model, DensityKind::Plain, None).unwrap();
        let nodes = NodeSet::from_points(vec![0.0, 0.5], &d).unwrap();
        assert!(matches!(
            assemble_design(&model, &nodes, 4),
            Err(Error::Precondition(_))
        ));
        // Zero density rows carry zero weight, leaving a single informative row.
        let mut nodes = NodeSet::from_points(vec![0.1, 0.2, 0.3], &d).unwrap();
        nodes.density = vec![1.0, 0.0, 0.0];
        let ds = assemble_design(&model, &nodes, 3).unwrap();
        assert!(!ds.is_full_rank());
        let err = recover(&ds, &[Complex64::new(1.0, 0.0); 3]).unwrap_err();
        assert!(err.is_flaggable());
        let dup = NodeSet::from_points(vec![0.1, 0.1], &d).unwrap();
        assert!(matches!(assemble_design(&model, &dup, 2), Err(Error::CoincidentNodes)));
    }
}
