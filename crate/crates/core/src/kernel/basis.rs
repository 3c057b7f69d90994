//! Closed-form orthonormal systems on the built-in one-dimensional domains.
//!
//! Indices are 1-based and follow the ordering of the singular values: index 1 is
//! always the constant function.

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain carrying the uniform probability measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `[0, 1)` with periodic identification.
    Torus,
    /// The closed interval `[0, 1]`.
    UnitInterval,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Torus => "torus-1d",
            Domain::UnitInterval => "unit-interval",
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            Domain::Torus => (0.0..1.0).contains(&x),
            Domain::UnitInterval => (0.0..=1.0).contains(&x),
        }
    }

    pub fn check(self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                x,
                domain: self.name(),
            })
        }
    }

    /// Total mass of the base measure.
    pub fn mass(self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Exponentials `exp(2 pi i nu x)` on the torus, frequencies ordered `0, 1, -1, 2, -2, ...`.
    Fourier,
    /// `1, sqrt(2) cos(pi x), sqrt(2) cos(2 pi x), ...` on the unit interval.
    Cosine,
}

impl Basis {
    pub fn domain(self) -> Domain {
        match self {
            Basis::Fourier => Domain::Torus,
            Basis::Cosine => Domain::UnitInterval,
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Basis::Cosine)
    }

    /// Signed frequency of the `index`-th function.
    pub fn frequency(self, index: usize) -> i64 {
        debug_assert!(index >= 1);
        match self {
            Basis::Fourier => {
                let i = index as i64;
                if i % 2 == 0 {
                    i / 2
                } else {
                    -(i - 1) / 2
                }
            }
            Basis::Cosine => index as i64 - 1,
        }
    }

    pub fn eval(self, index: usize, x: f64) -> Complex64 {
        match self {
            Basis::Fourier => Complex64::cis(TAU * self.frequency(index) as f64 * x),
            Basis::Cosine => {
                if index == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(SQRT_2 * (PI * (index - 1) as f64 * x).cos(), 0.0)
                }
            }
        }
    }

    /// `sup_x |eta_index(x)|^2`, attained at `x = 0` for both systems.
    pub fn sup_sq(self, index: usize) -> f64 {
        match self {
            Basis::Fourier => 1.0,
            Basis::Cosine => {
                if index == 1 {
                    1.0
                } else {
                    2.0
                }
            }
        }
    }

    /// Evaluate `eta_1(x), ..., eta_count(x)` into `out` using stable recurrences.
    pub fn eval_row(self, x: f64, out: &mut [Complex64]) {
        let mut stream = BasisStream::new(self, std::slice::from_ref(&x));
        for slot in out.iter_mut() {
            *slot = stream.advance()[0];
        }
    }
}

const REANCHOR: u64 = 256;

/// Walks the basis index by index, producing `eta_k(x_i)` for a fixed set of points.
///
/// Trigonometric recurrences are re-anchored against libm every few hundred steps
/// so the accumulated error stays near machine precision for large truncations.
pub struct BasisStream<'a> {
    basis: Basis,
    points: &'a [f64],
    index: usize,
    // z^f for the current frequency f, with z = exp(2 pi i x) (Fourier) or exp(pi i x) (cosine).
    state_a: Vec<Complex64>,
    step: Vec<Complex64>,
    half_step: Vec<Complex64>,
    freq: u64,
    values: Vec<Complex64>,
}

impl<'a> BasisStream<'a> {
    pub fn new(basis: Basis, points: &'a [f64]) -> Self {
        let n = points.len();
        Self {
            basis,
            points,
            index: 0,
            state_a: vec![Complex64::new(1.0, 0.0); n],
            step: points.iter().map(|&x| Complex64::cis(TAU * x)).collect(),
            half_step: points.iter().map(|&x| Complex64::cis(PI * x)).collect(),
            freq: 0,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Index of the values currently held (0 before the first call to `advance`).
    pub fn index(&self) -> usize {
        self.index
    }

    /// Move to the next index and return its values at every point.
    pub fn advance(&mut self) -> &[Complex64] {
        self.index += 1;
        match self.basis {
            Basis::Fourier => self.advance_fourier(),
            Basis::Cosine => self.advance_cosine(),
        }
        &self.values
    }

    fn advance_fourier(&mut self) {
        let k = self.index;
        if k == 1 {
            self.values.fill(Complex64::new(1.0, 0.0));
            return;
        }
        if k % 2 == 0 {
            self.freq += 1;
            let f = self.freq;
            if f % REANCHOR == 0 {
                for (z, &x) in self.state_a.iter_mut().zip(self.points) {
                    *z = Complex64::cis(TAU * ((f as f64 * x).fract()));
                }
            } else {
                for (z, s) in self.state_a.iter_mut().zip(&self.step) {
                    *z *= s;
                }
            }
            self.values.copy_from_slice(&self.state_a);
        } else {
            for (v, z) in self.values.iter_mut().zip(&self.state_a) {
                *v = z.conj();
            }
        }
    }

    fn advance_cosine(&mut self) {
        let k = self.index;
        if k == 1 {
            self.values.fill(Complex64::new(1.0, 0.0));
            return;
        }
        self.freq += 1;
        let f = self.freq;
        if f % REANCHOR == 0 {
            for (z, &x) in self.state_a.iter_mut().zip(self.points) {
                *z = cis_pi_mul(f, x);
            }
        } else {
            for (z, s) in self.state_a.iter_mut().zip(&self.half_step) {
                *z *= s;
            }
        }
        for (v, z) in self.values.iter_mut().zip(&self.state_a) {
            *v = Complex64::new(SQRT_2 * z.re, 0.0);
        }
    }
}

/// `exp(i pi f x)` with the argument reduced modulo 2 before calling libm.
fn cis_pi_mul(f: u64, x: f64) -> Complex64 {
    let t = (f as f64 * x).rem_euclid(2.0);
    Complex64::cis(PI * t)
}
