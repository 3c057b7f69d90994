//! Eigenvalue sequences `lambda_1 >= lambda_2 >= ... > 0` and their tail sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form rule `index -> lambda_index` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum EigenRule {
    /// `lambda_i = i^(-2s)` (Korobov-type decay), requires `2s > 1`.
    Polynomial { s: f64 },
    /// `lambda_i = (1 + (i-1)^2)^(-s)`, i.e. `(1 + k^2)^(-s)` in the frequency `k = i - 1`.
    Sobolev { s: f64 },
    /// `lambda_i = q^(i-1)`.
    Geometric { q: f64 },
    /// Explicit finite list; the kernel has finite rank.
    Finite { values: Vec<f64> },
}

/// Start of the Euler-Maclaurin remainder for the polynomial-type rules.
const EM_START: usize = 100;

impl EigenRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            EigenRule::Polynomial { s } | EigenRule::Sobolev { s } => {
                if !(s.is_finite() && 2.0 * s > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "finite trace requires 2s > 1, got s = {s}"
                    )));
                }
            }
            EigenRule::Geometric { q } => {
                if !(*q > 0.0 && *q < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric rule requires 0 < q < 1, got q = {q}"
                    )));
                }
            }
            EigenRule::Finite { values } => {
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "finite eigenvalue list must be strictly positive".into(),
                    ));
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidParameter(
                        "finite eigenvalue list must be non-increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, index: usize) -> f64 {
        debug_assert!(index >= 1);
        match self {
            EigenRule::Polynomial { s } => (index as f64).powf(-2.0 * s),
            EigenRule::Sobolev { s } => {
                let k = (index - 1) as f64;
                (1.0 + k * k).powf(-s)
            }
            EigenRule::Geometric { q } => q.powi((index - 1) as i32),
            EigenRule::Finite { values } => values.get(index - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn rank(&self) -> Option<usize> {
        match self {
            EigenRule::Finite { values } => Some(values.len()),
            _ => None,
        }
    }

    /// Polynomial decay exponent `p` with `lambda_i ~ i^(-p)`, if any.
    pub fn decay_exponent(&self) -> Option<f64> {
        match self {
            EigenRule::Polynomial { s } | EigenRule::Sobolev { s } => Some(2.0 * s),
            _ => None,
        }
    }

    /// `sum_{i >= from} lambda_i`, accurate to a few ulps of the result.
    pub fn tail_sum(&self, from: usize) -> f64 {
        let from = from.max(1);
        match self {
            EigenRule::Finite { values } => values.iter().skip(from - 1).rev().sum(),
            EigenRule::Geometric { q } => q.powi((from - 1) as i32) / (1.0 - q),
            EigenRule::Polynomial { s } => {
                let start = from.max(EM_START);
                let head: f64 = (from..start).rev().map(|i| self.value(i)).sum();
                head + euler_maclaurin_tail(start as f64, &[(1.0, 2.0 * s)])
            }
            EigenRule::Sobolev { s } => {
                // In u = i - 1 the terms are (1 + u^2)^(-s) = sum_t binom(-s, t) u^(-2s-2t).
                let start = from.max(EM_START + 1);
                let head: f64 = (from..start).rev().map(|i| self.value(i)).sum();
                let mut series = Vec::with_capacity(10);
                let mut coef = 1.0;
                for t in 0..10 {
                    series.push((coef, 2.0 * s + 2.0 * t as f64));
                    coef *= -(s + t as f64) / (t as f64 + 1.0);
                }
                head + euler_maclaurin_tail((start - 1) as f64, &series)
            }
        }
    }

    pub fn total(&self) -> f64 {
        self.tail_sum(1)
    }

    /// Smallest `N` with `tail_sum(N + 1) <= tolerance`, capped at `cap`.
    pub fn truncation_index(&self, tolerance: f64, cap: usize) -> usize {
        if let Some(rank) = self.rank() {
            return (0..=rank.min(cap))
                .find(|&n| self.tail_sum(n + 1) <= tolerance)
                .unwrap_or(rank.min(cap));
        }
        if self.tail_sum(cap + 1) > tolerance {
            return cap;
        }
        let (mut lo, mut hi) = (0usize, cap);
        // Invariant: tail_sum(hi + 1) <= tolerance, and lo is either 0 or fails.
        if self.tail_sum(1) <= tolerance {
            return 0;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.tail_sum(mid + 1) <= tolerance {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// `sum_{k >= start} f(k)` for `f(x) = sum_j c_j x^(-a_j)` with all `a_j > 1`.
fn euler_maclaurin_tail(start: f64, terms: &[(f64, f64)]) -> f64 {
    // Bernoulli weights B_{2j} / (2j)! for the odd derivatives.
    const WEIGHTS: [(usize, f64); 4] = [
        (1, 1.0 / 12.0),
        (3, -1.0 / 720.0),
        (5, 1.0 / 30240.0),
        (7, -1.0 / 1209600.0),
    ];
    let mut total = 0.0;
    for &(c, a) in terms {
        let integral = c * start.powf(1.0 - a) / (a - 1.0);
        let half = 0.5 * c * start.powf(-a);
        let mut correction = 0.0;
        for &(order, w) in &WEIGHTS {
            // d^order/dx^order x^(-a) = (-1)^order a (a+1) ... (a+order-1) x^(-a-order)
            let rising: f64 = (0..order).map(|j| a + j as f64).product();
            let deriv = -rising * start.powf(-a - order as f64);
            correction -= w * c * deriv;
        }
        total += integral + half + correction;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute_tail(rule: &EigenRule, from: usize, upto: usize) -> f64 {
        (from..=upto).rev().map(|i| rule.value(i)).sum()
    }

    #[test]
    fn polynomial_total_is_zeta() {
        let rule = EigenRule::Polynomial { s: 1.0 };
        assert!((rule.total() - PI * PI / 6.0).abs() < 1e-14);
        let rule = EigenRule::Polynomial { s: 2.0 };
        assert!((rule.total() - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn sobolev_total_closed_form() {
        let rule = EigenRule::Sobolev { s: 1.0 };
        let exact = 0.5 * (1.0 + PI / PI.tanh());
        assert!((rule.total() - exact).abs() < 1e-14);
        assert!((rule.total() - 2.07667).abs() < 1e-5);
    }

    #[test]
    fn tails_match_closed_totals_minus_heads() {
        let poly = EigenRule::Polynomial { s: 1.0 };
        let sob = EigenRule::Sobolev { s: 1.0 };
        let sob_total = 0.5 * (1.0 + PI / PI.tanh());
        for from in [1usize, 2, 7, 99, 100, 101, 150, 5000] {
            let exact = PI * PI / 6.0 - brute_tail(&poly, 1, from - 1);
            assert!((poly.tail_sum(from) - exact).abs() < 1e-13, "poly from={from}");
            let exact = sob_total - brute_tail(&sob, 1, from - 1);
            assert!((sob.tail_sum(from) - exact).abs() < 1e-13, "sobolev from={from}");
        }
    }

    #[test]
    fn tails_telescope_across_the_remainder_start() {
        for rule in [
            EigenRule::Polynomial { s: 0.75 },
            EigenRule::Sobolev { s: 0.6 },
            EigenRule::Sobolev { s: 1.5 },
        ] {
            for from in [1usize, 50, 99, 100, 101, 102, 3000] {
                let diff = rule.tail_sum(from) - rule.tail_sum(from + 1);
                let rel = (diff - rule.value(from)).abs() / rule.value(from);
                assert!(rel < 1e-8, "{rule:?} from={from} rel={rel}");
            }
        }
    }

    #[test]
    fn geometric_and_finite() {
        let rule = EigenRule::Geometric { q: 0.5 };
        assert_eq!(rule.value(1), 1.0);
        assert!((rule.tail_sum(1) - 2.0).abs() < 1e-15);
        assert!((rule.tail_sum(3) - 0.5).abs() < 1e-15);
        let rule = EigenRule::Finite {
            values: vec![1.0, 0.5, 0.25],
        };
        assert_eq!(rule.tail_sum(2), 0.75);
        assert_eq!(rule.tail_sum(4), 0.0);
        assert_eq!(rule.truncation_index(0.0, 100), 3);
        assert_eq!(rule.value(9), 0.0);
    }

    #[test]
    fn truncation_index_is_minimal() {
        let rule = EigenRule::Sobolev { s: 2.0 };
        let tol = 1e-8;
        let n = rule.truncation_index(tol, 1 << 20);
        assert!(rule.tail_sum(n + 1) <= tol);
        assert!(rule.tail_sum(n) > tol);
        let geo = EigenRule::Geometric { q: 0.3 };
        let n = geo.truncation_index(1e-12, 1000);
        assert!(geo.tail_sum(n + 1) <= 1e-12 && geo.tail_sum(n) > 1e-12);
    }

    #[test]
    fn validation() {
        assert!(EigenRule::Polynomial { s: 0.5 }.validate().is_err());
        assert!(EigenRule::Geometric { q: 1.0 }.validate().is_err());
        assert!(EigenRule::Finite {
            values: vec![0.5, 1.0]
        }
        .validate()
        .is_err());
        assert!(EigenRule::Finite { values: vec![] }.validate().is_ok());
    }
}
