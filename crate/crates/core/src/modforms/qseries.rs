//! Exact q-expansion arithmetic over the rationals.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Truncated q-expansion of a weight-`weight` modular object with exact
/// rational coefficients `coeffs[0..n_terms)` (coefficient of q^n at index n).
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    weight: u32,
    coeffs: Vec<Rational>,
}

impl QSeries {
    pub fn new(weight: u32, coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "QSeries needs at least one coefficient");
        QSeries { weight, coeffs }
    }

    pub fn one(weight: u32, n_terms: usize) -> Self {
        let mut coeffs = vec![Rational::new(); n_terms];
        coeffs[0] = Rational::from(1);
        QSeries { weight, coeffs }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// True when the constant term vanishes.
    pub fn is_cusp(&self) -> bool {
        self.coeffs[0] == 0
    }

    pub fn truncate(&self, n_terms: usize) -> QSeries {
        assert!(n_terms >= 1 && n_terms <= self.coeffs.len());
        QSeries::new(self.weight, self.coeffs[..n_terms].to_vec())
    }

    /// Sum of two expansions of equal weight, truncated to the shorter input.
    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        if self.weight != other.weight {
            return Err(Error::invalid(format!(
                "cannot add weight {} to weight {}",
                self.weight, other.weight
            )));
        }
        let n = self.n_terms().min(other.n_terms());
        let coeffs = (0..n)
            .map(|i| Rational::from(&self.coeffs[i] + &other.coeffs[i]))
            .collect();
        Ok(QSeries::new(self.weight, coeffs))
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add(&other.scalar_mul(&Rational::from(-1)))
    }

    pub fn scalar_mul(&self, c: &Rational) -> QSeries {
        let coeffs = self.coeffs.iter().map(|x| Rational::from(x * c)).collect();
        QSeries::new(self.weight, coeffs)
    }

    /// Product, truncated to the shorter input; weights add.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.n_terms().min(other.n_terms());
        let mut coeffs = vec![Rational::new(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                if *b != 0 {
                    coeffs[i + j] += Rational::from(a * b);
                }
            }
        }
        QSeries::new(self.weight + other.weight, coeffs)
    }

    /// e-th power by repeated squaring, truncated to this input's length.
    pub fn pow(&self, e: u32) -> QSeries {
        let n = self.n_terms();
        let mut result = QSeries::one(0, n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// True when every stored coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom() == &Integer::from(1))
    }
}

/// sigma_p(n) = sum of d^p over divisors d of n, for n = 0..n_terms-1
/// (entry 0 unused, kept 0).
fn divisor_power_sums(power: u32, n_terms: usize) -> Vec<Integer> {
    let mut sums = vec![Integer::new(); n_terms];
    for d in 1..n_terms {
        let dp = Integer::from(d).pow(power);
        let mut m = d;
        while m < n_terms {
            sums[m] += &dp;
            m += d;
        }
    }
    sums
}

/// Normalized Eisenstein series E4 or E6 to `n_terms` exact coefficients.
pub fn eisenstein_series(weight: u32, n_terms: usize) -> Result<QSeries> {
    if n_terms < 1 {
        return Err(Error::invalid("n_terms must be >= 1"));
    }
    let (mult, power) = match weight {
        4 => (Integer::from(240), 3u32),
        6 => (Integer::from(-504), 5u32),
        _ => {
            return Err(Error::invalid(format!(
                "eisenstein_series supports weights 4 and 6, got {weight}"
            )))
        }
    };
    let sums = divisor_power_sums(power, n_terms);
    let mut coeffs = vec![Rational::new(); n_terms];
    coeffs[0] = Rational::from(1);
    for (n, s) in sums.iter().enumerate().skip(1) {
        coeffs[n] = Rational::from(Integer::from(&mult * s));
    }
    Ok(QSeries::new(weight, coeffs))
}

/// Discriminant cusp form Delta = (E4^3 - E6^2)/1728 to `n_terms` terms.
pub fn delta_series(n_terms: usize) -> Result<QSeries> {
    if n_terms < 2 {
        return Err(Error::invalid("delta_series needs n_terms >= 2"));
    }
    let e4 = eisenstein_series(4, n_terms)?;
    let e6 = eisenstein_series(6, n_terms)?;
    let num = e4.pow(3).sub(&e6.pow(2))?;
    let delta = num.scalar_mul(&Rational::from((1, 1728)));
    debug_assert!(delta.is_cusp());
    debug_assert_eq!(*delta.coeff(1), 1);
    assert!(delta.is_integral(), "Delta coefficients must be integral");
    Ok(QSeries::new(12, delta.coeffs().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle for tau: expand q * prod_{k>=1} (1 - q^k)^24 by
    /// direct binomial multiplication, never touching Eisenstein series.
    fn tau_oracle(n_terms: usize) -> Vec<Integer> {
        let mut prod = vec![Integer::new(); n_terms];
        prod[0] = Integer::from(1);
        for k in 1..n_terms {
            let mut next = vec![Integer::new(); n_terms];
            for j in 0..=24usize {
                if j * k >= n_terms {
                    break;
                }
                let c = Integer::from(24).binomial(j as u32)
                    * if j % 2 == 1 { -1 } else { 1 };
                for i in 0..n_terms - j * k {
                    if prod[i] != 0 {
                        next[i + j * k] += Integer::from(&c * &prod[i]);
                    }
                }
            }
            prod = next;
        }
        // shift by one power of q: tau(n) = prod[n-1]
        let mut tau = vec![Integer::new(); n_terms];
        for n in 1..n_terms {
            tau[n] = prod[n - 1].clone();
        }
        tau
    }

    #[test]
    fn eisenstein_normalization_and_first_coeffs() {
        let e4 = eisenstein_series(4, 3).unwrap();
        assert_eq!(*e4.coeff(0), 1);
        // sigma_3(1) = 1
        assert_eq!(*e4.coeff(1), 240);
        let e6 = eisenstein_series(6, 3).unwrap();
        // sigma_5(2) = 1 + 32 = 33
        assert_eq!(*e6.coeff(2), Rational::from(-504 * 33));
        assert!(eisenstein_series(8, 3).is_err());
        assert!(eisenstein_series(4, 0).is_err());
    }

    #[test]
    fn delta_against_eta_product_oracle() {
        let n = 16;
        let delta = delta_series(n).unwrap();
        let tau = tau_oracle(n);
        assert_eq!(*delta.coeff(1), 1);
        assert_eq!(*delta.coeff(2), tau[2]);
        assert_eq!(tau[2], -24);
        for m in 1..n {
            assert_eq!(*delta.coeff(m), tau[m], "tau({m}) mismatch");
        }
        // multiplicativity spot check from the same oracle
        assert_eq!(
            Integer::from(&tau[2] * &tau[3]),
            tau[6],
            "tau(6) = tau(2)tau(3)"
        );
    }

    #[test]
    fn product_truncates_to_shorter_input() {
        let e4 = eisenstein_series(4, 10).unwrap();
        let e6 = eisenstein_series(6, 5).unwrap();
        let p = e4.mul(&e6);
        assert_eq!(p.n_terms(), 5);
        assert_eq!(p.weight(), 10);
    }

    #[test]
    fn add_rejects_mixed_weights() {
        let e4 = eisenstein_series(4, 5).unwrap();
        let e6 = eisenstein_series(6, 5).unwrap();
        assert!(e4.add(&e6).is_err());
    }
}
