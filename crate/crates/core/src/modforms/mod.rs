//! Level-1 modular forms: exact q-expansions, the echelonized cusp-form
//! basis, the numerical Hecke eigenbasis, and coefficient-bound constants.

pub mod basis;
pub mod eigen;
pub mod qseries;

pub use basis::{char_poly, dim_cusp_forms, hecke_operator_matrix, miller_basis};
pub use eigen::{combine_eigenforms, eigenforms, linear_combination, EigenSystem};
pub use qseries::{delta_series, eisenstein_series, QSeries};

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::mp;

/// Where a numerical cusp form came from.
#[derive(Debug, Clone)]
pub enum Provenance {
    /// index into the eigenvalue-sorted eigenbasis of S_k
    Eigenform(usize),
    /// raw combination vector over the eigenbasis and the leading value the
    /// combination was normalized by
    Combination {
        vector: Vec<Float>,
        leading_value: Float,
    },
}

/// A numerical cusp form f = q^N + sum_{n>N} c(n) q^n with high-precision
/// real coefficients (index 0 holds c(1)).
#[derive(Debug, Clone)]
pub struct CuspForm {
    pub k: u32,
    pub vanishing_order: usize,
    pub(crate) coeffs: Vec<Float>,
    pub provenance: Provenance,
    pub precision_digits: u32,
}

impl CuspForm {
    /// Wrap coefficients already normalized to c(N) = 1.
    pub(crate) fn from_normalized_coeffs(
        k: u32,
        vanishing_order: usize,
        coeffs: Vec<Float>,
        provenance: Provenance,
        precision_digits: u32,
    ) -> Result<Self> {
        if k % 2 != 0 || k < 12 {
            return Err(Error::invalid(format!("cusp form weight must be even >= 12, got {k}")));
        }
        if vanishing_order < 1 || vanishing_order > (k / 12) as usize {
            return Err(Error::invalid(format!(
                "vanishing order {vanishing_order} violates 1 <= N <= k/12 at k={k}"
            )));
        }
        if coeffs.len() < vanishing_order {
            return Err(Error::invalid("too few coefficients for the vanishing order"));
        }
        let bits = mp::bits_for_digits(precision_digits);
        let tol = mp::pow10(bits, -((precision_digits / 2) as i32));
        let lead_err = Float::with_val(bits, &coeffs[vanishing_order - 1] - 1u32).abs();
        if lead_err > tol {
            return Err(Error::numerical(format!(
                "leading coefficient not normalized: off by {:.3e}",
                lead_err.to_f64()
            )));
        }
        for (idx, c) in coeffs[..vanishing_order - 1].iter().enumerate() {
            if Float::with_val(bits, c.abs_ref()) > tol {
                return Err(Error::numerical(format!(
                    "coefficient c({}) nonzero below the vanishing order",
                    idx + 1
                )));
            }
        }
        Ok(CuspForm {
            k,
            vanishing_order,
            coeffs,
            provenance,
            precision_digits,
        })
    }

    /// c(n), 1-based.
    pub fn coeff(&self, n: usize) -> &Float {
        &self.coeffs[n - 1]
    }

    pub fn n_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    /// Upper bound on C_f available from the provenance: 1 for eigenforms
    /// (Deligne), sum |c_j| / |leading value| for combinations.
    pub fn deligne_upper(&self) -> Option<Float> {
        let bits = mp::bits_for_digits(self.precision_digits);
        match &self.provenance {
            Provenance::Eigenform(_) => Some(Float::with_val(bits, 1)),
            Provenance::Combination {
                vector,
                leading_value,
            } => {
                let mut sum = Float::with_val(bits, 0);
                for c in vector {
                    sum += Float::with_val(bits, c.abs_ref());
                }
                let lead = Float::with_val(bits, leading_value.abs_ref());
                Some(sum / lead)
            }
        }
    }
}

/// Number of divisors of n.
pub(crate) fn sigma0(n: usize) -> u32 {
    let mut count = 0u32;
    let mut d = 1usize;
    while d * d <= n {
        if n % d == 0 {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}

/// Truncated lower estimate and provenance-derived upper bound for the
/// minimal constant C_f with |c(n)| <= C_f sigma_0(n) n^{(k-1)/2}.
pub fn deligne_constant_estimate(f: &CuspForm, n_max: usize) -> Result<(Float, Option<Float>)> {
    if f.n_coeffs() < n_max {
        return Err(Error::invalid(format!(
            "deligne_constant_estimate needs {n_max} coefficients, form has {}",
            f.n_coeffs()
        )));
    }
    let bits = mp::bits_for_digits(f.precision_digits);
    let half_power = Float::with_val(bits, f.k - 1) / 2u32;
    let mut lower = Float::with_val(bits, 0);
    for n in f.vanishing_order..=n_max {
        let denom = Float::with_val(bits, n as u32).pow(&half_power) * sigma0(n);
        let ratio = Float::with_val(bits, f.coeff(n).abs_ref()) / denom;
        if ratio > lower {
            lower = ratio;
        }
    }
    Ok((lower, f.deligne_upper()))
}

/// Explicit C_f upper bound from the first r = dim S_k coefficients:
/// sqrt(log k) (11 sqrt(sum |c(m)|^2 / m^{k-1})
///              + e^{18.72} 41.41^{k/2} / k^{(k-1)/2} |sum c(m) e^{-7.288 m}|).
pub fn jenkins_rouse_bound(f: &CuspForm) -> Result<Float> {
    let r = dim_cusp_forms(f.k)?;
    if f.n_coeffs() < r {
        return Err(Error::invalid(format!(
            "jenkins_rouse_bound needs {r} coefficients, form has {}",
            f.n_coeffs()
        )));
    }
    let bits = mp::bits_for_digits(f.precision_digits);
    let k = f.k;

    let mut quad_sum = Float::with_val(bits, 0);
    let mut exp_sum = Float::with_val(bits, 0);
    for m in 1..=r {
        let c = f.coeff(m);
        let mk = Float::with_val(bits, m as u32).pow(k - 1);
        quad_sum += Float::with_val(bits, c * c) / mk;
        let damp = Float::with_val(bits, -7.288f64 * m as f64).exp();
        exp_sum += Float::with_val(bits, c * &damp);
    }
    let first = quad_sum.sqrt() * 11u32;
    let second = Float::with_val(bits, 18.72f64).exp()
        * Float::with_val(bits, 41.41f64).pow(Float::with_val(bits, k) / 2u32)
        / Float::with_val(bits, k).pow(Float::with_val(bits, k - 1) / 2u32)
        * exp_sum.abs();
    let log_k = Float::with_val(bits, k).ln();
    Ok(log_k.sqrt() * (first + second))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma0_small_values() {
        assert_eq!(sigma0(1), 1);
        assert_eq!(sigma0(6), 4);
        assert_eq!(sigma0(12), 6);
        assert_eq!(sigma0(16), 5);
    }

    #[test]
    fn deligne_lower_for_delta_matches_direct_evaluation() {
        let (_, forms) = eigenforms(12, 50).unwrap();
        let f = &forms[0];
        let (lower, upper) = deligne_constant_estimate(f, 10).unwrap();
        let bits = mp::bits_for_digits(50);

        // independent evaluation from exact tau values
        let delta = delta_series(11).unwrap();
        let mut expect = Float::with_val(bits, 0);
        for n in 1..=10usize {
            let denom = Float::with_val(bits, n as u32).pow(&(Float::with_val(bits, 11u32) / 2u32))
                * sigma0(n);
            let r = Float::with_val(bits, delta.coeff(n)).abs() / denom;
            if r > expect {
                expect = r;
            }
        }
        let d = Float::with_val(bits, &lower - &expect).abs();
        assert!(d < mp::pow10(bits, -35));
        // Deligne: eigenform ratios never exceed 1
        assert!(lower <= Float::with_val(bits, 1) + mp::pow10(bits, -30));
        assert_eq!(upper.unwrap(), 1);
    }

    #[test]
    fn deligne_lower_is_monotone_in_n_max() {
        let (_, forms) = eigenforms(24, 40).unwrap();
        let f = &forms[0];
        let mut prev = Float::with_val(64, 0);
        for n_max in [5usize, 10, 20, 40] {
            let (lower, _) = deligne_constant_estimate(f, n_max).unwrap();
            assert!(lower >= prev);
            prev = lower;
        }
    }

    #[test]
    fn combination_upper_is_triangle_bound() {
        let (_, forms) = eigenforms(24, 40).unwrap();
        let bits = mp::bits_for_digits(40);
        let combo = combine_eigenforms(
            &forms,
            &[Float::with_val(bits, 2), Float::with_val(bits, 3)],
        )
        .unwrap();
        let (lower, upper) = deligne_constant_estimate(&combo, 20).unwrap();
        let upper = upper.unwrap();
        // (2 + 3)/5 = 1
        let d = Float::with_val(bits, &upper - 1u32).abs();
        assert!(d < mp::pow10(bits, -30));
        assert!(lower <= upper + mp::pow10(bits, -30));
    }

    #[test]
    fn jenkins_rouse_upper_dominates_deligne_lower_for_delta() {
        let (_, forms) = eigenforms(12, 50).unwrap();
        let f = &forms[0];
        let jr = jenkins_rouse_bound(f).unwrap();
        let (lower, _) = deligne_constant_estimate(f, 30).unwrap();
        assert!(jr > 0);
        assert!(jr >= lower);
        // first summand: sqrt(log 12) * 11 * sqrt(1/1) with r = 1
        let bits = mp::bits_for_digits(50);
        let expect = Float::with_val(bits, 12u32).ln().sqrt() * 11u32;
        // second summand is strictly positive, so jr exceeds the first part
        assert!(jr > expect);
    }

    #[test]
    fn jenkins_rouse_second_summand_decreases_in_weight() {
        // for a fixed single-leading-coefficient profile the k-dependent
        // prefactor 41.41^{k/2}/k^{(k-1)/2} collapses as k grows
        let bits = mp::bits_for_digits(50);
        let prefactor = |k: u32| {
            Float::with_val(bits, 41.41f64).pow(Float::with_val(bits, k) / 2u32)
                / Float::with_val(bits, k).pow(Float::with_val(bits, k - 1) / 2u32)
        };
        let p60 = prefactor(60);
        let p80 = prefactor(80);
        let p100 = prefactor(100);
        assert!(p80 < p60);
        assert!(p100 < p80);
    }
}
