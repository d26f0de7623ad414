//! Numerical Hecke eigenbasis: diagonalize T_2 on the echelon basis at
//! working precision, with residual certification and precision escalation.

use rug::{Float, Integer, Rational};

use super::basis::{char_poly, dim_cusp_forms, hecke_operator_matrix, miller_basis};
use super::{CuspForm, Provenance};
use crate::error::{Error, Result};
use crate::lfunctions::required_terms;
use crate::mp;
use crate::zeros::real_roots_of_integer_poly;

/// T_2 eigendata on the echelon basis of S_k.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub k: u32,
    pub r: usize,
    pub t2_matrix: Vec<Vec<Integer>>,
    /// ascending
    pub eigenvalues: Vec<Float>,
    /// eigenvectors[j] = coordinates of the j-th eigenform in the echelon
    /// basis, normalized so the q^1 coordinate is 1
    pub eigenvectors: Vec<Vec<Float>>,
    /// max_j ||T2 v_j - lambda_j v_j||_inf / ||v_j||_inf
    pub residual: Float,
    pub precision_digits: u32,
}

/// Escalation policy: doubling the digit count, at most this many retries.
const MAX_ESCALATIONS: u32 = 3;

/// The normalized eigenbasis of S_k at `digits` working precision, with
/// coefficients extended far enough for the L-value engine at this precision.
pub fn eigenforms(k: u32, digits: u32) -> Result<(EigenSystem, Vec<CuspForm>)> {
    if k % 2 != 0 || k < 12 {
        return Err(Error::invalid(format!(
            "eigenforms needs even k >= 12, got {k}"
        )));
    }
    let r = dim_cusp_forms(k)?;
    let n_terms = required_terms(k, digits).max(2 * r + 2);
    let basis = miller_basis(k, n_terms)?;
    if r == 0 {
        let bits = mp::bits_for_digits(digits);
        let system = EigenSystem {
            k,
            r: 0,
            t2_matrix: Vec::new(),
            eigenvalues: Vec::new(),
            eigenvectors: Vec::new(),
            residual: Float::with_val(bits, 0),
            precision_digits: digits,
        };
        return Ok((system, Vec::new()));
    }
    let t2 = hecke_operator_matrix(k, 2, &basis)?;
    let cp = char_poly(&t2);

    let mut attempt_digits = digits;
    let mut last_err = None;
    for _ in 0..=MAX_ESCALATIONS {
        match try_eigensystem(k, &t2, &cp, attempt_digits) {
            Ok(mut system) => {
                // report at the requested precision even after escalation
                system.precision_digits = attempt_digits;
                let forms = build_forms(k, &basis, &system, attempt_digits)?;
                return Ok((system, forms));
            }
            Err(e @ Error::InsufficientPrecision { .. }) => {
                last_err = Some(e);
                attempt_digits *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::numerical("eigenform computation failed".into())))
}

fn try_eigensystem(
    k: u32,
    t2: &[Vec<Integer>],
    cp: &[Integer],
    digits: u32,
) -> Result<EigenSystem> {
    let bits = mp::bits_for_digits(digits);
    let r = t2.len();
    let eigenvalues = real_roots_of_integer_poly(cp, digits, 2)?;

    let mut eigenvectors = Vec::with_capacity(r);
    for lam in &eigenvalues {
        eigenvectors.push(nullspace_vector(t2, lam, bits)?);
    }

    // residual certification
    let mut residual = Float::with_val(bits, 0);
    for (lam, v) in eigenvalues.iter().zip(&eigenvectors) {
        let mut norm_inf = Float::with_val(bits, 0);
        let mut err_inf = Float::with_val(bits, 0);
        for (row, t2_row) in t2.iter().enumerate() {
            let mut acc = Float::with_val(bits, 0);
            for (col, entry) in t2_row.iter().enumerate() {
                acc += Float::with_val(bits, entry) * &v[col];
            }
            acc -= Float::with_val(bits, lam * &v[row]);
            let a = acc.abs();
            if a > err_inf {
                err_inf = a;
            }
            let va = Float::with_val(bits, v[row].abs_ref());
            if va > norm_inf {
                norm_inf = va;
            }
        }
        let res = err_inf / norm_inf;
        if res > residual {
            residual = res;
        }
    }

    let threshold = mp::pow10(bits, -((digits / 2) as i32));
    if residual >= threshold {
        return Err(Error::InsufficientPrecision {
            reason: format!("eigen residual {:.3e} at {digits} digits", residual.to_f64()),
            suggested_digits: digits * 2,
        });
    }
    // eigenvalue separation: pairwise distinct by more than 10x residual
    let sep_bound = Float::with_val(bits, &residual * 10u32);
    for i in 0..r {
        for j in i + 1..r {
            let gap = Float::with_val(bits, &eigenvalues[i] - &eigenvalues[j]).abs();
            if gap <= sep_bound {
                return Err(Error::InsufficientPrecision {
                    reason: format!("T2 eigenvalues nearly degenerate at {digits} digits"),
                    suggested_digits: digits * 2,
                });
            }
        }
    }

    Ok(EigenSystem {
        k,
        r,
        t2_matrix: t2.to_vec(),
        eigenvalues,
        eigenvectors,
        residual,
        precision_digits: digits,
    })
}

/// Kernel vector of (T2 - lambda I) by Gaussian elimination with partial
/// pivoting; the weakest pivot column becomes the free variable. Normalized
/// so the first coordinate (the q^1 coefficient of the eigenform) is 1.
fn nullspace_vector(t2: &[Vec<Integer>], lam: &Float, bits: u32) -> Result<Vec<Float>> {
    let r = t2.len();
    let mut a: Vec<Vec<Float>> = t2
        .iter()
        .map(|row| row.iter().map(|x| Float::with_val(bits, x)).collect())
        .collect();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lam;
    }

    let scale = a.iter().flatten().fold(Float::with_val(bits, 0), |acc, x| {
        acc.max(&Float::with_val(bits, x.abs_ref()))
    });
    let tiny = Float::with_val(bits, &scale * &mp::pow10(bits, -(bits as i32 / 4)));

    let mut row_used = vec![false; r];
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col) in elimination order
    let mut free_col: Option<usize> = None;
    for col in 0..r {
        // best pivot among unused rows
        let mut best: Option<(usize, Float)> = None;
        for (row, used) in row_used.iter().enumerate() {
            if *used {
                continue;
            }
            let mag = Float::with_val(bits, a[row][col].abs_ref());
            if best.as_ref().map(|(_, m)| mag > *m).unwrap_or(true) {
                best = Some((row, mag));
            }
        }
        // rank is r-1: exactly one column stays free
        let force_free = pivots.len() == r - 1;
        let weak = best.as_ref().map(|(_, m)| *m <= tiny).unwrap_or(true);
        if force_free || weak {
            if free_col.is_some() {
                return Err(Error::InsufficientPrecision {
                    reason: "nullspace rank deficiency beyond 1".into(),
                    suggested_digits: 0,
                });
            }
            free_col = Some(col);
            continue;
        }
        let (prow, _) = best.expect("pivot row");
        row_used[prow] = true;
        pivots.push((prow, col));
        let pivot = a[prow][col].clone();
        for row in 0..r {
            if row == prow {
                continue;
            }
            let factor = Float::with_val(bits, &a[row][col] / &pivot);
            if factor.is_zero() {
                continue;
            }
            for c2 in 0..r {
                let delta = Float::with_val(bits, &a[prow][c2] * &factor);
                a[row][c2] -= delta;
            }
        }
    }

    let free_col =
        free_col.ok_or_else(|| Error::numerical("no free column in nullspace solve".into()))?;
    let mut v = vec![Float::with_val(bits, 0); r];
    v[free_col] = Float::with_val(bits, 1);
    // back-substitute each pivot row: a[prow][pcol] * v[pcol] + sum = 0
    for &(prow, pcol) in pivots.iter().rev() {
        let mut acc = Float::with_val(bits, 0);
        for c2 in 0..r {
            if c2 == pcol {
                continue;
            }
            acc += Float::with_val(bits, &a[prow][c2] * &v[c2]);
        }
        v[pcol] = -(acc / &a[prow][pcol]);
    }

    // normalize on the q^1 coordinate
    let lead = v[0].clone();
    if lead.is_zero() {
        return Err(Error::numerical(
            "eigenvector has vanishing q^1 coordinate".into(),
        ));
    }
    for x in v.iter_mut() {
        *x /= &lead;
    }
    Ok(v)
}

/// Assemble normalized eigenforms from eigenvector coordinates.
fn build_forms(
    k: u32,
    basis: &[super::qseries::QSeries],
    system: &EigenSystem,
    digits: u32,
) -> Result<Vec<CuspForm>> {
    let bits = mp::bits_for_digits(digits);
    let n_terms = basis.first().map(|g| g.n_terms()).unwrap_or(1);
    let mut forms = Vec::with_capacity(system.r);
    for (j, v) in system.eigenvectors.iter().enumerate() {
        let mut coeffs = vec![Float::with_val(bits, 0); n_terms - 1];
        for (i, g) in basis.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            for n in 1..n_terms {
                let c = g.coeff(n);
                if *c != 0 {
                    coeffs[n - 1] += Float::with_val(bits, c) * &v[i];
                }
            }
        }
        let form = CuspForm::from_normalized_coeffs(
            k,
            1,
            coeffs,
            Provenance::Eigenform(j),
            digits,
        )?;
        forms.push(form);
    }
    Ok(forms)
}

/// Linear combination sum_j coeffs[j] * f_j of precomputed eigenforms,
/// renormalized to leading coefficient 1 with the vanishing order detected.
pub fn combine_eigenforms(forms: &[CuspForm], coeffs: &[Float]) -> Result<CuspForm> {
    if forms.is_empty() {
        return Err(Error::invalid("no eigenforms to combine"));
    }
    if forms.len() != coeffs.len() {
        return Err(Error::invalid(format!(
            "combination needs {} coefficients, got {}",
            forms.len(),
            coeffs.len()
        )));
    }
    if coeffs.iter().all(|c| c.is_zero()) {
        return Err(Error::invalid("combination coefficients are all zero"));
    }
    let k = forms[0].k;
    let digits = forms[0].precision_digits;
    let bits = mp::bits_for_digits(digits);
    let n_terms = forms.iter().map(|f| f.coeffs.len()).min().unwrap();

    let mut combined = vec![Float::with_val(bits, 0); n_terms];
    for (f, c) in forms.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (n, x) in f.coeffs[..n_terms].iter().enumerate() {
            combined[n] += Float::with_val(bits, x * c);
        }
    }

    // vanishing order: first coefficient above 10^-(P/2)
    let threshold = mp::pow10(bits, -((digits / 2) as i32));
    let vanishing_order = combined
        .iter()
        .position(|c| Float::with_val(bits, c.abs_ref()) > threshold)
        .map(|idx| idx + 1)
        .ok_or_else(|| Error::numerical("combination vanishes to working precision".into()))?;
    let max_order = (k / 12) as usize;
    if vanishing_order > max_order {
        return Err(Error::invalid(format!(
            "detected vanishing order {vanishing_order} exceeds k/12 = {max_order}"
        )));
    }
    let lead = combined[vanishing_order - 1].clone();
    for c in combined.iter_mut() {
        *c /= &lead;
    }
    CuspForm::from_normalized_coeffs(
        k,
        vanishing_order,
        combined,
        Provenance::Combination {
            vector: coeffs.to_vec(),
            leading_value: lead,
        },
        digits,
    )
}

/// Convenience wrapper: compute the eigenbasis, then combine.
pub fn linear_combination(coeffs: &[Float], k: u32, digits: u32) -> Result<CuspForm> {
    let (_, forms) = eigenforms(k, digits)?;
    combine_eigenforms(&forms, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_12_single_eigenform_is_delta() {
        let (system, forms) = eigenforms(12, 50).unwrap();
        assert_eq!(system.r, 1);
        assert_eq!(forms.len(), 1);
        let bits = mp::bits_for_digits(50);
        let f = &forms[0];
        assert_eq!(f.vanishing_order, 1);
        // c(2) = -24 within 1e-40
        let diff = Float::with_val(bits, f.coeff(2) + 24u32).abs();
        assert!(diff < mp::pow10(bits, -40), "c(2) = {}", f.coeff(2));
        // exact Delta coefficients match throughout
        let delta = super::super::qseries::delta_series(20).unwrap();
        for n in 1..20 {
            let expect = Float::with_val(bits, delta.coeff(n));
            let d = Float::with_val(bits, f.coeff(n) - &expect).abs();
            assert!(d < mp::pow10(bits, -40), "tau({n})");
        }
    }

    #[test]
    fn weight_24_eigenvalues_are_charpoly_roots() {
        let (system, forms) = eigenforms(24, 50).unwrap();
        assert_eq!(system.r, 2);
        let bits = mp::bits_for_digits(50);
        // c(2) of each form equals its T2 eigenvalue
        for (f, lam) in forms.iter().zip(&system.eigenvalues) {
            let diff = Float::with_val(bits, f.coeff(2) - lam).abs();
            assert!(diff < mp::pow10(bits, -35));
        }
        // and the eigenvalues are the roots of x^2 - 1080x - 20468736
        for lam in &system.eigenvalues {
            let val = Float::with_val(bits, lam * lam)
                - Float::with_val(bits, lam * 1080u32)
                - 20468736u32;
            assert!(val.abs() < mp::pow10(bits, -30));
        }
        assert!(system.residual < mp::pow10(bits, -25));
    }

    #[test]
    fn weight_26_eigenform_equals_miller_element() {
        let (_, forms) = eigenforms(26, 40).unwrap();
        assert_eq!(forms.len(), 1);
        let basis = miller_basis(26, 12).unwrap();
        let bits = mp::bits_for_digits(40);
        for n in 1..12 {
            let expect = Float::with_val(bits, basis[0].coeff(n));
            let d = Float::with_val(bits, forms[0].coeff(n) - &expect).abs();
            assert!(d < mp::pow10(bits, -30));
        }
    }

    #[test]
    fn eigenvector_reconstruction_reproduces_t2_action() {
        // T2 applied through the eigendecomposition agrees with the exact
        // matrix within 10^-(P/2)
        let digits = 40;
        let (system, _) = eigenforms(36, digits).unwrap();
        let bits = mp::bits_for_digits(digits);
        let threshold = mp::pow10(bits, -((digits / 2) as i32));
        assert!(system.residual < threshold);
    }

    #[test]
    fn combination_examples() {
        let (_, forms) = eigenforms(24, 40).unwrap();
        let bits = mp::bits_for_digits(40);
        // (1, -1): leading q terms cancel, N = 2
        let diff = combine_eigenforms(
            &forms,
            &[Float::with_val(bits, 1), Float::with_val(bits, -1)],
        )
        .unwrap();
        assert_eq!(diff.vanishing_order, 2);
        // (2, 3): N = 1, leading value 5
        let combo = combine_eigenforms(
            &forms,
            &[Float::with_val(bits, 2), Float::with_val(bits, 3)],
        )
        .unwrap();
        assert_eq!(combo.vanishing_order, 1);
        match &combo.provenance {
            Provenance::Combination { leading_value, .. } => {
                let d = Float::with_val(bits, leading_value - 5u32).abs();
                assert!(d < mp::pow10(bits, -30));
            }
            _ => panic!("expected combination provenance"),
        }
        // all zero rejected
        assert!(combine_eigenforms(
            &forms,
            &[Float::with_val(bits, 0), Float::with_val(bits, 0)],
        )
        .is_err());
    }

    #[test]
    fn single_form_combination_is_identity() {
        let (_, forms) = eigenforms(12, 40).unwrap();
        let bits = mp::bits_for_digits(40);
        let combo = combine_eigenforms(&forms, &[Float::with_val(bits, 1)]).unwrap();
        assert_eq!(combo.vanishing_order, 1);
        let d = Float::with_val(bits, combo.coeff(2) + 24u32).abs();
        assert!(d < mp::pow10(bits, -30));
    }
}
