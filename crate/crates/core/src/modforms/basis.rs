//! Cusp-form basis for level 1: dimension count, echelonized (Miller) basis,
//! and exact Hecke operator matrices on it.

use rug::ops::Pow;
use rug::{Integer, Rational};

use super::qseries::{delta_series, eisenstein_series, QSeries};
use crate::error::{Error, Result};

/// Dimension of the space of weight-k level-1 cusp forms.
pub fn dim_cusp_forms(k: u32) -> Result<usize> {
    if k % 2 != 0 || k < 4 {
        return Err(Error::invalid(format!(
            "dim_cusp_forms needs even k >= 4, got {k}"
        )));
    }
    let dim_mk = if k % 12 == 2 {
        (k / 12) as usize
    } else {
        (k / 12) as usize + 1
    };
    Ok(dim_mk.saturating_sub(1))
}

/// Exponents (a, b, i) with 4a + 6b + 12i = k, b in {0, 1}, for the monomial
/// E4^a E6^b Delta^i starting at q^i.
fn monomial_exponents(k: u32, i: u32) -> (u32, u32) {
    let rem = k - 12 * i;
    let b = if rem % 4 == 0 { 0 } else { 1 };
    let a = (rem - 6 * b) / 4;
    (a, b)
}

/// Echelonized integral basis g_1..g_r of S_k with g_i = q^i + O(q^{r+1}).
pub fn miller_basis(k: u32, n_terms: usize) -> Result<Vec<QSeries>> {
    let r = dim_cusp_forms(k)?;
    if n_terms <= r {
        return Err(Error::invalid(format!(
            "miller_basis(k={k}) needs n_terms > {r}, got {n_terms}"
        )));
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let e4 = eisenstein_series(4, n_terms)?;
    let e6 = eisenstein_series(6, n_terms)?;
    let delta = delta_series(n_terms)?;

    // Monomial m_i = Delta^i E4^a E6^b = q^i + O(q^{i+1}), built incrementally.
    let mut monomials = Vec::with_capacity(r);
    let mut delta_pow = delta.clone();
    for i in 1..=r as u32 {
        if i > 1 {
            delta_pow = delta_pow.mul(&delta);
        }
        let (a, b) = monomial_exponents(k, i);
        let mut m = delta_pow.mul(&e4.pow(a));
        if b == 1 {
            m = m.mul(&e6);
        }
        debug_assert_eq!(m.weight(), k);
        monomials.push(m);
    }

    // Back-substitute from the top so g_i = q^i + O(q^{r+1}).
    let mut basis = monomials;
    for i in (0..r.saturating_sub(1)).rev() {
        for j in i + 1..r {
            let c = basis[i].coeff(j + 1).clone();
            if c != 0 {
                let correction = basis[j].scalar_mul(&c);
                basis[i] = basis[i].sub(&correction)?;
            }
        }
    }
    for (i, g) in basis.iter().enumerate() {
        debug_assert_eq!(*g.coeff(i + 1), 1);
        debug_assert!(g.is_cusp());
    }
    Ok(basis)
}

/// Matrix of T_p on the echelon basis, exact integer entries.
/// Column i holds the coordinates of T_p g_i.
pub fn hecke_operator_matrix(k: u32, p: u32, basis: &[QSeries]) -> Result<Vec<Vec<Integer>>> {
    let r = basis.len();
    if r == 0 {
        return Ok(Vec::new());
    }
    if !is_prime(p) {
        return Err(Error::invalid(format!("hecke operator index {p} is not prime")));
    }
    let needed = p as usize * r + 1;
    for g in basis {
        if g.n_terms() < needed {
            return Err(Error::InsufficientPrecision {
                reason: format!(
                    "hecke_operator_matrix(k={k}, p={p}) needs {needed} coefficients, basis has {}",
                    g.n_terms()
                ),
                suggested_digits: 0,
            });
        }
    }
    let pk = Integer::from(p).pow(k - 1);
    let mut matrix = vec![vec![Integer::new(); r]; r];
    for (i, g) in basis.iter().enumerate() {
        for m in 1..=r {
            // (T_p g)(m) = a(p m) + p^{k-1} a(m/p)
            let mut entry = Rational::from(g.coeff(p as usize * m));
            if m % p as usize == 0 {
                entry += Rational::from(g.coeff(m / p as usize)) * Rational::from(&pk);
            }
            let (num, den) = entry.into_numer_denom();
            if den != 1 {
                return Err(Error::numerical(format!(
                    "non-integral Hecke entry at (row {m}, col {i}) for k={k}, p={p}"
                )));
            }
            matrix[m - 1][i] = num;
        }
    }
    Ok(matrix)
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Characteristic polynomial det(xI - A) of an exact integer matrix by the
/// Faddeev-LeVerrier recurrence; all divisions are exact. Coefficients in
/// ascending order of degree, leading coefficient 1.
pub fn char_poly(a: &[Vec<Integer>]) -> Vec<Integer> {
    let r = a.len();
    let mut coeffs = vec![Integer::new(); r + 1];
    coeffs[r] = Integer::from(1);
    if r == 0 {
        return coeffs;
    }
    // M_1 = A, c_{r-1} = -tr(A); M_{j+1} = A (M_j + c_{r-j} I)
    let mut m = a.to_vec();
    let mut c = -trace(&m);
    coeffs[r - 1] = c.clone();
    for j in 2..=r {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += &c;
        }
        m = mat_mul(a, &m);
        let t = trace(&m);
        let (q, rem) = t.div_rem(Integer::from(j));
        assert_eq!(rem, 0, "Faddeev-LeVerrier division must be exact");
        c = -q;
        coeffs[r - j] = c.clone();
    }
    coeffs
}

fn trace(a: &[Vec<Integer>]) -> Integer {
    let mut t = Integer::new();
    for (i, row) in a.iter().enumerate() {
        t += &row[i];
    }
    t
}

pub(crate) fn mat_mul(a: &[Vec<Integer>], b: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let r = a.len();
    let mut out = vec![vec![Integer::new(); r]; r];
    for i in 0..r {
        for l in 0..r {
            if a[i][l] == 0 {
                continue;
            }
            for j in 0..r {
                out[i][j] += Integer::from(&a[i][l] * &b[l][j]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_miller_construction() {
        // formula vs. independent construction-by-spanning
        for (k, expect) in [(10u32, 0usize), (12, 1), (14, 0), (16, 1), (24, 2), (26, 1), (36, 3)] {
            assert_eq!(dim_cusp_forms(k).unwrap(), expect, "k={k}");
            let basis = miller_basis(k, expect + 2).unwrap();
            assert_eq!(basis.len(), expect, "k={k} basis size");
        }
        assert!(dim_cusp_forms(13).is_err());
        assert!(dim_cusp_forms(2).is_err());
    }

    #[test]
    fn weight_12_basis_is_delta() {
        let basis = miller_basis(12, 10).unwrap();
        let delta = delta_series(10).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], delta);
    }

    #[test]
    fn weight_16_basis_matches_delta_e4_oracle() {
        let basis = miller_basis(16, 10).unwrap();
        let oracle = delta_series(10).unwrap().mul(&eisenstein_series(4, 10).unwrap());
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], oracle);
        // leading terms: q + 216 q^2 + ...
        assert_eq!(*basis[0].coeff(1), 1);
        assert_eq!(*basis[0].coeff(2), 216);
    }

    #[test]
    fn weight_24_echelon_property() {
        let basis = miller_basis(24, 10).unwrap();
        assert_eq!(*basis[0].coeff(1), 1);
        assert_eq!(*basis[0].coeff(2), 0);
        assert_eq!(*basis[1].coeff(1), 0);
        assert_eq!(*basis[1].coeff(2), 1);
        assert!(basis.iter().all(|g| g.is_integral()));
    }

    #[test]
    fn echelon_property_holds_bit_exactly_through_weight_60() {
        for k in (12..=60u32).step_by(2) {
            let r = dim_cusp_forms(k).unwrap();
            if r == 0 {
                continue;
            }
            let basis = miller_basis(k, 2 * r + 2).unwrap();
            for (i, g) in basis.iter().enumerate() {
                assert!(g.is_integral(), "k={k} basis not integral");
                for j in 1..=r {
                    let expect = if j == i + 1 { 1 } else { 0 };
                    assert_eq!(*g.coeff(j), expect, "k={k}, g_{}, q^{j}", i + 1);
                }
            }
        }
    }

    #[test]
    fn hecke_t2_on_delta_is_tau2() {
        let basis = miller_basis(12, 5).unwrap();
        let t2 = hecke_operator_matrix(12, 2, &basis).unwrap();
        assert_eq!(t2, vec![vec![Integer::from(-24)]]);
    }

    #[test]
    fn hecke_t3_on_delta_is_tau3() {
        let basis = miller_basis(12, 6).unwrap();
        let t3 = hecke_operator_matrix(12, 3, &basis).unwrap();
        assert_eq!(t3, vec![vec![Integer::from(252)]]);
    }

    #[test]
    fn hecke_operators_commute_exactly() {
        for k in (12..=60u32).step_by(2) {
            let r = dim_cusp_forms(k).unwrap();
            if r == 0 {
                continue;
            }
            let basis = miller_basis(k, 3 * r + 2).unwrap();
            let t2 = hecke_operator_matrix(k, 2, &basis).unwrap();
            let t3 = hecke_operator_matrix(k, 3, &basis).unwrap();
            assert_eq!(mat_mul(&t2, &t3), mat_mul(&t3, &t2), "k={k}");
        }
    }

    #[test]
    fn hecke_rejects_short_basis() {
        let basis = miller_basis(12, 2).unwrap();
        assert!(matches!(
            hecke_operator_matrix(12, 2, &basis),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn char_poly_of_t2_weight_24() {
        let basis = miller_basis(24, 6).unwrap();
        let t2 = hecke_operator_matrix(24, 2, &basis).unwrap();
        let cp = char_poly(&t2);
        // det(xI - T2) = x^2 - 1080 x - 20468736; roots 540 +- 12 sqrt(144169)
        assert_eq!(cp[2], 1);
        assert_eq!(cp[1], -1080);
        assert_eq!(cp[0], -20468736);
    }
}
