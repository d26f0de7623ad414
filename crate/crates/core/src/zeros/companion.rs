//! Companion-matrix eigenvalues via shifted complex Hessenberg QR.
//! Fallback path for polynomials where the simultaneous iteration stalls.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::mp;

/// Unitary 2x2 rotation [[c, s], [-conj(s), conj(c)]] that zeroes the second
/// entry of (a, b): c = conj(a)/r, s = conj(b)/r, r = sqrt(|a|^2 + |b|^2).
struct Rotation {
    c: Complex,
    s: Complex,
}

fn make_rotation(a: &Complex, b: &Complex, bits: u32) -> Rotation {
    let na = mp::cabs(a);
    let nb = mp::cabs(b);
    if nb.is_zero() {
        return Rotation {
            c: Complex::with_val(bits, 1),
            s: Complex::with_val(bits, 0),
        };
    }
    let r = Float::with_val(bits, na.square_ref()) + Float::with_val(bits, nb.square_ref());
    let r = r.sqrt();
    let c = Complex::with_val(bits, a.conj_ref()) / &r;
    let s = Complex::with_val(bits, b.conj_ref()) / &r;
    Rotation { c, s }
}

fn apply_left(h: &mut [Vec<Complex>], rot: &Rotation, i: usize, k: usize, bits: u32) {
    // rows i and i+1, columns k..n
    let n = h.len();
    for col in k..n {
        let x = h[i][col].clone();
        let y = h[i + 1][col].clone();
        let cs = Complex::with_val(bits, &rot.c * &x) + Complex::with_val(bits, &rot.s * &y);
        let sc = Complex::with_val(bits, &x * &rot.s.clone().conj());
        let new_y = Complex::with_val(bits, &y * &rot.c.clone().conj()) - sc;
        h[i][col] = cs;
        h[i + 1][col] = new_y;
    }
}

fn apply_right(h: &mut [Vec<Complex>], rot: &Rotation, i: usize, top: usize, bits: u32) {
    // columns i and i+1, rows 0..=min(i+2, n-1) starting at `top`
    let n = h.len();
    let last = (i + 2).min(n - 1);
    for row in top..=last {
        let x = h[row][i].clone();
        let y = h[row][i + 1].clone();
        let new_x = Complex::with_val(bits, &x * &rot.c.clone().conj())
            + Complex::with_val(bits, &y * &rot.s.clone().conj());
        let new_y = Complex::with_val(bits, &y * &rot.c) - Complex::with_val(bits, &x * &rot.s);
        h[row][i] = new_x;
        h[row][i + 1] = new_y;
    }
}

/// Eigenvalues of the monic polynomial with ascending coefficients `monic`
/// (leading coefficient must be 1 and is not stored).
pub(crate) fn companion_eigenvalues(lower: &[Complex], bits: u32) -> Result<Vec<Complex>> {
    let n = lower.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // companion matrix: subdiagonal ones, last column -lower[j]
    let mut h = vec![vec![Complex::with_val(bits, 0); n]; n];
    for i in 1..n {
        h[i][i - 1] = Complex::with_val(bits, 1);
    }
    for (j, c) in lower.iter().enumerate() {
        h[j][n - 1] = -Complex::with_val(bits, c);
    }

    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 8)));
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols 0..hi
    let max_total = 60 * n + 200;
    let mut iterations = 0usize;

    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0][0].clone());
            hi = 0;
            continue;
        }
        // deflate tiny subdiagonals from the bottom of the active block
        let m = hi - 1;
        let sub = mp::cabs(&h[m][m - 1]);
        let local = mp::cabs(&h[m][m]) + mp::cabs(&h[m - 1][m - 1]);
        if sub <= Float::with_val(bits, &local * &eps) {
            eigs.push(h[m][m].clone());
            hi -= 1;
            continue;
        }
        if hi == 2 {
            // solve the trailing 2x2 directly
            let (a, b, c, d) = (
                h[0][0].clone(),
                h[0][1].clone(),
                h[1][0].clone(),
                h[1][1].clone(),
            );
            let (l1, l2) = two_by_two_eigs(&a, &b, &c, &d, bits);
            eigs.push(l1);
            eigs.push(l2);
            hi = 0;
            continue;
        }

        iterations += 1;
        if iterations > max_total {
            return Err(Error::numerical(
                "companion QR failed to deflate within the iteration budget".into(),
            ));
        }

        // Wilkinson shift from the trailing 2x2 of the active block
        let (a, b, c, d) = (
            h[m - 1][m - 1].clone(),
            h[m - 1][m].clone(),
            h[m][m - 1].clone(),
            h[m][m].clone(),
        );
        let (l1, l2) = two_by_two_eigs(&a, &b, &c, &d, bits);
        let d1 = mp::cabs(&Complex::with_val(bits, &l1 - &d));
        let d2 = mp::cabs(&Complex::with_val(bits, &l2 - &d));
        let shift = if d1 < d2 { l1 } else { l2 };

        // implicit single-shift QR sweep on the active block
        for i in 0..hi {
            h[i][i] -= &shift;
        }
        let mut rotations = Vec::with_capacity(hi - 1);
        for i in 0..hi - 1 {
            let rot = make_rotation(&h[i][i].clone(), &h[i + 1][i].clone(), bits);
            apply_left(&mut h, &rot, i, i, bits);
            h[i + 1][i] = Complex::with_val(bits, 0);
            rotations.push(rot);
        }
        for (i, rot) in rotations.iter().enumerate() {
            apply_right(&mut h, rot, i, 0, bits);
        }
        for i in 0..hi {
            h[i][i] += &shift;
        }
    }
    Ok(eigs)
}

fn two_by_two_eigs(
    a: &Complex,
    b: &Complex,
    c: &Complex,
    d: &Complex,
    bits: u32,
) -> (Complex, Complex) {
    // eigenvalues of [[a, b], [c, d]]
    let tr = Complex::with_val(bits, a + d);
    let half_tr = Complex::with_val(bits, &tr / 2u32);
    let det = Complex::with_val(bits, a * d) - Complex::with_val(bits, b * c);
    let disc = Complex::with_val(bits, &half_tr * &half_tr) - det;
    let sq = disc.sqrt();
    (
        Complex::with_val(bits, &half_tr + &sq),
        Complex::with_val(bits, &half_tr - &sq),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(bits: u32, re: f64, im: f64) -> Complex {
        Complex::with_val(bits, (re, im))
    }

    #[test]
    fn quadratic_roots() {
        let bits = 256;
        // z^2 + 1 -> +-i
        let eigs = companion_eigenvalues(&[c(bits, 1.0, 0.0), c(bits, 0.0, 0.0)], bits).unwrap();
        assert_eq!(eigs.len(), 2);
        for e in &eigs {
            let re = e.real().to_f64().abs();
            let im = e.imag().to_f64().abs();
            assert!(re < 1e-60, "re = {re}");
            assert!((im - 1.0).abs() < 1e-60);
        }
    }

    #[test]
    fn known_real_roots() {
        let bits = 256;
        // (z - 2)(z - 1/2) = z^2 - 2.5 z + 1
        let eigs =
            companion_eigenvalues(&[c(bits, 1.0, 0.0), c(bits, -2.5, 0.0)], bits).unwrap();
        let mut res: Vec<f64> = eigs.iter().map(|e| e.real().to_f64()).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((res[0] - 0.5).abs() < 1e-50);
        assert!((res[1] - 2.0).abs() < 1e-50);
    }

    #[test]
    fn degree_five_product() {
        let bits = 256;
        // (z-1)(z-2)(z-3)(z-4)(z-5): coeffs from expansion
        // z^5 - 15z^4 + 85z^3 - 225z^2 + 274z - 120
        let lower = [
            c(bits, -120.0, 0.0),
            c(bits, 274.0, 0.0),
            c(bits, -225.0, 0.0),
            c(bits, 85.0, 0.0),
            c(bits, -15.0, 0.0),
        ];
        let eigs = companion_eigenvalues(&lower, bits).unwrap();
        let mut res: Vec<f64> = eigs.iter().map(|e| e.real().to_f64()).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, r) in res.iter().enumerate() {
            assert!((r - (i as f64 + 1.0)).abs() < 1e-40, "root {i}: {r}");
        }
    }
}
