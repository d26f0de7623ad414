//! Truncated exponential T_{m,N}(z) = sum_{n<=m} (2 pi N z)^n / n!, its
//! reversal H_{m,N}(z) = z^m T_{m,N}(1/z), and the explicit disk criteria
//! governing where the zeros of H land.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::mp;

/// Coefficients of T_{m,N} and H_{m,N} at working precision.
#[derive(Debug, Clone)]
pub struct TruncExp {
    pub m: u32,
    pub n: u32,
    /// ascending coefficients of T_{m,N}
    pub t_coeffs: Vec<Float>,
    /// ascending coefficients of H_{m,N}; exact reversal of `t_coeffs`
    pub h_coeffs: Vec<Float>,
    pub precision_digits: u32,
}

pub fn truncated_exp(m: u32, n: u32, digits: u32) -> Result<TruncExp> {
    if m < 1 || n < 1 {
        return Err(Error::invalid("truncated_exp needs m >= 1 and N >= 1"));
    }
    let bits = mp::bits_for_digits(digits);
    let two_pi_n = mp::two_pi(bits) * n;
    let mut t_coeffs = Vec::with_capacity(m as usize + 1);
    let mut term = Float::with_val(bits, 1);
    t_coeffs.push(term.clone());
    for j in 1..=m {
        term *= &two_pi_n;
        term /= j;
        t_coeffs.push(term.clone());
    }
    let h_coeffs: Vec<Float> = t_coeffs.iter().rev().cloned().collect();
    Ok(TruncExp {
        m,
        n,
        t_coeffs,
        h_coeffs,
        precision_digits: digits,
    })
}

/// Outcome of the explicit sufficient criterion for all zeros of H_{m,N}
/// lying in the closed unit disk.
#[derive(Debug, Clone)]
pub struct DiskCriterion {
    pub m: u32,
    pub n: u32,
    pub holds: bool,
    /// e^{-2 pi N} - (2 pi N)^{m+1}/(m+1)! e^{2 pi N}; a valid lower bound
    /// for |T_{m,N}| on the closed unit disk whenever `holds`
    pub lower_bound: Float,
    /// 4 pi N + (2m+2) log(2 pi N) < (m+1) log(m+1) - m
    pub tail_inequality_holds: bool,
}

/// Sufficient criterion: holds when (N = 1, m >= 20), or when m >= 210,
/// N <= log(m)/4 and the tail inequality is verified numerically.
pub fn h_disk_criterion(m: u32, n: u32, digits: u32) -> Result<DiskCriterion> {
    if m < 1 || n < 1 {
        return Err(Error::invalid("h_disk_criterion needs m >= 1 and N >= 1"));
    }
    let bits = mp::bits_for_digits(digits);
    let two_pi_n = mp::two_pi(bits) * n;

    // lower bound e^{-2 pi N} - (2 pi N)^{m+1}/(m+1)! e^{2 pi N}
    let neg = Float::with_val(bits, -&two_pi_n).exp();
    let pos = Float::with_val(bits, &two_pi_n).exp();
    let mut remainder = pos;
    for j in 1..=m + 1 {
        remainder *= &two_pi_n;
        remainder /= j;
    }
    let lower_bound = neg - remainder;

    // tail inequality 4 pi N + (2m+2) log(2 pi N) < (m+1) log(m+1) - m
    let lhs = Float::with_val(bits, 2u32 * &two_pi_n)
        + Float::with_val(bits, &two_pi_n.clone().ln() * (2 * m + 2));
    let m1 = Float::with_val(bits, m + 1);
    let rhs = Float::with_val(bits, &m1.clone().ln() * &m1) - m;
    let tail_inequality_holds = lhs < rhs;

    let n_small_enough = Float::with_val(bits, m).ln() / 4u32 >= n;
    let holds = (n == 1 && m >= 20) || (m >= 210 && n_small_enough && tail_inequality_holds);

    Ok(DiskCriterion {
        m,
        n,
        holds,
        lower_bound,
        tail_inequality_holds,
    })
}

/// Minimum of |T_{m,N}| over `n_samples` seeded uniform samples of the closed
/// unit disk. Under the disk criterion this must stay above the displayed
/// lower bound.
pub fn sample_t_lower_bound(
    m: u32,
    n: u32,
    n_samples: u64,
    seed: u64,
    digits: u32,
) -> Result<Float> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    let te = truncated_exp(m, n, digits)?;
    let bits = mp::bits_for_digits(digits);
    let two_pi = mp::two_pi(bits);
    let mut min = Float::with_val(bits, rug::float::Special::Infinity);
    let mut rng = mp::stream_rng(seed, 0);
    for _ in 0..n_samples {
        // uniform on the disk: radius sqrt(u), angle 2 pi v
        let u = mp::unit_float(&mut rng, bits);
        let v = mp::unit_float(&mut rng, bits);
        let radius = u.sqrt();
        let angle = Float::with_val(bits, &two_pi * &v);
        let (sin, cos) = angle.sin_cos(Float::new(bits));
        let z = Complex::with_val(bits, (&radius * &cos, &radius * &sin));
        let mut acc = Complex::with_val(bits, 0);
        for c in te.t_coeffs.iter().rev() {
            acc *= &z;
            acc += c;
        }
        let a = mp::cabs(&acc);
        if a < min {
            min = a;
        }
    }
    Ok(min)
}
