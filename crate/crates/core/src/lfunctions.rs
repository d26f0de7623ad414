//! Critical values L(f,s), Lambda(f,s) for s = 1..k-1 at working precision,
//! with a rigorous truncation bound, an independent quadrature oracle, and
//! the explicit tail estimates E1, E2.
//!
//! The series engine evaluates
//!   Lambda(f,s) = sum_{n>=N} c(n) [ t_s(2 pi n) + eps t_{k-s}(2 pi n) ],
//! where t_j(x) = Gamma(j,x)/x^j, computed by the stable upward recurrence
//! t_1 = e^{-x}/x, t_{j+1} = (j t_j + e^{-x})/x. The bracket is termwise
//! symmetric under s -> k-s, so the functional equation holds to rounding.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::modforms::CuspForm;
use crate::mp;

/// Default working precision in decimal digits for weight k.
pub fn default_precision(k: u32) -> u32 {
    64.max(2 * k)
}

/// Truncation point of the n-sum: smallest n_cut >= max(k/pi, N) with
///   2.02 * c_slack * (n_cut+1)^{k/2} * e^{-2 pi (n_cut+1)} < 10^{-(digits+10)},
/// evaluated in log space with a slack constant c_slack = 10^12 covering the
/// combination bounds exercised at desk scale. Coefficient storage is sized
/// from this, so forms built at `digits` feed the L-engine without refetching.
pub fn required_terms(k: u32, digits: u32) -> usize {
    let ln10 = std::f64::consts::LN_10;
    let two_pi = 2.0 * std::f64::consts::PI;
    let slack_ln = 12.0 * ln10;
    let target = -((digits as f64 + 10.0) * ln10);
    let mut n = (k as f64 / std::f64::consts::PI).ceil() as usize + 1;
    loop {
        let m = (n + 1) as f64;
        let v = 2.02f64.ln() + slack_ln + (k as f64 / 2.0) * m.ln() - two_pi * m;
        if v < target {
            return n + 4;
        }
        n += 1;
    }
}

/// Upper incomplete gamma at integer order s >= 1:
/// Gamma(s, x) = (s-1)! e^{-x} sum_{j=0}^{s-1} x^j/j!.
pub fn incomplete_gamma_integer(s: u32, x: &Float, digits: u32) -> Result<Float> {
    if s < 1 {
        return Err(Error::invalid("incomplete gamma order must be >= 1"));
    }
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::invalid("incomplete gamma argument must be >= 0"));
    }
    let bits = mp::bits_for_digits(digits);
    let x = Float::with_val(bits, x);
    let e = (-x.clone()).exp();
    let mut term = Float::with_val(bits, 1);
    let mut sum = Float::with_val(bits, 1);
    for j in 1..s {
        term *= &x;
        term /= j;
        sum += &term;
    }
    Ok(mp::factorial(bits, s - 1) * e * sum)
}

/// All critical values of one cusp form.
#[derive(Debug, Clone)]
pub struct CriticalLValues {
    pub k: u32,
    /// (-1)^{k/2}
    pub epsilon: i32,
    /// lambda[s-1] = Lambda(f, s), s = 1..k-1
    pub lambda: Vec<Float>,
    /// l[s-1] = L(f, s) = (2 pi)^s / Gamma(s) * Lambda(f, s)
    pub l: Vec<Float>,
    /// uniform bound on the truncation error of every lambda entry
    pub trunc_bound: Float,
    pub precision_digits: u32,
    /// order of vanishing of the source form
    pub vanishing_order: usize,
    /// number of q-expansion terms summed
    pub n_terms_used: usize,
    /// C_f upper bound used for the tail estimate
    pub c_upper: Float,
    /// false when only a truncated lower estimate of C_f was available and
    /// the tail constant is heuristic (2x the lower estimate)
    pub tail_constant_verified: bool,
}

impl CriticalLValues {
    pub fn lambda_at(&self, s: u32) -> &Float {
        &self.lambda[(s - 1) as usize]
    }

    pub fn l_at(&self, s: u32) -> &Float {
        &self.l[(s - 1) as usize]
    }
}

/// Series evaluation of every critical value of `f` at `digits` precision.
pub fn completed_lvalues(f: &CuspForm, digits: u32) -> Result<CriticalLValues> {
    let k = f.k;
    let bits = mp::bits_for_digits(digits);
    let epsilon: i32 = if (k / 2) % 2 == 0 { 1 } else { -1 };

    // C_f upper bound for the rigorous tail; falls back to twice the
    // truncated lower estimate (flagged) if no provenance bound exists
    let (c_upper, tail_constant_verified) = match f.deligne_upper() {
        Some(u) => (u, true),
        None => {
            let probe = f.n_coeffs().min(64);
            let (lower, _) = crate::modforms::deligne_constant_estimate(f, probe)?;
            (Float::with_val(bits, &lower * 2u32), false)
        }
    };

    // smallest n_cut >= max(k/pi, N) with the documented bound below target
    let target = mp::pow10(bits, -(digits as i32 + 10));
    let floor_n = ((k as f64 / std::f64::consts::PI).ceil() as usize).max(f.vanishing_order);
    let mut n_cut = floor_n;
    loop {
        if trunc_bound_at(k, &c_upper, n_cut, bits) < target {
            break;
        }
        n_cut += 1;
        if n_cut > f.n_coeffs() {
            return Err(Error::InsufficientPrecision {
                reason: format!(
                    "completed_lvalues(k={k}) needs {n_cut}+ coefficients for {digits} digits, form has {}",
                    f.n_coeffs()
                ),
                suggested_digits: digits,
            });
        }
    }
    let trunc_bound = trunc_bound_at(k, &c_upper, n_cut, bits);

    // per-n columns t_1..t_{k-1} in parallel, then a fixed-order reduction
    let smax = (k - 1) as usize;
    let mut lambda = vec![Float::with_val(bits, 0); smax];
    const CHUNK: usize = 64;
    let mut n0 = f.vanishing_order;
    while n0 <= n_cut {
        let n1 = (n0 + CHUNK - 1).min(n_cut);
        let columns: Vec<(usize, Vec<Float>)> = (n0..=n1)
            .into_par_iter()
            .map(|n| (n, t_column(k, n, bits)))
            .collect();
        for (n, t) in &columns {
            let c = f.coeff(*n);
            if c.is_zero() {
                continue;
            }
            for s in 1..=smax {
                // bracket = t_s + eps t_{k-s}
                let bracket = if epsilon == 1 {
                    Float::with_val(bits, &t[s - 1] + &t[smax - s])
                } else {
                    Float::with_val(bits, &t[s - 1] - &t[smax - s])
                };
                lambda[s - 1] += bracket * c;
            }
        }
        n0 = n1 + 1;
    }

    // L(f,s) = (2 pi)^s / Gamma(s) * Lambda(f,s)
    let two_pi = mp::two_pi(bits);
    let mut l = Vec::with_capacity(smax);
    let mut power = Float::with_val(bits, 1);
    let mut fact = Float::with_val(bits, 1);
    for s in 1..=smax {
        power *= &two_pi;
        if s > 1 {
            fact *= (s - 1) as u32;
        }
        l.push(Float::with_val(bits, &lambda[s - 1] * &power) / &fact);
    }

    Ok(CriticalLValues {
        k,
        epsilon,
        lambda,
        l,
        trunc_bound,
        precision_digits: digits,
        vanishing_order: f.vanishing_order,
        n_terms_used: n_cut,
        c_upper,
        tail_constant_verified,
    })
}

/// Documented conservative tail bound after summing n <= n_cut:
///   2.02 * c_upper * (n_cut+1)^{k/2} * e^{-2 pi (n_cut+1)},
/// valid for n_cut >= k/pi. It majorizes
///   sum_{n>n_cut} 2 c_upper n^{k/2} e^{-2 pi n}
/// because |c(n)| <= 2 c_upper n^{k/2} (sigma_0(n) <= 2 sqrt n), the bracket
/// is <= e^{-2 pi n} once 2 pi n >= 2k (Gamma(s,x) <= 2 x^{s-1} e^{-x} for
/// x >= 2s), and successive terms then shrink faster than e^{-3 pi/2}.
fn trunc_bound_at(k: u32, c_upper: &Float, n_cut: usize, bits: u32) -> Float {
    let m = Float::with_val(bits, (n_cut + 1) as u64);
    let power = m.clone().pow(Float::with_val(bits, k) / 2u32);
    let decay = Float::with_val(bits, -mp::two_pi(bits) * &m).exp();
    Float::with_val(bits, 2.02f64) * c_upper * power * decay
}

/// t_j(x) = Gamma(j, x)/x^j for j = 1..k-1 at x = 2 pi n.
fn t_column(k: u32, n: usize, bits: u32) -> Vec<Float> {
    let x = mp::two_pi(bits) * Float::with_val(bits, n as u64);
    let e = (-x.clone()).exp();
    let inv_x = Float::with_val(bits, x.recip_ref());
    let smax = (k - 1) as usize;
    let mut t = Vec::with_capacity(smax);
    let mut current = Float::with_val(bits, &e * &inv_x);
    t.push(current.clone());
    for j in 1..smax {
        // t_{j+1} = (j t_j + e^{-x}) / x
        current *= j as u32;
        current += &e;
        current *= &inv_x;
        t.push(current.clone());
    }
    t
}

/// Functional-equation diagnostics for one set of critical values.
#[derive(Debug, Clone)]
pub struct FunctionalEquationCheck {
    /// max_s |lambda[s] - eps lambda[k-s]|
    pub lambda_residual: Float,
    /// max over n of the relative residual of
    /// L(f,w-n+1) = i^k (2pi)^{w-n} n! / ((2pi)^n (w-n)!) L(f,n+1)
    pub l_identity_residual: Float,
}

pub fn verify_functional_equation(values: &CriticalLValues) -> FunctionalEquationCheck {
    let bits = mp::bits_for_digits(values.precision_digits);
    let k = values.k;
    let w = k - 2;

    let mut lambda_residual = Float::with_val(bits, 0);
    for s in 1..k {
        let lhs = values.lambda_at(s);
        let rhs = Float::with_val(bits, values.lambda_at(k - s) * values.epsilon);
        let d = Float::with_val(bits, lhs - &rhs).abs();
        if d > lambda_residual {
            lambda_residual = d;
        }
    }

    let two_pi = mp::two_pi(bits);
    let mut l_identity_residual = Float::with_val(bits, 0);
    for n in 0..=w {
        let lhs = values.l_at(w - n + 1);
        // i^k (2pi)^{w-2n} n!/(w-n)! L(f, n+1)
        let factor = Float::with_val(bits, (&two_pi).pow(w as i32 - 2 * n as i32))
            * mp::factorial(bits, n)
            / mp::factorial(bits, w - n)
            * values.epsilon;
        let rhs = Float::with_val(bits, values.l_at(n + 1) * &factor);
        let scale = Float::with_val(bits, lhs.abs_ref())
            .max(&Float::with_val(bits, rhs.abs_ref()))
            .max(&mp::pow10(bits, -30));
        let d = Float::with_val(bits, lhs - &rhs).abs() / scale;
        if d > l_identity_residual {
            l_identity_residual = d;
        }
    }

    FunctionalEquationCheck {
        lambda_residual,
        l_identity_residual,
    }
}

/// Explicit tail estimates from the coefficient bound.
#[derive(Debug, Clone)]
pub struct TailBounds {
    pub k: u32,
    pub vanishing_order: usize,
    /// |L(f,sigma) - N^-sigma| < e1 for sigma >= 3k/4
    pub e1: Float,
    /// |L(f,sigma)| < e2 for integer sigma >= k/2
    pub e2: Float,
    pub c_upper: Float,
}

/// e1 = 4 c/(N+1)^{k/4};
/// e2 = 2 c [2 sqrt(k) log(2k) - 2 sqrt(N-1) + 1 + 2^{k/2+1} e^{-pi k}].
pub fn tail_bounds(k: u32, vanishing_order: usize, c_upper: &Float) -> Result<TailBounds> {
    if k < 12 {
        return Err(Error::invalid("tail_bounds needs k >= 12"));
    }
    if vanishing_order < 1 || vanishing_order > (k / 12) as usize {
        return Err(Error::invalid(format!(
            "vanishing order {vanishing_order} violates 1 <= N <= k/12"
        )));
    }
    let bits = c_upper.prec().max(256);
    let n = vanishing_order as u32;
    let e1 = Float::with_val(bits, 4u32 * c_upper)
        / Float::with_val(bits, n + 1).pow(Float::with_val(bits, k) / 4u32);

    let kf = Float::with_val(bits, k);
    let sqrt_k = kf.clone().sqrt();
    let log_2k = Float::with_val(bits, 2u32 * &kf).ln();
    let sqrt_nm1 = Float::with_val(bits, n - 1).sqrt();
    let pi_k = mp::pi(bits) * &kf;
    let exp_term = Float::with_val(bits, 2u32).pow(Float::with_val(bits, k) / 2u32 + 1u32)
        * Float::with_val(bits, (-pi_k).exp_ref());
    let bracket = Float::with_val(bits, 2u32 * &sqrt_k) * log_2k - 2u32 * sqrt_nm1
        + 1u32
        + exp_term;
    let e2 = Float::with_val(bits, 2u32 * c_upper) * bracket;

    Ok(TailBounds {
        k,
        vanishing_order,
        e1,
        e2,
        c_upper: Float::with_val(bits, c_upper),
    })
}

/// Independent verification oracle:
/// Lambda(f,s) = int_1^inf f(iy) (y^{s-1} + (-1)^{k/2} y^{k-s-1}) dy
/// by tanh-sinh quadrature on [1, Y] with an explicit bound on the
/// discarded tail. Slower than the series route by design; used in tests.
pub fn oracle_lambda_integral(f: &CuspForm, s: u32, digits: u32) -> Result<Float> {
    let k = f.k;
    if s < 1 || s > k - 1 {
        return Err(Error::invalid(format!(
            "critical point s={s} outside 1..{}",
            k - 1
        )));
    }
    Ok(oracle_lambda_all(f, digits)?.swap_remove((s - 1) as usize))
}

/// Quadrature oracle for every critical point at once; all s share the same
/// evaluation nodes, so f(iy) is expanded once per node.
pub fn oracle_lambda_all(f: &CuspForm, digits: u32) -> Result<Vec<Float>> {
    let k = f.k;
    let bits = mp::bits_for_digits(digits + 10);
    let epsilon: i32 = if (k / 2) % 2 == 0 { 1 } else { -1 };
    let c_upper = f
        .deligne_upper()
        .unwrap_or_else(|| Float::with_val(bits, 1));

    // cut the integral at Y with tail <= 1.1 c Y^{k-2} e^{-2 pi Y}
    // (|f(iy)| <= 3.2 c e^{-2 pi y} for y >= k/pi, and the remaining
    // integral of y^{k-2} e^{-2 pi y} telescopes through the incomplete
    // gamma bound Gamma(s,x) <= 2 x^{s-1} e^{-x} for x >= 2s)
    let target = mp::pow10(bits, -(digits as i32 + 5));
    let mut y_cut = ((k as f64) / std::f64::consts::PI).ceil().max(2.0) as u32;
    loop {
        let yf = Float::with_val(bits, y_cut);
        let bound = Float::with_val(bits, 1.1f64)
            * &c_upper
            * yf.clone().pow(k - 2)
            * (-mp::two_pi(bits) * yf).exp();
        if bound < target {
            break;
        }
        y_cut += 1;
    }

    let smax = (k - 1) as usize;
    let integrand = |y: &Float| -> Vec<Float> {
        // f(iy) by Horner in e^{-2 pi y}
        let q = (-mp::two_pi(bits) * y).exp();
        let mut fy = Float::with_val(bits, 0);
        for n in (1..=f.n_coeffs()).rev() {
            fy += f.coeff(n);
            fy *= &q;
        }
        // powers y^0 .. y^{k-2}
        let mut powers = Vec::with_capacity(smax);
        let mut p = Float::with_val(bits, 1);
        powers.push(p.clone());
        for _ in 1..smax {
            p *= y;
            powers.push(p.clone());
        }
        (1..=smax)
            .map(|s| {
                let weight = if epsilon == 1 {
                    Float::with_val(bits, &powers[s - 1] + &powers[smax - s])
                } else {
                    Float::with_val(bits, &powers[s - 1] - &powers[smax - s])
                };
                weight * &fy
            })
            .collect()
    };

    tanh_sinh_vec(&integrand, smax, 1, y_cut, bits, &target)
}

/// Tanh-sinh quadrature of a vector-valued integrand over [a, b], refining
/// until two consecutive levels agree within `tol` in every component.
fn tanh_sinh_vec<F: Fn(&Float) -> Vec<Float>>(
    g: &F,
    dim: usize,
    a: u32,
    b: u32,
    bits: u32,
    tol: &Float,
) -> Result<Vec<Float>> {
    let half_width = (Float::with_val(bits, b) - Float::with_val(bits, a)) / 2u32;
    let center = (Float::with_val(bits, b) + Float::with_val(bits, a)) / 2u32;
    let half_pi = mp::pi(bits) / 2u32;

    // nodes cut off once their contribution is far below tolerance
    let term_cut = Float::with_val(bits, tol * &mp::pow10(bits, -8));

    let mut previous: Option<Vec<Float>> = None;
    for level in 2..=14u32 {
        let h = Float::with_val(bits, Float::i_exp(1, -(level as i32)));
        let mut sums = vec![Float::with_val(bits, 0); dim];
        let mut j = 0u64;
        let mut dead_streak = 0;
        loop {
            let t = Float::with_val(bits, &h * Float::with_val(bits, j));
            let (sinh, cosh) = t.sinh_cosh(Float::new(bits));
            let inner = Float::with_val(bits, &half_pi * &sinh);
            let (inner_sinh, inner_cosh) = inner.sinh_cosh(Float::new(bits));
            let tanh = Float::with_val(bits, &inner_sinh / &inner_cosh);
            let weight = Float::with_val(bits, &half_pi * &cosh)
                / Float::with_val(bits, &inner_cosh * &inner_cosh);

            let offsets: &[i32] = if j == 0 { &[1] } else { &[1, -1] };
            let mut contributed = Float::with_val(bits, 0);
            for &sign in offsets {
                let x = Float::with_val(
                    bits,
                    &center + Float::with_val(bits, &half_width * &tanh) * sign,
                );
                let values = g(&x);
                for (sum, v) in sums.iter_mut().zip(values) {
                    let term = Float::with_val(bits, v * &weight);
                    let mag = Float::with_val(bits, term.abs_ref());
                    if mag > contributed {
                        contributed = mag;
                    }
                    *sum += term;
                }
            }
            if contributed < term_cut && j > 4 {
                dead_streak += 1;
                if dead_streak >= 3 {
                    break;
                }
            } else {
                dead_streak = 0;
            }
            j += 1;
            if j > 1_000_000 {
                return Err(Error::numerical("tanh-sinh node budget exhausted".into()));
            }
        }
        let estimates: Vec<Float> = sums
            .into_iter()
            .map(|s| Float::with_val(bits, &s * &h) * &half_width)
            .collect();
        if let Some(prev) = &previous {
            let worst = estimates
                .iter()
                .zip(prev)
                .map(|(e, p)| Float::with_val(bits, e - p).abs())
                .fold(Float::with_val(bits, 0), |acc, d| acc.max(&d));
            if worst < *tol {
                return Ok(estimates);
            }
        }
        previous = Some(estimates);
    }
    Err(Error::numerical(
        "tanh-sinh quadrature did not converge within the level budget".into(),
    ))
}
