//! Multiprecision polynomial root-finding with circle/disk verdicts, plus the
//! truncated-exponential polynomials and their disk criteria.

mod aberth;
mod companion;
mod truncexp;

pub use truncexp::{h_disk_criterion, sample_t_lower_bound, truncated_exp, DiskCriterion, TruncExp};

use rug::ops::Pow;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp;

use aberth::{aberth, CPoly, IterationOutcome};

/// How tolerance-based classification of a root multiset came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// every |root| within `tolerance` of 1
    Unimodular,
    /// every root within the closed unit disk up to `tolerance`
    InDisk,
    Neither,
}

/// Which algorithm produced the roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Aberth,
    CompanionQr,
}

/// Root multiset of one polynomial together with residual certificates.
#[derive(Debug, Clone)]
pub struct ZeroReport {
    pub degree: usize,
    pub roots: Vec<Complex>,
    /// |poly(root)| / max|coeff| per root
    pub residuals: Vec<Float>,
    pub max_circle_distance: Float,
    pub max_disk_excess: Float,
    pub verdict: Verdict,
    pub tolerance: Float,
    /// false when some residual exceeds 10^-(P/3); such reports must not
    /// feed verdicts downstream
    pub reliable: bool,
    pub method: Method,
    pub seed: u64,
    pub precision_digits: u32,
    /// t in the balancing substitution z -> (2pi)^t y applied before iterating
    pub scaling_power: i64,
    /// number of leading coefficients stripped as degenerate
    pub stripped_leading: usize,
}

impl ZeroReport {
    pub fn max_root_abs(&self) -> Float {
        let bits = self.tolerance.prec();
        let mut m = Float::with_val(bits, 0);
        for r in &self.roots {
            let a = mp::cabs(r);
            if a > m {
                m = a;
            }
        }
        m
    }
}

/// Default classification tolerance used when none is supplied.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// All complex roots of the polynomial with ascending complex coefficients.
/// Simultaneous iteration at `digits` working precision, seeded phases, with
/// a companion-matrix eigenvalue fallback when the iteration stalls.
pub fn find_roots(coeffs: &[Complex], digits: u32, seed: u64) -> Result<ZeroReport> {
    find_roots_with_tolerance(coeffs, digits, seed, DEFAULT_TOLERANCE)
}

pub fn find_roots_with_tolerance(
    coeffs: &[Complex],
    digits: u32,
    seed: u64,
    tolerance: f64,
) -> Result<ZeroReport> {
    let bits = mp::bits_for_digits(digits);
    if coeffs.is_empty() {
        return Err(Error::invalid("empty coefficient list"));
    }
    let original: Vec<Complex> = coeffs
        .iter()
        .map(|c| Complex::with_val(bits, c))
        .collect();

    // degenerate-leading handling: strip coefficients below 10^-(P/2) of the
    // largest coefficient magnitude
    let scale = original
        .iter()
        .fold(Float::with_val(bits, 0), |acc, c| acc.max(&mp::cabs(c)));
    if scale.is_zero() {
        return Err(Error::invalid("zero polynomial"));
    }
    let strip_threshold = Float::with_val(bits, &scale * &mp::pow10(bits, -((digits / 2) as i32)));
    let mut top = original.len();
    while top > 1 && mp::cabs(&original[top - 1]) <= strip_threshold {
        top -= 1;
    }
    let stripped_leading = original.len() - top;
    let work = &original[..top];
    if work.len() < 2 {
        return Err(Error::invalid(
            "degree < 1 after stripping degenerate leading coefficients",
        ));
    }

    // factor out exact zero roots at the origin
    let mut low = 0usize;
    while low < work.len() - 1 && mp::cabs(&work[low]).is_zero() {
        low += 1;
    }
    let zero_roots = low;
    let reduced = &work[low..];
    let degree = reduced.len() - 1;

    // balance magnitudes with z = (2pi)^t y
    let a0 = mp::cabs(&reduced[0]);
    let ad = mp::cabs(&reduced[degree]);
    let ln2pi = mp::two_pi(bits).ln();
    let t_est = (a0.ln() - ad.ln()) / (&ln2pi * Float::with_val(bits, degree as u32));
    let scaling_power = t_est.to_f64().round().clamp(-1e6, 1e6) as i64;
    let scale_factor = mp::two_pi(bits).pow(scaling_power as i32);
    let mut balanced = Vec::with_capacity(reduced.len());
    let mut power = Float::with_val(bits, 1);
    for c in reduced {
        balanced.push(Complex::with_val(bits, c * &power));
        power *= &scale_factor;
    }

    let poly = CPoly::new(balanced, bits);
    let max_sweeps = 120 + 6 * degree.max(64);
    let (scaled_roots, method) = match aberth(&poly, seed, max_sweeps) {
        IterationOutcome::Converged(roots) => (roots, Method::Aberth),
        IterationOutcome::Stalled => {
            // normalize to monic and hand off to the companion matrix
            let lead = poly.coeffs[degree].clone();
            let lower: Vec<Complex> = poly.coeffs[..degree]
                .iter()
                .map(|c| Complex::with_val(bits, c / &lead))
                .collect();
            (
                companion::companion_eigenvalues(&lower, bits)?,
                Method::CompanionQr,
            )
        }
    };

    // unscale, reattach origin roots, certify residuals on the original input
    let mut roots: Vec<Complex> = scaled_roots
        .into_iter()
        .map(|y| Complex::with_val(bits, y * &scale_factor))
        .collect();
    for _ in 0..zero_roots {
        roots.push(Complex::with_val(bits, 0));
    }
    sort_roots(&mut roots);

    let full = CPoly::new(work.to_vec(), bits);
    let coeff_scale = full.max_coeff_abs();
    let residual_bound = mp::pow10(bits, -((digits / 3) as i32));
    let mut residuals = Vec::with_capacity(roots.len());
    let mut reliable = true;
    for r in &roots {
        let v = mp::cabs(&full.eval(r)) / &coeff_scale;
        if v > residual_bound {
            reliable = false;
        }
        residuals.push(v);
    }

    let tol = Float::with_val(bits, tolerance);
    let mut max_circle = Float::with_val(bits, 0);
    let mut max_abs = Float::with_val(bits, 0);
    for r in &roots {
        let a = mp::cabs(r);
        let dist = Float::with_val(bits, &a - 1u32).abs();
        if dist > max_circle {
            max_circle = dist;
        }
        if a > max_abs {
            max_abs = a;
        }
    }
    let disk_excess = Float::with_val(bits, &max_abs - 1u32).max(&Float::with_val(bits, 0));
    let verdict = if max_circle < tol {
        Verdict::Unimodular
    } else if disk_excess <= tol {
        Verdict::InDisk
    } else {
        Verdict::Neither
    };

    Ok(ZeroReport {
        degree: roots.len(),
        roots,
        residuals,
        max_circle_distance: max_circle,
        max_disk_excess: disk_excess,
        verdict,
        tolerance: tol,
        reliable,
        method,
        seed,
        precision_digits: digits,
        scaling_power,
        stripped_leading,
    })
}

/// Roots of a polynomial with real coefficients.
pub fn find_roots_real(coeffs: &[Float], digits: u32, seed: u64) -> Result<ZeroReport> {
    let bits = mp::bits_for_digits(digits);
    let c: Vec<Complex> = coeffs
        .iter()
        .map(|x| Complex::with_val(bits, (Float::with_val(bits, x), Float::new(bits))))
        .collect();
    find_roots(&c, digits, seed)
}

/// Canonical deterministic root order: by real part, then imaginary part.
fn sort_roots(roots: &mut [Complex]) {
    roots.sort_by(|a, b| {
        a.real()
            .partial_cmp(b.real())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.imag()
                    .partial_cmp(b.imag())
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
}

/// Unimodularity verdict at tolerance `tol`, cross-checked through Cohn's
/// criterion (self-reciprocal + derivative roots inside the closed disk)
/// whenever the input is real and self-reciprocal within `tol`.
pub struct UnimodularityReport {
    pub report: ZeroReport,
    /// Some(agrees) when the Cohn cross-check applied
    pub cohn_agrees: Option<bool>,
}

pub fn unimodularity_report(
    coeffs: &[Float],
    digits: u32,
    seed: u64,
    tol: f64,
) -> Result<UnimodularityReport> {
    let report = find_roots_real(coeffs, digits, seed)?;
    let bits = mp::bits_for_digits(digits);

    let mut cohn_agrees = None;
    if is_self_reciprocal(coeffs, bits, tol) {
        // Cohn: unimodular <=> self-reciprocal and P' has no zero outside
        // the closed unit disk
        let deriv: Vec<Float> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| Float::with_val(bits, c * Float::with_val(bits, j as u32)))
            .collect();
        if deriv.len() >= 2 {
            let dreport = find_roots_real(&deriv, digits, seed)?;
            let tol_f = Float::with_val(bits, tol);
            let in_disk = dreport.max_root_abs() <= Float::with_val(bits, 1u32) + tol_f;
            let unimodular = report.verdict == Verdict::Unimodular;
            cohn_agrees = Some(in_disk == unimodular);
        }
    }
    Ok(UnimodularityReport { report, cohn_agrees })
}

/// P(z) = eps z^d P(1/z) with eps = +-1, checked coefficientwise relative to
/// the largest coefficient.
fn is_self_reciprocal(coeffs: &[Float], bits: u32, tol: f64) -> bool {
    let d = coeffs.len() - 1;
    let scale = coeffs
        .iter()
        .fold(Float::with_val(bits, 0), |acc, c| {
            acc.max(&Float::with_val(bits, c.abs_ref()))
        });
    if scale.is_zero() {
        return false;
    }
    let tol = Float::with_val(bits, &scale * &Float::with_val(bits, tol));
    for eps in [1i32, -1] {
        let ok = (0..=d).all(|j| {
            let diff = Float::with_val(bits, &coeffs[j] - Float::with_val(bits, &coeffs[d - j] * eps));
            diff.abs() <= tol
        });
        if ok {
            return true;
        }
    }
    false
}

/// Real roots of an exact integer polynomial (used for Hecke characteristic
/// polynomials, whose roots are known to be real). Errors if any computed
/// root carries a non-negligible imaginary part.
pub fn real_roots_of_integer_poly(
    coeffs: &[rug::Integer],
    digits: u32,
    seed: u64,
) -> Result<Vec<Float>> {
    let bits = mp::bits_for_digits(digits);
    let c: Vec<Complex> = coeffs
        .iter()
        .map(|x| Complex::with_val(bits, (Float::with_val(bits, x), Float::new(bits))))
        .collect();
    let report = find_roots(&c, digits, seed)?;
    if !report.reliable {
        return Err(Error::numerical(
            "root residuals exceeded the certification bound".into(),
        ));
    }
    let im_tol = mp::pow10(bits, -((digits / 3) as i32));
    let mut out = Vec::with_capacity(report.roots.len());
    for r in &report.roots {
        let im = Float::with_val(bits, r.imag().abs_ref());
        let re = Float::with_val(bits, r.real().abs_ref());
        let allowed = Float::with_val(bits, &im_tol * &re.max(&Float::with_val(bits, 1)));
        if im > allowed {
            return Err(Error::numerical(format!(
                "expected real root, found imaginary part {:e}",
                im.to_f64()
            )));
        }
        out.push(Float::with_val(bits, r.real()));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_poly(bits: u32, coeffs: &[f64]) -> Vec<Float> {
        coeffs.iter().map(|&c| Float::with_val(bits, c)).collect()
    }

    #[test]
    fn z_squared_plus_one_is_unimodular() {
        let bits = mp::bits_for_digits(64);
        let report = find_roots_real(&real_poly(bits, &[1.0, 0.0, 1.0]), 64, 1).unwrap();
        assert_eq!(report.degree, 2);
        assert_eq!(report.verdict, Verdict::Unimodular);
        assert!(report.max_circle_distance < mp::pow10(bits, -30));
        assert!(report.reliable);
        for r in &report.roots {
            assert!(Float::with_val(bits, r.real().abs_ref()) < mp::pow10(bits, -30));
        }
    }

    #[test]
    fn off_circle_roots_yield_neither() {
        let bits = mp::bits_for_digits(64);
        // (z-2)(z-1/2) = z^2 - 2.5z + 1
        let report = find_roots_real(&real_poly(bits, &[1.0, -2.5, 1.0]), 64, 1).unwrap();
        assert_eq!(report.verdict, Verdict::Neither);
        let max_abs = report.max_root_abs().to_f64();
        assert!((max_abs - 2.0).abs() < 1e-40);
    }

    #[test]
    fn in_disk_verdict() {
        let bits = mp::bits_for_digits(64);
        // (z + 1/2)(z + 1/3): all roots strictly inside
        let report =
            find_roots_real(&real_poly(bits, &[1.0 / 6.0, 5.0 / 6.0, 1.0]), 64, 1).unwrap();
        assert_eq!(report.verdict, Verdict::InDisk);
    }

    #[test]
    fn unimodularity_report_cohn_cross_check() {
        // z^2 - 3z + 1 is self-reciprocal with real roots off the circle
        let bits = mp::bits_for_digits(64);
        let r = unimodularity_report(&real_poly(bits, &[1.0, -3.0, 1.0]), 64, 1, 1e-10).unwrap();
        assert_ne!(r.report.verdict, Verdict::Unimodular);
        assert_eq!(r.cohn_agrees, Some(true));
        // z^2 + z + 1 has roots exactly on the circle
        let r2 = unimodularity_report(&real_poly(bits, &[1.0, 1.0, 1.0]), 64, 1, 1e-10).unwrap();
        assert_eq!(r2.report.verdict, Verdict::Unimodular);
        assert_eq!(r2.cohn_agrees, Some(true));
    }

    #[test]
    fn origin_roots_are_reported() {
        let bits = mp::bits_for_digits(64);
        // z^3 + z^2 = z^2 (z + 1)
        let report = find_roots_real(&real_poly(bits, &[0.0, 0.0, 1.0, 1.0]), 64, 1).unwrap();
        assert_eq!(report.degree, 3);
        let zeros = report
            .roots
            .iter()
            .filter(|r| mp::cabs(r).is_zero())
            .count();
        assert_eq!(zeros, 2);
        assert_eq!(report.verdict, Verdict::Neither);
    }

    #[test]
    fn companion_fallback_agrees_with_aberth() {
        let bits = mp::bits_for_digits(40);
        // force the fallback path directly on a modest polynomial
        let coeffs: Vec<Complex> = [24.0, -50.0, 35.0, -10.0, 1.0]
            .iter()
            .map(|&c| Complex::with_val(bits, c))
            .collect();
        let lead = coeffs.last().unwrap().clone();
        let lower: Vec<Complex> = coeffs[..4]
            .iter()
            .map(|c| Complex::with_val(bits, c / &lead))
            .collect();
        let eigs = companion::companion_eigenvalues(&lower, bits).unwrap();
        let mut res: Vec<f64> = eigs.iter().map(|e| e.real().to_f64()).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // roots of (z-1)(z-2)(z-3)(z-4)
        for (i, r) in res.iter().enumerate() {
            assert!((r - (i as f64 + 1.0)).abs() < 1e-25);
        }
    }

    #[test]
    fn determinism_same_seed_same_roots() {
        let bits = mp::bits_for_digits(64);
        let poly = real_poly(bits, &[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0]);
        let a = find_roots_real(&poly, 64, 77).unwrap();
        let b = find_roots_real(&poly, 64, 77).unwrap();
        for (x, y) in a.roots.iter().zip(&b.roots) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn rejects_zero_polynomial() {
        let bits = mp::bits_for_digits(64);
        assert!(find_roots_real(&real_poly(bits, &[0.0, 0.0]), 64, 1).is_err());
        assert!(find_roots_real(&real_poly(bits, &[5.0]), 64, 1).is_err());
    }
}
