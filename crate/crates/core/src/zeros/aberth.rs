//! Aberth-Ehrlich simultaneous root iteration at MPFR precision.

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::mp;

/// Dense complex polynomial, coefficients in ascending power order.
#[derive(Debug, Clone)]
pub(crate) struct CPoly {
    pub coeffs: Vec<Complex>,
    pub bits: u32,
}

impl CPoly {
    pub fn new(coeffs: Vec<Complex>, bits: u32) -> Self {
        assert!(!coeffs.is_empty());
        CPoly { coeffs, bits }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: &Complex) -> Complex {
        let mut acc = Complex::with_val(self.bits, 0);
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> CPoly {
        let d = self.degree();
        if d == 0 {
            return CPoly::new(vec![Complex::with_val(self.bits, 0)], self.bits);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| Complex::with_val(self.bits, c * Float::with_val(self.bits, j as u32)))
            .collect();
        CPoly::new(coeffs, self.bits)
    }

    pub fn max_coeff_abs(&self) -> Float {
        let mut m = Float::with_val(self.bits, 0);
        for c in &self.coeffs {
            let a = mp::cabs(c);
            if a > m {
                m = a;
            }
        }
        m
    }
}

pub(crate) enum IterationOutcome {
    Converged(Vec<Complex>),
    Stalled,
}

/// Run Aberth-Ehrlich on `poly`, starting on a circle of radius
/// (|a_0/a_d|)^{1/d} with seeded random phases. Gauss-Seidel sweeps; stops
/// when every correction is below the relative target or progress stalls.
pub(crate) fn aberth(poly: &CPoly, seed: u64, max_sweeps: usize) -> IterationOutcome {
    let bits = poly.bits;
    let d = poly.degree();
    let deriv = poly.derivative();

    // initial radius; fall back to 1 when the constant term vanishes
    let a0 = mp::cabs(&poly.coeffs[0]);
    let ad = mp::cabs(&poly.coeffs[d]);
    let radius = if a0.is_zero() {
        Float::with_val(bits, 1)
    } else {
        let ratio = a0 / &ad;
        ratio.pow(Float::with_val(bits, 1) / Float::with_val(bits, d as u32))
    };

    let mut rng = mp::stream_rng(seed, 0);
    let theta0 = mp::unit_float(&mut rng, bits);
    let two_pi = mp::two_pi(bits);
    let mut roots: Vec<Complex> = (0..d)
        .map(|j| {
            let jitter = mp::unit_float(&mut rng, bits);
            let frac = (Float::with_val(bits, j as u32) + jitter * 0.5f64 + 0.25f64)
                / Float::with_val(bits, d as u32);
            let angle = Float::with_val(bits, (frac + &theta0) * &two_pi);
            let (sin, cos) = angle.sin_cos(Float::new(bits));
            Complex::with_val(bits, (&radius * &cos, &radius * &sin))
        })
        .collect();

    // stop once corrections drop below ~2^-(bits-24) relative to the root
    let stop = Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 24)));
    let floor = Float::with_val(bits, 1e-30f64);

    let mut prev_worst: Option<Float> = None;
    let mut stall_count = 0usize;
    for _sweep in 0..max_sweeps {
        let mut worst = Float::with_val(bits, 0);
        for i in 0..d {
            let zi = roots[i].clone();
            let p = poly.eval(&zi);
            if mp::cabs(&p).is_zero() {
                continue;
            }
            let dp = deriv.eval(&zi);
            // Newton correction p/p'; nudge off a vanishing derivative
            let newton = if mp::cabs(&dp).is_zero() {
                Complex::with_val(bits, (&stop * &floor, Float::new(bits)))
            } else {
                Complex::with_val(bits, &p / &dp)
            };
            // Aberth repulsion sum over the other iterates
            let mut repulse = Complex::with_val(bits, 0);
            for (j, zj) in roots.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut diff = Complex::with_val(bits, &zi - zj);
                if mp::cabs(&diff).is_zero() {
                    diff = Complex::with_val(bits, (&stop * &floor, Float::new(bits)));
                }
                repulse += diff.recip();
            }
            let denom = Complex::with_val(bits, 1u32)
                - Complex::with_val(bits, &newton * &repulse);
            let correction = if mp::cabs(&denom).is_zero() {
                newton
            } else {
                Complex::with_val(bits, &newton / &denom)
            };
            let step = mp::cabs(&correction);
            let scale = mp::cabs(&zi).max(&floor);
            let rel = step / scale;
            if rel > worst {
                worst = rel;
            }
            roots[i] -= correction;
        }
        if worst < stop {
            return IterationOutcome::Converged(roots);
        }
        // stall detection: no factor-2 progress across many sweeps
        if let Some(pw) = &prev_worst {
            if Float::with_val(bits, &worst * 2u32) > *pw {
                stall_count += 1;
                if stall_count > 24 {
                    return IterationOutcome::Stalled;
                }
            } else {
                stall_count = 0;
            }
        }
        prev_worst = Some(worst);
    }
    IterationOutcome::Stalled
}
