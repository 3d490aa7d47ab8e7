//! Gamma-family kernels used by the phase integrals and the Zhu-Nakamura
//! formulas.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ½ ln(2π)
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Bernoulli terms B₂ₖ / (2k(2k−1)) of the Stirling series.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Stirling's series is used once |z| reaches this radius.
const STIRLING_RADIUS: f64 = 16.0;

/// Natural log of Γ(x) for real x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma", x, "x > 0"));
    }
    Ok(log_gamma_positive(x))
}

fn log_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - log_gamma_positive(1.0 - x);
    }
    let x = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (x + 0.5) * t.ln() - t + series.ln()
}

/// Γ(x) for real x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// Euler's Beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y).
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("beta", x, "x > 0"));
    }
    if !(y > 0.0) {
        return Err(Error::domain("beta", y, "y > 0"));
    }
    Ok((log_gamma_positive(x) + log_gamma_positive(y) - log_gamma_positive(x + y)).exp())
}

fn stirling_log_gamma(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv_sq = inv * inv;
    let mut correction = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING_COEFFS {
        correction += power * c;
        power *= inv_sq;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + correction
}

/// ln Γ(iy) for y > 0 on the branch that is continuous along the positive
/// imaginary axis, so that Im ln Γ(iy) → −π/2 as y → 0⁺.
///
/// The argument is shifted to n + iy with |n + iy| ≥ 16 through
/// Γ(z) = Γ(z+n) / ∏ⱼ (z+j) and the Stirling series is summed there.
pub fn ln_gamma_imag(y: f64) -> Result<Complex64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain("ln_gamma_imag", y, "y > 0"));
    }
    let shift = if y >= STIRLING_RADIUS {
        0
    } else {
        (STIRLING_RADIUS * STIRLING_RADIUS - y * y).sqrt().ceil() as u32
    };
    let mut value = stirling_log_gamma(Complex64::new(f64::from(shift), y));
    for j in 0..shift {
        let j = f64::from(j);
        value -= Complex64::new(0.5 * (j * j + y * y).ln(), y.atan2(j));
    }
    Ok(value)
}

/// arg Γ(iy), continuous from the y → 0⁺ limit −π/2 (not reduced mod 2π).
pub fn arg_gamma_imag(y: f64) -> Result<f64> {
    ln_gamma_imag(y).map(|v| v.im)
}

/// ν_N = ∫₀¹ √(1 − y^{2N}) dy = B(1/2N, 3/2) / 2N.
pub fn nu_coefficient(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("nu_coefficient", 0.0, "N ≥ 1"));
    }
    let inv = 1.0 / (2.0 * f64::from(n));
    Ok(inv * beta(inv, 1.5)?)
}

/// The constant c = √π Γ(1/4) / (3√2 Γ(3/4)), equal to σ = δ of the
/// parabolic glancing model at α = 1.
pub fn parabolic_phase_constant() -> f64 {
    let ratio = (log_gamma_positive(0.25) - log_gamma_positive(0.75)).exp();
    PI.sqrt() * ratio / (3.0 * std::f64::consts::SQRT_2)
}
