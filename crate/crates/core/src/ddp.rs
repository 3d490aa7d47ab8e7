//! Dykhne-Davis-Pechukas approximation for the superparabolic family.
//!
//! The adiabatic levels of ε = t^N, V = α coincide at the complex zero
//! points t_c^k = α^{1/N} e^{iπ(2k−1)/2N}, k = 1…N, where the phase
//! integral D(t_c^k) = ∫₀^{t_c} 2E dt has the closed form η e^{iπ(2k−1)/2N}
//! with η = 2ν_N α^{(N+1)/N}. Summing all upper-half-plane zeros coherently
//! with residues Γ_k = (−1)^k gives the generalized DDP probability.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::models::DiabaticModel;
use crate::specialfn::{nu_coefficient, parabolic_phase_constant};
use crate::{Error, Result};

const RICHARDSON_STAGES: usize = 6;
const RICHARDSON_FIRST_OFFSET: f64 = 1e-2;
const RICHARDSON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroPoint {
    pub k: u32,
    pub value: Complex64,
}

/// Real and imaginary parts of a phase integral, D = σ + iδ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseIntegral {
    pub sigma: f64,
    pub delta: f64,
}

impl PhaseIntegral {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.sigma, self.delta)
    }
}

impl From<Complex64> for PhaseIntegral {
    fn from(d: Complex64) -> Self {
        Self { sigma: d.re, delta: d.im }
    }
}

fn check_family(n: u32, alpha: f64) -> Result<()> {
    DiabaticModel::superparabolic(n, alpha).map(|_| ())
}

/// Angle π(2k−1)/2N of the k-th zero point.
fn zero_angle(n: u32, k: u32) -> f64 {
    PI * f64::from(2 * k - 1) / (2.0 * f64::from(n))
}

/// η = 2ν_N α^{(N+1)/N}.
pub fn eta(n: u32, alpha: f64) -> Result<f64> {
    check_family(n, alpha)?;
    Ok(2.0 * nu_coefficient(n)? * alpha.powf(f64::from(n + 1) / f64::from(n)))
}

/// All N upper-half-plane zero points, ordered by k.
pub fn zero_points(n: u32, alpha: f64) -> Result<Vec<ZeroPoint>> {
    check_family(n, alpha)?;
    let radius = alpha.powf(1.0 / f64::from(n));
    Ok((1..=n)
        .map(|k| ZeroPoint { k, value: Complex64::from_polar(radius, zero_angle(n, k)) })
        .collect())
}

/// D(t_c^k) = η e^{iπ(2k−1)/2N}.
pub fn phase_integral(n: u32, alpha: f64, k: u32) -> Result<Complex64> {
    let eta = eta(n, alpha)?;
    if k == 0 || k > n {
        return Err(Error::domain("phase_integral", f64::from(k), "1 ≤ k ≤ N"));
    }
    Ok(Complex64::from_polar(eta, zero_angle(n, k)))
}

/// Γ = 4i lim_{t→t_c} (t − t_c)·(−γ(t)), the residue of the coupling as it
/// enters the equation for the upper adiabatic amplitude.
///
/// The limit is extrapolated from offsets h_j = 10⁻²·2^{−j}·|t_c| taken
/// radially inward.
pub fn residue_prefactor(model: &DiabaticModel, t_c: Complex64) -> Result<Complex64> {
    let radius = t_c.norm();
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::NonSimpleZero { re: t_c.re, im: t_c.im });
    }
    let inward = -t_c / radius;
    let sample = |h: f64| {
        let offset = inward * h;
        Complex64::new(0.0, 4.0) * offset * -model.nonadiabatic_coupling_complex(t_c + offset)
    };
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(RICHARDSON_STAGES);
    for j in 0..RICHARDSON_STAGES {
        let h = RICHARDSON_FIRST_OFFSET * radius * 0.5f64.powi(j as i32);
        let mut row = vec![sample(h)];
        for m in 1..=j {
            let factor = 2f64.powi(m as i32) - 1.0;
            let prev = row[m - 1];
            row.push(prev + (prev - table[j - 1][m - 1]) / factor);
        }
        table.push(row);
    }
    let best = table[RICHARDSON_STAGES - 1][RICHARDSON_STAGES - 1];
    let previous = table[RICHARDSON_STAGES - 2][RICHARDSON_STAGES - 2];
    let converged = (best - previous).norm() <= RICHARDSON_TOL * best.norm().max(1.0);
    if !converged || !best.re.is_finite() || !best.im.is_finite() {
        return Err(Error::NonSimpleZero { re: t_c.re, im: t_c.im });
    }
    Ok(best)
}

/// P = 4 |Σ_{k=1}^{N/2} (−1)^k e^{−η sin θ_k} sin(η cos θ_k)|².
///
/// The coherent sum is not clamped; a value above one is reported as a
/// domain error.
pub fn ddp_probability(n: u32, alpha: f64) -> Result<f64> {
    let eta = eta(n, alpha)?;
    let sum: f64 = (1..=n / 2)
        .map(|k| {
            let (s, c) = zero_angle(n, k).sin_cos();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (-eta * s).exp() * (eta * c).sin()
        })
        .sum();
    let p = 4.0 * sum * sum;
    if p > 1.0 + 1e-12 {
        return Err(Error::domain("ddp_probability", p, "P ≤ 1"));
    }
    Ok(p)
}

/// 4 e^{−2cα^{3/2}} sin²(cα^{3/2}), the N = 2 case in closed form.
pub fn ddp_parabolic_closed_form(alpha: f64) -> f64 {
    let x = parabolic_phase_constant() * alpha.powf(1.5);
    4.0 * (-2.0 * x).exp() * x.sin().powi(2)
}

/// e^{−2η sin(π/2N)}, the contribution of the zero nearest the real axis.
pub fn ddp_single_zero(eta: f64, n: u32) -> f64 {
    (-2.0 * eta * (PI / (2.0 * f64::from(n))).sin()).exp()
}
