//! Diabatic model family and the adiabatic quantities derived from it.
//!
//! The two-level Hamiltonian in the diabatic basis is
//! `H(t) = [[ε(t), V(t)], [V(t), −ε(t)]]`. Its adiabatic levels are
//! `∓√(ε² + V²)` and the coupling between adiabatic states is
//! `γ(t) = (V ε̇ − ε V̇) / (2(ε² + V²))` (the `+` orientation is used
//! everywhere in this crate).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::KeyValues;
use crate::{Error, Result};

/// Time-dependent two-level system in the diabatic representation.
pub trait TwoLevelSystem: Send + Sync {
    fn epsilon(&self, t: f64) -> f64;
    fn epsilon_dot(&self, t: f64) -> f64;
    fn coupling(&self, t: f64) -> f64;
    fn coupling_dot(&self, _t: f64) -> f64 {
        0.0
    }

    /// Largest |t| at which the diabatic levels cross; the asymptotic
    /// regions used by the propagator start beyond it.
    fn crossing_extent(&self) -> f64 {
        0.0
    }

    /// Upper adiabatic level √(ε² + V²).
    fn half_gap(&self, t: f64) -> f64 {
        self.epsilon(t).hypot(self.coupling(t))
    }

    /// Nonadiabatic coupling γ(t).
    fn gamma(&self, t: f64) -> f64 {
        let eps = self.epsilon(t);
        let v = self.coupling(t);
        let e = eps.hypot(v);
        (v * self.epsilon_dot(t) - eps * self.coupling_dot(t)) / (2.0 * e * e)
    }

    /// Mixing angle θ with tan 2θ = V/ε; the upper adiabatic state is
    /// (cos θ, sin θ) and the lower one (−sin θ, cos θ).
    fn mixing_angle(&self, t: f64) -> f64 {
        0.5 * self.coupling(t).atan2(self.epsilon(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum DiabaticModel {
    /// ε(t) = t^N, V = α, N even.
    Superparabolic { n: u32, alpha: f64 },
    /// ε(t) = (A t² − B)/2, V = V0.
    Parabolic { a: f64, b: f64, v0: f64 },
}

impl DiabaticModel {
    pub fn superparabolic(n: u32, alpha: f64) -> Result<Self> {
        let model = DiabaticModel::Superparabolic { n, alpha };
        model.validate()?;
        Ok(model)
    }

    pub fn parabolic(a: f64, b: f64, v0: f64) -> Result<Self> {
        let model = DiabaticModel::Parabolic { a, b, v0 };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DiabaticModel::Superparabolic { n, alpha } => {
                if n < 2 || n % 2 != 0 {
                    return Err(Error::InvalidModel(format!("superparabolic N must be even and ≥ 2, got {n}")));
                }
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidModel(format!("α must be positive, got {alpha}")));
                }
            }
            DiabaticModel::Parabolic { a, b, v0 } => {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::InvalidModel(format!("A must be positive, got {a}")));
                }
                if !b.is_finite() {
                    return Err(Error::InvalidModel(format!("B must be finite, got {b}")));
                }
                if !(v0 > 0.0) || !v0.is_finite() {
                    return Err(Error::InvalidModel(format!("V0 must be positive, got {v0}")));
                }
            }
        }
        Ok(())
    }

    /// Builds a model from `model`, `N`, `alpha`, `A`, `B`, `V0` keys.
    /// `model` defaults to `superparabolic`.
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let missing = |k: &str| Error::Parse(format!("missing key {k}"));
        match kv.get("model").unwrap_or("superparabolic") {
            "superparabolic" => {
                let n = kv.get_parsed("N")?.ok_or_else(|| missing("N"))?;
                let alpha = kv.get_parsed("alpha")?.ok_or_else(|| missing("alpha"))?;
                Self::superparabolic(n, alpha)
            }
            "parabolic" => {
                let a = kv.get_parsed("A")?.ok_or_else(|| missing("A"))?;
                let b = kv.get_parsed("B")?.unwrap_or(0.0);
                let v0 = kv.get_parsed("V0")?.ok_or_else(|| missing("V0"))?;
                Self::parabolic(a, b, v0)
            }
            other => Err(Error::Parse(format!("unknown model {other:?}"))),
        }
    }

    /// Diabatic level ε(t) and coupling V(t).
    pub fn diabatic(&self, t: f64) -> (f64, f64) {
        (self.epsilon(t), self.coupling(t))
    }

    /// Adiabatic levels (lower, upper) = ∓√(ε² + V²).
    pub fn adiabatic_levels(&self, t: f64) -> (f64, f64) {
        let e = self.half_gap(t);
        (-e, e)
    }

    pub fn nonadiabatic_coupling(&self, t: f64) -> Result<f64> {
        let (eps, v) = self.diabatic(t);
        if eps == 0.0 && v == 0.0 {
            return Err(Error::Singularity { t });
        }
        Ok(self.gamma(t))
    }

    /// γ(t) continued to complex time (V is constant for both variants).
    pub fn nonadiabatic_coupling_complex(&self, t: Complex64) -> Complex64 {
        let (eps, eps_dot, v) = match *self {
            DiabaticModel::Superparabolic { n, alpha } => {
                let n = n as i32;
                (t.powi(n), t.powi(n - 1) * f64::from(n), alpha)
            }
            DiabaticModel::Parabolic { a, b, v0 } => ((t * t * a - b) * 0.5, t * a, v0),
        };
        eps_dot * v / ((eps * eps + v * v) * 2.0)
    }

    /// Reduced parameters (a², b²) of the equivalent linear-crossing problem.
    ///
    /// Parabolic models are first rescaled in time to V0 = 1/2, where
    /// a² = A and b² = B hold exactly; in general a² = A/(8V0³) and
    /// b² = B/(2V0). Superparabolic models use a² = 1/(4α³) for every N,
    /// exact for N = 2, with b² = 0 marking the glancing case.
    pub fn reduced_parameters(&self) -> (f64, f64) {
        match *self {
            DiabaticModel::Superparabolic { alpha, .. } => (0.25 / alpha.powi(3), 0.0),
            DiabaticModel::Parabolic { a, b, v0 } => (a / (8.0 * v0.powi(3)), b / (2.0 * v0)),
        }
    }
}

impl TwoLevelSystem for DiabaticModel {
    fn epsilon(&self, t: f64) -> f64 {
        match *self {
            DiabaticModel::Superparabolic { n, .. } => t.powi(n as i32),
            DiabaticModel::Parabolic { a, b, .. } => 0.5 * (a * t * t - b),
        }
    }

    fn epsilon_dot(&self, t: f64) -> f64 {
        match *self {
            DiabaticModel::Superparabolic { n, .. } => f64::from(n) * t.powi(n as i32 - 1),
            DiabaticModel::Parabolic { a, .. } => a * t,
        }
    }

    fn coupling(&self, _t: f64) -> f64 {
        match *self {
            DiabaticModel::Superparabolic { alpha, .. } => alpha,
            DiabaticModel::Parabolic { v0, .. } => v0,
        }
    }

    fn crossing_extent(&self) -> f64 {
        match *self {
            DiabaticModel::Superparabolic { .. } => 0.0,
            DiabaticModel::Parabolic { a, b, .. } => (b.max(0.0) / a).sqrt(),
        }
    }
}

impl fmt::Display for DiabaticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiabaticModel::Superparabolic { n, alpha } => write!(f, "superparabolic(N={n}, alpha={alpha})"),
            DiabaticModel::Parabolic { a, b, v0 } => write!(f, "parabolic(A={a}, B={b}, V0={v0})"),
        }
    }
}

/// The system with time reversed: ε̃(t) = ε(−t), Ṽ(t) = V(−t).
#[derive(Debug, Clone, Copy)]
pub struct TimeMirrored<S>(pub S);

impl<S: TwoLevelSystem> TwoLevelSystem for TimeMirrored<S> {
    fn epsilon(&self, t: f64) -> f64 {
        self.0.epsilon(-t)
    }
    fn epsilon_dot(&self, t: f64) -> f64 {
        -self.0.epsilon_dot(-t)
    }
    fn coupling(&self, t: f64) -> f64 {
        self.0.coupling(-t)
    }
    fn coupling_dot(&self, t: f64) -> f64 {
        -self.0.coupling_dot(-t)
    }
    fn crossing_extent(&self) -> f64 {
        self.0.crossing_extent()
    }
}
