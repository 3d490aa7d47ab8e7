//! Zhu-Nakamura closed-form transition probabilities.
//!
//! Two branches are provided: the double-crossing formula (b² ≥ 0), built
//! from the modified Landau-Zener passage probability p, the Stokes phase
//! and the δ_ψ substitution; and the tunneling formula (b² ≤ 0) through the
//! Stokes constant U₁. For general adiabatic curves the reduced parameters
//! a², b² are fitted from the extrema of the levels and of their gap, and
//! the phase integral σ + iδ can be estimated from the same geometry.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::ddp::phase_integral;
use crate::models::{DiabaticModel, TwoLevelSystem};
use crate::numerics::{integrate, integrate_complex, minimize_scalar};
use crate::specialfn::{arg_gamma_imag, log_gamma};
use crate::{Error, Result};

const DEGENERACY_TOL: f64 = 1e-8;
const FIT_GRID: usize = 2001;
const QUAD_TOL: f64 = 1e-13;

/// Reduced coupling a² with the phase integral σ + iδ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZntInputs {
    pub a_sq: f64,
    pub sigma: f64,
    pub delta: f64,
}

impl ZntInputs {
    pub fn new(a_sq: f64, sigma: f64, delta: f64) -> Result<Self> {
        if !(a_sq > 0.0) || !a_sq.is_finite() {
            return Err(Error::domain("ZntInputs", a_sq, "a² > 0"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::domain("ZntInputs", delta, "δ > 0"));
        }
        if !sigma.is_finite() {
            return Err(Error::domain("ZntInputs", sigma, "finite σ"));
        }
        Ok(Self { a_sq, sigma, delta })
    }

    /// Glancing-family inputs: a² = 1/(4α³) and σ + iδ = D(t_c¹).
    pub fn superparabolic(n: u32, alpha: f64) -> Result<Self> {
        let model = DiabaticModel::superparabolic(n, alpha)?;
        let d = phase_integral(n, alpha, 1)?;
        Self::new(model.reduced_parameters().0, d.re, d.im)
    }

    pub fn double_crossing(&self, b_sq: f64) -> Result<f64> {
        double_crossing_probability(self.a_sq, b_sq, self.sigma, self.delta)
    }

    pub fn tunneling(&self) -> Result<f64> {
        tunneling_probability(self.a_sq, self.sigma, self.delta)
    }
}

fn check_a_sq(function: &'static str, a_sq: f64) -> Result<()> {
    if a_sq > 0.0 && a_sq.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, a_sq, "a² > 0"))
    }
}

/// p = exp[−(π/4a)(2/(b² + √(b⁴ + 0.4a² + 0.7)))^{1/2}].
pub fn single_passage_probability(a_sq: f64, b_sq: f64) -> Result<f64> {
    check_a_sq("single_passage_probability", a_sq)?;
    let inner = b_sq * b_sq + 0.4 * a_sq + 0.7;
    let denom = b_sq + inner.sqrt();
    if !(denom > 0.0) {
        return Err(Error::domain("single_passage_probability", denom, "b² + √(b⁴ + 0.4a² + 0.7) > 0"));
    }
    Ok((-(PI / (4.0 * a_sq.sqrt())) * (2.0 / denom).sqrt()).exp())
}

/// Single-passage probability of the N = 2 glancing model,
/// exp[−(πα^{3/2}/√2)(0.1α^{−3} + 0.7)^{−1/4}].
pub fn single_passage_parabolic(alpha: f64) -> f64 {
    (-(PI * alpha.powf(1.5) / std::f64::consts::SQRT_2) * (0.1 / alpha.powi(3) + 0.7).powf(-0.25)).exp()
}

/// δ_ψ = (1 + 5√a/(√a + 0.8)·10^{−σ})·δ.
pub fn delta_psi(a_sq: f64, sigma: f64, delta: f64) -> f64 {
    let root_a = a_sq.sqrt().sqrt();
    (1.0 + 5.0 * root_a / (root_a + 0.8) * 10f64.powf(-sigma)) * delta
}

/// φ_s(δ) = −δ/π + (δ/π)ln(δ/π) − arg Γ(iδ/π) − π/4.
pub fn stokes_phase(delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain("stokes_phase", delta, "δ > 0"));
    }
    let y = delta / PI;
    Ok(-y + y * y.ln() - arg_gamma_imag(y)? - PI / 4.0)
}

/// P = 4p(1 − p) sin²(σ + φ_s(δ_ψ)).
pub fn double_crossing_probability(a_sq: f64, b_sq: f64, sigma: f64, delta: f64) -> Result<f64> {
    let p = single_passage_probability(a_sq, b_sq)?;
    if !(delta > 0.0) {
        return Err(Error::domain("double_crossing_probability", delta, "δ > 0"));
    }
    let psi = sigma + stokes_phase(delta_psi(a_sq, sigma, delta))?;
    Ok(4.0 * p * (1.0 - p) * psi.sin().powi(2))
}

/// B(x) = 2π x^{2x} / (x Γ²(x)).
pub fn tunneling_b(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("tunneling_b", x, "x > 0"));
    }
    Ok(2.0 * PI * (2.0 * x * x.ln() - x.ln() - 2.0 * log_gamma(x)?).exp())
}

/// Intermediate quantities of the tunneling branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunnelingTerms {
    pub g1: f64,
    pub g2: f64,
    pub b: f64,
    pub p: f64,
    pub radicand: f64,
    pub re_u1: f64,
    pub im_u1: f64,
}

impl TunnelingTerms {
    /// 4p(1 − p) sin²(arg U₁).
    pub fn probability(&self) -> f64 {
        4.0 * self.p * (1.0 - self.p) * self.im_u1.atan2(self.re_u1).sin().powi(2)
    }
}

pub fn tunneling_terms(a_sq: f64, sigma: f64, delta: f64) -> Result<TunnelingTerms> {
    check_a_sq("tunneling_terms", a_sq)?;
    if !(delta > 0.0) {
        return Err(Error::domain("tunneling_terms", delta, "δ > 0"));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain("tunneling_terms", sigma, "σ > 0"));
    }
    let g1 = 1.8 * a_sq.powf(0.23) * (-delta).exp();
    let g2 = 3.0 * sigma / (PI * delta) * (1.2 + a_sq).ln() - 1.0 / a_sq;
    let b = tunneling_b(sigma / PI)?;
    let (s, c) = sigma.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let p = 1.0 / (1.0 + b * (2.0 * sigma).exp() - g2 * s2);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("tunneling_terms", p, "0 < p < 1"));
    }
    let root_b = b.sqrt();
    let re_u1 = c * (root_b * sigma.exp() - g1 * s2 * (-sigma).exp() / root_b);
    let radicand = b * (2.0 * sigma).exp() - g1 * g1 * s2 * c2 * (-2.0 * sigma).exp() / b + 2.0 * g1 * c2 - g2;
    if radicand < 0.0 {
        return Err(Error::BranchFailure { radicand });
    }
    let im_u1 = s * radicand.sqrt();
    Ok(TunnelingTerms { g1, g2, b, p, radicand, re_u1, im_u1 })
}

pub fn tunneling_probability(a_sq: f64, sigma: f64, delta: f64) -> Result<f64> {
    tunneling_terms(a_sq, sigma, delta).map(|t| t.probability())
}

/// Lower and upper adiabatic levels E₁ < E₂ on a finite window.
pub trait AdiabaticCurves {
    fn lower(&self, t: f64) -> f64;
    fn upper(&self, t: f64) -> f64;
    fn interval(&self) -> (f64, f64);

    fn gap(&self, t: f64) -> f64 {
        self.upper(t) - self.lower(t)
    }
}

/// Adiabatic levels ∓√(ε² + V²) of a model on a symmetric window.
#[derive(Debug, Clone, Copy)]
pub struct ModelCurves<S> {
    pub system: S,
    pub half_width: f64,
}

impl<S: TwoLevelSystem> ModelCurves<S> {
    /// Window reaching past every diabatic crossing.
    pub fn new(system: S) -> Self {
        let half_width = 2.0 * system.crossing_extent() + 2.0;
        Self { system, half_width }
    }
}

impl<S: TwoLevelSystem> AdiabaticCurves for ModelCurves<S> {
    fn lower(&self, t: f64) -> f64 {
        -self.system.half_gap(t)
    }
    fn upper(&self, t: f64) -> f64 {
        self.system.half_gap(t)
    }
    fn interval(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }
}

/// Natural cubic spline through tabulated samples.
#[derive(Debug, Clone)]
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl Spline {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut second = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * slope / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        second[n - 1] = 0.0;
        for k in (0..n - 1).rev() {
            second[k] = second[k] * second[k + 1] + u[k];
        }
        Self { x, y, second }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let hi = self.x.partition_point(|&v| v < t).clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.x[hi] - self.x[lo];
        let a = (self.x[hi] - t) / h;
        let b = (t - self.x[lo]) / h;
        a * self.y[lo]
            + b * self.y[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }
}

/// Curves read from samples (t, E₁, E₂), interpolated by natural cubic
/// splines.
#[derive(Debug, Clone)]
pub struct TabulatedCurves {
    lower: Spline,
    upper: Spline,
}

impl TabulatedCurves {
    pub fn new(t: Vec<f64>, e1: Vec<f64>, e2: Vec<f64>) -> Result<Self> {
        if t.len() < 4 || e1.len() != t.len() || e2.len() != t.len() {
            return Err(Error::Parse(format!("need at least 4 aligned samples, got {}", t.len())));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("t must be strictly increasing".into()));
        }
        if e1.iter().zip(&e2).any(|(l, u)| !(u > l)) {
            return Err(Error::Parse("E2 must exceed E1 at every sample".into()));
        }
        Ok(Self { lower: Spline::new(t.clone(), e1), upper: Spline::new(t, e2) })
    }

    /// Reads a CSV with columns `t,E1,E2`.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut csv = csv::Reader::from_reader(reader);
        let headers = csv.headers()?.clone();
        let column = |name: &'static str| {
            headers.iter().position(|h| h.trim() == name).ok_or(Error::MissingColumn(name))
        };
        let (it, i1, i2) = (column("t")?, column("E1")?, column("E2")?);
        let (mut t, mut e1, mut e2) = (Vec::new(), Vec::new(), Vec::new());
        for record in csv.records() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                let raw = record.get(i).unwrap_or("").trim();
                raw.parse().map_err(|_| Error::Parse(format!("not a number: {raw:?}")))
            };
            t.push(field(it)?);
            e1.push(field(i1)?);
            e2.push(field(i2)?);
        }
        Self::new(t, e1, e2)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

impl AdiabaticCurves for TabulatedCurves {
    fn lower(&self, t: f64) -> f64 {
        self.lower.eval(t)
    }
    fn upper(&self, t: f64) -> f64 {
        self.upper.eval(t)
    }
    fn interval(&self) -> (f64, f64) {
        (self.lower.x[0], *self.lower.x.last().unwrap_or(&0.0))
    }
}

/// Extrema of the adiabatic levels that enter the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitGeometry {
    /// Minimum of the upper level.
    pub t_b: f64,
    /// Maximum of the lower level.
    pub t_t: f64,
    /// Minimum of the gap.
    pub t_0: f64,
    /// Half the minimal gap.
    pub v0_fit: f64,
    /// d² = gap(t_b)·gap(t_t)/gap(t_0)².
    pub d_sq: f64,
}

impl FitGeometry {
    pub fn is_degenerate(&self) -> bool {
        (self.d_sq - 1.0).abs() < DEGENERACY_TOL || (self.t_t * self.t_t - self.t_b * self.t_b).abs() < DEGENERACY_TOL
    }

    fn ensure_regular(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateGeometry(*self))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitParameters {
    pub geometry: FitGeometry,
    pub a_sq: f64,
    pub b_sq: f64,
}

/// Locates t_b, t_t and t_0 by scalar minimization over the curve window.
pub fn fit_geometry<C: AdiabaticCurves + ?Sized>(curves: &C) -> Result<FitGeometry> {
    let (lo, hi) = curves.interval();
    let t_b = minimize_scalar(|t| curves.upper(t), lo, hi, FIT_GRID, "E2")?;
    let t_t = minimize_scalar(|t| -curves.lower(t), lo, hi, FIT_GRID, "E1")?;
    let t_0 = minimize_scalar(|t| curves.gap(t), lo, hi, FIT_GRID, "E2 - E1")?;
    let gap0 = curves.gap(t_0);
    Ok(FitGeometry {
        t_b,
        t_t,
        t_0,
        v0_fit: 0.5 * gap0,
        d_sq: curves.gap(t_b) * curves.gap(t_t) / (gap0 * gap0),
    })
}

/// a² = √(d² − 1)/(2V0²|t_t² − t_b²|), b² = √(d² − 1)(t_t² + t_b²)/|t_t² − t_b²|.
pub fn fit_parameters<C: AdiabaticCurves + ?Sized>(curves: &C) -> Result<FitParameters> {
    let geometry = fit_geometry(curves)?;
    geometry.ensure_regular()?;
    let FitGeometry { t_b, t_t, v0_fit, d_sq, .. } = geometry;
    let root = (d_sq - 1.0).max(0.0).sqrt();
    let spread = (t_t * t_t - t_b * t_b).abs();
    Ok(FitParameters {
        geometry,
        a_sq: root / (2.0 * v0_fit * v0_fit * spread),
        b_sq: root * (t_t * t_t + t_b * t_b) / spread,
    })
}

/// ∫₀^i √((1 + t²)/(t + b²)) dt along t = is.
fn segment_integral(b_sq: f64) -> Complex64 {
    let i = Complex64::i();
    integrate_complex(
        |s| {
            let t = Complex64::new(0.0, s);
            ((1.0 + t * t) / (t + b_sq)).sqrt() * i
        },
        0.0,
        1.0,
        QUAD_TOL,
    )
}

/// σ + iδ ≈ ∫₀^{t_b} E₂ − ∫₀^{t_t} E₁ + √(b²/a²) + Δ from the fitted
/// geometry.
pub fn znt_phase_estimate<C: AdiabaticCurves + ?Sized>(
    geometry: &FitGeometry,
    curves: &C,
    a_sq: f64,
    b_sq: f64,
) -> Result<Complex64> {
    geometry.ensure_regular()?;
    check_a_sq("znt_phase_estimate", a_sq)?;
    let FitGeometry { t_b, t_t, t_0, d_sq, .. } = *geometry;
    let levels = integrate(|t| curves.upper(t), 0.0, t_b, QUAD_TOL) - integrate(|t| curves.lower(t), 0.0, t_t, QUAD_TOL);
    let shift = Complex64::new(b_sq / a_sq, 0.0).sqrt();
    let root = (Complex64::new(b_sq * b_sq, 1.0) * a_sq).sqrt();
    let offset = (t_0 - 0.5 * (t_b + t_t)) / (root * (t_b - t_t)) * (d_sq / (d_sq - 1.0)).sqrt();
    let tail = segment_integral(b_sq) / (2.0 * a_sq.sqrt());
    Ok(levels + shift + offset + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::parabolic_phase_constant;
    use proptest::prelude::*;

    /// E₁ = −1 − (t + 0.4)², E₂ = 1 + (t − 0.5)²
    struct Synthetic;

    impl AdiabaticCurves for Synthetic {
        fn lower(&self, t: f64) -> f64 {
            -1.0 - (t + 0.4).powi(2)
        }
        fn upper(&self, t: f64) -> f64 {
            1.0 + (t - 0.5).powi(2)
        }
        fn interval(&self) -> (f64, f64) {
            (-2.0, 2.0)
        }
    }

    #[test]
    fn single_passage_examples() {
        let p = single_passage_probability(0.25, 0.0).unwrap();
        assert!((p - 0.095_475_236_114_839_85).abs() < 1e-12);
        assert!((p - single_passage_parabolic(1.0)).abs() < 1e-12);
        // Landau-Zener recovery at large b²
        let (a_sq, b_sq): (f64, f64) = (0.3, 1e4);
        let lz = (-PI / (4.0 * a_sq.sqrt() * b_sq.sqrt())).exp();
        let p = single_passage_probability(a_sq, b_sq).unwrap();
        assert!((p / lz - 1.0).abs() < 1e-4);
        assert!(single_passage_probability(1e12, 0.0).unwrap() > 0.999);
        assert!(single_passage_probability(0.0, 0.0).is_err());
        assert!(single_passage_parabolic(1e-4) > 0.999);
        assert!(single_passage_parabolic(20.0) < 1e-30);
    }

    #[test]
    fn parabolic_form_matches_general_form() {
        for i in 0..200 {
            let alpha = 0.05 + 4.95 * f64::from(i) / 199.0;
            let general = single_passage_probability(0.25 / alpha.powi(3), 0.0).unwrap();
            assert!((general - single_passage_parabolic(alpha)).abs() < 1e-12, "α = {alpha}");
        }
    }

    #[test]
    fn delta_psi_examples() {
        let c = parabolic_phase_constant();
        assert!((delta_psi(0.25, c, c) - 1.404_432_365_430_196_1).abs() < 1e-12);
        assert!((delta_psi(0.25, 400.0, 2.0) - 2.0).abs() < 1e-15);
        assert!((delta_psi(1e-40, 0.0, 2.0) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn stokes_phase_examples() {
        assert!((stokes_phase(PI).unwrap() - 0.087_038_483_864_981_51).abs() < 1e-12);
        assert!((stokes_phase(1e-8).unwrap() - PI / 4.0).abs() < 1e-6);
        assert!(stokes_phase(1e3).unwrap().abs() < 1e-2);
        assert!(stokes_phase(0.0).is_err());
    }

    #[test]
    fn double_crossing_examples() {
        let c = parabolic_phase_constant();
        let p = double_crossing_probability(0.25, 0.0, c, c).unwrap();
        assert!((p - 0.339_561_892_922_248_5).abs() < 1e-10);
        let inputs = ZntInputs::superparabolic(2, 1.0).unwrap();
        assert!((inputs.double_crossing(0.0).unwrap() - p).abs() < 1e-10);
        let far = ZntInputs::superparabolic(2, 30.0).unwrap();
        assert!(far.double_crossing(0.0).unwrap() < 1e-30);
    }

    #[test]
    fn tunneling_b_examples() {
        assert!((tunneling_b(1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((tunneling_b(0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((tunneling_b(2.0).unwrap() - 16.0 * PI).abs() < 1e-12);
        assert!(tunneling_b(0.0).is_err());
    }

    #[test]
    fn tunneling_terms_oracle() {
        let c = parabolic_phase_constant();
        let t = tunneling_terms(0.25, c, c).unwrap();
        assert!((t.g1 - 0.380_179_859_782_453_61).abs() < 1e-12);
        assert!((t.g2 + 3.645_182_939_925_795_6).abs() < 1e-12);
        assert!((t.p - 0.045_262_850_258_790_79).abs() < 1e-12);
        assert!((t.radicand - 21.567_891_664_163_22).abs() < 1e-10);
        assert!((t.re_u1 - 1.361_302_180_574_262_4).abs() < 1e-11);
        assert!((t.im_u1 - 4.386_345_835_387_279).abs() < 1e-11);
        assert!((t.probability() - 0.157_670_167_325_420_97).abs() < 1e-11);
    }

    #[test]
    fn tunneling_vanishes_at_multiples_of_pi() {
        for m in 1..4 {
            let sigma = PI * f64::from(m);
            let p = tunneling_probability(0.4, sigma, 1.3).unwrap();
            assert!(p < 1e-20, "m = {m}: {p}");
        }
    }

    #[test]
    fn tunneling_reports_negative_radicand() {
        // σ near π keeps sin²σ small, so a large g₂ (small δ) drives the
        // radicand negative while p stays inside (0, 1)
        let err = tunneling_terms(50.0, 3.0, 2.25e-3).unwrap_err();
        assert!(matches!(err, Error::BranchFailure { radicand } if radicand < 0.0), "{err}");
    }

    #[test]
    fn branches_disagree_at_glancing() {
        let mut max_diff: f64 = 0.0;
        for i in 0..100 {
            let alpha = 0.3 + 1.7 * f64::from(i) / 99.0;
            let inputs = ZntInputs::superparabolic(2, alpha).unwrap();
            if let (Ok(d), Ok(t)) = (inputs.double_crossing(0.0), inputs.tunneling()) {
                max_diff = max_diff.max((d - t).abs());
            }
        }
        assert!(max_diff > 1e-3);
    }

    #[test]
    fn synthetic_fit() {
        let fit = fit_parameters(&Synthetic).unwrap();
        let g = fit.geometry;
        assert!((g.t_t + 0.4).abs() < 1e-6 && (g.t_b - 0.5).abs() < 1e-6 && (g.t_0 - 0.05).abs() < 1e-6);
        assert!((g.v0_fit - 1.2025).abs() < 1e-10);
        assert!((g.d_sq - 1.365_156_616_715_868_3).abs() < 1e-9);
        assert!((fit.a_sq - 2.321_650_875_355_587_3).abs() < 1e-6);
        assert!((fit.b_sq - 2.752_839_774_387_363_2).abs() < 1e-6);
        let d = znt_phase_estimate(&g, &Synthetic, fit.a_sq, fit.b_sq).unwrap();
        assert!((d.re - 1.220_844_472_314_338_6).abs() < 1e-6, "{d}");
        assert!((d.im - 0.153_500_535_956_721_38).abs() < 1e-6, "{d}");
    }

    #[test]
    fn segment_integral_values() {
        let s = segment_integral(2.752_839_774_387_363_2);
        assert!((s - Complex64::new(0.035_353_037_027_897_797, 0.467_776_443_784_687_48)).norm() < 1e-10);
        let c = parabolic_phase_constant();
        assert!((segment_integral(0.0) - Complex64::new(c, c)).norm() < 1e-9);
    }

    #[test]
    fn glancing_models_are_degenerate() {
        for (n, alpha) in [(2, 1.0), (6, 0.5), (10, 2.5)] {
            let curves = ModelCurves::new(DiabaticModel::superparabolic(n, alpha).unwrap());
            assert!(matches!(fit_parameters(&curves), Err(Error::DegenerateGeometry(_))));
            let g = fit_geometry(&curves).unwrap();
            assert!(matches!(znt_phase_estimate(&g, &curves, 0.25, 0.0), Err(Error::DegenerateGeometry(_))));
        }
    }

    #[test]
    fn unit_gap_ratio_is_degenerate() {
        let g = FitGeometry { t_b: 0.5, t_t: -0.2, t_0: 0.1, v0_fit: 1.0, d_sq: 1.0 };
        assert!(g.is_degenerate());
    }

    #[test]
    fn tabulated_curves_reproduce_fit() {
        let t: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * f64::from(i)).collect();
        let e1 = t.iter().map(|&x| Synthetic.lower(x)).collect();
        let e2 = t.iter().map(|&x| Synthetic.upper(x)).collect();
        let tab = TabulatedCurves::new(t, e1, e2).unwrap();
        let fit = fit_parameters(&tab).unwrap();
        assert!((fit.geometry.d_sq - 1.365_156_616_715_868_3).abs() < 1e-6);
        let text = "t,E1,E2\n0,-1,1\n1,-2,2\n2,-1.5,1.5\n3,-1,1\n";
        let tab = TabulatedCurves::from_csv_reader(text.as_bytes()).unwrap();
        assert!((tab.upper(1.0) - 2.0).abs() < 1e-12);
        assert!(matches!(
            TabulatedCurves::from_csv_reader("t,E1\n0,1\n".as_bytes()),
            Err(Error::MissingColumn("E2"))
        ));
    }

    proptest! {
        #[test]
        fn double_crossing_bounded(a_sq in 1e-3f64..50.0, b_sq in 0.0f64..20.0, sigma in 0.0f64..20.0, delta in 1e-3f64..20.0) {
            let p = double_crossing_probability(a_sq, b_sq, sigma, delta).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let env = single_passage_probability(a_sq, b_sq).unwrap();
            prop_assert!(p <= 4.0 * env * (1.0 - env) + 1e-15);
        }

        #[test]
        fn symmetric_curves_always_degenerate(scale in 0.1f64..3.0, v in 0.1f64..2.0) {
            let model = DiabaticModel::parabolic(scale, 0.0, v).unwrap();
            prop_assert!(fit_parameters(&ModelCurves::new(model)).is_err());
        }
    }
}
