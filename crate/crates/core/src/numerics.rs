//! Small numerical building blocks: double-exponential quadrature and a
//! bracketed scalar minimizer.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::{Error, Result};

const TANH_SINH_T_MAX: f64 = 3.5;
const TANH_SINH_LEVELS: u32 = 9;

/// Tanh-sinh quadrature of a complex-valued integrand over [a, b].
///
/// Integrable endpoint singularities are fine: the nodes cluster
/// doubly-exponentially toward a and b and never land on them. Non-finite
/// integrand values are dropped.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, tol: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    // Sum over nodes t = k·h for odd k only (the even ones were already
    // counted at the coarser level), except on the first pass.
    let node_sum = |h: f64, odd_only: bool| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut k: i64 = if odd_only { 1 } else { 0 };
        let step = if odd_only { 2 } else { 1 };
        loop {
            let t = k as f64 * h;
            if t > TANH_SINH_T_MAX {
                break;
            }
            let u = FRAC_PI_2 * t.sinh();
            let cosh_u = u.cosh();
            let weight = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
            // distance from the nearer endpoint, in units of the half width
            let gap = 2.0 / (1.0 + (2.0 * u).exp());
            let mut add = |x: f64| {
                let v = f(x);
                if v.re.is_finite() && v.im.is_finite() {
                    acc += v * weight;
                }
            };
            if k == 0 {
                add(mid);
            } else {
                add(b - half * gap);
                add(a + half * gap);
            }
            k += step;
        }
        acc
    };

    let mut h = 1.0;
    let mut sum = node_sum(h, false);
    let mut estimate = sum * (h * half);
    for _ in 0..TANH_SINH_LEVELS {
        h *= 0.5;
        sum += node_sum(h, true);
        let next = sum * (h * half);
        let change = (next - estimate).norm();
        estimate = next;
        if change <= tol * estimate.norm().max(1.0) {
            break;
        }
    }
    estimate
}

/// Real-valued counterpart of [`integrate_complex`].
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// Locates the minimum of `f` inside [lo, hi].
///
/// A uniform scan with `grid` points brackets the minimum; golden-section
/// search then refines it. Fails when the scan minimum sits on the interval
/// boundary, i.e. no interior extremum was bracketed.
pub fn minimize_scalar<F>(f: F, lo: f64, hi: f64, grid: usize, label: &'static str) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let grid = grid.max(3);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..grid {
        let v = f(lo + step * i as f64);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    if best == 0 || best == grid - 1 || !best_val.is_finite() {
        return Err(Error::Bracketing { curve: label, lo, hi });
    }
    let centre = lo + step * best as f64;
    // an exact hit on a grid node beats any golden-section iterate that
    // cannot improve on it (flat or symmetric minima)
    let refined = golden_section(&f, centre - step, centre + step, 1e-12);
    if f(refined) < best_val {
        Ok(refined)
    } else {
        Ok(centre)
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
