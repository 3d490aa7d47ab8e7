//! Dormand-Prince 5(4) embedded Runge-Kutta pair with PI step-size control.

use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_EXPO: f64 = 0.2 - PI_BETA * 0.75;
const MAX_STEPS: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
}

/// Integrator state for a fixed-dimension real system y' = f(t, y).
pub struct DormandPrince<const D: usize> {
    rel_tol: f64,
    abs_tol: f64,
    t: f64,
    y: [f64; D],
    /// f(t, y), reused as the first stage (FSAL)
    k1: [f64; D],
    h: f64,
    err_old: f64,
    pub stats: StepStats,
}

#[inline]
fn combine<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..D {
            out[i] += ch * k[i];
        }
    }
    out
}

impl<const D: usize> DormandPrince<D> {
    pub fn new<F>(f: &F, t0: f64, y0: [f64; D], rel_tol: f64, abs_tol: f64) -> Self
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let k1 = f(t0, &y0);
        Self {
            rel_tol,
            abs_tol,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            err_old: 1e-4,
            stats: StepStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; D] {
        &self.y
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }

    /// Starting step from the usual two-evaluation heuristic.
    fn initial_step<F>(&self, f: &F, direction: f64) -> f64
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..D {
            let sk = self.scale(self.y[i], self.y[i]);
            d0 += (self.y[i] / sk).powi(2);
            d1 += (self.k1[i] / sk).powi(2);
        }
        let (d0, d1) = ((d0 / D as f64).sqrt(), (d1 / D as f64).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = combine(&self.y, direction * h0, &[(1.0, &self.k1)]);
        let k2 = f(self.t + direction * h0, &y1);
        let mut d2 = 0.0;
        for ((&k2, &k1), &y) in k2.iter().zip(&self.k1).zip(&self.y) {
            d2 += ((k2 - k1) / self.scale(y, y)).powi(2);
        }
        let d2 = (d2 / D as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Integrates up to exactly `t_end`.
    pub fn advance_to<F>(&mut self, f: &F, t_end: f64) -> Result<()>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let direction = span.signum();
        if self.h == 0.0 || self.h.signum() != direction {
            self.h = direction * self.initial_step(f, direction).min(span.abs());
        }
        let mut last_rejected = false;
        loop {
            let remaining = t_end - self.t;
            if remaining * direction <= 0.0 {
                return Ok(());
            }
            let mut h = self.h;
            let mut hits_end = false;
            if (h - remaining) * direction >= 0.0 {
                h = remaining;
                hits_end = true;
            }
            if h.abs() <= 1e-14 * self.t.abs().max(1.0) || self.stats.accepted + self.stats.rejected > MAX_STEPS {
                return Err(Error::ToleranceFailure { t: self.t, step: h });
            }

            let (t, y, k1) = (self.t, &self.y, &self.k1);
            let k2 = f(t + C2 * h, &combine(y, h, &[(A21, k1)]));
            let k3 = f(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * h, &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                t + h,
                &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if hits_end { t_end } else { t + h };
            let k7 = f(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..D {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = self.scale(y[i], y_new[i]);
                err += (e / sk).powi(2);
            }
            let err = (err / D as f64).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * FAC_MIN;
                last_rejected = true;
                continue;
            }

            let fac11 = err.powf(PI_EXPO);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(PI_BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = if direction > 0.0 { h_new.min(h) } else { h_new.max(h) };
                }
                self.err_old = err.max(1e-4);
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                self.stats.accepted += 1;
                // keep the controller's step rather than the truncated one
                if !hits_end || h_new.abs() > self.h.abs() {
                    self.h = h_new;
                }
                last_rejected = false;
            } else {
                self.stats.rejected += 1;
                self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
                last_rejected = true;
            }
        }
    }
}
