//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with adaptive steps.

use crate::error::{Error, Result};

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        OdeTolerances { abs: 1e-8, rel: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[inline]
fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates the autonomous system `y' = f(y)` from `t0` to `t1`.
///
/// The step size is chosen from the embedded error estimate measured in the
/// RMS norm with weights `abs + rel * max(|y|, |y_new|)`. The final step is
/// shortened to land exactly on `t1`. Fails when the step size drops below
/// the resolution of `t`.
pub fn integrate<const N: usize, F>(
    f: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    tol: OdeTolerances,
) -> Result<([f64; N], OdeStats)>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok((y0, stats));
    }
    let mut y = y0;
    let mut t = t0;
    let mut k1 = f(&y);
    let mut h = initial_step(&f, &y, &k1, span, tol);
    let h_min = 16.0 * f64::EPSILON * t0.abs().max(t1.abs()).max(span);

    while t < t1 {
        if h < h_min {
            return Err(Error::StepUnderflow { node: usize::MAX, time: t });
        }
        let last = t + h >= t1 - h_min;
        let h_step = if last { t1 - t } else { h };
        let k2 = f(&lin(&y, h_step, &[(A21, &k1)]));
        let k3 = f(&lin(&y, h_step, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&lin(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&lin(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&lin(&y, h_step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = lin(&y, h_step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h_step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err += (e / scale) * (e / scale);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            h = h_step * MIN_FACTOR;
            continue;
        }
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if err <= 1.0 {
            stats.accepted += 1;
            t = if last { t1 } else { t + h_step };
            y = y_new;
            k1 = k7;
            h = h_step * factor;
        } else {
            stats.rejected += 1;
            h = h_step * factor.min(1.0);
        }
    }
    Ok((y, stats))
}

/// Starting step from the scaled size of the state and its derivative.
fn initial_step<const N: usize, F>(f: &F, y: &[f64; N], f0: &[f64; N], span: f64, tol: OdeTolerances) -> f64
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let scale: Vec<f64> = y.iter().map(|v| tol.abs + tol.rel * v.abs()).collect();
    let rms = |v: &[f64; N]| -> f64 {
        (v.iter().zip(&scale).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = lin(y, h0, &[(1.0, f0)]);
    let f1 = f(&y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
