//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.
//!
//! The state is a plain `[f64; N]`. Error control is the usual mixed
//! absolute/relative max-norm on the embedded fourth-order estimate; the
//! fifth-order solution is propagated (local extrapolation).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial trial step; `None` picks one from the interval length.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rtol = tol;
        self.atol = tol;
        self
    }
}

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

// fifth-order weights (also row 7 of the tableau, FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth minus fourth order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Adaptive integrator carrying its step size between calls so a dense grid
/// of output times does not restart step selection at every point.
pub struct Integrator<F, const N: usize>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    rhs: F,
    opts: OdeOptions,
    h: Option<f64>,
    pub steps_taken: usize,
}

impl<F, const N: usize> Integrator<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, opts: OdeOptions) -> Self {
        Self {
            rhs,
            opts,
            h: opts.h_init,
            steps_taken: 0,
        }
    }

    /// Advance `y` from `t0` to `t1` (either direction).
    pub fn advance(&mut self, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]> {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut h = self
            .h
            .map(|h| h.abs())
            .unwrap_or_else(|| (span.abs() * 1e-3).clamp(1e-8, 1e-2))
            .min(span.abs());
        let mut k1 = (self.rhs)(t, &y);
        let mut steps = 0usize;

        while (t1 - t) * dir > 0.0 {
            if steps >= self.opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", self.opts.max_steps),
                });
            }
            let remaining = (t1 - t).abs();
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;

            let k2 = (self.rhs)(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
            let k3 = (self.rhs)(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = (self.rhs)(
                t + C4 * hs,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
            );
            let k5 = (self.rhs)(
                t + C5 * hs,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
            );
            let k6 = (self.rhs)(
                t + hs,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    hs,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                hs,
            );
            let k7 = (self.rhs)(t + hs, &y_new);

            let mut err = if y_new.iter().all(|v| v.is_finite()) {
                0.0f64
            } else {
                f64::INFINITY
            };
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if err.is_nan() {
                err = f64::INFINITY;
            }

            steps += 1;
            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y = y_new;
                k1 = k7;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // keep the step that would have been taken, not the truncated final one
                if !last {
                    h *= factor;
                } else {
                    h = h.max(remaining * factor);
                }
            } else {
                h *= if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                if h < self.opts.h_min {
                    return Err(Error::Integration {
                        t,
                        reason: format!("step size {h:e} below minimum"),
                    });
                }
            }
        }

        self.steps_taken += steps;
        self.h = Some(h);
        Ok(y)
    }

    /// Integrate through an ordered list of output times starting at `times[0]`.
    pub fn grid(&mut self, y0: [f64; N], times: &[f64]) -> Result<Vec<[f64; N]>> {
        let mut out = Vec::with_capacity(times.len());
        let Some(&first) = times.first() else {
            return Ok(out);
        };
        let mut y = y0;
        let mut t = first;
        out.push(y);
        for &tn in &times[1..] {
            y = self.advance(t, y, tn)?;
            t = tn;
            out.push(y);
        }
        Ok(out)
    }
}

/// One-shot integration from `t0` to `t1`.
pub fn integrate<F, const N: usize>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: OdeOptions,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    Integrator::new(rhs, opts).advance(t0, y0, t1)
}
