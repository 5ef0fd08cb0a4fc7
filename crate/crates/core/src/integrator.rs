//! Adaptive Dormand–Prince 5(4) with an optional projection after every
//! accepted step.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Dp5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dp5 {
    fn default() -> Self {
        Dp5 {
            rtol: 1e-11,
            atol: 1e-11,
            max_steps: 2_000_000,
        }
    }
}

/// Outcome of one integration call; `h` is a good first step for a follow-up call.
#[derive(Clone, Debug)]
pub struct Solution {
    pub y: Vec<f64>,
    pub steps: usize,
    pub h: f64,
}

impl Dp5 {
    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<F, P>(
        &self,
        f: F,
        t0: f64,
        y0: &[f64],
        t1: f64,
        h_hint: Option<f64>,
        mut project: P,
    ) -> Result<Solution>
    where
        F: Fn(f64, &[f64], &mut [f64]),
        P: FnMut(&mut [f64]),
    {
        let d = y0.len();
        let mut y = y0.to_vec();
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(Solution {
                y,
                steps: 0,
                h: h_hint.unwrap_or(1e-2),
            });
        }
        let dir = span.signum();
        let mut h = h_hint.map_or(1e-2 * span.abs().min(1.0), f64::abs).min(span.abs());
        let mut t = t0;
        let mut k = vec![vec![0.0; d]; 7];
        let mut tmp = vec![0.0; d];
        let mut y5 = vec![0.0; d];
        let mut steps = 0;
        let mut last_h = h;
        while dir * (t1 - t) > 0.0 {
            if steps >= self.max_steps {
                return Err(Error::Integration(format!(
                    "step budget exhausted at t = {t}"
                )));
            }
            let remaining = (t1 - t).abs();
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let hs = dir * step;
            f(t, &y, &mut k[0]);
            for s in 1..7 {
                for i in 0..d {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += hs * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * hs, &tmp, &mut k[s]);
            }
            let mut err = 0.0;
            for i in 0..d {
                let mut a5 = 0.0;
                let mut a4 = 0.0;
                for s in 0..7 {
                    a5 += B5[s] * k[s][i];
                    a4 += B4[s] * k[s][i];
                }
                y5[i] = y[i] + hs * a5;
                let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                let e = hs * (a5 - a4) / sc;
                err += e * e;
            }
            let err = (err / d as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state near t = {t}")));
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                std::mem::swap(&mut y, &mut y5);
                project(&mut y);
                steps += 1;
                last_h = step;
                if !last {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
            }
        }
        Ok(Solution {
            y,
            steps,
            h: last_h.max(h.min(span.abs())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[1];
            dy[1] = y[0];
        };
        let tau = std::f64::consts::TAU;
        let sol = Dp5::default().integrate(f, 0.0, &[1.0, 0.0], 10.0 * tau, None, |_| {}).unwrap();
        assert!((sol.y[0] - 1.0).abs() < 1e-9 && sol.y[1].abs() < 1e-9);
        let back = Dp5::default()
            .integrate(f, 10.0 * tau, &sol.y, 0.0, Some(sol.h), |_| {})
            .unwrap();
        assert!((back.y[0] - 1.0).abs() < 1e-9 && back.y[1].abs() < 1e-9);
    }

    #[test]
    fn exponential_growth_order() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let sol = Dp5::default().integrate(f, 0.0, &[1.0], 2.0, None, |_| {}).unwrap();
        assert!((sol.y[0] - 2f64.exp()).abs() < 1e-9);
        let same = Dp5::default().integrate(f, 1.0, &[3.0], 1.0, None, |_| {}).unwrap();
        assert_eq!(same.y, vec![3.0]);
    }

    #[test]
    fn projection_is_applied() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[1];
            dy[1] = y[0];
        };
        let mut calls = 0;
        let sol = Dp5::default()
            .integrate(f, 0.0, &[1.0, 0.0], 3.0, None, |y| {
                calls += 1;
                let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                y[0] /= r;
                y[1] /= r;
            })
            .unwrap();
        assert_eq!(calls, sol.steps);
        assert!(((sol.y[0].powi(2) + sol.y[1].powi(2)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn blow_up_is_reported() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let res = Dp5::default().integrate(f, 0.0, &[1.0], 2.0, None, |_| {});
        assert!(matches!(res, Err(Error::Integration(_))));
    }
}
