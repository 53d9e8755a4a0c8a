//! Dormand–Prince 5(4) with adaptive step control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; `f64::INFINITY` for none.
    pub max_step: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

/// Why the integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Completed,
    /// The observer asked to stop after the step ending at `t`.
    Event { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub stop: Stop,
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// With `stops = None` every accepted step is recorded; otherwise steps are
/// clipped to land exactly on each stop time (which must be increasing and
/// lie in `(t0, t_end]`) and only those are recorded. `observe` sees each
/// recorded state and returns `true` to end the run early.
///
/// A failing right-hand side (for instance a trial stage leaving the
/// domain) rejects the step and shrinks it. The run fails with
/// [`Error::Singularity`] once the step underflows.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    stops: Option<&[f64]>,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out_t = vec![t0];
    let mut out_y = vec![y.clone()];
    if t_end <= t0 {
        return Ok(Solution {
            t: out_t,
            y: out_y,
            stop: Stop::Completed,
        });
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    rhs(t, &y, &mut k1)?;

    let mut h = (1e-3 * (t_end - t0)).min(opts.max_step).min(0.01);
    let mut stop_idx = 0;
    let stops = stops.unwrap_or(&[]);
    let mut steps = 0usize;

    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Singularity { tau: t, state: y });
        }
        let next_stop = stops.get(stop_idx).copied().unwrap_or(t_end).min(t_end);
        let mut hit_stop = false;
        let mut step = h.min(opts.max_step);
        if t + step >= next_stop {
            step = next_stop - t;
            hit_stop = true;
        }
        if step <= 1e-14 * t.abs().max(1.0) && !hit_stop {
            return Err(Error::Singularity { tau: t, state: y });
        }

        let trial = (|| -> Result<f64> {
            for i in 0..n {
                tmp[i] = y[i] + step * A21 * k1[i];
            }
            rhs(t + C2 * step, &tmp, &mut k2)?;
            for i in 0..n {
                tmp[i] = y[i] + step * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * step, &tmp, &mut k3)?;
            for i in 0..n {
                tmp[i] = y[i] + step * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * step, &tmp, &mut k4)?;
            for i in 0..n {
                tmp[i] =
                    y[i] + step * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * step, &tmp, &mut k5)?;
            for i in 0..n {
                tmp[i] = y[i]
                    + step
                        * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(t + step, &tmp, &mut k6)?;
            for i in 0..n {
                y_new[i] = y[i]
                    + step * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(t + step, &y_new, &mut k7)?;
            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max(e.abs() / scale);
            }
            Ok(err)
        })();

        let err = match trial {
            Ok(e) if e.is_finite() => e,
            _ => {
                h = 0.25 * step;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Singularity { tau: t, state: y });
                }
                continue;
            }
        };

        if err <= 1.0 {
            t = if hit_stop { next_stop } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            let record = stops.is_empty() || hit_stop;
            if hit_stop && !stops.is_empty() {
                stop_idx += 1;
            }
            if record {
                out_t.push(t);
                out_y.push(y.clone());
                if observe(t, &y) {
                    return Ok(Solution {
                        t: out_t,
                        y: out_y,
                        stop: Stop::Event { t },
                    });
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // Keep the pre-clip step when the last one was shortened to hit a stop.
            h = if hit_stop { h.max(step * factor) } else { step * factor };
        } else {
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::Singularity { tau: t, state: y });
            }
        }
    }
    Ok(Solution {
        t: out_t,
        y: out_y,
        stop: Stop::Completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            5.0,
            None,
            &OdeOptions::with_tol(1e-12),
            |_, _| false,
        )
        .unwrap();
        let last = sol.y.last().unwrap()[0];
        assert!((last - 5f64.exp()).abs() < 1e-9 * 5f64.exp());
        assert_eq!(*sol.t.last().unwrap(), 5.0);
    }

    #[test]
    fn harmonic_oscillator_hits_stops() {
        let stops: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5).collect();
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            Some(&stops),
            &OdeOptions::with_tol(1e-11),
            |_, _| false,
        )
        .unwrap();
        assert_eq!(sol.t.len(), 21);
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t}");
        }
        assert_eq!(&sol.t[1..], &stops[..]);
    }

    #[test]
    fn observer_can_stop_early() {
        let sol = integrate(
            |_, _, dy| {
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            &[0.0],
            10.0,
            None,
            &OdeOptions::with_tol(1e-8),
            |_, y| y[0] > 2.0,
        )
        .unwrap();
        assert!(matches!(sol.stop, Stop::Event { t } if t > 2.0 && t < 10.0));
    }

    #[test]
    fn blow_up_is_a_singularity() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let res = integrate(
            |_, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            2.0,
            None,
            &OdeOptions::with_tol(1e-10),
            |_, _| false,
        );
        match res {
            Err(Error::Singularity { tau, .. }) => assert!((tau - 1.0).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
    }
}
