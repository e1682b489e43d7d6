//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! Sample times are hit exactly by clipping the step, so no dense-output
//! interpolant is involved in reported values.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    /// Requested sample times with the integrated state at each.
    pub samples: Vec<(f64, Vec<f64>)>,
    /// Every accepted step (time, state).
    pub trace: Vec<(f64, Vec<f64>)>,
    pub rhs_evals: usize,
}

impl OdeSolution {
    pub fn sample(&self, t: f64) -> Option<&[f64]> {
        self.samples
            .iter()
            .find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|(_, y)| y.as_slice())
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
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
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// 4th-order embedded weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` through every time in
/// `sample_times` (must be nondecreasing and ≥ t0).
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    sample_times: &[f64],
    opts: &OdeOptions,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut trace = vec![(t0, y0.to_vec())];
    let mut evals = 0usize;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k0 = vec![0.0; dim];
    f(t, &y, &mut k0);
    evals += 1;

    let t_end = sample_times.last().copied().unwrap_or(t0);
    let mut h = ((t_end - t0) / 100.0).max(1e-8);
    let mut pending = sample_times.iter().copied().peekable();

    while let Some(&target) = pending.peek() {
        if target <= t + 1e-14 * t.abs().max(1.0) {
            samples.push((target, y.clone()));
            pending.next();
            continue;
        }
        let mut steps = 0usize;
        while t < target {
            if steps > opts.max_steps {
                return Err(Error::Numeric(format!(
                    "ODE step budget exhausted at t = {t}"
                )));
            }
            steps += 1;
            let h_try = h.min(target - t);
            let mut k = vec![k0.clone()];
            let mut stage = vec![0.0; dim];
            for s in 0..6 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        acc += A[s][j] * kj[i];
                    }
                    stage[i] = y[i] + h_try * acc;
                }
                let mut ks = vec![0.0; dim];
                f(t + C[s] * h_try, &stage, &mut ks);
                evals += 1;
                k.push(ks);
            }
            // 5th-order solution is stage 6 (FSAL): weights = A[5].
            let y5: Vec<f64> = (0..dim)
                .map(|i| {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().take(6).enumerate() {
                        acc += A[5][j] * kj[i];
                    }
                    y[i] + h_try * acc
                })
                .collect();
            let err_norm = {
                let mut acc = 0.0;
                for i in 0..dim {
                    let mut y4 = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        y4 += B4[j] * kj[i];
                    }
                    let e = h_try * ((y5[i] - y[i]) / h_try - y4);
                    let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
                    acc += (e / scale) * (e / scale);
                }
                (acc / dim as f64).sqrt()
            };
            if err_norm <= 1.0 {
                t += h_try;
                y = y5;
                k0 = k.pop().unwrap();
                trace.push((t, y.clone()));
            }
            let factor = if err_norm > 0.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h_try * factor).max(1e-14 * (t.abs().max(1.0)));
            if h < 1e-13 * t.abs().max(1.0) {
                return Err(Error::Numeric(format!(
                    "ODE step size underflow at t = {t} (stiff instance)"
                )));
            }
        }
        samples.push((target, y.clone()));
        pending.next();
    }

    Ok(OdeSolution {
        samples,
        trace,
        rhs_evals: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sol = integrate(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            &[0.5, 1.0, 2.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in &sol.samples {
            assert!((y[0] - (-t).exp()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn time_dependent_rate() {
        // y' = -(1+t) y  =>  y(t) = exp(-t - t^2/2)
        let sol = integrate(
            |t, y, dy| dy[0] = -(1.0 + t) * y[0],
            0.0,
            &[1.0],
            &[1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        let y = sol.sample(1.0).unwrap()[0];
        assert!((y - (-1.5f64).exp()).abs() < 1e-9);
    }
}
