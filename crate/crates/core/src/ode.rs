//! Adaptive Dormand-Prince 5(4) integrator with a fourth-order continuous extension.

use crate::error::{Error, Result};

/// Right-hand side of `dy/dt = f(t, y)`.
pub trait System {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn both(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.rhs_evals += o.rhs_evals;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output (Hairer & Wanner)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub struct Dopri5 {
    pub tol: Tolerance,
    /// Upper bound on the step size; keeps the stepper from jumping over short pulses.
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: Tolerance, max_step: f64) -> Self {
        Self { tol, max_step, min_step: 1e-300, max_steps: 10_000_000 }
    }

    /// Integrate from `t0` to `t1`, starting at `y0`, and report the solution at each
    /// of the (sorted) `outputs` that lie in `[t0, t1]` through `sink`.
    ///
    /// Returns the state at `t1`.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate<S: System>(
        &self,
        sys: &S,
        t0: f64,
        t1: f64,
        y0: &[f64],
        outputs: &[f64],
        mut sink: impl FnMut(f64, &[f64]) -> Result<()>,
        stats: &mut Stats,
    ) -> Result<Vec<f64>> {
        let n = sys.dim();
        assert_eq!(y0.len(), n);
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k = vec![vec![0.0; n]; 7];
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        let mut dense = vec![vec![0.0; n]; 5];
        let mut out = vec![0.0; n];
        let mut next_out = outputs.partition_point(|&o| o < t0);

        while next_out < outputs.len() && outputs[next_out] == t0 {
            sink(t0, &y)?;
            next_out += 1;
        }
        if t1 <= t0 {
            return Ok(y);
        }

        sys.rhs(t, &y, &mut k[0]);
        stats.rhs_evals += 1;
        let mut h = self.initial_step(sys, t, &y, &k[0], t1 - t0, stats);
        let mut steps = 0usize;
        let mut last_rejected = false;

        while t < t1 {
            if steps >= self.max_steps {
                return Err(Error::Integration { time: t, reason: "step limit exceeded".into() });
            }
            steps += 1;
            let mut h_step = h.min(self.max_step);
            if t + h_step >= t1 || t + 1.01 * h_step >= t1 {
                h_step = t1 - t;
            }
            if h_step < self.min_step.max(f64::EPSILON * t.abs()) {
                return Err(Error::Integration { time: t, reason: format!("step size underflow (h = {h_step:e})") });
            }

            for i in 0..n {
                ytmp[i] = y[i] + h_step * A21 * k[0][i];
            }
            sys.rhs(t + C2 * h_step, &ytmp, &mut k[1]);
            for i in 0..n {
                ytmp[i] = y[i] + h_step * (A31 * k[0][i] + A32 * k[1][i]);
            }
            sys.rhs(t + C3 * h_step, &ytmp, &mut k[2]);
            for i in 0..n {
                ytmp[i] = y[i] + h_step * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
            }
            sys.rhs(t + C4 * h_step, &ytmp, &mut k[3]);
            for i in 0..n {
                ytmp[i] = y[i]
                    + h_step * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
            }
            sys.rhs(t + C5 * h_step, &ytmp, &mut k[4]);
            for i in 0..n {
                ytmp[i] = y[i]
                    + h_step
                        * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
            }
            sys.rhs(t + h_step, &ytmp, &mut k[5]);
            for i in 0..n {
                ynew[i] = y[i]
                    + h_step
                        * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
            }
            sys.rhs(t + h_step, &ynew, &mut k[6]);
            stats.rhs_evals += 6;

            let mut err = 0.0;
            for i in 0..n {
                let e = h_step
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let sc = self.tol.abs + self.tol.rel * y[i].abs().max(ynew[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite error estimate at t = {t:e}")));
            }

            if err <= 1.0 {
                stats.accepted += 1;
                let t_new = t + h_step;
                if next_out < outputs.len() && outputs[next_out] <= t_new {
                    for i in 0..n {
                        let dy = ynew[i] - y[i];
                        let bspl = h_step * k[0][i] - dy;
                        dense[0][i] = y[i];
                        dense[1][i] = dy;
                        dense[2][i] = bspl;
                        dense[3][i] = dy - h_step * k[6][i] - bspl;
                        dense[4][i] = h_step
                            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
                    }
                    while next_out < outputs.len() && outputs[next_out] <= t_new {
                        let to = outputs[next_out];
                        if to == t_new {
                            sink(to, &ynew)?;
                        } else {
                            let th = (to - t) / h_step;
                            let th1 = 1.0 - th;
                            for i in 0..n {
                                out[i] = dense[0][i]
                                    + th * (dense[1][i] + th1 * (dense[2][i] + th * (dense[3][i] + th1 * dense[4][i])));
                            }
                            sink(to, &out)?;
                        }
                        next_out += 1;
                    }
                }
                y.copy_from_slice(&ynew);
                let k6 = std::mem::take(&mut k[6]);
                k[0] = k6;
                k[6] = vec![0.0; n];
                t = t_new;
                let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, 10.0);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                h = h_step * fac;
                last_rejected = false;
            } else {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).max(0.2);
                h = h_step * fac;
                last_rejected = true;
            }
        }
        Ok(y)
    }

    fn initial_step<S: System>(&self, sys: &S, t: f64, y: &[f64], f0: &[f64], span: f64, stats: &mut Stats) -> f64 {
        let n = y.len();
        let sc = |i: usize| self.tol.abs + self.tol.rel * y[i].abs();
        let d0 = (y.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let d1 = (f0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.max_step).min(span);
        let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
        let mut f1 = vec![0.0; n];
        sys.rhs(t + h0, &y1, &mut f1);
        stats.rhs_evals += 1;
        let d2 = ((0..n).map(|i| ((f1[i] - f0[i]) / sc(i)).powi(2)).sum::<f64>() / n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step).min(span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Oscillator(f64);

    impl System for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = y[1];
            d[1] = -self.0 * self.0 * y[0];
        }
    }

    struct Decay(f64);

    impl System for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = -self.0 * y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let w = 3.0;
        let solver = Dopri5::new(Tolerance::both(1e-10), f64::INFINITY);
        let outs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let mut max_err: f64 = 0.0;
        let mut count = 0;
        let mut stats = Stats::default();
        let end = solver
            .integrate(&Oscillator(w), 0.0, 10.0, &[1.0, 0.0], &outs, |t, y| {
                max_err = max_err.max((y[0] - (w * t).cos()).abs());
                count += 1;
                Ok(())
            }, &mut stats)
            .unwrap();
        assert_eq!(count, outs.len());
        assert!(max_err < 1e-7, "dense output error {max_err}");
        assert_relative_eq!(end[0], (30.0f64).cos(), epsilon = 1e-8);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn exponential_decay() {
        let solver = Dopri5::new(Tolerance::both(1e-12), f64::INFINITY);
        let mut stats = Stats::default();
        let y = solver.integrate(&Decay(2.0), 0.0, 3.0, &[1.0], &[], |_, _| Ok(()), &mut stats).unwrap();
        assert_relative_eq!(y[0], (-6.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn max_step_is_respected() {
        let solver = Dopri5::new(Tolerance::both(1e-6), 0.01);
        let mut stats = Stats::default();
        solver.integrate(&Decay(1.0), 0.0, 1.0, &[1.0], &[], |_, _| Ok(()), &mut stats).unwrap();
        assert!(stats.accepted >= 100);
    }

    #[test]
    fn nan_rhs_reported() {
        struct Bad;
        impl System for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, _y: &[f64], d: &mut [f64]) {
                d[0] = f64::NAN;
            }
        }
        let solver = Dopri5::new(Tolerance::both(1e-6), 1.0);
        let mut stats = Stats::default();
        let r = solver.integrate(&Bad, 0.0, 1.0, &[1.0], &[], |_, _| Ok(()), &mut stats);
        assert!(r.is_err());
    }
}
