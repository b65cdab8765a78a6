//! Second-order moment dynamics of the write / free-evolution / read sequence.
//!
//! State: photon number `<a+a>`, phonon number `<b+b>` and the two exchange
//! coherences `<b+a>`, `<a+b>`. The coherences are integrated independently so that
//! their mutual conjugacy is a genuine check on the integration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Stats, System, Tolerance};
use crate::params::NoiseRates;
use crate::pulses::{PulseLabel, PulseSet, PulseShape, PulseSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub n_opt: f64,
    pub n_mech: f64,
    /// `<b+ a>`
    pub coh: Complex64,
    /// `<a+ b>`
    pub coh_conj: Complex64,
}

impl MomentState {
    /// Optical vacuum, thermal mechanics.
    pub fn thermal(n_mech: f64) -> Self {
        Self { n_opt: 0.0, n_mech, coh: Complex64::new(0.0, 0.0), coh_conj: Complex64::new(0.0, 0.0) }
    }

    fn to_vec(self) -> [f64; 6] {
        [self.n_opt, self.n_mech, self.coh.re, self.coh.im, self.coh_conj.re, self.coh_conj.im]
    }

    fn from_slice(y: &[f64]) -> Self {
        Self {
            n_opt: y[0],
            n_mech: y[1],
            coh: Complex64::new(y[2], y[3]),
            coh_conj: Complex64::new(y[4], y[5]),
        }
    }

    /// `|<a+b> - conj(<b+a>)|`, zero for a physical state.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.coh_conj - self.coh.conj()).norm()
    }
}

/// Everything the moment equations need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProblem {
    pub rates: NoiseRates,
    /// Detuning in the rotating frame (rad/s).
    pub detuning: f64,
    pub pulses: PulseSet,
    /// Time at which the optical damping switches from the write to the read value.
    /// Defaults to halfway between the write and read pulse centers.
    pub switch_time: Option<f64>,
    pub initial: MomentState,
}

impl MomentProblem {
    pub fn switch_time(&self) -> f64 {
        self.switch_time
            .unwrap_or_else(|| 0.5 * (self.pulses.write.center() + self.pulses.read.center()))
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        self.pulses.validate()?;
        if !self.detuning.is_finite() {
            return Err(Error::Config("detuning must be finite".into()));
        }
        let s = self.initial;
        if !(s.n_opt >= 0.0 && s.n_mech >= 0.0) {
            return Err(Error::Config("initial occupations must be >= 0".into()));
        }
        Ok(())
    }

    fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("problem is always serializable");
        hex::encode(Sha256::digest(json))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, step: f64) -> Self {
        Self { t0, t1, step }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 < self.t1) {
            return Err(Error::Config(format!("time grid needs t0 < t1, got [{}, {}]", self.t0, self.t1)));
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!("output step must be > 0, got {}", self.step)));
        }
        let n = ((self.t1 - self.t0) / self.step).floor() as usize;
        if n > 50_000_000 {
            return Err(Error::Config("time grid has too many points".into()));
        }
        let mut v: Vec<f64> = (0..=n).map(|i| self.t0 + i as f64 * self.step).collect();
        if self.t1 - v[n] > 1e-9 * self.step {
            v.push(self.t1);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTrace {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
    /// SHA-256 of the serialized problem.
    pub digest: String,
    pub stats: Stats,
    pub max_hermiticity_defect: f64,
}

struct Rhs<'a> {
    problem: &'a MomentProblem,
    b: f64,
}

impl System for Rhs<'_> {
    fn dim(&self) -> usize {
        6
    }

    fn rhs(&self, t: f64, y: &[f64], d: &mut [f64]) {
        let p = self.problem;
        let g = p.pulses.coupling(t);
        let gamma = p.rates.gamma;
        let b = self.b;
        let s = MomentState::from_slice(y);
        let ig = I * g;
        let exch = ig * s.coh - ig * s.coh_conj;
        let source = 4.0 * b * p.pulses.signal.envelope(t);
        d[0] = -2.0 * b * s.n_opt + exch.re + source;
        d[1] = -2.0 * gamma * s.n_mech - exch.re + 2.0 * p.rates.gamma_noise + 2.0 * p.rates.f_noise;
        let diff = ig * (s.n_opt - s.n_mech);
        let dc = -(I * p.detuning + b + gamma) * s.coh + diff;
        let dcc = -(-I * p.detuning + b + gamma) * s.coh_conj - diff;
        d[2] = dc.re;
        d[3] = dc.im;
        d[4] = dcc.re;
        d[5] = dcc.im;
    }
}

fn pulse_edges(p: &PulseSpec) -> Vec<f64> {
    match p.shape {
        PulseShape::Constant { start } if p.amplitude > 0.0 => vec![start, start + p.width],
        _ => vec![],
    }
}

/// Integrate the moment equations and report the state on `grid`.
pub fn integrate_moments(problem: &MomentProblem, grid: TimeGrid, tol: f64) -> Result<MomentTrace> {
    problem.validate()?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Config(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let outputs = grid.points()?;
    let (t0, t1) = (grid.t0, *outputs.last().unwrap());

    // segment boundaries: damping switch and constant-pulse edges
    let t_switch = problem.switch_time();
    let mut breaks = vec![t_switch];
    for pulse in [&problem.pulses.write, &problem.pulses.read, &problem.pulses.signal] {
        breaks.extend(pulse_edges(pulse));
    }
    breaks.retain(|&b| b > t0 && b < t1);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut bounds = vec![t0];
    bounds.extend(breaks);
    bounds.push(t1);

    let max_step = [&problem.pulses.write, &problem.pulses.read, &problem.pulses.signal]
        .iter()
        .filter(|p| p.amplitude > 0.0)
        .map(|p| 0.5 * p.width)
        .fold(t1 - t0, f64::min);
    let solver = Dopri5::new(Tolerance::both(tol), max_step);

    let guard = -100.0 * tol;
    let mut states = Vec::with_capacity(outputs.len());
    let mut times = Vec::with_capacity(outputs.len());
    let mut stats = Stats::default();
    let mut max_defect: f64 = 0.0;
    let mut y = problem.initial.to_vec().to_vec();

    for (k, seg) in bounds.windows(2).enumerate() {
        let (a, b) = (seg[0], seg[1]);
        let rhs = Rhs {
            problem,
            b: if a < t_switch { problem.rates.b_write } else { problem.rates.b_read },
        };
        // each output point belongs to exactly one segment
        let lo = if k == 0 { outputs.partition_point(|&t| t < a) } else { outputs.partition_point(|&t| t <= a) };
        let hi = outputs.partition_point(|&t| t <= b);
        let seg_out = &outputs[lo..hi];
        y = solver.integrate(
            &rhs,
            a,
            b,
            &y,
            seg_out,
            |t, v| {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Numerical(format!("non-finite moment at t = {t:e}")));
                }
                if v[0] < guard || v[1] < guard {
                    return Err(Error::Numerical(format!(
                        "negative occupation at t = {t:e} (n_opt = {:e}, n_mech = {:e})",
                        v[0], v[1]
                    )));
                }
                let s = MomentState::from_slice(v);
                max_defect = max_defect.max(s.hermiticity_defect());
                times.push(t);
                states.push(s);
                Ok(())
            },
            &mut stats,
        )?;
    }
    if times.len() != outputs.len() {
        return Err(Error::Internal(format!("{} of {} output points produced", times.len(), outputs.len())));
    }
    Ok(MomentTrace { times, states, digest: problem.digest(), stats, max_hermiticity_defect: max_defect })
}

/// One row of the storage/retrieval table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerRow {
    pub t: f64,
    pub optical_power: f64,
    pub mechanical_power: f64,
    pub g_w: f64,
    pub g_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageRetrieval {
    pub rows: Vec<PowerRow>,
    /// Peak optical power after the switch time divided by the peak before it.
    pub efficiency: Option<f64>,
    /// Same ratio for the optical occupation `<a+a>` itself.
    pub n_opt_peak_ratio: Option<f64>,
    /// Times of the optical-power maxima before and after the switch time.
    pub write_peak: Option<f64>,
    pub read_peak: Option<f64>,
}

/// Photon-phonon conversion flux `|i G (<b+a> - <a+b>)|` at every trace point.
pub fn exchange_flux(trace: &MomentTrace, pulses: &PulseSet) -> Vec<f64> {
    trace
        .times
        .iter()
        .zip(&trace.states)
        .map(|(&t, s)| (I * pulses.coupling(t) * (s.coh - s.coh_conj)).re.abs())
        .collect()
}

fn peak_ratio(before: &[f64], after: &[f64]) -> Option<f64> {
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let (w, r) = (max(before), max(after));
    (w > 0.0 && w.is_finite()).then(|| r / w)
}

fn argmax(t: &[f64], f: &[f64]) -> Option<f64> {
    let (i, v) = f.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    (*v > 0.0).then(|| t[i])
}

/// Power traces for plotting.
///
/// The optical power is the rate at which excitation is converted between the light
/// and the particle, which peaks during the write and during the read pulse. The
/// mechanical power is the phonon number. Both are scaled to unit peak unless `raw`.
pub fn storage_retrieval_trace(trace: &MomentTrace, pulses: &PulseSet, switch_time: f64, raw: bool) -> StorageRetrieval {
    let flux = exchange_flux(trace, pulses);
    let mech: Vec<f64> = trace.states.iter().map(|s| s.n_mech.max(0.0)).collect();
    let split = trace.times.partition_point(|&t| t < switch_time);

    let efficiency = peak_ratio(&flux[..split], &flux[split..]);
    let n_opt: Vec<f64> = trace.states.iter().map(|s| s.n_opt).collect();
    let n_opt_peak_ratio = peak_ratio(&n_opt[..split], &n_opt[split..]);
    let write_peak = argmax(&trace.times[..split], &flux[..split]);
    let read_peak = argmax(&trace.times[split..], &flux[split..]);

    let scale = |v: &[f64]| -> f64 {
        let m = v.iter().cloned().fold(0.0, f64::max);
        if raw || m <= 0.0 {
            1.0
        } else {
            1.0 / m
        }
    };
    let (so, sm) = (scale(&flux), scale(&mech));
    let rows = trace
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| PowerRow {
            t,
            optical_power: flux[i] * so,
            mechanical_power: mech[i] * sm,
            g_w: pulses.write.envelope(t),
            g_r: pulses.read.envelope(t),
        })
        .collect();
    StorageRetrieval { rows, efficiency, n_opt_peak_ratio, write_peak, read_peak }
}

/// Gaussian write and read pulses with a single-photon signal riding on the write pulse.
#[allow(clippy::too_many_arguments)]
pub fn gaussian_storage_pulses(
    g_w0: f64,
    t_w: f64,
    t_1s: f64,
    g_r0: f64,
    t_r: f64,
    t_2s: f64,
    photons: f64,
    b_write: f64,
) -> Result<PulseSet> {
    let set = PulseSet {
        write: PulseSpec::gaussian(PulseLabel::Write, g_w0, t_w, t_1s),
        read: PulseSpec::gaussian(PulseLabel::Read, g_r0, t_r, t_2s),
        signal: PulseSpec::signal_for_photons(photons, t_w, t_1s, b_write)?,
    };
    set.validate()?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn lossless(g: f64, t_end: f64) -> MomentProblem {
        MomentProblem {
            rates: NoiseRates::default(),
            detuning: 0.0,
            pulses: PulseSet {
                write: PulseSpec::constant(PulseLabel::Write, g, 0.0, 10.0 * t_end),
                read: PulseSpec::off(PulseLabel::Read),
                signal: PulseSpec::off(PulseLabel::Signal),
            },
            switch_time: Some(10.0 * t_end),
            initial: MomentState { n_opt: 1.0, ..MomentState::thermal(0.0) },
        }
    }

    #[test]
    fn beam_splitter_swap() {
        let g = 7.9e4;
        let t = FRAC_PI_2 / g;
        let tr = integrate_moments(&lossless(g, t), TimeGrid::new(0.0, t, t / 50.0), 1e-9).unwrap();
        let end = tr.states.last().unwrap();
        assert!((end.n_mech - 1.0).abs() < 1e-6);
        assert!(end.n_opt.abs() < 1e-6);
        assert!(tr.max_hermiticity_defect < 1e-12);
    }

    #[test]
    fn excitation_conserved_without_loss() {
        let g = 1e3;
        let period = std::f64::consts::PI / g;
        let tr = integrate_moments(&lossless(g, 10.0 * period), TimeGrid::new(0.0, 10.0 * period, period / 40.0), 1e-9)
            .unwrap();
        for s in &tr.states {
            assert!((s.n_opt + s.n_mech - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn free_decay_is_exponential() {
        let rates = NoiseRates { b_write: 3.0, b_read: 3.0, gamma: 5.0, gamma_noise: 0.0, f_noise: 0.0 };
        let p = MomentProblem {
            rates,
            detuning: 0.0,
            pulses: PulseSet {
                write: PulseSpec::off(PulseLabel::Write),
                read: PulseSpec::off(PulseLabel::Read),
                signal: PulseSpec::off(PulseLabel::Signal),
            },
            switch_time: Some(0.0),
            initial: MomentState { n_opt: 1.0, n_mech: 2.0, ..MomentState::thermal(0.0) },
        };
        let tr = integrate_moments(&p, TimeGrid::new(0.0, 1.0, 0.05), 1e-10).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(s.n_opt, (-6.0 * t).exp(), max_relative = 1e-6);
            assert_relative_eq!(s.n_mech, 2.0 * (-10.0 * t).exp(), max_relative = 1e-6);
        }
    }

    #[test]
    fn thermal_steady_state() {
        let rates = NoiseRates { b_write: 1.0, b_read: 1.0, gamma: 50.0, gamma_noise: 0.3, f_noise: 4.0 };
        let p = MomentProblem {
            rates,
            detuning: 0.0,
            pulses: PulseSet {
                write: PulseSpec::off(PulseLabel::Write),
                read: PulseSpec::off(PulseLabel::Read),
                signal: PulseSpec::off(PulseLabel::Signal),
            },
            switch_time: None,
            initial: MomentState::thermal(0.0),
        };
        let tr = integrate_moments(&p, TimeGrid::new(0.0, 1.0, 0.5), 1e-10).unwrap();
        assert_relative_eq!(tr.states.last().unwrap().n_mech, 4.3 / 50.0, max_relative = 1e-6);
    }

    #[test]
    fn zero_trace_has_no_efficiency() {
        let p = MomentProblem {
            rates: NoiseRates::default(),
            detuning: 0.0,
            pulses: PulseSet {
                write: PulseSpec::off(PulseLabel::Write),
                read: PulseSpec::off(PulseLabel::Read),
                signal: PulseSpec::off(PulseLabel::Signal),
            },
            switch_time: Some(0.5),
            initial: MomentState::thermal(0.0),
        };
        let tr = integrate_moments(&p, TimeGrid::new(0.0, 1.0, 0.1), 1e-8).unwrap();
        let table = storage_retrieval_trace(&tr, &p.pulses, 0.5, false);
        assert!(table.efficiency.is_none());
        assert!(table.rows.iter().all(|r| r.optical_power == 0.0 && r.mechanical_power == 0.0));
    }

    #[test]
    fn ideal_double_swap_has_unit_efficiency() {
        let g = 1e4;
        let t = FRAC_PI_2 / g;
        let p = MomentProblem {
            rates: NoiseRates::default(),
            detuning: 0.0,
            pulses: PulseSet {
                write: PulseSpec::constant(PulseLabel::Write, g, 0.0, t),
                read: PulseSpec::constant(PulseLabel::Read, g, 3.0 * t, t),
                signal: PulseSpec::off(PulseLabel::Signal),
            },
            switch_time: None,
            initial: MomentState { n_opt: 1.0, ..MomentState::thermal(0.0) },
        };
        let tr = integrate_moments(&p, TimeGrid::new(0.0, 5.0 * t, t / 400.0), 1e-10).unwrap();
        let table = storage_retrieval_trace(&tr, &p.pulses, p.switch_time(), false);
        assert_relative_eq!(table.efficiency.unwrap(), 1.0, max_relative = 1e-4);
        let end = tr.states.last().unwrap();
        assert!((end.n_opt - 1.0).abs() < 1e-8);
    }

    #[test]
    fn time_grid_includes_end() {
        let g = TimeGrid::new(0.0, 1.0, 0.3).points().unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(TimeGrid::new(1.0, 0.0, 0.1).points().is_err());
    }
}
