//! Write/read control pulses and the signal flux pulse.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PulseShape {
    /// `exp(-(t - center)^2 / (2 width^2))`.
    Gaussian { center: f64 },
    /// Unit envelope on `[start, start + width]`.
    Constant {
        #[serde(default)]
        start: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseLabel {
    Write,
    Read,
    Signal,
}

/// One pulse: peak amplitude times a normalized envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    #[serde(flatten)]
    pub shape: PulseShape,
    /// Peak value: an angular rate for control pulses, a photon flux for the signal.
    pub amplitude: f64,
    /// Standard deviation (gaussian) or duration (constant), seconds.
    pub width: f64,
    pub label: PulseLabel,
}

impl PulseSpec {
    pub fn gaussian(label: PulseLabel, amplitude: f64, center: f64, width: f64) -> Self {
        Self { shape: PulseShape::Gaussian { center }, amplitude, width, label }
    }

    pub fn constant(label: PulseLabel, amplitude: f64, start: f64, duration: f64) -> Self {
        Self { shape: PulseShape::Constant { start }, amplitude, width: duration, label }
    }

    /// A zero-amplitude pulse, i.e. no coupling at all.
    pub fn off(label: PulseLabel) -> Self {
        Self::constant(label, 0.0, 0.0, 1.0)
    }

    /// Gaussian signal flux `I_in` whose source term `4 B I_in` integrates to `photons`.
    pub fn signal_for_photons(photons: f64, center: f64, width: f64, b_write: f64) -> Result<Self> {
        if photons == 0.0 {
            return Ok(Self::gaussian(PulseLabel::Signal, 0.0, center, width));
        }
        if !(b_write > 0.0) {
            return Err(Error::Config(
                "a signal photon can only be injected through a non-zero write-stage optical damping".into(),
            ));
        }
        let amplitude = photons / (4.0 * b_write * (2.0 * PI).sqrt() * width);
        let s = Self::gaussian(PulseLabel::Signal, amplitude, center, width);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Config(format!("pulse amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::Config(format!("pulse width must be > 0, got {}", self.width)));
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Gaussian { center } => {
                let x = (t - center) / self.width;
                self.amplitude * (-0.5 * x * x).exp()
            }
            PulseShape::Constant { start } => {
                if t >= start && t <= start + self.width {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Integrated envelope: `sqrt(2 pi) G0 t_s` for gaussians, `G0 t_s` for constants.
    pub fn area(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian { .. } => (2.0 * PI).sqrt() * self.amplitude * self.width,
            PulseShape::Constant { .. } => self.amplitude * self.width,
        }
    }

    /// True when the rotation angle lies within `tol` (relative) of pi/2.
    pub fn is_pi_half(&self, tol: f64) -> bool {
        let a = self.area();
        a >= FRAC_PI_2 * (1.0 - tol) && a <= FRAC_PI_2 * (1.0 + tol)
    }

    /// Center of the pulse in time.
    pub fn center(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian { center } => center,
            PulseShape::Constant { start } => start + 0.5 * self.width,
        }
    }

    /// Interval outside of which the envelope is negligible (or exactly zero).
    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            PulseShape::Gaussian { center } => (center - 8.0 * self.width, center + 8.0 * self.width),
            PulseShape::Constant { start } => (start, start + self.width),
        }
    }

    /// Constant pulse with the same area and a duration of twice the width.
    pub fn equivalent_constant(&self) -> (f64, f64) {
        match self.shape {
            PulseShape::Gaussian { .. } => {
                let duration = 2.0 * self.width;
                (self.area() / duration, duration)
            }
            PulseShape::Constant { .. } => (self.amplitude, self.width),
        }
    }
}

/// Default pi/2 classification tolerance.
pub const PI_HALF_TOLERANCE: f64 = 0.1;

/// Pulse area (rotation angle in radians).
pub fn pulse_area(pulse: &PulseSpec) -> f64 {
    pulse.area()
}

/// Write, read and signal pulses of one storage/retrieval run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSet {
    pub write: PulseSpec,
    pub read: PulseSpec,
    pub signal: PulseSpec,
}

impl PulseSet {
    /// Composite coupling `G_i(t) = G_w(t) + G_r(t)`.
    pub fn coupling(&self, t: f64) -> f64 {
        self.write.envelope(t) + self.read.envelope(t)
    }

    pub fn validate(&self) -> Result<()> {
        self.write.validate()?;
        self.read.validate()?;
        self.signal.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gaussian_peak_and_one_sigma() {
        let p = PulseSpec::gaussian(PulseLabel::Write, 7.9e4, 9e-5, 7e-6);
        assert_eq!(p.envelope(9e-5), 7.9e4);
        assert_relative_eq!(p.envelope(9e-5 + 7e-6), 7.9e4 * (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn composite_coupling_is_sum() {
        let set = PulseSet {
            write: PulseSpec::gaussian(PulseLabel::Write, 7.9e4, 9e-5, 7e-6),
            read: PulseSpec::gaussian(PulseLabel::Read, 8.6e4, 9e-4, 7e-6),
            signal: PulseSpec::off(PulseLabel::Signal),
        };
        for t in [0.0, 9e-5, 5e-4, 9e-4, 9.05e-4] {
            assert_eq!(set.coupling(t), set.write.envelope(t) + set.read.envelope(t));
        }
    }

    #[test]
    fn constant_pulse_area_is_pi_half() {
        let p = PulseSpec::constant(PulseLabel::Write, 7.9e4, 0.0, 19e-6);
        assert_relative_eq!(p.area(), 1.501, max_relative = 1e-12);
        assert!(p.is_pi_half(PI_HALF_TOLERANCE));
        assert_eq!(p.envelope(-1e-9), 0.0);
        assert_eq!(p.envelope(10e-6), 7.9e4);
        assert_eq!(p.envelope(20e-6), 0.0);
    }

    #[test]
    fn gaussian_area_matches_quadrature() {
        let p = PulseSpec::gaussian(PulseLabel::Read, 8.6e4, 9e-4, 7e-6);
        // composite Simpson over +-8 sigma
        let (a, b) = (9e-4 - 8.0 * 7e-6, 9e-4 + 8.0 * 7e-6);
        let n = 4000;
        let h = (b - a) / n as f64;
        let mut s = p.envelope(a) + p.envelope(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * p.envelope(a + i as f64 * h);
        }
        let quad = s * h / 3.0;
        assert_relative_eq!(p.area(), quad, max_relative = 1e-9);
        assert_relative_eq!(p.area(), 1.509, max_relative = 1e-3);
        assert!(p.is_pi_half(PI_HALF_TOLERANCE));
    }

    #[test]
    fn zero_amplitude_has_zero_area() {
        assert_eq!(PulseSpec::gaussian(PulseLabel::Write, 0.0, 0.0, 1.0).area(), 0.0);
    }

    #[test]
    fn signal_pulse_injects_requested_photons() {
        let s = PulseSpec::signal_for_photons(1.0, 9e-5, 7e-6, 0.34).unwrap();
        assert_relative_eq!(4.0 * 0.34 * s.area(), 1.0, max_relative = 1e-14);
        assert!(PulseSpec::signal_for_photons(1.0, 9e-5, 7e-6, 0.0).is_err());
    }

    #[test]
    fn invalid_width_rejected() {
        assert!(PulseSpec::gaussian(PulseLabel::Write, 1.0, 0.0, 0.0).validate().is_err());
        assert!(PulseSpec::gaussian(PulseLabel::Write, -1.0, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn equivalent_constant_preserves_area() {
        let p = PulseSpec::gaussian(PulseLabel::Write, 8.6e4, 0.0, 7e-6);
        let (g, t) = p.equivalent_constant();
        assert_relative_eq!(g * t, p.area(), max_relative = 1e-14);
        assert_eq!(t, 14e-6);
    }

    proptest! {
        #[test]
        fn envelope_symmetric_about_center(g0 in 0.0..1e6f64, i in -4096i64..4096, m in 8i32..24, j in 0u32..1024) {
            // dyadic times so that tc +- delta are exact
            let tc = i as f64 * 2f64.powi(-22);
            let ts = 2f64.powi(-m);
            let delta = j as f64 * 2f64.powi(-32);
            let p = PulseSpec::gaussian(PulseLabel::Write, g0, tc, ts);
            prop_assert!((p.envelope(tc + delta) - p.envelope(tc - delta)).abs() <= 1e-15 * g0.max(1.0));
        }

        #[test]
        fn area_linear_in_amplitude_and_width(g0 in 1e-3..1e6f64, ts in 1e-7..1e-3f64, k in 0.1..10.0f64) {
            let p = PulseSpec::gaussian(PulseLabel::Write, g0, 0.0, ts);
            let pa = PulseSpec { amplitude: k * g0, ..p };
            let pw = PulseSpec { width: k * ts, ..p };
            prop_assert!((pa.area() / p.area() - k).abs() < 1e-12 * k);
            prop_assert!((pw.area() / p.area() - k).abs() < 1e-12 * k);
        }
    }
}
