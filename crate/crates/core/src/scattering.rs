//! Frequency-domain transmission through the write and read channels.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{cooperativity, CooperativityConvention};
use crate::quadrature;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Constant couplings, damping rates and detunings (all rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterParams {
    pub g_w: f64,
    pub g_r: f64,
    pub gamma: f64,
    /// Optical damping of the signal channel.
    pub b: f64,
    /// Optical damping of the readout channel.
    pub b_r: f64,
    #[serde(default)]
    pub delta_1: f64,
    #[serde(default)]
    pub delta_2: f64,
    /// Thermal noise strength.
    #[serde(default)]
    pub gamma_noise: f64,
    /// Feedback noise strength.
    #[serde(default)]
    pub f_noise: f64,
}

impl ScatterParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g_w", self.g_w),
            ("g_r", self.g_r),
            ("gamma", self.gamma),
            ("b", self.b),
            ("b_r", self.b_r),
            ("gamma_noise", self.gamma_noise),
            ("f_noise", self.f_noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("`{name}` must be finite and >= 0, got {v}")));
            }
        }
        if !(self.delta_1.is_finite() && self.delta_2.is_finite()) {
            return Err(Error::Config("detunings must be finite".into()));
        }
        Ok(())
    }

    pub fn cooperativities(&self, convention: CooperativityConvention) -> (f64, f64) {
        (
            cooperativity(self.g_w, self.gamma, self.b, convention),
            cooperativity(self.g_r, self.gamma, self.b_r, convention),
        )
    }

    /// Same parameters with the read coupling chosen so that `B_r G_w^2 = B G_r^2`.
    pub fn impedance_matched(self) -> Self {
        Self { g_r: impedance_matched_read_coupling(self.g_w, self.b, self.b_r), ..self }
    }
}

/// Read coupling that equalizes the two cooperativities.
pub fn impedance_matched_read_coupling(g_w: f64, b: f64, b_r: f64) -> f64 {
    g_w * (b_r / b).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transmission {
    /// Signal in, retrieved photon out.
    pub t31: Complex64,
    /// Thermal mechanical noise.
    pub t32: Complex64,
    /// Readout vacuum noise.
    pub t33: Complex64,
    /// Feedback noise.
    pub m32: Complex64,
}

pub fn transmission_at(omega: f64, p: &ScatterParams) -> Result<Transmission> {
    let opt = I * (omega + p.delta_1) + p.b;
    let read = I * (omega + p.delta_2) + p.b_r;
    let mech = I * omega + p.gamma;
    let den = opt * (mech * read + p.g_r * p.g_r) + p.g_w * p.g_w * read;
    if den.norm() < 1e-300 || !den.norm().is_finite() {
        return Err(Error::Pole { omega });
    }
    let root_br = (2.0 * p.b_r).sqrt();
    Ok(Transmission {
        t31: -(2.0 * p.b).sqrt() * root_br * p.g_w * p.g_r / den,
        t33: 2.0 * p.b_r * (mech * opt + p.g_w * p.g_w) / den - 1.0,
        t32: -I * root_br * (2.0 * p.gamma_noise).sqrt() * p.g_r * opt / den,
        m32: -I * root_br * (2.0 * p.f_noise).sqrt() * p.g_r * opt / den,
    })
}

/// Zero-frequency transmission `2 sqrt(Cw Cr) / (Cw + Cr + 1)`.
pub fn t31_dc(c_w: f64, c_r: f64) -> f64 {
    2.0 * (c_w * c_r).sqrt() / (c_w + c_r + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionSpectrum {
    pub omega: Vec<f64>,
    pub t31: Vec<Complex64>,
    pub t32: Vec<Complex64>,
    pub t33: Vec<Complex64>,
    pub m32: Vec<Complex64>,
}

pub fn spectrum(p: &ScatterParams, omega: &[f64]) -> Result<TransmissionSpectrum> {
    p.validate()?;
    if omega.is_empty() {
        return Err(Error::Config("frequency grid is empty".into()));
    }
    let mut s = TransmissionSpectrum {
        omega: omega.to_vec(),
        t31: Vec::with_capacity(omega.len()),
        t32: Vec::with_capacity(omega.len()),
        t33: Vec::with_capacity(omega.len()),
        m32: Vec::with_capacity(omega.len()),
    };
    for &w in omega {
        let t = transmission_at(w, p)?;
        s.t31.push(t.t31);
        s.t32.push(t.t32);
        s.t33.push(t.t33);
        s.m32.push(t.m32);
    }
    Ok(s)
}

/// Half-maximum crossings of `|T31|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfWidth {
    /// Smallest positive crossing.
    pub first: f64,
    /// Largest crossing; differs from `first` when `|T31|` is not monotone.
    pub outermost: f64,
}

const SEARCH_LIMIT: f64 = 1e12;

/// Frequencies where `|T31(w)| = |T31(0)| / 2`.
///
/// A geometric scan starting two decades below the smallest damping rate brackets
/// each crossing, which is then refined by bisection.
pub fn half_width(p: &ScatterParams) -> Result<HalfWidth> {
    p.validate()?;
    let t0 = transmission_at(0.0, p)?.t31.norm();
    if !(t0 > 0.0) {
        return Err(Error::Domain("zero transmission at zero frequency has no half-width".into()));
    }
    let target = 0.5 * t0;
    let f = |w: f64| -> Result<f64> { Ok(transmission_at(w, p)?.t31.norm() - target) };

    let bisect = |mut lo: f64, mut hi: f64| -> Result<f64> {
        let mut flo = f(lo)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid)?;
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    let floor = [p.gamma, p.b, p.b_r].into_iter().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let mut w = if floor.is_finite() { floor / 100.0 } else { 1e-6 };
    let mut prev = f(w)?;
    let mut first = None;
    let mut last = None;
    if prev <= 0.0 {
        first = Some(bisect(0.0, w)?);
        last = first;
    }
    let factor = 1.02;
    while w < SEARCH_LIMIT {
        let next = w * factor;
        let fv = f(next)?;
        if (fv > 0.0) != (prev > 0.0) {
            let root = bisect(w, next)?;
            first.get_or_insert(root);
            last = Some(root);
        }
        prev = fv;
        w = next;
    }
    match (first, last) {
        (Some(first), Some(outermost)) => Ok(HalfWidth { first, outermost }),
        _ => Err(Error::NotFound { limit: SEARCH_LIMIT }),
    }
}

/// Overlap fidelity of a gaussian pulse `exp(-w^2 / sigma^2)` after filtering by `|T31|`.
pub fn pulse_fidelity(p: &ScatterParams, sigma: f64) -> Result<f64> {
    p.validate()?;
    pulse_fidelity_for(|w| Ok(transmission_at(w, p)?.t31.norm()), sigma)
}

/// Pulse fidelity for an arbitrary real amplitude response.
pub fn pulse_fidelity_for(response: impl Fn(f64) -> Result<f64>, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("spectral width must be > 0, got {sigma}")));
    }
    let failure = RefCell::new(None);
    let resp = |w: f64| match response(w) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let input = |w: f64| (-(w / sigma).powi(2)).exp();
    let (a, b) = (-8.0 * sigma, 8.0 * sigma);
    let rel = 1e-8;
    let overlap = quadrature::integrate(|w| input(w) * input(w) * resp(w), a, b, 0.0, rel)?;
    let norm_in = quadrature::integrate(|w| input(w).powi(2), a, b, 0.0, rel)?;
    let norm_out = quadrature::integrate(|w| (input(w) * resp(w)).powi(2), a, b, 0.0, rel)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !(norm_out.value > 0.0) {
        return Err(Error::Numerical("retrieved pulse has zero norm".into()));
    }
    Ok((overlap.value * overlap.value / (norm_in.value * norm_out.value)).min(1.0))
}
