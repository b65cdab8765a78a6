//! Physical inputs of the levitated-particle memory and the rates derived from them.
//!
//! Every frequency-like quantity is an angular rate in rad/s, taken at face value
//! (a "124 kHz" trap frequency is stored as `1.24e5`). With that reading the
//! zero-point length `sqrt(hbar / 2 m omega_x)` comes out at 18.8 pm for the
//! reference particle.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

/// Raw experimental inputs, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    /// Particle mass (kg).
    pub mass: f64,
    /// Trap frequency along x (rad/s).
    pub omega_x: f64,
    /// Particle radius (m).
    pub radius: f64,
    /// Effective relative permittivity factor.
    pub epsilon_c: f64,
    pub lambda_s: f64,
    pub lambda_w: f64,
    pub lambda_r: f64,
    /// Offset between signal focus and trap focus (m).
    pub delta_x: f64,
    /// Signal beam waist (m).
    pub waist_w0: f64,
    /// Signal laser linewidth (rad/s).
    pub signal_linewidth: f64,
    /// Background gas pressure (Pa).
    pub pressure: f64,
    /// Gas temperature (K).
    pub temperature: f64,
    /// Dynamic viscosity of the gas (Pa s); selects the Stokes friction model.
    pub gas_viscosity: Option<f64>,
    /// Direct gas damping rate (rad/s).
    pub gamma_g: Option<f64>,
    /// When set, `gamma_g` is the rate at this pressure and scales linearly with `pressure`.
    pub gamma_g_reference_pressure: Option<f64>,
    /// Nonlinear feedback damping (rad/s).
    pub delta_gamma: f64,
    /// Optical damping of the signal, write and read fields (rad/s).
    pub b_s: f64,
    pub b_w: f64,
    pub b_r: f64,
    /// Heating rates (rad/s). Carried along, not used by the linear dynamics.
    pub a_t: f64,
    pub a_w: f64,
    pub a_r: f64,
    /// Scaled optomechanical coupling of the feedback detection.
    pub chi: f64,
    /// Average detected photon flux (1/s).
    pub photon_flux: Option<f64>,
    /// Feedback gain.
    pub feedback_gain: f64,
    /// Mean phonon occupation under feedback cooling.
    pub n_mech: f64,
    /// Thermal noise strength (1/s); computed from the gas formula when absent.
    pub gamma_noise: Option<f64>,
    /// Feedback noise strength (1/s); computed from the feedback formula when absent.
    pub f_noise: Option<f64>,
    /// Effective background temperature for the gas-noise formula; defaults to `temperature`.
    pub t_eff: Option<f64>,
    /// Signal detuning in the rotating frame (rad/s).
    pub detuning: f64,
}

impl Default for PhysicalParams {
    /// The reference particle and trap of the storage/retrieval demonstration.
    fn default() -> Self {
        Self {
            mass: 1.2e-18,
            omega_x: 1.24e5,
            radius: 50e-9,
            epsilon_c: 1.133,
            lambda_s: 780e-9,
            lambda_w: 1064e-9,
            lambda_r: 1064e-9,
            delta_x: 10e-9,
            // diffraction-limited focus at NA = 0.9
            waist_w0: 780e-9 / (PI * 0.9),
            signal_linewidth: 2.0 * PI * 1.0e3,
            pressure: 7e-4,
            temperature: 4.0,
            gas_viscosity: None,
            gamma_g: Some(0.0289),
            gamma_g_reference_pressure: None,
            delta_gamma: 660.0,
            b_s: 0.3,
            b_w: 0.04,
            b_r: 0.04,
            a_t: 27e3,
            a_w: 10e3,
            a_r: 10e3,
            chi: 1.5e-9,
            photon_flux: None,
            feedback_gain: 20.0,
            n_mech: 0.1,
            gamma_noise: Some(0.0289 * 0.1),
            f_noise: Some(660.0 * 0.1),
            t_eff: None,
            detuning: 0.0,
        }
    }
}

/// Which constant multiplies `G^2 / (Gamma B)` in the cooperativity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CooperativityConvention {
    /// `C = G^2 / (Gamma B)`; makes `T31(0) = 2 sqrt(Cw Cr) / (Cw + Cr + 1)` exact.
    #[default]
    Consistent,
    /// `C = 4 G^2 / (Gamma B)`.
    Printed,
}

impl CooperativityConvention {
    fn prefactor(self) -> f64 {
        match self {
            CooperativityConvention::Consistent => 1.0,
            CooperativityConvention::Printed => 4.0,
        }
    }
}

/// Cooperativity `k G^2 / (Gamma B)`; exactly zero when `G` is zero.
pub fn cooperativity(g: f64, gamma: f64, b: f64, convention: CooperativityConvention) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        convention.prefactor() * g * g / (gamma * b)
    }
}

/// Quantities computed from [`PhysicalParams`] and the two control amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedRates {
    /// Zero-point fluctuation (m).
    pub ell_x: f64,
    /// Friction coefficient (kg/s).
    pub eta_f: f64,
    pub gamma_g: f64,
    /// Total mechanical damping `gamma_g + delta_gamma`.
    pub gamma_total: f64,
    pub d_p: f64,
    pub d_q: f64,
    pub gamma_noise: f64,
    pub f_noise: f64,
    /// Optical damping while writing, `b_s + b_w`.
    pub b_write: f64,
    pub b_read: f64,
    /// Cooperativities in the default (consistent) convention.
    pub c_w: f64,
    pub c_r: f64,
    /// Cooperativities with the factor 4.
    pub c_w_printed: f64,
    pub c_r_printed: f64,
    /// Mechanical relaxation time `1 / gamma_total`.
    pub tau_r: f64,
}

impl DerivedRates {
    pub fn cooperativities(&self, convention: CooperativityConvention) -> (f64, f64) {
        match convention {
            CooperativityConvention::Consistent => (self.c_w, self.c_r),
            CooperativityConvention::Printed => (self.c_w_printed, self.c_r_printed),
        }
    }

    pub fn noise_rates(&self) -> NoiseRates {
        NoiseRates {
            b_write: self.b_write,
            b_read: self.b_read,
            gamma: self.gamma_total,
            gamma_noise: self.gamma_noise,
            f_noise: self.f_noise,
        }
    }
}

/// The damping and noise rates the dynamical models consume.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRates {
    /// Optical damping during the write stage.
    pub b_write: f64,
    /// Optical damping during readout.
    pub b_read: f64,
    /// Total mechanical damping.
    pub gamma: f64,
    /// Thermal noise strength.
    pub gamma_noise: f64,
    /// Feedback noise strength.
    pub f_noise: f64,
}

impl NoiseRates {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("b_write", self.b_write),
            ("b_read", self.b_read),
            ("gamma", self.gamma),
            ("gamma_noise", self.gamma_noise),
            ("f_noise", self.f_noise),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("rate `{name}` must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega_x", self.omega_x),
            ("radius", self.radius),
            ("temperature", self.temperature),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("`{name}` must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("pressure", self.pressure),
            ("delta_gamma", self.delta_gamma),
            ("b_s", self.b_s),
            ("b_w", self.b_w),
            ("b_r", self.b_r),
            ("a_t", self.a_t),
            ("a_w", self.a_w),
            ("a_r", self.a_r),
            ("n_mech", self.n_mech),
            ("waist_w0", self.waist_w0),
            ("signal_linewidth", self.signal_linewidth),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("`{name}` must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("gas_viscosity", self.gas_viscosity),
            ("gamma_g", self.gamma_g),
            ("gamma_noise", self.gamma_noise),
            ("f_noise", self.f_noise),
            ("photon_flux", self.photon_flux),
            ("t_eff", self.t_eff),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!("`{name}` must be >= 0, got {v}")));
                }
            }
        }
        if let Some(p_ref) = self.gamma_g_reference_pressure {
            if !(p_ref.is_finite() && p_ref > 0.0) {
                return Err(Error::Config(format!(
                    "`gamma_g_reference_pressure` must be > 0, got {p_ref}"
                )));
            }
            if self.gamma_g.is_none() {
                return Err(Error::Config(
                    "`gamma_g_reference_pressure` requires `gamma_g`".into(),
                ));
            }
        }
        match (self.gas_viscosity, self.gamma_g) {
            (Some(_), Some(_)) => Err(Error::Config(
                "provide either `gas_viscosity` or `gamma_g` for gas damping, not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "gas damping needs `gas_viscosity` (with `pressure`) or a direct `gamma_g`".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Zero-point fluctuation `sqrt(hbar / (2 m omega_x))`.
    pub fn ell_x(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega_x)).sqrt()
    }

    /// Particle volume `4/3 pi R^3`.
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    /// Gas damping rate and friction coefficient `(gamma_g, eta_f)`.
    fn gas_damping(&self) -> Result<(f64, f64)> {
        match (self.gas_viscosity, self.gamma_g) {
            (None, Some(gamma_g)) => {
                let gamma_g = match self.gamma_g_reference_pressure {
                    Some(p_ref) => gamma_g * self.pressure / p_ref,
                    None => gamma_g,
                };
                Ok((gamma_g, 2.0 * self.mass * gamma_g))
            }
            (Some(mu), None) => {
                let eta_f = 6.0 * PI * mu * self.radius;
                Ok((eta_f / (2.0 * self.mass), eta_f))
            }
            _ => Err(Error::Config(
                "gas damping needs exactly one of `gas_viscosity` or `gamma_g`".into(),
            )),
        }
    }

    /// Thermal-noise strength from `2 m gamma_g k_B T_eff`.
    ///
    /// The expression is not a rate dimensionally; its SI magnitude is used as one.
    pub fn gas_noise_formula(&self, gamma_g: f64) -> f64 {
        let t_eff = self.t_eff.unwrap_or(self.temperature);
        warn!("thermal noise strength from 2 m gamma_g k_B T_eff: dimensionally not a rate, SI magnitude used as 1/s");
        2.0 * self.mass * gamma_g * K_B * t_eff
    }

    /// Feedback-noise strength from `54 m hbar omega_x chi^2 Phi G^2 (2N^2 + 2N + 1)`.
    ///
    /// Same dimensional caveat as [`Self::gas_noise_formula`].
    pub fn feedback_noise_formula(&self) -> Result<f64> {
        let flux = self.photon_flux.ok_or_else(|| {
            Error::Config("`f_noise` absent and `photon_flux` missing for the feedback-noise formula".into())
        })?;
        warn!("feedback noise strength from 54 m hbar omega_x chi^2 Phi G^2 (2N^2+2N+1): dimensionally not a rate, SI magnitude used as 1/s");
        let n = self.n_mech;
        Ok(54.0
            * self.mass
            * HBAR
            * self.omega_x
            * self.chi.powi(2)
            * flux
            * self.feedback_gain.powi(2)
            * (2.0 * n * n + 2.0 * n + 1.0))
    }
}

/// Compute every derived rate for the given control amplitudes `g_w0`, `g_r0` (rad/s).
pub fn derive_rates(p: &PhysicalParams, g_w0: f64, g_r0: f64) -> Result<DerivedRates> {
    p.validate()?;
    if !(g_w0 >= 0.0 && g_r0 >= 0.0) {
        return Err(Error::Config(format!(
            "control amplitudes must be >= 0, got G_w0 = {g_w0}, G_r0 = {g_r0}"
        )));
    }
    let ell_x = p.ell_x();
    let (gamma_g, eta_f) = p.gas_damping()?;
    let gamma_total = gamma_g + p.delta_gamma;
    let kt = K_B * p.temperature;
    let d_p = 2.0 * eta_f * kt * ell_x * ell_x / (HBAR * HBAR);
    let d_q = eta_f * HBAR * HBAR / (24.0 * kt * p.mass * p.mass * ell_x * ell_x);
    let gamma_noise = match p.gamma_noise {
        Some(v) => v,
        None => p.gas_noise_formula(gamma_g),
    };
    let f_noise = match p.f_noise {
        Some(v) => v,
        None => p.feedback_noise_formula()?,
    };
    let b_write = p.b_s + p.b_w;
    let b_read = p.b_r;
    let coop = |g, b, conv| cooperativity(g, gamma_total, b, conv);
    let rates = DerivedRates {
        ell_x,
        eta_f,
        gamma_g,
        gamma_total,
        d_p,
        d_q,
        gamma_noise,
        f_noise,
        b_write,
        b_read,
        c_w: coop(g_w0, b_write, CooperativityConvention::Consistent),
        c_r: coop(g_r0, b_read, CooperativityConvention::Consistent),
        c_w_printed: coop(g_w0, b_write, CooperativityConvention::Printed),
        c_r_printed: coop(g_r0, b_read, CooperativityConvention::Printed),
        tau_r: 1.0 / gamma_total,
    };
    let values = [
        rates.eta_f,
        rates.gamma_g,
        rates.gamma_total,
        rates.d_p,
        rates.d_q,
        rates.gamma_noise,
        rates.f_noise,
        rates.c_w,
        rates.c_r,
        rates.tau_r,
    ];
    if values.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::Internal(format!("negative or NaN derived rate: {rates:?}")));
    }
    Ok(rates)
}

/// Single-photon optomechanical coupling `g` (rad/s).
///
/// `g = V_n (2 eps_c omega_s dw_s x0) / (pi^2 w0^2 c) * dx / w0^2`, with the
/// length `x0` taken to be the zero-point fluctuation.
pub fn coupling_g(p: &PhysicalParams) -> Result<f64> {
    if !(p.waist_w0 > 0.0) {
        return Err(Error::Domain(format!("beam waist must be > 0, got {}", p.waist_w0)));
    }
    if !(p.lambda_s > 0.0) {
        return Err(Error::Domain(format!("signal wavelength must be > 0, got {}", p.lambda_s)));
    }
    let omega_s = 2.0 * PI * C_LIGHT / p.lambda_s;
    let w2 = p.waist_w0 * p.waist_w0;
    Ok(p.volume() * (2.0 * p.epsilon_c * omega_s * p.signal_linewidth * p.ell_x())
        / (PI * PI * w2 * C_LIGHT)
        * p.delta_x
        / w2)
}
