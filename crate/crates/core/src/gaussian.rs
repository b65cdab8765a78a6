//! Gaussian-state transfer through write, free evolution and readout.
//!
//! Quadratures follow `X = a + a+`, so the vacuum variance is 1 and a coherent state
//! `|alpha>` has mean `(2 Re alpha, 2 Im alpha)`. During a swap of constant strength
//! `G` each quadrature pair rotates at angle `G t` while the optical row decays at the
//! optical damping and the mechanical row at `Gamma`. The readout rotation is taken
//! in the frame that undoes the sign of a double swap, so a lossless pair of pi/2
//! pulses returns the input state unchanged.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{damped, damped_exp};
use crate::params::NoiseRates;

/// Squeezed coherent input `|alpha, r>` with thermal mechanics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianInputState {
    pub alpha: Complex64,
    /// Squeezing parameter; `X` has variance `exp(-2 r)`.
    pub r: f64,
    /// Initial thermal phonon number.
    pub n_mech: f64,
}

pub const MAX_SQUEEZING: f64 = 5.0;

impl GaussianInputState {
    pub fn coherent(alpha: Complex64) -> Self {
        Self { alpha, r: 0.0, n_mech: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::Config("alpha must be finite".into()));
        }
        if !(self.r.is_finite() && self.r.abs() <= MAX_SQUEEZING) {
            return Err(Error::Config(format!("squeezing |r| must be <= {MAX_SQUEEZING}, got {}", self.r)));
        }
        if !(self.n_mech.is_finite() && self.n_mech >= 0.0) {
            return Err(Error::Config(format!("n_mech must be >= 0, got {}", self.n_mech)));
        }
        Ok(())
    }

    /// `(Re alpha)^2`
    pub fn i1(&self) -> f64 {
        self.alpha.re * self.alpha.re
    }

    /// `(Im alpha)^2`
    pub fn i2(&self) -> f64 {
        self.alpha.im * self.alpha.im
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseMode {
    /// Constant couplings `G_w`, `G_r` applied for `t_1s`, `t_2s`.
    #[default]
    ConstantPulses,
    /// Gaussian pulses with peaks `G_w`, `G_r` and widths `t_1s`, `t_2s`; replaced by
    /// constant pulses of equal area lasting twice the width.
    GaussianPulses,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    #[serde(default)]
    pub mode: PulseMode,
    pub g_w: f64,
    pub g_r: f64,
    pub t_1s: f64,
    pub t_2s: f64,
    /// Free evolution between the pulses (s).
    pub t_f: f64,
    pub rates: NoiseRates,
}

/// Constant-pulse view of a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapStages {
    pub g_w: f64,
    pub t_1s: f64,
    pub g_r: f64,
    pub t_2s: f64,
}

impl ProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        for (name, v) in [("g_w", self.g_w), ("g_r", self.g_r)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("`{name}` must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("t_1s", self.t_1s), ("t_2s", self.t_2s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("`{name}` must be > 0, got {v}")));
            }
        }
        if !(self.t_f.is_finite() && self.t_f >= 0.0) {
            return Err(Error::Config(format!("`t_f` must be >= 0, got {}", self.t_f)));
        }
        Ok(())
    }

    pub fn stages(&self) -> SwapStages {
        match self.mode {
            PulseMode::ConstantPulses => SwapStages { g_w: self.g_w, t_1s: self.t_1s, g_r: self.g_r, t_2s: self.t_2s },
            PulseMode::GaussianPulses => {
                let root = (2.0 * std::f64::consts::PI).sqrt();
                // area sqrt(2 pi) G t_s spread over 2 t_s
                SwapStages { g_w: root * self.g_w / 2.0, t_1s: 2.0 * self.t_1s, g_r: root * self.g_r / 2.0, t_2s: 2.0 * self.t_2s }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Attenuation {
    pub eta_w: f64,
    pub eta_f: f64,
    pub eta_r: f64,
    /// Mean-amplitude loss `1 - exp(-B_r t_2s - Gamma (t_f + t_1s))`.
    pub zeta: f64,
    /// Half of the retrieved mean amplitude per unit input amplitude.
    pub xi: f64,
}

pub fn attenuation_factors(proto: &ProtocolSpec) -> Attenuation {
    let s = proto.stages();
    let r = &proto.rates;
    let eta_w = (-r.b_write * s.t_1s).exp();
    let eta_f = (-r.gamma * (proto.t_f + s.t_1s)).exp();
    let eta_r = (-r.b_read * s.t_2s).exp();
    let zeta = -(-r.b_read * s.t_2s - r.gamma * (proto.t_f + s.t_1s)).exp_m1();
    let tp = s.g_w * s.t_1s + s.g_r * s.t_2s;
    let tm = s.g_w * s.t_1s - s.g_r * s.t_2s;
    let xi = eta_r / 4.0 * ((eta_w - eta_f) * tp.cos() + (eta_w + eta_f) * tm.cos());
    Attenuation { eta_w, eta_f, eta_r, zeta, xi }
}

/// Retrieved optical quadrature statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovMatrix {
    pub v_xx: f64,
    pub v_yy: f64,
    pub v_xy: f64,
    pub mean_x: f64,
    pub mean_y: f64,
}

/// Contributions to `V_XX`, kept apart for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBudget {
    /// Coefficient of the input optical quadrature in the output.
    pub gain_optical: f64,
    /// Coefficient of the initial mechanical quadrature in the output.
    pub gain_mechanical: f64,
    /// Input-state contribution.
    pub signal: f64,
    pub write_noise: f64,
    pub free_noise: f64,
    pub read_noise: f64,
}

impl VarianceBudget {
    pub fn total(&self) -> f64 {
        self.signal + self.write_noise + self.free_noise + self.read_noise
    }
}

/// White-noise strength of the mechanical input: vacuum plus thermal and feedback noise.
pub fn mechanical_noise_strength(rates: &NoiseRates) -> f64 {
    2.0 * rates.gamma + 2.0 * rates.gamma_noise + 2.0 * rates.f_noise
}

/// Breakdown of `V_XX` for input squeezing `r` (pass `-r` for `V_YY`).
pub fn variance_budget(r: f64, n_mech: f64, proto: &ProtocolSpec) -> VarianceBudget {
    let s = proto.stages();
    let rates = &proto.rates;
    let (b, br, gam) = (rates.b_write, rates.b_read, rates.gamma);
    let att = attenuation_factors(proto);
    let (sw, cw) = (s.g_w * s.t_1s).sin_cos();
    let (sr, cr) = (s.g_r * s.t_2s).sin_cos();
    let a1 = att.eta_r * (att.eta_w * cr * cw + att.eta_f * sr * sw);
    let a2 = att.eta_r * (att.eta_w * cr * sw - att.eta_f * sr * cw);
    let signal = a1 * a1 * (-2.0 * r).exp() + a2 * a2 * (2.0 * n_mech + 1.0);

    let d_opt = 2.0 * b;
    let d_mech = mechanical_noise_strength(rates);
    let d_read = 2.0 * br;

    // write stage: kernels in the elapsed time since the noise entered
    let ef = (-gam * proto.t_f).exp();
    let k_opt = damped(2.0 * b, s.g_w, s.t_1s);
    let k_mech = damped(2.0 * gam, s.g_w, s.t_1s);
    let k_mix = damped(b + gam, s.g_w, s.t_1s);
    let er2 = att.eta_r * att.eta_r;
    let fx2 = er2 * (cr * cr * k_opt.cos2 + sr * sr * ef * ef * k_mech.sin2 + 2.0 * cr * sr * ef * k_mix.sin_cos);
    let fp2 = er2 * (cr * cr * k_opt.sin2 + sr * sr * ef * ef * k_mech.cos2 - 2.0 * cr * sr * ef * k_mix.sin_cos);
    let write_noise = d_opt * fx2 + d_mech * fp2;

    let free_noise = er2 * sr * sr * d_mech * damped_exp(2.0 * gam, proto.t_f);

    let k_read = damped(2.0 * br, s.g_r, s.t_2s);
    let read_noise = d_read * k_read.cos2 + d_mech * k_read.sin2;

    VarianceBudget { gain_optical: a1, gain_mechanical: a2, signal, write_noise, free_noise, read_noise }
}

/// Mean and covariance of the retrieved optical quadratures.
pub fn propagate_quadratures(state: &GaussianInputState, proto: &ProtocolSpec) -> Result<CovMatrix> {
    state.validate()?;
    proto.validate()?;
    let bx = variance_budget(state.r, state.n_mech, proto);
    let by = variance_budget(-state.r, state.n_mech, proto);
    let cov = CovMatrix {
        v_xx: bx.total(),
        v_yy: by.total(),
        v_xy: 0.0,
        mean_x: bx.gain_optical * 2.0 * state.alpha.re,
        mean_y: bx.gain_optical * 2.0 * state.alpha.im,
    };
    if !(cov.v_xx > 0.0 && cov.v_yy > 0.0) || !cov.v_xx.is_finite() || !cov.v_yy.is_finite() {
        return Err(Error::Numerical(format!("non-positive variance: {cov:?}")));
    }
    if cov.v_xx * cov.v_yy < 1.0 - 1e-9 {
        return Err(Error::Domain(format!(
            "retrieved covariance violates the uncertainty bound (V_XX V_YY = {:e}); \
             the rotating-decay approximation needs Gamma >= optical damping",
            cov.v_xx * cov.v_yy
        )));
    }
    Ok(cov)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityConvention {
    /// `2 / sqrt(A)` prefactor: unit fidelity for identical pure states.
    #[default]
    Standard,
    /// `sqrt(2 / A)` prefactor and the bare `zeta^2` exponent.
    Paper,
}

/// Transfer fidelity between the input state and the retrieved state.
pub fn fidelity(state: &GaussianInputState, proto: &ProtocolSpec, convention: FidelityConvention) -> Result<f64> {
    let cov = propagate_quadratures(state, proto)?;
    let zeta = attenuation_factors(proto).zeta;
    fidelity_from(state, &cov, zeta, convention)
}

/// Fidelity from an already computed covariance.
pub fn fidelity_from(state: &GaussianInputState, cov: &CovMatrix, zeta: f64, convention: FidelityConvention) -> Result<f64> {
    let a11 = (-2.0 * state.r).exp() + cov.v_xx;
    let a22 = (2.0 * state.r).exp() + cov.v_yy;
    let a = a11 * a22;
    if !(a > 0.0) {
        return Err(Error::Internal(format!("fidelity determinant not positive: {a}")));
    }
    let penalty = zeta * zeta * (state.i1() * a22 + state.i2() * a11) / a;
    Ok(match convention {
        FidelityConvention::Standard => 2.0 / a.sqrt() * (-2.0 * penalty).exp(),
        FidelityConvention::Paper => (2.0 / a).sqrt() * (-penalty).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width, nx: n, ny: n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Config(format!("Wigner grid needs >= 2 points per axis, got {}x{}", self.nx, self.ny)));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::Config("Wigner grid ranges must be increasing".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

/// Where the retrieved Wigner function is centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerMean {
    /// The propagated quadrature means.
    #[default]
    Consistent,
    /// `xi (Re alpha, Im alpha)`, so the origin value reproduces the compact closed form.
    Paper,
}

/// Gaussian quasi-probability on a rectangular grid, row-major in `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `values[j * nx + i]` is `W(x[i], y[j])`.
    pub values: Vec<f64>,
    pub mean: (f64, f64),
    pub variance: (f64, f64),
}

impl WignerField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.x.len() + i]
    }

    /// Trapezoidal integral over the grid.
    pub fn mass(&self) -> f64 {
        let (nx, ny) = (self.x.len(), self.y.len());
        let dx = (self.x[nx - 1] - self.x[0]) / (nx - 1) as f64;
        let dy = (self.y[ny - 1] - self.y[0]) / (ny - 1) as f64;
        let mut s = 0.0;
        for j in 0..ny {
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            for i in 0..nx {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                s += wx * wy * self.at(i, j);
            }
        }
        s * dx * dy
    }

    /// Grid point with the largest value.
    pub fn mode(&self) -> (f64, f64) {
        let k = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let nx = self.x.len();
        (self.x[k % nx], self.y[k / nx])
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn gaussian_field(grid: &GridSpec, mean: (f64, f64), var: (f64, f64)) -> WignerField {
    let x = GridSpec::axis(grid.x_min, grid.x_max, grid.nx);
    let y = GridSpec::axis(grid.y_min, grid.y_max, grid.ny);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * (var.0 * var.1).sqrt());
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    for &yy in &y {
        for &xx in &x {
            let e = (xx - mean.0).powi(2) / (2.0 * var.0) + (yy - mean.1).powi(2) / (2.0 * var.1);
            values.push(norm * (-e).exp());
        }
    }
    WignerField { x, y, values, mean, variance: var }
}

/// Wigner function of the input state (`proto = None`) or of the retrieved state.
pub fn wigner_grid(
    state: &GaussianInputState,
    proto: Option<&ProtocolSpec>,
    grid: &GridSpec,
    mean: WignerMean,
) -> Result<WignerField> {
    grid.validate()?;
    state.validate()?;
    match proto {
        None => Ok(gaussian_field(
            grid,
            (2.0 * state.alpha.re, 2.0 * state.alpha.im),
            ((-2.0 * state.r).exp(), (2.0 * state.r).exp()),
        )),
        Some(p) => {
            let cov = propagate_quadratures(state, p)?;
            let m = match mean {
                WignerMean::Consistent => (cov.mean_x, cov.mean_y),
                WignerMean::Paper => {
                    let xi = attenuation_factors(p).xi;
                    (xi * state.alpha.re, xi * state.alpha.im)
                }
            };
            Ok(gaussian_field(grid, m, (cov.v_xx, cov.v_yy)))
        }
    }
}
