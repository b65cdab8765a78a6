//! Retrieved photon number and zero-delay second-order correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{attenuation_factors, GaussianInputState, ProtocolSpec};
use crate::kernels::damped;

/// `G11 = int_0^t exp(2 D s) sin^2(G (t - s)) ds` and the matching `cos^2` integral `G22`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GIntegrals {
    pub g11: f64,
    pub g22: f64,
}

/// Growth-weighted swap integrals for coupling `g`, rate `decay` and window `duration`.
///
/// Evaluated as `exp(2 D t)` times the decaying-kernel form, which stays accurate in
/// the small-`D t` and small-`G t` limits where the rational closed form cancels.
pub fn g_integrals(g: f64, decay: f64, duration: f64) -> Result<GIntegrals> {
    if !(duration >= 0.0 && decay >= 0.0 && duration.is_finite() && decay.is_finite() && g.is_finite()) {
        return Err(Error::Domain(format!(
            "swap integrals need decay >= 0 and duration >= 0, got D = {decay}, t = {duration}"
        )));
    }
    let k = damped(2.0 * decay, g, duration);
    let grow = (2.0 * decay * duration).exp();
    Ok(GIntegrals { g11: grow * k.sin2, g22: grow * k.cos2 })
}

/// The rational closed form `-(G^2 N1 + D^2 N2 + G D N3) / R`, evaluated literally.
/// Singular at `D = 0`.
pub fn g_integrals_closed_form(g: f64, decay: f64, duration: f64) -> GIntegrals {
    let n1 = -(2.0 * decay * duration).exp_m1();
    let n2 = 1.0 - (2.0 * g * duration).cos();
    let n3 = (2.0 * g * duration).sin();
    let r = 4.0 * decay * (g * g + decay * decay);
    GIntegrals {
        g11: -(g * g * n1 + decay * decay * n2 + g * decay * n3) / r,
        g22: -(g * g * n1 + decay * decay * (2.0 * n1 - n2) - g * decay * n3) / r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Inputs {
    pub state: GaussianInputState,
    pub proto: ProtocolSpec,
}

/// Default floor on the retrieved photon number below which `g2(0)` is undefined.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

/// `<a+a>` and `<a+^2 a^2>` of the retrieved field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetrievedMoments {
    pub mean: f64,
    pub second: f64,
}

/// Scaled integrals: attenuation factors times the growth-weighted integrals.
struct Scaled {
    /// `eta_f^2 G11`
    w11: f64,
    /// `eta_f^2 G22`
    w22: f64,
    /// `eta_r^2 G33`
    w33: f64,
}

fn scaled(input: &G2Inputs) -> Scaled {
    let s = input.proto.stages();
    let r = &input.proto.rates;
    let decay_free = (-2.0 * r.gamma * input.proto.t_f).exp();
    let k_write = damped(2.0 * r.gamma, s.g_w, s.t_1s);
    let k_read = damped(2.0 * r.b_read, s.g_r, s.t_2s);
    Scaled { w11: decay_free * k_write.sin2, w22: decay_free * k_write.cos2, w33: k_read.cos2 }
}

fn u_term(state: &GaussianInputState) -> f64 {
    let (sh, ch) = (state.r.sinh(), state.r.cosh());
    let a2 = state.alpha.norm_sqr();
    let re_sq = 2.0 * (state.alpha * state.alpha).re;
    sh * sh * ch * ch - re_sq * sh * ch + 2.0 * sh.powi(4) + 4.0 * a2 * sh * sh + a2 * a2
}

pub fn retrieved_moments(input: &G2Inputs) -> Result<RetrievedMoments> {
    input.state.validate()?;
    input.proto.validate()?;
    let st = &input.state;
    let s = input.proto.stages();
    let r = &input.proto.rates;
    let att = attenuation_factors(&input.proto);
    let (sw, cw) = (s.g_w * s.t_1s).sin_cos();
    let sr = (s.g_r * s.t_2s).sin();
    let k = scaled(input);
    let er2 = att.eta_r * att.eta_r;
    let ef2 = er2 * att.eta_f * att.eta_f;
    let sr2 = sr * sr;

    let mean = ef2 * sr2 * sw * sw * (st.alpha.norm_sqr() + st.r.sinh().powi(2))
        + ef2 * sr2 * cw * cw * st.n_mech
        + 2.0 * r.b_read * k.w33
        + 2.0 * er2 * sr2 * (r.b_write * k.w11 + (r.gamma_noise + r.f_noise) * k.w22);

    let second = ef2 * ef2 * sr2 * sr2 * sw.powi(4) * u_term(st)
        + 8.0 * r.b_read * r.b_read * k.w33 * k.w33
        + ef2 * ef2 * sr2 * sr2 * cw.powi(4) * st.n_mech * st.n_mech
        + 8.0 * (r.gamma_noise.powi(2) + r.f_noise.powi(2)) * er2 * er2 * sr2 * sr2 * k.w22 * k.w22
        + 8.0 * r.b_write * r.b_write * er2 * er2 * sr2 * sr2 * k.w11 * k.w11;
    Ok(RetrievedMoments { mean, second })
}

/// Mean retrieved photon number.
pub fn mean_photon_retrieved(input: &G2Inputs) -> Result<f64> {
    Ok(retrieved_moments(input)?.mean)
}

/// Zero-delay second-order correlation of the retrieved photon.
pub fn g2_zero(input: &G2Inputs, threshold: f64) -> Result<f64> {
    let m = retrieved_moments(input)?;
    if !(m.mean > threshold) {
        return Err(Error::UndefinedCorrelation { mean: m.mean, threshold });
    }
    Ok(m.second / (m.mean * m.mean))
}
