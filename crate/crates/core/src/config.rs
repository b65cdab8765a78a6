//! JSON run configuration.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dynamics::{gaussian_storage_pulses, MomentProblem, MomentState, TimeGrid};
use crate::error::{Error, Result};
use crate::gaussian::{FidelityConvention, GaussianInputState, GridSpec, ProtocolSpec, PulseMode, WignerMean};
use crate::params::{derive_rates, CooperativityConvention, DerivedRates, PhysicalParams};
use crate::pulses::{PulseLabel, PulseSet, PulseSpec};
use crate::scattering::{impedance_matched_read_coupling, ScatterParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub write: PulseSpec,
    pub read: PulseSpec,
    /// Input photon flux. When absent a gaussian carrying `signal_photons` is placed
    /// on top of the write pulse.
    #[serde(default)]
    pub signal: Option<PulseSpec>,
    #[serde(default = "one")]
    pub signal_photons: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            write: PulseSpec::gaussian(PulseLabel::Write, 7.9e4, 90e-6, 7e-6),
            read: PulseSpec::gaussian(PulseLabel::Read, 8.6e4, 900e-6, 7e-6),
            signal: None,
            signal_photons: 1.0,
        }
    }
}

/// Swap protocol used by the fidelity, Wigner and correlation calculations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub mode: PulseMode,
    pub g_w: f64,
    pub g_r: f64,
    pub t_1s: f64,
    pub t_2s: f64,
    pub t_f: f64,
    /// Replace `t_1s`, `t_2s` by the quarter-period `pi / (2 G)` of each coupling.
    pub pi_half: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            mode: PulseMode::ConstantPulses,
            g_w: 7.9e4,
            g_r: 8.6e4,
            t_1s: 19e-6,
            t_2s: 18e-6,
            t_f: 0.5e-3,
            pi_half: false,
        }
    }
}

/// Signal state. The thermal phonon number comes from `params.n_mech`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    pub alpha_sq: f64,
    /// Phase of the coherent amplitude (rad).
    pub alpha_phase: f64,
    pub r: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self { alpha_sq: 0.3, alpha_phase: 0.0, r: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    pub tol: f64,
    pub switch_time: Option<f64>,
    /// Keep absolute powers instead of scaling each trace to unit peak.
    pub raw_power: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self { t0: 0.0, t1: 1.2e-3, step: 0.5e-6, tol: 1e-9, switch_time: None, raw_power: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    pub half_width: f64,
    pub points: usize,
    pub pulse_widths: [f64; 3],
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self { half_width: 8.0, points: 161, pulse_widths: [1e-6, 50e-6, 100e-6] }
    }
}

impl WignerConfig {
    pub fn grid(&self) -> GridSpec {
        GridSpec::square(self.half_width, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringConfig {
    /// Spectrum extent in units of the half-width.
    pub span: f64,
    pub points: usize,
    /// Spectral-width sweep limits in units of the half-width.
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_points: usize,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self { span: 5.0, points: 801, sigma_min: 0.01, sigma_max: 10.0, sigma_points: 31 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Conventions {
    pub cooperativity: CooperativityConvention,
    pub fidelity: FidelityConvention,
    pub wigner_mean: WignerMean,
}

impl Conventions {
    /// Factor-4 cooperativity, `sqrt(2 / A)` fidelity prefactor and the `xi`-scaled Wigner mean.
    pub fn paper() -> Self {
        Self {
            cooperativity: CooperativityConvention::Printed,
            fidelity: FidelityConvention::Paper,
            wigner_mean: WignerMean::Paper,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "cooperativity={} fidelity={} wigner_mean={}",
            label(&self.cooperativity),
            label(&self.fidelity),
            label(&self.wigner_mean)
        )
    }
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Svg,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: Format,
    /// Add a generation timestamp to the metadata header.
    pub timestamp: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), format: Format::Both, timestamp: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Config("range `count` must be >= 1".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config("range limits must be finite".into()));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::Config("log range limits must be > 0".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let u = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.start + u * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + u * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect())
    }
}

/// Linearly spaced points, shorthand for recipe grids.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    Range { start, stop, count, scale: Scale::Linear }.values().expect("static range")
}

pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    Range { start, stop, count, scale: Scale::Log }.values().expect("static range")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    /// Dotted path such as `params.pressure`, or a bare field name when unambiguous.
    pub key: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<Range>,
}

impl AxisConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match (&self.values, &self.range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => r.values()?,
            _ => {
                return Err(Error::Config(format!(
                    "sweep axis `{}` needs exactly one of `values` or `range`",
                    self.key
                )))
            }
        };
        if v.is_empty() {
            return Err(Error::Config(format!("sweep axis `{}` has no values", self.key)));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("sweep axis `{}` has non-finite value {bad}", self.key)));
        }
        Ok(v)
    }
}

/// What a generic sweep evaluates at each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    #[default]
    Fidelity,
    G2,
    Transmission,
    Efficiency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<AxisConfig>,
    #[serde(default)]
    pub quantity: Quantity,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub pulses: PulseConfig,
    pub protocol: ProtocolConfig,
    pub state: StateConfig,
    pub dynamics: DynamicsConfig,
    pub wigner: WignerConfig,
    pub scattering: ScatteringConfig,
    pub conventions: Conventions,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
}

/// Blocks that hold sweepable keys, searched in this order for bare names.
const BLOCKS: [&str; 6] = ["params", "protocol", "state", "dynamics", "scattering", "wigner"];

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.pulses.write.validate()?;
        self.pulses.read.validate()?;
        if let Some(s) = &self.pulses.signal {
            s.validate()?;
        }
        if !(self.pulses.signal_photons.is_finite() && self.pulses.signal_photons >= 0.0) {
            return Err(Error::Config("`pulses.signal_photons` must be >= 0".into()));
        }
        let p = &self.protocol;
        for (name, v) in [("protocol.g_w", p.g_w), ("protocol.g_r", p.g_r)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("`{name}` must be >= 0, got {v}")));
            }
        }
        if p.pi_half && !(p.g_w > 0.0 && p.g_r > 0.0) {
            return Err(Error::Config("`protocol.pi_half` needs positive couplings".into()));
        }
        for (name, v) in [("protocol.t_1s", p.t_1s), ("protocol.t_2s", p.t_2s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("`{name}` must be > 0, got {v}")));
            }
        }
        if !(p.t_f.is_finite() && p.t_f >= 0.0) {
            return Err(Error::Config(format!("`protocol.t_f` must be >= 0, got {}", p.t_f)));
        }
        let s = &self.state;
        if !(s.alpha_sq.is_finite() && s.alpha_sq >= 0.0) {
            return Err(Error::Config(format!("`state.alpha_sq` must be >= 0, got {}", s.alpha_sq)));
        }
        if !s.alpha_phase.is_finite() {
            return Err(Error::Config("`state.alpha_phase` must be finite".into()));
        }
        self.input_state().validate()?;
        let d = &self.dynamics;
        if !(d.tol > 0.0 && d.tol < 1e-2) {
            return Err(Error::Config(format!("`dynamics.tol` must lie in (0, 1e-2), got {}", d.tol)));
        }
        TimeGrid::new(d.t0, d.t1, d.step).points()?;
        self.wigner.grid().validate()?;
        if let Some(bad) = self.wigner.pulse_widths.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Config(format!("`wigner.pulse_widths` entries must be > 0, got {bad}")));
        }
        let sc = &self.scattering;
        if !(sc.span > 0.0 && sc.points >= 2 && sc.sigma_points >= 2 && sc.sigma_min > 0.0 && sc.sigma_max > sc.sigma_min) {
            return Err(Error::Config(
                "`scattering` needs span > 0, points >= 2, sigma_points >= 2 and 0 < sigma_min < sigma_max".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            self.validate_sweep(sweep)?;
        }
        Ok(())
    }

    fn validate_sweep(&self, sweep: &SweepConfig) -> Result<()> {
        if sweep.axes.is_empty() || sweep.axes.len() > 2 {
            return Err(Error::Config(format!("`sweep.axes` needs 1 or 2 axes, got {}", sweep.axes.len())));
        }
        let tree = self.to_value();
        for axis in &sweep.axes {
            resolve_key(&tree, &axis.key)?;
            axis.values()?;
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config is always serializable")
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration. The `output`
    /// block is left out since it does not change any number.
    pub fn digest(&self) -> String {
        let canonical = Self { output: OutputConfig::default(), ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config is always serializable");
        hex::encode(Sha256::digest(bytes))
    }

    /// Copy with one numeric key replaced.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self> {
        let mut tree = self.to_value();
        let path = resolve_key(&tree, key)?;
        let slot = path.iter().try_fold(&mut tree, |node, k| node.get_mut(k.as_str()));
        let slot = slot.ok_or_else(|| Error::UnknownKey(key.to_owned()))?;
        *slot = serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| Error::Config(format!("`{key}` must be finite, got {value}")))?;
        let cfg: Self = serde_json::from_value(tree).map_err(|e| Error::Config(format!("`{key}` = {value}: {e}")))?;
        cfg.params.validate()?;
        Ok(cfg)
    }

    pub fn derived(&self) -> Result<DerivedRates> {
        derive_rates(&self.params, self.protocol.g_w, self.protocol.g_r)
    }

    pub fn input_state(&self) -> GaussianInputState {
        GaussianInputState {
            alpha: Complex64::from_polar(self.state.alpha_sq.sqrt(), self.state.alpha_phase),
            r: self.state.r,
            n_mech: self.params.n_mech,
        }
    }

    pub fn protocol_spec(&self) -> Result<ProtocolSpec> {
        let rates = self.derived()?.noise_rates();
        let p = &self.protocol;
        let (t_1s, t_2s) = if p.pi_half { (FRAC_PI_2 / p.g_w, FRAC_PI_2 / p.g_r) } else { (p.t_1s, p.t_2s) };
        let spec = ProtocolSpec { mode: p.mode, g_w: p.g_w, g_r: p.g_r, t_1s, t_2s, t_f: p.t_f, rates };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pulse_set(&self) -> Result<PulseSet> {
        let rates = self.derived()?.noise_rates();
        let (w, r) = (&self.pulses.write, &self.pulses.read);
        let set = match self.pulses.signal {
            Some(signal) => PulseSet { write: *w, read: *r, signal },
            None => {
                let mut set = gaussian_storage_pulses(
                    w.amplitude,
                    w.center(),
                    w.width,
                    r.amplitude,
                    r.center(),
                    r.width,
                    self.pulses.signal_photons,
                    rates.b_write,
                )?;
                set.write = *w;
                set.read = *r;
                set
            }
        };
        set.validate()?;
        Ok(set)
    }

    pub fn moment_problem(&self) -> Result<MomentProblem> {
        let problem = MomentProblem {
            rates: self.derived()?.noise_rates(),
            detuning: self.params.detuning,
            pulses: self.pulse_set()?,
            switch_time: self.dynamics.switch_time,
            initial: MomentState::thermal(self.params.n_mech),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::new(self.dynamics.t0, self.dynamics.t1, self.dynamics.step)
    }

    /// Scattering parameters at impedance matching, driven by the protocol write coupling.
    pub fn scatter_params(&self) -> Result<ScatterParams> {
        let d = self.derived()?;
        let p = ScatterParams {
            g_w: self.protocol.g_w,
            g_r: impedance_matched_read_coupling(self.protocol.g_w, d.b_write, d.b_read),
            gamma: d.gamma_total,
            b: d.b_write,
            b_r: d.b_read,
            delta_1: self.params.detuning,
            delta_2: self.params.detuning,
            gamma_noise: d.gamma_noise,
            f_noise: d.f_noise,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Turn a dotted or bare key into a full path that exists in `tree`.
pub fn resolve_key(tree: &Value, key: &str) -> Result<Vec<String>> {
    let unknown = || Error::UnknownKey(key.to_owned());
    if key.is_empty() {
        return Err(unknown());
    }
    let sweepable = |v: &Value| v.is_number() || v.is_null();
    if key.contains('.') {
        let path: Vec<String> = key.split('.').map(str::to_owned).collect();
        let found = path.iter().try_fold(tree, |node, k| node.get(k.as_str()));
        return match found {
            Some(v) if sweepable(v) => Ok(path),
            Some(_) => Err(Error::Config(format!("`{key}` is not a numeric setting"))),
            None => Err(unknown()),
        };
    }
    let hits: Vec<&str> = BLOCKS
        .iter()
        .copied()
        .filter(|b| tree.get(b).and_then(|blk| blk.get(key)).is_some_and(sweepable))
        .collect();
    match hits.as_slice() {
        [one] => Ok(vec![(*one).to_owned(), key.to_owned()]),
        [] => Err(unknown()),
        many => Err(Error::Config(format!(
            "`{key}` is ambiguous, qualify it as one of {}",
            many.iter().map(|b| format!("`{b}.{key}`")).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn map_json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(name) = rest.split('`').next() {
            return Error::UnknownKey(name.to_owned());
        }
    }
    let message = msg.split(" at line ").next().unwrap_or(&msg).to_owned();
    Error::Parse { line: e.line(), column: e.column(), message }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(map_json_error)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
