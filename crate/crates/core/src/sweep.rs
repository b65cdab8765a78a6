//! Cartesian parameter sweeps evaluated on the rayon pool.

use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::config::{Quantity, RunConfig};
use crate::correlations::{retrieved_moments, G2Inputs};
use crate::dynamics::{integrate_moments, storage_retrieval_trace};
use crate::error::{Error, Result};
use crate::gaussian::{fidelity_from, propagate_quadratures, attenuation_factors};
use crate::output::{Cell, Table};
use crate::scattering::{half_width, transmission_at};

type SetFn = dyn Fn(&mut RunConfig, f64) -> Result<()> + Send + Sync;

#[derive(Clone)]
enum Setter {
    Key(String),
    Custom(Arc<SetFn>),
}

/// One sweep dimension: a column name, its values, and how a value enters the config.
#[derive(Clone)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
    setter: Setter,
}

impl Axis {
    /// Sets the config key `key` (dotted or bare) directly.
    pub fn key(key: &str, values: Vec<f64>) -> Self {
        Self { name: key.to_owned(), values, setter: Setter::Key(key.to_owned()) }
    }

    pub fn custom(name: &str, values: Vec<f64>, set: impl Fn(&mut RunConfig, f64) -> Result<()> + Send + Sync + 'static) -> Self {
        Self { name: name.to_owned(), values, setter: Setter::Custom(Arc::new(set)) }
    }

    fn apply(&self, cfg: &RunConfig, v: f64) -> Result<RunConfig> {
        match &self.setter {
            Setter::Key(k) => cfg.with_value(k, v),
            Setter::Custom(f) => {
                let mut c = cfg.clone();
                f(&mut c, v)?;
                Ok(c)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub table: Table,
    pub failures: usize,
}

/// Evaluate `eval` at every grid point.
///
/// Rows come out in axis-major order (first axis slowest). A failing point keeps its
/// row, with empty values and the error code in the `status` column.
pub fn run_sweep(
    name: &str,
    base: &RunConfig,
    axes: &[Axis],
    columns: &[&str],
    eval: impl Fn(&RunConfig) -> Result<Vec<f64>> + Sync,
) -> Result<SweepOutcome> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Config(format!("a sweep takes 1 or 2 axes, got {}", axes.len())));
    }
    for a in axes {
        if a.values.is_empty() || a.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("sweep axis `{}` needs finite, non-empty values", a.name)));
        }
    }
    let mut coords: Vec<Vec<f64>> = axes[0].values.iter().map(|v| vec![*v]).collect();
    if let Some(second) = axes.get(1) {
        coords = coords.into_iter().flat_map(|c| second.values.iter().map(move |v| vec![c[0], *v])).collect();
    }

    let results: Vec<Result<Vec<f64>>> = coords
        .par_iter()
        .map(|point| {
            let mut cfg = base.clone();
            for (axis, v) in axes.iter().zip(point) {
                cfg = axis.apply(&cfg, *v)?;
            }
            let out = eval(&cfg)?;
            if out.len() != columns.len() {
                return Err(Error::Internal(format!("evaluator returned {} of {} values", out.len(), columns.len())));
            }
            Ok(out)
        })
        .collect();

    let mut header: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    header.extend_from_slice(columns);
    header.push("status");
    let mut table = Table::new(name, &header);
    let mut failures = 0;
    for (point, res) in coords.iter().zip(results) {
        let mut row: Vec<Cell> = point.iter().map(|v| Cell::Num(*v)).collect();
        match res {
            Ok(values) => {
                row.extend(values.into_iter().map(Cell::Num));
                row.push(Cell::from("ok"));
            }
            Err(e) => {
                warn!("{name}: point {point:?} failed: {e}");
                failures += 1;
                row.extend(std::iter::repeat_n(Cell::Empty, columns.len()));
                row.push(Cell::Text(e.code().to_owned()));
            }
        }
        table.push(row);
    }
    Ok(SweepOutcome { table, failures })
}

pub fn fidelity_point(cfg: &RunConfig) -> Result<Vec<f64>> {
    let state = cfg.input_state();
    let proto = cfg.protocol_spec()?;
    let cov = propagate_quadratures(&state, &proto)?;
    let zeta = attenuation_factors(&proto).zeta;
    let f = fidelity_from(&state, &cov, zeta, cfg.conventions.fidelity)?;
    Ok(vec![f, cov.v_xx, cov.v_yy])
}

pub fn g2_point(cfg: &RunConfig) -> Result<Vec<f64>> {
    let input = G2Inputs { state: cfg.input_state(), proto: cfg.protocol_spec()? };
    let m = retrieved_moments(&input)?;
    let threshold = crate::correlations::DEFAULT_THRESHOLD;
    if !(m.mean > threshold) {
        return Err(Error::UndefinedCorrelation { mean: m.mean, threshold });
    }
    Ok(vec![m.second / (m.mean * m.mean), m.mean])
}

pub fn transmission_point(cfg: &RunConfig) -> Result<Vec<f64>> {
    let p = cfg.scatter_params()?;
    Ok(vec![transmission_at(0.0, &p)?.t31.norm(), half_width(&p)?.first])
}

pub fn efficiency_point(cfg: &RunConfig) -> Result<Vec<f64>> {
    let problem = cfg.moment_problem()?;
    let trace = integrate_moments(&problem, cfg.time_grid(), cfg.dynamics.tol)?;
    let sr = storage_retrieval_trace(&trace, &problem.pulses, problem.switch_time(), cfg.dynamics.raw_power);
    let missing = || Error::Numerical("no optical power during the write window".into());
    Ok(vec![
        sr.efficiency.ok_or_else(missing)?,
        sr.write_peak.ok_or_else(missing)?,
        sr.read_peak.unwrap_or(f64::NAN),
    ])
}

type PointFn = fn(&RunConfig) -> Result<Vec<f64>>;

/// Output columns and evaluator for a generic sweep quantity.
pub fn evaluator(q: Quantity) -> (&'static [&'static str], PointFn) {
    match q {
        Quantity::Fidelity => (&["fidelity", "v_xx", "v_yy"], fidelity_point),
        Quantity::G2 => (&["g2", "n_retrieved"], g2_point),
        Quantity::Transmission => (&["abs_t31_dc", "half_width"], transmission_point),
        Quantity::Efficiency => (&["efficiency", "write_peak", "read_peak"], efficiency_point),
    }
}

/// Run the sweep described by the config's own `sweep` block.
pub fn sweep_from_config(cfg: &RunConfig) -> Result<SweepOutcome> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Config("the `sweep` recipe needs a `sweep` block".into()))?;
    let axes = spec.axes.iter().map(|a| Ok(Axis::key(&a.key, a.values()?))).collect::<Result<Vec<_>>>()?;
    let (columns, f) = evaluator(spec.quantity);
    run_sweep("sweep", cfg, &axes, columns, f)
}
