//! Two-axis sweep with a derived axis: the storage time and a common write/read
//! coupling, with the pulse durations tied to the quarter swap period.
//!
//! Evaluated in parallel; rows come back in grid order. Writes CSV and SVG into the
//! directory given as the first argument (default `sweep_out`).

use std::path::PathBuf;

use levmem::config::{linspace, logspace, Format, RunConfig};
use levmem::output::{write_tables, Metadata};
use levmem::svg::Plot;
use levmem::sweep::{fidelity_point, run_sweep, Axis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep_out".into()));
    let cfg = RunConfig::default();

    let coupling = Axis::custom("coupling", logspace(1e3, 1e5, 9), |c, g| {
        c.protocol.g_w = g;
        c.protocol.g_r = g;
        c.protocol.pi_half = true;
        Ok(())
    });
    let storage = Axis::key("t_f", linspace(0.0, 2e-3, 9));
    let mut out = run_sweep("coupling_vs_storage", &cfg, &[coupling, storage], &["fidelity", "v_xx", "v_yy"], fidelity_point)?;
    out.table.plot = Some(Plot::heatmap("coupling", "t_f", "fidelity"));
    println!("{} points, {} failed", out.table.rows.len(), out.failures);

    let f = out.table.values("fidelity").unwrap_or_default();
    let best = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("best fidelity {best:.6}");

    let meta = Metadata {
        recipe: "custom_sweep".into(),
        config_digest: cfg.digest(),
        conventions: cfg.conventions.describe(),
        timestamp: None,
    };
    for p in write_tables(&dir, &[out.table], &meta, Format::Both)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
