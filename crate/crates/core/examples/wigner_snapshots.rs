//! Wigner functions of the input and of states retrieved with short and long pulses.
//!
//! Writes one CSV and one SVG heatmap per panel into the directory given as the first
//! argument (default `wigner_out`).

use std::path::PathBuf;

use levmem::config::{Format, RunConfig};
use levmem::gaussian::wigner_grid;
use levmem::output::{write_tables, Cell, Metadata, Table};
use levmem::svg::Plot;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "wigner_out".into()));
    let mut cfg = RunConfig::default();
    cfg.wigner.points = 101;
    let state = cfg.input_state();
    let grid = cfg.wigner.grid();

    let mut panels = vec![("input".to_owned(), wigner_grid(&state, None, &grid, cfg.conventions.wigner_mean)?)];
    for width in [1e-6, 20e-6, 50e-6, 100e-6] {
        let mut c = cfg.clone();
        c.protocol.t_1s = width;
        c.protocol.t_2s = width;
        let field = wigner_grid(&state, Some(&c.protocol_spec()?), &grid, cfg.conventions.wigner_mean)?;
        panels.push((format!("width_{:.0}us", width * 1e6), field));
    }

    let mut tables = Vec::new();
    for (name, f) in &panels {
        println!(
            "{name:<12} mean ({:+.4}, {:+.4})  variance ({:.4}, {:.4})  peak {:.4}  mass {:.6}",
            f.mean.0, f.mean.1, f.variance.0, f.variance.1, f.peak(), f.mass()
        );
        let mut t = Table::new(name, &["x", "y", "w"]);
        for (j, &y) in f.y.iter().enumerate() {
            for (i, &x) in f.x.iter().enumerate() {
                t.push(vec![Cell::Num(x), Cell::Num(y), Cell::Num(f.at(i, j))]);
            }
        }
        tables.push(t.with_plot(Plot::heatmap("x", "y", "w")));
    }
    let meta = Metadata {
        recipe: "wigner_snapshots".into(),
        config_digest: cfg.digest(),
        conventions: cfg.conventions.describe(),
        timestamp: None,
    };
    for p in write_tables(&dir, &tables, &meta, Format::Both)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
