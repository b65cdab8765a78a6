//! Store a single photon with a gaussian write pulse and read it back later.
//!
//! Prints the optical and mechanical power every 25 us and the retrieval figures.

use levmem::config::RunConfig;
use levmem::dynamics::{integrate_moments, storage_retrieval_trace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::default();
    let problem = cfg.moment_problem()?;
    let trace = integrate_moments(&problem, cfg.time_grid(), cfg.dynamics.tol)?;
    let sr = storage_retrieval_trace(&trace, &problem.pulses, problem.switch_time(), false);

    println!("{:>10} {:>12} {:>12}", "t (us)", "optical", "mechanical");
    for row in sr.rows.iter().step_by(50) {
        println!("{:>10.1} {:>12.4e} {:>12.4e}", row.t * 1e6, row.optical_power, row.mechanical_power);
    }
    let show = |v: Option<f64>| v.map_or("none".to_owned(), |v| format!("{v:.4e}"));
    println!("write peak at {} s, read peak at {} s", show(sr.write_peak), show(sr.read_peak));
    println!("peak ratio {}, occupation peak ratio {}", show(sr.efficiency), show(sr.n_opt_peak_ratio));
    println!("{} right-hand-side evaluations", trace.stats.rhs_evals);
    Ok(())
}
