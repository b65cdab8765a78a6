//! Derived damping, noise and cooperativity figures for a configuration.
//!
//!     cargo run --example derive_rates [config.json]

use std::path::PathBuf;

use levmem::config::{load_config, RunConfig};
use levmem::params::{coupling_g, CooperativityConvention};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = match std::env::args().nth(1) {
        Some(p) => load_config(&PathBuf::from(p))?,
        None => RunConfig::default(),
    };
    let d = cfg.derived()?;
    println!("zero-point fluctuation   {:.4e} m", d.ell_x);
    println!("gas damping              {:.4e} 1/s", d.gamma_g);
    println!("total mechanical damping {:.4e} 1/s", d.gamma_total);
    println!("relaxation time          {:.4e} s", d.tau_r);
    println!("thermal noise strength   {:.4e} 1/s", d.gamma_noise);
    println!("feedback noise strength  {:.4e} 1/s", d.f_noise);
    println!("optical damping w / r    {:.3} / {:.3} 1/s", d.b_write, d.b_read);
    println!("single-photon coupling   {:.4e} rad/s", coupling_g(&cfg.params)?);

    for conv in [CooperativityConvention::Consistent, CooperativityConvention::Printed] {
        let (cw, cr) = d.cooperativities(conv);
        println!("cooperativity {conv:?}: C_w = {cw:.4e}, C_r = {cr:.4e}");
    }
    Ok(())
}
