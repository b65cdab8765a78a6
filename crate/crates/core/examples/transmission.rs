//! Stationary transmission through the memory at impedance matching, and the
//! fidelity of gaussian signal pulses of increasing bandwidth.

use levmem::config::{logspace, RunConfig};
use levmem::params::CooperativityConvention;
use levmem::scattering::{half_width, pulse_fidelity, t31_dc, transmission_at};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::default();
    let p = cfg.scatter_params()?;
    let (cw, cr) = p.cooperativities(CooperativityConvention::Consistent);
    let hw = half_width(&p)?;
    println!("G_w = {:.4e}, matched G_r = {:.4e} rad/s", p.g_w, p.g_r);
    println!("C_w = {cw:.4e}, C_r = {cr:.4e}, |T31(0)| = {:.12}", t31_dc(cw, cr));
    println!("half-width {:.6e} rad/s (outermost crossing {:.6e})", hw.first, hw.outermost);

    println!("\n{:>12} {:>10} {:>10} {:>10} {:>10}", "omega/dw", "|T31|", "|T32|", "|T33|", "|M32|");
    for k in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let t = transmission_at(k * hw.first, &p)?;
        println!("{k:>12.2} {:>10.6} {:>10.3e} {:>10.3e} {:>10.3e}", t.t31.norm(), t.t32.norm(), t.t33.norm(), t.m32.norm());
    }

    println!("\n{:>12} {:>12}", "sigma/dw", "F_p");
    for s in logspace(0.01, 10.0, 7) {
        println!("{s:>12.3} {:>12.8}", pulse_fidelity(&p, s * hw.first)?);
    }
    Ok(())
}
