//! Transfer fidelity of squeezed coherent states across amplitude, squeezing and storage time.

use levmem::config::{linspace, RunConfig};
use levmem::sweep::fidelity_point;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::default();
    cfg.protocol.pi_half = true;

    let rs = linspace(0.0, 1.0, 6);
    print!("{:>8}", "|a|^2");
    for r in &rs {
        print!("  r={r:<5.1}");
    }
    println!();
    for a in linspace(0.0, 2.0, 9) {
        print!("{a:>8.2}");
        for &r in &rs {
            let c = cfg.with_value("state.alpha_sq", a)?.with_value("state.r", r)?;
            print!("  {:.5}", fidelity_point(&c)?[0]);
        }
        println!();
    }

    println!("\nstorage time dependence at |a|^2 = 0.3, r = 0.05");
    for t_f in linspace(0.0, 2e-3, 5) {
        let f = fidelity_point(&cfg.with_value("protocol.t_f", t_f)?)?;
        println!("t_f = {:.1e} s: F = {:.6}, V_XX = {:.4}, V_YY = {:.4}", t_f, f[0], f[1], f[2]);
    }
    Ok(())
}
