//! Mean photon number and zero-delay correlation of the retrieved field.

use levmem::config::{linspace, RunConfig};
use levmem::correlations::{g2_zero, retrieved_moments, G2Inputs, DEFAULT_THRESHOLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::default();

    println!("coherent input, varying amplitude and storage time");
    for a in [0.1, 0.3, 1.0, 2.0] {
        for t_f in [0.0, 5e-4, 1e-3] {
            let c = cfg.with_value("state.alpha_sq", a)?.with_value("state.r", 0.0)?.with_value("protocol.t_f", t_f)?;
            let input = G2Inputs { state: c.input_state(), proto: c.protocol_spec()? };
            let m = retrieved_moments(&input)?;
            println!(
                "|a|^2 = {a:<4} t_f = {t_f:.1e} s: <n> = {:.4e}, g2(0) = {:.6}",
                m.mean,
                g2_zero(&input, DEFAULT_THRESHOLD)?
            );
        }
    }

    println!("\nsqueezed input at |a|^2 = 0.3");
    for r in linspace(0.0, 1.0, 11) {
        let c = cfg.with_value("state.r", r)?;
        let input = G2Inputs { state: c.input_state(), proto: c.protocol_spec()? };
        println!("r = {r:.1}: g2(0) = {:.4}", g2_zero(&input, DEFAULT_THRESHOLD)?);
    }
    Ok(())
}
