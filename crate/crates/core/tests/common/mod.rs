//! Reference values computed independently of the library, plus the report helper.

#![allow(dead_code)]

use std::io::Write;
use std::time::Instant;

use levmem::gaussian::ProtocolSpec;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `eps`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Simpson with a tolerance relative to a first coarse estimate of the integral.
pub fn simpson_rel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64) -> f64 {
    let rough: f64 = (0..=64).map(|k| f(a + (b - a) * k as f64 / 64.0).abs()).sum::<f64>() * (b - a) / 65.0;
    simpson(f, a, b, (rel * rough).max(f64::MIN_POSITIVE))
}

/// Retrieved `V_XX` by direct quadrature of the squared Green's functions of the
/// write, free and read stages (constant couplings, phase-compensated frame).
///
/// Noise strengths: `2 B` optical, `2 Gamma + 2 gamma + 2 F` mechanical, `2 B_r` readout.
pub fn v_xx_oracle(r: f64, n_mech: f64, p: &ProtocolSpec, rel: f64) -> f64 {
    let s = p.stages();
    let q = &p.rates;
    let (b, br, gam) = (q.b_write, q.b_read, q.gamma);
    let (g_w, t1, g_r, t2, tf) = (s.g_w, s.t_1s, s.g_r, s.t_2s, p.t_f);
    let eta_w = (-b * t1).exp();
    let eta_f = (-gam * (tf + t1)).exp();
    let eta_r = (-br * t2).exp();
    let (cr, sr) = ((g_r * t2).cos(), (g_r * t2).sin());
    let (cw, sw) = ((g_w * t1).cos(), (g_w * t1).sin());

    let a1 = eta_r * (eta_w * cr * cw + eta_f * sr * sw);
    let a2 = eta_r * (eta_w * cr * sw - eta_f * sr * cw);
    let signal = a1 * a1 * (-2.0 * r).exp() + a2 * a2 * (2.0 * n_mech + 1.0);

    let d_opt = 2.0 * b;
    let d_mech = 2.0 * gam + 2.0 * q.gamma_noise + 2.0 * q.f_noise;
    let d_read = 2.0 * br;

    let kx = |u: f64| {
        eta_r * (eta_w * cr * (b * u).exp() * (g_w * (t1 - u)).cos() + eta_f * sr * (gam * u).exp() * (g_w * (t1 - u)).sin())
    };
    let kp = |u: f64| {
        eta_r * (eta_w * cr * (b * u).exp() * (g_w * (t1 - u)).sin() - eta_f * sr * (gam * u).exp() * (g_w * (t1 - u)).cos())
    };
    let write = d_opt * simpson_rel(&|u| kx(u).powi(2), 0.0, t1, rel) + d_mech * simpson_rel(&|u| kp(u).powi(2), 0.0, t1, rel);

    let free = d_mech * simpson_rel(&|u| (eta_r * sr * (-gam * (tf - u)).exp()).powi(2), 0.0, tf, rel);

    let kr = |u: f64, f: fn(f64) -> f64| eta_r * (br * u).exp() * f(g_r * (t2 - u));
    let read = d_read * simpson_rel(&|u| kr(u, f64::cos).powi(2), 0.0, t2, rel)
        + d_mech * simpson_rel(&|u| kr(u, f64::sin).powi(2), 0.0, t2, rel);

    signal + write + free + read
}

/// `int_0^t exp(2 D s) sin^2(G (t - s)) ds` and the `cos^2` partner.
pub fn g_integrals_oracle(g: f64, decay: f64, t: f64, rel: f64) -> (f64, f64) {
    let s2 = simpson_rel(&|s| (2.0 * decay * s).exp() * (g * (t - s)).sin().powi(2), 0.0, t, rel);
    let c2 = simpson_rel(&|s| (2.0 * decay * s).exp() * (g * (t - s)).cos().powi(2), 0.0, t, rel);
    (s2, c2)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Collects the checks of one acceptance criterion and prints a single verdict line.
pub struct Criterion {
    id: &'static str,
    title: &'static str,
    started: Instant,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    pub fn new(id: &'static str, title: &'static str) -> Self {
        Self { id, title, started: Instant::now(), checks: Vec::new() }
    }

    pub fn check(&mut self, pass: bool, detail: impl Into<String>) {
        self.checks.push((detail.into(), pass));
    }

    pub fn runtime_below(&mut self, seconds: f64) {
        let t = self.started.elapsed().as_secs_f64();
        self.check(t < seconds, format!("runtime {t:.3} s < {seconds} s"));
    }

    /// Print the verdict outside the test harness capture, then fail on any failed check.
    pub fn finish(self) {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "[{verdict}] {} {} ({} checks)", self.id, self.title, self.checks.len());
        for (detail, pass) in &self.checks {
            let _ = writeln!(err, "    {} {detail}", if *pass { "ok  " } else { "FAIL" });
        }
        assert!(failed.is_empty(), "{} failed: {}", self.id, failed.join("; "));
    }
}
