//! Damped trigonometric integrals `int_0^t exp(-c tau) f(w tau) dtau`.
//!
//! These appear in every noise variance of the swap protocol. The naive closed forms
//! cancel catastrophically when `w t` is small or when the exponential decays long
//! before one oscillation, so those regimes are summed as power series instead.

use num_complex::Complex64;

/// `(1 - exp(-x)) / x`, continuous at zero.
pub fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

fn phi1_complex(u: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - (-u).exp()) / u
}

/// Damped integrals of `sin^2`, `cos^2` and `sin cos`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Damped {
    pub sin2: f64,
    pub cos2: f64,
    pub sin_cos: f64,
}

/// `int_0^t exp(-c tau) dtau`.
pub fn damped_exp(c: f64, t: f64) -> f64 {
    t * phi1(c * t)
}

const MAX_ORDER: usize = 96;

/// `M_n(x) = int_0^1 exp(-x u) u^n du` for `n = 0..=nmax`, via the positive series
/// `exp(-x) sum_j x^j / ((n+1)...(n+1+j))`. Intended for moderate `x`.
fn moments_series(nmax: usize, x: f64) -> Vec<f64> {
    let ex = (-x).exp();
    (0..=nmax)
        .map(|n| {
            let mut term = 1.0 / (n as f64 + 1.0);
            let mut sum = term;
            let mut j = 0usize;
            loop {
                term *= x / (n as f64 + j as f64 + 2.0);
                sum += term;
                j += 1;
                if term < 1e-18 * sum || j > 10_000 {
                    break;
                }
            }
            ex * sum
        })
        .collect()
}

/// Alternating Taylor sums in `n`; `b(n)` is the magnitude of the n-th coefficient.
fn taylor_sums(b: impl Fn(usize) -> f64) -> (f64, f64) {
    let mut sin2 = 0.0;
    let mut sc = 0.0;
    for n in 1..=MAX_ORDER {
        let bn = b(n);
        if n % 2 == 0 {
            let k = n / 2;
            if k % 2 == 1 {
                sin2 += bn;
            } else {
                sin2 -= bn;
            }
        } else {
            let k = (n - 1) / 2;
            if k % 2 == 0 {
                sc += bn;
            } else {
                sc -= bn;
            }
        }
        if n > 3 && bn <= 1e-18 * (sin2.abs() + sc.abs()) {
            break;
        }
    }
    (sin2, sc)
}

/// Damped trigonometric integrals for decay `c >= 0`, frequency `w` and duration `t >= 0`.
pub fn damped(c: f64, w: f64, t: f64) -> Damped {
    debug_assert!(c >= 0.0 && t >= 0.0);
    if t == 0.0 {
        return Damped { sin2: 0.0, cos2: 0.0, sin_cos: 0.0 };
    }
    let sign = if w < 0.0 { -1.0 } else { 1.0 };
    let x = c * t;
    let y = w.abs() * t;
    let e0 = t * phi1(x);

    let (sin2, sc) = if x > 4.0 && y <= 0.25 * x {
        // regularized incomplete gamma P(n+1, x) carried upward
        let ratio = 2.0 * y / x;
        let mut p = vec![0.0; MAX_ORDER + 1];
        let mut q = (-x).exp();
        let mut acc = q;
        p[0] = 1.0 - acc;
        for (n, pn) in p.iter_mut().enumerate().skip(1) {
            q *= x / n as f64;
            acc += q;
            *pn = (1.0 - acc).max(0.0);
        }
        let (s, c) = taylor_sums(|n| ratio.powi(n as i32) * p[n] / (2.0 * x));
        (t * s, t * c)
    } else if y <= 1.0 {
        let m = moments_series(MAX_ORDER, x);
        let mut coef = vec![1.0; MAX_ORDER + 1];
        for n in 1..=MAX_ORDER {
            coef[n] = coef[n - 1] * 2.0 * y / n as f64;
        }
        let (s, c) = taylor_sums(|n| 0.5 * coef[n] * m[n]);
        (t * s, t * c)
    } else {
        let z = t * phi1_complex(Complex64::new(x, -2.0 * y));
        (0.5 * (e0 - z.re), 0.5 * z.im)
    };
    Damped { sin2, cos2: e0 - sin2, sin_cos: sign * sc }
}
