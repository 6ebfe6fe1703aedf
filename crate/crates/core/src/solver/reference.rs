use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatMode {
    /// `e^{−π²t} sin(πx)` on `(0, 1)`.
    StripSine,
    /// Free-space heat kernel `(4πt)^{−n/2} exp(−|x|²/4t)`.
    Gaussian,
}

pub fn heat_reference(x: &[f64], t: f64, mode: HeatMode) -> f64 {
    match mode {
        HeatMode::StripSine => (-PI * PI * t).exp() * (PI * x[0]).sin(),
        HeatMode::Gaussian => {
            let n = x.len() as f64;
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (4.0 * PI * t).powf(-n / 2.0) * (-r2 / (4.0 * t)).exp()
        }
    }
}

/// `Γ(ν+1)·J_ν(x)` by its power series (adequate for `0 ≤ x ≲ 20`).
pub fn bessel_j_scaled(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powf(nu);
    let mut sum = term;
    for k in 0..200 {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + 1.0 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// First positive zero of `J_ν`.
pub fn bessel_first_zero(nu: f64) -> f64 {
    // bracket by scanning, then bisect
    let mut a = 1e-3;
    let step = 0.05;
    let fa = bessel_j_scaled(nu, a);
    let mut b = a + step;
    while bessel_j_scaled(nu, b).signum() == fa.signum() {
        a = b;
        b += step;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if bessel_j_scaled(nu, m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
