//! Special functions that appear in closed-form Laplace exponents.

use statrs::function::gamma::{gamma, gamma_lr};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(z) = ∫_z^∞ e^{-v}/v dv` for `z > 0`.
pub fn e1(z: f64) -> f64 {
    assert!(z > 0.0, "E1 needs a positive argument, got {z}");
    if z <= 1.0 {
        -EULER_GAMMA - z.ln() + ein_series(z)
    } else {
        // Continued fraction, modified Lentz.
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

fn ein_series(z: f64) -> f64 {
    // Σ_{k≥1} (-1)^{k+1} z^k / (k·k!)
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= z / k as f64;
        let contrib = term / k as f64;
        if k % 2 == 1 {
            sum += contrib;
        } else {
            sum -= contrib;
        }
        if contrib < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Entire exponential integral `Ein(z) = ∫_0^z (1 - e^{-v})/v dv`, `z >= 0`.
pub fn ein(z: f64) -> f64 {
    assert!(z >= 0.0, "Ein needs a nonnegative argument, got {z}");
    if z == 0.0 {
        0.0
    } else if z < 2.0 {
        ein_series(z)
    } else {
        EULER_GAMMA + z.ln() + e1(z)
    }
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt`, `a > 0`, `x >= 0`.
pub fn lower_gamma(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        gamma_lr(a, x) * gamma(a)
    }
}
