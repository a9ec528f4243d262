use std::f64::consts::{LN_2, PI};

use super::LogReal;
use crate::error::{EfpfError, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
/// ln(sqrt(2*pi))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of the gamma function for `x > 0`.
///
/// Lanczos approximation (g = 7, nine coefficients); arguments below 1/2 go
/// through the reflection formula.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(EfpfError::domain(format!(
            "log_gamma requires x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) Gamma(1 - x) = pi / sin(pi x), and sin(pi x) > 0 on (0, 1/2).
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

const RESCALE: f64 = 4.149_515_568_880_993e180; // 2^600
const RESCALE_EXP: i64 = 600;

/// Running product kept as mantissa * 2^exponent so that long products of
/// large or small factors neither overflow nor lose their exact sign.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ScaledProduct {
    mant: f64,
    exp2: i64,
}

impl ScaledProduct {
    pub(crate) fn new() -> Self {
        ScaledProduct { mant: 1.0, exp2: 0 }
    }

    pub(crate) fn mul(&mut self, factor: f64) {
        self.mant *= factor;
        let a = self.mant.abs();
        if a > RESCALE {
            self.mant /= RESCALE;
            self.exp2 += RESCALE_EXP;
        } else if a < 1.0 / RESCALE && a != 0.0 {
            self.mant *= RESCALE;
            self.exp2 -= RESCALE_EXP;
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    pub(crate) fn value(&self) -> LogReal {
        if self.mant == 0.0 {
            return LogReal::ZERO;
        }
        let sign = if self.mant > 0.0 { 1 } else { -1 };
        LogReal::new(sign, self.mant.abs().ln() + self.exp2 as f64 * LN_2)
    }
}

fn step_product(x: f64, m: u64, step: f64) -> LogReal {
    let mut prod = ScaledProduct::new();
    for i in 0..m {
        prod.mul(x + i as f64 * step);
        if prod.is_zero() {
            return LogReal::ZERO;
        }
    }
    prod.value()
}

/// Generalized rising factorial `x (x + tau) ... (x + (m - 1) tau)`.
///
/// The product is accumulated factor by factor, so the sign is exact even
/// when some factors are negative.
pub fn rising_factorial(x: f64, m: u64, tau: f64) -> LogReal {
    assert!(tau >= 0.0, "rising_factorial requires tau >= 0, got {tau}");
    step_product(x, m, tau)
}

/// Falling factorial `x (x - 1) ... (x - m + 1)`.
pub fn falling_factorial(x: f64, m: u64) -> LogReal {
    step_product(x, m, -1.0)
}

/// `ln C(a, b)` for `0 <= b <= a`.
pub fn log_binomial(a: u64, b: u64) -> Result<f64> {
    if b > a {
        return Err(EfpfError::domain(format!(
            "log_binomial requires b <= a, got a={a}, b={b}"
        )));
    }
    let b = b.min(a - b);
    let mut prod = ScaledProduct::new();
    let base = (a - b) as f64;
    for i in 1..=b {
        prod.mul((base + i as f64) / i as f64);
    }
    Ok(prod.value().log_mag())
}

/// `ln k!`.
pub fn log_factorial(k: u64) -> f64 {
    rising_factorial(1.0, k, 1.0).log_mag().max(0.0)
}
