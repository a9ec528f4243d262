use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Zero is represented by `sign == 0` with `log_mag == -inf`, so two zeros
/// always compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogReal {
    sign: i8,
    log_mag: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        log_mag: 0.0,
    };

    /// Builds a value from a sign in {-1, 0, 1} and a log-magnitude.
    pub fn new(sign: i8, log_mag: f64) -> Self {
        assert!((-1..=1).contains(&sign), "sign must be -1, 0 or 1");
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal { sign, log_mag }
        }
    }

    /// The positive number `exp(log_mag)`.
    pub fn from_ln(log_mag: f64) -> Self {
        LogReal::new(1, log_mag)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogReal::ZERO
        } else {
            LogReal::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_mag.exp(),
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn log_mag(self) -> f64 {
        self.log_mag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            LogReal {
                sign: 1,
                log_mag: self.log_mag,
            }
        }
    }

    /// Integer power. `0^0 == 1`.
    pub fn powi(self, exp: i64) -> Self {
        if exp == 0 {
            return LogReal::ONE;
        }
        if self.sign == 0 {
            assert!(exp > 0, "negative power of zero");
            return LogReal::ZERO;
        }
        let sign = if self.sign < 0 && exp % 2 != 0 { -1 } else { 1 };
        LogReal {
            sign,
            log_mag: self.log_mag * exp as f64,
        }
    }

    pub fn powu(self, exp: u64) -> Self {
        self.powi(i64::try_from(exp).expect("exponent overflow"))
    }

    /// `(self - other) / other` as a plain real, evaluated without
    /// materializing either operand.
    pub fn relative_gap(self, other: LogReal) -> f64 {
        match (self.sign, other.sign) {
            (_, 0) => {
                if self.sign == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            (0, _) => -1.0,
            (a, b) if a == b => (self.log_mag - other.log_mag).exp_m1(),
            _ => -1.0 - (self.log_mag - other.log_mag).exp(),
        }
    }
}

impl Default for LogReal {
    fn default() -> Self {
        LogReal::ZERO
    }
}

impl Neg for LogReal {
    type Output = LogReal;

    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            log_mag: self.log_mag,
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: self.sign * rhs.sign,
                log_mag: self.log_mag + rhs.log_mag,
            }
        }
    }
}

impl Add for LogReal {
    type Output = LogReal;

    fn add(self, other: LogReal) -> LogReal {
        super::log_sum(&[self, other])
    }
}

impl Sub for LogReal {
    type Output = LogReal;

    fn sub(self, other: LogReal) -> LogReal {
        super::log_sum(&[self, -other])
    }
}

impl Div for LogReal {
    type Output = LogReal;

    fn div(self, rhs: LogReal) -> LogReal {
        assert!(rhs.sign != 0, "division by a zero LogReal");
        if self.sign == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: self.sign * rhs.sign,
                log_mag: self.log_mag - rhs.log_mag,
            }
        }
    }
}

impl std::iter::Product for LogReal {
    fn product<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        iter.fold(LogReal::ONE, |acc, x| acc * x)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &LogReal) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_mag.partial_cmp(&other.log_mag),
                _ => other.log_mag.partial_cmp(&self.log_mag),
            },
            ord => Some(ord),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_mag),
            _ => write!(f, "-exp({})", self.log_mag),
        }
    }
}

/// Streaming signed log-sum-exp with compensated accumulation.
///
/// Positive and negative parts are kept separately, scaled by the running
/// maximum log-magnitude, and only differenced in [`LogSumAccumulator::value`].
#[derive(Clone, Debug)]
pub struct LogSumAccumulator {
    max_log: f64,
    pos: Neumaier,
    neg: Neumaier,
}

impl Default for LogSumAccumulator {
    fn default() -> Self {
        LogSumAccumulator {
            max_log: f64::NEG_INFINITY,
            pos: Neumaier::default(),
            neg: Neumaier::default(),
        }
    }
}

impl LogSumAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: LogReal) {
        if x.is_zero() {
            return;
        }
        if x.log_mag > self.max_log {
            if self.max_log.is_finite() {
                let scale = (self.max_log - x.log_mag).exp();
                self.pos.scale(scale);
                self.neg.scale(scale);
            }
            self.max_log = x.log_mag;
        }
        let term = (x.log_mag - self.max_log).exp();
        if x.sign > 0 {
            self.pos.add(term);
        } else {
            self.neg.add(term);
        }
    }

    pub fn value(&self) -> LogReal {
        if !self.max_log.is_finite() {
            return LogReal::ZERO;
        }
        let p = self.pos.total();
        let n = self.neg.total();
        let diff = p - n;
        if diff == 0.0 {
            LogReal::ZERO
        } else {
            LogReal::new(
                if diff > 0.0 { 1 } else { -1 },
                self.max_log + diff.abs().ln(),
            )
        }
    }
}

impl Extend<LogReal> for LogSumAccumulator {
    fn extend<I: IntoIterator<Item = LogReal>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn scale(&mut self, s: f64) {
        self.sum *= s;
        self.comp *= s;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
