//! Signed log-space arithmetic and the handful of special functions the
//! rest of the crate is built on.

mod logreal;
mod special;

pub use logreal::{LogReal, LogSumAccumulator, Neumaier};
pub use special::{falling_factorial, log_binomial, log_factorial, log_gamma, rising_factorial};

/// Signed log-sum-exp of a finite sequence.
///
/// Terms are scaled by the largest magnitude and the positive and negative
/// parts are summed separately with compensation before being differenced.
pub fn log_sum(values: &[LogReal]) -> LogReal {
    let max_log = values
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.log_mag())
        .fold(f64::NEG_INFINITY, f64::max);
    if max_log == f64::NEG_INFINITY {
        return LogReal::ZERO;
    }
    let mut pos = Neumaier::default();
    let mut neg = Neumaier::default();
    for v in values.iter().filter(|v| !v.is_zero()) {
        let t = (v.log_mag() - max_log).exp();
        if v.is_positive() {
            pos.add(t);
        } else {
            neg.add(t);
        }
    }
    let diff = pos.total() - neg.total();
    if diff == 0.0 {
        LogReal::ZERO
    } else {
        LogReal::new(if diff > 0.0 { 1 } else { -1 }, max_log + diff.abs().ln())
    }
}
