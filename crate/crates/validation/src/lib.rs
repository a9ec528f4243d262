//! Helpers shared by the acceptance checks.

use std::io::Write;
use std::time::Duration;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Writes a line `C<id> <name> PASS|FAIL <detail> (<seconds> s)` straight to the
/// process stderr so the line shows even when test output is captured.
pub fn report(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "\nC{id} {name} {verdict} {detail} ({:.1} s)\n",
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

/// Upper-tail p-value of Pearson's statistic. Bins are merged from the
/// right until each expected count is at least 5; `probs` must sum to 1.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        pending.0 += o as f64;
        pending.1 += p * total as f64;
        if pending.1 >= 5.0 {
            bins.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.1 > 0.0 || pending.0 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => bins.push(pending),
        }
    }
    if bins.len() < 2 {
        return 1.0;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((bins.len() - 1) as f64)
        .expect("positive degrees of freedom")
        .cdf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_has_p_one() {
        assert!((chi_square_p(&[25, 50, 25], &[0.25, 0.5, 0.25]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gross_misfit_is_rejected() {
        assert!(chi_square_p(&[90, 5, 5], &[0.25, 0.5, 0.25]) < 1e-6);
    }

    #[test]
    fn sparse_tail_is_merged() {
        let p = chi_square_p(&[500, 480, 20, 0], &[0.5, 0.48, 0.019, 0.001]);
        assert!(p > 0.5);
    }
}
