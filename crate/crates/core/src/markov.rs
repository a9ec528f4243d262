//! The feature-count chain `K_n`: initial law, forward transitions,
//! closed-form cotransitions and an enumeration oracle for them.

use std::sync::Arc;

use rayon::prelude::*;

use crate::consistency::{v_recursion_residual, TruncationPolicy};
use crate::efpf::{AlphaTheta, VArray};
use crate::error::{EfpfError, Result};
use crate::numerics::{
    falling_factorial, log_binomial, log_sum, rising_factorial, LogReal, LogSumAccumulator,
    Neumaier,
};

/// Largest `m` accepted by [`brute_force_cotransition`].
pub const MAX_BRUTE_FORCE_M: u64 = 8;
/// Largest per-step count explored when the law has no support bound.
pub const MAX_BRUTE_FORCE_COUNT: u64 = 12;

const SPOT_CHECK_SITES: [(u64, u64); 5] = [(1, 0), (1, 1), (2, 0), (2, 1), (3, 2)];
const SPOT_CHECK_TOL: f64 = 1e-8;

/// A V array paired with its `(alpha, theta)` weights, checked against the
/// recursion at a few sites before use.
#[derive(Clone)]
pub struct ChainLaw {
    v: Arc<dyn VArray>,
    at: AlphaTheta,
}

impl std::fmt::Debug for ChainLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainLaw")
            .field("at", &self.at)
            .field("k_support_bound", &self.k_support_bound())
            .finish()
    }
}

impl ChainLaw {
    pub fn new(v: Arc<dyn VArray>, at: AlphaTheta) -> Result<Self> {
        let tp = TruncationPolicy::default();
        for (n, k) in SPOT_CHECK_SITES {
            if !v.v(n, k).is_positive() {
                continue;
            }
            let r = v_recursion_residual(v.as_ref(), at, n, k, tp)?;
            if r.abs() > SPOT_CHECK_TOL {
                return Err(EfpfError::domain(format!(
                    "V fails the recursion at (n={n}, k={k}): residual {r:e}"
                )));
            }
        }
        Ok(ChainLaw { v, at })
    }

    pub fn at(&self) -> AlphaTheta {
        self.at
    }

    pub fn v(&self) -> &dyn VArray {
        self.v.as_ref()
    }

    pub fn k_support_bound(&self) -> Option<u64> {
        self.v.k_support_bound()
    }
}

/// `P(K_1 = j) = V[1, j]`.
pub fn initial_prob(cl: &ChainLaw, j: u64) -> LogReal {
    cl.v.v(1, j)
}

/// `P(K_{n+1} = k + j | K_n = k)`.
pub fn transition_prob(cl: &ChainLaw, n: u64, k: u64, j: u64) -> Result<LogReal> {
    let from = cl.v.v(n, k);
    if !from.is_positive() {
        return Err(EfpfError::ConditioningOnNull(format!(
            "P(K_{n} = {k}) is zero"
        )));
    }
    let AlphaTheta { alpha, theta } = cl.at;
    let lb = LogReal::from_ln(log_binomial(k + j, j)?);
    let new = rising_factorial(alpha + theta, n, 1.0).powu(j);
    let old = LogReal::from_f64(theta + n as f64).powu(k);
    Ok(lb * new * old * cl.v.v(n + 1, k + j) / from)
}

/// `P(K_n = k) = V[n, k] d^{n,k}`.
pub fn marginal_kn(cl: &ChainLaw, n: u64, k: u64) -> LogReal {
    let v = cl.v.v(n, k);
    if v.is_zero() {
        return LogReal::ZERO;
    }
    v * d_big(cl.at, n, k)
}

/// Running sums of `ln(start + i * step)` for `i < count`, prefixed by 0.
fn cumulative_ln(start: f64, step: f64, count: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count as usize + 1);
    let mut acc = Neumaier::default();
    out.push(0.0);
    for i in 0..count {
        acc.add((start + i as f64 * step).ln());
        out.push(acc.total());
    }
    out
}

/// Base of `d^{m,l}`: `(theta+1)_{m-1} + sum_{j=1}^{m-1} (theta+alpha)_{m-j} (theta+1+m-j)_{j-1}`.
pub fn d_big_base(at: AlphaTheta, m: u64) -> LogReal {
    assert!(m >= 1, "d^{{m,l}} is indexed from m = 1");
    let AlphaTheta { alpha, theta } = at;
    // ln (theta+alpha)_r and ln (theta+1)_r for r < m
    let ln_new = cumulative_ln(theta + alpha, 1.0, m - 1);
    let ln_old = cumulative_ln(theta + 1.0, 1.0, m - 1);
    let mut terms = Vec::with_capacity(m as usize);
    terms.push(LogReal::from_ln(ln_old[(m - 1) as usize]));
    for j in 1..m {
        // (theta+1+m-j)_{j-1} = (theta+1)_{m-1} / (theta+1)_{m-j}
        let tail = ln_old[(m - 1) as usize] - ln_old[(m - j) as usize];
        terms.push(LogReal::from_ln(ln_new[(m - j) as usize] + tail));
    }
    log_sum(&terms)
}

/// `d^{m,l}`, the normalizer of the cotransition probabilities.
pub fn d_big(at: AlphaTheta, m: u64, l: u64) -> LogReal {
    if l == 0 {
        return LogReal::ONE;
    }
    d_big_base(at, m).powu(l)
}

/// `d^{m,l}` built from `d^{1,.} = 1` by the recursion
/// `d^{m,l} = sum_j C(l, l-j) ((alpha+theta)_{m-1})^{l-j} (theta+m-1)^j d^{m-1,j}`.
pub fn d_big_by_recursion(at: AlphaTheta, m: u64, l: u64) -> LogReal {
    assert!(m >= 1);
    let AlphaTheta { alpha, theta } = at;
    let mut row = vec![LogReal::ONE; l as usize + 1];
    for mm in 2..=m {
        let new = rising_factorial(alpha + theta, mm - 1, 1.0);
        let old = LogReal::from_f64(theta + (mm - 1) as f64);
        row = (0..=l)
            .map(|ll| {
                let terms: Vec<LogReal> = (0..=ll)
                    .map(|j| {
                        LogReal::from_ln(log_binomial(ll, ll - j).expect("j <= l"))
                            * new.powu(ll - j)
                            * old.powu(j)
                            * row[j as usize]
                    })
                    .collect();
                log_sum(&terms)
            })
            .collect();
    }
    row[l as usize]
}

fn check_indices(n: u64, k: u64, m: u64, l: u64) -> Result<()> {
    if n == 0 || n >= m {
        return Err(EfpfError::domain(format!(
            "need 1 <= n < m, got n={n}, m={m}"
        )));
    }
    if k > l {
        return Err(EfpfError::domain(format!("need k <= l, got k={k}, l={l}")));
    }
    Ok(())
}

/// `sum_{j=1}^{m-n} (alpha+theta)_{m-j} (theta+m-1)_{j-1, falling}`.
pub fn d_small_inner_sum(at: AlphaTheta, n: u64, m: u64) -> LogReal {
    let AlphaTheta { alpha, theta } = at;
    let ln_new = cumulative_ln(alpha + theta, 1.0, m - 1);
    let ln_fall = cumulative_ln(theta + (m - 1) as f64, -1.0, m - n - 1);
    let terms: Vec<LogReal> = (1..=m - n)
        .map(|j| LogReal::from_ln(ln_new[(m - j) as usize] + ln_fall[(j - 1) as usize]))
        .collect();
    log_sum(&terms)
}

/// `d_{n,k}^{m,l} = C(l,k) ((theta+n)_{m-n})^k (inner sum)^{l-k}`.
pub fn d_small(at: AlphaTheta, n: u64, k: u64, m: u64, l: u64) -> Result<LogReal> {
    check_indices(n, k, m, l)?;
    let lb = LogReal::from_ln(log_binomial(l, k)?);
    let kept = rising_factorial(at.theta + n as f64, m - n, 1.0).powu(k);
    if l == k {
        return Ok(lb * kept);
    }
    Ok(lb * kept * d_small_inner_sum(at, n, m).powu(l - k))
}

/// `d_{n,k}^{m,l}` with the kept factor written as `(theta+m-1)_{m-n, falling}`
/// and every product formed factor by factor.
pub fn d_small_falling_form(at: AlphaTheta, n: u64, k: u64, m: u64, l: u64) -> Result<LogReal> {
    check_indices(n, k, m, l)?;
    let AlphaTheta { alpha, theta } = at;
    let lb = LogReal::from_ln(log_binomial(l, k)?);
    let kept = falling_factorial(theta + (m - 1) as f64, m - n).powu(k);
    let terms: Vec<LogReal> = (1..=m - n)
        .map(|j| {
            rising_factorial(alpha + theta, m - j, 1.0)
                * falling_factorial(theta + (m - 1) as f64, j - 1)
        })
        .collect();
    let inner = log_sum(&terms);
    Ok(lb
        * kept
        * if l == k {
            LogReal::ONE
        } else {
            inner.powu(l - k)
        })
}

/// `P(K_n = k | K_m = l) = d_{n,k}^{m,l} d^{n,k} / d^{m,l}`; depends only on
/// `(alpha, theta)`.
pub fn cotransition_prob(at: AlphaTheta, n: u64, k: u64, m: u64, l: u64) -> Result<LogReal> {
    let small = d_small(at, n, k, m, l)?;
    if small.is_zero() {
        return Ok(LogReal::ZERO);
    }
    Ok(small * d_big(at, n, k) / d_big(at, m, l))
}

/// `P(K_n = k | K_m = l)` from exhaustive enumeration of the monotone paths
/// `K_1 <= ... <= K_m = l`, weighted by the initial law and the forward
/// transitions.
pub fn brute_force_cotransition(cl: &ChainLaw, n: u64, k: u64, m: u64, l: u64) -> Result<LogReal> {
    check_indices(n, k, m, l)?;
    if m > MAX_BRUTE_FORCE_M {
        return Err(EfpfError::Infeasible(format!(
            "path enumeration is limited to m <= {MAX_BRUTE_FORCE_M}, got m={m}"
        )));
    }
    let cap = match cl.k_support_bound() {
        Some(b) => b.min(l),
        None if l <= MAX_BRUTE_FORCE_COUNT => l,
        None => {
            return Err(EfpfError::Infeasible(format!(
                "without a support bound the final count is limited to {MAX_BRUTE_FORCE_COUNT}, got l={l}"
            )))
        }
    };
    if l > cap {
        return Err(EfpfError::ConditioningOnNull(format!(
            "P(K_{m} = {l}) is zero"
        )));
    }

    let (joint, total) = (0..=cap)
        .into_par_iter()
        .map(|k1| -> Result<(LogReal, LogReal)> {
            let mut walker = PathWalker {
                cl,
                n,
                k,
                m,
                l,
                path: vec![k1],
                joint: LogSumAccumulator::default(),
                total: LogSumAccumulator::default(),
            };
            walker.walk(initial_prob(cl, k1))?;
            Ok((walker.joint.value(), walker.total.value()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((LogReal::ZERO, LogReal::ZERO), |(a, b), (x, y)| {
            (a + x, b + y)
        });

    if !total.is_positive() {
        return Err(EfpfError::ConditioningOnNull(format!(
            "P(K_{m} = {l}) is zero"
        )));
    }
    Ok(joint / total)
}

struct PathWalker<'a> {
    cl: &'a ChainLaw,
    n: u64,
    k: u64,
    m: u64,
    l: u64,
    path: Vec<u64>,
    joint: LogSumAccumulator,
    total: LogSumAccumulator,
}

impl PathWalker<'_> {
    fn walk(&mut self, weight: LogReal) -> Result<()> {
        if weight.is_zero() {
            return Ok(());
        }
        let depth = self.path.len() as u64;
        let last = *self.path.last().expect("path starts non-empty");
        if depth == self.m {
            if last == self.l {
                self.total.push(weight);
                if self.path[(self.n - 1) as usize] == self.k {
                    self.joint.push(weight);
                }
            }
            return Ok(());
        }
        for next in last..=self.l {
            let step = transition_prob(self.cl, depth, last, next - last)?;
            self.path.push(next);
            self.walk(weight * step)?;
            self.path.pop();
        }
        Ok(())
    }
}

/// Relative gap `(lhs - rhs) / rhs` of the summation identity
/// `sum_{i=1}^{m-n} (alpha+theta)_{m-i} (theta+m-1)_{i-1, falling}
///  = (alpha+theta)_n ((alpha+theta+n)_{m-n} - (theta+n)_{m-n}) / alpha`.
pub fn hypergeometric_identity_gap(at: AlphaTheta, n: u64, m: u64) -> Result<f64> {
    if n >= m {
        return Err(EfpfError::domain(format!("need n < m, got n={n}, m={m}")));
    }
    let AlphaTheta { alpha, theta } = at;
    if alpha == 0.0 {
        return Err(EfpfError::domain(
            "alpha = 0 has its own identity; use harmonic_identity_gap",
        ));
    }
    let lhs = identity_lhs(at, n, m);
    let diff = rising_factorial(alpha + theta + n as f64, m - n, 1.0)
        - rising_factorial(theta + n as f64, m - n, 1.0);
    let rhs = rising_factorial(alpha + theta, n, 1.0) * diff / LogReal::from_f64(alpha);
    Ok(lhs.relative_gap(rhs))
}

/// Relative gap of the `alpha = 0` identity
/// `sum_{i=1}^{m-n} (theta)_{m-i} (theta+m-1)_{i-1, falling}
///  = (theta)_m sum_{i=1}^{m-n} 1 / (theta+m-i)`.
pub fn harmonic_identity_gap(theta: f64, n: u64, m: u64) -> Result<f64> {
    if n >= m {
        return Err(EfpfError::domain(format!("need n < m, got n={n}, m={m}")));
    }
    let at = AlphaTheta::new(0.0, theta)?;
    let lhs = identity_lhs(at, n, m);
    let mut h = Neumaier::default();
    for i in 1..=m - n {
        h.add(1.0 / (theta + (m - i) as f64));
    }
    let rhs = rising_factorial(theta, m, 1.0) * LogReal::from_f64(h.total());
    Ok(lhs.relative_gap(rhs))
}

fn identity_lhs(at: AlphaTheta, n: u64, m: u64) -> LogReal {
    let AlphaTheta { alpha, theta } = at;
    let terms: Vec<LogReal> = (1..=m - n)
        .map(|i| {
            rising_factorial(alpha + theta, m - i, 1.0)
                * falling_factorial(theta + (m - 1) as f64, i - 1)
        })
        .collect();
    log_sum(&terms)
}
