//! Numerical checks of the consistency condition and of the V recursion.

use std::sync::Arc;

use serde::Serialize;

use crate::efpf::{AlphaTheta, FeatureCounts, GeneralWeightParams, VArray, WeightSystem};
use crate::error::{EfpfError, Result};
use crate::numerics::{log_binomial, log_sum, rising_factorial, LogReal, LogSumAccumulator};

/// Largest feature count for which the `2^k` inner sum is enumerated.
pub const MAX_ENUMERATED_K: u64 = 20;

/// Cutoff rule for the infinite `j` sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationPolicy {
    pub j_max: u64,
    pub tail_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            j_max: 300,
            tail_tol: 1e-14,
        }
    }
}

impl TruncationPolicy {
    pub fn new(j_max: u64, tail_tol: f64) -> Result<Self> {
        if j_max == 0 || !(tail_tol > 0.0) {
            return Err(EfpfError::domain(format!(
                "need j_max >= 1 and tail_tol > 0, got {j_max}, {tail_tol}"
            )));
        }
        Ok(TruncationPolicy { j_max, tail_tol })
    }
}

/// Sums `term(j)` for `j = 0, 1, ...`.
///
/// With a finite `last` index the sum is exact. Otherwise it stops once a
/// term is no larger than its predecessor and at most `tail_tol` times the
/// running sum, and fails if that never happens up to `j_max`.
pub fn truncated_sum(
    mut term: impl FnMut(u64) -> LogReal,
    last: Option<u64>,
    tp: TruncationPolicy,
) -> Result<LogReal> {
    let mut acc = LogSumAccumulator::default();
    if let Some(last) = last {
        for j in 0..=last {
            acc.push(term(j));
        }
        return Ok(acc.value());
    }
    let mut prev = LogReal::ZERO;
    let mut last_ratio = f64::NAN;
    for j in 0..=tp.j_max {
        let t = term(j);
        acc.push(t);
        let sum = acc.value();
        if j > 0 {
            last_ratio = if sum.is_zero() {
                0.0
            } else {
                (t.abs().log_mag() - sum.abs().log_mag()).exp()
            };
            let shrinking = t.abs() <= prev.abs();
            if shrinking && last_ratio <= tp.tail_tol {
                return Ok(sum);
            }
        }
        prev = t;
    }
    Err(EfpfError::TruncationNotConverged {
        terms: tp.j_max + 1,
        last_ratio,
        tail_tol: tp.tail_tol,
    })
}

fn log_binom(a: u64, b: u64) -> LogReal {
    LogReal::from_ln(log_binomial(a, b).expect("b <= a"))
}

/// `sum_j C(k+j, j) new_feature^j growth^k V[n+1, k+j]`, the right-hand side
/// of the V recursion.
fn recursion_rhs(
    v: &dyn VArray,
    new_feature: LogReal,
    growth: LogReal,
    n: u64,
    k: u64,
    tp: TruncationPolicy,
) -> Result<LogReal> {
    let last = v.k_support_bound().map(|b| b.saturating_sub(k));
    let lead = growth.powu(k);
    truncated_sum(
        |j| log_binom(k + j, j) * new_feature.powu(j) * lead * v.v(n + 1, k + j),
        last,
        tp,
    )
}

fn relative_residual(rhs: LogReal, lhs: LogReal) -> f64 {
    if rhs == lhs {
        0.0
    } else {
        rhs.relative_gap(lhs)
    }
}

fn require_positive(value: LogReal, what: &str) -> Result<()> {
    if value.is_positive() {
        Ok(())
    } else {
        Err(EfpfError::ConditioningOnNull(format!(
            "{what} is not positive"
        )))
    }
}

/// Relative residual `(RHS - pi_n) / pi_n` of the consistency condition,
/// summing over the `2^k` ways the new individual can join existing
/// features and over the number `j` of features it introduces.
pub fn consistency_residual(
    ws: &WeightSystem,
    fc: &FeatureCounts,
    tp: TruncationPolicy,
) -> Result<f64> {
    let n = fc.n();
    let k = fc.k();
    if k > MAX_ENUMERATED_K {
        return Err(EfpfError::Infeasible(format!(
            "the 2^k sum is enumerated only for k <= {MAX_ENUMERATED_K}, got k={k}"
        )));
    }
    let lhs = crate::efpf::efpf_product_form(ws, fc);
    require_positive(lhs, "pi_n at the given counts")?;

    let m = fc.counts();
    let stay: Vec<LogReal> = m.iter().map(|&c| (ws.w)(c) * (ws.u)(n + 1 - c)).collect();
    let join: Vec<LogReal> = m.iter().map(|&c| (ws.w)(c + 1) * (ws.u)(n - c)).collect();
    let mut z_terms = Vec::with_capacity(1 << k);
    for mask in 0u64..(1u64 << k) {
        let mut prod = LogReal::ONE;
        for l in 0..k as usize {
            prod = prod * if mask >> l & 1 == 1 { join[l] } else { stay[l] };
        }
        z_terms.push(prod);
    }
    let z_sum = log_sum(&z_terms);

    let new_feature = (ws.w)(1) * (ws.u)(n);
    let last = ws.k_support_bound().map(|b| b.saturating_sub(k));
    let v = &ws.v;
    let j_sum = truncated_sum(
        |j| log_binom(k + j, j) * new_feature.powu(j) * v.v(n + 1, k + j),
        last,
        tp,
    )?;
    Ok(relative_residual(j_sum * z_sum, lhs))
}

/// Residual of the V recursion of the `(alpha, theta)` system at `(n, k)`.
pub fn v_recursion_residual(
    v: &dyn VArray,
    at: AlphaTheta,
    n: u64,
    k: u64,
    tp: TruncationPolicy,
) -> Result<f64> {
    general_recursion_residual(v, GeneralWeightParams::from_alpha_theta(at), n, k, tp)
}

/// Residual of the V recursion of the general `(a, b, tau)` weight family:
/// `V[n,k] = sum_j C(k+j, j) ((b)_{n,tau})^j (a + b + tau (n-1))^k V[n+1, k+j]`.
pub fn general_recursion_residual(
    v: &dyn VArray,
    gp: GeneralWeightParams,
    n: u64,
    k: u64,
    tp: TruncationPolicy,
) -> Result<f64> {
    if n == 0 {
        return Err(EfpfError::domain("n must be >= 1"));
    }
    let lhs = v.v(n, k);
    require_positive(lhs, "V[n,k]")?;
    let new_feature = rising_factorial(gp.b, n, gp.tau);
    let growth = LogReal::from_f64(gp.a + gp.b + gp.tau * (n - 1) as f64);
    let rhs = recursion_rhs(v, new_feature, growth, n, k, tp)?;
    Ok(relative_residual(rhs, lhs))
}

/// `sum_j V[1, j]`, the total mass of the initial law.
pub fn initial_mass(v: &dyn VArray, tp: TruncationPolicy) -> Result<f64> {
    Ok(truncated_sum(|j| v.v(1, j), v.k_support_bound(), tp)?.to_f64())
}

/// A finite convex combination of V arrays.
#[derive(Clone)]
pub struct Mixture {
    components: Vec<(f64, Arc<dyn VArray>)>,
}

impl std::fmt::Debug for Mixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let weights: Vec<f64> = self.components.iter().map(|(w, _)| *w).collect();
        f.debug_struct("Mixture")
            .field("weights", &weights)
            .finish()
    }
}

impl Mixture {
    pub fn components(&self) -> &[(f64, Arc<dyn VArray>)] {
        &self.components
    }
}

impl VArray for Mixture {
    fn v(&self, n: u64, k: u64) -> LogReal {
        let terms: Vec<LogReal> = self
            .components
            .iter()
            .map(|(w, v)| LogReal::from_f64(*w) * v.v(n, k))
            .collect();
        log_sum(&terms)
    }

    fn k_support_bound(&self) -> Option<u64> {
        self.components
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .try_fold(0u64, |acc, (_, v)| v.k_support_bound().map(|b| acc.max(b)))
    }
}

/// Pointwise mixture `sum_i w_i V^(i)`; the weights must be nonnegative and
/// sum to one within `1e-12`.
pub fn mixture_v(components: Vec<(f64, Arc<dyn VArray>)>) -> Result<Mixture> {
    if components
        .iter()
        .any(|(w, _)| !(*w >= 0.0) || !w.is_finite())
    {
        return Err(EfpfError::domain(
            "mixture weights must be finite and nonnegative",
        ));
    }
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(EfpfError::WeightNormalization(total));
    }
    Ok(Mixture { components })
}
