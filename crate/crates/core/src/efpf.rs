//! Parameter types, weight sequences and EFPF evaluators.
//!
//! Every EFPF here has the product form `V[n,k] * prod_l W[m_l] * U[n - m_l]`.
//! Values are returned as [`LogReal`] because they underflow quickly in `n`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{EfpfError, Result};
use crate::numerics::{
    log_binomial, log_factorial, log_gamma, log_sum, rising_factorial, LogReal, Neumaier,
};

/// The `(alpha, theta)` pair indexing the W and U weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaTheta {
    pub alpha: f64,
    pub theta: f64,
}

impl AlphaTheta {
    /// Requires `alpha < 1` and `theta > -alpha`.
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !theta.is_finite() {
            return Err(EfpfError::domain("alpha and theta must be finite"));
        }
        if alpha >= 1.0 {
            return Err(EfpfError::domain(format!("alpha must be < 1, got {alpha}")));
        }
        if theta <= -alpha {
            return Err(EfpfError::domain(format!(
                "theta must be > -alpha, got theta={theta}, alpha={alpha}"
            )));
        }
        Ok(AlphaTheta { alpha, theta })
    }
}

/// Three-parameter Indian buffet process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ibp3Params {
    pub gamma: f64,
    pub at: AlphaTheta,
}

impl Ibp3Params {
    /// `gamma >= 0` and `0 <= alpha < 1`; `gamma == 0` is the no-feature law.
    pub fn new(gamma: f64, alpha: f64, theta: f64) -> Result<Self> {
        let at = AlphaTheta::new(alpha, theta)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(EfpfError::domain(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        if alpha < 0.0 {
            return Err(EfpfError::domain(format!(
                "the buffet process needs 0 <= alpha < 1, got {alpha}"
            )));
        }
        Ok(Ibp3Params { gamma, at })
    }
}

/// Two-parameter Indian buffet process (`alpha = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ibp2Params {
    pub gamma: f64,
    pub theta: f64,
}

impl Ibp2Params {
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(EfpfError::domain(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(EfpfError::domain(format!("theta must be > 0, got {theta}")));
        }
        Ok(Ibp2Params { gamma, theta })
    }

    pub fn as_ibp3(&self) -> Ibp3Params {
        Ibp3Params {
            gamma: self.gamma,
            at: AlphaTheta {
                alpha: 0.0,
                theta: self.theta,
            },
        }
    }
}

/// Beta-Bernoulli model over `n_features` latent features (`alpha < 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaBernoulliParams {
    pub n_features: u64,
    pub at: AlphaTheta,
}

impl BetaBernoulliParams {
    pub fn new(n_features: u64, alpha: f64, theta: f64) -> Result<Self> {
        let at = AlphaTheta::new(alpha, theta)?;
        if alpha >= 0.0 {
            return Err(EfpfError::domain(format!(
                "the Beta-Bernoulli model needs alpha < 0, got {alpha}"
            )));
        }
        Ok(BetaBernoulliParams { n_features, at })
    }

    /// Beta shape parameters `(eta1, eta2) = (-alpha, theta + alpha)`.
    pub fn beta_shapes(&self) -> (f64, f64) {
        (-self.at.alpha, self.at.theta + self.at.alpha)
    }
}

/// Summary of a feature allocation: `n` individuals and per-feature counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeatureCounts {
    n: u64,
    m: Vec<u64>,
}

impl FeatureCounts {
    pub fn new(n: u64, m: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(EfpfError::domain("n must be >= 1"));
        }
        if let Some(bad) = m.iter().find(|&&c| c == 0 || c > n) {
            return Err(EfpfError::domain(format!(
                "feature counts must lie in 1..={n}, got {bad}"
            )));
        }
        Ok(FeatureCounts { n, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.m
    }

    pub fn k(&self) -> u64 {
        self.m.len() as u64
    }

    fn sorted_counts(&self) -> Vec<u64> {
        let mut m = self.m.clone();
        m.sort_unstable();
        m
    }
}

/// An evaluable `V[n,k]` array.
pub trait VArray: Send + Sync {
    fn v(&self, n: u64, k: u64) -> LogReal;

    /// `Some(N)` when `V[n,k] == 0` for every `k > N`.
    fn k_support_bound(&self) -> Option<u64> {
        None
    }
}

impl<T: VArray + ?Sized> VArray for Arc<T> {
    fn v(&self, n: u64, k: u64) -> LogReal {
        (**self).v(n, k)
    }

    fn k_support_bound(&self) -> Option<u64> {
        (**self).k_support_bound()
    }
}

impl<T: VArray + ?Sized> VArray for &T {
    fn v(&self, n: u64, k: u64) -> LogReal {
        (**self).v(n, k)
    }

    fn k_support_bound(&self) -> Option<u64> {
        (**self).k_support_bound()
    }
}

/// Wraps a closure as a [`VArray`].
pub struct VFn<F> {
    f: F,
    bound: Option<u64>,
}

impl<F: Fn(u64, u64) -> LogReal + Send + Sync> VFn<F> {
    pub fn new(f: F) -> Self {
        VFn { f, bound: None }
    }

    pub fn with_support_bound(f: F, bound: u64) -> Self {
        VFn {
            f,
            bound: Some(bound),
        }
    }
}

impl<F: Fn(u64, u64) -> LogReal + Send + Sync> VArray for VFn<F> {
    fn v(&self, n: u64, k: u64) -> LogReal {
        (self.f)(n, k)
    }

    fn k_support_bound(&self) -> Option<u64> {
        self.bound
    }
}

/// The allocation with no features: `V[n,0] = 1`, `V[n,k] = 0` otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoFeatures;

impl VArray for NoFeatures {
    fn v(&self, _n: u64, k: u64) -> LogReal {
        if k == 0 {
            LogReal::ONE
        } else {
            LogReal::ZERO
        }
    }

    fn k_support_bound(&self) -> Option<u64> {
        Some(0)
    }
}

impl VArray for Ibp3Params {
    fn v(&self, n: u64, k: u64) -> LogReal {
        v_ibp3(self, n, k)
    }

    fn k_support_bound(&self) -> Option<u64> {
        (self.gamma == 0.0).then_some(0)
    }
}

impl VArray for Ibp2Params {
    fn v(&self, n: u64, k: u64) -> LogReal {
        v_ibp2(self.gamma, self.theta, n, k)
    }

    fn k_support_bound(&self) -> Option<u64> {
        (self.gamma == 0.0).then_some(0)
    }
}

impl VArray for BetaBernoulliParams {
    fn v(&self, n: u64, k: u64) -> LogReal {
        v_bb(self, n, k)
    }

    fn k_support_bound(&self) -> Option<u64> {
        Some(self.n_features)
    }
}

pub type WeightFn = Arc<dyn Fn(u64) -> LogReal + Send + Sync>;

/// A `(V, W, U)` triple defining a product-form EFPF.
///
/// The canonical systems satisfy `W[1] = U[0] = 1`; rescaled systems built
/// with [`WeightSystem::new`] need not.
#[derive(Clone)]
pub struct WeightSystem {
    pub v: Arc<dyn VArray>,
    pub w: WeightFn,
    pub u: WeightFn,
}

impl fmt::Debug for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSystem")
            .field("k_support_bound", &self.k_support_bound())
            .finish_non_exhaustive()
    }
}

impl WeightSystem {
    pub fn new(v: Arc<dyn VArray>, w: WeightFn, u: WeightFn) -> Self {
        WeightSystem { v, w, u }
    }

    /// `W[m] = (1 - alpha)_{m-1}`, `U[m] = (theta + alpha)_m` with the given V.
    pub fn with_alpha_theta(at: AlphaTheta, v: Arc<dyn VArray>) -> Self {
        WeightSystem {
            v,
            w: Arc::new(move |m| w_weight(at, m)),
            u: Arc::new(move |m| u_weight(at, m)),
        }
    }

    /// `W[m] = (a)_{m-1, tau}`, `U[m] = (b)_{m, tau}` with the given V.
    pub fn with_general_weights(gp: GeneralWeightParams, v: Arc<dyn VArray>) -> Self {
        WeightSystem {
            v,
            w: Arc::new(move |m| rising_factorial(gp.a, m - 1, gp.tau)),
            u: Arc::new(move |m| rising_factorial(gp.b, m, gp.tau)),
        }
    }

    pub fn ibp3(p: Ibp3Params) -> Self {
        Self::with_alpha_theta(p.at, Arc::new(p))
    }

    pub fn beta_bernoulli(p: BetaBernoulliParams) -> Self {
        Self::with_alpha_theta(p.at, Arc::new(p))
    }

    pub fn k_support_bound(&self) -> Option<u64> {
        self.v.k_support_bound()
    }

    pub fn is_normalized(&self) -> bool {
        (self.w)(1) == LogReal::ONE && (self.u)(0) == LogReal::ONE
    }
}

/// `(a, b, tau)` of the general weight family `W[m] = (a)_{m-1,tau}`,
/// `U[m] = (b)_{m,tau}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneralWeightParams {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
}

impl GeneralWeightParams {
    pub fn new(a: f64, b: f64, tau: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && tau >= 0.0) {
            return Err(EfpfError::domain(format!(
                "need a > 0, b > 0, tau >= 0, got a={a}, b={b}, tau={tau}"
            )));
        }
        Ok(GeneralWeightParams { a, b, tau })
    }

    /// The `(alpha, theta)` system: `a = 1 - alpha`, `b = theta + alpha`, `tau = 1`.
    pub fn from_alpha_theta(at: AlphaTheta) -> Self {
        GeneralWeightParams {
            a: 1.0 - at.alpha,
            b: at.theta + at.alpha,
            tau: 1.0,
        }
    }
}

/// `W[m] = (1 - alpha)_{m-1}`.
pub fn w_weight(at: AlphaTheta, m: u64) -> LogReal {
    assert!(m >= 1, "W is indexed from 1");
    rising_factorial(1.0 - at.alpha, m - 1, 1.0)
}

/// `U[m] = (theta + alpha)_m`.
pub fn u_weight(at: AlphaTheta, m: u64) -> LogReal {
    rising_factorial(at.theta + at.alpha, m, 1.0)
}

/// `V[n,k] * prod_l W[m_l] U[n - m_l]`.
///
/// The counts are multiplied in sorted order, so any permutation of `m`
/// gives a bit-identical result.
pub fn efpf_product_form(ws: &WeightSystem, fc: &FeatureCounts) -> LogReal {
    let n = fc.n();
    let v = ws.v.v(n, fc.k());
    if v.is_zero() {
        return LogReal::ZERO;
    }
    fc.sorted_counts()
        .into_iter()
        .fold(v, |acc, m| acc * (ws.w)(m) * (ws.u)(n - m))
}

/// Ratios `(alpha + theta)_{i-1} / (1 + theta)_{i-1}` for `i = 1, 2, ...`,
/// generated by the running-product recurrence.
#[derive(Clone, Debug)]
pub struct IbpRateTerms {
    alpha: f64,
    theta: f64,
    next_i: u64,
    current: f64,
}

impl IbpRateTerms {
    pub fn new(alpha: f64, theta: f64) -> Self {
        IbpRateTerms {
            alpha,
            theta,
            next_i: 1,
            current: 1.0,
        }
    }
}

impl Iterator for IbpRateTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.current;
        let i = self.next_i as f64;
        // term_{i+1} = term_i * (alpha + theta + i - 1) / (theta + i)
        self.current *= (self.alpha + self.theta + i - 1.0) / (self.theta + i);
        self.next_i += 1;
        Some(out)
    }
}

/// `sum_{i=1}^n (alpha + theta)_{i-1} / (1 + theta)_{i-1}`, the exponent
/// sum of the buffet-process V array.
pub fn ibp_exponent_sum(alpha: f64, theta: f64, n: u64) -> f64 {
    let mut acc = Neumaier::default();
    for t in IbpRateTerms::new(alpha, theta).take(n as usize) {
        acc.add(t);
    }
    acc.total()
}

fn ibp_v(gamma: f64, theta: f64, exponent_sum: f64, n: u64, k: u64) -> LogReal {
    if gamma == 0.0 {
        return if k == 0 { LogReal::ONE } else { LogReal::ZERO };
    }
    let scale = gamma.ln() - rising_factorial(theta + 1.0, n - 1, 1.0).log_mag();
    LogReal::from_ln(k as f64 * scale - log_factorial(k) - gamma * exponent_sum)
}

/// V array of the three-parameter buffet process.
pub fn v_ibp3(p: &Ibp3Params, n: u64, k: u64) -> LogReal {
    assert!(n >= 1, "V is indexed from n = 1");
    let s = ibp_exponent_sum(p.at.alpha, p.at.theta, n);
    ibp_v(p.gamma, p.at.theta, s, n, k)
}

/// V array of the two-parameter buffet process, using the harmonic-type
/// exponent `sum_i theta / (theta + i - 1)`.
pub fn v_ibp2(gamma: f64, theta: f64, n: u64, k: u64) -> LogReal {
    assert!(n >= 1, "V is indexed from n = 1");
    let mut acc = Neumaier::default();
    for i in 1..=n {
        acc.add(theta / (theta + i as f64 - 1.0));
    }
    ibp_v(gamma, theta, acc.total(), n, k)
}

/// V array of the Beta-Bernoulli model; zero for `k > N`.
pub fn v_bb(p: &BetaBernoulliParams, n: u64, k: u64) -> LogReal {
    let big_n = p.n_features;
    if k > big_n {
        return LogReal::ZERO;
    }
    let AlphaTheta { alpha, theta } = p.at;
    let u_n = rising_factorial(theta + alpha, n, 1.0);
    let theta_n = rising_factorial(theta, n, 1.0);
    let per_feature = LogReal::from_f64(-alpha) / u_n;
    LogReal::from_ln(log_binomial(big_n, k).expect("k <= N"))
        * per_feature.powu(k)
        * (u_n / theta_n).powu(big_n)
}

/// EFPF of the three-parameter buffet process, evaluated from its closed form.
pub fn efpf_ibp3(p: &Ibp3Params, fc: &FeatureCounts) -> LogReal {
    let n = fc.n();
    let k = fc.k();
    let AlphaTheta { alpha, theta } = p.at;
    if p.gamma == 0.0 {
        return if k == 0 { LogReal::ONE } else { LogReal::ZERO };
    }
    let mut log_p = -log_factorial(k)
        + k as f64 * (p.gamma.ln() - rising_factorial(theta + 1.0, n - 1, 1.0).log_mag())
        - p.gamma * ibp_exponent_sum(alpha, theta, n);
    for m in fc.sorted_counts() {
        log_p += rising_factorial(1.0 - alpha, m - 1, 1.0).log_mag()
            + rising_factorial(theta + alpha, n - m, 1.0).log_mag();
    }
    LogReal::from_ln(log_p)
}

/// EFPF of the Beta-Bernoulli model in its rising-factorial form.
pub fn efpf_beta_bernoulli(p: &BetaBernoulliParams, fc: &FeatureCounts) -> LogReal {
    let n = fc.n();
    let k = fc.k();
    if k > p.n_features {
        return LogReal::ZERO;
    }
    let AlphaTheta { alpha, theta } = p.at;
    let u_n = rising_factorial(theta + alpha, n, 1.0).log_mag();
    let theta_n = rising_factorial(theta, n, 1.0).log_mag();
    let mut log_p = log_binomial(p.n_features, k).expect("k <= N")
        + k as f64 * ((-alpha).ln() - u_n)
        + p.n_features as f64 * (u_n - theta_n);
    for m in fc.sorted_counts() {
        log_p += rising_factorial(1.0 - alpha, m - 1, 1.0).log_mag()
            + rising_factorial(theta + alpha, n - m, 1.0).log_mag();
    }
    LogReal::from_ln(log_p)
}

/// Beta-Bernoulli EFPF obtained by integrating the Beta(eta1, eta2)
/// feature probabilities out of the Bernoulli likelihood, written with
/// gamma functions.
pub fn efpf_bb_direct(
    eta1: f64,
    eta2: f64,
    n_features: u64,
    fc: &FeatureCounts,
) -> Result<LogReal> {
    if !(eta1 > 0.0 && eta2 > 0.0) {
        return Err(EfpfError::domain(format!(
            "eta1 and eta2 must be > 0, got {eta1}, {eta2}"
        )));
    }
    let k = fc.k();
    if k > n_features {
        return Ok(LogReal::ZERO);
    }
    let n = fc.n() as f64;
    let lg = |x: f64| log_gamma(x).expect("positive argument");
    let big_n = n_features as f64;
    let mut log_p = log_binomial(n_features, k)?
        + big_n * (lg(eta1 + eta2) - lg(eta1) - lg(eta2) - lg(n + eta1 + eta2))
        + (big_n - k as f64) * (lg(eta1) + lg(n + eta2));
    for m in fc.sorted_counts() {
        let m = m as f64;
        log_p += lg(m + eta1) + lg(n - m + eta2);
    }
    Ok(LogReal::from_ln(log_p))
}

/// Sum of the EFPF over a list of count vectors; convenience for tests and
/// the CLI.
pub fn efpf_total(ws: &WeightSystem, allocations: &[FeatureCounts]) -> LogReal {
    let terms: Vec<LogReal> = allocations
        .iter()
        .map(|fc| efpf_product_form(ws, fc))
        .collect();
    log_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: LogReal, b: LogReal) -> f64 {
        a.relative_gap(b).abs()
    }

    fn at(alpha: f64, theta: f64) -> AlphaTheta {
        AlphaTheta::new(alpha, theta).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(AlphaTheta::new(1.0, 2.0).is_err());
        assert!(AlphaTheta::new(0.5, -0.5).is_err());
        assert!(AlphaTheta::new(-2.0, 2.5).is_ok());
        assert!(Ibp3Params::new(1.0, -0.5, 1.0).is_err());
        assert!(Ibp3Params::new(-1.0, 0.5, 1.0).is_err());
        assert!(BetaBernoulliParams::new(3, 0.2, 1.0).is_err());
        assert!(Ibp2Params::new(1.0, 0.0).is_err());
        assert!(FeatureCounts::new(2, vec![3]).is_err());
        assert!(FeatureCounts::new(2, vec![0]).is_err());
        assert!(FeatureCounts::new(0, vec![]).is_err());
    }

    #[test]
    fn w_and_u_examples() {
        assert_eq!(w_weight(at(0.3, 1.0), 1), LogReal::ONE);
        assert!((w_weight(at(0.5, 1.0), 3).to_f64() - 0.75).abs() < 1e-15);
        assert!((w_weight(at(-1.0, 2.0), 3).to_f64() - 6.0).abs() < 1e-14);
        assert_eq!(u_weight(at(0.3, 1.0), 0), LogReal::ONE);
        assert!((u_weight(at(0.5, 1.0), 2).to_f64() - 3.75).abs() < 1e-14);
        assert!((u_weight(at(-1.0, 3.0), 2).to_f64() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn product_form_empty_counts_is_v() {
        let p = Ibp3Params::new(1.3, 0.2, 0.7).unwrap();
        let ws = WeightSystem::ibp3(p);
        let fc = FeatureCounts::new(4, vec![]).unwrap();
        assert_eq!(efpf_product_form(&ws, &fc), v_ibp3(&p, 4, 0));
    }

    #[test]
    fn product_form_is_symmetric_bitwise() {
        let p = BetaBernoulliParams::new(2, -1.0, 2.0).unwrap();
        let ws = WeightSystem::beta_bernoulli(p);
        let a = efpf_product_form(&ws, &FeatureCounts::new(2, vec![1, 2]).unwrap());
        let b = efpf_product_form(&ws, &FeatureCounts::new(2, vec![2, 1]).unwrap());
        assert_eq!(a, b);
        let direct = efpf_beta_bernoulli(&p, &FeatureCounts::new(2, vec![1, 2]).unwrap());
        assert!(rel(a, direct) < 1e-12);
    }

    #[test]
    fn v_ibp3_degenerate_and_single_individual() {
        let p = Ibp3Params::new(0.0, 0.5, 1.0).unwrap();
        assert_eq!(v_ibp3(&p, 5, 0), LogReal::ONE);
        assert_eq!(v_ibp3(&p, 5, 2), LogReal::ZERO);
        let p = Ibp3Params::new(2.7, 0.4, 0.3).unwrap();
        assert!((v_ibp3(&p, 1, 0).to_f64() - (-2.7f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn v_ibp3_matches_high_precision_value() {
        // mpmath: V3IBP_{3,2}(gamma=1; alpha=0.5, theta=1)
        let p = Ibp3Params::new(1.0, 0.5, 1.0).unwrap();
        let want = 0.001_291_867_905_703_659_5;
        assert!((v_ibp3(&p, 3, 2).to_f64() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exponent_sum_gamma_ratio_form_agrees() {
        for &(alpha, theta) in &[(0.5, 1.0), (0.25, -0.2), (0.9, 4.0), (-1.5, 2.0)] {
            for n in [1u64, 2, 7, 40, 300] {
                let lg = |x: f64| log_gamma(x).unwrap();
                let gamma_form = (lg(theta + 1.0) + lg(alpha + theta + n as f64)
                    - lg(alpha + theta)
                    - lg(theta + n as f64))
                .exp()
                    / alpha
                    - theta / alpha;
                let s = ibp_exponent_sum(alpha, theta, n);
                assert!(
                    ((s - gamma_form) / s).abs() < 1e-11,
                    "alpha={alpha} theta={theta} n={n}: {s} vs {gamma_form}"
                );
            }
        }
    }

    #[test]
    fn v_ibp2_examples() {
        assert_eq!(v_ibp2(0.0, 1.0, 3, 0), LogReal::ONE);
        assert_eq!(v_ibp2(0.0, 1.0, 3, 1), LogReal::ZERO);
        let got = v_ibp2(2.0, 1.0, 1, 1).to_f64();
        assert!((got - 2.0 * (-2f64).exp()).abs() < 1e-15);
        let p = Ibp3Params::new(1.0, 0.0, 2.0).unwrap();
        assert!(rel(v_ibp2(1.0, 2.0, 4, 3), v_ibp3(&p, 4, 3)) < 1e-12);
    }

    #[test]
    fn v_bb_examples() {
        let p = BetaBernoulliParams::new(0, -1.0, 2.0).unwrap();
        assert_eq!(v_bb(&p, 3, 0), LogReal::ONE);
        assert_eq!(v_bb(&p, 3, 1), LogReal::ZERO);
        let p = BetaBernoulliParams::new(2, -1.0, 2.0).unwrap();
        assert_eq!(v_bb(&p, 4, 3), LogReal::ZERO);
        // mpmath: VBB_{2,1}(N=2; alpha=-1, theta=2) = 1/9
        assert!((v_bb(&p, 2, 1).to_f64() * 9.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn efpf_ibp3_examples() {
        let p = Ibp3Params::new(1.7, 0.3, 0.9).unwrap();
        let fc = FeatureCounts::new(1, vec![]).unwrap();
        assert!((efpf_ibp3(&p, &fc).to_f64() - (-1.7f64).exp()).abs() < 1e-15);

        let p = Ibp3Params::new(1.0, 0.0, 1.0).unwrap();
        let fc = FeatureCounts::new(2, vec![1]).unwrap();
        let want = 0.5 * (-1.5f64).exp();
        assert!((efpf_ibp3(&p, &fc).to_f64() / want - 1.0).abs() < 1e-14);

        let p = Ibp3Params::new(1.0, 0.5, 1.0).unwrap();
        let a = efpf_ibp3(&p, &FeatureCounts::new(2, vec![1, 2]).unwrap());
        let b = efpf_ibp3(&p, &FeatureCounts::new(2, vec![2, 1]).unwrap());
        assert_eq!(a, b);
        // mpmath: log pi_3(1, 2) for gamma=1, alpha=0.5, theta=1
        let fc = FeatureCounts::new(3, vec![1, 2]).unwrap();
        assert!((efpf_ibp3(&p, &fc).log_mag() - -5.617_592_351_485_516_8).abs() < 1e-13);
    }

    #[test]
    fn efpf_beta_bernoulli_examples() {
        let p = BetaBernoulliParams::new(1, -1.0, 2.0).unwrap();
        let fc = FeatureCounts::new(1, vec![1]).unwrap();
        assert!((efpf_beta_bernoulli(&p, &fc).to_f64() - 0.5).abs() < 1e-15);
        let fc = FeatureCounts::new(3, vec![1, 2]).unwrap();
        assert_eq!(efpf_beta_bernoulli(&p, &fc), LogReal::ZERO);
    }

    #[test]
    fn efpf_bb_direct_examples() {
        for &(e1, e2, big_n) in &[(1.0, 1.0, 3u64), (0.4, 2.5, 5), (3.0, 0.7, 1)] {
            let fc = FeatureCounts::new(1, vec![]).unwrap();
            let got = efpf_bb_direct(e1, e2, big_n, &fc).unwrap().to_f64();
            let want = (e2 / (e1 + e2)).powi(big_n as i32);
            assert!((got / want - 1.0).abs() < 1e-13);
        }
        let fc = FeatureCounts::new(1, vec![1]).unwrap();
        let got = efpf_bb_direct(1.0, 1.0, 1, &fc).unwrap().to_f64();
        assert!((got - 0.5).abs() < 1e-14);
        assert!(efpf_bb_direct(0.0, 1.0, 1, &fc).is_err());
    }

    #[test]
    fn no_features_system() {
        let ws = WeightSystem::with_alpha_theta(at(0.5, 1.0), Arc::new(NoFeatures));
        assert_eq!(
            efpf_product_form(&ws, &FeatureCounts::new(3, vec![]).unwrap()),
            LogReal::ONE
        );
        assert_eq!(
            efpf_product_form(&ws, &FeatureCounts::new(3, vec![1]).unwrap()),
            LogReal::ZERO
        );
        assert!(ws.is_normalized());
    }
}
