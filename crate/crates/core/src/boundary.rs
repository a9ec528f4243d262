//! Limits of cotransition ratios along paths `omega_m`, the extreme V
//! arrays they induce, and two asymptotic lemmas used along the way.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::efpf::{
    v_bb, v_ibp2, v_ibp3, AlphaTheta, BetaBernoulliParams, Ibp3Params, IbpRateTerms,
};
use crate::error::{EfpfError, Result};
use crate::numerics::{log_binomial, log_gamma, rising_factorial, LogReal, Neumaier};

pub type PathFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// How `omega_m` grows with `m`.
#[derive(Clone)]
pub enum PathSpec {
    /// `omega_m = round(c m^alpha)`, for `0 < alpha < 1`.
    Power { c: f64 },
    /// `omega_m = round(gamma ln m)`, for `alpha = 0`.
    Logarithmic { gamma: f64 },
    /// `omega_m = N`, for `alpha < 0`.
    Constant { n: u64 },
    /// A path outgrowing the regular rate; target of divergence scans.
    Superlinear(PathFn),
    /// Any other path, scanned without a target.
    Custom(PathFn),
}

impl fmt::Debug for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathSpec::Power { c } => write!(f, "Power {{ c: {c} }}"),
            PathSpec::Logarithmic { gamma } => write!(f, "Logarithmic {{ gamma: {gamma} }}"),
            PathSpec::Constant { n } => write!(f, "Constant {{ n: {n} }}"),
            PathSpec::Superlinear(_) => f.write_str("Superlinear(..)"),
            PathSpec::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor().max(0.0) as u64
}

impl PathSpec {
    pub fn superlinear(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        PathSpec::Superlinear(Arc::new(f))
    }

    pub fn custom(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        PathSpec::Custom(Arc::new(f))
    }

    /// `omega_m` for the given `alpha`.
    pub fn omega(&self, m: u64, alpha: f64) -> u64 {
        match self {
            PathSpec::Power { c } => round_half_up(c * (m as f64).powf(alpha)),
            PathSpec::Logarithmic { gamma } => round_half_up(gamma * (m as f64).ln()),
            PathSpec::Constant { n } => *n,
            PathSpec::Superlinear(f) | PathSpec::Custom(f) => f(m),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            PathSpec::Power { c } => *c >= 0.0 && c.is_finite(),
            PathSpec::Logarithmic { gamma } => *gamma >= 0.0 && gamma.is_finite(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(EfpfError::domain(format!(
                "path parameters must be finite and >= 0: {self:?}"
            )))
        }
    }
}

/// Ratios along an m-grid together with their claimed limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub m_grid: Vec<u64>,
    pub omega: Vec<u64>,
    pub ratio_values: Vec<f64>,
    pub target: f64,
    pub gaps: Vec<f64>,
    pub final_gap: f64,
}

impl ConvergenceReport {
    fn new(m_grid: Vec<u64>, omega: Vec<u64>, ratio_values: Vec<f64>, target: f64) -> Self {
        let gaps: Vec<f64> = ratio_values.iter().map(|&r| gap(r, target)).collect();
        let final_gap = gaps.last().copied().unwrap_or(f64::NAN);
        ConvergenceReport {
            m_grid,
            omega,
            ratio_values,
            target,
            gaps,
            final_gap,
        }
    }

    /// Whether the gaps strictly decrease over the last `count` grid points.
    pub fn tail_gaps_decreasing(&self, count: usize) -> bool {
        strictly_decreasing_tail(&self.gaps, count)
    }

    /// Whether the ratios strictly decrease over the last `count` grid points.
    pub fn tail_ratios_decreasing(&self, count: usize) -> bool {
        strictly_decreasing_tail(&self.ratio_values, count)
    }
}

fn strictly_decreasing_tail(xs: &[f64], count: usize) -> bool {
    if count < 2 || xs.len() < count {
        return false;
    }
    xs[xs.len() - count..].windows(2).all(|w| w[1] < w[0])
}

/// Relative gap to a nonzero target; absolute value when the target is 0.
fn gap(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs().max(1e-300)
    }
}

/// `sum_{i=lo+1}^{hi} (alpha+theta)_{i-1} / (theta+1)_{i-1}` for each
/// `(lo, hi)`, all from one pass of the running product.
fn exponent_sums(at: AlphaTheta, n: u64, m: u64) -> (f64, f64) {
    let mut head = Neumaier::default();
    let mut tail = Neumaier::default();
    for (i, t) in IbpRateTerms::new(at.alpha, at.theta)
        .take(m as usize)
        .enumerate()
    {
        if (i as u64) < n {
            head.add(t);
        } else {
            tail.add(t);
        }
    }
    (head.total(), tail.total())
}

/// `d_{n,k}^{m,omega} / d^{m,omega}` for `n < m`, `k <= omega`.
///
/// Both d's share the factor `(theta+1)_{m-1}`; after cancelling it the
/// ratio is `C(omega,k) (theta+1)_{n-1}^{-k} T^{omega-k} / S^omega` with
/// `S` the exponent sum up to `m` and `T` its part beyond `n`, so the value
/// stays finite for very large `m`.
pub fn ratio_at(at: AlphaTheta, n: u64, k: u64, m: u64, omega: u64) -> Result<LogReal> {
    if n == 0 || n >= m {
        return Err(EfpfError::domain(format!(
            "need 1 <= n < m, got n={n}, m={m}"
        )));
    }
    if k > omega {
        return Err(EfpfError::domain(format!(
            "need k <= omega, got k={k}, omega={omega}"
        )));
    }
    if omega == 0 {
        return Ok(LogReal::ONE);
    }
    let (head, tail) = exponent_sums(at, n, m);
    let total = LogReal::from_f64(head + tail);
    let lb = LogReal::from_ln(log_binomial(omega, k)?);
    let kept = rising_factorial(at.theta + 1.0, n - 1, 1.0).powu(k);
    Ok(lb * LogReal::from_f64(tail).powu(omega - k) / kept / total.powu(omega))
}

/// `gamma = c alpha Gamma(alpha+theta) / Gamma(theta+1)`, the buffet mass
/// induced by the power path with constant `c`.
pub fn gamma_from_c(at: AlphaTheta, c: f64) -> Result<f64> {
    let AlphaTheta { alpha, theta } = at;
    Ok(c * alpha * (log_gamma(alpha + theta)? - log_gamma(theta + 1.0)?).exp())
}

fn limit_target(at: AlphaTheta, n: u64, k: u64, path: &PathSpec) -> Result<f64> {
    let AlphaTheta { alpha, theta } = at;
    let mismatch = |what: &str| {
        Err(EfpfError::RegimeMismatch(format!(
            "{what} paths do not match alpha = {alpha}"
        )))
    };
    match path {
        PathSpec::Power { c } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return mismatch("power");
            }
            let p = Ibp3Params::new(gamma_from_c(at, *c)?, alpha, theta)?;
            Ok(v_ibp3(&p, n, k).to_f64())
        }
        PathSpec::Logarithmic { gamma } => {
            if alpha != 0.0 {
                return mismatch("logarithmic");
            }
            // the exponent sum grows like theta ln m, so slope gamma in ln m
            // induces buffet mass gamma / theta
            Ok(v_ibp2(*gamma / theta, theta, n, k).to_f64())
        }
        PathSpec::Constant { n: big_n } => {
            if alpha >= 0.0 {
                return mismatch("constant");
            }
            let p = BetaBernoulliParams::new(*big_n, alpha, theta)?;
            Ok(v_bb(&p, n, k).to_f64())
        }
        PathSpec::Superlinear(_) => Err(EfpfError::RegimeMismatch(
            "superlinear paths have no regular limit; use divergence_scan".into(),
        )),
        PathSpec::Custom(_) => Err(EfpfError::RegimeMismatch(
            "custom paths have no known limit; use ratio_scan".into(),
        )),
    }
}

fn check_grid(n: u64, m_grid: &[u64]) -> Result<()> {
    if m_grid.is_empty() {
        return Err(EfpfError::domain("m grid is empty"));
    }
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EfpfError::domain("m grid must be strictly increasing"));
    }
    if m_grid[0] <= n {
        return Err(EfpfError::domain(format!(
            "every grid point must exceed n = {n}"
        )));
    }
    Ok(())
}

/// `(omega_m, ratio)` at each grid point; the ratio is 0 where `omega_m < k`.
pub fn ratio_scan(
    at: AlphaTheta,
    n: u64,
    k: u64,
    path: &PathSpec,
    m_grid: &[u64],
) -> Result<(Vec<u64>, Vec<f64>)> {
    path.validate()?;
    check_grid(n, m_grid)?;
    let rows = m_grid
        .par_iter()
        .map(|&m| {
            let omega = path.omega(m, at.alpha);
            let r = if k > omega {
                0.0
            } else {
                ratio_at(at, n, k, m, omega)?.to_f64()
            };
            Ok((omega, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().unzip())
}

/// Scans a regular path and compares with the V array it should induce.
pub fn limit_scan(
    at: AlphaTheta,
    n: u64,
    k: u64,
    path: &PathSpec,
    m_grid: &[u64],
) -> Result<ConvergenceReport> {
    let target = limit_target(at, n, k, path)?;
    let (omega, ratios) = ratio_scan(at, n, k, path, m_grid)?;
    Ok(ConvergenceReport::new(
        m_grid.to_vec(),
        omega,
        ratios,
        target,
    ))
}

/// Scans a path growing faster than any regular one; the ratios should
/// tend to 0.
pub fn divergence_scan(
    at: AlphaTheta,
    n: u64,
    k: u64,
    path: &PathSpec,
    m_grid: &[u64],
) -> Result<ConvergenceReport> {
    if !matches!(path, PathSpec::Superlinear(_)) {
        return Err(EfpfError::RegimeMismatch(format!(
            "divergence scans take a superlinear path, got {path:?}"
        )));
    }
    let (omega, ratios) = ratio_scan(at, n, k, path, m_grid)?;
    Ok(ConvergenceReport::new(m_grid.to_vec(), omega, ratios, 0.0))
}

/// `|((g-p)/(g-q))^{c g} - e^{c (q-p)}|` at `g = g(m)`.
pub fn lemma_a4_gap(p: f64, q: f64, c: f64, g: &dyn Fn(u64) -> f64, m: u64) -> Result<f64> {
    let gm = g(m);
    if !(gm > p.max(q)) {
        return Err(EfpfError::domain(format!(
            "need g(m) > max(p, q), got g(m)={gm}"
        )));
    }
    let limit = c * (q - p);
    let exponent = c * gm * ((q - p) / (gm - q)).ln_1p();
    Ok(limit.exp() * (exponent - limit).exp_m1().abs())
}

/// Natural log of `(g/f)^k ((h-p)/(h-q))^g` at `m`.
pub fn lemma_a5_ln_value(
    p: f64,
    q: f64,
    k: u64,
    f: &dyn Fn(u64) -> f64,
    g: &dyn Fn(u64) -> f64,
    h: &dyn Fn(u64) -> f64,
    m: u64,
) -> Result<f64> {
    if !(p > q) {
        return Err(EfpfError::domain(format!("need p > q, got p={p}, q={q}")));
    }
    let (fm, gm, hm) = (f(m), g(m), h(m));
    if !(hm > p) {
        return Err(EfpfError::domain(format!("need h(m) > p, got h(m)={hm}")));
    }
    if !(fm > 0.0 && gm > 0.0) {
        return Err(EfpfError::domain("f(m) and g(m) must be positive"));
    }
    Ok(k as f64 * (gm / fm).ln() + gm * ((q - p) / (hm - q)).ln_1p())
}

/// `(g/f)^k ((h-p)/(h-q))^g` at `m`; underflows to 0 for large `m`.
pub fn lemma_a5_value(
    p: f64,
    q: f64,
    k: u64,
    f: &dyn Fn(u64) -> f64,
    g: &dyn Fn(u64) -> f64,
    h: &dyn Fn(u64) -> f64,
    m: u64,
) -> Result<f64> {
    Ok(lemma_a5_ln_value(p, q, k, f, g, h, m)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{d_big, d_small};

    fn at(alpha: f64, theta: f64) -> AlphaTheta {
        AlphaTheta::new(alpha, theta).unwrap()
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.49), 2);
        assert_eq!(PathSpec::Power { c: 1.0 }.omega(10_000, 0.5), 100);
        assert_eq!(PathSpec::Logarithmic { gamma: 2.0 }.omega(100, 0.0), 9);
    }

    #[test]
    fn ratio_matches_d_route() {
        for a in [at(0.5, 1.0), at(-1.0, 2.0), at(0.0, 1.0), at(0.3, -0.2)] {
            for (n, k, m, w) in [(1, 0, 2, 1), (2, 1, 5, 3), (3, 2, 12, 4), (2, 0, 30, 6)] {
                let r = ratio_at(a, n, k, m, w).unwrap();
                let d = d_small(a, n, k, m, w).unwrap() / d_big(a, m, w);
                assert!(r.relative_gap(d).abs() < 1e-12, "{a:?} {n} {k} {m} {w}");
            }
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(ratio_at(at(0.5, 1.0), 2, 0, 10, 0).unwrap(), LogReal::ONE);
        // mpmath, gamma-ratio form of the exponent sums
        let r = ratio_at(at(0.5, 1.0), 2, 1, 10_000, 100).unwrap().to_f64();
        assert!((r / 0.102_715_993_330_846_88 - 1.0).abs() < 1e-6);
        let p = BetaBernoulliParams::new(3, -1.0, 2.0).unwrap();
        let r = ratio_at(p.at, 2, 1, 1000, 3).unwrap().to_f64();
        assert!((r - v_bb(&p, 2, 1).to_f64()).abs() < 1e-3);
        assert!(ratio_at(at(0.5, 1.0), 2, 1, 10_000_000, 3162)
            .unwrap()
            .to_f64()
            .is_finite());
        assert_eq!(
            ratio_at(at(0.5, 1.0), 2, 3, 10, 2).unwrap_err().kind(),
            "domain"
        );
    }

    #[test]
    fn degenerate_path() {
        let report = limit_scan(
            at(-1.0, 2.0),
            2,
            0,
            &PathSpec::Constant { n: 0 },
            &[10, 100],
        )
        .unwrap();
        assert_eq!(report.ratio_values, vec![1.0, 1.0]);
        assert_eq!(report.target, 1.0);
    }

    #[test]
    fn regime_mismatch() {
        let err = limit_scan(at(0.5, 1.0), 2, 1, &PathSpec::Constant { n: 2 }, &[10]).unwrap_err();
        assert_eq!(err.kind(), "regime-mismatch");
        let err = limit_scan(at(0.0, 1.0), 2, 1, &PathSpec::Power { c: 1.0 }, &[10]).unwrap_err();
        assert_eq!(err.kind(), "regime-mismatch");
        let err = divergence_scan(
            at(0.0, 1.0),
            2,
            1,
            &PathSpec::Logarithmic { gamma: 1.0 },
            &[10],
        )
        .unwrap_err();
        assert_eq!(err.kind(), "regime-mismatch");
    }

    #[test]
    fn alternating_constants_have_two_limits() {
        let a = at(-1.0, 2.0);
        let path = PathSpec::custom(|m| if m % 2 == 0 { 2 } else { 5 });
        let grid: Vec<u64> = (3..=6)
            .flat_map(|e| [10u64.pow(e), 10u64.pow(e) + 1])
            .collect();
        let (_, ratios) = ratio_scan(a, 2, 1, &path, &grid).unwrap();
        let v2 = v_bb(&BetaBernoulliParams::new(2, -1.0, 2.0).unwrap(), 2, 1).to_f64();
        let v5 = v_bb(&BetaBernoulliParams::new(5, -1.0, 2.0).unwrap(), 2, 1).to_f64();
        let (even, odd) = (ratios[ratios.len() - 2], ratios[ratios.len() - 1]);
        assert!((even - v2).abs() < 1e-3 && (odd - v5).abs() < 1e-3);
        assert!((v2 - v5).abs() > 1e-2);
    }

    #[test]
    fn lemma_examples() {
        let id = |m: u64| m as f64;
        assert_eq!(lemma_a4_gap(2.0, 2.0, 1.5, &id, 100).unwrap(), 0.0);
        assert_eq!(lemma_a4_gap(1.0, 3.0, 0.0, &id, 100).unwrap(), 0.0);
        let sqrt = |m: u64| (m as f64).sqrt();
        let mut prev = f64::INFINITY;
        for m in [100, 1000, 10_000] {
            let v = lemma_a5_value(2.0, 1.0, 0, &id, &id, &sqrt, m).unwrap();
            assert!(v <= 1.0 && v < prev);
            prev = v;
        }
        // mpmath: 0.0076691592372660095 at m = 100
        let v = lemma_a5_value(2.0, 1.0, 3, &sqrt, &id, &sqrt, 100).unwrap();
        assert!((v / 0.007_669_159_237_266_009_5 - 1.0).abs() < 1e-12);
        assert!(lemma_a5_value(1.0, 1.0, 3, &sqrt, &id, &sqrt, 100).is_err());
    }
}
