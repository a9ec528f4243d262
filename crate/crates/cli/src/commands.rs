//! One function per subcommand, each producing a [`Report`].

use std::sync::Arc;

use efpf_core::boundary::{divergence_scan, limit_scan, ratio_scan, PathSpec};
use efpf_core::consistency::{
    consistency_residual, initial_mass, v_recursion_residual, TruncationPolicy,
};
use efpf_core::efpf::{
    efpf_beta_bernoulli, efpf_ibp3, efpf_product_form, AlphaTheta, BetaBernoulliParams,
    FeatureCounts, Ibp2Params, Ibp3Params, VArray, WeightSystem,
};
use efpf_core::markov::{
    brute_force_cotransition, cotransition_prob, d_big, d_big_by_recursion, harmonic_identity_gap,
    hypergeometric_identity_gap, ChainLaw,
};
use efpf_core::sampler::{
    growth_law_check, sample_beta_bernoulli, sample_ibp3, GrowthLaw, RngSpec,
};
use efpf_core::LogReal;
use serde_json::{Map, Value};

use crate::cli::{
    ConsistencyArgs, CotransArgs, EfpfArgs, GrowthLawArgs, IdentitiesArgs, LimitScanArgs, Model,
    ModelArgs, PathKind, SampleArgs,
};
use crate::error::{missing, CliError, CliResult};
use crate::output::{float, int, ints, Report};

/// A fully validated model.
#[derive(Clone, Copy, Debug)]
enum Law {
    Ibp3(Ibp3Params),
    Ibp2(Ibp2Params),
    Bb(BetaBernoulliParams),
}

impl Law {
    fn resolve(
        model: Model,
        gamma: Option<f64>,
        alpha: Option<f64>,
        theta: Option<f64>,
        n_features: Option<u64>,
    ) -> CliResult<Self> {
        let theta = theta.ok_or_else(|| missing("theta", "for every model"))?;
        Ok(match model {
            Model::Ibp3 => {
                let alpha = alpha.ok_or_else(|| missing("alpha", "for --model ibp3"))?;
                AlphaTheta::new(alpha, theta)?;
                let gamma = gamma.ok_or_else(|| missing("gamma", "for --model ibp3"))?;
                Law::Ibp3(Ibp3Params::new(gamma, alpha, theta)?)
            }
            Model::Ibp2 => {
                if let Some(a) = alpha.filter(|&a| a != 0.0) {
                    return Err(efpf_core::EfpfError::Domain(format!(
                        "the two-parameter buffet process has alpha = 0, got {a}"
                    ))
                    .into());
                }
                let gamma = gamma.ok_or_else(|| missing("gamma", "for --model ibp2"))?;
                Law::Ibp2(Ibp2Params::new(gamma, theta)?)
            }
            Model::Bb => {
                let alpha = alpha.ok_or_else(|| missing("alpha", "for --model bb"))?;
                AlphaTheta::new(alpha, theta)?;
                let n = n_features.ok_or_else(|| missing("N", "for --model bb"))?;
                Law::Bb(BetaBernoulliParams::new(n, alpha, theta)?)
            }
        })
    }

    fn from_args(m: &ModelArgs) -> CliResult<Self> {
        Law::resolve(m.model, m.gamma, m.alpha, m.theta, m.n_features)
    }

    fn name(&self) -> &'static str {
        match self {
            Law::Ibp3(_) => "ibp3",
            Law::Ibp2(_) => "ibp2",
            Law::Bb(_) => "bb",
        }
    }

    fn at(&self) -> AlphaTheta {
        match self {
            Law::Ibp3(p) => p.at,
            Law::Ibp2(p) => p.as_ibp3().at,
            Law::Bb(p) => p.at,
        }
    }

    fn v(&self) -> Arc<dyn VArray> {
        match *self {
            Law::Ibp3(p) => Arc::new(p),
            Law::Ibp2(p) => Arc::new(p),
            Law::Bb(p) => Arc::new(p),
        }
    }

    fn weights(&self) -> WeightSystem {
        match *self {
            Law::Ibp3(p) => WeightSystem::ibp3(p),
            Law::Ibp2(p) => WeightSystem::ibp3(p.as_ibp3()),
            Law::Bb(p) => WeightSystem::beta_bernoulli(p),
        }
    }

    fn log_efpf(&self, fc: &FeatureCounts) -> LogReal {
        match self {
            Law::Ibp3(p) => efpf_ibp3(p, fc),
            Law::Ibp2(p) => efpf_ibp3(&p.as_ibp3(), fc),
            Law::Bb(p) => efpf_beta_bernoulli(p, fc),
        }
    }

    fn params(&self) -> Value {
        let mut map = Map::new();
        match self {
            Law::Ibp3(p) => {
                map.insert("gamma".into(), float(p.gamma));
                map.insert("alpha".into(), float(p.at.alpha));
                map.insert("theta".into(), float(p.at.theta));
            }
            Law::Ibp2(p) => {
                map.insert("gamma".into(), float(p.gamma));
                map.insert("theta".into(), float(p.theta));
            }
            Law::Bb(p) => {
                map.insert("N".into(), int(p.n_features));
                map.insert("alpha".into(), float(p.at.alpha));
                map.insert("theta".into(), float(p.at.theta));
            }
        }
        Value::Object(map)
    }
}

/// Natural log of a nonnegative quantity; `-inf` at zero.
fn ln_of(x: LogReal) -> f64 {
    match x.sign() {
        1 => x.log_mag(),
        0 => f64::NEG_INFINITY,
        _ => f64::NAN,
    }
}

/// Records an assertion failure; the report is still emitted.
fn check(r: &mut Report, assert: bool, ok: bool, what: impl FnOnce() -> String) {
    if assert && !ok {
        r.fail(what());
    }
}

pub fn efpf(a: &EfpfArgs) -> CliResult<Report> {
    let law = Law::from_args(&a.model)?;
    let fc = FeatureCounts::new(a.n, a.m.clone())?;
    let log_prob = law.log_efpf(&fc);
    let product = efpf_product_form(&law.weights(), &fc);
    let mut r = Report::new("efpf");
    r.field("model", law.name())
        .field("params", law.params())
        .field("n", int(fc.n()))
        .field("k", int(fc.k()))
        .field("m", ints(fc.counts()))
        .field("log_prob", float(ln_of(log_prob)))
        .field("prob", float(log_prob.to_f64()))
        .field("log_v", float(ln_of(law.v().v(fc.n(), fc.k()))))
        .field("log_prob_product_form", float(ln_of(product)));
    Ok(r)
}

pub fn consistency(a: &ConsistencyArgs) -> CliResult<Report> {
    let law = Law::from_args(&a.model)?;
    let fc = FeatureCounts::new(a.n, a.m.clone())?;
    let tp = TruncationPolicy::new(a.j_max, a.tail_tol)?;
    let residual = consistency_residual(&law.weights(), &fc, tp)?;
    let v = law.v();
    let recursion = v_recursion_residual(v.as_ref(), law.at(), fc.n(), fc.k(), tp)?;
    let mass = initial_mass(v.as_ref(), tp)?;
    let worst = residual.abs().max(recursion.abs());
    let mut r = Report::new("consistency");
    r.field("model", law.name())
        .field("params", law.params())
        .field("n", int(fc.n()))
        .field("k", int(fc.k()))
        .field("m", ints(fc.counts()))
        .field("residual", float(residual))
        .field("recursion_residual", float(recursion))
        .field("initial_mass", float(mass))
        .field("max_abs_residual", float(worst));
    check(&mut r, a.check.assert, worst <= a.check.tol, || {
        format!("max |residual| = {worst:e} exceeds tol {:e}", a.check.tol)
    });
    Ok(r)
}

pub fn cotrans(a: &CotransArgs) -> CliResult<Report> {
    let at = AlphaTheta::new(a.alpha, a.theta)?;
    let chain = if a.brute_force {
        let law = Law::resolve(a.model, a.gamma, Some(a.alpha), Some(a.theta), a.n_features)?;
        Some(ChainLaw::new(law.v(), at)?)
    } else {
        None
    };
    let ks: Vec<u64> = match a.k {
        Some(k) => vec![k],
        None => (0..=a.l).collect(),
    };
    let mut r = Report::new("cotrans");
    r.field("alpha", float(a.alpha))
        .field("theta", float(a.theta))
        .field("n", int(a.n))
        .field("m", int(a.m))
        .field("l", int(a.l));
    if chain.is_some() {
        r.field("model", a.model.name());
        r.columns(&["k", "log_prob", "prob", "brute_prob", "rel_gap"]);
    } else {
        r.columns(&["k", "log_prob", "prob"]);
    }
    let mut total = efpf_core::numerics::Neumaier::default();
    let mut worst_gap = 0.0f64;
    for &k in &ks {
        let p = cotransition_prob(at, a.n, k, a.m, a.l)?;
        total.add(p.to_f64());
        let mut row = vec![int(k), float(ln_of(p)), float(p.to_f64())];
        if let Some(cl) = &chain {
            let b = brute_force_cotransition(cl, a.n, k, a.m, a.l)?;
            let gap = if p.is_zero() && b.is_zero() {
                0.0
            } else {
                b.relative_gap(p).abs()
            };
            worst_gap = worst_gap.max(gap);
            row.push(float(b.to_f64()));
            row.push(float(gap));
        }
        r.row(row);
    }
    let total = total.total();
    r.field("total", float(total));
    if chain.is_some() {
        r.field("max_rel_gap", float(worst_gap));
    }
    let tol = a.check.tol;
    let total_ok = a.k.is_some() || (total - 1.0).abs() <= tol;
    check(&mut r, a.check.assert, total_ok && worst_gap <= tol, || {
        format!(
            "|total - 1| = {:e}, max rel_gap = {worst_gap:e}, tol {tol:e}",
            (total - 1.0).abs()
        )
    });
    Ok(r)
}

pub fn limit_scan_cmd(a: &LimitScanArgs) -> CliResult<Report> {
    let at = AlphaTheta::new(a.alpha, a.theta)?;
    let mut r = Report::new("limit-scan");
    r.field("alpha", float(a.alpha))
        .field("theta", float(a.theta))
        .field("n", int(a.n))
        .field("k", int(a.k));
    let path = match a.path {
        PathKind::Power => {
            let c = a.c.ok_or_else(|| missing("c", "for --path power"))?;
            r.field("path", "power").field("c", float(c));
            PathSpec::Power { c }
        }
        PathKind::Log => {
            let gamma = a.gamma.ok_or_else(|| missing("gamma", "for --path log"))?;
            r.field("path", "log").field("gamma", float(gamma));
            PathSpec::Logarithmic { gamma }
        }
        PathKind::Constant => {
            let n = a
                .n_features
                .ok_or_else(|| missing("N", "for --path constant"))?;
            r.field("path", "constant").field("N", int(n));
            PathSpec::Constant { n }
        }
        PathKind::Linear => {
            r.field("path", "linear");
            PathSpec::superlinear(|m| m)
        }
        PathKind::Sqrt => {
            r.field("path", "sqrt");
            PathSpec::superlinear(|m| ((m as f64).sqrt() + 0.5).floor() as u64)
        }
        PathKind::Log1p => {
            r.field("path", "log1p");
            PathSpec::custom(|m| ((m as f64).ln() + 0.5).floor() as u64 + 1)
        }
    };
    let report = match &path {
        PathSpec::Superlinear(_) => Some(divergence_scan(at, a.n, a.k, &path, &a.m_grid)?),
        PathSpec::Custom(_) => None,
        _ => Some(limit_scan(at, a.n, a.k, &path, &a.m_grid)?),
    };
    r.columns(&["m", "omega", "ratio", "gap"]);
    let Some(rep) = report else {
        if a.check.assert {
            return Err(CliError::Usage("--assert needs a path with a limit".into()));
        }
        let (omega, ratios) = ratio_scan(at, a.n, a.k, &path, &a.m_grid)?;
        for ((&m, &w), &x) in a.m_grid.iter().zip(&omega).zip(&ratios) {
            r.row(vec![int(m), int(w), float(x), float(f64::NAN)]);
        }
        r.field("target", float(f64::NAN))
            .field("final_gap", float(f64::NAN))
            .field("tail_gaps_decreasing", false)
            .field("tail_ratios_decreasing", false);
        return Ok(r);
    };
    for i in 0..rep.m_grid.len() {
        r.row(vec![
            int(rep.m_grid[i]),
            int(rep.omega[i]),
            float(rep.ratio_values[i]),
            float(rep.gaps[i]),
        ]);
    }
    let gaps_down = rep.tail_gaps_decreasing(3);
    let ratios_down = rep.tail_ratios_decreasing(3);
    r.field("target", float(rep.target))
        .field("final_gap", float(rep.final_gap))
        .field("tail_gaps_decreasing", gaps_down)
        .field("tail_ratios_decreasing", ratios_down);
    let tol = a.check.tol;
    if matches!(path, PathSpec::Superlinear(_)) {
        let last = rep.ratio_values.last().copied().unwrap_or(f64::NAN);
        check(&mut r, a.check.assert, last <= tol && ratios_down, || {
            format!(
                "last ratio {last:e} (tol {tol:e}), ratios decreasing at the tail: {ratios_down}"
            )
        });
    } else {
        check(
            &mut r,
            a.check.assert,
            rep.final_gap <= tol && gaps_down,
            || {
                format!(
                    "final_gap {:e} (tol {tol:e}), gaps decreasing at the tail: {gaps_down}",
                    rep.final_gap
                )
            },
        );
    }
    Ok(r)
}

pub fn sample(a: &SampleArgs) -> CliResult<Report> {
    let law = Law::from_args(&a.model)?;
    if a.n == 0 {
        return Err(efpf_core::EfpfError::Domain("n must be >= 1".into()).into());
    }
    let spec = RngSpec::new(a.seed, a.stream);
    let fm = match law {
        Law::Ibp3(p) => sample_ibp3(&p, a.n, spec),
        Law::Ibp2(p) => sample_ibp3(&p.as_ibp3(), a.n, spec),
        Law::Bb(p) => sample_beta_bernoulli(&p, a.n, spec),
    };
    let compact: Value = serde_json::from_str(&fm.to_compact_json())
        .map_err(|e| CliError::Io(format!("internal matrix encoding: {e}")))?;
    let mut r = Report::new("sample");
    r.field("model", law.name())
        .field("params", law.params())
        .field("seed", int(a.seed))
        .field("stream", int(a.stream))
        .field("n", int(fm.n()))
        .field("k", int(fm.k() as u64))
        .field("counts", ints(&fm.counts()))
        .field("columns", compact["columns"].clone())
        .csv_override(fm.to_csv());
    Ok(r)
}

pub fn growth_law(a: &GrowthLawArgs) -> CliResult<Report> {
    let law = Law::from_args(&a.model)?;
    let g = match law {
        Law::Ibp3(p) => GrowthLaw::Ibp3(p),
        Law::Ibp2(p) => GrowthLaw::Ibp2(p),
        Law::Bb(p) => GrowthLaw::BetaBernoulli(p),
    };
    let rep = growth_law_check(g, a.n, a.runs, RngSpec::new(a.seed, a.stream))?;
    let gap = rep.median_relative_gap();
    let mut r = Report::new("growth-law");
    r.field("model", law.name())
        .field("params", law.params())
        .field("seed", int(a.seed))
        .field("stream", int(a.stream))
        .field("statistic", rep.statistic.as_str())
        .field("target", float(rep.target))
        .field("n_max", int(rep.n_max))
        .field("runs", int(rep.runs))
        .field("mean", float(rep.mean))
        .field("median", float(rep.median))
        .field("q1", float(rep.q1))
        .field("q3", float(rep.q3))
        .field("median_rel_gap", float(gap));
    if let Some(frac) = rep.absorbed_fraction {
        r.field("absorbed_fraction", float(frac));
    }
    r.columns(&["checkpoint", "median_statistic"]);
    for (&c, &s) in rep.checkpoints.iter().zip(&rep.median_trajectory) {
        r.row(vec![int(c), float(s)]);
    }
    let tol = a.check.tol;
    match rep.absorbed_fraction {
        Some(frac) => check(&mut r, a.check.assert, frac >= 1.0 - tol, || {
            format!("absorbed fraction {frac} below 1 - {tol}")
        }),
        None => check(&mut r, a.check.assert, gap <= tol, || {
            format!("median relative gap {gap:e} exceeds tol {tol:e}")
        }),
    }
    Ok(r)
}

pub fn identities(a: &IdentitiesArgs) -> CliResult<Report> {
    let at = AlphaTheta::new(a.alpha, a.theta)?;
    let (name, gap) = if a.alpha == 0.0 {
        ("harmonic", harmonic_identity_gap(a.theta, a.n, a.m)?)
    } else {
        ("hypergeometric", hypergeometric_identity_gap(at, a.n, a.m)?)
    };
    let d_gap = d_big(at, a.m, a.l).relative_gap(d_big_by_recursion(at, a.m, a.l));
    let worst = gap.abs().max(d_gap.abs());
    let mut r = Report::new("identities");
    r.field("alpha", float(a.alpha))
        .field("theta", float(a.theta))
        .field("n", int(a.n))
        .field("m", int(a.m))
        .field("l", int(a.l))
        .field("identity", name)
        .field("identity_gap", float(gap))
        .field("d_recursion_gap", float(d_gap));
    check(&mut r, a.check.assert, worst <= a.check.tol, || {
        format!("max |gap| = {worst:e} exceeds tol {:e}", a.check.tol)
    });
    Ok(r)
}
