use std::sync::Arc;

use efpf_core::efpf::{
    efpf_bb_direct, efpf_beta_bernoulli, efpf_ibp3, efpf_product_form, v_ibp2, v_ibp3,
    BetaBernoulliParams, FeatureCounts, Ibp3Params, VArray, VFn, WeightFn, WeightSystem,
};
use efpf_core::LogReal;
use proptest::prelude::*;

fn counts() -> impl Strategy<Value = FeatureCounts> {
    (1u64..=20).prop_flat_map(|n| {
        prop::collection::vec(1..=n, 0..6).prop_map(move |m| FeatureCounts::new(n, m).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ibp3_routes_agree(
        gamma in 0.05f64..5.0,
        alpha in 0.0f64..0.99,
        shift in 0.01f64..5.0,
        fc in counts(),
    ) {
        let p = Ibp3Params::new(gamma, alpha, shift - alpha).unwrap();
        let direct = efpf_ibp3(&p, &fc);
        let composed = efpf_product_form(&WeightSystem::ibp3(p), &fc);
        prop_assert!(direct.relative_gap(composed).abs() <= 1e-12);
    }

    #[test]
    fn beta_bernoulli_routes_agree(
        n_features in 0u64..8,
        alpha in -5.0f64..-0.01,
        shift in 0.01f64..5.0,
        fc in counts(),
    ) {
        let p = BetaBernoulliParams::new(n_features, alpha, shift - alpha).unwrap();
        let direct = efpf_beta_bernoulli(&p, &fc);
        let composed = efpf_product_form(&WeightSystem::beta_bernoulli(p), &fc);
        let (eta1, eta2) = p.beta_shapes();
        let integrated = efpf_bb_direct(eta1, eta2, n_features, &fc).unwrap();
        if fc.k() > n_features {
            prop_assert!(direct.is_zero() && composed.is_zero() && integrated.is_zero());
        } else {
            prop_assert!(direct.relative_gap(composed).abs() <= 1e-12);
            prop_assert!(integrated.relative_gap(direct).abs() <= 1e-11);
        }
    }

    #[test]
    fn permutation_symmetry(fc in counts(), seed in any::<u64>()) {
        let p = Ibp3Params::new(1.3, 0.4, 0.7).unwrap();
        let mut m = fc.counts().to_vec();
        let shift = (seed % (m.len() as u64).max(1)) as usize;
        m.rotate_left(shift);
        m.reverse();
        let permuted = FeatureCounts::new(fc.n(), m).unwrap();
        prop_assert_eq!(efpf_ibp3(&p, &fc), efpf_ibp3(&p, &permuted));
        let ws = WeightSystem::ibp3(p);
        prop_assert_eq!(efpf_product_form(&ws, &fc), efpf_product_form(&ws, &permuted));
    }
}

#[test]
fn small_alpha_approaches_two_parameter_process() {
    for &(gamma, theta) in &[(1.0, 1.0), (2.5, 0.3), (0.4, 4.0)] {
        let p = Ibp3Params::new(gamma, 1e-10, theta).unwrap();
        for n in 1..=10 {
            for k in 0..=10 {
                let gap = v_ibp3(&p, n, k).relative_gap(v_ibp2(gamma, theta, n, k));
                assert!(gap.abs() <= 1e-6, "n={n} k={k} gap={gap}");
            }
        }
    }
}

fn pow(kappa: f64, e: i64) -> LogReal {
    LogReal::from_f64(kappa).powi(e)
}

fn rescaled(base: &WeightSystem, kappa: f64, which: u8) -> WeightSystem {
    let (v0, w0, u0) = (base.v.clone(), base.w.clone(), base.u.clone());
    let v: Arc<dyn VArray> = Arc::new(VFn::new(move |n, k| {
        let (n, k) = (n as i64, k as i64);
        let e = match which {
            1 | 2 => -k,
            3 => -n * k,
            _ => -k * (n - 1),
        };
        pow(kappa, e) * v0.v(n as u64, k as u64)
    }));
    let w: WeightFn = Arc::new(move |j| {
        let e = match which {
            1 => 1,
            2 => 0,
            3 => j as i64,
            _ => j as i64 - 1,
        };
        pow(kappa, e) * w0(j)
    });
    let u: WeightFn = Arc::new(move |j| {
        let e = match which {
            1 => 0,
            2 => 1,
            _ => j as i64,
        };
        pow(kappa, e) * u0(j)
    });
    WeightSystem::new(v, w, u)
}

fn all_counts(n: u64, k: usize) -> Vec<Vec<u64>> {
    if k == 0 {
        return vec![vec![]];
    }
    all_counts(n, k - 1)
        .into_iter()
        .flat_map(|prefix| {
            let lo = prefix.last().copied().unwrap_or(1);
            (lo..=n).map(move |c| {
                let mut m = prefix.clone();
                m.push(c);
                m
            })
        })
        .collect()
}

#[test]
fn rescalings_leave_the_efpf_unchanged() {
    let systems = [
        WeightSystem::ibp3(Ibp3Params::new(1.2, 0.4, 0.9).unwrap()),
        WeightSystem::beta_bernoulli(BetaBernoulliParams::new(3, -1.5, 2.5).unwrap()),
    ];
    for base in &systems {
        for which in 1..=4u8 {
            for kappa in [0.5, 2.0] {
                let ws = rescaled(base, kappa, which);
                for n in 1..=8 {
                    for k in 0..=3 {
                        for m in all_counts(n, k) {
                            let fc = FeatureCounts::new(n, m).unwrap();
                            let a = efpf_product_form(base, &fc);
                            let b = efpf_product_form(&ws, &fc);
                            if a.is_zero() {
                                assert!(b.is_zero());
                            } else {
                                assert!(a.relative_gap(b).abs() <= 1e-12, "rescaling {which}");
                            }
                        }
                    }
                }
            }
        }
    }
}
