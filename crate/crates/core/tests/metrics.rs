use proptest::prelude::*;
use zrp_core::equilibrium::equilibrium_sample;
use zrp_core::exact::{enumerate_states, ExactChain};
use zrp_core::metrics::{
    combinatorial_entropy, dissolution_rate_residual, distinguishing_event_probability, statistic_tv,
    tv_distance, Statistic, StatisticLaw,
};
use zrp_core::rng::EQUILIBRIUM_STREAM_BIT;
use zrp_core::{Configuration, RngStream};

fn law(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("zero mass", |w| {
        let t: f64 = w.iter().sum();
        (t > 0.0).then(|| w.iter().map(|x| x / t).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tv_is_a_metric(p in law(8), q in law(8), r in law(5)) {
        let pq = tv_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert_eq!(pq, tv_distance(&q, &p).unwrap());
        prop_assert!(pq <= tv_distance(&p, &r).unwrap() + tv_distance(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn multinomial_recurrence(a in prop::collection::vec(0u64..40, 2..7)) {
        let mut merged = vec![a[0] + a[1]];
        merged.extend_from_slice(&a[2..]);
        let lhs = combinatorial_entropy(&a);
        let rhs = combinatorial_entropy(&merged) + combinatorial_entropy(&a[..2]);
        prop_assert!((lhs - rhs).abs() < 1e-9 * lhs.max(1.0));
        prop_assert!(lhs >= 0.0);
    }
}

#[test]
fn statistic_tv_never_exceeds_full_tv() {
    for n in 1..=3usize {
        for m in 0..=3u64 {
            let chain = ExactChain::new(n, m).unwrap();
            let pi = chain.uniform();
            for s in chain.states() {
                for &t in &[0.0, 0.3, 1.0, 2.5] {
                    let law = chain.law_from(s, t).unwrap();
                    let full = tv_distance(&law, &pi).unwrap();
                    for stat in [
                        Statistic::MaxHeight,
                        Statistic::EmptyFraction,
                        Statistic::HeightHistogramDistance,
                        Statistic::DistinguishingEvent,
                        Statistic::FullState,
                    ] {
                        let p = StatisticLaw::pushforward(stat, chain.states(), &law).unwrap();
                        let q = StatisticLaw::pushforward(stat, chain.states(), &pi).unwrap();
                        let est = statistic_tv(&p, &q).unwrap().value;
                        assert!(est <= full + 1e-12, "{stat} {s:?} t={t}");
                        if stat == Statistic::FullState {
                            assert!((est - full).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn exact_tv_decreases_in_time() {
    for (n, m) in [(2usize, 1u64), (3, 3), (4, 3)] {
        let chain = ExactChain::new(n, m).unwrap();
        let pi = chain.uniform();
        for s in chain.states() {
            let curve: Vec<f64> = (0..60)
                .map(|k| tv_distance(&chain.law_from(s, k as f64 * 0.1).unwrap(), &pi).unwrap())
                .collect();
            assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{s:?}");
        }
    }
}

#[test]
fn two_state_tv_closed_form() {
    let chain = ExactChain::new(2, 1).unwrap();
    let law = chain.law_from(&[1, 0], 1.0).unwrap();
    let tv = tv_distance(&law, &chain.uniform()).unwrap();
    assert!((tv - 0.5 * (-1.0f64).exp()).abs() < 1e-12);
    assert_eq!(enumerate_states(2, 1), vec![vec![0, 1], vec![1, 0]]);
}

#[test]
fn sampled_two_state_tv_at_ln2() {
    let start = Configuration::new(vec![1, 0]).unwrap();
    let reps = 40_000;
    let t = std::f64::consts::LN_2;
    let samples: Vec<Configuration> = (0..reps)
        .map(|r| {
            let mut c = start.clone();
            c.run_until(t, &mut RngStream::new(3, r), &[], |_, _, _| {})
                .unwrap();
            c
        })
        .collect();
    let p = StatisticLaw::from_configs(Statistic::FullState, &samples).unwrap();
    let pi = StatisticLaw::from_masses(Statistic::FullState, 2, [(0, 0.5), (1, 0.5)].into()).unwrap();
    let est = statistic_tv(&p, &pi).unwrap();
    assert!((est.value - 0.25).abs() < 4.0 * est.stderr.max(1e-3), "{est:?}");
}

#[test]
fn stirling_limit() {
    let p = [0.5, 0.3, 0.2];
    let n = 10_000u64;
    let a: Vec<u64> = p.iter().map(|x| (x * n as f64) as u64).collect();
    let h: f64 = p.iter().map(|x: &f64| -x * x.ln()).sum();
    let per_site = combinatorial_entropy(&a) / n as f64;
    assert!((per_site - h).abs() < 0.01 * h, "{per_site} vs {h}");
}

fn equilibrium_ensemble(n: usize, reps: usize, seed: u64) -> Vec<Configuration> {
    (0..reps)
        .map(|r| {
            equilibrium_sample(
                n,
                n as u64,
                &mut RngStream::new(seed, EQUILIBRIUM_STREAM_BIT | r as u64),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn distinguishing_event_at_equilibrium_is_rare() {
    let ensemble = equilibrium_ensemble(10_000, 1000, 5);
    assert!(distinguishing_event_probability(&ensemble).unwrap() <= 0.01);
    let worst = vec![Configuration::worst_case(10_000, 10_000).unwrap(); 10];
    assert_eq!(distinguishing_event_probability(&worst).unwrap(), 1.0);
}

#[test]
fn dissolution_residuals() {
    let eq = &equilibrium_ensemble(10_000, 1, 6)[0];
    assert!(dissolution_rate_residual(eq, 1.0, 0).unwrap() <= 0.02);
    let n = 10_000;
    let mut c = Configuration::worst_case(n, n as u64).unwrap();
    c.run_until(0.1 * n as f64, &mut RngStream::new(6, 0), &[], |_, _, _| {})
        .unwrap();
    assert!(dissolution_rate_residual(&c, 1.0, 1).unwrap() <= 0.05);
}
