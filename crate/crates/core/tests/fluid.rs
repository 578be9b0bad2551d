use proptest::prelude::*;
use zrp_core::fluid::{
    conditional_entropy, entropy, entropy_production, fluid_drift, geometric_entropy, geometric_law,
    integrate_fluid, integrate_fluid_with, integrate_pair_with, kl_divergence, pair_drift, tilted_density,
    FluidOptions, PairMatrix, ProbabilityVector,
};

const K: usize = 40;

/// Random law supported on `0..support`, padded with zeros up to `K`.
fn law(support: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(0.0f64..1.0, support).prop_filter_map("zero mass", |mut w| {
        w.resize(K + 1, 0.0);
        ProbabilityVector::from_unnormalized(w).ok()
    })
}

fn full_law() -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(0.01f64..1.0, K + 1).prop_map(|w| ProbabilityVector::from_unnormalized(w).unwrap())
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn drift_preserves_mass_and_mean(q in law(20)) {
        let f = fluid_drift(&q);
        prop_assert!(f.iter().sum::<f64>().abs() < 1e-13);
        let mean: f64 = f.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
        prop_assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn drift_is_lipschitz(q in law(20), p in law(20)) {
        let gap = l1(&fluid_drift(&q), &fluid_drift(&p));
        prop_assert!(gap <= 2.0 * 3.0 * l1(q.weights(), p.weights()) + 1e-14);
    }

    #[test]
    fn pinsker(p in law(30), q in full_law()) {
        let d = l1(p.weights(), q.weights());
        prop_assert!(0.5 * d * d <= kl_divergence(&p, &q).unwrap() + 1e-12);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pair_marginal_drift_is_fluid_drift(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 12), 12)) {
        let side = 16;
        let mut w = vec![0.0; side * side];
        for (k, row) in rows.iter().enumerate() {
            for (l, x) in row.iter().enumerate() {
                w[k * side + l] = *x;
            }
        }
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.0);
        w.iter_mut().for_each(|x| *x /= total);
        let pair = PairMatrix::new(side, w, 0.0).unwrap();
        let f = pair_drift(&pair);
        let marginal = fluid_drift(&pair.current_marginal());
        for l in 0..side {
            let col: f64 = (0..side).map(|k| f[k * side + l]).sum();
            prop_assert!((col - marginal[l]).abs() < 1e-13);
        }
        for k in 0..side {
            prop_assert!(f[k * side..(k + 1) * side].iter().sum::<f64>().abs() < 1e-13);
        }
    }

    #[test]
    fn kl_to_matching_geometric_is_entropy_gap(p in prop::collection::vec(0.0f64..1.0, 6)) {
        let mut w = p;
        w.resize(201, 0.0);
        let p = ProbabilityVector::from_unnormalized(w).unwrap();
        let lam = p.mean();
        prop_assume!(lam > 0.05);
        let g = geometric_law(lam, 200).unwrap();
        let d = kl_divergence(&p, &g).unwrap();
        prop_assert!((d - (geometric_entropy(lam) - entropy(&p))).abs() < 1e-10);
    }
}

fn start() -> ProbabilityVector {
    ProbabilityVector::point_mass(1, 200).unwrap()
}

#[test]
fn conservation_over_ten_time_units() {
    let traj = integrate_fluid(&start(), 10.0, 1e-3).unwrap();
    for s in &traj.states {
        assert!((s.total_mass() - 1.0).abs() < 1e-8);
        assert!((tilted_density(s) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn entropy_is_non_decreasing() {
    let traj = integrate_fluid(&start(), 20.0, 1e-3).unwrap();
    let h = traj.entropies();
    assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn entropy_production_identity() {
    let q0 = ProbabilityVector::mixture(&[
        (0.5, &geometric_law(0.5, 200).unwrap()),
        (0.5, &geometric_law(1.5, 200).unwrap()),
    ])
    .unwrap();
    let traj = integrate_fluid(&q0, 5.0, 1e-3).unwrap();
    let v: Vec<f64> = traj.productions().into_iter().map(Option::unwrap).collect();
    let integral: f64 = traj
        .times
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    let h = traj.entropies();
    let gain = h[h.len() - 1] - h[0];
    assert!((gain - integral).abs() < 1e-4, "{gain} vs {integral}");
    assert!(v.iter().all(|&x| x >= 0.0));
}

#[test]
fn relaxes_to_geometric() {
    let g = geometric_law(1.0, 200).unwrap();
    let traj = integrate_fluid_with(&start(), 50.0, FluidOptions::new(1e-3).record_every(100)).unwrap();
    let dist: Vec<f64> = traj.states.iter().map(|s| s.l1_distance(&g)).collect();
    let after_one = traj.times.iter().position(|&t| t >= 1.0).unwrap();
    assert!(dist[after_one..].windows(2).all(|w| w[1] <= w[0]));
    assert!(*dist.last().unwrap() < 1e-3);
    assert!(entropy_production(traj.last()).unwrap() < 1e-6);
}

#[test]
fn fourth_order_convergence() {
    let at = |dt: f64| {
        integrate_fluid_with(&start(), 2.0, FluidOptions::new(dt).record_every(usize::MAX)).unwrap()
    };
    let reference = at(0.025 / 4.0);
    let coarse = at(0.1).last().l1_distance(reference.last());
    let fine = at(0.05).last().l1_distance(reference.last());
    let ratio = coarse / fine;
    assert!((12.0..24.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn pair_law_marginals() {
    let q0 = ProbabilityVector::mixture(&[
        (0.5, &geometric_law(0.5, 60).unwrap()),
        (0.5, &geometric_law(1.5, 60).unwrap()),
    ])
    .unwrap();
    let w0 = PairMatrix::diagonal(&q0);
    let pair = integrate_pair_with(&w0, 2.0, FluidOptions::new(1e-3).record_every(100)).unwrap();
    let fluid = integrate_fluid(&q0, 2.0, 1e-3).unwrap();
    let last = pair.last();
    assert!(l1(&last.initial_marginal(), &w0.initial_marginal()) < 1e-8);
    assert!(last.current_marginal().l1_distance(fluid.last()) < 1e-8);
    let h: Vec<f64> = pair.states.iter().map(conditional_entropy).collect();
    assert_eq!(h[0], 0.0);
    assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(*h.last().unwrap() <= entropy(&last.current_marginal()) + 1e-12);
}
