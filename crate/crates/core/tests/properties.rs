use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sprice_core::consumption::{
    dirac_atoms, intertemporal_norm, lattice_join, lattice_meet, order_leq, phi, phi_inverse,
    strong_norm, truncate, SignedPlan,
};
use sprice_core::filtration::{
    aggregate_tsystem, conditional_expectation, dual_optional_projection, optional_projection,
    projection::raw_pairing, EventTree, OptionalProcess, RawMeasure, RawProcess, StoppingTime,
};
use sprice_core::pricing::{
    extract_state_price, k_price_build, pair, pair_raw, riesz_density, riesz_tsystem,
    sup_bound_check, Represented,
};
use sprice_core::sample;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_tree(r: &mut ChaCha8Rng) -> EventTree {
    sample::random_tree(r, 5, 3)
}

// path-wise oracle for ⟨ψ, z⟩ = E Σ_k ψ_k Δz_k
fn pair_by_paths(tree: &EventTree, psi: &[f64], z: &SignedPlan) -> f64 {
    (0..tree.n_paths())
        .map(|p| {
            tree.path_prob(p)
                * tree.path(p).iter().map(|&n| psi[n] * z.increment(n)).sum::<f64>()
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tower_property(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let f: Vec<f64> = (0..tree.n_paths()).map(|_| r.random_range(-1.0..1.0)).collect();
        let last = tree.last_level();
        let mean = tree.expectation(&f);
        for k in 0..=last {
            let ck = conditional_expectation(&tree, &f, k).unwrap();
            let total: f64 = tree.nodes_at(k).zip(&ck).map(|(n, v)| tree.prob(n) * v).sum();
            prop_assert!((total - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_invisible_to_optional_plans(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let xi = sample::random_raw_process(&mut r, &tree);
        let z = sample::random_signed_plan(&mut r, &tree);
        let psi = optional_projection(&tree, &xi);
        prop_assert!((pair_raw(&tree, &xi, &z) - pair(&tree, &psi, &z)).abs() <= 1e-10);
    }

    #[test]
    fn dual_projection_is_invisible_to_optional_prices(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let m = RawMeasure::from_fn(&tree, |_, _| r.random_range(-1.0..1.0));
        let proj = dual_optional_projection(&tree, &m);
        let lhs = raw_pairing(&tree, &RawProcess::from_optional(&tree, &psi), &m);
        prop_assert!((lhs - pair(&tree, &psi, &proj)).abs() <= 1e-10);
    }

    #[test]
    fn pairing_agrees_with_path_sum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let z = sample::random_signed_plan(&mut r, &tree);
        let oracle = pair_by_paths(&tree, psi.values(), &z);
        prop_assert!((pair(&tree, &psi, &z) - oracle).abs() <= 1e-12);
    }

    #[test]
    fn state_price_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let pi = Represented { tree: &tree, psi: &psi };
        let sp = extract_state_price(&tree, &pi, 2.0).unwrap();
        prop_assert!(sp.psi().max_abs_diff(&psi) <= 1e-12);
        for _ in 0..10 {
            let tau = sample::random_stopping_time(&mut r, &tree, 0.4);
            let z = riesz_density(&tree, &pi, &tau).unwrap();
            for (i, &n) in tau.nodes().iter().enumerate() {
                prop_assert!((z[i] - psi[n]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn riesz_tsystem_is_consistent_and_aggregates(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let xi = sample::random_raw_process(&mut r, &tree);
        let psi = optional_projection(&tree, &xi);
        let pi = Represented { tree: &tree, psi: &psi };
        let mut taus: Vec<StoppingTime> = (0..=tree.last_level())
            .map(|k| StoppingTime::constant(&tree, k).unwrap())
            .collect();
        for _ in 0..6 {
            taus.push(sample::random_stopping_time(&mut r, &tree, 0.5));
        }
        let ts = riesz_tsystem(&tree, &pi, &taus).unwrap();
        prop_assert!(ts.check_consistency(&tree, 1e-12).is_ok());
        let agg = aggregate_tsystem(&tree, &ts).unwrap();
        prop_assert!(agg.max_abs_diff(&psi) <= 1e-12);
    }

    #[test]
    fn strong_norm_bounds_pairing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let z = sample::random_signed_plan(&mut r, &tree);
        let k = psi.max_value();
        prop_assert!(pair(&tree, &psi, &z).abs() <= k * strong_norm(&tree, &z) + 1e-12);
    }

    #[test]
    fn truncation_increases_to_the_price(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let x = sample::random_consumption_plan(&mut r, &tree, 0.2);
        let mut prev = 0.0;
        for k in [0.0, 0.1, 0.3, 0.7, 1.5, 3.0, 10.0] {
            let v = pair(&tree, &psi, truncate(&tree, &x, k).signed());
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
        prop_assert!((prev - pair(&tree, &psi, x.signed())).abs() <= 1e-12);
    }

    #[test]
    fn sup_bound(seed in any::<u64>(), pi in 0usize..3) {
        let p = [1.5, 2.0, 3.0][pi];
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let h: Vec<f64> = (0..tree.n_paths()).map(|_| r.random_range(0.0..2.0)).collect();
        let rep = sup_bound_check(&tree, &psi, &h, p).unwrap();
        prop_assert!(rep.holds(1e-12), "{rep:?}");
    }

    #[test]
    fn total_weight_times_strong_norm_bounds_l1(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let z = sample::random_signed_plan(&mut r, &tree);
        let w = tree.time_grid().total_weight();
        prop_assert!(intertemporal_norm(&tree, &z, 1.0) <= w * strong_norm(&tree, &z) + 1e-12);
    }

    #[test]
    fn phi_round_trip(seed in any::<u64>(), beta in 0.1f64..2.0) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let z = sample::random_signed_plan(&mut r, &tree);
        let back = phi_inverse(&tree, &phi(&tree, &z, beta), beta);
        prop_assert!(back.max_abs_diff(&z) <= 1e-12);
    }

    #[test]
    fn lattice_operations_bracket(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let x = sample::random_signed_plan(&mut r, &tree);
        let y = sample::random_signed_plan(&mut r, &tree);
        let lo = lattice_meet(&x, &y);
        let hi = lattice_join(&x, &y);
        prop_assert!(order_leq(&lo, &x) && order_leq(&x, &hi));
        prop_assert!(order_leq(&lo, &y) && order_leq(&y, &hi));
        prop_assert!((&lo + &hi).max_abs_diff(&(&x + &y)) <= 1e-15);
    }

    #[test]
    fn k_price_martingale_part(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let a_prime = sample::random_positive_process(&mut r, &tree);
        let kp = k_price_build(&tree, &a_prime);
        for n in 0..tree.len() {
            if tree.is_leaf(n) {
                prop_assert!((kp.psi[n] + a_prime[n]).abs() <= 1e-12);
                continue;
            }
            let next: f64 = tree.children(n).map(|c| tree.cond_prob(c) * kp.m[c]).sum();
            prop_assert!((next - kp.m[n]).abs() <= 1e-12);
        }
        prop_assert_eq!(kp.a[0], 0.0);
    }

    #[test]
    fn dirac_prices_the_stopped_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = small_tree(&mut r);
        let psi = sample::random_positive_process(&mut r, &tree);
        let tau = sample::random_stopping_time(&mut r, &tree, 0.4);
        let h: Vec<f64> = tau.nodes().iter().map(|_| r.random_range(0.0..1.0)).collect();
        let z = dirac_atoms(&tree, &tau, &h);
        let oracle: f64 = tau.nodes().iter().zip(&h).map(|(&n, hv)| tree.prob(n) * psi[n] * hv).sum();
        prop_assert!((pair(&tree, &psi, &z) - oracle).abs() <= 1e-12);
    }
}

#[test]
fn optional_process_from_projection_has_tree_length() {
    let mut r = rng(1);
    let tree = small_tree(&mut r);
    let xi = sample::random_raw_process(&mut r, &tree);
    let psi: OptionalProcess = optional_projection(&tree, &xi);
    assert_eq!(psi.len(), tree.len());
}
