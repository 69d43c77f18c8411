use gowers_core::gf2::BitMatrix;
use gowers_core::gowers::{self, FnCollection};
use gowers_core::group::{self, GroupFn, GroupSpec};
use gowers_core::influence::{flip_probability, influence, influence_fourier, influences, max_influence};
use gowers_core::io::{self, CollectionFile, FunctionFile};
use gowers_core::testing::{self, Hypergraph, LongCodeInputs};
use gowers_core::ugame::{solve_unique_game, UniqueGame};
use gowers_core::{BoolFn, Guard, RandomMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type F = BoolFn<f64>;
const G: Guard = Guard::new(26);

fn mode(sign: bool) -> RandomMode {
    if sign {
        RandomMode::Sign
    } else {
        RandomMode::Bounded
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_orthonormal(n in 1usize..7, s in any::<usize>(), t in any::<usize>()) {
        let (s, t) = (s % (1 << n), t % (1 << n));
        let ip = F::chi(n, s).unwrap().inner(&F::chi(n, t).unwrap()).unwrap();
        let want = if s == t { 1.0 } else { 0.0 };
        prop_assert!((ip - want).abs() < 1e-12);
    }

    #[test]
    fn noise_composes(n in 1usize..8, seed in any::<u64>(), g1 in 0.0f64..0.5, g2 in 0.0f64..0.5) {
        let f = F::random(n, RandomMode::Bounded, seed).unwrap();
        let twice = f.apply_noise(g1).unwrap().apply_noise(g2).unwrap();
        let rho = (1.0 - 2.0 * g1) * (1.0 - 2.0 * g2);
        let once = f.apply_noise((1.0 - rho) / 2.0).unwrap();
        for (a, b) in twice.values().iter().zip(once.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn folding_is_idempotent(n in 1usize..8, seed in any::<u64>()) {
        let f = F::random(n, RandomMode::Sign, seed).unwrap().fold().unwrap();
        prop_assert_eq!(f.fold().unwrap(), f);
    }

    #[test]
    fn influence_routes_agree(n in 1usize..9, seed in any::<u64>(), i in 1usize..9) {
        let i = 1 + (i - 1) % n;
        let f = F::random(n, RandomMode::Sign, seed).unwrap();
        let a = influence(&f, i).unwrap();
        prop_assert!((a - influence_fourier(&f, i).unwrap()).abs() < 1e-9);
        prop_assert!((a - flip_probability(&f, i).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn influence_of_products(n in 1usize..8, seed in any::<u64>(), k in 2usize..6, sign in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs: Vec<F> = (0..k).map(|_| F::random_with(n, mode(sign), &mut rng).unwrap()).collect();
        let prod = fs[1..].iter().fold(fs[0].clone(), |p, f| p.mul(f).unwrap());
        let factor = if sign { 1.0 } else { k as f64 };
        let each: Vec<Vec<f64>> = fs.iter().map(influences).collect();
        for (i, lhs) in influences(&prod).into_iter().enumerate() {
            let rhs: f64 = each.iter().map(|v| v[i]).sum();
            prop_assert!(lhs <= factor * rhs + 1e-9);
        }
    }

    #[test]
    fn uniformity_against_influence(n in 1usize..7, seed in any::<u64>(), d in 1usize..5, sign in any::<bool>()) {
        let f = F::random(n, mode(sign), seed).unwrap();
        let u = gowers::gowers_u(&f, d, G).unwrap().value;
        let base = f.mean() * f.mean();
        let c = if sign { ((1u64 << (d - 1)) - 1) as f64 } else { 4f64.powi(d as i32) };
        prop_assert!(u >= -1e-9);
        prop_assert!(u <= base + c * max_influence(&f) + 1e-9);
        if d >= 2 {
            let lower = gowers::gowers_u(&f, d - 1, G).unwrap().value;
            prop_assert!(lower <= u.sqrt() + 1e-9);
        }
    }

    #[test]
    fn uniformity_routes_agree(n in 1usize..5, seed in any::<u64>(), d in 1usize..4) {
        let f = F::random(n, RandomMode::Bounded, seed).unwrap();
        let a = gowers::gowers_u(&f, d, G).unwrap().value;
        let b = gowers::gowers_u_naive(&f, d, G).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn matrix_invariance(n in 1usize..6, seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = F::random_with(n, RandomMode::Sign, &mut rng).unwrap();
        let a = BitMatrix::random_invertible(n, &mut rng);
        let u = gowers::gowers_u(&f, d, G).unwrap().value;
        let ua = gowers::gowers_u(&f.linear_transform(&a).unwrap(), d, G).unwrap().value;
        prop_assert!((u - ua).abs() < 1e-9);
    }

    #[test]
    fn inner_product_bounds(n in 1usize..5, seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = (0..1 << d).map(|_| F::random_with(n, RandomMode::Bounded, &mut rng).unwrap()).collect();
        let c = FnCollection::new(d, fs).unwrap();
        let ip = gowers::gowers_ip(&c, G).unwrap().value;
        prop_assert!((ip - gowers::gowers_ip_naive(&c, G).unwrap().value).abs() < 1e-9);
        let bound: f64 = c
            .entries()
            .iter()
            .map(|f| gowers::gowers_u(f, d, G).unwrap().value.max(0.0).powf(0.5f64.powi(d as i32)))
            .product();
        prop_assert!(ip.abs() <= bound + 1e-9);
        let lip = gowers::linear_gowers_ip(&c, G).unwrap().value;
        let lifted = gowers::gowers_ip(&gowers::lift_linear_to_gowers(&c), G).unwrap().value;
        prop_assert!(lip.abs() <= lifted.max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn h_test_expansion(n in 1usize..4, seed in any::<u64>(), which in 0usize..3) {
        let h = match which {
            0 => Hypergraph::complete_graph(3).unwrap(),
            1 => Hypergraph::complete(3, 3).unwrap(),
            _ => Hypergraph::new(2, vec![vec![1, 2]]).unwrap(),
        };
        let f = F::random(n, RandomMode::Sign, seed).unwrap();
        let r = testing::exact_h_test(&h, &f, G).unwrap();
        prop_assert!((r.probability - r.expansion().unwrap()).abs() < 1e-9);
        let inputs = LongCodeInputs::uniform(&h, &f).unwrap();
        let noisy = testing::exact_noisy_h_test(&h, 0.1, &inputs, G).unwrap();
        prop_assert!((noisy.probability - noisy.expansion().unwrap()).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&noisy.probability));
    }

    #[test]
    fn group_parseval_and_influence(seed in any::<u64>(), which in 0usize..3) {
        let blocks = match which {
            0 => vec![vec![3]; 3],
            1 => vec![vec![9], vec![4]],
            _ => vec![vec![2, 2], vec![5]],
        };
        let spec = GroupSpec::new(blocks).unwrap();
        let f = GroupFn::<f64>::random(spec.clone(), seed);
        let s = f.fourier();
        let mean_sq = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / spec.order() as f64;
        prop_assert!((s.energy() - mean_sq).abs() < 1e-9);
        for i in 1..=spec.n_blocks() {
            let a = group::group_influence(&f, i).unwrap();
            prop_assert!((a - group::group_influence_fourier(&s, i).unwrap()).abs() < 1e-9);
        }
        let back = s.inverse().unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn strong_value_at_most_weak(seed in any::<u64>(), vars in 2usize..6, q in 2usize..4, m in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = UniqueGame::random(3, vars, q, m, &mut rng).unwrap();
        let r = solve_unique_game(&g, G).unwrap();
        prop_assert!(r.strong_value <= r.weak_value);
        prop_assert_eq!(g.strong_value_of(&r.best_assignment), r.strong_value);
        prop_assert_eq!(g.weak_value_of(&r.best_weak_assignment), r.weak_value);
    }

    #[test]
    fn function_files_round_trip(n in 1usize..9, seed in any::<u64>(), sign in any::<bool>()) {
        let f = F::random(n, mode(sign), seed).unwrap();
        let text = serde_json::to_string(&FunctionFile::from_fn(&f)).unwrap();
        prop_assert_eq!(io::parse::<FunctionFile>(&text).unwrap().into_fn().unwrap(), f.clone());
        if let Some(hex) = FunctionFile::compact(&f) {
            let text = serde_json::to_string(&hex).unwrap();
            prop_assert_eq!(io::parse::<FunctionFile>(&text).unwrap().into_fn().unwrap(), f);
        }
    }

    #[test]
    fn collection_files_round_trip(n in 1usize..5, seed in any::<u64>(), d in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = (0..1 << d).map(|_| F::random_with(n, RandomMode::Sign, &mut rng).unwrap()).collect();
        let c = FnCollection::new(d, fs).unwrap();
        let text = serde_json::to_string(&CollectionFile::from_collection(&c)).unwrap();
        let back = io::parse::<CollectionFile>(&text).unwrap().into_collection().unwrap();
        prop_assert_eq!(back.entries(), c.entries());
    }
}
