//! Headline acceptance criteria. Each prints one PASS/FAIL line.

use std::time::{Duration, Instant};

use gowers_core::gf2::BitMatrix;
use gowers_core::gowers::{self, BaseCase};
use gowers_core::influence::max_influence;
use gowers_core::pcp::{self, ComposedVerifier, PcpProof};
use gowers_core::testing::{self, Hypergraph, LongCodeInputs};
use gowers_core::ugame::{solve_unique_game, Constraint, UniqueGame};
use gowers_core::verify::{verify_suite, Suite};
use gowers_core::{AcceptanceReport, BoolFn, Guard, RandomMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G: Guard = Guard::new(26);
const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: u64) -> Result<(), String> {
    check(elapsed < Duration::from_secs(limit), || format!("took {elapsed:?}, limit {limit} s"))
}

fn exact_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let f = BoolFn::<f64>::random_with(8, RandomMode::Sign, &mut rng).unwrap();
        let spec = f.fourier();
        let parseval = spec.coeffs().iter().map(|c| c * c).sum::<f64>();
        let mean_sq = f.values().iter().map(|v| v * v).sum::<f64>() / 256.0;
        let u1 = gowers::gowers_u_with_base(&f, 1, BaseCase::Mean, G).unwrap().value;
        let u2_mean = gowers::gowers_u_with_base(&f, 2, BaseCase::Mean, G).unwrap().value;
        let u2_spec: f64 = spec.coeffs().iter().map(|c| c.powi(4)).sum();
        let cubes: f64 = spec.coeffs().iter().map(|c| c.powi(3)).sum();
        let blr = testing::blr_by_enumeration(&f, G).unwrap().probability;
        for (what, a, b) in [
            ("parseval", parseval, mean_sq),
            ("U^1", u1, f.mean() * f.mean()),
            ("U^2", u2_mean, u2_spec),
            ("BLR", blr, 0.5 + 0.5 * cubes),
        ] {
            worst = worst.max((a - b).abs());
            check((a - b).abs() <= TOL, || format!("function {k}: {what} {a} vs {b}"))?;
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!("100 functions, worst gap {worst:.1e}, {:?}", start.elapsed()))
}

fn inequality_suite() -> Outcome {
    let start = Instant::now();
    let runs = [
        (Suite::InfluenceProducts, 8),
        (Suite::UniformityBounds, 6),
        (Suite::UniformityBounds, 5),
        (Suite::InnerProductBounds, 5),
        (Suite::InnerProductBounds, 8),
        (Suite::ComplexBounds, 1),
    ];
    let mut total = 0;
    for (suite, n) in runs {
        let r = verify_suite(suite, n, 50, 7, G).unwrap();
        if let Some(bad) = r.records.iter().find(|r| !r.pass) {
            return Err(format!("{suite} n = {n}: {} {} margin {}", bad.lemma, bad.descriptor, bad.margin));
        }
        total += r.summary.total;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{total} checks, {:?}", start.elapsed()))
}

fn tightness() -> Outcome {
    let f = BoolFn::<f64>::block_and(8, 2).unwrap();
    let u3 = gowers::gowers_u(&f, 3, G).unwrap().value;
    let u3_mean = gowers::gowers_u_with_base(&f, 3, BaseCase::Mean, G).unwrap().value;
    let inf = max_influence(&f);
    let u1 = gowers::gowers_u(&f, 1, G).unwrap().value;
    let u1_naive = gowers::gowers_u_naive(&f, 1, G).unwrap().value;
    check(u3 == 1.0 && u3_mean == 1.0, || format!("U^3 = {u3}, mean recursion {u3_mean}"))?;
    check(inf == 0.5, || format!("max influence {inf}"))?;
    check(u1 == u1_naive, || format!("U^1 routes disagree: {u1} vs {u1_naive}"))?;
    check(u1 <= 0.3, || format!("U^1 = {u1}"))?;
    Ok(format!("U^3 = 1, max influence = 0.5, U^1 = {u1}"))
}

fn hypertest_values() -> Outcome {
    let q = BoolFn::<f64>::quadratic_phase(2).unwrap();
    let c = BoolFn::<f64>::block_and(3, 3).unwrap();
    for (f, d, want) in [(&q, 2, 0.25), (&c, 3, 11.0 / 32.0)] {
        let a = gowers::gowers_u(f, d, G).unwrap().value;
        let b = gowers::gowers_u_naive(f, d, G).unwrap().value;
        check((a - want).abs() <= 1e-12 && (b - want).abs() <= 1e-12 && (a - b).abs() <= 1e-12, || {
            format!("d = {d}: recursion {a}, enumeration {b}, want {want}")
        })?;
    }
    let h = Hypergraph::complete(3, 3).unwrap();
    let f = BoolFn::<f64>::block_and(6, 3).unwrap();
    let p = testing::exact_h_test(&h, &f, G).unwrap().probability;
    let floor = 0.5f64.powi(h.num_edges() as i32).max(0.5f64.powi((testing::binomial(3, 2) + testing::binomial(3, 3)) as i32));
    check(floor == 0.0625 && p >= floor, || format!("H-test {p} vs floor {floor}"))?;
    Ok(format!("0.25 and 11/32 on both routes, H-test {p:.6} >= 0.0625"))
}

fn matrix_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let f = BoolFn::<f64>::random_with(5, RandomMode::Sign, &mut rng).unwrap();
        let a = BitMatrix::random_invertible(5, &mut rng);
        let fa = f.linear_transform(&a).unwrap();
        for d in 2..=3 {
            let (u, ua) = (gowers::gowers_u(&f, d, G).unwrap().value, gowers::gowers_u(&fa, d, G).unwrap().value);
            worst = worst.max((u - ua).abs());
            check((u - ua).abs() <= TOL, || format!("matrix {k}, d = {d}: {u} vs {ua}"))?;
        }
    }
    Ok(format!("20 matrices, worst gap {worst:.1e}"))
}

fn agrees(exact: f64, mc: &AcceptanceReport<f64>, what: &str) -> Result<(), String> {
    let n = mc.samples as f64;
    let sigma = (exact * (1.0 - exact) / n).sqrt();
    let ok = if sigma == 0.0 {
        mc.probability == exact
    } else {
        (mc.probability - exact).abs() <= 4.0 * sigma
    };
    check(ok, || format!("{what}: sampled {} vs exact {exact} (sigma {sigma:.2e})", mc.probability))
}

fn in_pool<R: Send>(threads: usize, job: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(job)
}

fn monte_carlo_calibration() -> Outcome {
    const N: u64 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut runs = 0;
    for k in 0..10u64 {
        let n = 3 + k as usize % 4;
        let f = BoolFn::<f64>::random_with(n, RandomMode::Sign, &mut rng).unwrap();
        let g = BoolFn::<f64>::random_with(n, RandomMode::Sign, &mut rng).unwrap();
        let h = if k % 2 == 0 { f.mul(&g).unwrap() } else { BoolFn::random_with(n, RandomMode::Sign, &mut rng).unwrap() };
        let delta = 0.05 * (k % 4) as f64;
        let gamma = 0.02 + 0.03 * (k % 3) as f64;

        let exact = testing::exact_blr(&f).unwrap().probability;
        agrees(exact, &testing::run_blr_mc(&f, N, k).unwrap(), &format!("BLR {k}"))?;

        let exact = testing::exact_3fn_blr(&f, &g, &h, delta).unwrap().probability;
        agrees(exact, &testing::run_3fn_blr_mc(&f, &g, &h, delta, N, k).unwrap(), &format!("3-function BLR {k}"))?;

        let graph = match k % 3 {
            0 => Hypergraph::complete_graph(3).unwrap(),
            1 => Hypergraph::complete(3, 3).unwrap(),
            _ => Hypergraph::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap(),
        };
        let block = BoolFn::<f64>::block_and(6, 2 + k as usize % 2).unwrap();
        let target = if k % 2 == 0 { &f } else { &block };
        let exact = testing::exact_h_test(&graph, target, G).unwrap().probability;
        agrees(exact, &testing::run_h_test_mc(&graph, target, N, k).unwrap(), &format!("H-test {k}"))?;

        let edge = Hypergraph::new(2, vec![vec![1, 2]]).unwrap();
        let slots = vec![
            BoolFn::long_code(n, 1).unwrap(),
            g.clone(),
            if k % 2 == 0 { BoolFn::long_code(n, 1).unwrap() } else { h.clone() },
        ];
        let inputs = LongCodeInputs::from_slots(&edge, slots).unwrap();
        let exact = testing::exact_noisy_h_test(&edge, gamma, &inputs, G).unwrap().probability;
        agrees(exact, &testing::run_noisy_h_test_mc(&edge, gamma, &inputs, N, k).unwrap(), &format!("noisy H-test {k}"))?;
        runs += 4;
    }
    let f = BoolFn::<f64>::random(6, RandomMode::Sign, 3).unwrap();
    let graph = Hypergraph::complete_graph(3).unwrap();
    let inputs = LongCodeInputs::uniform(&graph, &f).unwrap();
    let job = || {
        (
            testing::run_blr_mc(&f, N, 9).unwrap(),
            testing::run_h_test_mc(&graph, &f, N, 9).unwrap(),
            testing::run_noisy_h_test_mc(&graph, 0.1, &inputs, N, 9).unwrap(),
            gowers::gowers_u_mc(&f, 3, N, 9).unwrap(),
        )
    };
    let (one, eight) = (in_pool(1, job), in_pool(8, job));
    check(one == eight, || "estimates differ between 1 and 8 threads".into())?;
    Ok(format!("{runs} runs within 4 sigma, identical under 1 and 8 threads"))
}

fn unique_games() -> Outcome {
    let id = vec![0, 1, 2];
    let g = UniqueGame::binary(
        3,
        (1..=4).map(|i| format!("v{i}")).collect(),
        vec![(0, 2, vec![2, 1, 0]), (1, 2, vec![0, 2, 1]), (1, 0, id), (1, 3, vec![1, 2, 0])],
    )
    .unwrap();
    let r = solve_unique_game(&g, G).unwrap();
    check(r.strong_value == 0.75, || format!("example value {}", r.strong_value))?;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..100 {
        let vars = 2 + k % 5;
        let g = UniqueGame::random(3, vars, 2 + k % 3, 1 + k % 8, &mut rng).unwrap();
        let r = solve_unique_game(&g, G).unwrap();
        check(r.strong_value <= r.weak_value, || format!("instance {k}: {} > {}", r.strong_value, r.weak_value))?;
    }
    Ok("example value 3/4, strong <= weak on 100 instances".into())
}

/// Ternary constraints all strongly satisfied by `a`.
fn satisfiable_game(sigma: usize, a: &[usize], m: usize, rng: &mut ChaCha8Rng) -> UniqueGame {
    let constraints = (0..m)
        .map(|_| {
            let vars: Vec<usize> = (0..3).map(|_| rng.random_range(0..a.len())).collect();
            let target = rng.random_range(0..sigma);
            let perms = vars
                .iter()
                .map(|&v| {
                    let mut p: Vec<usize> = (0..sigma).collect();
                    for i in (1..sigma).rev() {
                        p.swap(i, rng.random_range(0..=i));
                    }
                    let at = p.iter().position(|&x| x == target).unwrap();
                    p.swap(at, a[v]);
                    p
                })
                .collect();
            Constraint { vars, perms }
        })
        .collect();
    UniqueGame::new(sigma, (0..a.len()).map(|i| format!("x{i}")).collect(), constraints).unwrap()
}

fn completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let a: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
    let g = satisfiable_game(4, &a, 8, &mut rng);
    check(solve_unique_game(&g, G).unwrap().strong_value == 1.0, || "game is not satisfiable".into())?;
    let proof: PcpProof<f64> = pcp::honest_proof(&g, &a).unwrap();
    let h = Hypergraph::new(2, vec![vec![1, 2]]).unwrap();
    let v = ComposedVerifier::new(&g, &proof, &h, 0.05).unwrap();
    let per = v.exact_per_constraint(G).unwrap();
    let want = 0.5 * (1.0 + 0.9f64.powi(3));
    check(per.iter().all(|p| (p - want).abs() <= TOL), || format!("per-constraint {per:?}"))?;
    let bound = 1.0 - 3.0 * 0.05;
    check(want >= bound, || format!("{want} < {bound}"))?;
    let r = v.run(100_000, 5).unwrap();
    agrees(want, &r, "composed verifier")?;
    within(start.elapsed(), 30)?;
    Ok(format!("sampled {:.5} vs exact {want:.4} >= {bound:.2}, {:?}", r.probability, start.elapsed()))
}

fn decoder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let sigma = 6;
    let a: Vec<usize> = (0..100).map(|_| rng.random_range(0..sigma)).collect();
    let g = satisfiable_game(sigma, &a, 40, &mut rng);
    let proof: PcpProof<f64> = pcp::honest_proof(&g, &a).unwrap();
    let (d, tau) = (3, 0.2);
    let dec = pcp::decode(&proof, d, tau, 1).unwrap();
    let errors = dec.assignment.iter().zip(&a).filter(|(x, y)| x != y).count();
    check(errors == 0, || format!("{errors} decoding errors"))?;
    let largest = dec.candidates.iter().map(Vec::len).max().unwrap();
    check(largest as f64 <= d as f64 / tau, || format!("candidate set of size {largest}"))?;
    let noisy = pcp::random_proof::<f64>(&g, 4).unwrap();
    let dec = pcp::decode(&noisy, d, tau, 1).unwrap();
    let largest_random = dec.candidates.iter().map(Vec::len).max().unwrap();
    check(largest_random as f64 <= d as f64 / tau, || format!("random proof candidate set of size {largest_random}"))?;
    Ok(format!("100 variables, 0 errors, largest candidate set {largest} (random proof {largest_random})"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 exact identities", exact_identities),
        ("2 inequality suite", inequality_suite),
        ("3 block-AND tightness", tightness),
        ("4 hypergraph test values", hypertest_values),
        ("5 matrix invariance", matrix_invariance),
        ("6 Monte Carlo calibration", monte_carlo_calibration),
        ("7 unique games", unique_games),
        ("8 composition completeness", completeness),
        ("9 decoder", decoder),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
