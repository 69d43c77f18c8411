//! Seeded verification suites: every check is an inequality `lhs <= rhs`
//! or an identity (recorded as `lhs = |a - b|`, `rhs = 0`), evaluated on
//! generated instances.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolfn::{BoolFn, RandomMode};
use crate::error::{invalid, Error, Result};
use crate::gf2::{self, BitMatrix};
use crate::gowers::{self, FnCollection};
use crate::group::{self, GroupFn, GroupSpec};
use crate::influence::{influence, influences, max_influence};
use crate::mc::round_rng;
use crate::report::{format_float, CsvRows};
use crate::testing::{self, Hypergraph, LongCodeInputs};
use crate::Guard;

/// Slack allowed on every margin.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    InfluenceProducts,
    UniformityBounds,
    InnerProductBounds,
    ComplexBounds,
    TestIdentities,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::InfluenceProducts,
        Suite::UniformityBounds,
        Suite::InnerProductBounds,
        Suite::ComplexBounds,
        Suite::TestIdentities,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::InfluenceProducts => "influence_products",
            Suite::UniformityBounds => "uniformity_bounds",
            Suite::InnerProductBounds => "inner_product_bounds",
            Suite::ComplexBounds => "complex_bounds",
            Suite::TestIdentities => "test_identities",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub lemma: String,
    pub instance: usize,
    pub descriptor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

impl CsvRows for VerifyReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["suite", "lemma", "instance", "descriptor", "lhs", "rhs", "margin", "pass"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    self.suite.id().to_string(),
                    r.lemma.clone(),
                    r.instance.to_string(),
                    r.descriptor.clone(),
                    format_float(r.lhs),
                    format_float(r.rhs),
                    format_float(r.margin),
                    r.pass.to_string(),
                ]
            })
            .collect()
    }
}

#[derive(Default)]
struct Log {
    records: Vec<CheckRecord>,
}

impl Log {
    fn le(&mut self, lemma: &str, descriptor: String, lhs: f64, rhs: f64) {
        let margin = rhs - lhs;
        self.records.push(CheckRecord {
            lemma: lemma.to_string(),
            instance: 0,
            descriptor,
            lhs,
            rhs,
            margin,
            pass: margin >= -TOLERANCE,
        });
    }

    fn eq(&mut self, lemma: &str, descriptor: String, a: f64, b: f64) {
        let descriptor = format!("{descriptor}: {} vs {}", format_float(a), format_float(b));
        self.le(lemma, descriptor, (a - b).abs(), 0.0);
    }

    fn finish(mut self, suite: Suite, n: usize, trials: usize, seed: u64) -> VerifyReport {
        self.records.sort_by(|a, b| a.lemma.cmp(&b.lemma));
        let mut last = String::new();
        let mut k = 0;
        for r in &mut self.records {
            if r.lemma != last {
                last = r.lemma.clone();
                k = 0;
            }
            r.instance = k;
            k += 1;
        }
        let passed = self.records.iter().filter(|r| r.pass).count();
        let total = self.records.len();
        VerifyReport {
            suite,
            n,
            trials,
            seed,
            records: self.records,
            summary: Summary {
                total,
                passed,
                failed: total - passed,
            },
        }
    }
}

/// Runs one suite. `n` is the arity of generated cube functions and
/// `trials` the number of random instances per check.
pub fn verify_suite(suite: Suite, n: usize, trials: usize, seed: u64, guard: Guard) -> Result<VerifyReport> {
    if n == 0 || n > 12 {
        return invalid(format!("arity {n} outside 1..=12"));
    }
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let mut log = Log::default();
    match suite {
        Suite::InfluenceProducts => influence_products(&mut log, n, trials, seed)?,
        Suite::UniformityBounds => uniformity_bounds(&mut log, n, trials, seed, guard)?,
        Suite::InnerProductBounds => inner_product_bounds(&mut log, n, trials, seed, guard)?,
        Suite::ComplexBounds => complex_bounds(&mut log, trials, seed, guard)?,
        Suite::TestIdentities => test_identities(&mut log, n, trials, seed, guard)?,
    }
    Ok(log.finish(suite, n, trials, seed))
}

fn product(fs: &[BoolFn<f64>]) -> BoolFn<f64> {
    fs[1..].iter().fold(fs[0].clone(), |p, f| p.mul(f).expect("same arity"))
}

fn influence_products(log: &mut Log, n: usize, trials: usize, seed: u64) -> Result<()> {
    let mut rng = round_rng(seed, 1);
    for trial in 0..trials {
        let k = 2 + trial % 4;
        for (lemma, mode, factor) in [
            ("product_influence_sign", RandomMode::Sign, 1.0),
            ("product_influence_bounded", RandomMode::Bounded, k as f64),
        ] {
            let fs: Vec<BoolFn<f64>> = (0..k)
                .map(|_| BoolFn::random_with(n, mode, &mut rng))
                .collect::<Result<_>>()?;
            let prod = influences(&product(&fs));
            let each: Vec<Vec<f64>> = fs.iter().map(influences).collect();
            for i in 0..n {
                let sum: f64 = each.iter().map(|v| v[i]).sum();
                log.le(lemma, format!("trial {trial}, k = {k}, i = {}", i + 1), prod[i], factor * sum);
            }
        }
        let a: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let lhs = (a.iter().product::<f64>() - b.iter().product::<f64>()).abs();
        let rhs: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        log.le("hybrid_product_difference", format!("trial {trial}, k = {k}"), lhs, rhs);

        let f = BoolFn::random_with(n, if trial % 2 == 0 { RandomMode::Sign } else { RandomMode::Bounded }, &mut rng)?;
        let spec = f.fourier();
        let top = spec.coeffs()[1..].iter().map(|c| c * c).fold(0.0, f64::max);
        log.le("fourier_influence_floor", format!("trial {trial}"), top, max_influence(&f));
    }
    for k in 2..=5 {
        let eps = 1e-3;
        let f = BoolFn::from_values(1, vec![1.0 - eps, 1.0])?;
        let prod = product(&vec![f.clone(); k]);
        let ratio = influence(&prod, 1)? / (k as f64 * influence(&f, 1)?);
        log.le("product_influence_near_tight", format!("k = {k}, eps = {eps}"), 0.9 * k as f64, ratio);
    }
    Ok(())
}

fn uniformity_bounds(log: &mut Log, n: usize, trials: usize, seed: u64, guard: Guard) -> Result<()> {
    let mut rng = round_rng(seed, 2);
    let dims: Vec<usize> = (1..=4).filter(|&d| guard.check("", n * d).is_ok()).collect();
    let mut family: Vec<(String, BoolFn<f64>, RandomMode)> = Vec::new();
    for trial in 0..trials {
        family.push((format!("random sign {trial}"), BoolFn::random_with(n, RandomMode::Sign, &mut rng)?, RandomMode::Sign));
        family.push((format!("random bounded {trial}"), BoolFn::random_with(n, RandomMode::Bounded, &mut rng)?, RandomMode::Bounded));
    }
    family.push(("chi_all".into(), BoolFn::chi(n, (1 << n) - 1)?, RandomMode::Sign));
    family.push(("dictator 1".into(), BoolFn::long_code(n, 1)?, RandomMode::Sign));
    if n.is_multiple_of(2) {
        family.push(("quadratic phase".into(), BoolFn::quadratic_phase(n)?, RandomMode::Sign));
    }
    for b in 2..=n {
        if n.is_multiple_of(b) {
            family.push((format!("block and b = {b}"), BoolFn::block_and(n, b)?, RandomMode::Sign));
        }
    }
    for (name, f, mode) in &family {
        let u1 = f.mean() * f.mean();
        let inf = max_influence(f);
        let spec = f.fourier();
        let mut prev = None;
        for &d in &dims {
            let u = gowers::gowers_u(f, d, guard)?.value;
            log.le("uniformity_nonnegative", format!("{name}, d = {d}"), -u, 0.0);
            match mode {
                RandomMode::Sign => log.le(
                    "uniformity_influence_sign",
                    format!("{name}, d = {d}"),
                    u,
                    u1 + ((1u64 << (d - 1)) - 1) as f64 * inf,
                ),
                RandomMode::Bounded => log.le(
                    "uniformity_influence_bounded",
                    format!("{name}, d = {d}"),
                    u,
                    u1 + 4f64.powi(d as i32) * inf,
                ),
            }
            if d == 1 {
                log.eq("uniformity_base_u1", name.clone(), u, u1);
            }
            if d == 2 {
                let u2: f64 = spec.coeffs().iter().map(|c| c.powi(4)).sum();
                let mean_route = gowers::gowers_u_with_base(f, 2, gowers::BaseCase::Mean, guard)?.value;
                log.eq("uniformity_base_u2", format!("{name}, spectrum"), u, u2);
                log.eq("uniformity_base_u2", format!("{name}, mean recursion"), mean_route, u2);
            }
            if let Some(p) = prev {
                log.le("uniformity_monotone", format!("{name}, d = {d}"), p, u.max(0.0).sqrt());
            }
            prev = Some(u);
        }
    }
    for d in 3..=4usize {
        let b = d - 1;
        let nn = 2 * b;
        if guard.check("", nn * d).is_err() {
            continue;
        }
        let f = BoolFn::block_and(nn, b)?;
        let u = gowers::gowers_u(&f, d, guard)?.value;
        log.eq("uniformity_tightness_value", format!("block and n = {nn}, b = {b}, d = {d}"), u, 1.0);
        let want = 0.5f64.powi(d as i32 - 2);
        log.eq("uniformity_tightness_influence", format!("block and n = {nn}, b = {b}, d = {d}"), max_influence(&f), want);
    }
    let mut rng = round_rng(seed, 3);
    for trial in 0..trials {
        let f = BoolFn::random_with(n, RandomMode::Sign, &mut rng)?;
        let a = BitMatrix::random_invertible(n, &mut rng);
        let fa = f.linear_transform(&a)?;
        for &d in dims.iter().filter(|&&d| (2..=3).contains(&d)) {
            let (u, ua) = (gowers::gowers_u(&f, d, guard)?.value, gowers::gowers_u(&fa, d, guard)?.value);
            log.eq("uniformity_matrix_invariance", format!("trial {trial}, d = {d}"), ua, u);
        }
    }
    Ok(())
}

fn random_collection(n: usize, d: usize, mode: RandomMode, rng: &mut ChaCha8Rng) -> Result<FnCollection<f64>> {
    let fs = (0..1 << d).map(|_| BoolFn::random_with(n, mode, rng)).collect::<Result<_>>()?;
    FnCollection::new(d, fs)
}

fn inner_product_bounds(log: &mut Log, n: usize, trials: usize, seed: u64, guard: Guard) -> Result<()> {
    let mut rng = round_rng(seed, 4);
    for trial in 0..trials {
        for d in 2..=3usize {
            if guard.check("", n * d).is_err() {
                continue;
            }
            let mode = if trial % 2 == 0 { RandomMode::Sign } else { RandomMode::Bounded };
            let c = random_collection(n, d, mode, &mut rng)?;
            let ip = gowers::gowers_ip(&c, guard)?.value;
            let bound: f64 = c
                .entries()
                .iter()
                .map(|f| Ok(gowers::gowers_u(f, d, guard)?.value.max(0.0).powf(0.5f64.powi(d as i32))))
                .product::<Result<f64>>()?;
            log.le("gowers_cauchy_schwarz", format!("trial {trial}, d = {d}"), ip.abs(), bound);
            if n * (d + 1) <= 20 {
                let naive = gowers::gowers_ip_naive(&c, guard)?.value;
                log.eq("inner_product_routes", format!("trial {trial}, d = {d}"), ip, naive);
            }
            let s = random_collection(n, d, RandomMode::Sign, &mut rng)?;
            let lip = gowers::linear_gowers_ip(&s, guard)?.value;
            let lifted = gowers::gowers_ip(&gowers::lift_linear_to_gowers(&s), guard)?.value;
            log.le("linear_ip_lift", format!("trial {trial}, d = {d}"), lip.abs(), lifted.max(0.0).sqrt());
        }
        let fs: Vec<BoolFn<f64>> = (0..4)
            .map(|_| BoolFn::random_with(n, RandomMode::Bounded, &mut rng))
            .collect::<Result<_>>()?;
        let (lhs, rhs) = gowers::four_function_sides([&fs[0], &fs[1], &fs[2], &fs[3]])?;
        log.le("four_function_bound", format!("trial {trial}"), lhs, rhs);
    }
    Ok(())
}

fn complex_groups() -> Result<Vec<(String, GroupSpec)>> {
    [
        ("Z3^4", vec![vec![3]; 4]),
        ("Z9 x Z9", vec![vec![9], vec![9]]),
        ("(Z2 x Z2) x Z5 x Z4", vec![vec![2, 2], vec![5], vec![4]]),
        ("Z3 x Z3", vec![vec![3], vec![3]]),
    ]
    .into_iter()
    .map(|(name, blocks)| Ok((name.to_string(), GroupSpec::new(blocks)?)))
    .collect()
}

fn complex_bounds(log: &mut Log, trials: usize, seed: u64, guard: Guard) -> Result<()> {
    let mut rng = round_rng(seed, 5);
    let kfold = 3f64.log2();
    for (name, spec) in complex_groups()? {
        for trial in 0..trials {
            let fs: Vec<GroupFn<f64>> = (0..4).map(|_| GroupFn::random_with(spec.clone(), &mut rng)).collect();
            let fg = fs[0].mul(&fs[1])?;
            log.le(
                "complex_variance_product",
                format!("{name}, trial {trial}"),
                fg.variance(),
                3.0 * (fs[0].variance() + fs[1].variance()),
            );
            for i in 1..=spec.n_blocks() {
                let inf = |f: &GroupFn<f64>| group::group_influence(f, i);
                log.le(
                    "complex_influence_product",
                    format!("{name}, trial {trial}, block {i}"),
                    inf(&fg)?,
                    3.0 * (inf(&fs[0])? + inf(&fs[1])?),
                );
                let mut prod = fs[0].clone();
                let mut sum = inf(&fs[0])?;
                for (j, f) in fs.iter().enumerate().skip(1) {
                    prod = prod.mul(f)?;
                    sum += inf(f)?;
                    let k = j + 1;
                    log.le(
                        "complex_kfold_product",
                        format!("{name}, trial {trial}, block {i}, k = {k}"),
                        inf(&prod)?,
                        3.0 * (k as f64).powf(kfold) * sum,
                    );
                }
            }
            let f = &fs[0];
            let sp = f.fourier();
            let mean_sq = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / spec.order() as f64;
            log.eq("complex_parseval", format!("{name}, trial {trial}"), sp.energy(), mean_sq);
            for i in 1..=spec.n_blocks() {
                log.eq(
                    "complex_influence_routes",
                    format!("{name}, trial {trial}, block {i}"),
                    group::group_influence(f, i)?,
                    group::group_influence_fourier(&sp, i)?,
                );
            }
        }
        let c = Complex::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
        let k = GroupFn::constant(spec.clone(), c)?;
        for d in 1..=3usize {
            if guard.check("", spec.log2_order() * d).is_err() {
                continue;
            }
            log.eq(
                "complex_constant_uniformity",
                format!("{name}, d = {d}"),
                group::group_gowers_u(&k, d, guard)?,
                c.norm().powi(1 << d),
            );
        }
        for trial in 0..trials {
            let b = 1 + trial % spec.n_blocks();
            let fs: Vec<GroupFn<f64>> = (0..3).map(|_| planted(&spec, b, &mut rng)).collect::<Result<_>>()?;
            let (found, value) = group::group_find_influential(&fs, 2)?;
            log.eq(
                "complex_planted_witness",
                format!("{name}, trial {trial}, planted block {b}, found {found} at {}", format_float(value)),
                found as f64,
                b as f64,
            );
        }
    }
    Ok(())
}

/// `0.8 r(x_b) + 0.2 s(x)` with `r`, `s` random on the unit disk.
fn planted(spec: &GroupSpec, b: usize, rng: &mut ChaCha8Rng) -> Result<GroupFn<f64>> {
    let start: usize = spec.blocks()[..b - 1].iter().map(Vec::len).sum();
    let len = spec.blocks()[b - 1].len();
    let size: usize = spec.blocks()[b - 1].iter().product();
    let r = GroupFn::random_with(GroupSpec::new(vec![spec.blocks()[b - 1].clone()])?, rng);
    let s = GroupFn::random_with(spec.clone(), rng);
    let values = (0..spec.order())
        .map(|x| {
            let digits = spec.digits(x);
            let part = digits[start..start + len]
                .iter()
                .zip(&spec.moduli()[start..start + len])
                .rev()
                .fold(0, |acc, (&d, &m)| acc * m + d);
            debug_assert!(part < size);
            r.at(part) * 0.8 + s.at(x) * 0.2
        })
        .collect();
    GroupFn::from_values(spec.clone(), values)
}

/// `Pr[d uniform vectors of GF(2)^d are independent]` by counting tuples.
pub fn independence_probability(d: usize) -> f64 {
    let tuples = 1usize << (d * d);
    let full = (0..tuples)
        .filter(|&t| {
            let rows = (0..d).map(|i| vec![((t >> (d * i)) & ((1 << d) - 1)) as u64]).collect();
            gf2::rank(rows) == d
        })
        .count();
    full as f64 / tuples as f64
}

fn test_identities(log: &mut Log, n: usize, trials: usize, seed: u64, guard: Guard) -> Result<()> {
    let mut rng = round_rng(seed, 6);
    for trial in 0..trials {
        let f = BoolFn::random_with(n, RandomMode::Sign, &mut rng)?;
        if guard.check("", 2 * n).is_ok() {
            log.eq(
                "blr_routes",
                format!("trial {trial}"),
                testing::exact_blr(&f)?.probability,
                testing::blr_by_enumeration(&f, guard)?.probability,
            );
        }
    }
    for delta in [0.0, 0.05, 0.1, 0.25] {
        let l = BoolFn::long_code(n, 1)?;
        log.eq(
            "blr3_noisy_closed_form",
            format!("long code, delta = {delta}"),
            testing::exact_3fn_blr(&l, &l, &l, delta)?.probability,
            0.5 * (1.0 + (1.0 - 2.0 * delta).powi(3)),
        );
    }
    for d in 2..=3usize {
        for m in 1..=2usize {
            let f = BoolFn::block_and(d * m, d)?;
            let want = (1.0 - 2.0 * independence_probability(d)).powi(m as i32);
            let a = gowers::gowers_u(&f, d, guard)?.value;
            let b = gowers::gowers_u_naive(&f, d, guard)?.value;
            log.eq("block_and_uniformity_formula", format!("d = {d}, m = {m}, recursion"), a, want);
            log.eq("block_and_uniformity_formula", format!("d = {d}, m = {m}, enumeration"), b, want);
        }
    }
    let graphs = [
        ("single edge", Hypergraph::new(2, vec![vec![1, 2]])?, 2usize),
        ("triangle", Hypergraph::complete_graph(3)?, 2),
        ("complete 3-uniform on 3", Hypergraph::complete(3, 3)?, 3),
        ("path", Hypergraph::new(3, vec![vec![1, 2], vec![2, 3]])?, 2),
        ("complete graph on 4", Hypergraph::complete_graph(4)?, 2),
    ];
    for (name, h, d) in &graphs {
        let covers = testing::even_cover_count(h, *d, guard)?;
        log.le("even_cover_dimension", name.to_string(), covers.dimension as f64, h.num_edges() as f64);
        log.le("even_cover_count_bound", name.to_string(), covers.lower_bound, covers.count as f64);
        let m = if d * 2 <= 6 { 2 } else { 1 };
        let f = BoolFn::block_and(d * m, *d)?;
        if guard.check("", f.n() * h.t()).is_err() {
            continue;
        }
        let r = testing::exact_h_test(h, &f, guard)?;
        let terms = r.terms.as_ref().expect("exact reports carry terms");
        for &s in &covers.subsets {
            log.eq("even_cover_terms", format!("{name}, subset {s:#b}"), terms[s], 1.0);
        }
        let worst = terms.iter().copied().fold(f64::INFINITY, f64::min);
        log.le("block_and_terms_nonnegative", name.to_string(), -worst, 0.0);
        log.eq("h_test_expansion", format!("{name}, block and"), r.probability, r.expansion().unwrap_or(f64::NAN));
        let budget: u64 = (2..=*d).map(|i| testing::binomial(h.t(), i)).sum();
        let floor = 0.5f64.powi(h.num_edges() as i32).max(0.5f64.powi(budget as i32));
        log.le("hypertest_acceptance_floor", name.to_string(), floor, r.probability);
    }
    let mut rng = round_rng(seed, 7);
    let small = n.min(5);
    for (k, (name, h, _)) in graphs.iter().enumerate().take(4) {
        let slots: Vec<BoolFn<f64>> = (0..h.queries())
            .map(|j| {
                if j % 2 == 0 {
                    BoolFn::long_code(small, 1 + k % small)
                } else {
                    BoolFn::random_with(small, RandomMode::Sign, &mut rng)
                }
            })
            .collect::<Result<_>>()?;
        let inputs = LongCodeInputs::from_slots(h, slots)?;
        let r = testing::exact_noisy_h_test(h, 0.1, &inputs, guard)?;
        log.eq("noisy_h_test_expansion", name.to_string(), r.probability, r.expansion().unwrap_or(f64::NAN));
    }
    Ok(())
}
