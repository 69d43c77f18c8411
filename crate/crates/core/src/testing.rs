//! Linearity tests and hypergraph long-code tests: exact acceptance
//! probabilities and seeded simulations.
//!
//! Exact hypergraph acceptance uses the XOR expansion
//! `Pr[all X_e = 1] = 2^{-|E|} sum_{E' in E} E[prod_{e in E'} X_e]`;
//! the per-subset expectations are reported as `terms`, indexed by the
//! bit mask of `E'` over the edge list.

use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::{check_noise, sample_mu_gamma, sample_point, BoolFn};
use crate::error::{invalid, Result};
use crate::fourier::fwht_in_place;
use crate::gf2;
use crate::gowers::Method;
use crate::mc;
use crate::scalar::Scalar;
use crate::Guard;

/// Largest edge count for which exact acceptance and cover enumeration run.
pub const MAX_EDGES: usize = 20;

/// `H = ([t], E)` with 1-based vertices; every edge has at least two vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    t: usize,
    edges: Vec<Vec<usize>>,
    masks: Vec<usize>,
}

impl Hypergraph {
    pub fn new(t: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if t == 0 || t > 24 {
            return invalid(format!("vertex count {t} outside 1..=24"));
        }
        let mut masks = Vec::with_capacity(edges.len());
        let mut sorted = Vec::with_capacity(edges.len());
        for e in edges {
            let mut e = e;
            e.sort_unstable();
            if e.len() < 2 {
                return invalid(format!("edge {e:?} has fewer than two vertices"));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("edge {e:?} repeats a vertex"));
            }
            if let Some(v) = e.iter().find(|&&v| v == 0 || v > t) {
                return invalid(format!("vertex {v} outside 1..={t}"));
            }
            let m = e.iter().fold(0usize, |m, &v| m | 1 << (v - 1));
            if masks.contains(&m) {
                return invalid(format!("duplicate edge {e:?}"));
            }
            masks.push(m);
            sorted.push(e);
        }
        Ok(Hypergraph {
            t,
            edges: sorted,
            masks,
        })
    }

    /// All edges `{i, j}` on `k` vertices.
    pub fn complete_graph(k: usize) -> Result<Self> {
        Self::complete(k, 2)
    }

    /// All subsets of `[k]` with between 2 and `max_size` vertices, ordered
    /// by size and then lexicographically.
    pub fn complete(k: usize, max_size: usize) -> Result<Self> {
        if k == 0 || k > 24 {
            return invalid(format!("vertex count {k} outside 1..=24"));
        }
        let mut edges: Vec<Vec<usize>> = Vec::new();
        for size in 2..=max_size.min(k) {
            let mut sets: Vec<Vec<usize>> = (0usize..1 << k)
                .filter(|m| m.count_ones() as usize == size)
                .map(|m| (0..k).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
                .collect();
            sets.sort();
            edges.extend(sets);
        }
        Self::new(k, edges)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Vertex masks of the edges (vertex `i` is bit `i - 1`).
    pub fn edge_masks(&self) -> &[usize] {
        &self.masks
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Queries made by one round of the plain test: `t + |E|`.
    pub fn queries(&self) -> usize {
        self.t + self.edges.len()
    }

    /// Largest edge size.
    pub fn rank(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertices of odd degree in the sub-hypergraph `E'`, for every `E'`.
    fn odd_vertices(&self) -> Vec<usize> {
        let mut odd = vec![0usize; 1 << self.masks.len()];
        for s in 1..odd.len() {
            let low = s.trailing_zeros() as usize;
            odd[s] = odd[s & (s - 1)] ^ self.masks[low];
        }
        odd
    }

    fn check_edge_count(&self) -> Result<()> {
        if self.edges.len() > MAX_EDGES {
            return invalid(format!("{} edges exceed the limit of {MAX_EDGES}", self.edges.len()));
        }
        Ok(())
    }
}

/// The functions `{g^a}` for `a` in `[t]` followed by the edges in order.
#[derive(Clone, Debug, PartialEq)]
pub struct LongCodeInputs<T> {
    vertices: Vec<BoolFn<T>>,
    edges: Vec<BoolFn<T>>,
}

impl<T: Scalar> LongCodeInputs<T> {
    pub fn new(h: &Hypergraph, vertices: Vec<BoolFn<T>>, edges: Vec<BoolFn<T>>) -> Result<Self> {
        if vertices.len() != h.t() || edges.len() != h.num_edges() {
            return invalid(format!(
                "hypergraph needs {} vertex and {} edge functions, got {} and {}",
                h.t(),
                h.num_edges(),
                vertices.len(),
                edges.len()
            ));
        }
        let all: Vec<&BoolFn<T>> = vertices.iter().chain(&edges).collect();
        for f in &all {
            all[0].same_arity(f)?;
            if !f.is_sign() {
                return invalid("long-code test inputs must be sign-valued");
            }
        }
        Ok(LongCodeInputs { vertices, edges })
    }

    /// Slots filled in order: vertices first, then edges.
    pub fn from_slots(h: &Hypergraph, mut slots: Vec<BoolFn<T>>) -> Result<Self> {
        if slots.len() != h.queries() {
            return invalid(format!("hypergraph needs {} functions, got {}", h.queries(), slots.len()));
        }
        let edges = slots.split_off(h.t());
        Self::new(h, slots, edges)
    }

    pub fn uniform(h: &Hypergraph, f: &BoolFn<T>) -> Result<Self> {
        Self::new(h, vec![f.clone(); h.t()], vec![f.clone(); h.num_edges()])
    }

    pub fn vertices(&self) -> &[BoolFn<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[BoolFn<T>] {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.vertices[0].n()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceReport<T> {
    pub probability: T,
    pub method: Method,
    pub samples: u64,
    pub stderr: T,
    /// `E[prod_{e in E'} X_e]` indexed by the mask of `E'`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<T>>,
}

impl<T: Scalar> AcceptanceReport<T> {
    fn exact(probability: T, terms: Option<Vec<T>>) -> Self {
        AcceptanceReport {
            probability,
            method: Method::Exact,
            samples: 0,
            stderr: T::zero(),
            terms,
        }
    }

    fn estimated(e: mc::Estimate<T>) -> Self {
        AcceptanceReport {
            probability: e.mean,
            method: Method::MonteCarlo,
            samples: e.samples,
            stderr: e.stderr,
            terms: None,
        }
    }

    /// `2^{-|E|} sum terms`, when terms are present.
    pub fn expansion(&self) -> Option<T> {
        self.terms
            .as_ref()
            .map(|t| t.iter().copied().sum::<T>() / T::of_usize(t.len()))
    }
}

fn require_sign<T: Scalar>(fs: &[&BoolFn<T>]) -> Result<()> {
    for f in &fs[1..] {
        fs[0].same_arity(f)?;
    }
    if fs.iter().any(|f| !f.is_sign()) {
        return invalid("the test is defined for sign-valued functions");
    }
    Ok(())
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return invalid("at least one sample is required");
    }
    Ok(())
}

/// `1/2 + 1/2 sum_S f^(S)^3`.
pub fn exact_blr<T: Scalar>(f: &BoolFn<T>) -> Result<AcceptanceReport<T>> {
    exact_3fn_blr(f, f, f, T::zero())
}

/// Acceptance of the BLR test by counting all `(x, y)` pairs.
pub fn blr_by_enumeration<T: Scalar>(f: &BoolFn<T>, guard: Guard) -> Result<AcceptanceReport<T>> {
    require_sign(&[f])?;
    guard.check("BLR enumeration", 2 * f.n())?;
    let len = f.len();
    let hits: u64 = (0..len)
        .into_par_iter()
        .map(|x| (0..len).filter(|&y| f.at(x) * f.at(y) == f.at(x ^ y)).count() as u64)
        .sum();
    let p = T::from_u64(hits).expect("count fits") / T::of_usize(len * len);
    Ok(AcceptanceReport::exact(p, None))
}

/// Three-function test `f(x + eta_1) g(y + eta_2) = h(x + y + eta_3)` with
/// `eta_j ~ mu_delta`: `1/2 + 1/2 sum_S F^(S) G^(S) H^(S)` for the noised
/// functions.
pub fn exact_3fn_blr<T: Scalar>(f: &BoolFn<T>, g: &BoolFn<T>, h: &BoolFn<T>, delta: T) -> Result<AcceptanceReport<T>> {
    require_sign(&[f, g, h])?;
    check_noise(delta)?;
    let rho = T::one() - (delta + delta);
    let (a, b, c) = (f.fourier(), g.fourier(), h.fourier());
    let corr: T = (0..f.len())
        .map(|s| rho.powi(3 * s.count_ones() as i32) * a.at(s) * b.at(s) * c.at(s))
        .sum();
    let half = T::of(0.5);
    Ok(AcceptanceReport::exact(half + half * corr, None))
}

pub fn run_blr_mc<T: Scalar>(f: &BoolFn<T>, samples: u64, seed: u64) -> Result<AcceptanceReport<T>> {
    run_3fn_blr_mc(f, f, f, T::zero(), samples, seed)
}

pub fn run_3fn_blr_mc<T: Scalar>(
    f: &BoolFn<T>,
    g: &BoolFn<T>,
    h: &BoolFn<T>,
    delta: T,
    samples: u64,
    seed: u64,
) -> Result<AcceptanceReport<T>> {
    require_sign(&[f, g, h])?;
    check_noise(delta)?;
    check_samples(samples)?;
    let (n, delta) = (f.n(), delta.as_f64());
    let est = mc::estimate_probability(samples, seed, |rng| {
        let x = sample_point(n, rng);
        let y = sample_point(n, rng);
        let e1 = sample_mu_gamma(n, delta, rng);
        let e2 = sample_mu_gamma(n, delta, rng);
        let e3 = sample_mu_gamma(n, delta, rng);
        f.at(x ^ e1) * g.at(y ^ e2) == h.at(x ^ y ^ e3)
    });
    Ok(AcceptanceReport::estimated(est))
}

/// Calls `visit(sums)` for every tuple `(x^1..x^t)`, where `sums[m]` is the
/// XOR of `x^i` over vertices `i` in `m`. Work is split over `x^1` and the
/// per-split accumulators are returned in order.
fn for_each_tuple<A, F>(n: usize, t: usize, init: impl Fn() -> A + Sync, visit: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut A, &[usize]) + Sync,
{
    let len = 1usize << n;
    (0..len)
        .into_par_iter()
        .map(|x1| {
            let mut acc = init();
            let mut xs = vec![0usize; t];
            xs[0] = x1;
            let mut sums = vec![0usize; 1 << t];
            'tuples: loop {
                for s in 1..sums.len() {
                    let low = s.trailing_zeros() as usize;
                    sums[s] = sums[s & (s - 1)] ^ xs[low];
                }
                visit(&mut acc, &sums);
                for x in xs.iter_mut().skip(1) {
                    *x += 1;
                    if *x < len {
                        continue 'tuples;
                    }
                    *x = 0;
                }
                break acc;
            }
        })
        .collect()
}

/// Exact acceptance of the `H`-test on a sign function.
///
/// Each tuple contributes to a histogram of its failing-edge mask; the
/// acceptance is the mass at the empty mask and the XOR-expansion terms are
/// the Walsh–Hadamard transform of the histogram.
pub fn exact_h_test<T: Scalar>(h: &Hypergraph, f: &BoolFn<T>, guard: Guard) -> Result<AcceptanceReport<T>> {
    require_sign(&[f])?;
    h.check_edge_count()?;
    guard.check("exact hypergraph test", f.n() * h.t())?;
    let masks = h.edge_masks();
    let one = T::one();
    let parts = for_each_tuple(
        f.n(),
        h.t(),
        || vec![0u64; 1 << masks.len()],
        |hist, sums| {
            let mut fail = 0usize;
            for (k, &m) in masks.iter().enumerate() {
                let lhs = (0..h.t())
                    .filter(|i| m >> i & 1 == 1)
                    .fold(one, |p, i| p * f.at(sums[1 << i]));
                if lhs != f.at(sums[m]) {
                    fail |= 1 << k;
                }
            }
            hist[fail] += 1;
        },
    );
    let mut hist = vec![0u64; 1 << masks.len()];
    for part in parts {
        for (a, b) in hist.iter_mut().zip(part) {
            *a += b;
        }
    }
    let total = T::of(2f64.powi((f.n() * h.t()) as i32));
    let probability = T::from_u64(hist[0]).expect("count fits") / total;
    let mut terms: Vec<T> = hist.iter().map(|&c| T::from_u64(c).expect("count fits")).collect();
    fwht_in_place(&mut terms);
    terms.iter_mut().for_each(|c| *c /= total);
    Ok(AcceptanceReport::exact(probability, Some(terms)))
}

/// Fraction of rounds in which every edge equation holds.
pub fn run_h_test_mc<T: Scalar>(h: &Hypergraph, f: &BoolFn<T>, samples: u64, seed: u64) -> Result<AcceptanceReport<T>> {
    require_sign(&[f])?;
    check_samples(samples)?;
    let (n, t) = (f.n(), h.t());
    let est = mc::estimate_probability(samples, seed, |rng| {
        let xs: Vec<usize> = (0..t).map(|_| sample_point(n, rng)).collect();
        h.edge_masks().iter().all(|&m| {
            let (lhs, sum) = (0..t)
                .filter(|i| m >> i & 1 == 1)
                .fold((T::one(), 0usize), |(p, s), i| (p * f.at(xs[i]), s ^ xs[i]));
            lhs == f.at(sum)
        })
    });
    Ok(AcceptanceReport::estimated(est))
}

/// Even covers among the families `R(E') = {{j} : j odd in E'} + E'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvenCovers {
    pub count: u64,
    /// Dimension of the span of the `u_T` vectors.
    pub dimension: usize,
    /// Edge-subset masks whose family is an even cover.
    pub subsets: Vec<usize>,
    /// `max{1, 2^{dimension - sum_{i=2}^d C(t, i)}}`, as a float.
    pub lower_bound: f64,
}

/// Counts the vectors of `U = span(u_T)` whose family covers every vertex
/// set of size at most `d` an even number of times.
///
/// Singletons are always covered evenly (odd-degree vertices carry their
/// own singleton), and the empty set is not a constraint, so only sets of
/// size `2..=d` are checked.
pub fn even_cover_count(h: &Hypergraph, d: usize, guard: Guard) -> Result<EvenCovers> {
    guard.check("even cover enumeration", h.num_edges())?;
    let t = h.t();
    let masks = h.edge_masks();
    let small: Vec<usize> = (1usize..1 << t)
        .filter(|m| (2..=d).contains(&(m.count_ones() as usize)))
        .collect();
    let subsets: Vec<usize> = (0usize..1 << masks.len())
        .filter(|&s| {
            small.iter().all(|&tm| {
                let covered = (0..masks.len())
                    .filter(|&k| s >> k & 1 == 1 && masks[k] & tm == tm)
                    .count();
                covered % 2 == 0
            })
        })
        .collect();
    // u_T over the columns {1}..{t}, E: vertex part then one unit edge column.
    let rows: Vec<Vec<u64>> = masks
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let mut bits = vec![0u64; (t + masks.len()).div_ceil(64)];
            for i in 0..t {
                if m >> i & 1 == 1 {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            let c = t + k;
            bits[c / 64] |= 1 << (c % 64);
            bits
        })
        .collect();
    let dimension = gf2::rank(rows);
    let budget: u64 = (2..=d.min(t)).map(|i| binomial(t, i)).sum();
    let lower_bound = 2f64.powf(dimension as f64 - budget as f64).max(1.0);
    Ok(EvenCovers {
        count: subsets.len() as u64,
        dimension,
        subsets,
        lower_bound,
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k as u64).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1))
}

/// Exact acceptance of the `gamma`-noisy `H`-test.
///
/// For sign inputs each term reduces to
/// `E[prod_{i in Odd(E')} G^i(x_i) prod_{e in E'} G^e(sum_{i in e} x_i)]`
/// with `G = apply_noise(g, gamma)`, summed over all `2^{nt}` tuples.
pub fn exact_noisy_h_test<T: Scalar>(
    h: &Hypergraph,
    gamma: T,
    inputs: &LongCodeInputs<T>,
    guard: Guard,
) -> Result<AcceptanceReport<T>> {
    check_noise(gamma)?;
    h.check_edge_count()?;
    if inputs.vertices.len() != h.t() || inputs.edges.len() != h.num_edges() {
        return invalid("inputs do not match the hypergraph");
    }
    let n = inputs.n();
    guard.check("exact noisy hypergraph test", n * h.t())?;
    let noised = |fs: &[BoolFn<T>]| -> Result<Vec<BoolFn<T>>> { fs.iter().map(|f| f.apply_noise(gamma)).collect() };
    let (gv, ge) = (noised(&inputs.vertices)?, noised(&inputs.edges)?);
    let (t, masks) = (h.t(), h.edge_masks());
    let odd = h.odd_vertices();
    let width = 1usize << masks.len();
    let parts = for_each_tuple(
        n,
        t,
        || (vec![T::zero(); width], vec![T::zero(); 1 << t], vec![T::zero(); width]),
        |(acc, v, w), sums| {
            v[0] = T::one();
            for s in 1..v.len() {
                let low = s.trailing_zeros() as usize;
                v[s] = v[s & (s - 1)] * gv[low].at(sums[1 << low]);
            }
            w[0] = T::one();
            for s in 1..width {
                let low = s.trailing_zeros() as usize;
                w[s] = w[s & (s - 1)] * ge[low].at(sums[masks[low]]);
            }
            for s in 0..width {
                acc[s] += v[odd[s]] * w[s];
            }
        },
    );
    let mut terms = vec![T::zero(); width];
    for (part, _, _) in parts {
        for (a, b) in terms.iter_mut().zip(part) {
            *a += b;
        }
    }
    let total = T::of(2f64.powi((n * t) as i32));
    terms.iter_mut().for_each(|c| *c /= total);
    let probability = (terms.iter().copied().sum::<T>() / T::of_usize(width))
        .max(T::zero())
        .min(T::one());
    Ok(AcceptanceReport::exact(probability, Some(terms)))
}

/// One round of the noisy test on sampled points and noise.
pub fn noisy_h_round<T: Scalar, R: rand::Rng + ?Sized>(
    h: &Hypergraph,
    gamma: f64,
    vertices: &[&BoolFn<T>],
    edges: &[&BoolFn<T>],
    rng: &mut R,
) -> bool {
    let n = vertices[0].n();
    let t = h.t();
    let xs: Vec<usize> = (0..t).map(|_| sample_point(n, rng)).collect();
    let vals: Vec<T> = (0..t)
        .map(|i| vertices[i].at(xs[i] ^ sample_mu_gamma(n, gamma, rng)))
        .collect();
    let mut ok = true;
    for (k, &m) in h.edge_masks().iter().enumerate() {
        let eta = sample_mu_gamma(n, gamma, rng);
        let (lhs, sum) = (0..t)
            .filter(|i| m >> i & 1 == 1)
            .fold((T::one(), 0usize), |(p, s), i| (p * vals[i], s ^ xs[i]));
        ok &= lhs == edges[k].at(sum ^ eta);
    }
    ok
}

pub fn run_noisy_h_test_mc<T: Scalar>(
    h: &Hypergraph,
    gamma: T,
    inputs: &LongCodeInputs<T>,
    samples: u64,
    seed: u64,
) -> Result<AcceptanceReport<T>> {
    check_noise(gamma)?;
    check_samples(samples)?;
    if inputs.vertices.len() != h.t() || inputs.edges.len() != h.num_edges() {
        return invalid("inputs do not match the hypergraph");
    }
    let vs: Vec<&BoolFn<T>> = inputs.vertices.iter().collect();
    let es: Vec<&BoolFn<T>> = inputs.edges.iter().collect();
    let g = gamma.as_f64();
    let est = mc::estimate_probability(samples, seed, |rng| noisy_h_round(h, g, &vs, &es, rng));
    Ok(AcceptanceReport::estimated(est))
}
