//! Gowers uniformity, Gowers inner products and the linear inner product.

use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::{sample_point, BoolFn};
use crate::error::{invalid, Result};
use crate::fourier::transform;
use crate::influence::cross_influence_report;
use crate::mc;
use crate::scalar::Scalar;
use crate::Guard;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GowersResult<T> {
    pub value: T,
    pub method: Method,
    pub samples: u64,
    pub stderr: T,
}

impl<T: Scalar> GowersResult<T> {
    pub fn exact(value: T) -> Self {
        GowersResult {
            value,
            method: Method::Exact,
            samples: 0,
            stderr: T::zero(),
        }
    }

    fn from_estimate(e: mc::Estimate<T>) -> Self {
        GowersResult {
            value: e.mean,
            method: Method::MonteCarlo,
            samples: e.samples,
            stderr: e.stderr,
        }
    }
}

/// `2^d` functions `{f_S}` indexed by subset masks of `[d]` (bit `i - 1` for `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct FnCollection<T> {
    d: usize,
    entries: Vec<BoolFn<T>>,
}

impl<T: Scalar> FnCollection<T> {
    pub fn new(d: usize, entries: Vec<BoolFn<T>>) -> Result<Self> {
        if d == 0 || d > 16 {
            return invalid(format!("collection dimension {d} outside 1..=16"));
        }
        if entries.len() != 1 << d {
            return invalid(format!(
                "dimension {d} needs {} functions, got {}",
                1usize << d,
                entries.len()
            ));
        }
        for f in &entries[1..] {
            entries[0].same_arity(f)?;
        }
        Ok(FnCollection { d, entries })
    }

    /// Every slot holds `f`.
    pub fn uniform(f: &BoolFn<T>, d: usize) -> Result<Self> {
        Self::new(d, vec![f.clone(); 1 << d.min(16)])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.entries[0].n()
    }

    pub fn get(&self, set: usize) -> &BoolFn<T> {
        &self.entries[set]
    }

    pub fn entries(&self) -> &[BoolFn<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<BoolFn<T>> {
        self.entries
    }
}

/// Canonical key of a subset mask: sorted 1-based digits, `""` for the empty set.
pub fn subset_key(set: usize) -> String {
    (0..usize::BITS as usize)
        .filter(|i| set >> i & 1 == 1)
        .map(|i| (i + 1).to_string())
        .collect()
}

pub fn parse_subset_key(key: &str, d: usize) -> Result<usize> {
    let mut set = 0usize;
    for c in key.chars() {
        let i = c
            .to_digit(10)
            .filter(|&i| i >= 1 && i as usize <= d)
            .ok_or_else(|| crate::Error::Parse(format!("bad subset key {key:?} for d = {d}")))?
            as usize;
        if set >> (i - 1) & 1 == 1 {
            return Err(crate::Error::Parse(format!("repeated element in key {key:?}")));
        }
        set |= 1 << (i - 1);
    }
    if subset_key(set) != key {
        return Err(crate::Error::Parse(format!("subset key {key:?} is not sorted")));
    }
    Ok(set)
}

/// `x -> f(x) f(x + y)`.
pub fn derivative<T: Scalar>(f: &BoolFn<T>, y: usize) -> BoolFn<T> {
    let y = y & (f.len() - 1);
    f.with_values(derive(f.values(), y))
}

fn derive<T: Scalar>(v: &[T], y: usize) -> Vec<T> {
    (0..v.len()).map(|x| v[x] * v[x ^ y]).collect()
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::of_usize(v.len())
}

fn fourth_moment_of_spectrum<T: Scalar>(v: &[T]) -> T {
    transform(v.to_vec())
        .into_iter()
        .map(|c| {
            let c2 = c * c;
            c2 * c2
        })
        .sum()
}

/// Which closed form ends the derivative recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseCase {
    /// `U^1(f) = (E f)^2`.
    Mean,
    /// `U^2(f) = sum_S f^(S)^4`.
    Spectrum,
}

fn u_recursive<T: Scalar>(v: &[T], d: usize, base: BaseCase, parallel: bool) -> T {
    match (d, base) {
        (1, _) => {
            let m = mean(v);
            m * m
        }
        (2, BaseCase::Spectrum) => fourth_moment_of_spectrum(v),
        _ => {
            let step = |y: usize| u_recursive(&derive(v, y), d - 1, base, false);
            let parts: Vec<T> = if parallel {
                (0..v.len()).into_par_iter().map(step).collect()
            } else {
                (0..v.len()).map(step).collect()
            };
            parts.into_iter().sum::<T>() / T::of_usize(v.len())
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > 16 {
        return invalid(format!("dimension {d} outside 1..=16"));
    }
    Ok(())
}

/// Exact `U^d(f)` by `U^d(f) = E_y U^{d-1}(D_y f)` down to the `U^2`
/// spectral closed form.
pub fn gowers_u<T: Scalar>(f: &BoolFn<T>, d: usize, guard: Guard) -> Result<GowersResult<T>> {
    gowers_u_with_base(f, d, BaseCase::Spectrum, guard)
}

pub fn gowers_u_with_base<T: Scalar>(
    f: &BoolFn<T>,
    d: usize,
    base: BaseCase,
    guard: Guard,
) -> Result<GowersResult<T>> {
    check_dim(d)?;
    guard.check("exact Gowers uniformity", f.n() * d)?;
    Ok(GowersResult::exact(u_recursive(f.values(), d, base, true)))
}

/// Sum over all `(x_1..x_k)` of `term(offsets)`, where `offsets[S]` is the
/// XOR of `x_i` over `i` in `S`. Partial sums per `x_1` are combined in order.
fn cube_sum<T, F>(n: usize, k: usize, term: F) -> T
where
    T: Scalar,
    F: Fn(&[usize]) -> T + Sync,
{
    if k == 0 {
        return term(&[0]);
    }
    let len = 1usize << n;
    let parts: Vec<T> = (0..len)
        .into_par_iter()
        .map(|x1| {
            let mut xs = vec![0usize; k];
            xs[0] = x1;
            let mut off = vec![0usize; 1 << k];
            let mut acc = T::zero();
            'tuples: loop {
                for s in 1..off.len() {
                    let hb = usize::BITS as usize - 1 - s.leading_zeros() as usize;
                    off[s] = off[s ^ (1 << hb)] ^ xs[hb];
                }
                acc += term(&off);
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
        .collect();
    parts.into_iter().sum()
}

/// Naive `E_{x, x_1..x_d} prod_S f_S(x + sum_{i in S} x_i)`.
fn ip_enumerate<T: Scalar>(fs: &[&BoolFn<T>], n: usize, d: usize) -> T {
    let len = 1usize << n;
    let total = cube_sum(n, d, |off| {
        (0..len)
            .map(|x| {
                fs.iter()
                    .zip(off)
                    .fold(T::one(), |p, (f, &o)| p * f.at(x ^ o))
            })
            .sum::<T>()
    });
    total / T::of_usize(len).powi((d + 1) as i32)
}

/// `U^d(f)` by direct enumeration of all `2^{n(d+1)}` cubes.
pub fn gowers_u_naive<T: Scalar>(f: &BoolFn<T>, d: usize, guard: Guard) -> Result<GowersResult<T>> {
    check_dim(d)?;
    guard.check("naive Gowers uniformity", f.n() * (d + 1))?;
    let fs = vec![f; 1 << d];
    Ok(GowersResult::exact(ip_enumerate(&fs, f.n(), d)))
}

/// Sample mean of the cube product over uniform `(x, x_1..x_d)`.
pub fn gowers_u_mc<T: Scalar>(f: &BoolFn<T>, d: usize, samples: u64, seed: u64) -> Result<GowersResult<T>> {
    gowers_ip_mc(&FnCollection::uniform(f, d)?, samples, seed)
}

/// Exact Gowers inner product. For `d >= 2` the last two directions are
/// summed in the Fourier domain: with `A, B, C, D` the products over the
/// first `d - 2` directions of the slots `S`, `S+{d-1}`, `S+{d}`, `S+{d-1,d}`,
/// the inner product is `E_{x_1..x_{d-2}} sum_a A^(a) B^(a) C^(a) D^(a)`.
pub fn gowers_ip<T: Scalar>(c: &FnCollection<T>, guard: Guard) -> Result<GowersResult<T>> {
    let (n, d) = (c.n(), c.d());
    if d == 1 {
        return Ok(GowersResult::exact(c.get(0).mean() * c.get(1).mean()));
    }
    guard.check("exact Gowers inner product", n * (d - 1))?;
    let len = 1usize << n;
    let inner = d - 2;
    let (bd1, bd) = (1usize << (d - 2), 1usize << (d - 1));
    let total = cube_sum(n, inner, |off| {
        let build = |extra: usize| {
            let v: Vec<T> = (0..len)
                .map(|x| {
                    off.iter()
                        .enumerate()
                        .fold(T::one(), |p, (s, &o)| p * c.get(s | extra).at(x ^ o))
                })
                .collect();
            transform(v)
        };
        let (a, b, cc, dd) = (build(0), build(bd1), build(bd), build(bd1 | bd));
        (0..len).map(|k| a[k] * b[k] * cc[k] * dd[k]).sum::<T>()
    });
    let tuples = if inner == 0 { 1 } else { len };
    let scale = T::of_usize(tuples).powi(inner.max(1) as i32);
    let value = if inner == 0 { total } else { total / scale };
    Ok(GowersResult::exact(value))
}

/// Exact Gowers inner product by naive enumeration.
pub fn gowers_ip_naive<T: Scalar>(c: &FnCollection<T>, guard: Guard) -> Result<GowersResult<T>> {
    guard.check("naive Gowers inner product", c.n() * (c.d() + 1))?;
    let fs: Vec<&BoolFn<T>> = c.entries().iter().collect();
    Ok(GowersResult::exact(ip_enumerate(&fs, c.n(), c.d())))
}

pub fn gowers_ip_mc<T: Scalar>(c: &FnCollection<T>, samples: u64, seed: u64) -> Result<GowersResult<T>> {
    if samples == 0 {
        return invalid("at least one sample is required");
    }
    let (n, d) = (c.n(), c.d());
    let est = mc::estimate(samples, seed, |rng| {
        let x = sample_point(n, rng);
        let dirs: Vec<usize> = (0..d).map(|_| sample_point(n, rng)).collect();
        (0..1usize << d).fold(T::one(), |p, s| {
            let off = dirs
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> i & 1 == 1)
                .fold(0, |o, (_, &xi)| o ^ xi);
            p * c.get(s).at(x ^ off)
        })
    });
    Ok(GowersResult::from_estimate(est))
}

/// `E_{x_1..x_d} prod_S f_S(sum_{i in S} x_i)`; `f_{}` is evaluated at 0.
pub fn linear_gowers_ip<T: Scalar>(c: &FnCollection<T>, guard: Guard) -> Result<GowersResult<T>> {
    let (n, d) = (c.n(), c.d());
    guard.check("linear Gowers inner product", n * d)?;
    // Sum over x_1..x_{d-1} through the cube helper, x_d explicitly.
    let len = 1usize << n;
    let hi = 1usize << (d - 1);
    let total = cube_sum(n, d - 1, |off| {
        let fixed = off
            .iter()
            .enumerate()
            .fold(T::one(), |p, (s, &o)| p * c.get(s).at(o));
        if fixed == T::zero() {
            return T::zero();
        }
        let moving: T = (0..len)
            .map(|xd| {
                off.iter()
                    .enumerate()
                    .fold(T::one(), |p, (s, &o)| p * c.get(s | hi).at(o ^ xd))
            })
            .sum();
        fixed * moving
    });
    Ok(GowersResult::exact(total / T::of_usize(len).powi(d as i32)))
}

/// `g_T = f_{T + {d}}` for `T` a subset of `[d]`.
pub fn lift_linear_to_gowers<T: Scalar>(c: &FnCollection<T>) -> FnCollection<T> {
    let top = 1usize << (c.d() - 1);
    let entries = (0..1usize << c.d()).map(|t| c.get(t | top).clone()).collect();
    FnCollection::new(c.d(), entries).expect("same shape as the input")
}

/// Coordinate maximizing the `t`-cross-influence over the collection, with
/// its value; ties go to the smallest coordinate.
pub fn find_influential_variable<T: Scalar>(c: &FnCollection<T>, t: usize) -> Result<(usize, T)> {
    let report = cross_influence_report(c.entries(), t, None)?;
    Ok((report.argmax, report.max_value))
}

/// Both sides of the four-function inequality:
/// `|sum_a prod_j f_j^(a)|` and `4 max_a min_j |f_j^(a)|`.
pub fn four_function_sides<T: Scalar>(fs: [&BoolFn<T>; 4]) -> Result<(T, T)> {
    for f in &fs[1..] {
        fs[0].same_arity(f)?;
    }
    let specs: Vec<_> = fs.iter().map(|f| f.fourier()).collect();
    let len = fs[0].len();
    let lhs = (0..len)
        .map(|a| specs.iter().fold(T::one(), |p, s| p * s.at(a)))
        .sum::<T>()
        .abs();
    let eps = (0..len)
        .map(|a| specs.iter().map(|s| s.at(a).abs()).fold(T::infinity(), T::min))
        .fold(T::zero(), T::max);
    Ok((lhs, T::of(4.0) * eps))
}
