//! Complex-valued functions on products of finite cyclic groups.
//!
//! Elements are mixed-radix indices: the flat list of moduli is read with
//! the first modulus least significant, blocks in order.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::boolfn::BoolFn;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::Guard;

/// Largest supported group order.
pub const MAX_ORDER: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    blocks: Vec<Vec<usize>>,
    moduli: Vec<usize>,
    strides: Vec<usize>,
    /// Stride and order of each block.
    block_shape: Vec<(usize, usize)>,
    order: usize,
}

impl GroupSpec {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(Vec::is_empty) {
            return invalid("a group needs at least one block and no empty blocks");
        }
        let moduli: Vec<usize> = blocks.iter().flatten().copied().collect();
        if let Some(m) = moduli.iter().find(|&&m| m < 2) {
            return invalid(format!("modulus {m} is below 2"));
        }
        let mut order = 1usize;
        let mut strides = Vec::with_capacity(moduli.len());
        for &m in &moduli {
            strides.push(order);
            order = match order.checked_mul(m) {
                Some(o) if o <= MAX_ORDER => o,
                _ => return invalid(format!("group order exceeds {MAX_ORDER}")),
            };
        }
        let mut block_shape = Vec::with_capacity(blocks.len());
        let mut stride = 1;
        for b in &blocks {
            let size: usize = b.iter().product();
            block_shape.push((stride, size));
            stride *= size;
        }
        Ok(GroupSpec {
            blocks,
            moduli,
            strides,
            block_shape,
            order,
        })
    }

    /// `Z_2^n` with one block per coordinate.
    pub fn boolean_cube(n: usize) -> Result<Self> {
        Self::new(vec![vec![2]; n])
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `ceil(log2 |G|)`, the unit of the cost guard.
    pub fn log2_order(&self) -> usize {
        self.order.next_power_of_two().trailing_zeros() as usize
    }

    pub fn digits(&self, x: usize) -> Vec<usize> {
        self.moduli
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| x / s % m)
            .collect()
    }

    pub fn encode(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.moduli.len() {
            return invalid(format!("element needs {} digits", self.moduli.len()));
        }
        let mut x = 0;
        for ((&d, &m), &s) in digits.iter().zip(&self.moduli).zip(&self.strides) {
            if d >= m {
                return invalid(format!("digit {d} out of range for modulus {m}"));
            }
            x += d * s;
        }
        Ok(x)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.moduli
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| (a / s % m + b / s % m) % m * s)
            .sum()
    }

    /// Table of `a + b` for all pairs, row-major in `a`.
    fn addition_table(&self) -> Vec<u32> {
        let g = self.order;
        (0..g * g).map(|k| self.add(k / g, k % g) as u32).collect()
    }

    /// Phase of `chi_g(x)` as a fraction of a full turn.
    fn turns(&self, g: usize, x: usize) -> f64 {
        self.moduli
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| ((g / s % m) * (x / s % m) % m) as f64 / m as f64)
            .sum::<f64>()
            .fract()
    }

    fn check_block(&self, i: usize) -> Result<(usize, usize)> {
        if i == 0 || i > self.blocks.len() {
            return invalid(format!("block {i} outside 1..={}", self.blocks.len()));
        }
        Ok(self.block_shape[i - 1])
    }
}

fn cis<T: Scalar>(turns: f64) -> Complex<T> {
    let a = std::f64::consts::TAU * turns;
    Complex::new(T::of(a.cos()), T::of(a.sin()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupFn<T> {
    spec: GroupSpec,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> GroupFn<T> {
    pub fn from_values(spec: GroupSpec, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != spec.order {
            return invalid(format!("group of order {} needs that many values, got {}", spec.order, values.len()));
        }
        let limit = T::one() + T::tolerance();
        if let Some(v) = values.iter().find(|v| v.norm().is_nan() || v.norm() > limit) {
            return invalid(format!("value {v} has modulus above 1"));
        }
        Ok(GroupFn { spec, values })
    }

    pub fn constant(spec: GroupSpec, c: Complex<T>) -> Result<Self> {
        let len = spec.order;
        Self::from_values(spec, vec![c; len])
    }

    /// Embeds a real function on `{0,1}^n` as a function on `Z_2^n`.
    pub fn from_boolfn(f: &BoolFn<T>) -> Self {
        GroupFn {
            spec: GroupSpec::boolean_cube(f.n()).expect("arity within limits"),
            values: f.values().iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }

    /// I.i.d. values uniform on the closed unit disk.
    pub fn random(spec: GroupSpec, seed: u64) -> Self {
        Self::random_with(spec, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random_with<R: Rng + ?Sized>(spec: GroupSpec, rng: &mut R) -> Self {
        let values = (0..spec.order)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.random::<f64>();
                Complex::new(T::of(r * a.cos()), T::of(r * a.sin()))
            })
            .collect();
        GroupFn { spec, values }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn at(&self, x: usize) -> Complex<T> {
        self.values[x]
    }

    pub fn mean(&self) -> Complex<T> {
        self.values.iter().copied().sum::<Complex<T>>() / T::of_usize(self.values.len())
    }

    /// `E|f|^2 - |E f|^2`.
    pub fn variance(&self) -> T {
        let sq = self.values.iter().map(|v| v.norm_sqr()).sum::<T>() / T::of_usize(self.values.len());
        (sq - self.mean().norm_sqr()).max(T::zero())
    }

    /// `<f, g> = E f(x) conj(g(x))`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_group(other)?;
        let s: Complex<T> = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s / T::of_usize(self.values.len()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        Ok(GroupFn {
            spec: self.spec.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn conj(&self) -> Self {
        GroupFn {
            spec: self.spec.clone(),
            values: self.values.iter().map(Complex::conj).collect(),
        }
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return invalid("functions live on different groups");
        }
        Ok(())
    }

    pub fn fourier(&self) -> GroupSpectrum<T> {
        let mut coeffs = self.values.clone();
        dft_axes(&self.spec, &mut coeffs, false);
        let scale = T::one() / T::of_usize(self.spec.order);
        coeffs.iter_mut().for_each(|c| *c *= scale);
        GroupSpectrum {
            spec: self.spec.clone(),
            coeffs,
        }
    }
}

/// `chi_g(x) = prod_j exp(2 pi i g_j x_j / m_j)`.
pub fn group_character<T: Scalar>(spec: &GroupSpec, g: usize) -> Result<GroupFn<T>> {
    if g >= spec.order {
        return invalid(format!("element {g} outside a group of order {}", spec.order));
    }
    let values = (0..spec.order).map(|x| cis(spec.turns(g, x))).collect();
    Ok(GroupFn {
        spec: spec.clone(),
        values,
    })
}

/// Unnormalized DFT along every cyclic axis; forward uses `exp(-2 pi i jk / m)`.
fn dft_axes<T: Scalar>(spec: &GroupSpec, data: &mut [Complex<T>], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    for (&m, &s) in spec.moduli.iter().zip(&spec.strides) {
        let fft = if inverse {
            planner.plan_fft_inverse(m)
        } else {
            planner.plan_fft_forward(m)
        };
        let mut line = vec![Complex::new(T::zero(), T::zero()); m];
        for outer in 0..spec.order / (s * m) {
            for lo in 0..s {
                let base = outer * s * m + lo;
                for (k, c) in line.iter_mut().enumerate() {
                    *c = data[base + k * s];
                }
                fft.process(&mut line);
                for (k, c) in line.iter().enumerate() {
                    data[base + k * s] = *c;
                }
            }
        }
    }
}

/// Coefficients `f^(g) = <f, chi_g>` indexed by the label `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpectrum<T> {
    spec: GroupSpec,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> GroupSpectrum<T> {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn at(&self, g: usize) -> Complex<T> {
        self.coeffs[g]
    }

    pub fn energy(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum_g f^(g) chi_g`; values within tolerance of the unit disk are
    /// pulled back onto it.
    pub fn inverse(&self) -> Result<GroupFn<T>> {
        let mut values = self.coeffs.clone();
        dft_axes(&self.spec, &mut values, true);
        for v in values.iter_mut() {
            let r = v.norm();
            if r > T::one() {
                if r > T::one() + T::tolerance() {
                    return invalid(format!("spectrum synthesizes value {v} outside the unit disk"));
                }
                *v /= r;
            }
        }
        GroupFn::from_values(self.spec.clone(), values)
    }
}

/// Influence of block `i` as `E_{other blocks} Var_{x_i} f`.
pub fn group_influence<T: Scalar>(f: &GroupFn<T>, i: usize) -> Result<T> {
    let (stride, size) = f.spec.check_block(i)?;
    let outer = f.spec.order / (stride * size);
    let mut total = T::zero();
    for hi in 0..outer {
        for lo in 0..stride {
            let base = hi * stride * size + lo;
            let (mut sum, mut sq) = (Complex::new(T::zero(), T::zero()), T::zero());
            for b in 0..size {
                let v = f.values[base + b * stride];
                sum += v;
                sq += v.norm_sqr();
            }
            let n = T::of_usize(size);
            let mean = sum / n;
            total += (sq / n - mean.norm_sqr()).max(T::zero());
        }
    }
    Ok(total / T::of_usize(outer * stride))
}

/// Influence of block `i` as the Fourier mass on labels with a nonzero `i` part.
pub fn group_influence_fourier<T: Scalar>(spec: &GroupSpectrum<T>, i: usize) -> Result<T> {
    let (stride, size) = spec.spec.check_block(i)?;
    Ok(spec
        .coeffs
        .iter()
        .enumerate()
        .filter(|(g, _)| g / stride % size != 0)
        .map(|(_, c)| c.norm_sqr())
        .sum())
}

pub fn group_max_influence<T: Scalar>(f: &GroupFn<T>) -> T {
    (1..=f.spec.n_blocks())
        .map(|i| group_influence(f, i).expect("block in range"))
        .fold(T::zero(), T::max)
}

/// `t`-cross-influence of block `i` over a collection on one group.
pub fn group_cross_influence<T: Scalar>(fs: &[GroupFn<T>], i: usize, t: usize) -> Result<T> {
    if let Some(f) = fs.iter().find(|f| f.spec != fs[0].spec) {
        return invalid(format!("collection mixes groups {:?} and {:?}", fs[0].spec.blocks, f.spec.blocks));
    }
    let vals = fs.iter().map(|f| group_influence(f, i)).collect::<Result<Vec<_>>>()?;
    crate::influence::order_statistic(vals, t)
}

/// Block with the largest `t`-cross-influence (smallest on ties) and its value.
pub fn group_find_influential<T: Scalar>(fs: &[GroupFn<T>], t: usize) -> Result<(usize, T)> {
    let Some(first) = fs.first() else {
        return invalid("empty collection");
    };
    let mut best = (1, group_cross_influence(fs, 1, t)?);
    for i in 2..=first.spec.n_blocks() {
        let v = group_cross_influence(fs, i, t)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

fn complex_derive<T: Scalar>(v: &[Complex<T>], y: usize, add: &[u32]) -> Vec<Complex<T>> {
    let g = v.len();
    (0..g).map(|x| v[x] * v[add[x * g + y] as usize].conj()).collect()
}

fn complex_u<T: Scalar>(spec: &GroupSpec, v: &[Complex<T>], d: usize, add: &[u32], parallel: bool) -> T {
    match d {
        1 => {
            let m = v.iter().copied().sum::<Complex<T>>() / T::of_usize(v.len());
            m.norm_sqr()
        }
        2 => {
            let mut c = v.to_vec();
            dft_axes(spec, &mut c, false);
            let scale = T::one() / T::of_usize(v.len());
            c.iter()
                .map(|z| {
                    let s = (z * scale).norm_sqr();
                    s * s
                })
                .sum()
        }
        _ => {
            let step = |y: usize| complex_u(spec, &complex_derive(v, y, add), d - 1, add, false);
            let parts: Vec<T> = if parallel {
                (0..v.len()).into_par_iter().map(step).collect()
            } else {
                (0..v.len()).map(step).collect()
            };
            parts.into_iter().sum::<T>() / T::of_usize(v.len())
        }
    }
}

/// `U^d(f)` with conjugation on odd levels, via the derivative recursion
/// `f_y(x) = f(x) conj(f(x + y))` down to `U^1 = |E f|^2` or `U^2 = sum |f^|^4`.
pub fn group_gowers_u<T: Scalar>(f: &GroupFn<T>, d: usize, guard: Guard) -> Result<T> {
    if d == 0 || d > 16 {
        return invalid(format!("dimension {d} outside 1..=16"));
    }
    guard.check("exact complex Gowers uniformity", f.spec.log2_order() * d)?;
    let add = if d > 2 { f.spec.addition_table() } else { Vec::new() };
    Ok(complex_u(&f.spec, &f.values, d, &add, true))
}

/// `E prod_S C^{|S|} f_S(x + sum_{i in S} x_i)` where `C` conjugates; the
/// collection is indexed by subset masks of `[d]`.
pub fn group_gowers_ip<T: Scalar>(fs: &[GroupFn<T>], guard: Guard) -> Result<Complex<T>> {
    let d = fs.len().trailing_zeros() as usize;
    if fs.len() < 2 || !fs.len().is_power_of_two() || d > 16 {
        return invalid(format!("a collection needs 2^d >= 2 functions, got {}", fs.len()));
    }
    let spec = &fs[0].spec;
    if fs.iter().any(|f| &f.spec != spec) {
        return invalid("functions live on different groups");
    }
    guard.check("exact complex Gowers inner product", spec.log2_order() * (d + 1))?;
    let g = spec.order;
    let add = spec.addition_table();
    let parts: Vec<Complex<T>> = (0..g)
        .into_par_iter()
        .map(|x| {
            let mut dirs = vec![0usize; d];
            let mut pts = vec![0usize; 1 << d];
            let mut acc = Complex::new(T::zero(), T::zero());
            loop {
                pts[0] = x;
                for s in 1..pts.len() {
                    let hb = usize::BITS as usize - 1 - s.leading_zeros() as usize;
                    pts[s] = add[pts[s ^ (1 << hb)] * g + dirs[hb]] as usize;
                }
                let p = fs.iter().zip(&pts).enumerate().fold(
                    Complex::new(T::one(), T::zero()),
                    |p, (s, (f, &pt))| {
                        let v = f.values[pt];
                        p * if s.count_ones() % 2 == 1 { v.conj() } else { v }
                    },
                );
                acc += p;
                let mut k = 0;
                while k < d {
                    dirs[k] += 1;
                    if dirs[k] < g {
                        break;
                    }
                    dirs[k] = 0;
                    k += 1;
                }
                if k == d {
                    break acc;
                }
            }
        })
        .collect();
    let total: Complex<T> = parts.into_iter().sum();
    Ok(total / T::of_usize(g).powi((d + 1) as i32))
}
