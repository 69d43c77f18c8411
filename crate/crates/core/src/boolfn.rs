//! Full-table real functions on the boolean cube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::fourier::Spectrum;
use crate::gf2::BitMatrix;
use crate::scalar::Scalar;
use crate::MAX_ARITY;

/// A function `{0,1}^n -> [-1, 1]` stored as its full truth table.
///
/// Entry `m` holds `f(x)` where bit `i - 1` of `m` is `x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoolFn<T> {
    n: usize,
    values: Vec<T>,
    is_sign: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomMode {
    /// i.i.d. uniform `+1` / `-1`.
    Sign,
    /// i.i.d. uniform in `[-1, 1]`.
    Bounded,
}

pub(crate) fn check_arity(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ARITY {
        return invalid(format!("arity {n} outside 1..={MAX_ARITY}"));
    }
    Ok(())
}

impl<T: Scalar> BoolFn<T> {
    pub fn from_values(n: usize, values: Vec<T>) -> Result<Self> {
        check_arity(n)?;
        if values.len() != 1 << n {
            return invalid(format!(
                "table for arity {n} needs {} entries, got {}",
                1usize << n,
                values.len()
            ));
        }
        let one = T::one();
        if let Some(m) = values.iter().position(|v| v.is_nan() || v.abs() > one) {
            return invalid(format!("value {} at index {m} is outside [-1, 1]", values[m]));
        }
        let is_sign = values.iter().all(|&v| v == one || v == -one);
        Ok(BoolFn { n, values, is_sign })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> T) -> Result<Self> {
        check_arity(n)?;
        Self::from_values(n, (0..1usize << n).map(f).collect())
    }

    /// Sign function from a table of bits, `true` meaning `-1`.
    pub fn from_bits(n: usize, minus: impl Fn(usize) -> bool) -> Result<Self> {
        Self::from_fn(n, |m| if minus(m) { -T::one() } else { T::one() })
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    /// The character `x -> (-1)^{sum_{i in S} x_i}` for the subset mask `set`.
    pub fn chi(n: usize, set: usize) -> Result<Self> {
        check_arity(n)?;
        if set >> n != 0 {
            return invalid(format!("subset mask {set:#x} has bits above arity {n}"));
        }
        Self::from_bits(n, |m| (m & set).count_ones() & 1 == 1)
    }

    /// The long code (dictator) of coordinate `i`, 1-based.
    pub fn long_code(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return invalid(format!("coordinate {i} outside 1..={n}"));
        }
        Self::chi(n, 1 << (i - 1))
    }

    /// `(-1)^{x1 x2 + x3 x4 + ... + x_{n-1} x_n}` over disjoint pairs.
    pub fn quadratic_phase(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return invalid(format!("quadratic phase needs an even arity, got {n}"));
        }
        Self::block_and(n, 2)
    }

    /// `(-1)^{sum over consecutive blocks of size b of the AND of the block}`.
    pub fn block_and(n: usize, b: usize) -> Result<Self> {
        check_arity(n)?;
        if b == 0 || !n.is_multiple_of(b) {
            return invalid(format!("block size {b} does not divide arity {n}"));
        }
        let block = (1usize << b) - 1;
        Self::from_bits(n, |m| {
            let full = (0..n / b).filter(|k| (m >> (k * b)) & block == block).count();
            full % 2 == 1
        })
    }

    pub fn random(n: usize, mode: RandomMode, seed: u64) -> Result<Self> {
        check_arity(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, mode, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(n: usize, mode: RandomMode, rng: &mut R) -> Result<Self> {
        check_arity(n)?;
        let values = (0..1usize << n)
            .map(|_| match mode {
                RandomMode::Sign => {
                    if rng.random::<bool>() {
                        T::one()
                    } else {
                        -T::one()
                    }
                }
                RandomMode::Bounded => T::of(rng.random_range(-1.0..=1.0)),
            })
            .collect();
        Self::from_values(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_sign(&self) -> bool {
        self.is_sign
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn at(&self, x: usize) -> T {
        self.values[x]
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::of_usize(self.len())
    }

    /// `<f, g> = E_x f(x) g(x)`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.same_arity(other)?;
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum();
        Ok(s / T::of_usize(self.len()))
    }

    pub fn same_arity(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return invalid(format!("arity mismatch: {} vs {}", self.n, other.n));
        }
        Ok(())
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_arity(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(self.with_values(values))
    }

    pub fn neg(&self) -> Self {
        self.with_values(self.values.iter().map(|&v| -v).collect())
    }

    /// `x -> f(x + y)`.
    pub fn shift(&self, y: usize) -> Self {
        let y = y & (self.len() - 1);
        self.with_values((0..self.len()).map(|x| self.values[x ^ y]).collect())
    }

    // Closed operations on [-1, 1] skip revalidation.
    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        let one = T::one();
        let is_sign = values.iter().all(|&v| v == one || v == -one);
        BoolFn {
            n: self.n,
            values,
            is_sign,
        }
    }

    /// Folding: `f(0, x') = f(0, x')`, `f(1, x') = -f(0, 1 - x')`.
    pub fn fold(&self) -> Result<Self> {
        if !self.is_sign {
            return invalid("folding is defined for sign-valued functions");
        }
        let full = self.len() - 1;
        let values = (0..self.len())
            .map(|m| {
                if m & 1 == 0 {
                    self.values[m]
                } else {
                    -self.values[m ^ full]
                }
            })
            .collect();
        Ok(self.with_values(values))
    }

    /// `(f o pi)(x_1..x_n) = f(x_{pi(1)}, ..., x_{pi(n)})`.
    ///
    /// `pi` is 0-based: `pi[j]` is the image of coordinate `j + 1`, minus one.
    /// With this convention the long code of `i` maps to the long code of
    /// `pi(i)`, and `I_{pi(i)}(f o pi) = I_i(f)`.
    pub fn permute(&self, pi: &[usize]) -> Result<Self> {
        check_permutation(pi, self.n)?;
        let values = (0..self.len())
            .map(|m| {
                let y = pi
                    .iter()
                    .enumerate()
                    .fold(0usize, |y, (j, &pj)| y | (((m >> pj) & 1) << j));
                self.values[y]
            })
            .collect();
        Ok(self.with_values(values))
    }

    /// `f_A(x) = f(Ax)` over GF(2).
    pub fn linear_transform(&self, a: &BitMatrix) -> Result<Self> {
        if a.dim() != self.n {
            return invalid(format!(
                "matrix is {0}x{0} but the function has arity {1}",
                a.dim(),
                self.n
            ));
        }
        let values = (0..self.len()).map(|x| self.values[a.apply(x)]).collect();
        Ok(self.with_values(values))
    }

    /// `G(x) = E_eta f(x + eta)` with `eta ~ mu_gamma`, computed exactly
    /// through the spectrum: `G^(S) = (1 - 2 gamma)^{|S|} f^(S)`.
    pub fn apply_noise(&self, gamma: T) -> Result<Self> {
        check_noise(gamma)?;
        let rho = T::one() - (gamma + gamma);
        let mut spec = Spectrum::of(self);
        let powers: Vec<T> = (0..=self.n).map(|k| rho.powi(k as i32)).collect();
        for (s, c) in spec.coeffs_mut().iter_mut().enumerate() {
            *c *= powers[s.count_ones() as usize];
        }
        let one = T::one();
        let values = spec
            .inverse_values()
            .into_iter()
            .map(|v| v.max(-one).min(one))
            .collect();
        Ok(self.with_values(values))
    }
}

pub(crate) fn check_noise<T: Scalar>(gamma: T) -> Result<()> {
    if !(gamma >= T::zero() && gamma <= T::of(0.5)) {
        return invalid(format!("noise rate {gamma} outside [0, 1/2]"));
    }
    Ok(())
}

pub(crate) fn check_permutation(pi: &[usize], n: usize) -> Result<()> {
    if pi.len() != n {
        return invalid(format!("permutation has length {} for arity {n}", pi.len()));
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return invalid(format!("{pi:?} is not a permutation of 0..{n}"));
        }
    }
    Ok(())
}

/// Draws `eta ~ mu_gamma` on `{0,1}^n`: every bit is 1 independently with
/// probability `gamma`.
pub fn sample_mu_gamma<R: Rng + ?Sized>(n: usize, gamma: f64, rng: &mut R) -> usize {
    if gamma <= 0.0 {
        return 0;
    }
    (0..n).fold(0, |acc, i| acc | (usize::from(rng.random_bool(gamma)) << i))
}

/// Uniform point of `{0,1}^n`.
#[inline]
pub fn sample_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    (rng.random::<u64>() as usize) & ((1usize << n) - 1)
}
