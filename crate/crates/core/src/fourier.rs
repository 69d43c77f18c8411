//! Walsh–Fourier transform on `{0,1}^n`.

use crate::boolfn::{check_arity, BoolFn};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Fourier coefficients `f^(S) = <f, chi_S>`, indexed by subset mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    n: usize,
    coeffs: Vec<T>,
}

/// Unnormalized in-place Walsh–Hadamard butterfly.
pub fn fwht_in_place<T: Scalar>(a: &mut [T]) {
    let len = a.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (p, q) = (*u, *v);
                *u = p + q;
                *v = p - q;
            }
        }
        h *= 2;
    }
}

/// Normalized transform of a raw table: returns `E_x a(x) chi_S(x)` for all `S`.
pub(crate) fn transform<T: Scalar>(mut a: Vec<T>) -> Vec<T> {
    fwht_in_place(&mut a);
    let scale = T::one() / T::of_usize(a.len());
    a.iter_mut().for_each(|c| *c *= scale);
    a
}

impl<T: Scalar> Spectrum<T> {
    pub fn of(f: &BoolFn<T>) -> Self {
        Spectrum {
            n: f.n(),
            coeffs: transform(f.values().to_vec()),
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<T>) -> Result<Self> {
        check_arity(n)?;
        if coeffs.len() != 1 << n {
            return invalid(format!("spectrum for arity {n} needs {} coefficients", 1usize << n));
        }
        Ok(Spectrum { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn at(&self, set: usize) -> T {
        self.coeffs[set]
    }

    /// `sum_S f^(S)^2`.
    pub fn energy(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    /// Synthesizes `sum_S f^(S) chi_S` without range checks.
    pub fn inverse_values(&self) -> Vec<T> {
        let mut a = self.coeffs.clone();
        fwht_in_place(&mut a);
        a
    }

    /// Inverse transform. Values within tolerance of `[-1, 1]` are clamped;
    /// anything further out is an error.
    pub fn inverse(&self) -> Result<BoolFn<T>> {
        let one = T::one();
        let tol = T::tolerance();
        let mut values = self.inverse_values();
        for v in values.iter_mut() {
            if v.abs() > one + tol {
                return invalid(format!("spectrum synthesizes value {v} outside [-1, 1]"));
            }
            *v = v.max(-one).min(one);
        }
        BoolFn::from_values(self.n, values)
    }
}

impl<T: Scalar> BoolFn<T> {
    pub fn fourier(&self) -> Spectrum<T> {
        Spectrum::of(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::RandomMode;
    use proptest::prelude::*;

    type F = BoolFn<f64>;

    /// Direct `E_x f(x) chi_S(x)` for every `S`, quadratic time.
    fn naive_spectrum(f: &F) -> Vec<f64> {
        let len = f.len();
        (0..len)
            .map(|s| {
                (0..len)
                    .map(|x| {
                        let sign = if (x & s).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        sign * f.at(x)
                    })
                    .sum::<f64>()
                    / len as f64
            })
            .collect()
    }

    #[test]
    fn characters_have_unit_spectra() {
        for s in 0..16 {
            let spec = F::chi(4, s).unwrap().fourier();
            for (t, &c) in spec.coeffs().iter().enumerate() {
                assert_eq!(c, if t == s { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn quadratic_phase_spectrum() {
        let spec = F::quadratic_phase(2).unwrap().fourier();
        assert_eq!(spec.coeffs(), &[0.5, 0.5, 0.5, -0.5]);
    }

    #[test]
    fn orthonormal_characters() {
        for n in 1..=6 {
            let chis: Vec<F> = (0..1 << n).map(|s| F::chi(n, s).unwrap()).collect();
            for (s, a) in chis.iter().enumerate() {
                for (t, b) in chis.iter().enumerate() {
                    let ip = a.inner(b).unwrap();
                    let want = if s == t { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parseval_on_random_sign_functions() {
        for seed in 0..100 {
            let f = F::random(8, RandomMode::Sign, seed).unwrap();
            assert!((f.fourier().energy() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_naive_transform() {
        let f = F::random(5, RandomMode::Bounded, 42).unwrap();
        let fast = f.fourier();
        for (a, b) in fast.coeffs().iter().zip(naive_spectrum(&f)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_precision_transform() {
        let f = BoolFn::<f32>::random(6, RandomMode::Sign, 1).unwrap();
        let back = f.fourier().inverse().unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn inverse_rejects_unbounded_spectrum() {
        let s = Spectrum::from_coeffs(1, vec![1.0, 1.0]).unwrap();
        assert!(s.inverse().is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(n in 1usize..9, seed in any::<u64>(), sign in any::<bool>()) {
            let mode = if sign { RandomMode::Sign } else { RandomMode::Bounded };
            let f = F::random(n, mode, seed).unwrap();
            let spec = f.fourier();
            let back = spec.inverse().unwrap();
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mean_sq = f.values().iter().map(|v| v * v).sum::<f64>() / f.len() as f64;
            prop_assert!((spec.energy() - mean_sq).abs() < 1e-9);
            prop_assert!(spec.coeffs().iter().all(|c| c.abs() <= 1.0 + 1e-12));
        }
    }
}
