//! Influence, low-degree influence and cross-influence.

use serde::Serialize;

use crate::boolfn::BoolFn;
use crate::error::{invalid, Result};
use crate::fourier::Spectrum;
use crate::scalar::Scalar;

/// Per-coordinate values with the (first) maximizer. Coordinates are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfluenceReport<T> {
    pub values: Vec<T>,
    pub argmax: usize,
    pub max_value: T,
}

impl<T: Scalar> InfluenceReport<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        let mut argmax = 0;
        for (j, &v) in values.iter().enumerate() {
            if v > values[argmax] {
                argmax = j;
            }
        }
        let max_value = values.get(argmax).copied().unwrap_or_else(T::zero);
        InfluenceReport {
            values,
            argmax: argmax + 1,
            max_value,
        }
    }
}

fn check_coordinate(n: usize, i: usize) -> Result<()> {
    if i == 0 || i > n {
        return invalid(format!("coordinate {i} outside 1..={n}"));
    }
    Ok(())
}

/// `I_i(f) = 1/4 E_x (f(x) - f(x + e_i))^2`.
pub fn influence<T: Scalar>(f: &BoolFn<T>, i: usize) -> Result<T> {
    check_coordinate(f.n(), i)?;
    let bit = 1 << (i - 1);
    let s: T = (0..f.len())
        .filter(|x| x & bit == 0)
        .map(|x| {
            let d = f.at(x) - f.at(x | bit);
            d * d
        })
        .sum();
    // each unordered pair stands for two points
    Ok(s / (T::of(2.0) * T::of_usize(f.len())))
}

/// `Pr_x[f(x) != f(x + e_i)]`, for sign functions.
pub fn flip_probability<T: Scalar>(f: &BoolFn<T>, i: usize) -> Result<T> {
    check_coordinate(f.n(), i)?;
    if !f.is_sign() {
        return invalid("flip probability is defined for sign-valued functions");
    }
    let bit = 1 << (i - 1);
    let flips = (0..f.len()).filter(|&x| f.at(x) != f.at(x ^ bit)).count();
    Ok(T::of_usize(flips) / T::of_usize(f.len()))
}

/// `sum_{S containing i, |S| <= d} f^(S)^2`.
pub fn degree_influence_from_spectrum<T: Scalar>(spec: &Spectrum<T>, i: usize, d: usize) -> Result<T> {
    check_coordinate(spec.n(), i)?;
    if d > spec.n() {
        return invalid(format!("degree bound {d} exceeds arity {}", spec.n()));
    }
    let bit = 1 << (i - 1);
    Ok(spec
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(s, _)| s & bit != 0 && s.count_ones() as usize <= d)
        .map(|(_, &c)| c * c)
        .sum())
}

pub fn degree_influence<T: Scalar>(f: &BoolFn<T>, i: usize, d: usize) -> Result<T> {
    degree_influence_from_spectrum(&f.fourier(), i, d)
}

/// Influence through the Fourier route, `sum_{S containing i} f^(S)^2`.
pub fn influence_fourier<T: Scalar>(f: &BoolFn<T>, i: usize) -> Result<T> {
    degree_influence(f, i, f.n())
}

/// All `n` influences, by the difference route.
pub fn influences<T: Scalar>(f: &BoolFn<T>) -> Vec<T> {
    (1..=f.n())
        .map(|i| influence(f, i).expect("coordinate in range"))
        .collect()
}

/// All `n` degree-`d` influences from one transform.
pub fn degree_influences<T: Scalar>(f: &BoolFn<T>, d: usize) -> Result<Vec<T>> {
    let spec = f.fourier();
    (1..=f.n())
        .map(|i| degree_influence_from_spectrum(&spec, i, d))
        .collect()
}

pub fn max_influence<T: Scalar>(f: &BoolFn<T>) -> T {
    influences(f).into_iter().fold(T::zero(), T::max)
}

/// `t`-th largest value; the max over `t` distinct positions of their minimum.
pub(crate) fn order_statistic<T: Scalar>(mut vals: Vec<T>, t: usize) -> Result<T> {
    if t < 2 || t > vals.len() {
        return invalid(format!(
            "threshold count {t} must lie in 2..={} (collection size)",
            vals.len()
        ));
    }
    vals.sort_by(|a, b| b.partial_cmp(a).expect("influences are finite"));
    Ok(vals[t - 1])
}

fn check_collection<T: Scalar>(fs: &[BoolFn<T>]) -> Result<()> {
    if let Some(first) = fs.first() {
        for f in &fs[1..] {
            first.same_arity(f)?;
        }
    }
    Ok(())
}

/// `t`-cross-influence of coordinate `i`; `t = 2` is the cross-influence.
pub fn cross_influence<T: Scalar>(fs: &[BoolFn<T>], i: usize, t: usize) -> Result<T> {
    check_collection(fs)?;
    let vals = fs.iter().map(|f| influence(f, i)).collect::<Result<Vec<_>>>()?;
    order_statistic(vals, t)
}

/// Degree-`d` cross-influence (`t = 2`).
pub fn degree_cross_influence<T: Scalar>(fs: &[BoolFn<T>], i: usize, d: usize) -> Result<T> {
    check_collection(fs)?;
    let vals = fs
        .iter()
        .map(|f| degree_influence(f, i, d))
        .collect::<Result<Vec<_>>>()?;
    order_statistic(vals, 2)
}

pub fn influence_report<T: Scalar>(f: &BoolFn<T>) -> InfluenceReport<T> {
    InfluenceReport::from_values(influences(f))
}

pub fn degree_influence_report<T: Scalar>(f: &BoolFn<T>, d: usize) -> Result<InfluenceReport<T>> {
    Ok(InfluenceReport::from_values(degree_influences(f, d)?))
}

/// Per-coordinate `t`-cross-influence, optionally restricted to degree `d`.
pub fn cross_influence_report<T: Scalar>(
    fs: &[BoolFn<T>],
    t: usize,
    degree: Option<usize>,
) -> Result<InfluenceReport<T>> {
    check_collection(fs)?;
    let Some(first) = fs.first() else {
        return invalid("empty collection");
    };
    let n = first.n();
    let per_fn: Vec<Vec<T>> = fs
        .iter()
        .map(|f| match degree {
            Some(d) => degree_influences(f, d),
            None => Ok(influences(f)),
        })
        .collect::<Result<_>>()?;
    let values = (0..n)
        .map(|i| order_statistic(per_fn.iter().map(|v| v[i]).collect(), t))
        .collect::<Result<Vec<_>>>()?;
    Ok(InfluenceReport::from_values(values))
}
