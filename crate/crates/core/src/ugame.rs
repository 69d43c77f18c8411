//! `q`-ary unique games and exhaustive computation of their values.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::check_permutation;
use crate::error::{invalid, Error, Result};
use crate::Guard;

/// Largest number of assignments the solver enumerates under a limited guard.
pub const MAX_ASSIGNMENTS: u64 = 10_000_000;

/// A constraint on `vars`: letters `perms[j][A(vars[j])]` are compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub vars: Vec<usize>,
    pub perms: Vec<Vec<usize>>,
}

impl Constraint {
    fn images<'a>(&'a self, a: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        self.vars.iter().zip(&self.perms).map(move |(&v, p)| p[a[v]])
    }

    pub fn strongly_satisfied(&self, a: &[usize]) -> bool {
        let mut it = self.images(a);
        let first = it.next().expect("constraints are nonempty");
        it.all(|x| x == first)
    }

    /// Some two images coincide.
    pub fn weakly_satisfied(&self, a: &[usize]) -> bool {
        let imgs: Vec<usize> = self.images(a).collect();
        imgs.iter().enumerate().any(|(i, x)| imgs[i + 1..].contains(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniqueGame {
    sigma: usize,
    variables: Vec<String>,
    constraints: Vec<Constraint>,
}

impl UniqueGame {
    pub fn new(sigma: usize, variables: Vec<String>, constraints: Vec<Constraint>) -> Result<Self> {
        if sigma == 0 || sigma > crate::MAX_ARITY {
            return invalid(format!("alphabet size {sigma} outside 1..={}", crate::MAX_ARITY));
        }
        if variables.is_empty() || constraints.is_empty() {
            return invalid("a game needs variables and constraints");
        }
        let q = constraints[0].vars.len();
        for (k, c) in constraints.iter().enumerate() {
            if c.vars.len() < 2 || c.vars.len() != q || c.perms.len() != q {
                return invalid(format!("constraint {k} must have {q} >= 2 variables and as many permutations"));
            }
            if let Some(v) = c.vars.iter().find(|&&v| v >= variables.len()) {
                return invalid(format!("constraint {k} names variable {v}, only {} exist", variables.len()));
            }
            for p in &c.perms {
                check_permutation(p, sigma)?;
            }
        }
        Ok(UniqueGame {
            sigma,
            variables,
            constraints,
        })
    }

    /// Binary constraints `y = f(x)` become `(x, y)` with permutations `(f, id)`.
    pub fn binary(sigma: usize, variables: Vec<String>, constraints: Vec<(usize, usize, Vec<usize>)>) -> Result<Self> {
        let id: Vec<usize> = (0..sigma).collect();
        let cs = constraints
            .into_iter()
            .map(|(x, y, f)| Constraint {
                vars: vec![x, y],
                perms: vec![f, id.clone()],
            })
            .collect();
        Self::new(sigma, variables, cs)
    }

    /// `m` constraints of arity `q` on `vars` variables, uniform variables
    /// and permutations.
    pub fn random<R: Rng + ?Sized>(sigma: usize, vars: usize, q: usize, m: usize, rng: &mut R) -> Result<Self> {
        let perm = |rng: &mut R| {
            let mut p: Vec<usize> = (0..sigma).collect();
            for i in (1..sigma).rev() {
                p.swap(i, rng.random_range(0..=i));
            }
            p
        };
        let constraints = (0..m)
            .map(|_| Constraint {
                vars: (0..q).map(|_| rng.random_range(0..vars)).collect(),
                perms: (0..q).map(|_| perm(rng)).collect(),
            })
            .collect();
        Self::new(sigma, (1..=vars).map(|i| format!("v{i}")).collect(), constraints)
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn arity(&self) -> usize {
        self.constraints[0].vars.len()
    }

    pub fn strong_value_of(&self, a: &[usize]) -> f64 {
        let k = self.constraints.iter().filter(|c| c.strongly_satisfied(a)).count();
        k as f64 / self.constraints.len() as f64
    }

    pub fn weak_value_of(&self, a: &[usize]) -> f64 {
        let k = self.constraints.iter().filter(|c| c.weakly_satisfied(a)).count();
        k as f64 / self.constraints.len() as f64
    }

    pub fn check_assignment(&self, a: &[usize]) -> Result<()> {
        if a.len() != self.variables.len() || a.iter().any(|&x| x >= self.sigma) {
            return invalid(format!(
                "assignment needs {} letters below {}",
                self.variables.len(),
                self.sigma
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameValueReport {
    pub strong_value: f64,
    pub weak_value: f64,
    /// An assignment reaching the strong value (first in enumeration order).
    pub best_assignment: Vec<usize>,
    /// An assignment reaching the weak value.
    pub best_weak_assignment: Vec<usize>,
}

fn decode(mut index: u64, sigma: usize, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = (index % sigma as u64) as usize;
            index /= sigma as u64;
            d
        })
        .collect()
}

/// Exhaustive search over all `sigma^|V|` assignments.
pub fn solve_unique_game(g: &UniqueGame, guard: Guard) -> Result<GameValueReport> {
    let (sigma, nv) = (g.sigma, g.variables.len());
    let total = (sigma as u64).checked_pow(nv as u32);
    let limit_hit = total.is_none_or(|t| t > MAX_ASSIGNMENTS);
    if limit_hit && guard.is_limited() {
        return Err(Error::ResourceLimit {
            what: "unique game search".into(),
            log2_cost: (nv as f64 * (sigma as f64).log2()).ceil() as usize,
            max: (MAX_ASSIGNMENTS as f64).log2().floor() as u32,
        });
    }
    let total = match total {
        Some(t) => t,
        None => return invalid("assignment space does not fit in 64 bits"),
    };
    // (strong count, index), (weak count, index); larger count wins, then smaller index.
    type Best = ((usize, u64), (usize, u64));
    let better = |a: (usize, u64), b: (usize, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let chunk = 4096u64;
    let ((strong, si), (weak, wi)): Best = (0..total.div_ceil(chunk) as usize)
        .into_par_iter()
        .map(|c| {
            let start = c as u64 * chunk;
            let mut a = decode(start, sigma, nv);
            let mut best: Best = ((0, u64::MAX), (0, u64::MAX));
            for idx in start..(start + chunk).min(total) {
                let s = g.constraints.iter().filter(|c| c.strongly_satisfied(&a)).count();
                let w = g.constraints.iter().filter(|c| c.weakly_satisfied(&a)).count();
                best = (better(best.0, (s, idx)), better(best.1, (w, idx)));
                for d in a.iter_mut() {
                    *d += 1;
                    if *d < sigma {
                        break;
                    }
                    *d = 0;
                }
            }
            best
        })
        .reduce(
            || ((0, u64::MAX), (0, u64::MAX)),
            |x, y| (better(x.0, y.0), better(x.1, y.1)),
        );
    let m = g.constraints.len() as f64;
    Ok(GameValueReport {
        strong_value: strong as f64 / m,
        weak_value: weak as f64 / m,
        best_assignment: decode(si, sigma, nv),
        best_weak_assignment: decode(wi, sigma, nv),
    })
}
