//! Long-code proofs for unique games, the composed verifier that runs the
//! noisy hypergraph test on folded and permuted proof tables, and the
//! influence decoder.
//!
//! Letter `l` of the alphabet is coordinate `l + 1` of the long code. A
//! constraint's `q = t + |E|` permuted tables fill the test slots in order:
//! vertices `1..=t` first, then the edges in their listed order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolfn::{check_noise, BoolFn, RandomMode};
use crate::error::{invalid, Result};
use crate::influence::degree_influences;
use crate::mc;
use crate::scalar::Scalar;
use crate::testing::{exact_noisy_h_test, noisy_h_round, AcceptanceReport, Hypergraph, LongCodeInputs};
use crate::ugame::UniqueGame;
use crate::Guard;

/// One sign table of arity `sigma` per game variable.
#[derive(Clone, Debug, PartialEq)]
pub struct PcpProof<T> {
    sigma: usize,
    tables: Vec<BoolFn<T>>,
}

impl<T: Scalar> PcpProof<T> {
    pub fn new(sigma: usize, tables: Vec<BoolFn<T>>) -> Result<Self> {
        if tables.is_empty() {
            return invalid("a proof needs at least one table");
        }
        if let Some(f) = tables.iter().find(|f| f.n() != sigma || !f.is_sign()) {
            return invalid(format!(
                "proof tables must be sign functions of arity {sigma}, found arity {}",
                f.n()
            ));
        }
        Ok(PcpProof { sigma, tables })
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn tables(&self) -> &[BoolFn<T>] {
        &self.tables
    }

    fn fits(&self, g: &UniqueGame) -> Result<()> {
        if self.sigma != g.sigma() || self.tables.len() != g.variables().len() {
            return invalid(format!(
                "game needs {} tables of arity {}, proof has {} of arity {}",
                g.variables().len(),
                g.sigma(),
                self.tables.len(),
                self.sigma
            ));
        }
        Ok(())
    }
}

/// Long code of `a[v]` for every variable `v`.
pub fn honest_proof<T: Scalar>(g: &UniqueGame, a: &[usize]) -> Result<PcpProof<T>> {
    g.check_assignment(a)?;
    let tables = a
        .iter()
        .map(|&l| BoolFn::long_code(g.sigma(), l + 1))
        .collect::<Result<_>>()?;
    PcpProof::new(g.sigma(), tables)
}

/// Independent uniform sign tables.
pub fn random_proof<T: Scalar>(g: &UniqueGame, seed: u64) -> Result<PcpProof<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = (0..g.variables().len())
        .map(|_| BoolFn::random_with(g.sigma(), RandomMode::Sign, &mut rng))
        .collect::<Result<_>>()?;
    PcpProof::new(g.sigma(), tables)
}

/// Verifier state with the folded, permuted tables precomputed per constraint.
#[derive(Clone, Debug)]
pub struct ComposedVerifier<T> {
    h: Hypergraph,
    gamma: T,
    slots: Vec<LongCodeInputs<T>>,
}

impl<T: Scalar> ComposedVerifier<T> {
    pub fn new(g: &UniqueGame, proof: &PcpProof<T>, h: &Hypergraph, gamma: T) -> Result<Self> {
        check_noise(gamma)?;
        proof.fits(g)?;
        if g.arity() != h.queries() {
            return invalid(format!(
                "constraints have arity {} but the hypergraph test makes {} queries",
                g.arity(),
                h.queries()
            ));
        }
        let folded: Vec<BoolFn<T>> = proof.tables.iter().map(BoolFn::fold).collect::<Result<_>>()?;
        let slots = g
            .constraints()
            .iter()
            .map(|c| {
                let fs = c
                    .vars
                    .iter()
                    .zip(&c.perms)
                    .map(|(&v, p)| folded[v].permute(p))
                    .collect::<Result<Vec<_>>>()?;
                LongCodeInputs::from_slots(h, fs)
            })
            .collect::<Result<_>>()?;
        Ok(ComposedVerifier {
            h: h.clone(),
            gamma,
            slots,
        })
    }

    /// Slot functions for constraint `k`.
    pub fn inputs(&self, k: usize) -> &LongCodeInputs<T> {
        &self.slots[k]
    }

    /// Picks a uniform constraint and runs one round of the noisy test.
    pub fn round<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let k = rng.random_range(0..self.slots.len());
        let inputs = &self.slots[k];
        let vs: Vec<&BoolFn<T>> = inputs.vertices().iter().collect();
        let es: Vec<&BoolFn<T>> = inputs.edges().iter().collect();
        noisy_h_round(&self.h, self.gamma.as_f64(), &vs, &es, rng)
    }

    pub fn run(&self, rounds: u64, seed: u64) -> Result<AcceptanceReport<T>> {
        if rounds == 0 {
            return invalid("at least one round is required");
        }
        let est = mc::estimate_probability(rounds, seed, |rng| self.round(rng));
        Ok(AcceptanceReport {
            probability: est.mean,
            method: crate::Method::MonteCarlo,
            samples: est.samples,
            stderr: est.stderr,
            terms: None,
        })
    }

    /// Exact acceptance of every constraint; the verifier's acceptance is their mean.
    pub fn exact_per_constraint(&self, guard: Guard) -> Result<Vec<T>> {
        self.slots
            .iter()
            .map(|inputs| Ok(exact_noisy_h_test(&self.h, self.gamma, inputs, guard)?.probability))
            .collect()
    }

    pub fn exact(&self, guard: Guard) -> Result<T> {
        let per = self.exact_per_constraint(guard)?;
        Ok(per.iter().copied().sum::<T>() / T::of_usize(per.len()))
    }
}

/// A single verifier round; builds the verifier state on every call.
pub fn composed_round<T: Scalar, R: Rng + ?Sized>(
    g: &UniqueGame,
    proof: &PcpProof<T>,
    h: &Hypergraph,
    gamma: T,
    rng: &mut R,
) -> Result<bool> {
    Ok(ComposedVerifier::new(g, proof, h, gamma)?.round(rng))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decoding {
    pub assignment: Vec<usize>,
    /// Letters whose degree-`d` influence in the folded table is at least `tau`.
    pub candidates: Vec<Vec<usize>>,
}

/// Randomized decoding: each variable takes a uniform letter among its
/// candidates, or a uniform letter of the alphabet when it has none.
/// Variable `v` draws from stream `v` of `seed`.
pub fn decode<T: Scalar>(proof: &PcpProof<T>, d: usize, tau: f64, seed: u64) -> Result<Decoding> {
    if !(tau > 0.0 && tau <= 1.0) {
        return invalid(format!("threshold {tau} outside (0, 1]"));
    }
    if d == 0 || d > proof.sigma {
        return invalid(format!("degree bound {d} outside 1..={}", proof.sigma));
    }
    let mut assignment = Vec::with_capacity(proof.tables.len());
    let mut candidates = Vec::with_capacity(proof.tables.len());
    for (v, f) in proof.tables.iter().enumerate() {
        let inf = degree_influences(&f.fold()?, d)?;
        let set: Vec<usize> = inf
            .iter()
            .enumerate()
            .filter(|(_, &x)| x.as_f64() >= tau)
            .map(|(i, _)| i)
            .collect();
        assert!(
            set.len() as f64 <= d as f64 / tau + 1e-9,
            "candidate set of size {} exceeds d / tau",
            set.len()
        );
        let mut rng = mc::round_rng(seed, v as u64);
        let letter = if set.is_empty() {
            rng.random_range(0..proof.sigma)
        } else {
            set[rng.random_range(0..set.len())]
        };
        assignment.push(letter);
        candidates.push(set);
    }
    Ok(Decoding {
        assignment,
        candidates,
    })
}

/// Summary of a verifier run against a game and a proof.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub acceptance: AcceptanceReport<f64>,
    /// Mean exact acceptance over constraints, when the guard allows it.
    pub exact_acceptance: Option<f64>,
    /// `2^{-|E|}`.
    pub soundness_floor: f64,
    /// `1 - (t + 1) gamma |E|`.
    pub completeness_bound: f64,
    pub strong_value: f64,
    pub weak_value: f64,
    pub decoded: Decoding,
    /// Weak value of the decoded assignment.
    pub decoded_weak_value: f64,
}

pub struct DemoConfig {
    pub gamma: f64,
    pub rounds: u64,
    pub seed: u64,
    pub degree: usize,
    pub tau: f64,
}

pub fn demo(g: &UniqueGame, h: &Hypergraph, proof: &PcpProof<f64>, cfg: &DemoConfig, guard: Guard) -> Result<DemoReport> {
    let verifier = ComposedVerifier::new(g, proof, h, cfg.gamma)?;
    let acceptance = verifier.run(cfg.rounds, cfg.seed)?;
    let exact_acceptance = match verifier.exact(guard) {
        Ok(p) => Some(p),
        Err(crate::Error::ResourceLimit { .. }) => None,
        Err(e) => return Err(e),
    };
    let values = crate::ugame::solve_unique_game(g, guard)?;
    let decoded = decode(proof, cfg.degree.min(g.sigma()), cfg.tau, cfg.seed)?;
    let e = h.num_edges() as f64;
    Ok(DemoReport {
        acceptance,
        exact_acceptance,
        soundness_floor: 0.5f64.powi(h.num_edges() as i32),
        completeness_bound: 1.0 - (h.t() as f64 + 1.0) * cfg.gamma * e,
        strong_value: values.strong_value,
        weak_value: values.weak_value,
        decoded_weak_value: g.weak_value_of(&decoded.assignment),
        decoded,
    })
}
