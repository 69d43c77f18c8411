//! Fourier analysis, influence and Gowers uniformity for functions on
//! `{0,1}^n` and on products of finite abelian groups, together with exact
//! and Monte Carlo simulators for linearity tests, hypergraph long-code
//! tests and a small composed PCP verifier over unique games.
//!
//! The numeric kernels are generic over a [`Scalar`] (`f32` or `f64`).
//! The aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line tool and the acceptance suite use.
//!
//! Points of `{0,1}^n` are `usize` masks: coordinate `x_i` (1-based) is bit
//! `i - 1`, so group addition is XOR.

pub mod boolfn;
pub mod error;
pub mod fourier;
pub mod gf2;
pub mod gowers;
pub mod group;
pub mod influence;
pub mod io;
pub mod mc;
pub mod pcp;
pub mod report;
pub mod scalar;
pub mod testing;
pub mod ugame;
pub mod verify;

pub use boolfn::{BoolFn, RandomMode};
pub use error::{Error, Result};
pub use fourier::Spectrum;
pub use gf2::BitMatrix;
pub use gowers::{FnCollection, GowersResult, Method};
pub use group::{GroupFn, GroupSpec, GroupSpectrum};
pub use influence::InfluenceReport;
pub use scalar::Scalar;
pub use testing::{AcceptanceReport, Hypergraph, LongCodeInputs};
pub use ugame::{GameValueReport, UniqueGame};

/// Largest supported arity of a boolean function table.
pub const MAX_ARITY: usize = 24;

/// Cost guard for exhaustive enumeration.
///
/// An operation whose work is about `2^k` refuses to run when
/// `k > max_log2_cost`, unless the guard is lifted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard {
    max_log2_cost: Option<u32>,
}

impl Guard {
    pub const DEFAULT_LOG2_COST: u32 = 26;

    pub const fn new(max_log2_cost: u32) -> Self {
        Guard {
            max_log2_cost: Some(max_log2_cost),
        }
    }

    /// No limit at all.
    pub const fn unlimited() -> Self {
        Guard {
            max_log2_cost: None,
        }
    }

    pub fn is_limited(&self) -> bool {
        self.max_log2_cost.is_some()
    }

    pub fn check(&self, what: &str, log2_cost: usize) -> Result<()> {
        match self.max_log2_cost {
            Some(max) if log2_cost > max as usize => Err(Error::ResourceLimit {
                what: what.to_string(),
                log2_cost,
                max,
            }),
            _ => Ok(()),
        }
    }
}

impl Default for Guard {
    fn default() -> Self {
        Guard::new(Self::DEFAULT_LOG2_COST)
    }
}

pub type BoolFn64 = BoolFn<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type FnCollection64 = FnCollection<f64>;
pub type GowersResult64 = GowersResult<f64>;
pub type GroupFn64 = GroupFn<f64>;
pub type GroupSpectrum64 = GroupSpectrum<f64>;
pub type AcceptanceReport64 = AcceptanceReport<f64>;
pub type LongCodeInputs64 = LongCodeInputs<f64>;
pub type InfluenceReport64 = InfluenceReport<f64>;

pub type BoolFn32 = BoolFn<f32>;
pub type Spectrum32 = Spectrum<f32>;
