//! Exact laboratory for elementary operators `T(F) = W F U` acting on
//! finite-rank operators over `ℓ²(ℕ)`.

pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod finite_rank;
pub mod report;
pub mod scalar;
pub mod structured;
pub mod witnesses;

pub use dynamics::{Direction, ElementarySystem};
pub use error::{Error, Result};
pub use finite_rank::{FiniteRankOperator, NormKind};
pub use scalar::{Dyadic, Mode, Scalar, SubspaceSpec};
pub use structured::{OrbitStep, WeightRule, WeightedPermutationOperator};
pub use witnesses::{Residual, WitnessKind, WitnessRecord, WitnessRun};
