//! Inputs shared by the benchmarks.

use elemdyn_core::criteria::Schedule;
use elemdyn_core::structured::{build_aperiodic_shift, build_example_w};
use elemdyn_core::{ElementarySystem, FiniteRankOperator, Mode, Scalar, SubspaceSpec};

pub fn example_system() -> ElementarySystem {
    ElementarySystem::new(build_aperiodic_shift(), build_example_w()).expect("example system")
}

pub fn projection(m: u64) -> FiniteRankOperator {
    FiniteRankOperator::projection(&SubspaceSpec::leading(m), Mode::Exact)
}

/// Dense `size × size` block with entries `(i + 2j) / 8` in float mode, so the
/// norm goes through the SVD path.
pub fn dense_block(size: u64) -> FiniteRankOperator {
    FiniteRankOperator::from_triplets(
        Mode::Float,
        (1..=size).flat_map(|i| {
            (1..=size).map(move |j| (i, j, Scalar::Float((i + 2 * j) as f64 / 8.0)))
        }),
    )
    .expect("dense block")
}

pub fn schedule(count: u64) -> Schedule {
    Schedule::affine(3, count).expect("schedule")
}
