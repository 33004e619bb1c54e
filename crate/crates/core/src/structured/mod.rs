//! Lazy infinite weighted permutation operators `e_j ↦ w_j e_{σ(j)}`.
//!
//! These carry the unitary `U` and invertible `W` of an elementary system,
//! together with their powers, inverses and adjoints. Compression norms
//! `‖A^n P_s‖` and `‖P_s A^n‖` are exact dyadics because the columns of a
//! weighted permutation are orthogonal.

mod operator;
mod permutation;
mod weights;

pub use operator::{
    norm_power_proj, proj_norm_power, OrbitStep, WeightedPermutationOperator,
    DEFAULT_MEMO_HORIZON,
};
pub use permutation::{PermutationKind, PermutationRule, ResidueShift, INDEX_CAP};
pub use weights::WeightRule;

use std::collections::BTreeMap;

use crate::scalar::Dyadic;

/// The invertible shift with `W e_j = ½ e_{j+2}` (j odd), `2 e_{j-2}`
/// (j even, j > 2) and `W e_2 = e_1`.
pub fn build_example_w() -> WeightedPermutationOperator {
    let perm = ResidueShift::new(2, vec![-2, 2], BTreeMap::from([(2, 1)]))
        .expect("static residue rule");
    let weights = WeightRule::periodic(
        2,
        vec![Dyadic::from_int(2), Dyadic::pow2(-1)],
        BTreeMap::from([(2, Dyadic::one())]),
    )
    .expect("static weight rule");
    WeightedPermutationOperator::new("W", PermutationKind::ResidueShift(perm), weights)
        .expect("static operator")
}

/// Unitary `U_α e_j = e_{α(j)}` for the zigzag successor `α`.
pub fn build_aperiodic_shift() -> WeightedPermutationOperator {
    WeightedPermutationOperator::new(
        "U",
        PermutationKind::Zigzag,
        WeightRule::constant(Dyadic::one()),
    )
    .expect("static operator")
}

pub fn identity() -> WeightedPermutationOperator {
    scaled_identity(Dyadic::one()).with_name("I")
}

/// `c · I`.
pub fn scaled_identity(c: Dyadic) -> WeightedPermutationOperator {
    WeightedPermutationOperator::new(
        format!("{c}*I"),
        PermutationKind::Identity,
        WeightRule::constant(c),
    )
    .expect("static operator")
}

/// Unitary that cycles each block `{bp+1, ..., bp+p}` one step, so `U^p = I`.
pub fn cyclic_blocks(p: u64) -> crate::error::Result<WeightedPermutationOperator> {
    if p == 0 {
        return Err(crate::error::Error::Config("block length must be positive".into()));
    }
    let mut shifts = vec![1i64; p as usize];
    shifts[0] = -(p as i64 - 1);
    let perm = ResidueShift::new(p, shifts, BTreeMap::new())?;
    WeightedPermutationOperator::new(
        format!("C{p}"),
        PermutationKind::ResidueShift(perm),
        WeightRule::constant(Dyadic::one()),
    )
}
