//! The maps `T(F) = W F U`, `S = T^{-1}`, the cosine family and the adjoint
//! dynamics `T*(G) = U G W` on finite-rank operators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_rank::{FiniteRankOperator, NormKind, DEFAULT_SUPPORT_CAP};
use crate::scalar::{Dyadic, Scalar};
use crate::structured::WeightedPermutationOperator;

/// Largest orbit horizon accepted unless the system is configured otherwise.
pub const DEFAULT_ORBIT_CAP: u64 = 4096;

/// Indices checked for bijectivity when a system is built.
const VERIFY_HORIZON: u64 = 256;

/// A pair `(U, W)` with `U` unitary and `W` invertible.
#[derive(Debug, Clone)]
pub struct ElementarySystem {
    u: WeightedPermutationOperator,
    w: WeightedPermutationOperator,
    support_cap: usize,
    orbit_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
    Cosine,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Cosine => "cosine",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            "cosine" => Ok(Direction::Cosine),
            other => Err(Error::Parse(format!("unknown direction '{other}'"))),
        }
    }
}

/// One row of an orbit profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: u64,
    pub norm: f64,
    /// Set when the orbit element is a partial permutation in exact mode.
    pub exact: Option<Dyadic>,
}

impl ElementarySystem {
    pub fn new(u: WeightedPermutationOperator, w: WeightedPermutationOperator) -> Result<Self> {
        if !u.is_unitary()? {
            return Err(Error::Precondition(format!("{} is not unitary", u.name())));
        }
        if !w.is_invertible()? || w.min_modulus()?.is_zero() {
            return Err(Error::Precondition(format!(
                "{} is not invertible with exact inverse weights",
                w.name()
            )));
        }
        u.verify(VERIFY_HORIZON)?;
        w.verify(VERIFY_HORIZON)?;
        Ok(ElementarySystem {
            u,
            w,
            support_cap: DEFAULT_SUPPORT_CAP,
            orbit_cap: DEFAULT_ORBIT_CAP,
        })
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = cap;
        self
    }

    pub fn with_orbit_cap(mut self, cap: u64) -> Self {
        self.orbit_cap = cap;
        self
    }

    pub fn u(&self) -> &WeightedPermutationOperator {
        &self.u
    }

    pub fn w(&self) -> &WeightedPermutationOperator {
        &self.w
    }

    pub fn orbit_cap(&self) -> u64 {
        self.orbit_cap
    }

    pub fn support_cap(&self) -> usize {
        self.support_cap
    }

    /// `T^n(F) = W^n F U^n`; negative `n` gives `S^{|n|}`.
    pub fn t_apply(&self, n: i64, f: &FiniteRankOperator) -> Result<FiniteRankOperator> {
        if n == 0 {
            return Ok(f.clone());
        }
        let out = f.left_mul_power(&self.w, n)?.right_mul_power(&self.u, n)?;
        out.check_cap(self.support_cap)?;
        Ok(out)
    }

    /// `C^(n)(F) = ½ (T^n F + S^n F)`.
    pub fn cosine_apply(&self, n: u64, f: &FiniteRankOperator) -> Result<FiniteRankOperator> {
        let n = signed(n)?;
        half_sum(&self.t_apply(n, f)?, &self.t_apply(-n, f)?)
    }

    /// `T*^n(G) = U^n G W^n`; negative `n` gives `S*^{|n|}`.
    pub fn adjoint_t_apply(&self, n: i64, g: &FiniteRankOperator) -> Result<FiniteRankOperator> {
        if n == 0 {
            return Ok(g.clone());
        }
        let out = g.left_mul_power(&self.u, n)?.right_mul_power(&self.w, n)?;
        out.check_cap(self.support_cap)?;
        Ok(out)
    }

    /// `½ (T*^n + S*^n)(G)`.
    pub fn adjoint_cosine_apply(
        &self,
        n: u64,
        g: &FiniteRankOperator,
    ) -> Result<FiniteRankOperator> {
        let n = signed(n)?;
        half_sum(&self.adjoint_t_apply(n, g)?, &self.adjoint_t_apply(-n, g)?)
    }

    fn orbit_element(
        &self,
        direction: Direction,
        n: u64,
        f: &FiniteRankOperator,
    ) -> Result<FiniteRankOperator> {
        match direction {
            Direction::Forward => self.t_apply(signed(n)?, f),
            Direction::Backward => self.t_apply(-signed(n)?, f),
            Direction::Cosine => self.cosine_apply(n, f),
        }
    }

    /// Norms of the orbit elements for `n = 0..=horizon`.
    pub fn orbit_profile(
        &self,
        f: &FiniteRankOperator,
        horizon: u64,
        which: NormKind,
        direction: Direction,
    ) -> Result<Vec<ProfilePoint>> {
        if horizon > self.orbit_cap {
            return Err(Error::Config(format!(
                "orbit horizon {horizon} exceeds the cap {}",
                self.orbit_cap
            )));
        }
        (0..=horizon)
            .map(|n| {
                let x = self.orbit_element(direction, n, f)?;
                Ok(ProfilePoint {
                    n,
                    norm: x.norm(which)?,
                    exact: x.exact_norm(which),
                })
            })
            .collect()
    }
}

fn signed(n: u64) -> Result<i64> {
    i64::try_from(n).map_err(|_| Error::Overflow(format!("power {n} too large")))
}

fn half_sum(a: &FiniteRankOperator, b: &FiniteRankOperator) -> Result<FiniteRankOperator> {
    let half = Scalar::pow2(a.mode(), -1)?;
    a.combine(b, &half, &half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Mode, SubspaceSpec};
    use crate::structured::{build_aperiodic_shift, build_example_w, identity, scaled_identity};

    fn ex(s: &str) -> Scalar {
        Scalar::Exact(s.parse().unwrap())
    }

    fn sys() -> ElementarySystem {
        ElementarySystem::new(build_aperiodic_shift(), build_example_w()).unwrap()
    }

    fn e(i: u64, j: u64, c: &str) -> FiniteRankOperator {
        FiniteRankOperator::rank_one(i, j, ex(c)).unwrap()
    }

    #[test]
    fn construction_is_validated() {
        assert!(matches!(
            ElementarySystem::new(build_example_w(), build_example_w()),
            Err(Error::Precondition(_))
        ));
        assert!(ElementarySystem::new(identity(), scaled_identity(Dyadic::pow2(1))).is_ok());
        let zero_w = scaled_identity(Dyadic::zero());
        assert!(ElementarySystem::new(identity(), zero_w).is_err());
        let three = scaled_identity(Dyadic::from_int(3));
        assert!(ElementarySystem::new(identity(), three).is_err());
    }

    #[test]
    fn t_apply_examples() {
        let s = sys();
        let f = e(1, 1, "1");
        assert_eq!(s.t_apply(0, &f).unwrap(), f);
        assert_eq!(s.t_apply(1, &f).unwrap(), e(3, 3, "1/2"));
        for n in -6..=6 {
            assert_eq!(s.t_apply(-n, &s.t_apply(n, &f).unwrap()).unwrap(), f);
        }
    }

    #[test]
    fn cosine_and_adjoint_basics() {
        let s = sys();
        let f = FiniteRankOperator::projection(&SubspaceSpec::leading(3), Mode::Exact);
        assert_eq!(s.cosine_apply(0, &f).unwrap(), f);
        assert_eq!(s.adjoint_t_apply(0, &f).unwrap(), f);
        for n in 1..5 {
            assert_eq!(
                s.adjoint_t_apply(-n, &s.adjoint_t_apply(n, &f).unwrap()).unwrap(),
                f
            );
        }
        // C(1) P_1 = ½ (½ e_3⊗e_3* + W⁻¹ e_1 ⊗ (U⁻¹)* e_1) = ¼ e_3⊗e_3* + ½ e_2⊗e_2*
        let p1 = FiniteRankOperator::projection(&SubspaceSpec::leading(1), Mode::Exact);
        let expect = e(3, 3, "1/4").add(&e(2, 2, "1/2")).unwrap();
        assert_eq!(s.cosine_apply(1, &p1).unwrap(), expect);
    }

    #[test]
    fn trace_pairing() {
        let s = sys();
        let f = e(1, 2, "1").add(&e(3, 1, "-1/2")).unwrap();
        let g = e(2, 2, "3").add(&e(3, 4, "1/4")).unwrap().add(&e(6, 1, "1")).unwrap();
        for n in -3..=3 {
            let lhs = s.adjoint_t_apply(n, &g).unwrap().compose(&f).unwrap().trace().unwrap();
            let rhs = g.compose(&s.t_apply(n, &f).unwrap()).unwrap().trace().unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn orbit_profiles() {
        let s = sys();
        let z = FiniteRankOperator::zero(Mode::Exact);
        for pt in s.orbit_profile(&z, 5, NormKind::Operator, Direction::Forward).unwrap() {
            assert_eq!(pt.norm, 0.0);
        }
        let f = e(2, 2, "1");
        let prof = s.orbit_profile(&f, 4, NormKind::Operator, Direction::Forward).unwrap();
        assert_eq!(prof[4].exact, Some(Dyadic::pow2(-3)));
        let p3 = FiniteRankOperator::projection(&SubspaceSpec::leading(3), Mode::Exact);
        let back = s.orbit_profile(&p3, 3, NormKind::Operator, Direction::Backward).unwrap();
        assert_eq!(back[3].exact, Some(Dyadic::one()));
        let capped = s.clone().with_orbit_cap(2);
        assert!(matches!(
            capped.orbit_profile(&f, 3, NormKind::Operator, Direction::Cosine),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn support_cap_is_enforced() {
        let s = sys().with_support_cap(1);
        let p2 = FiniteRankOperator::projection(&SubspaceSpec::leading(2), Mode::Exact);
        assert!(matches!(s.t_apply(1, &p2), Err(Error::Overflow(_))));
    }
}
