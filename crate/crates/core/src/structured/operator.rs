use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::permutation::{PermutationKind, PermutationRule};
use super::weights::WeightRule;
use crate::error::{Error, Result};
use crate::scalar::{Dyadic, SubspaceSpec};

/// Default number of steps remembered per orbit.
pub const DEFAULT_MEMO_HORIZON: u64 = 1 << 16;

/// `A^n e_j = weight · e_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitStep {
    pub index: u64,
    pub weight: Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bounds {
    inf: Dyadic,
    sup: Dyadic,
}

type OrbitTable = RwLock<HashMap<u64, Vec<OrbitStep>>>;

/// Remembered orbit prefixes, `orbits[j][k] = A^{k+1} e_j`.
struct OrbitMemo {
    forward: Arc<OrbitTable>,
    backward: Arc<OrbitTable>,
}

impl OrbitMemo {
    fn fresh() -> Self {
        OrbitMemo {
            forward: Arc::new(RwLock::new(HashMap::new())),
            backward: Arc::new(RwLock::new(HashMap::new())),
        }
    }

    fn swapped(&self) -> Self {
        OrbitMemo {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }
}

impl Clone for OrbitMemo {
    fn clone(&self) -> Self {
        OrbitMemo {
            forward: self.forward.clone(),
            backward: self.backward.clone(),
        }
    }
}

/// Lazy infinite operator `e_j ↦ w_j e_{σ(j)}`.
///
/// The operator is stored as a base weight rule plus an orientation, so
/// inverses and adjoints are O(1) views: column `j` of the represented
/// operator goes to `rule.forward(j)`, with weight taken from the base rule at
/// `j` (or at the image, for the flipped orientations) and reciprocated for
/// inverse orientations. Real weights make the adjoint a plain transpose.
#[derive(Clone)]
pub struct WeightedPermutationOperator {
    name: String,
    rule: PermutationRule,
    weights: Arc<WeightRule>,
    weight_at_image: bool,
    reciprocal: bool,
    bounds: Option<Bounds>,
    memo: OrbitMemo,
    memo_horizon: u64,
}

impl WeightedPermutationOperator {
    pub fn new(name: impl Into<String>, kind: PermutationKind, weights: WeightRule) -> Result<Self> {
        let bounds = match weights.attained_values() {
            Some(values) if values.is_empty() => {
                return Err(Error::Config("weight probe horizon must be positive".into()))
            }
            Some(values) => {
                let abs: Vec<Dyadic> = values.iter().map(Dyadic::abs).collect();
                let inf = abs.iter().min().cloned().expect("non-empty");
                let sup = abs.iter().max().cloned().expect("non-empty");
                Some(Bounds { inf, sup })
            }
            None => None,
        };
        Ok(WeightedPermutationOperator {
            name: name.into(),
            rule: PermutationRule::new(kind),
            weights: Arc::new(weights),
            weight_at_image: false,
            reciprocal: false,
            bounds,
            memo: OrbitMemo::fresh(),
            memo_horizon: DEFAULT_MEMO_HORIZON,
        })
    }

    pub fn with_memo_horizon(mut self, horizon: u64) -> Self {
        self.memo_horizon = horizon;
        self.memo = OrbitMemo::fresh();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The column map `j ↦ σ(j)` of this operator.
    pub fn rule(&self) -> &PermutationRule {
        &self.rule
    }

    pub fn description(&self) -> String {
        let mut s = format!("{} on {}", self.name, self.rule.description());
        if self.reciprocal {
            s.push_str(", reciprocal weights");
        }
        s
    }

    /// One step: `A e_j`.
    pub fn apply(&self, j: u64) -> Result<OrbitStep> {
        let index = self.rule.forward(j)?;
        let base = if self.weight_at_image { index } else { j };
        let w = self.weights.at(base);
        let weight = if self.reciprocal { w.inv2()? } else { w };
        Ok(OrbitStep { index, weight })
    }

    /// One step of the inverse: `A^{-1} e_i`.
    fn apply_inverse(&self, i: u64) -> Result<OrbitStep> {
        let j = self.rule.backward(i)?;
        let step = self.apply(j)?;
        let weight = step.weight.inv2().map_err(|_| {
            Error::Domain(format!(
                "{} is not invertible (weight {} at column {j})",
                self.name, step.weight
            ))
        })?;
        Ok(OrbitStep { index: j, weight })
    }

    /// `A^n e_j` for signed `n`, by orbit walking.
    pub fn apply_power(&self, n: i64, j: u64) -> Result<OrbitStep> {
        if n == 0 {
            return Ok(OrbitStep {
                index: j,
                weight: Dyadic::one(),
            });
        }
        if n < 0 {
            self.check_invertible()?;
        }
        let steps = n.unsigned_abs();
        let table = if n > 0 {
            &self.memo.forward
        } else {
            &self.memo.backward
        };
        let step_fn = |i: u64| {
            if n > 0 {
                self.apply(i)
            } else {
                self.apply_inverse(i)
            }
        };
        if steps > self.memo_horizon {
            let mut cur = OrbitStep {
                index: j,
                weight: Dyadic::one(),
            };
            for _ in 0..steps {
                let s = step_fn(cur.index)?;
                cur = OrbitStep {
                    index: s.index,
                    weight: &cur.weight * &s.weight,
                };
            }
            return Ok(cur);
        }
        let k = steps as usize;
        if let Some(orbit) = table.read().get(&j) {
            if orbit.len() >= k {
                return Ok(orbit[k - 1].clone());
            }
        }
        // step_fn never touches the memo, so extending under the lock is safe
        let mut guard = table.write();
        let orbit = guard.entry(j).or_default();
        let mut cur = orbit.last().cloned().unwrap_or(OrbitStep {
            index: j,
            weight: Dyadic::one(),
        });
        while orbit.len() < k {
            let s = step_fn(cur.index)?;
            cur = OrbitStep {
                index: s.index,
                weight: &cur.weight * &s.weight,
            };
            orbit.push(cur.clone());
        }
        Ok(orbit[k - 1].clone())
    }

    fn check_invertible(&self) -> Result<()> {
        match &self.bounds {
            Some(b) if b.inf.is_zero() => Err(Error::Domain(format!(
                "{} is not invertible: inf |w| = 0",
                self.name
            ))),
            _ => Ok(()),
        }
    }

    /// True when the weights are bounded below and every inverse weight is
    /// exactly representable (signed powers of two).
    pub fn is_invertible(&self) -> Result<bool> {
        let values = self.weights.attained_values().ok_or_else(|| self.undeclared())?;
        Ok(values.iter().all(Dyadic::is_signed_power_of_two))
    }

    pub fn is_unitary(&self) -> Result<bool> {
        let b = self.bounds()?;
        Ok(b.inf == Dyadic::one() && b.sup == Dyadic::one())
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible()? {
            return Err(Error::Domain(format!(
                "{}: inverse needs non-zero power-of-two weights",
                self.name
            )));
        }
        let bounds = self
            .bounds
            .as_ref()
            .map(|b| -> Result<Bounds> {
                Ok(Bounds {
                    inf: b.sup.inv2()?,
                    sup: b.inf.inv2()?,
                })
            })
            .transpose()?;
        Ok(WeightedPermutationOperator {
            name: format!("{}^-1", self.name),
            rule: self.rule.inverse(),
            weights: self.weights.clone(),
            weight_at_image: !self.weight_at_image,
            reciprocal: !self.reciprocal,
            bounds,
            memo: self.memo.swapped(),
            memo_horizon: self.memo_horizon,
        })
    }

    pub fn adjoint(&self) -> Self {
        WeightedPermutationOperator {
            name: format!("{}*", self.name),
            rule: self.rule.inverse(),
            weights: self.weights.clone(),
            weight_at_image: !self.weight_at_image,
            reciprocal: self.reciprocal,
            bounds: self.bounds.clone(),
            memo: OrbitMemo::fresh(),
            memo_horizon: self.memo_horizon,
        }
    }

    fn undeclared(&self) -> Error {
        Error::Config(format!(
            "{}: weight pattern undeclared and no probe horizon set",
            self.name
        ))
    }

    fn bounds(&self) -> Result<&Bounds> {
        self.bounds.as_ref().ok_or_else(|| self.undeclared())
    }

    /// `m(A) = inf_j |w_j|`.
    pub fn min_modulus(&self) -> Result<Dyadic> {
        Ok(self.bounds()?.inf.clone())
    }

    /// `‖A‖ = sup_j |w_j|`.
    pub fn sup_norm(&self) -> Result<Dyadic> {
        Ok(self.bounds()?.sup.clone())
    }

    /// `min_{j ≤ horizon} |weight of A^n e_j|`, an upper estimate of `m(A^n)`.
    pub fn min_modulus_power_probe(&self, n: i64, horizon: u64) -> Result<Dyadic> {
        if horizon == 0 {
            return Err(Error::Config("probe horizon must be positive".into()));
        }
        let mut best: Option<Dyadic> = None;
        for j in 1..=horizon {
            let w = self.apply_power(n, j)?.weight.abs();
            best = Some(match best {
                Some(b) => b.min(w),
                None => w,
            });
        }
        Ok(best.expect("horizon > 0"))
    }

    /// `‖A^n P_s‖`, exact: the images `A^n e_j` are orthogonal basis vectors,
    /// so the norm is the largest weight over `s`.
    pub fn norm_power_proj(&self, n: i64, s: &SubspaceSpec) -> Result<Dyadic> {
        let mut best = Dyadic::zero();
        for j in s.iter() {
            best = best.max(self.apply_power(n, j)?.weight.abs());
        }
        Ok(best)
    }

    /// `‖P_s A^n‖`, exact: the largest weight among columns whose image lands in `s`.
    pub fn proj_norm_power(&self, s: &SubspaceSpec, n: i64) -> Result<Dyadic> {
        let mut best = Dyadic::zero();
        for i in s.iter() {
            let j = self.rule.power(-n, i)?;
            best = best.max(self.apply_power(n, j)?.weight.abs());
        }
        Ok(best)
    }

    pub fn verify(&self, horizon: u64) -> Result<()> {
        self.rule.verify(horizon)
    }
}

impl fmt::Debug for WeightedPermutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedPermutationOperator")
            .field("name", &self.name)
            .field("rule", &self.rule)
            .field("weights", &self.weights)
            .field("weight_at_image", &self.weight_at_image)
            .field("reciprocal", &self.reciprocal)
            .finish()
    }
}

/// Free-function form of [`WeightedPermutationOperator::norm_power_proj`].
pub fn norm_power_proj(
    a: &WeightedPermutationOperator,
    n: i64,
    s: &SubspaceSpec,
) -> Result<Dyadic> {
    a.norm_power_proj(n, s)
}

/// Free-function form of [`WeightedPermutationOperator::proj_norm_power`].
pub fn proj_norm_power(
    s: &SubspaceSpec,
    a: &WeightedPermutationOperator,
    n: i64,
) -> Result<Dyadic> {
    a.proj_norm_power(s, n)
}
