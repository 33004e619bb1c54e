//! Sparse finite-rank operators `F = Σ c_ij ⟨·, e_j⟩ e_i`.

mod norms;

pub use norms::NormKind;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Dyadic, Mode, Scalar, SubspaceSpec};
use crate::structured::WeightedPermutationOperator;

/// Default bound on the number of stored entries.
pub const DEFAULT_SUPPORT_CAP: usize = 100_000;

/// One stored coefficient in text form, as written to reports and fixtures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: u64,
    pub col: u64,
    pub value: String,
}

/// Finite coefficient map `(row, col) ↦ c`. Zero entries are never stored.
#[derive(Clone, PartialEq)]
pub struct FiniteRankOperator {
    entries: BTreeMap<(u64, u64), Scalar>,
    mode: Mode,
}

impl FiniteRankOperator {
    pub fn zero(mode: Mode) -> Self {
        FiniteRankOperator {
            entries: BTreeMap::new(),
            mode,
        }
    }

    /// Orthogonal projection onto `span{e_i : i ∈ s}`.
    pub fn projection(s: &SubspaceSpec, mode: Mode) -> Self {
        let one = Scalar::one(mode);
        FiniteRankOperator {
            entries: s.iter().map(|i| ((i, i), one.clone())).collect(),
            mode,
        }
    }

    /// `c · e_row ⊗ e_col*`.
    pub fn rank_one(row: u64, col: u64, c: Scalar) -> Result<Self> {
        let mode = c.mode();
        Self::from_triplets(mode, [(row, col, c)])
    }

    /// Builds from `(row, col, value)`; duplicates are summed.
    pub fn from_triplets(
        mode: Mode,
        triplets: impl IntoIterator<Item = (u64, u64, Scalar)>,
    ) -> Result<Self> {
        let mut out = FiniteRankOperator::zero(mode);
        for (i, j, c) in triplets {
            if i == 0 || j == 0 {
                return Err(Error::Config("basis indices start at 1".into()));
            }
            if c.mode() != mode {
                return Err(Error::Config(format!(
                    "entry ({i},{j}) is {} but the operator is {mode}",
                    c.mode()
                )));
            }
            out.accumulate((i, j), c)?;
        }
        Ok(out)
    }

    /// Parses text triplets in the given mode.
    pub fn from_text_triplets(mode: Mode, triplets: &[Triplet]) -> Result<Self> {
        let parsed = triplets
            .iter()
            .map(|t| Ok((t.row, t.col, Scalar::parse(&t.value, mode)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_triplets(mode, parsed)
    }

    pub fn to_triplets(&self) -> Vec<Triplet> {
        self.entries
            .iter()
            .map(|(&(row, col), c)| Triplet {
                row,
                col,
                value: c.to_string(),
            })
            .collect()
    }

    fn accumulate(&mut self, key: (u64, u64), c: Scalar) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        match self.entries.remove(&key) {
            Some(old) => {
                let sum = old.add(&c)?;
                if !sum.is_zero() {
                    self.entries.insert(key, sum);
                }
            }
            None => {
                self.entries.insert(key, c);
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, row: u64, col: u64) -> Scalar {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.mode))
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64, &Scalar)> + '_ {
        self.entries.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn row_support(&self) -> BTreeSet<u64> {
        self.entries.keys().map(|&(i, _)| i).collect()
    }

    pub fn col_support(&self) -> BTreeSet<u64> {
        self.entries.keys().map(|&(_, j)| j).collect()
    }

    /// True when every row and column index lies in `s`, i.e. `P_s F P_s = F`.
    pub fn supported_in(&self, s: &SubspaceSpec) -> bool {
        self.entries.keys().all(|&(i, j)| s.contains(i) && s.contains(j))
    }

    /// Errors once more than `cap` entries are stored.
    pub fn check_cap(&self, cap: usize) -> Result<()> {
        if self.entries.len() > cap {
            return Err(Error::Overflow(format!(
                "support grew to {} entries (cap {cap})",
                self.entries.len()
            )));
        }
        Ok(())
    }

    fn same_mode(&self, other: &Self) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::Config(format!(
                "mode mismatch: {} vs {}",
                self.mode, other.mode
            )));
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, other: &Self, a: &Scalar, b: &Scalar) -> Result<Self> {
        self.same_mode(other)?;
        if a.mode() != self.mode || b.mode() != self.mode {
            return Err(Error::Config("coefficient mode differs from operator mode".into()));
        }
        let mut out = self.scale(a)?;
        for (&k, c) in &other.entries {
            out.accumulate(k, c.mul(b)?)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let one = Scalar::one(self.mode);
        self.combine(other, &one, &one)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let one = Scalar::one(self.mode);
        self.combine(other, &one, &one.neg())
    }

    pub fn scale(&self, a: &Scalar) -> Result<Self> {
        let mut out = FiniteRankOperator::zero(self.mode);
        for (&k, c) in &self.entries {
            out.accumulate(k, c.mul(a)?)?;
        }
        Ok(out)
    }

    pub fn scale_dyadic(&self, a: &Dyadic) -> Result<Self> {
        let mut out = FiniteRankOperator::zero(self.mode);
        for (&k, c) in &self.entries {
            out.accumulate(k, c.scale_dyadic(a)?)?;
        }
        Ok(out)
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_mode(other)?;
        let mut rows_of_other: BTreeMap<u64, Vec<(u64, &Scalar)>> = BTreeMap::new();
        for (&(j, k), c) in &other.entries {
            rows_of_other.entry(j).or_default().push((k, c));
        }
        let mut out = FiniteRankOperator::zero(self.mode);
        for (&(i, j), a) in &self.entries {
            if let Some(row) = rows_of_other.get(&j) {
                for &(k, b) in row {
                    out.accumulate((i, k), a.mul(b)?)?;
                }
            }
        }
        Ok(out)
    }

    /// Real transpose, which is also the adjoint.
    pub fn transpose(&self) -> Self {
        FiniteRankOperator {
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), c)| ((j, i), c.clone()))
                .collect(),
            mode: self.mode,
        }
    }

    pub fn trace(&self) -> Result<Scalar> {
        let mut t = Scalar::zero(self.mode);
        for (&(i, j), c) in &self.entries {
            if i == j {
                t = t.add(c)?;
            }
        }
        Ok(t)
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Self> {
        let mut out = FiniteRankOperator::zero(mode);
        for (&k, c) in &self.entries {
            out.accumulate(k, c.clone().into_mode(mode)?)?;
        }
        Ok(out)
    }

    /// `P_s F`.
    pub fn project_rows(&self, s: &SubspaceSpec) -> Self {
        self.filtered(|i, _| s.contains(i))
    }

    /// `F P_s`.
    pub fn project_cols(&self, s: &SubspaceSpec) -> Self {
        self.filtered(|_, j| s.contains(j))
    }

    fn filtered(&self, keep: impl Fn(u64, u64) -> bool) -> Self {
        FiniteRankOperator {
            entries: self
                .entries
                .iter()
                .filter(|(&(i, j), _)| keep(i, j))
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
            mode: self.mode,
        }
    }

    /// `A^n · self`: entry `c` at `(i, j)` moves to `(σ^n(i), j)` scaled by the
    /// weight of `A^n e_i`.
    pub fn left_mul_power(&self, a: &WeightedPermutationOperator, n: i64) -> Result<Self> {
        let mut out = FiniteRankOperator::zero(self.mode);
        for (&(i, j), c) in &self.entries {
            let s = a.apply_power(n, i)?;
            out.accumulate((s.index, j), c.scale_dyadic(&s.weight)?)?;
        }
        Ok(out)
    }

    /// `self · A^n`: column `k` of the product is `w · (column σ^n(k) of self)`
    /// where `A^n e_k = w e_{σ^n(k)}`.
    pub fn right_mul_power(&self, a: &WeightedPermutationOperator, n: i64) -> Result<Self> {
        let mut out = FiniteRankOperator::zero(self.mode);
        for (&(i, j), c) in &self.entries {
            let k = a.rule().power(-n, j)?;
            let s = a.apply_power(n, k)?;
            debug_assert_eq!(s.index, j);
            out.accumulate((i, k), c.scale_dyadic(&s.weight)?)?;
        }
        Ok(out)
    }

    /// Largest `|c_ij|`.
    pub fn max_abs_entry(&self) -> Result<f64> {
        let mut best = 0.0f64;
        for c in self.entries.values() {
            best = best.max(c.to_f64()?.abs());
        }
        Ok(best)
    }
}

impl fmt::Debug for FiniteRankOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRank[{}]{{", self.mode)?;
        for (n, (&(i, j), c)) in self.entries.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({i},{j}):{c}")?;
        }
        f.write_str("}")
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    mode: Mode,
    entries: Vec<Triplet>,
}

impl Serialize for FiniteRankOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            mode: self.mode,
            entries: self.to_triplets(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteRankOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        FiniteRankOperator::from_text_triplets(w.mode, &w.entries).map_err(serde::de::Error::custom)
    }
}
