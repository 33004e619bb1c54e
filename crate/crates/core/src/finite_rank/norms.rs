use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FiniteRankOperator;
use crate::error::{Error, Result};
use crate::scalar::Dyadic;

/// Which Schatten norm to take: `p = ∞` (operator) or `p = 1` (trace).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Operator,
    Trace,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Operator => "operator",
            NormKind::Trace => "trace",
        })
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "operator" | "op" => Ok(NormKind::Operator),
            "trace" => Ok(NormKind::Trace),
            other => Err(Error::Parse(format!("unknown norm '{other}'"))),
        }
    }
}

impl FiniteRankOperator {
    /// Singular values of the support block, largest first.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.entries.is_empty() {
            return Ok(Vec::new());
        }
        let rows: BTreeMap<u64, usize> = index_map(self.row_support());
        let cols: BTreeMap<u64, usize> = index_map(self.col_support());
        let mut m = DMatrix::<f64>::zeros(rows.len(), cols.len());
        for (&(i, j), c) in &self.entries {
            m[(rows[&i], cols[&j])] = c.to_f64()?;
        }
        let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// When every row and every column holds at most one entry the singular
    /// values are exactly the `|c_ij|`; returns them as dyadics in that case.
    pub fn partial_permutation_values(&self) -> Option<Vec<Dyadic>> {
        let mut rows = BTreeSet::new();
        let mut cols = BTreeSet::new();
        let mut out = Vec::with_capacity(self.entries.len());
        for (&(i, j), c) in &self.entries {
            if !rows.insert(i) || !cols.insert(j) {
                return None;
            }
            out.push(c.as_exact()?.abs());
        }
        Some(out)
    }

    /// Exact norm, available for partial-permutation supports in exact mode.
    pub fn exact_norm(&self, which: NormKind) -> Option<Dyadic> {
        let vals = self.partial_permutation_values()?;
        Some(match which {
            NormKind::Operator => vals.into_iter().max().unwrap_or_default(),
            NormKind::Trace => vals.into_iter().sum(),
        })
    }

    pub fn operator_norm(&self) -> Result<f64> {
        self.norm(NormKind::Operator)
    }

    pub fn trace_norm(&self) -> Result<f64> {
        self.norm(NormKind::Trace)
    }

    pub fn norm(&self, which: NormKind) -> Result<f64> {
        if let Some(d) = self.exact_norm(which) {
            return d.to_f64();
        }
        let sv = self.singular_values()?;
        Ok(match which {
            NormKind::Operator => sv.first().copied().unwrap_or(0.0),
            NormKind::Trace => sv.iter().sum(),
        })
    }

    /// `‖self − other‖` in the chosen norm.
    pub fn distance(&self, other: &FiniteRankOperator, which: NormKind) -> Result<f64> {
        self.sub(other)?.norm(which)
    }
}

fn index_map(set: BTreeSet<u64>) -> BTreeMap<u64, usize> {
    set.into_iter().enumerate().map(|(n, i)| (i, n)).collect()
}
