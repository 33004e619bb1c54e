use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite set of basis indices `{i_1 < i_2 < ...}` (1-based), naming the
/// coordinate subspace `span{e_i}`. `L_m` is `{1, ..., m}`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "Vec<u64>", try_from = "Vec<u64>")]
pub struct SubspaceSpec {
    indices: BTreeSet<u64>,
}

impl SubspaceSpec {
    pub fn empty() -> Self {
        SubspaceSpec::default()
    }

    /// `L_m = span{e_1, ..., e_m}`.
    pub fn leading(m: u64) -> Self {
        SubspaceSpec {
            indices: (1..=m).collect(),
        }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = u64>) -> Result<Self> {
        let indices: BTreeSet<u64> = indices.into_iter().collect();
        if indices.contains(&0) {
            return Err(Error::Config("basis indices start at 1".into()));
        }
        Ok(SubspaceSpec { indices })
    }

    pub fn contains(&self, j: u64) -> bool {
        self.indices.contains(&j)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max(&self) -> Option<u64> {
        self.indices.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.indices.iter().copied()
    }

    /// True when this is exactly `L_m` for some `m`.
    pub fn is_leading(&self) -> bool {
        self.max() == Some(self.len() as u64)
    }

    pub fn is_subset(&self, other: &SubspaceSpec) -> bool {
        self.indices.is_subset(&other.indices)
    }

    pub fn union(&self, other: &SubspaceSpec) -> SubspaceSpec {
        SubspaceSpec {
            indices: self.indices.union(&other.indices).copied().collect(),
        }
    }

    pub fn intersection(&self, other: &SubspaceSpec) -> SubspaceSpec {
        SubspaceSpec {
            indices: self.indices.intersection(&other.indices).copied().collect(),
        }
    }

    /// `(odd indices, even indices)`.
    pub fn split_by_parity(&self) -> (SubspaceSpec, SubspaceSpec) {
        let (odd, even): (BTreeSet<u64>, BTreeSet<u64>) =
            self.indices.iter().partition(|&&j| j % 2 == 1);
        (SubspaceSpec { indices: odd }, SubspaceSpec { indices: even })
    }
}

impl From<SubspaceSpec> for Vec<u64> {
    fn from(s: SubspaceSpec) -> Self {
        s.indices.into_iter().collect()
    }
}

impl TryFrom<Vec<u64>> for SubspaceSpec {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        SubspaceSpec::from_indices(v)
    }
}

impl fmt::Display for SubspaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leading() && self.len() > 3 {
            return write!(f, "L_{}", self.len());
        }
        let parts: Vec<String> = self.indices.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for SubspaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
