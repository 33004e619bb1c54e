use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Dyadic;

/// Column weights `j ↦ w_j` of a weighted permutation operator.
#[derive(Clone)]
pub enum WeightRule {
    /// `w_j = values[j % period]` unless `j` has an entry in `exceptions`.
    Periodic {
        period: u64,
        values: Vec<Dyadic>,
        exceptions: BTreeMap<u64, Dyadic>,
    },
    /// Arbitrary weight function; bounds are only known up to `horizon`.
    Probed {
        label: String,
        weight: Arc<dyn Fn(u64) -> Dyadic + Send + Sync>,
        horizon: Option<u64>,
    },
}

impl WeightRule {
    pub fn constant(value: Dyadic) -> Self {
        WeightRule::Periodic {
            period: 1,
            values: vec![value],
            exceptions: BTreeMap::new(),
        }
    }

    pub fn periodic(
        period: u64,
        values: Vec<Dyadic>,
        exceptions: BTreeMap<u64, Dyadic>,
    ) -> Result<Self> {
        if period == 0 || values.len() as u64 != period {
            return Err(Error::Config(format!(
                "weight pattern needs one value per residue class (period {period}, got {})",
                values.len()
            )));
        }
        if exceptions.contains_key(&0) {
            return Err(Error::Config("weight exceptions are indexed from 1".into()));
        }
        Ok(WeightRule::Periodic {
            period,
            values,
            exceptions,
        })
    }

    pub fn at(&self, j: u64) -> Dyadic {
        match self {
            WeightRule::Periodic {
                period,
                values,
                exceptions,
            } => exceptions
                .get(&j)
                .cloned()
                .unwrap_or_else(|| values[(j % period) as usize].clone()),
            WeightRule::Probed { weight, .. } => weight(j),
        }
    }

    /// Every weight value taken, when the pattern makes that set finite and
    /// known; otherwise the values on `1..=horizon`.
    pub(crate) fn attained_values(&self) -> Option<Vec<Dyadic>> {
        match self {
            // each residue class is infinite, so every class value is attained
            WeightRule::Periodic {
                values, exceptions, ..
            } => Some(values.iter().chain(exceptions.values()).cloned().collect()),
            WeightRule::Probed {
                weight,
                horizon: Some(h),
                ..
            } => Some((1..=*h).map(|j| weight(j)).collect()),
            WeightRule::Probed { horizon: None, .. } => None,
        }
    }

    pub fn is_declared(&self) -> bool {
        !matches!(self, WeightRule::Probed { horizon: None, .. })
    }
}

impl fmt::Debug for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRule::Periodic {
                period,
                values,
                exceptions,
            } => f
                .debug_struct("Periodic")
                .field("period", period)
                .field("values", values)
                .field("exceptions", exceptions)
                .finish(),
            WeightRule::Probed { label, horizon, .. } => f
                .debug_struct("Probed")
                .field("label", label)
                .field("horizon", horizon)
                .finish(),
        }
    }
}
