//! Finite checkers for the norm-decay conditions that drive transitivity,
//! hypercyclicity and chaos of `T(F) = W F U` and its cosine and adjoint
//! relatives.
//!
//! Abstract witness sequences `G_k, D_k` are always taken to be `P_m`, so
//! every check reduces to compression norms of powers of `W`.

mod catalog;
mod checks;
mod series;
mod split;

pub use catalog::{catalog, statement_for};
pub use checks::{
    check_adjoint_conditions, check_hypercyclicity_condition, check_necessary_m_condition,
    check_periodic_necessary, check_zero_transitivity, orthogonality_horizon,
    orthogonality_report, AdjointVariant,
};
pub use series::{check_cosine_series, check_series_condition, certify_series, SeriesCertificate, TailPolicy};
pub use split::{check_cosine_split, find_cosine_split, Side, SplitEntry, SplitOutcome, SplitWitness};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Dyadic;

/// Default decay threshold.
pub const DEFAULT_THRESHOLD: f64 = 1e-6;
/// Default number of trailing entries that must be non-increasing.
pub const DEFAULT_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Finite stand-in for `lim = 0`: below `threshold` at the last entry and
/// non-increasing over the last `window` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRule {
    pub threshold: f64,
    pub window: usize,
}

impl Default for DecayRule {
    fn default() -> Self {
        DecayRule {
            threshold: DEFAULT_THRESHOLD,
            window: DEFAULT_WINDOW,
        }
    }
}

impl DecayRule {
    pub fn new(threshold: f64, window: usize) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
        }
        if window == 0 {
            return Err(Error::Config("decay window must be at least 1".into()));
        }
        Ok(DecayRule { threshold, window })
    }

    pub fn decays(&self, values: &[f64]) -> bool {
        let Some(&last) = values.last() else {
            return false;
        };
        if !(last < self.threshold) {
            return false;
        }
        let tail = &values[values.len().saturating_sub(self.window)..];
        tail.windows(2).all(|p| p[1] <= p[0])
    }

    /// True when the last value already certifies that the quantity is not small.
    pub fn stuck_above(&self, values: &[f64]) -> bool {
        values.last().is_some_and(|&v| !(v < self.threshold))
    }
}

/// One `(k, n_k)` pair of a strictly increasing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub k: u64,
    pub n: u64,
}

/// Strictly increasing sequence `n_1 < n_2 < ...` of positive powers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Schedule {
    points: Vec<SchedulePoint>,
}

impl Schedule {
    /// `n_k = k + offset` for `k = 1..=count`.
    pub fn affine(offset: u64, count: u64) -> Result<Self> {
        Self::explicit((1..=count).map(|k| k + offset).collect())
    }

    pub fn explicit(ns: Vec<u64>) -> Result<Self> {
        if ns.is_empty() {
            return Err(Error::Config("schedule is empty".into()));
        }
        if ns[0] == 0 {
            return Err(Error::Config("schedule powers must be positive".into()));
        }
        if let Some(p) = ns.windows(2).find(|p| p[1] <= p[0]) {
            return Err(Error::Config(format!(
                "schedule must be strictly increasing ({} then {})",
                p[0], p[1]
            )));
        }
        if ns.iter().any(|&n| n > i64::MAX as u64 / 4) {
            return Err(Error::Config("schedule power too large".into()));
        }
        Ok(Schedule {
            points: ns
                .into_iter()
                .enumerate()
                .map(|(i, n)| SchedulePoint { k: i as u64 + 1, n })
                .collect(),
        })
    }

    pub fn points(&self) -> &[SchedulePoint] {
        &self.points
    }

    pub fn ns(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.n).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> u64 {
        self.points[0].n
    }
}

impl TryFrom<Vec<u64>> for Schedule {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Schedule::explicit(v)
    }
}

impl From<Schedule> for Vec<u64> {
    fn from(s: Schedule) -> Self {
        s.ns()
    }
}

/// One tracked value of a decay table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: u64,
    pub n: i64,
    pub quantity: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<Dyadic>,
}

impl DecayRow {
    pub fn exact(k: u64, n: i64, quantity: impl Into<String>, value: Dyadic) -> Self {
        DecayRow {
            k,
            n,
            quantity: quantity.into(),
            value: value.to_f64_lossy(),
            exact: Some(value),
        }
    }

    pub fn float(k: u64, n: i64, quantity: impl Into<String>, value: f64) -> Self {
        DecayRow {
            k,
            n,
            quantity: quantity.into(),
            value,
            exact: None,
        }
    }
}

/// Parameters of the witness sequences a checker settled on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct WitnessParams {
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub schedule: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<SplitWitness>,
}

/// Outcome of one checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: String,
    pub statement: String,
    pub parameters: BTreeMap<String, String>,
    pub decay: Vec<DecayRow>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessParams>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl CriterionReport {
    pub fn new(id: &str) -> Self {
        CriterionReport {
            id: id.to_string(),
            statement: statement_for(id).unwrap_or_default().to_string(),
            parameters: BTreeMap::new(),
            decay: Vec::new(),
            verdict: Verdict::Inconclusive,
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Values of one tracked quantity in table order.
    pub fn series(&self, quantity: &str) -> Vec<f64> {
        self.decay
            .iter()
            .filter(|r| r.quantity == quantity)
            .map(|r| r.value)
            .collect()
    }

    pub fn exact_series(&self, quantity: &str) -> Vec<Option<Dyadic>> {
        self.decay
            .iter()
            .filter(|r| r.quantity == quantity)
            .map(|r| r.exact.clone())
            .collect()
    }

    /// Distinct quantity names in first-seen order.
    pub fn quantities(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.decay {
            if !out.contains(&r.quantity) {
                out.push(r.quantity.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_rule() {
        let r = DecayRule::default();
        assert!(r.decays(&[1.0, 0.5, 1e-7, 1e-8]));
        assert!(!r.decays(&[1e-7, 1e-8, 1e-9, 1e-5]));
        assert!(!r.decays(&[1e-7, 1e-9, 1e-8]));
        assert!(r.decays(&[1.0, 1e-7, 1e-8, 1e-9]));
        assert!(!r.decays(&[]));
        assert!(r.stuck_above(&[1.0]));
        assert!(DecayRule::new(0.0, 3).is_err());
        assert!(DecayRule::new(1e-3, 0).is_err());
    }

    #[test]
    fn schedules() {
        let s = Schedule::affine(3, 4).unwrap();
        assert_eq!(s.ns(), vec![4, 5, 6, 7]);
        assert_eq!(s.points()[2], SchedulePoint { k: 3, n: 6 });
        assert!(matches!(Schedule::explicit(vec![5, 5, 5]), Err(Error::Config(_))));
        assert!(Schedule::explicit(vec![]).is_err());
        assert!(Schedule::explicit(vec![0, 1]).is_err());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[4,5,6,7]");
        assert!(serde_json::from_str::<Schedule>("[3,2]").is_err());
    }
}
