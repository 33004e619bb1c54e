use std::fmt;

use serde::{Deserialize, Serialize};

use super::checks::{leading, require_invertible, signed};
use super::{CriterionReport, DecayRow, DecayRule, Schedule, Verdict, WitnessParams};
use crate::error::{Error, Result};
use crate::scalar::{Dyadic, SubspaceSpec};
use crate::structured::WeightedPermutationOperator;

/// Where the projection sits: `‖W^n P_s‖` (right) or `‖P_s W^n‖` (left).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Right => "right",
            Side::Left => "left",
        })
    }
}

fn compression(
    w: &WeightedPermutationOperator,
    side: Side,
    n: i64,
    s: &SubspaceSpec,
) -> Result<Dyadic> {
    match side {
        Side::Right => w.norm_power_proj(n, s),
        Side::Left => w.proj_norm_power(s, n),
    }
}

/// Quantity labels for one side, in the order `(n, -n, 2n on E, -2n on R)`.
fn labels(side: Side) -> [&'static str; 4] {
    match side {
        Side::Right => ["||W^n P_m||", "||W^-n P_m||", "||W^2n P_E||", "||W^-2n P_R||"],
        Side::Left => ["||P_m W^n||", "||P_m W^-n||", "||P_E W^2n||", "||P_R W^-2n||"],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub k: u64,
    pub n: u64,
    pub e: SubspaceSpec,
    pub r: SubspaceSpec,
    /// `‖W^{2n} P_E‖` (or the left form).
    pub forward: Dyadic,
    /// `‖W^{-2n} P_R‖` (or the left form).
    pub backward: Dyadic,
}

/// A decomposition `L_m = E_k ⊕ R_k` per scheduled power.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitWitness {
    pub m: u64,
    pub side: Side,
    pub entries: Vec<SplitEntry>,
}

impl SplitWitness {
    /// Every entry must partition `{1..m}`.
    pub fn validate(&self) -> Result<()> {
        let lm = SubspaceSpec::leading(self.m);
        for e in &self.entries {
            if e.e.union(&e.r) != lm || !e.e.intersection(&e.r).is_empty() {
                return Err(Error::Precondition(format!(
                    "split at k={} is not a partition of L_{}",
                    e.k, self.m
                )));
            }
        }
        Ok(())
    }

    pub fn entry(&self, k: u64) -> Option<&SplitEntry> {
        self.entries.iter().find(|e| e.k == k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "outcome")]
pub enum SplitOutcome {
    Found(SplitWitness),
    Inconclusive { best: SplitWitness, reason: String },
}

impl SplitOutcome {
    pub fn witness(&self) -> &SplitWitness {
        match self {
            SplitOutcome::Found(w) => w,
            SplitOutcome::Inconclusive { best, .. } => best,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SplitOutcome::Found(_))
    }
}

/// Greedy per-index split: `j` goes to `E_k` when its forward `2n_k` weight is
/// at most its backward one. Compression norms of coordinate projections are
/// maxima over indices, so this choice minimises both tracked norms at once.
pub fn find_cosine_split(
    w: &WeightedPermutationOperator,
    m: u64,
    schedule: &Schedule,
    rule: &DecayRule,
    side: Side,
) -> Result<SplitOutcome> {
    require_invertible(w)?;
    leading(m)?;
    let mut entries = Vec::with_capacity(schedule.len());
    for p in schedule.points() {
        let n2 = 2 * signed(p.n);
        let mut e = Vec::new();
        let mut r = Vec::new();
        let mut forward = Dyadic::zero();
        let mut backward = Dyadic::zero();
        for j in 1..=m {
            let single = SubspaceSpec::from_indices([j])?;
            let f = compression(w, side, n2, &single)?;
            let b = compression(w, side, -n2, &single)?;
            if f <= b {
                e.push(j);
                forward = forward.max(f);
            } else {
                r.push(j);
                backward = backward.max(b);
            }
        }
        entries.push(SplitEntry {
            k: p.k,
            n: p.n,
            e: SubspaceSpec::from_indices(e)?,
            r: SubspaceSpec::from_indices(r)?,
            forward,
            backward,
        });
    }
    let witness = SplitWitness { m, side, entries };
    let fw: Vec<f64> = witness.entries.iter().map(|e| e.forward.to_f64_lossy()).collect();
    let bw: Vec<f64> = witness.entries.iter().map(|e| e.backward.to_f64_lossy()).collect();
    Ok(if rule.decays(&fw) && rule.decays(&bw) {
        SplitOutcome::Found(witness)
    } else {
        SplitOutcome::Inconclusive {
            best: witness,
            reason: format!(
                "no assignment of L_{m} decays along the schedule (forward decays: {}, backward decays: {})",
                rule.decays(&fw),
                rule.decays(&bw)
            ),
        }
    })
}

/// Two-sided `P_m` decay plus the split search.
///
/// Fails when either `P_m` quantity does not decay; when those decay but no
/// split is found the result is inconclusive.
pub fn check_cosine_split(
    w: &WeightedPermutationOperator,
    m: u64,
    schedule: &Schedule,
    rule: &DecayRule,
    side: Side,
) -> Result<CriterionReport> {
    require_invertible(w)?;
    let pm = leading(m)?;
    let id = match side {
        Side::Right => "cosine-split",
        Side::Left => "adjoint-split",
    };
    let [q_fw, q_bw, q_e, q_r] = labels(side);
    let mut report = CriterionReport::new(id)
        .param("W", w.name())
        .param("m", m)
        .param("side", side)
        .param("threshold", rule.threshold)
        .param("window", rule.window);
    let outcome = find_cosine_split(w, m, schedule, rule, side)?;
    for (p, entry) in schedule.points().iter().zip(&outcome.witness().entries) {
        let n = signed(p.n);
        report
            .decay
            .push(DecayRow::exact(p.k, n, q_fw, compression(w, side, n, &pm)?));
        report
            .decay
            .push(DecayRow::exact(p.k, -n, q_bw, compression(w, side, -n, &pm)?));
        report
            .decay
            .push(DecayRow::exact(p.k, 2 * n, q_e, entry.forward.clone()));
        report
            .decay
            .push(DecayRow::exact(p.k, -2 * n, q_r, entry.backward.clone()));
    }
    let base = rule.decays(&report.series(q_fw)) && rule.decays(&report.series(q_bw));
    report.verdict = match (&outcome, base) {
        (_, false) => Verdict::Fail,
        (SplitOutcome::Found(_), true) => Verdict::Pass,
        (SplitOutcome::Inconclusive { reason, .. }, true) => {
            report.notes.push(reason.clone());
            Verdict::Inconclusive
        }
    };
    report.witness = Some(WitnessParams {
        schedule: schedule.ns(),
        horizon: None,
        split: Some(outcome.witness().clone()),
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structured::{build_aperiodic_shift, build_example_w, scaled_identity};

    fn odd_even(m: u64) -> (SubspaceSpec, SubspaceSpec) {
        SubspaceSpec::leading(m).split_by_parity()
    }

    #[test]
    fn parity_split_for_the_example() {
        let rule = DecayRule::default();
        let sched = Schedule::affine(3, 20).unwrap();
        let out = find_cosine_split(&build_example_w(), 4, &sched, &rule, Side::Right).unwrap();
        assert!(out.is_found());
        let wit = out.witness();
        wit.validate().unwrap();
        let (odd, even) = odd_even(4);
        for e in &wit.entries {
            assert_eq!(e.e, odd);
            assert_eq!(e.r, even);
            assert_eq!(e.forward, Dyadic::pow2(-2 * e.n as i64));
            assert_eq!(e.backward, Dyadic::pow2(-2 * e.n as i64));
        }
        let r = check_cosine_split(&build_example_w(), 4, &sched, &rule, Side::Right).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn left_parity_split_for_the_adjoint() {
        let rule = DecayRule::default();
        let sched = Schedule::affine(3, 20).unwrap();
        let wa = build_example_w().adjoint();
        let r = check_cosine_split(&wa, 4, &sched, &rule, Side::Left).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let split = r.witness.unwrap().split.unwrap();
        let (odd, even) = odd_even(4);
        assert!(split.entries.iter().all(|e| e.e == odd && e.r == even));
    }

    #[test]
    fn no_split_for_non_decaying_weights() {
        let rule = DecayRule::default();
        let sched = Schedule::affine(3, 10).unwrap();
        let u = build_aperiodic_shift();
        let out = find_cosine_split(&u, 3, &sched, &rule, Side::Right).unwrap();
        assert!(!out.is_found());
        assert_eq!(
            check_cosine_split(&u, 3, &sched, &rule, Side::Right).unwrap().verdict,
            Verdict::Fail
        );
        let two = scaled_identity(Dyadic::from_int(2));
        // every column is sent backward, so only the empty E decays forward
        let out = find_cosine_split(&two, 2, &sched, &rule, Side::Right).unwrap();
        assert!(out.witness().entries.iter().all(|e| e.e.is_empty()));
        assert_eq!(
            check_cosine_split(&two, 2, &sched, &rule, Side::Right).unwrap().verdict,
            Verdict::Fail
        );
    }

    #[test]
    fn malformed_split_is_rejected() {
        let bad = SplitWitness {
            m: 3,
            side: Side::Right,
            entries: vec![SplitEntry {
                k: 1,
                n: 4,
                e: SubspaceSpec::from_indices([1, 2]).unwrap(),
                r: SubspaceSpec::from_indices([2]).unwrap(),
                forward: Dyadic::zero(),
                backward: Dyadic::zero(),
            }],
        };
        assert!(matches!(bad.validate(), Err(Error::Precondition(_))));
    }
}
