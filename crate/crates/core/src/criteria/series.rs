use serde::{Deserialize, Serialize};

use super::checks::{leading, require_invertible, signed};
use super::{CriterionReport, DecayRow, DecayRule, Schedule, Verdict, WitnessParams};
use crate::error::{Error, Result};
use crate::scalar::{Dyadic, SubspaceSpec};
use crate::structured::WeightedPermutationOperator;

/// When to trust a geometric tail: after `run` consecutive ratios
/// `term_{l+1}/term_l <= ratio`, the remainder is bounded by
/// `term_L · ratio / (1 - ratio)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    pub ratio: f64,
    pub run: usize,
    pub max_terms: usize,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            ratio: 0.5,
            run: 3,
            max_terms: 64,
        }
    }
}

impl TailPolicy {
    pub fn new(ratio: f64, run: usize, max_terms: usize) -> Result<Self> {
        let p = TailPolicy {
            ratio,
            run,
            max_terms,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Config(format!(
                "tail ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        if self.run == 0 || self.max_terms <= self.run {
            return Err(Error::Config(
                "tail policy needs run >= 1 and max_terms > run".into(),
            ));
        }
        Ok(())
    }

    /// `term · r / (1 - r)`.
    pub fn tail_factor(&self) -> f64 {
        self.ratio / (1.0 - self.ratio)
    }
}

/// Partial sum of `Σ_{l>=1} ‖W^{l n} P_s‖` and, when certified, a tail bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCertificate {
    pub n: i64,
    pub terms: Vec<Dyadic>,
    pub partial_sum: Dyadic,
    pub tail_bound: Option<f64>,
}

impl SeriesCertificate {
    pub fn certified(&self) -> bool {
        self.tail_bound.is_some()
    }

    /// Partial sum plus tail when certified, else the partial sum (a lower bound).
    pub fn value(&self) -> f64 {
        self.partial_sum.to_f64_lossy() + self.tail_bound.unwrap_or(0.0)
    }
}

fn ratio_ok(prev: &Dyadic, next: &Dyadic, r: f64) -> bool {
    if prev.is_zero() {
        return next.is_zero();
    }
    next.to_f64_lossy() <= r * prev.to_f64_lossy()
}

/// Sums `‖W^{l n} P_s‖` for `l = 1, 2, ...` until the policy certifies the tail
/// or `max_terms` is reached.
pub fn certify_series(
    w: &WeightedPermutationOperator,
    s: &SubspaceSpec,
    n: i64,
    policy: &TailPolicy,
) -> Result<SeriesCertificate> {
    policy.validate()?;
    let mut terms: Vec<Dyadic> = Vec::new();
    let mut partial = Dyadic::zero();
    let mut streak = 0usize;
    for l in 1..=policy.max_terms as i64 {
        let power = l
            .checked_mul(n)
            .ok_or_else(|| Error::Overflow(format!("power {l}*{n} overflows")))?;
        let term = w.norm_power_proj(power, s)?;
        partial = &partial + &term;
        if let Some(prev) = terms.last() {
            streak = if ratio_ok(prev, &term, policy.ratio) {
                streak + 1
            } else {
                0
            };
        }
        terms.push(term);
        if streak >= policy.run {
            let last = terms.last().expect("non-empty");
            return Ok(SeriesCertificate {
                n,
                tail_bound: Some(last.to_f64_lossy() * policy.tail_factor()),
                terms,
                partial_sum: partial,
            });
        }
    }
    Ok(SeriesCertificate {
        n,
        terms,
        partial_sum: partial,
        tail_bound: None,
    })
}

/// Tracks certified upper bounds of both two-sided series along the schedule.
///
/// Passes when both bounds are certified at every `k` and decay; fails when a
/// bound (or, uncertified, the partial sum) is stuck above the threshold;
/// inconclusive when some tail is never certified otherwise.
pub fn check_series_condition(
    w: &WeightedPermutationOperator,
    m: u64,
    schedule: &Schedule,
    policy: &TailPolicy,
    rule: &DecayRule,
) -> Result<CriterionReport> {
    series_report("chaos-series", w, m, schedule, policy, rule)
}

/// The same two-sided series condition, reported for the cosine family.
pub fn check_cosine_series(
    w: &WeightedPermutationOperator,
    m: u64,
    schedule: &Schedule,
    policy: &TailPolicy,
    rule: &DecayRule,
) -> Result<CriterionReport> {
    series_report("cosine-series", w, m, schedule, policy, rule)
}

fn series_report(
    id: &str,
    w: &WeightedPermutationOperator,
    m: u64,
    schedule: &Schedule,
    policy: &TailPolicy,
    rule: &DecayRule,
) -> Result<CriterionReport> {
    require_invertible(w)?;
    policy.validate()?;
    let pm = leading(m)?;
    let mut report = CriterionReport::new(id)
        .param("W", w.name())
        .param("m", m)
        .param("tail_ratio", policy.ratio)
        .param("tail_run", policy.run)
        .param("max_terms", policy.max_terms)
        .param("threshold", rule.threshold);
    let names = [
        ("sum_l ||W^(l n) P_m||", "partial sum forward"),
        ("sum_l ||W^(-l n) P_m||", "partial sum backward"),
    ];
    let mut all_certified = true;
    for p in schedule.points() {
        for (sign, (bound_name, partial_name)) in [1i64, -1].into_iter().zip(names) {
            let n = sign * signed(p.n);
            let cert = certify_series(w, &pm, n, policy)?;
            if !cert.certified() {
                all_certified = false;
                report.notes.push(format!(
                    "k={}: tail of {bound_name} not certified within {} terms",
                    p.k, policy.max_terms
                ));
            }
            report
                .decay
                .push(DecayRow::float(p.k, n, bound_name, cert.value()));
            report
                .decay
                .push(DecayRow::exact(p.k, n, partial_name, cert.partial_sum));
        }
    }
    let fw = report.series(names[0].0);
    let bw = report.series(names[1].0);
    report.verdict = if rule.stuck_above(&fw) || rule.stuck_above(&bw) {
        Verdict::Fail
    } else if !all_certified {
        Verdict::Inconclusive
    } else if rule.decays(&fw) && rule.decays(&bw) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.witness = Some(WitnessParams {
        schedule: schedule.ns(),
        ..Default::default()
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::check_hypercyclicity_condition;
    use crate::structured::{build_aperiodic_shift, build_example_w};

    #[test]
    fn policy_validation() {
        assert!(TailPolicy::new(1.0, 3, 64).is_err());
        assert!(TailPolicy::new(1.5, 3, 64).is_err());
        assert!(TailPolicy::new(0.5, 0, 64).is_err());
        assert!(TailPolicy::new(0.5, 3, 3).is_err());
        assert!(TailPolicy::new(0.5, 3, 4).is_ok());
    }

    #[test]
    fn geometric_terms_match_closed_form() {
        let w = build_example_w();
        let pm = SubspaceSpec::leading(2);
        let policy = TailPolicy::default();
        for n in 4..12i64 {
            let c = certify_series(&w, &pm, n, &policy).unwrap();
            assert!(c.certified());
            for (l, t) in c.terms.iter().enumerate() {
                let l = l as i64 + 1;
                assert_eq!(*t, Dyadic::pow2(-(l * n - 1)));
            }
            let nf = n as i32;
            let exact = 2f64.powi(1 - nf) / (1.0 - 2f64.powi(-nf));
            let loose = 2f64.powi(2 - nf) / (1.0 - 2f64.powi(-nf));
            assert!(c.partial_sum.to_f64_lossy() <= exact);
            assert!(exact <= c.value() * (1.0 + 1e-12));
            assert!(c.value() <= loose);
        }
    }

    #[test]
    fn example_passes_for_m_two_and_three() {
        let w = build_example_w();
        let sched = Schedule::affine(3, 25).unwrap();
        let rule = DecayRule::default();
        let policy = TailPolicy::default();
        for m in [2, 3] {
            let r = check_series_condition(&w, m, &sched, &policy, &rule).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "m={m}");
            let h = check_hypercyclicity_condition(&w, m, &sched, &rule).unwrap();
            assert_eq!(h.verdict, Verdict::Pass);
        }
        let c = certify_series(&w, &SubspaceSpec::leading(3), -4, &policy).unwrap();
        for (l, t) in c.terms.iter().enumerate() {
            let l = l as i64 + 1;
            assert_eq!(*t, Dyadic::pow2(-(l * 4 - 3)));
        }
    }

    #[test]
    fn unitary_terms_never_certify() {
        let u = build_aperiodic_shift();
        let sched = Schedule::affine(3, 5).unwrap();
        let r = check_series_condition(&u, 2, &sched, &TailPolicy::default(), &DecayRule::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.notes.iter().any(|n| n.contains("not certified")));
    }
}
