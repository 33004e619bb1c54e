use super::{require_rows_in, OperatorSummary, Residual, WitnessKind, WitnessRecord, WitnessRun};
use crate::criteria::{TailPolicy, Verdict};
use crate::dynamics::ElementarySystem;
use crate::error::{Error, Result};
use crate::finite_rank::{FiniteRankOperator, NormKind};
use crate::scalar::{Dyadic, SubspaceSpec};

struct Truncation {
    /// `‖W^{±l n} P_m‖` for `l = 1..=L`.
    terms: Vec<Dyadic>,
    tail: Option<f64>,
}

impl Truncation {
    fn len(&self) -> i64 {
        self.terms.len() as i64
    }
}

fn ratio_ok(prev: &Dyadic, next: &Dyadic, r: f64) -> bool {
    if prev.is_zero() {
        return next.is_zero();
    }
    next.to_f64_lossy() <= r * prev.to_f64_lossy()
}

/// Adds terms until the ratio run is reached and the tail bound drops below `tol`.
///
/// The tail factor uses `max(r, 1/2)` so that the bound also dominates the last
/// kept term, which reappears in the period residual.
fn truncate(
    sys: &ElementarySystem,
    pm: &SubspaceSpec,
    step: i64,
    scale: f64,
    tol: f64,
    policy: &TailPolicy,
) -> Result<Truncation> {
    let r = policy.ratio.max(0.5);
    let factor = r / (1.0 - r);
    let mut terms: Vec<Dyadic> = Vec::new();
    let mut streak = 0usize;
    for l in 1..=policy.max_terms as i64 {
        let power = l
            .checked_mul(step)
            .ok_or_else(|| Error::Overflow(format!("power {l}*{step} overflows")))?;
        let term = sys.w().norm_power_proj(power, pm)?;
        if let Some(prev) = terms.last() {
            streak = if ratio_ok(prev, &term, policy.ratio) {
                streak + 1
            } else {
                0
            };
        }
        let tail = term.to_f64_lossy() * scale * factor;
        terms.push(term);
        if streak >= policy.run && tail < tol {
            return Ok(Truncation {
                terms,
                tail: Some(tail),
            });
        }
    }
    Ok(Truncation { terms, tail: None })
}

/// Truncated two-sided sum `G = Σ_{l=0}^{L_f} T^{l n} F + Σ_{l=1}^{L_b} S^{l n} F`.
///
/// `T^n G − G` telescopes to `T^{(L_f+1) n} F − S^{L_b n} F`; the run records
/// both sides of that identity and checks that the period residual stays below
/// twice the larger certified tail.
pub fn periodic_witness(
    sys: &ElementarySystem,
    f: &FiniteRankOperator,
    m: u64,
    n: u64,
    tol: f64,
    policy: &TailPolicy,
) -> Result<WitnessRun> {
    if m == 0 || n == 0 {
        return Err(Error::Config("m and n must be positive".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    policy.validate()?;
    require_rows_in(f, m, "F")?;
    let n = i64::try_from(n).map_err(|_| Error::Config("period too large".into()))?;
    let pm = SubspaceSpec::leading(m);
    let f_norm = f.operator_norm()?;
    let fwd = truncate(sys, &pm, n, f_norm, tol, policy)?;
    let bwd = truncate(sys, &pm, -n, f_norm, tol, policy)?;

    let mut g = f.clone();
    for l in 1..=fwd.len() {
        g = g.add(&sys.t_apply(l * n, f)?)?;
    }
    for l in 1..=bwd.len() {
        g = g.add(&sys.t_apply(-l * n, f)?)?;
    }
    let period = sys.t_apply(n, &g)?.sub(&g)?;
    let boundary = sys
        .t_apply((fwd.len() + 1) * n, f)?
        .sub(&sys.t_apply(-bwd.len() * n, f)?)?;

    let certified = fwd.tail.is_some() && bwd.tail.is_some();
    let tail = fwd.tail.unwrap_or(f64::INFINITY).max(bwd.tail.unwrap_or(f64::INFINITY));
    let sum = |t: &Truncation| {
        t.terms.iter().map(Dyadic::to_f64_lossy).sum::<f64>() * f_norm + t.tail.unwrap_or(0.0)
    };
    let residuals = vec![
        Residual::measure(
            "||T^n G - G||",
            &period,
            NormKind::Operator,
            certified.then_some(2.0 * tail),
        )?,
        Residual::measure("||boundary||", &boundary, NormKind::Operator, None)?,
        Residual::measure(
            "||(T^n G - G) - boundary||",
            &period.sub(&boundary)?,
            NormKind::Operator,
            Some(0.0),
        )?,
        Residual::measure(
            "||G - F||",
            &g.sub(f)?,
            NormKind::Operator,
            certified.then(|| sum(&fwd) + sum(&bwd)),
        )?,
    ];

    let mut run = WitnessRun::new(WitnessKind::Periodic)
        .param("m", m)
        .param("n", n)
        .param("U", sys.u().name())
        .param("W", sys.w().name())
        .param("forward_terms", fwd.len())
        .param("backward_terms", bwd.len());
    run.tolerances.insert("tol".into(), tol);
    run.tolerances.insert("bound_rtol".into(), super::BOUND_RTOL);
    if let Some(t) = fwd.tail {
        run.tolerances.insert("tail_forward".into(), t);
    }
    if let Some(t) = bwd.tail {
        run.tolerances.insert("tail_backward".into(), t);
    }
    run.records.push(WitnessRecord {
        k: 1,
        n: n as u64,
        operator: OperatorSummary::of(&g),
        residuals,
    });
    if !certified {
        run.notes.push(format!(
            "tail not certified below {tol:e} within {} terms",
            policy.max_terms
        ));
        run.verdict = Verdict::Inconclusive;
    } else if run.all_within_bounds() {
        run.verdict = Verdict::Pass;
    } else {
        run.notes.push("a residual exceeds its bound".into());
        run.verdict = Verdict::Fail;
    }
    Ok(run)
}
