use super::{require_rows_in, OperatorSummary, Residual, WitnessKind, WitnessRecord, WitnessRun};
use crate::criteria::{DecayRule, Side, SplitEntry, SplitWitness};
use crate::dynamics::ElementarySystem;
use crate::error::{Error, Result};
use crate::finite_rank::{FiniteRankOperator, NormKind};
use crate::scalar::{Dyadic, SubspaceSpec};

const COSINE_RESIDUALS: [&str; 2] = ["||V_k - F||", "||C^n V_k - G||"];
const ADJOINT_RESIDUALS: [&str; 2] = ["||F_k - G1||_1", "||C*^n F_k - G2||_1"];

fn check_split(split: &SplitWitness, side: Side) -> Result<()> {
    split.validate()?;
    if split.side != side {
        return Err(Error::Precondition(format!(
            "split was built for the {} side, expected {side}",
            split.side
        )));
    }
    Ok(())
}

fn lossy(d: Dyadic) -> f64 {
    d.to_f64_lossy()
}

/// `V_k = P_K F + 2 T^n(P_E G) + 2 S^n(P_R G)` for one split entry.
///
/// Logs the six operators the two residuals are built from, each with the
/// bound `‖W^{±n} P_S‖ · ‖·‖`.
pub fn cosine_witness_record(
    sys: &ElementarySystem,
    f: &FiniteRankOperator,
    g: &FiniteRankOperator,
    m: u64,
    entry: &SplitEntry,
) -> Result<WitnessRecord> {
    let w = sys.w();
    let pk = SubspaceSpec::leading(m);
    let n = i64::try_from(entry.n).map_err(|_| Error::Config("power too large".into()))?;
    let f_norm = f.operator_norm()?;
    let g_norm = g.operator_norm()?;
    let pf = f.project_rows(&pk);
    let pe_g = g.project_rows(&entry.e);
    let pr_g = g.project_rows(&entry.r);
    let two = Dyadic::from_int(2);
    let half = Dyadic::pow2(-1);

    let t_eg = sys.t_apply(n, &pe_g)?;
    let s_rg = sys.t_apply(-n, &pr_g)?;
    let t_kf = sys.t_apply(n, &pf)?;
    let s_kf = sys.t_apply(-n, &pf)?;
    let t2_eg = sys.t_apply(2 * n, &pe_g)?;
    let s2_rg = sys.t_apply(-2 * n, &pr_g)?;
    let v = pf
        .add(&t_eg.scale_dyadic(&two)?)?
        .add(&s_rg.scale_dyadic(&two)?)?;

    let b = [
        lossy(w.norm_power_proj(n, &entry.e)?) * g_norm,
        lossy(w.norm_power_proj(-n, &entry.r)?) * g_norm,
        lossy(w.norm_power_proj(n, &pk)?) * f_norm,
        lossy(w.norm_power_proj(-n, &pk)?) * f_norm,
        lossy(w.norm_power_proj(2 * n, &entry.e)?) * g_norm,
        lossy(w.norm_power_proj(-2 * n, &entry.r)?) * g_norm,
    ];
    let op = NormKind::Operator;
    let mut residuals = vec![
        Residual::measure(
            COSINE_RESIDUALS[0],
            &v.sub(f)?,
            op,
            Some(2.0 * (b[0] + b[1])),
        )?,
        Residual::measure(
            COSINE_RESIDUALS[1],
            &sys.cosine_apply(entry.n, &v)?.sub(g)?,
            op,
            Some(0.5 * (b[2] + b[3]) + b[4] + b[5]),
        )?,
    ];
    let terms = [
        ("||T^n(P_E G)||", &t_eg),
        ("||S^n(P_R G)||", &s_rg),
        ("||T^n(P_K F)||", &t_kf),
        ("||S^n(P_K F)||", &s_kf),
        ("||T^2n(P_E G)||", &t2_eg),
        ("||S^2n(P_R G)||", &s2_rg),
    ];
    for ((name, x), bound) in terms.into_iter().zip(b) {
        residuals.push(Residual::measure(name, x, op, Some(bound))?);
    }
    // exact check that the six terms really reassemble the second residual
    let rebuilt = t_kf
        .add(&s_kf)?
        .scale_dyadic(&half)?
        .add(&t2_eg)?
        .add(&s2_rg)?;
    let direct = sys.cosine_apply(entry.n, &v)?.sub(g)?;
    residuals.push(Residual::measure(
        "||expansion defect||",
        &direct.sub(&rebuilt)?,
        op,
        Some(0.0),
    )?);
    Ok(WitnessRecord {
        k: entry.k,
        n: entry.n,
        operator: OperatorSummary::of(&v),
        residuals,
    })
}

/// Runs [`cosine_witness_record`] over every entry of a right-side split.
pub fn cosine_witness(
    sys: &ElementarySystem,
    f: &FiniteRankOperator,
    g: &FiniteRankOperator,
    split: &SplitWitness,
    rule: &DecayRule,
) -> Result<WitnessRun> {
    check_split(split, Side::Right)?;
    require_rows_in(f, split.m, "F")?;
    require_rows_in(g, split.m, "G")?;
    let mut run = WitnessRun::new(WitnessKind::Cosine)
        .param("m", split.m)
        .param("U", sys.u().name())
        .param("W", sys.w().name());
    for entry in &split.entries {
        run.records
            .push(cosine_witness_record(sys, f, g, split.m, entry)?);
    }
    run.settle(&COSINE_RESIDUALS, rule);
    Ok(run)
}

/// `F_k = P_K G1 + 2 T*^n(P_E G2) + 2 S*^n(P_R G2)` measured in trace norm.
///
/// `‖T*^n(X)‖₁ = ‖X W^n‖₁ ≤ ‖X‖₁ ‖P_C W^n‖` with `C` the column support of `X`,
/// which is the bound checked here. The right-compression estimate
/// `‖X‖₁ ‖W^n P_K‖` is logged next to it for comparison; it is not a valid
/// bound in general.
pub fn adjoint_cosine_witness(
    sys: &ElementarySystem,
    g1: &FiniteRankOperator,
    g2: &FiniteRankOperator,
    split: &SplitWitness,
    rule: &DecayRule,
) -> Result<WitnessRun> {
    check_split(split, Side::Left)?;
    let pk = SubspaceSpec::leading(split.m);
    for (x, name) in [(g1, "G1"), (g2, "G2")] {
        if !x.supported_in(&pk) {
            return Err(Error::Precondition(format!(
                "{name} must satisfy {name} = P_K {name} P_K with K = L_{}",
                split.m
            )));
        }
    }
    let w = sys.w();
    let tr = NormKind::Trace;
    let half = Dyadic::pow2(-1);
    let two = Dyadic::from_int(2);
    let bound = |x: &FiniteRankOperator, n: i64| -> Result<f64> {
        let cols = SubspaceSpec::from_indices(x.col_support())?;
        Ok(x.trace_norm()? * lossy(w.proj_norm_power(&cols, n)?))
    };
    let mut run = WitnessRun::new(WitnessKind::AdjointCosine)
        .param("m", split.m)
        .param("U", sys.u().name())
        .param("W", w.name());
    let g1_tr = g1.trace_norm()?;
    for entry in &split.entries {
        let n = i64::try_from(entry.n).map_err(|_| Error::Config("power too large".into()))?;
        let pe = g2.project_rows(&entry.e);
        let pr = g2.project_rows(&entry.r);
        let t_e = sys.adjoint_t_apply(n, &pe)?;
        let s_r = sys.adjoint_t_apply(-n, &pr)?;
        let t_k = sys.adjoint_t_apply(n, g1)?;
        let s_k = sys.adjoint_t_apply(-n, g1)?;
        let t2_e = sys.adjoint_t_apply(2 * n, &pe)?;
        let s2_r = sys.adjoint_t_apply(-2 * n, &pr)?;
        let fk = g1
            .add(&t_e.scale_dyadic(&two)?)?
            .add(&s_r.scale_dyadic(&two)?)?;
        let b = [
            bound(&pe, n)?,
            bound(&pr, -n)?,
            bound(g1, n)?,
            bound(g1, -n)?,
            bound(&pe, 2 * n)?,
            bound(&pr, -2 * n)?,
        ];
        let mut residuals = vec![
            Residual::measure(ADJOINT_RESIDUALS[0], &fk.sub(g1)?, tr, Some(2.0 * (b[0] + b[1])))?,
            Residual::measure(
                ADJOINT_RESIDUALS[1],
                &sys.adjoint_cosine_apply(entry.n, &fk)?.sub(g2)?,
                tr,
                Some(0.5 * (b[2] + b[3]) + b[4] + b[5]),
            )?,
        ];
        let terms = [
            ("||T*^n(P_E G2)||_1", &t_e),
            ("||S*^n(P_R G2)||_1", &s_r),
            ("||T*^n(P_K G1)||_1", &t_k),
            ("||S*^n(P_K G1)||_1", &s_k),
            ("||T*^2n(P_E G2)||_1", &t2_e),
            ("||S*^2n(P_R G2)||_1", &s2_r),
        ];
        for ((name, x), bound) in terms.into_iter().zip(b) {
            residuals.push(Residual::measure(name, x, tr, Some(bound))?);
        }
        residuals.push(Residual {
            name: "estimate ||G1||_1 ||W^n P_K||".into(),
            value: g1_tr * lossy(w.norm_power_proj(n, &pk)?),
            exact: None,
            bound: None,
        });
        residuals.push(Residual {
            name: "estimate ||G1||_1 ||P_K W^n||".into(),
            value: g1_tr * lossy(w.proj_norm_power(&pk, n)?),
            exact: None,
            bound: None,
        });
        let rebuilt = t_k.add(&s_k)?.scale_dyadic(&half)?.add(&t2_e)?.add(&s2_r)?;
        let direct = sys.adjoint_cosine_apply(entry.n, &fk)?.sub(g2)?;
        residuals.push(Residual::measure(
            "||expansion defect||_1",
            &direct.sub(&rebuilt)?,
            tr,
            Some(0.0),
        )?);
        run.records.push(WitnessRecord {
            k: entry.k,
            n: entry.n,
            operator: OperatorSummary::of(&fk),
            residuals,
        });
    }
    run.settle(&ADJOINT_RESIDUALS, rule);
    Ok(run)
}
