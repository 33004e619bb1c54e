//! Explicit witness operators built along a schedule, with the residuals they
//! are meant to make small and the compression-norm bounds that control them.

mod cosine;
mod periodic;

pub use cosine::{adjoint_cosine_witness, cosine_witness, cosine_witness_record};
pub use periodic::periodic_witness;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::criteria::{orthogonality_horizon, DecayRule, Schedule, Verdict};
use crate::dynamics::ElementarySystem;
use crate::error::{Error, Result};
use crate::finite_rank::{FiniteRankOperator, NormKind, Triplet};
use crate::scalar::{Dyadic, SubspaceSpec};

/// Relative slack allowed when a float residual is compared with its bound.
pub const BOUND_RTOL: f64 = 1e-12;

/// Operators with at most this many entries are written out in full.
const INLINE_ENTRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Transitive,
    Periodic,
    Cosine,
    AdjointCosine,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::Transitive => "transitive",
            WitnessKind::Periodic => "periodic",
            WitnessKind::Cosine => "cosine",
            WitnessKind::AdjointCosine => "adjoint-cosine",
        })
    }
}

impl std::str::FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "transitive" => Ok(WitnessKind::Transitive),
            "periodic" => Ok(WitnessKind::Periodic),
            "cosine" => Ok(WitnessKind::Cosine),
            "adjoint-cosine" => Ok(WitnessKind::AdjointCosine),
            other => Err(Error::Parse(format!("unknown witness kind '{other}'"))),
        }
    }
}

/// Shape of a constructed operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub nnz: usize,
    pub rows: usize,
    pub cols: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entries: Option<Vec<Triplet>>,
}

impl OperatorSummary {
    pub fn of(f: &FiniteRankOperator) -> Self {
        OperatorSummary {
            nnz: f.nnz(),
            rows: f.row_support().len(),
            cols: f.col_support().len(),
            entries: (f.nnz() <= INLINE_ENTRIES).then(|| f.to_triplets()),
        }
    }
}

/// One measured quantity with its proof-side upper bound, when there is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<Dyadic>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
}

impl Residual {
    /// Norm of `x`, exact when `x` is a partial permutation.
    pub fn measure(
        name: &str,
        x: &FiniteRankOperator,
        which: NormKind,
        bound: Option<f64>,
    ) -> Result<Self> {
        Ok(Residual {
            name: name.to_string(),
            value: x.norm(which)?,
            exact: x.exact_norm(which),
            bound,
        })
    }

    pub fn within_bound(&self) -> bool {
        match self.bound {
            Some(b) => self.value <= b * (1.0 + BOUND_RTOL) + f64::MIN_POSITIVE,
            None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub k: u64,
    pub n: u64,
    pub operator: OperatorSummary,
    pub residuals: Vec<Residual>,
}

impl WitnessRecord {
    pub fn residual(&self, name: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRun {
    pub kind: WitnessKind,
    pub parameters: BTreeMap<String, String>,
    pub records: Vec<WitnessRecord>,
    pub tolerances: BTreeMap<String, f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl WitnessRun {
    fn new(kind: WitnessKind) -> Self {
        WitnessRun {
            kind,
            parameters: BTreeMap::new(),
            records: Vec::new(),
            tolerances: BTreeMap::new(),
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Values of one residual along the records.
    pub fn series(&self, name: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.residual(name).map(|x| x.value))
            .collect()
    }

    pub fn all_within_bounds(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.residuals.iter().all(Residual::within_bound))
    }

    /// Pass iff every named residual decays and no bound is violated.
    fn settle(&mut self, decaying: &[&str], rule: &DecayRule) {
        self.tolerances.insert("threshold".into(), rule.threshold);
        self.tolerances.insert("bound_rtol".into(), BOUND_RTOL);
        for rec in &self.records {
            for r in rec.residuals.iter().filter(|r| !r.within_bound()) {
                self.notes.push(format!(
                    "k={}: {} = {:e} exceeds its bound {:e}",
                    rec.k,
                    r.name,
                    r.value,
                    r.bound.unwrap_or(f64::NAN)
                ));
            }
        }
        let decays = decaying.iter().all(|q| rule.decays(&self.series(q)));
        self.verdict = if decays && self.all_within_bounds() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
}

/// Rows of `f` must lie in `L_m`, i.e. `P_m f = f`.
pub(crate) fn require_rows_in(f: &FiniteRankOperator, m: u64, name: &str) -> Result<()> {
    if f.row_support().iter().any(|&i| i > m) {
        return Err(Error::Precondition(format!(
            "{name} has rows outside L_{m}; apply project_rows first"
        )));
    }
    Ok(())
}

/// `P_m F`, the approximation step the proofs start from.
pub fn project_rows(f: &FiniteRankOperator, m: u64) -> FiniteRankOperator {
    f.project_rows(&SubspaceSpec::leading(m))
}

/// Builds `Φ_k = P_m F + S^{n_k}(P_m G)` and records `‖Φ_k − F‖` and
/// `‖T^{n_k} Φ_k − G‖` with their compression-norm bounds.
pub fn transitive_witness(
    sys: &ElementarySystem,
    f: &FiniteRankOperator,
    g: &FiniteRankOperator,
    m: u64,
    schedule: &Schedule,
    rule: &DecayRule,
) -> Result<WitnessRun> {
    if m == 0 {
        return Err(Error::Config("m must be positive".into()));
    }
    require_rows_in(f, m, "F")?;
    require_rows_in(g, m, "G")?;
    let last = schedule.ns().last().copied().unwrap_or(1);
    let limit = last.max(64);
    match orthogonality_horizon(sys.u(), m, limit)? {
        Some(h) if schedule.first() >= h => {}
        Some(h) => {
            return Err(Error::Precondition(format!(
                "schedule starts at {} but U^n(L_{m}) is orthogonal to L_{m} only from n = {h}",
                schedule.first()
            )))
        }
        None => {
            return Err(Error::Precondition(format!(
                "U^n(L_{m}) is not orthogonal to L_{m} for all n up to {limit}"
            )))
        }
    }
    let pm = SubspaceSpec::leading(m);
    let f_norm = f.operator_norm()?;
    let g_norm = g.operator_norm()?;
    let gap_g = g.distance(&g.project_rows(&pm), NormKind::Operator)?;
    let pf = f.project_rows(&pm);
    let pg = g.project_rows(&pm);
    let mut run = WitnessRun::new(WitnessKind::Transitive)
        .param("m", m)
        .param("U", sys.u().name())
        .param("W", sys.w().name())
        .param("schedule", format!("{:?}", schedule.ns()));
    for p in schedule.points() {
        let n = p.n as i64;
        let phi = pf.add(&sys.t_apply(-n, &pg)?)?;
        let fwd = sys.w().norm_power_proj(n, &pm)?.to_f64_lossy();
        let bwd = sys.w().norm_power_proj(-n, &pm)?.to_f64_lossy();
        let r1 = Residual::measure(
            "||Phi_k - F||",
            &phi.sub(f)?,
            NormKind::Operator,
            Some(bwd * g_norm),
        )?;
        let r2 = Residual::measure(
            "||T^n Phi_k - G||",
            &sys.t_apply(n, &phi)?.sub(g)?,
            NormKind::Operator,
            Some(fwd * f_norm + gap_g),
        )?;
        run.records.push(WitnessRecord {
            k: p.k,
            n: p.n,
            operator: OperatorSummary::of(&phi),
            residuals: vec![r1, r2],
        });
    }
    run.settle(&["||Phi_k - F||", "||T^n Phi_k - G||"], rule);
    Ok(run)
}

/// Best approach of the forward orbit `{T^n(start) : 0 <= n <= horizon}` to each target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approach {
    pub target: usize,
    pub best_n: u64,
    pub distance: f64,
}

pub fn orbit_approach(
    sys: &ElementarySystem,
    start: &FiniteRankOperator,
    targets: &[FiniteRankOperator],
    horizon: u64,
) -> Result<Vec<Approach>> {
    if horizon > sys.orbit_cap() {
        return Err(Error::Config(format!(
            "orbit horizon {horizon} exceeds the cap {}",
            sys.orbit_cap()
        )));
    }
    let mut best: Vec<Approach> = (0..targets.len())
        .map(|t| Approach {
            target: t,
            best_n: 0,
            distance: f64::INFINITY,
        })
        .collect();
    let mut x = start.clone();
    for n in 0..=horizon {
        if n > 0 {
            x = sys.t_apply(1, &x)?;
        }
        for (b, t) in best.iter_mut().zip(targets) {
            let d = x.distance(t, NormKind::Operator)?;
            if d < b.distance {
                b.distance = d;
                b.best_n = n;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Mode, Scalar};
    use crate::structured::{build_aperiodic_shift, build_example_w, cyclic_blocks};

    fn sys() -> ElementarySystem {
        ElementarySystem::new(build_aperiodic_shift(), build_example_w()).unwrap()
    }

    fn p(m: u64) -> FiniteRankOperator {
        FiniteRankOperator::projection(&SubspaceSpec::leading(m), Mode::Exact)
    }

    #[test]
    fn transitive_decay_for_projections() {
        let sched = Schedule::affine(3, 25).unwrap();
        let run =
            transitive_witness(&sys(), &p(2), &p(2), 2, &sched, &DecayRule::default()).unwrap();
        assert_eq!(run.verdict, Verdict::Pass);
        assert!(run.all_within_bounds());
        for rec in &run.records {
            let r2 = rec.residual("||T^n Phi_k - G||").unwrap();
            assert_eq!(r2.exact, Some(Dyadic::pow2(-(rec.n as i64 - 1))));
        }
        let r2 = run.series("||T^n Phi_k - G||");
        assert!(r2[17] < 1e-6);
    }

    #[test]
    fn transitive_zero_targets() {
        let z = FiniteRankOperator::zero(Mode::Exact);
        let sched = Schedule::affine(3, 5).unwrap();
        let run = transitive_witness(&sys(), &z, &z, 2, &sched, &DecayRule::default()).unwrap();
        for rec in &run.records {
            assert_eq!(rec.operator.nnz, 0);
            assert!(rec.residuals.iter().all(|r| r.value == 0.0));
        }
    }

    #[test]
    fn transitive_preconditions() {
        let sched = Schedule::affine(3, 5).unwrap();
        let rule = DecayRule::default();
        assert!(matches!(
            transitive_witness(&sys(), &p(3), &p(2), 2, &sched, &rule),
            Err(Error::Precondition(_))
        ));
        let early = Schedule::explicit(vec![1, 2, 3]).unwrap();
        assert!(matches!(
            transitive_witness(&sys(), &p(2), &p(2), 2, &early, &rule),
            Err(Error::Precondition(_))
        ));
        let cyc = ElementarySystem::new(cyclic_blocks(3).unwrap(), build_example_w()).unwrap();
        assert!(matches!(
            transitive_witness(&cyc, &p(2), &p(2), 2, &sched, &rule),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn approach_examples() {
        let s = sys();
        let f = p(2);
        let out = orbit_approach(&s, &f, &[f.clone()], 10).unwrap();
        assert_eq!(out[0].best_n, 0);
        assert_eq!(out[0].distance, 0.0);
        let z = FiniteRankOperator::zero(Mode::Exact);
        let g = FiniteRankOperator::rank_one(2, 2, Scalar::Exact(Dyadic::from_int(3))).unwrap();
        let out = orbit_approach(&s, &z, &[g.clone(), p(3)], 10).unwrap();
        assert_eq!(out[0].distance, 3.0);
        assert_eq!(out[1].distance, 1.0);
        assert!(orbit_approach(&s.clone().with_orbit_cap(4), &z, &[g], 5).is_err());
    }
}
