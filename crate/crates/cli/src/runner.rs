//! Executes the runs of a scenario and writes their reports.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use elemdyn_core::criteria::{
    catalog, check_adjoint_conditions, check_cosine_series, check_cosine_split,
    check_hypercyclicity_condition, check_necessary_m_condition, check_periodic_necessary,
    check_series_condition, check_zero_transitivity, find_cosine_split, orthogonality_report,
    CriterionReport, Side,
};
use elemdyn_core::dynamics::ProfilePoint;
use elemdyn_core::report::{
    csv_table, fmt_f64, render_criterion, render_profile, render_witness, text_table, Format,
};
use elemdyn_core::witnesses::{
    adjoint_cosine_witness, cosine_witness, orbit_approach, periodic_witness, transitive_witness,
    Approach, WitnessRun,
};
use elemdyn_core::{Dyadic, ElementarySystem, NormKind, SubspaceSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{
    CriterionTask, NormsTask, OrbitTask, RunSpec, ScenarioConfig, Task, WitnessTask,
};

/// Hex SHA-256 of the scenario text, plus the mode when it was overridden.
pub fn config_hash(text: &str, mode_override: Option<elemdyn_core::Mode>) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    if let Some(m) = mode_override {
        h.update(format!("\nmode-override={m}").as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub requested_horizon: u64,
    pub horizon: u64,
    pub norm: NormKind,
    pub direction: elemdyn_core::Direction,
    pub profile: Vec<ProfilePoint>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub approach: Vec<Approach>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormsRow {
    pub n: u64,
    #[serde(rename = "||W^n P_m||")]
    pub right_forward: Dyadic,
    #[serde(rename = "||W^-n P_m||")]
    pub right_backward: Dyadic,
    #[serde(rename = "||P_m W^n||")]
    pub left_forward: Dyadic,
    #[serde(rename = "||P_m W^-n||")]
    pub left_backward: Dyadic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormsTable {
    pub w: String,
    pub m: u64,
    pub rows: Vec<NormsRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunResult {
    Criterion(CriterionReport),
    Witness(WitnessRun),
    Orbit(OrbitResult),
    Norms(NormsTable),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub run: String,
    pub kind: String,
    pub system: String,
    pub mode: elemdyn_core::Mode,
    pub config_hash: String,
    /// `pass`, `fail`, `inconclusive`, `complete` or `error`.
    pub verdict: String,
    pub criteria: BTreeMap<String, String>,
    pub result: RunResult,
}

impl RunReport {
    pub fn is_error(&self) -> bool {
        matches!(self.result, RunResult::Error(_))
    }
}

fn catalog_map() -> BTreeMap<String, String> {
    catalog()
        .iter()
        .map(|(id, s)| (id.to_string(), s.to_string()))
        .collect()
}

/// Executes every run, in parallel, returning reports in declaration order.
pub fn run_scenario(cfg: &ScenarioConfig, hash: &str) -> Vec<RunReport> {
    cfg.runs
        .par_iter()
        .map(|run| {
            let result = execute(cfg, run).unwrap_or_else(RunResult::Error);
            let verdict = match &result {
                RunResult::Criterion(r) => r.verdict.to_string(),
                RunResult::Witness(w) => w.verdict.to_string(),
                RunResult::Orbit(o) if o.horizon < o.requested_horizon => "inconclusive".into(),
                RunResult::Orbit(_) | RunResult::Norms(_) => "complete".into(),
                RunResult::Error(_) => "error".into(),
            };
            RunReport {
                scenario: cfg.name.clone(),
                run: run.id.clone(),
                kind: run.task.kind().to_string(),
                system: run.system.clone(),
                mode: cfg.mode,
                config_hash: hash.to_string(),
                verdict,
                criteria: catalog_map(),
                result,
            }
        })
        .collect()
}

fn system(cfg: &ScenarioConfig, run: &RunSpec) -> Result<ElementarySystem, String> {
    let (u, w) = cfg
        .system_operators(&run.system)
        .ok_or_else(|| format!("system '{}' is not declared", run.system))?;
    ElementarySystem::new(u.clone(), w.clone())
        .map(|s| {
            s.with_support_cap(cfg.limits.support_cap)
                .with_orbit_cap(cfg.limits.orbit_cap)
        })
        .map_err(|e| e.to_string())
}

fn execute(cfg: &ScenarioConfig, run: &RunSpec) -> Result<RunResult, String> {
    let (u, w) = cfg
        .system_operators(&run.system)
        .ok_or_else(|| format!("system '{}' is not declared", run.system))?;
    let rule = &run.rule;
    let tail = &cfg.limits.tail;
    let mode = cfg.mode;
    let e = |x: elemdyn_core::Error| x.to_string();
    Ok(match &run.task {
        Task::Criterion(c) => RunResult::Criterion(
            match c {
                CriterionTask::OrthogonalityHorizon { k_max, limit } => {
                    orthogonality_report(u, *k_max, *limit)
                }
                CriterionTask::Hypercyclicity { m, schedule } => {
                    check_hypercyclicity_condition(w, *m, schedule, rule)
                }
                CriterionTask::ZeroTransitivity { k, forward, backward } => {
                    check_zero_transitivity(w, k, forward, backward, rule)
                }
                CriterionTask::NecessaryM => check_necessary_m_condition(w),
                CriterionTask::PeriodicNecessary {
                    schedule,
                    probe_horizon,
                } => check_periodic_necessary(w, schedule, *probe_horizon, rule),
                CriterionTask::ChaosSeries { m, schedule } => {
                    check_series_condition(w, *m, schedule, tail, rule)
                }
                CriterionTask::CosineSeries { m, schedule } => {
                    check_cosine_series(w, *m, schedule, tail, rule)
                }
                CriterionTask::CosineSplit { m, schedule } => {
                    check_cosine_split(w, *m, schedule, rule, Side::Right)
                }
                CriterionTask::Adjoint {
                    m,
                    schedule,
                    variant,
                } => check_adjoint_conditions(w, *m, schedule, *variant, rule),
            }
            .map_err(e)?,
        ),
        Task::Witness(t) => {
            let sys = system(cfg, run)?;
            RunResult::Witness(
                match t {
                    WitnessTask::Transitive { f, g, m, schedule } => transitive_witness(
                        &sys,
                        &f.build(mode).map_err(e)?,
                        &g.build(mode).map_err(e)?,
                        *m,
                        schedule,
                        rule,
                    ),
                    WitnessTask::Periodic { f, m, n, tol } => {
                        periodic_witness(&sys, &f.build(mode).map_err(e)?, *m, *n, *tol, tail)
                    }
                    WitnessTask::Cosine { f, g, m, schedule } => {
                        let split = find_cosine_split(sys.w(), *m, schedule, rule, Side::Right)
                            .map_err(e)?;
                        cosine_witness(
                            &sys,
                            &f.build(mode).map_err(e)?,
                            &g.build(mode).map_err(e)?,
                            split.witness(),
                            rule,
                        )
                    }
                    WitnessTask::AdjointCosine { g1, g2, m, schedule } => {
                        let split = find_cosine_split(sys.w(), *m, schedule, rule, Side::Left)
                            .map_err(e)?;
                        adjoint_cosine_witness(
                            &sys,
                            &g1.build(mode).map_err(e)?,
                            &g2.build(mode).map_err(e)?,
                            split.witness(),
                            rule,
                        )
                    }
                }
                .map_err(e)?,
            )
        }
        Task::Orbit(o) => RunResult::Orbit(orbit(cfg, run, o)?),
        Task::Norms(t) => RunResult::Norms(norms(w, t).map_err(e)?),
    })
}

fn orbit(cfg: &ScenarioConfig, run: &RunSpec, o: &OrbitTask) -> Result<OrbitResult, String> {
    let sys = system(cfg, run)?;
    let e = |x: elemdyn_core::Error| x.to_string();
    let horizon = o.horizon.min(sys.orbit_cap());
    let mut notes = Vec::new();
    if horizon < o.horizon {
        notes.push(format!(
            "horizon {} exceeds the orbit cap; stopped at {horizon}",
            o.horizon
        ));
    }
    let start = o.start.build(cfg.mode).map_err(e)?;
    let profile = sys
        .orbit_profile(&start, horizon, o.norm, o.direction)
        .map_err(e)?;
    let targets = o
        .targets
        .iter()
        .map(|t| t.build(cfg.mode))
        .collect::<elemdyn_core::Result<Vec<_>>>()
        .map_err(e)?;
    let approach = if targets.is_empty() {
        Vec::new()
    } else {
        orbit_approach(&sys, &start, &targets, horizon).map_err(e)?
    };
    Ok(OrbitResult {
        requested_horizon: o.horizon,
        horizon,
        norm: o.norm,
        direction: o.direction,
        profile,
        approach,
        notes,
    })
}

fn norms(
    w: &elemdyn_core::WeightedPermutationOperator,
    t: &NormsTask,
) -> elemdyn_core::Result<NormsTable> {
    let pm = SubspaceSpec::leading(t.m);
    let rows = (0..=t.horizon as i64)
        .map(|n| {
            Ok(NormsRow {
                n: n as u64,
                right_forward: w.norm_power_proj(n, &pm)?,
                right_backward: w.norm_power_proj(-n, &pm)?,
                left_forward: w.proj_norm_power(&pm, n)?,
                left_backward: w.proj_norm_power(&pm, -n)?,
            })
        })
        .collect::<elemdyn_core::Result<Vec<_>>>()?;
    Ok(NormsTable {
        w: w.name().to_string(),
        m: t.m,
        rows,
    })
}

fn norms_rows(t: &NormsTable) -> Vec<Vec<String>> {
    t.rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.right_forward.to_string(),
                r.right_backward.to_string(),
                r.left_forward.to_string(),
                r.left_backward.to_string(),
            ]
        })
        .collect()
}

const NORMS_HEADER: [&str; 5] = ["n", "||W^n P_m||", "||W^-n P_m||", "||P_m W^n||", "||P_m W^-n||"];
const APPROACH_HEADER: [&str; 3] = ["target", "best_n", "distance"];

fn approach_rows(a: &[Approach]) -> Vec<Vec<String>> {
    a.iter()
        .map(|x| vec![x.target.to_string(), x.best_n.to_string(), fmt_f64(x.distance)])
        .collect()
}

pub fn render(report: &RunReport, format: Format) -> elemdyn_core::Result<String> {
    let core_err = |e: serde_json::Error| elemdyn_core::Error::Config(e.to_string());
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(core_err)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => match &report.result {
            RunResult::Criterion(r) => render_criterion(r, Format::Csv),
            RunResult::Witness(w) => render_witness(w, Format::Csv),
            RunResult::Orbit(o) => render_profile(&o.profile, Format::Csv),
            RunResult::Norms(t) => csv_table(&NORMS_HEADER, norms_rows(t)),
            RunResult::Error(msg) => csv_table(&["error"], vec![vec![msg.clone()]]),
        },
        Format::Text => {
            let mut out = format!(
                "scenario: {}\nrun: {} ({}, system {})\nmode: {}\nconfig: sha256:{}\n\n",
                report.scenario,
                report.run,
                report.kind,
                report.system,
                report.mode,
                report.config_hash
            );
            out.push_str(&match &report.result {
                RunResult::Criterion(r) => render_criterion(r, Format::Text)?,
                RunResult::Witness(w) => render_witness(w, Format::Text)?,
                RunResult::Orbit(o) => {
                    let mut s = format!(
                        "orbit: {} norm, {} direction, horizon {}\nverdict: {}\n",
                        o.norm, o.direction, o.horizon, report.verdict
                    );
                    for n in &o.notes {
                        s.push_str(&format!("note: {n}\n"));
                    }
                    s.push('\n');
                    s.push_str(&render_profile(&o.profile, Format::Text)?);
                    if !o.approach.is_empty() {
                        s.push('\n');
                        s.push_str(&text_table(&APPROACH_HEADER, &approach_rows(&o.approach)));
                    }
                    s
                }
                RunResult::Norms(t) => format!(
                    "compression norms of {} on L_{}\n\n{}",
                    t.w,
                    t.m,
                    text_table(&NORMS_HEADER, &norms_rows(t))
                ),
                RunResult::Error(msg) => format!("error: {msg}\n"),
            });
            Ok(out)
        }
    }
}

/// One line per run for the terminal.
pub fn summary_line(report: &RunReport) -> String {
    let detail = match &report.result {
        RunResult::Criterion(r) => r.id.clone(),
        RunResult::Witness(w) => w.kind.to_string(),
        RunResult::Orbit(o) => format!("horizon {}", o.horizon),
        RunResult::Norms(t) => format!("L_{}", t.m),
        RunResult::Error(m) => m.clone(),
    };
    format!("{:<28} {:<10} {:<13} {}", report.run, report.kind, report.verdict, detail)
}

/// Writes `<dir>/<scenario>/<run>.<ext>` without ever replacing an existing
/// file. Identical content already on disk is reused; otherwise the first
/// free `<run>.<i>.<ext>` is taken.
pub fn write_report(dir: &Path, report: &RunReport, format: Format) -> std::io::Result<PathBuf> {
    let body = render(report, format)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
    let folder = dir.join(&report.scenario);
    fs::create_dir_all(&folder)?;
    let ext = format.extension();
    for i in 0u32.. {
        let name = if i == 0 {
            format!("{}.{ext}", report.run)
        } else {
            format!("{}.{i}.{ext}", report.run)
        };
        let path = folder.join(name);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                f.write_all(body.as_bytes())?;
                return Ok(path);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                if fs::read(&path)? == body.as_bytes() {
                    return Ok(path);
                }
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("u32 range exhausted")
}
