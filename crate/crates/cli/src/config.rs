//! Scenario files: TOML describing operators, systems `(U, W)` and the runs to
//! execute on them. See `docs/scenario-format.md` for the grammar.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use elemdyn_core::criteria::{
    AdjointVariant, DecayRule, Schedule, TailPolicy, DEFAULT_THRESHOLD, DEFAULT_WINDOW,
};
use elemdyn_core::dynamics::DEFAULT_ORBIT_CAP;
use elemdyn_core::finite_rank::{Triplet, DEFAULT_SUPPORT_CAP};
use elemdyn_core::report::Format;
use elemdyn_core::structured::{
    build_aperiodic_shift, build_example_w, cyclic_blocks, identity, scaled_identity,
    PermutationKind, ResidueShift, WeightRule,
};
use elemdyn_core::{
    Direction, Dyadic, FiniteRankOperator, Mode, NormKind, SubspaceSpec,
    WeightedPermutationOperator,
};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Maps byte offsets to 1-based line numbers.
struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn of(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        self.0[..end].matches('\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            message: message.into(),
            line: Some(self.of(span)),
        }
    }
}

// ---- raw TOML shape ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    #[serde(default)]
    limits: RawLimits,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    operators: BTreeMap<String, Spanned<RawOperator>>,
    #[serde(default)]
    systems: BTreeMap<String, Spanned<RawSystem>>,
    #[serde(default)]
    runs: Vec<Spanned<RawRun>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Spanned<String>,
    #[serde(default)]
    mode: Option<Spanned<String>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    support_cap: Option<usize>,
    orbit_cap: Option<u64>,
    threshold: Option<Spanned<f64>>,
    window: Option<usize>,
    tail_ratio: Option<f64>,
    tail_run: Option<usize>,
    max_terms: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<Spanned<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    builtin: Option<String>,
    block: Option<u64>,
    scale: Option<String>,
    adjoint: Option<Spanned<String>>,
    inverse: Option<Spanned<String>>,
    permutation: Option<RawPermutation>,
    weights: Option<RawWeights>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPermutation {
    kind: String,
    period: Option<u64>,
    shifts: Option<Vec<i64>>,
    #[serde(default)]
    exceptions: BTreeMap<String, u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    period: Option<u64>,
    values: Vec<String>,
    #[serde(default)]
    exceptions: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    u: Spanned<String>,
    w: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSchedule {
    Explicit(Vec<u64>),
    Affine { offset: u64, count: u64 },
}

#[derive(Deserialize, Clone, Default)]
#[serde(deny_unknown_fields)]
struct RawOperand {
    projection: Option<u64>,
    subspace: Option<Vec<u64>>,
    entries: Option<Vec<Triplet>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    id: Option<String>,
    kind: String,
    system: Spanned<String>,
    criterion: Option<String>,
    witness: Option<String>,
    m: Option<u64>,
    k_max: Option<u64>,
    limit: Option<u64>,
    schedule: Option<RawSchedule>,
    backward_schedule: Option<RawSchedule>,
    subspace: Option<Vec<u64>>,
    probe_horizon: Option<u64>,
    n: Option<u64>,
    tol: Option<f64>,
    threshold: Option<f64>,
    f: Option<RawOperand>,
    g: Option<RawOperand>,
    start: Option<RawOperand>,
    targets: Option<Vec<RawOperand>>,
    horizon: Option<u64>,
    norm: Option<String>,
    direction: Option<String>,
}

// ---- validated shape ----

#[derive(Debug, Clone)]
pub struct Limits {
    pub support_cap: usize,
    pub orbit_cap: u64,
    pub rule: DecayRule,
    pub tail: TailPolicy,
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    pub u: String,
    pub w: String,
}

/// A finite-rank operand, built in the scenario's mode when a run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Zero,
    Projection(SubspaceSpec),
    Entries(Vec<Triplet>),
}

impl Operand {
    pub fn build(&self, mode: Mode) -> elemdyn_core::Result<FiniteRankOperator> {
        match self {
            Operand::Zero => Ok(FiniteRankOperator::zero(mode)),
            Operand::Projection(s) => Ok(FiniteRankOperator::projection(s, mode)),
            Operand::Entries(t) => FiniteRankOperator::from_text_triplets(mode, t),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Zero => f.write_str("0"),
            Operand::Projection(s) => write!(f, "P[{s}]"),
            Operand::Entries(t) => {
                let parts: Vec<String> = t
                    .iter()
                    .map(|x| format!("({},{})={}", x.row, x.col, x.value))
                    .collect();
                write!(f, "[{}]", parts.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum CriterionTask {
    OrthogonalityHorizon { k_max: u64, limit: u64 },
    Hypercyclicity { m: u64, schedule: Schedule },
    ZeroTransitivity { k: SubspaceSpec, forward: Schedule, backward: Schedule },
    NecessaryM,
    PeriodicNecessary { schedule: Schedule, probe_horizon: u64 },
    ChaosSeries { m: u64, schedule: Schedule },
    CosineSeries { m: u64, schedule: Schedule },
    CosineSplit { m: u64, schedule: Schedule },
    Adjoint { m: u64, schedule: Schedule, variant: AdjointVariant },
}

impl CriterionTask {
    pub fn id(&self) -> &'static str {
        match self {
            CriterionTask::OrthogonalityHorizon { .. } => "orthogonality-horizon",
            CriterionTask::Hypercyclicity { .. } => "hypercyclicity",
            CriterionTask::ZeroTransitivity { .. } => "zero-transitivity",
            CriterionTask::NecessaryM => "necessary-m",
            CriterionTask::PeriodicNecessary { .. } => "periodic-necessary",
            CriterionTask::ChaosSeries { .. } => "chaos-series",
            CriterionTask::CosineSeries { .. } => "cosine-series",
            CriterionTask::CosineSplit { .. } => "cosine-split",
            CriterionTask::Adjoint {
                variant: AdjointVariant::Split,
                ..
            } => "adjoint-split",
            CriterionTask::Adjoint { .. } => "adjoint-transitivity",
        }
    }
}

#[derive(Debug, Clone)]
pub enum WitnessTask {
    Transitive { f: Operand, g: Operand, m: u64, schedule: Schedule },
    Periodic { f: Operand, m: u64, n: u64, tol: f64 },
    Cosine { f: Operand, g: Operand, m: u64, schedule: Schedule },
    AdjointCosine { g1: Operand, g2: Operand, m: u64, schedule: Schedule },
}

#[derive(Debug, Clone)]
pub struct OrbitTask {
    pub start: Operand,
    pub horizon: u64,
    pub norm: NormKind,
    pub direction: Direction,
    pub targets: Vec<Operand>,
}

#[derive(Debug, Clone)]
pub struct NormsTask {
    pub m: u64,
    pub horizon: u64,
}

#[derive(Debug, Clone)]
pub enum Task {
    Criterion(CriterionTask),
    Witness(WitnessTask),
    Orbit(OrbitTask),
    Norms(NormsTask),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Criterion(_) => "criterion",
            Task::Witness(_) => "witness",
            Task::Orbit(_) => "orbit",
            Task::Norms(_) => "norms",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub id: String,
    pub system: String,
    pub line: usize,
    /// Overrides the scenario decay threshold for this run.
    pub rule: DecayRule,
    pub task: Task,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    pub limits: Limits,
    pub output: OutputSpec,
    pub operators: BTreeMap<String, WeightedPermutationOperator>,
    pub systems: BTreeMap<String, SystemSpec>,
    pub runs: Vec<RunSpec>,
}

impl ScenarioConfig {
    pub fn system_operators(
        &self,
        name: &str,
    ) -> Option<(&WeightedPermutationOperator, &WeightedPermutationOperator)> {
        let s = self.systems.get(name)?;
        Some((self.operators.get(&s.u)?, self.operators.get(&s.w)?))
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        && !s.starts_with('.')
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let lines = Lines(text);
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        message: e.message().to_string(),
        line: e.span().map(|s| lines.of(s)),
    })?;

    let name_span = raw.scenario.name.span();
    let name = raw.scenario.name.into_inner();
    if !valid_name(&name) {
        return Err(lines.err(
            name_span,
            format!("scenario name '{name}' must use only letters, digits, '-', '_' or '.'"),
        ));
    }
    let mode = match raw.scenario.mode {
        None => Mode::Exact,
        Some(m) => {
            let span = m.span();
            m.into_inner()
                .parse()
                .map_err(|e: elemdyn_core::Error| lines.err(span, e.to_string()))?
        }
    };

    let limits = parse_limits(&lines, raw.limits)?;
    let output = parse_output(&lines, raw.output)?;
    let operators = resolve_operators(&lines, &raw.operators)?;

    let mut systems = BTreeMap::new();
    for (sname, sys) in &raw.systems {
        for r in [&sys.get_ref().u, &sys.get_ref().w] {
            if !operators.contains_key(r.get_ref()) {
                return Err(lines.err(
                    r.span(),
                    format!("system '{sname}' references undeclared operator '{}'", r.get_ref()),
                ));
            }
        }
        systems.insert(
            sname.clone(),
            SystemSpec {
                u: sys.get_ref().u.get_ref().clone(),
                w: sys.get_ref().w.get_ref().clone(),
            },
        );
    }

    let mut runs = Vec::with_capacity(raw.runs.len());
    let mut ids = BTreeSet::new();
    for (i, run) in raw.runs.into_iter().enumerate() {
        let span = run.span();
        let spec = parse_run(&lines, i, span.clone(), run.into_inner(), &systems, &limits, mode)?;
        if !ids.insert(spec.id.clone()) {
            return Err(lines.err(span, format!("duplicate run id '{}'", spec.id)));
        }
        runs.push(spec);
    }

    Ok(ScenarioConfig {
        name,
        mode,
        limits,
        output,
        operators,
        systems,
        runs,
    })
}

fn parse_limits(lines: &Lines, raw: RawLimits) -> Result<Limits> {
    let threshold = raw.threshold.as_ref().map(|t| *t.get_ref()).unwrap_or(DEFAULT_THRESHOLD);
    let window = raw.window.unwrap_or(DEFAULT_WINDOW);
    let span = raw.threshold.as_ref().map(|t| t.span()).unwrap_or(0..0);
    let rule = DecayRule::new(threshold, window).map_err(|e| lines.err(span, e.to_string()))?;
    let d = TailPolicy::default();
    let tail = TailPolicy::new(
        raw.tail_ratio.unwrap_or(d.ratio),
        raw.tail_run.unwrap_or(d.run),
        raw.max_terms.unwrap_or(d.max_terms),
    )
    .map_err(|e| ConfigError {
        message: e.to_string(),
        line: None,
    })?;
    let support_cap = raw.support_cap.unwrap_or(DEFAULT_SUPPORT_CAP);
    let orbit_cap = raw.orbit_cap.unwrap_or(DEFAULT_ORBIT_CAP);
    if support_cap == 0 {
        return Err(ConfigError {
            message: "support_cap must be positive".into(),
            line: None,
        });
    }
    Ok(Limits {
        support_cap,
        orbit_cap,
        rule,
        tail,
    })
}

fn parse_output(lines: &Lines, raw: RawOutput) -> Result<OutputSpec> {
    let formats = match raw.formats {
        None => vec![Format::Json],
        Some(list) => {
            let mut out = Vec::new();
            for f in list {
                let span = f.span();
                let parsed: Format = f
                    .into_inner()
                    .parse()
                    .map_err(|e: elemdyn_core::Error| lines.err(span, e.to_string()))?;
                if !out.contains(&parsed) {
                    out.push(parsed);
                }
            }
            out
        }
    };
    Ok(OutputSpec {
        dir: raw.dir,
        formats,
    })
}

fn parse_index_map<V: Clone>(
    map: &BTreeMap<String, V>,
    what: &str,
) -> std::result::Result<BTreeMap<u64, V>, String> {
    map.iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<u64>()
                .map(|j| (j, v.clone()))
                .map_err(|_| format!("{what} key '{k}' is not a positive index"))
        })
        .collect()
}

fn build_declared(name: &str, raw: &RawOperator) -> std::result::Result<WeightedPermutationOperator, String> {
    if let Some(b) = &raw.builtin {
        let op = match b.as_str() {
            "example-w" => build_example_w(),
            "aperiodic-shift" => build_aperiodic_shift(),
            "identity" => identity(),
            "scaled-identity" => {
                let c: Dyadic = raw
                    .scale
                    .as_deref()
                    .ok_or("builtin 'scaled-identity' needs 'scale'")?
                    .parse()
                    .map_err(|e: elemdyn_core::Error| e.to_string())?;
                scaled_identity(c)
            }
            "cyclic-blocks" => cyclic_blocks(raw.block.ok_or("builtin 'cyclic-blocks' needs 'block'")?)
                .map_err(|e| e.to_string())?,
            other => return Err(format!("unknown builtin operator '{other}'")),
        };
        return Ok(op.with_name(name));
    }
    let perm = raw
        .permutation
        .as_ref()
        .ok_or("operator needs one of 'builtin', 'adjoint', 'inverse' or 'permutation'")?;
    let kind = match perm.kind.as_str() {
        "identity" => PermutationKind::Identity,
        "zigzag" => PermutationKind::Zigzag,
        "residue" => {
            let period = perm.period.ok_or("residue permutation needs 'period'")?;
            let shifts = perm.shifts.clone().ok_or("residue permutation needs 'shifts'")?;
            let exceptions = parse_index_map(&perm.exceptions, "permutation exception")?;
            PermutationKind::ResidueShift(
                ResidueShift::new(period, shifts, exceptions).map_err(|e| e.to_string())?,
            )
        }
        other => return Err(format!("unknown permutation kind '{other}'")),
    };
    let weights = match &raw.weights {
        None => WeightRule::constant(Dyadic::one()),
        Some(w) => {
            let values = w
                .values
                .iter()
                .map(|v| v.parse::<Dyadic>().map_err(|e| e.to_string()))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mut exceptions = BTreeMap::new();
            for (j, v) in parse_index_map(&w.exceptions, "weight exception")? {
                exceptions.insert(j, v.parse::<Dyadic>().map_err(|e| e.to_string())?);
            }
            if values.iter().chain(exceptions.values()).any(Dyadic::is_zero) {
                return Err("weights must be nonzero".into());
            }
            let period = w.period.unwrap_or(values.len() as u64);
            WeightRule::periodic(period, values, exceptions).map_err(|e| e.to_string())?
        }
    };
    let op = WeightedPermutationOperator::new(name, kind, weights).map_err(|e| e.to_string())?;
    op.verify(256).map_err(|e| e.to_string())?;
    Ok(op)
}

fn resolve_operators(
    lines: &Lines,
    raw: &BTreeMap<String, Spanned<RawOperator>>,
) -> Result<BTreeMap<String, WeightedPermutationOperator>> {
    fn resolve(
        name: &str,
        lines: &Lines,
        raw: &BTreeMap<String, Spanned<RawOperator>>,
        done: &mut BTreeMap<String, WeightedPermutationOperator>,
        visiting: &mut BTreeSet<String>,
    ) -> Result<()> {
        if done.contains_key(name) {
            return Ok(());
        }
        let entry = &raw[name];
        let op = entry.get_ref();
        let declared = [
            op.builtin.is_some(),
            op.adjoint.is_some(),
            op.inverse.is_some(),
            op.permutation.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if declared != 1 {
            return Err(lines.err(
                entry.span(),
                format!("operator '{name}' must set exactly one of 'builtin', 'adjoint', 'inverse', 'permutation'"),
            ));
        }
        visiting.insert(name.to_string());
        let derived = op.adjoint.as_ref().map(|r| (r, true)).or(op.inverse.as_ref().map(|r| (r, false)));
        let built = if let Some((base, is_adjoint)) = derived {
            let b = base.get_ref();
            if !raw.contains_key(b) {
                return Err(lines.err(base.span(), format!("operator '{name}' references undeclared operator '{b}'")));
            }
            if visiting.contains(b) {
                return Err(lines.err(base.span(), format!("operator '{name}' is defined in terms of itself")));
            }
            resolve(b, lines, raw, done, visiting)?;
            let base_op = &done[b];
            let out = if is_adjoint {
                Ok(base_op.adjoint())
            } else {
                base_op.inverse().map_err(|e| e.to_string())
            };
            out.map(|o| o.with_name(name)).map_err(|m| lines.err(entry.span(), m))?
        } else {
            build_declared(name, op).map_err(|m| lines.err(entry.span(), format!("operator '{name}': {m}")))?
        };
        visiting.remove(name);
        done.insert(name.to_string(), built);
        Ok(())
    }

    let mut done = BTreeMap::new();
    for name in raw.keys() {
        if !valid_name(name) {
            return Err(lines.err(raw[name].span(), format!("invalid operator name '{name}'")));
        }
        resolve(name, lines, raw, &mut done, &mut BTreeSet::new())?;
    }
    Ok(done)
}

struct RunCtx<'a> {
    lines: &'a Lines<'a>,
    span: Range<usize>,
    id: String,
}

impl RunCtx<'_> {
    fn err(&self, message: impl fmt::Display) -> ConfigError {
        self.lines.err(self.span.clone(), format!("run '{}': {message}", self.id))
    }

    fn need<T>(&self, v: Option<T>, field: &str) -> Result<T> {
        v.ok_or_else(|| self.err(format!("missing '{field}'")))
    }

    fn positive(&self, v: Option<u64>, field: &str) -> Result<u64> {
        let x = self.need(v, field)?;
        if x == 0 {
            return Err(self.err(format!("'{field}' must be positive")));
        }
        Ok(x)
    }

    fn schedule(&self, raw: Option<RawSchedule>, field: &str) -> Result<Schedule> {
        let s = match self.need(raw, field)? {
            RawSchedule::Explicit(ns) => Schedule::explicit(ns),
            RawSchedule::Affine { offset, count } => Schedule::affine(offset, count),
        };
        s.map_err(|e| self.err(format!("{field}: {e}")))
    }

    fn operand(&self, raw: Option<RawOperand>, field: &str, mode: Mode) -> Result<Operand> {
        let raw = self.need(raw, field)?;
        let set = [raw.projection.is_some(), raw.subspace.is_some(), raw.entries.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if set > 1 {
            return Err(self.err(format!("'{field}' must use one of projection, subspace, entries")));
        }
        let op = if let Some(m) = raw.projection {
            Operand::Projection(SubspaceSpec::leading(m))
        } else if let Some(s) = raw.subspace {
            Operand::Projection(SubspaceSpec::from_indices(s).map_err(|e| self.err(e))?)
        } else if let Some(t) = raw.entries {
            Operand::Entries(t)
        } else {
            Operand::Zero
        };
        op.build(mode).map_err(|e| self.err(format!("{field}: {e}")))?;
        Ok(op)
    }
}

fn parse_run(
    lines: &Lines,
    index: usize,
    span: Range<usize>,
    raw: RawRun,
    systems: &BTreeMap<String, SystemSpec>,
    limits: &Limits,
    mode: Mode,
) -> Result<RunSpec> {
    let label = raw
        .criterion
        .clone()
        .or(raw.witness.clone())
        .unwrap_or_else(|| raw.kind.clone());
    let id = raw.id.clone().unwrap_or_else(|| format!("{:02}-{label}", index + 1));
    let ctx = RunCtx {
        lines,
        span: span.clone(),
        id: id.clone(),
    };
    if !valid_name(&id) {
        return Err(ctx.err("run ids must use only letters, digits, '-', '_' or '.'"));
    }
    let system = raw.system.get_ref().clone();
    if !systems.contains_key(&system) {
        return Err(lines.err(
            raw.system.span(),
            format!("run '{id}' references undeclared system '{system}'"),
        ));
    }
    let rule = match raw.threshold {
        Some(t) => DecayRule::new(t, limits.rule.window).map_err(|e| ctx.err(e))?,
        None => limits.rule,
    };
    let task = match raw.kind.as_str() {
        "criterion" => {
            let id = ctx.need(raw.criterion.as_deref(), "criterion")?;
            Task::Criterion(match id {
                "orthogonality-horizon" => CriterionTask::OrthogonalityHorizon {
                    k_max: ctx.positive(raw.k_max, "k_max")?,
                    limit: ctx.positive(raw.limit.or(Some(64)), "limit")?,
                },
                "hypercyclicity" => CriterionTask::Hypercyclicity {
                    m: ctx.positive(raw.m, "m")?,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                "zero-transitivity" => {
                    let k = match (raw.subspace, raw.m) {
                        (Some(s), _) => SubspaceSpec::from_indices(s).map_err(|e| ctx.err(e))?,
                        (None, m) => SubspaceSpec::leading(ctx.positive(m, "m")?),
                    };
                    let forward = ctx.schedule(raw.schedule, "schedule")?;
                    let backward = match raw.backward_schedule {
                        Some(b) => ctx.schedule(Some(b), "backward_schedule")?,
                        None => forward.clone(),
                    };
                    CriterionTask::ZeroTransitivity { k, forward, backward }
                }
                "necessary-m" => CriterionTask::NecessaryM,
                "periodic-necessary" => CriterionTask::PeriodicNecessary {
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                    probe_horizon: ctx.positive(raw.probe_horizon.or(Some(256)), "probe_horizon")?,
                },
                "chaos-series" => CriterionTask::ChaosSeries {
                    m: ctx.positive(raw.m, "m")?,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                "cosine-series" => CriterionTask::CosineSeries {
                    m: ctx.positive(raw.m, "m")?,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                "cosine-split" => CriterionTask::CosineSplit {
                    m: ctx.positive(raw.m, "m")?,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                "adjoint-split" | "adjoint-transitivity" => CriterionTask::Adjoint {
                    m: ctx.positive(raw.m, "m")?,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                    variant: if id == "adjoint-split" {
                        AdjointVariant::Split
                    } else {
                        AdjointVariant::Transitive
                    },
                },
                other => return Err(ctx.err(format!("unknown criterion '{other}'"))),
            })
        }
        "witness" => {
            let which = ctx.need(raw.witness.as_deref(), "witness")?;
            let m = ctx.positive(raw.m, "m")?;
            Task::Witness(match which {
                "transitive" => WitnessTask::Transitive {
                    f: ctx.operand(raw.f, "f", mode)?,
                    g: ctx.operand(raw.g, "g", mode)?,
                    m,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                "periodic" => {
                    let tol = ctx.need(raw.tol, "tol")?;
                    if !(tol > 0.0 && tol.is_finite()) {
                        return Err(ctx.err("'tol' must be positive"));
                    }
                    WitnessTask::Periodic {
                        f: ctx.operand(raw.f, "f", mode)?,
                        m,
                        n: ctx.positive(raw.n, "n")?,
                        tol,
                    }
                }
                "cosine" => WitnessTask::Cosine {
                    f: ctx.operand(raw.f, "f", mode)?,
                    g: ctx.operand(raw.g, "g", mode)?,
                    m,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                "adjoint-cosine" => WitnessTask::AdjointCosine {
                    g1: ctx.operand(raw.f, "f", mode)?,
                    g2: ctx.operand(raw.g, "g", mode)?,
                    m,
                    schedule: ctx.schedule(raw.schedule, "schedule")?,
                },
                other => return Err(ctx.err(format!("unknown witness '{other}'"))),
            })
        }
        "orbit" => {
            let norm = match raw.norm {
                Some(n) => n.parse().map_err(|e| ctx.err(e))?,
                None => NormKind::Operator,
            };
            let direction = match raw.direction {
                Some(d) => d.parse().map_err(|e| ctx.err(e))?,
                None => Direction::Forward,
            };
            let targets = raw
                .targets
                .unwrap_or_default()
                .into_iter()
                .map(|t| ctx.operand(Some(t), "targets", mode))
                .collect::<Result<Vec<_>>>()?;
            Task::Orbit(OrbitTask {
                start: ctx.operand(raw.start, "start", mode)?,
                horizon: ctx.need(raw.horizon, "horizon")?,
                norm,
                direction,
                targets,
            })
        }
        "norms" => Task::Norms(NormsTask {
            m: ctx.positive(raw.m, "m")?,
            horizon: ctx.need(raw.horizon, "horizon")?,
        }),
        other => return Err(ctx.err(format!("unknown run kind '{other}'"))),
    };
    Ok(RunSpec {
        id,
        system,
        line: lines.of(span),
        rule,
        task,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "t"

[operators.U]
builtin = "aperiodic-shift"

[operators.W]
builtin = "example-w"

[systems.s]
u = "U"
w = "W"
"#;

    #[test]
    fn empty_runs_are_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert!(cfg.runs.is_empty());
        assert_eq!(cfg.mode, Mode::Exact);
        assert_eq!(cfg.output.formats, vec![Format::Json]);
    }

    #[test]
    fn undeclared_operator_is_named() {
        let text = MINIMAL.replace("w = \"W\"", "w = \"W2\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("W2"), "{err}");
        assert_eq!(err.line, Some(13));
    }

    #[test]
    fn non_increasing_schedule() {
        let text = format!(
            "{MINIMAL}\n[[runs]]\nkind = \"criterion\"\ncriterion = \"hypercyclicity\"\nsystem = \"s\"\nm = 2\nschedule = [4, 4, 5]\n"
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("strictly increasing"), "{err}");
        assert!(err.line.is_some());
    }

    #[test]
    fn declared_operators_and_derivations() {
        let text = r#"
[scenario]
name = "d"

[operators.W]
permutation = { kind = "residue", period = 2, shifts = [-2, 2], exceptions = { "2" = 1 } }
weights = { values = ["2", "1/2"], exceptions = { "2" = "1" } }

[operators.Wa]
adjoint = "W"

[operators.Wi]
inverse = "Wa"
"#;
        let cfg = parse_config(text).unwrap();
        let w = &cfg.operators["W"];
        let ex = build_example_w();
        for j in 1..50 {
            assert_eq!(w.apply(j).unwrap(), ex.apply(j).unwrap());
        }
        assert_eq!(cfg.operators["Wa"].name(), "Wa");
        assert!(cfg.operators["Wi"].is_invertible().unwrap());
    }

    #[test]
    fn bad_weight_rule_has_a_line() {
        let text = "[scenario]\nname = \"b\"\n\n[operators.W]\npermutation = { kind = \"identity\" }\nweights = { period = 2, values = [\"1\"] }\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.line, Some(4), "{err}");
        let text = "[scenario]\nname = \"b\"\n[operators.W]\npermutation = { kind = \"identity\" }\nweights = { values = [\"0\"] }\n";
        assert!(parse_config(text).unwrap_err().message.contains("nonzero"));
    }

    #[test]
    fn cycles_and_syntax_errors() {
        let text = "[scenario]\nname = \"c\"\n[operators.A]\nadjoint = \"B\"\n[operators.B]\ninverse = \"A\"\n";
        assert!(parse_config(text).unwrap_err().message.contains("itself"));
        let err = parse_config("[scenario]\nname = \n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = parse_config("[scenario]\nname = \"x\"\nbogus = 1\n").unwrap_err();
        assert!(err.line.is_some());
    }

    #[test]
    fn unknown_criterion_and_duplicate_ids() {
        let run = "\n[[runs]]\nid = \"a\"\nkind = \"criterion\"\ncriterion = \"necessary-m\"\nsystem = \"s\"\n";
        let text = format!("{MINIMAL}{run}{run}");
        assert!(parse_config(&text).unwrap_err().message.contains("duplicate"));
        let text = format!("{MINIMAL}{}", run.replace("necessary-m", "nope"));
        assert!(parse_config(&text).unwrap_err().message.contains("nope"));
    }
}
