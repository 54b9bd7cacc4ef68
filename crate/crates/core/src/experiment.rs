//! Configuration-driven experiment runs, instance files and CSV reports.
//!
//! Instances and experiment configurations share one JSON file format.
//! Every run is deterministic given its seeds: generator, rollout and
//! baseline seeds are derived from a root seed with [`derive_seed`], rows
//! are ordered by `(instance, method)`, and the CSV carries no timing, so
//! re-running a configuration reproduces its CSV byte for byte.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{
    asen_objective, gen_ba, gen_er, influence_max_greedy, random_select_baseline, AsenProblem,
    CascadeNetwork, DEFAULT_ASEN_GAMMA, DEFAULT_INFLUENCE, DEFAULT_ROLLOUTS, DEFAULT_TRUNCATION_EPS,
};
use crate::error::{Error, Result};
use crate::instances::{
    example1_mdp, example2_mdp, example3_instance, example4_instance, random_fmdp_as_instance,
    random_fmdp_ss_instance, setcover_brute_force, setcover_to_fmdp_as, setcover_to_fmdp_ss, GapParams,
    RandomAsParams, RandomSsParams, ReductionInstance, SetCoverInstance, Var3Reward,
};
use crate::pomdp::SolverOptions;
use crate::selection::{
    brute_force_select, brute_force_select_costed, evaluate_actuator_set, evaluate_sensor_set_with,
    greedy_select, greedy_select_cost_ratio, ActuatorObjective, ActuatorProblem, CachedObjective,
    SelectionReport, SensorObjective, SensorProblem, SubsetObjective, DEFAULT_SUBSET_CAP,
};

/// Pruning margin used for the random sensor-selection study unless the
/// configuration sets solver options explicitly. Each stage then loses at
/// most `1e-4` of the largest alpha entry, so values are accurate to about
/// `1e-4 · max|α| / (1-γ)`.
pub const RANDOM_SS_PRUNE_TOL: f64 = 1e-4;
pub use crate::instances::RANDOM_SS_GAMMA;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for task `stream` under `root`.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    mix(root ^ mix(stream))
}

// ---------------------------------------------------------------------------
// instance files

/// Any problem the tools can read or write.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Sensor(SensorProblem),
    Actuator(ActuatorProblem),
    SensorReduction(ReductionInstance<SensorProblem>),
    ActuatorReduction(ReductionInstance<ActuatorProblem>),
    SetCover(SetCoverInstance),
    Asen(AsenProblem),
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        match self {
            Instance::Sensor(p) => validate_sensor(p),
            Instance::Actuator(p) => validate_actuator(p),
            Instance::SensorReduction(r) => {
                r.source.validate()?;
                validate_sensor(&r.problem)
            }
            Instance::ActuatorReduction(r) => {
                r.source.validate()?;
                validate_actuator(&r.problem)
            }
            Instance::SetCover(sc) => sc.validate(),
            Instance::Asen(p) => p.validate(),
        }
    }
}

fn validate_sensor(p: &SensorProblem) -> Result<()> {
    p.mdp.validate()?;
    p.catalog.validate(&p.mdp)
}

fn validate_actuator(p: &ActuatorProblem) -> Result<()> {
    p.mdp.validate()?;
    p.catalog.validate(&p.mdp)
}

fn json_error(context: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        context: format!("{context}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    }
}

/// Parses and validates an instance; `context` names the source in errors.
pub fn parse_instance(text: &str, context: &str) -> Result<Instance> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| json_error(context, e))?;
    inst.validate()?;
    Ok(inst)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text, &path.display().to_string())
}

pub fn instance_to_string(inst: &Instance) -> Result<String> {
    serde_json::to_string_pretty(inst).map_err(|e| Error::Parse {
        context: "instance".into(),
        message: e.to_string(),
    })
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    let mut text = instance_to_string(inst)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Greedy,
    CostRatio,
    Brute,
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::CostRatio => "cost-ratio",
            Method::Brute => "brute",
            Method::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Method::Greedy),
            "cost-ratio" => Ok(Method::CostRatio),
            "brute" => Ok(Method::Brute),
            "random" => Ok(Method::Random),
            other => Err(Error::input(format!(
                "unknown method {other:?} (expected greedy, cost-ratio, brute or random)"
            ))),
        }
    }
}

/// Which selection problem a gadget experiment builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Sensor,
    Actuator,
}

fn both_kinds() -> Vec<ProblemKind> {
    vec![ProblemKind::Sensor, ProblemKind::Actuator]
}

fn one() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_gamma() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    #[serde(default = "one")]
    pub reward: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl Default for LemmaParams {
    fn default() -> Self {
        LemmaParams {
            reward: 1.0,
            delta: 0.1,
            gamma: 0.9,
        }
    }
}

fn default_r3() -> f64 {
    0.5
}
fn default_c() -> f64 {
    0.01
}
fn default_h() -> Vec<f64> {
    vec![2.0, 5.0, 10.0, 50.0]
}

/// Greedy-gap sweep: `R4 = h · R2` for each `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropGapParams {
    #[serde(default = "one")]
    pub r2: f64,
    #[serde(default = "default_r3")]
    pub r3: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    #[serde(default)]
    pub var3_reward: Var3Reward,
    #[serde(default = "both_kinds")]
    pub problems: Vec<ProblemKind>,
}

impl Default for PropGapParams {
    fn default() -> Self {
        PropGapParams {
            r2: 1.0,
            r3: 0.5,
            c: 0.01,
            gamma: 0.9,
            h: default_h(),
            var3_reward: Var3Reward::default(),
            problems: both_kinds(),
        }
    }
}

impl PropGapParams {
    fn gap(&self, h: f64) -> GapParams {
        let mut p = GapParams::new(self.r2, self.r3, h * self.r2, self.c, self.gamma);
        p.var3_reward = self.var3_reward;
        p
    }
}

/// Greedy-to-optimal ratio predicted for the gap instances.
///
/// Without any reward on the third gadget a sensor policy can steer that
/// gadget into C blind, so greedy's first pick already collects `R4` and
/// the gap closes. Actuators cannot move a gadget they do not control, so
/// the actuator variant keeps the gap in every mode.
pub fn predicted_gap_ratio(p: &GapParams, kind: ProblemKind) -> f64 {
    match (p.var3_reward, kind) {
        (Var3Reward::PenaltyOnly, _) | (Var3Reward::Omitted, ProblemKind::Actuator) => p.predicted_ratio(),
        (Var3Reward::Omitted, ProblemKind::Sensor) => 1.0,
        (Var3Reward::Full, _) => (2.0 * p.r2 + p.c) / (p.r2 + p.r3 + p.r4),
    }
}

fn three() -> usize {
    3
}
fn two() -> usize {
    2
}
fn two_f() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}

/// Exhaustive audit of the set-cover reductions on every small instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    #[serde(default = "three")]
    pub max_n: usize,
    #[serde(default = "three")]
    pub max_m: usize,
    #[serde(default = "two")]
    pub max_k: usize,
    #[serde(default = "two_f")]
    pub c_exp: f64,
    #[serde(default = "one")]
    pub reward: f64,
    #[serde(default = "half")]
    pub gamma: f64,
    #[serde(default = "both_kinds")]
    pub problems: Vec<ProblemKind>,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            max_n: 3,
            max_m: 3,
            max_k: 2,
            c_exp: 2.0,
            reward: 1.0,
            gamma: 0.5,
            problems: both_kinds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NetworkModel {
    Er { p_edge: f64 },
    Ba,
}

impl NetworkModel {
    fn label(&self) -> &'static str {
        match self {
            NetworkModel::Er { .. } => "ER",
            NetworkModel::Ba => "BA",
        }
    }

    fn p_edge(&self) -> Option<f64> {
        match self {
            NetworkModel::Er { p_edge } => Some(*p_edge),
            NetworkModel::Ba => None,
        }
    }

    fn generate(&self, n: usize, influence: f64, seed: u64) -> Result<CascadeNetwork> {
        match self {
            NetworkModel::Er { p_edge } => gen_er(n, *p_edge, influence, seed),
            NetworkModel::Ba => gen_ba(n, influence, seed),
        }
    }
}

/// A grid of ASEN instances: every combination of node count, budget and
/// initial fault count on one network model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsenSweep {
    pub label: String,
    pub network: NetworkModel,
    pub nodes: Vec<usize>,
    pub budgets: Vec<usize>,
    pub faulty: Vec<usize>,
}

/// The random-instance experiment plus the budget, size and fault sweeps on
/// ER(0.1), ER(0.3) and BA networks.
pub fn standard_sweeps() -> Vec<AsenSweep> {
    let models = [
        ("er01", NetworkModel::Er { p_edge: 0.1 }),
        ("er03", NetworkModel::Er { p_edge: 0.3 }),
        ("ba", NetworkModel::Ba),
    ];
    let mut sweeps = vec![AsenSweep {
        label: "random-er03".into(),
        network: NetworkModel::Er { p_edge: 0.3 },
        nodes: vec![30],
        budgets: vec![5],
        faulty: vec![5],
    }];
    for (name, model) in models {
        let budgets: Vec<usize> = if matches!(model, NetworkModel::Ba) {
            (1..=5).collect()
        } else {
            (1..=7).collect()
        };
        sweeps.push(AsenSweep {
            label: format!("budget-{name}"),
            network: model.clone(),
            nodes: vec![30],
            budgets,
            faulty: vec![5],
        });
        sweeps.push(AsenSweep {
            label: format!("size-{name}"),
            network: model.clone(),
            nodes: vec![10, 15, 20, 25],
            budgets: vec![5],
            faulty: vec![5],
        });
        sweeps.push(AsenSweep {
            label: format!("faults-{name}"),
            network: model,
            nodes: vec![30],
            budgets: vec![5],
            faulty: vec![3, 5, 7, 10],
        });
    }
    sweeps
}

fn default_rollouts() -> usize {
    DEFAULT_ROLLOUTS
}
fn default_im_rollouts() -> usize {
    500
}
fn default_pool() -> usize {
    12
}
fn default_asen_gamma() -> f64 {
    DEFAULT_ASEN_GAMMA
}
fn default_influence() -> f64 {
    DEFAULT_INFLUENCE
}
fn default_trunc() -> f64 {
    DEFAULT_TRUNCATION_EPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsenSweepParams {
    #[serde(default = "standard_sweeps")]
    pub sweeps: Vec<AsenSweep>,
    #[serde(default = "default_rollouts")]
    pub rollouts: usize,
    /// Rollouts per spread estimate when choosing the faulty seed set.
    #[serde(default = "default_im_rollouts")]
    pub im_rollouts: usize,
    /// Brute force searches this many nodes: greedy's picks plus the best
    /// single placements. Networks this small are searched exhaustively.
    #[serde(default = "default_pool")]
    pub pool_size: usize,
    #[serde(default = "default_asen_gamma")]
    pub gamma: f64,
    #[serde(default = "default_influence")]
    pub influence: f64,
    #[serde(default = "default_trunc")]
    pub truncation_eps: f64,
}

impl Default for AsenSweepParams {
    fn default() -> Self {
        AsenSweepParams {
            sweeps: standard_sweeps(),
            rollouts: DEFAULT_ROLLOUTS,
            im_rollouts: default_im_rollouts(),
            pool_size: default_pool(),
            gamma: DEFAULT_ASEN_GAMMA,
            influence: DEFAULT_INFLUENCE,
            truncation_eps: DEFAULT_TRUNCATION_EPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    LemmaCheck(LemmaParams),
    PropGap(PropGapParams),
    ReductionAudit(AuditParams),
    RandomSs(RandomSsParams),
    RandomAs(RandomAsParams),
    AsenSweep(AsenSweepParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LemmaCheck(_) => "lemma-check",
            Experiment::PropGap(_) => "prop-gap",
            Experiment::ReductionAudit(_) => "reduction-audit",
            Experiment::RandomSs(_) => "random-ss",
            Experiment::RandomAs(_) => "random-as",
            Experiment::AsenSweep(_) => "asen-sweep",
        }
    }

    fn uses_seeds(&self) -> bool {
        matches!(
            self,
            Experiment::RandomSs(_) | Experiment::RandomAs(_) | Experiment::AsenSweep(_)
        )
    }
}

fn default_instances() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    /// Explicit instance seeds; when empty, `instances` seeds are derived
    /// from `seed`.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// Run on this instance file instead of generated instances
    /// (random-ss / random-as only).
    #[serde(default)]
    pub instance: Option<PathBuf>,
    /// Defaults per experiment when empty.
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seeds: Vec::new(),
            seed: 0,
            instances: default_instances(),
            instance: None,
            methods: Vec::new(),
            solver: None,
            output: None,
        }
    }

    /// Default configuration for an experiment kind name.
    pub fn preset(kind: &str) -> Result<Self> {
        let experiment = match kind {
            "lemma-check" => Experiment::LemmaCheck(LemmaParams::default()),
            "prop-gap" => Experiment::PropGap(PropGapParams::default()),
            "reduction-audit" => Experiment::ReductionAudit(AuditParams::default()),
            "random-ss" => Experiment::RandomSs(RandomSsParams::default()),
            "random-as" => Experiment::RandomAs(RandomAsParams::default()),
            "asen-sweep" => Experiment::AsenSweep(AsenSweepParams::default()),
            other => {
                return Err(Error::input(format!(
                    "unknown experiment kind {other:?} (expected lemma-check, prop-gap, \
                     reduction-audit, random-ss, random-as or asen-sweep)"
                )))
            }
        };
        Ok(ExperimentConfig::new(experiment))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(path) = &self.instance {
            if !matches!(self.experiment, Experiment::RandomSs(_) | Experiment::RandomAs(_)) {
                return Err(Error::input(format!(
                    "{} does not read instance files",
                    self.experiment.name()
                )));
            }
            if !path.exists() {
                return Err(Error::input(format!("instance file {} does not exist", path.display())));
            }
        } else if self.experiment.uses_seeds() && self.seed_list().is_empty() {
            return Err(Error::input("seed list is empty"));
        }
        if let Some(opts) = &self.solver {
            if !(opts.eta > 0.0) || !(opts.prune_tol >= 0.0) {
                return Err(Error::input("solver eta must be positive and prune_tol nonnegative"));
            }
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.instances as u64).map(|i| derive_seed(self.seed, i)).collect()
        } else {
            self.seeds.clone()
        }
    }

    fn methods_or(&self, default: &[Method]) -> Vec<Method> {
        let mut m = if self.methods.is_empty() {
            default.to_vec()
        } else {
            self.methods.clone()
        };
        m.sort();
        m.dedup();
        m
    }

    fn solver_options(&self) -> SolverOptions {
        match (&self.solver, &self.experiment) {
            (Some(opts), _) => *opts,
            (None, Experiment::RandomSs(_)) => SolverOptions {
                prune_tol: RANDOM_SS_PRUNE_TOL,
                ..SolverOptions::default()
            },
            (None, _) => SolverOptions::default(),
        }
    }
}

pub fn parse_config(text: &str, context: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| json_error(context, e))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text, &path.display().to_string())?;
    // instance paths are relative to the config file
    if let (Some(inst), Some(dir)) = (&cfg.instance, path.parent()) {
        if inst.is_relative() {
            cfg.instance = Some(dir.join(inst));
        }
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// reports

/// Parameters of one ASEN sweep point, carried on its rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsenPoint {
    pub network_type: String,
    pub n: usize,
    pub p_edge: Option<f64>,
    pub budget: usize,
    pub faulty: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub method: String,
    pub selected: Vec<usize>,
    pub value: Option<f64>,
    /// Optimal value the ratio is taken against.
    pub oracle: Option<f64>,
    /// `value / oracle`.
    pub ratio: Option<f64>,
    /// Value or ratio predicted analytically, when one exists.
    pub reference: Option<f64>,
    /// Whether the row meets its analytic expectation.
    pub check: Option<bool>,
    /// `ok`, or the error that stopped this row.
    pub status: String,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asen: Option<AsenPoint>,
}

impl ReportRow {
    fn new(instance: &str, method: &str) -> Self {
        ReportRow {
            instance: instance.to_string(),
            method: method.to_string(),
            selected: Vec::new(),
            value: None,
            oracle: None,
            ratio: None,
            reference: None,
            check: None,
            status: "ok".into(),
            wall_time_s: 0.0,
            asen: None,
        }
    }

    fn set_oracle(&mut self, oracle: Option<f64>) {
        self.oracle = oracle;
        self.ratio = match (self.value, oracle) {
            (Some(v), Some(o)) if o > 0.0 => Some(v / o),
            _ => None,
        };
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub rows: usize,
    pub failed: usize,
    pub ratios: usize,
    pub mean_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub checks_passed: usize,
    pub checks_failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub summary: Vec<MethodSummary>,
}

impl RunReport {
    pub fn method_summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Instances where method `a` scores at least method `b` (within a
    /// relative `1e-9`), and the number of instances where both have values.
    pub fn paired_wins(&self, a: &str, b: &str) -> (usize, usize) {
        let (mut wins, mut total) = (0, 0);
        for ra in self.rows_for(a) {
            let rb = self.rows.iter().find(|r| r.method == b && r.instance == ra.instance);
            if let (Some(va), Some(vb)) = (ra.value, rb.and_then(|r| r.value)) {
                total += 1;
                if va >= vb - 1e-9 * vb.abs().max(1.0) {
                    wins += 1;
                }
            }
        }
        (wins, total)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        if self.experiment == "asen-sweep" {
            w.write_record([
                "network_type",
                "n",
                "p_edge",
                "K",
                "|S|",
                "method",
                "value",
                "ratio_to_optimal",
                "seed",
            ])?;
            for r in &self.rows {
                let p = r.asen.as_ref().ok_or_else(|| Error::input("ASEN row without sweep point"))?;
                w.write_record([
                    p.network_type.clone(),
                    p.n.to_string(),
                    f(p.p_edge),
                    p.budget.to_string(),
                    p.faulty.to_string(),
                    r.method.clone(),
                    f(r.value),
                    f(r.ratio),
                    p.seed.to_string(),
                ])?;
            }
        } else {
            w.write_record([
                "instance", "method", "selected", "value", "oracle", "ratio", "reference", "check",
                "status",
            ])?;
            for r in &self.rows {
                let selected: Vec<String> = r.selected.iter().map(|s| s.to_string()).collect();
                let check = match r.check {
                    Some(true) => "pass",
                    Some(false) => "fail",
                    None => "",
                };
                w.write_record([
                    r.instance.clone(),
                    r.method.clone(),
                    selected.join(" "),
                    f(r.value),
                    f(r.oracle),
                    f(r.ratio),
                    f(r.reference),
                    check.to_string(),
                    r.status.clone(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-method row counts and ratio statistics, in order of first
/// appearance. Fails on an empty report.
pub fn summarize(report: &RunReport) -> Result<Vec<MethodSummary>> {
    summarize_rows(&report.rows)
}

fn summarize_rows(rows: &[ReportRow]) -> Result<Vec<MethodSummary>> {
    if rows.is_empty() {
        return Err(Error::input("cannot summarize an empty report"));
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    Ok(methods
        .into_iter()
        .map(|m| {
            let mine: Vec<&ReportRow> = rows.iter().filter(|r| r.method == m).collect();
            let ratios: Vec<f64> = mine.iter().filter_map(|r| r.ratio).collect();
            let mean = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
            MethodSummary {
                method: m.to_string(),
                rows: mine.len(),
                failed: mine.iter().filter(|r| r.status != "ok").count(),
                ratios: ratios.len(),
                mean_ratio: mean,
                min_ratio: ratios.iter().copied().reduce(f64::min),
                max_ratio: ratios.iter().copied().reduce(f64::max),
                checks_passed: mine.iter().filter(|r| r.check == Some(true)).count(),
                checks_failed: mine.iter().filter(|r| r.check == Some(false)).count(),
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// running

/// Runs a configuration and writes its CSV to `config.output` when set.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let rows = match &config.experiment {
        Experiment::LemmaCheck(p) => run_lemma(config, p)?,
        Experiment::PropGap(p) => run_prop_gap(config, p)?,
        Experiment::ReductionAudit(p) => run_audit(config, p)?,
        Experiment::RandomSs(p) => run_random_ss(config, p)?,
        Experiment::RandomAs(p) => run_random_as(config, p)?,
        Experiment::AsenSweep(p) => run_asen(config, p)?,
    };
    let summary = summarize_rows(&rows)?;
    let report = RunReport {
        experiment: config.experiment.name().to_string(),
        rows,
        summary,
    };
    if let Some(path) = &config.output {
        write_report_csv(&report, path)?;
    }
    Ok(report)
}

pub fn write_report_csv(report: &RunReport, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    report.write_csv(std::io::BufWriter::new(file))
}

/// Runs `f`, turning a capacity error into a failed row instead of
/// aborting the run.
fn timed_row(
    instance: &str,
    method: &str,
    f: impl FnOnce(&mut ReportRow) -> Result<()>,
) -> Result<ReportRow> {
    let mut row = ReportRow::new(instance, method);
    let start = Instant::now();
    let outcome = f(&mut row);
    row.wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => Ok(row),
        Err(e) if e.is_capacity() => {
            row.status = e.to_string();
            row.value = None;
            row.ratio = None;
            Ok(row)
        }
        Err(e) => Err(e),
    }
}

fn close(value: f64, reference: f64, tol: f64) -> bool {
    (value - reference).abs() <= tol
}

fn run_lemma(config: &ExperimentConfig, p: &LemmaParams) -> Result<Vec<ReportRow>> {
    let opts = config.solver_options();
    let sensor = example1_mdp(p.reward, p.delta, p.gamma)?;
    let actuator = example2_mdp(p.reward, p.delta, p.gamma)?;
    let full = p.reward / (1.0 - p.gamma);
    let mut rows = Vec::new();
    for (method, subset, reference) in [("no-sensor", vec![], 0.0), ("with-sensor", vec![0], full)] {
        rows.push(timed_row("example1", method, |row| {
            let v = evaluate_sensor_set_with(&sensor.mdp, &sensor.catalog, &subset, &opts)?;
            row.selected = subset.clone();
            row.value = Some(v);
            row.reference = Some(reference);
            row.check = Some(close(v, reference, 1e-4));
            Ok(())
        })?);
    }
    for (method, subset, reference) in [("no-actuator", vec![], 0.0), ("with-actuator", vec![0], full)] {
        rows.push(timed_row("example2", method, |row| {
            let v = evaluate_actuator_set(&actuator.mdp, &actuator.catalog, &subset)?;
            row.selected = subset.clone();
            row.value = Some(v);
            row.reference = Some(reference);
            row.check = Some(close(v, reference, 1e-9));
            Ok(())
        })?);
    }
    Ok(rows)
}

/// A selection problem reduced to what the methods need.
struct SelectionTask<'a> {
    objective: &'a dyn SubsetObjective,
    /// Affordable candidates with their costs.
    costed: Vec<(usize, f64)>,
    budget: f64,
    /// Unit-cost view: candidates and pick count, when costs are uniform.
    uniform: Option<(Vec<usize>, usize)>,
    random_seed: u64,
}

/// Runs `methods` (sorted) on one task. Brute force runs first so the other
/// rows can carry ratios against it.
fn run_methods(
    instance: &str,
    task: &SelectionTask<'_>,
    methods: &[Method],
) -> Result<(Vec<ReportRow>, Option<SelectionReport>)> {
    let unit = || {
        task.uniform
            .clone()
            .ok_or_else(|| Error::input(format!("{instance}: unit-cost methods need uniform candidate costs")))
    };
    let fill = |row: &mut ReportRow, rep: &SelectionReport| {
        row.selected = rep.selected.clone();
        row.value = Some(rep.value);
    };
    let mut oracle: Option<SelectionReport> = None;
    let mut brute_row = None;
    if methods.contains(&Method::Brute) {
        brute_row = Some(timed_row(instance, Method::Brute.as_str(), |row| {
            let rep = match &task.uniform {
                Some((cands, m)) => brute_force_select(task.objective, cands, *m, DEFAULT_SUBSET_CAP)?,
                None => brute_force_select_costed(task.objective, &task.costed, task.budget, DEFAULT_SUBSET_CAP)?,
            };
            fill(row, &rep);
            oracle = Some(rep);
            Ok(())
        })?);
    }
    let oracle_value = oracle.as_ref().map(|o| o.value);
    let mut rows = Vec::new();
    for &method in methods {
        let mut row = match method {
            Method::Brute => brute_row.take().expect("brute row computed above"),
            Method::Greedy => timed_row(instance, method.as_str(), |row| {
                let (cands, m) = unit()?;
                fill(row, &greedy_select(task.objective, &cands, m)?);
                Ok(())
            })?,
            Method::CostRatio => timed_row(instance, method.as_str(), |row| {
                fill(row, &greedy_select_cost_ratio(task.objective, &task.costed, task.budget)?);
                Ok(())
            })?,
            Method::Random => timed_row(instance, method.as_str(), |row| {
                let (cands, m) = unit()?;
                let pick = random_select_baseline(&cands, m, task.random_seed)?;
                row.value = Some(task.objective.evaluate(&pick)?);
                row.selected = pick;
                Ok(())
            })?,
        };
        if row.status == "ok" {
            row.set_oracle(oracle_value);
        }
        rows.push(row);
    }
    Ok((rows, oracle))
}

fn sensor_task<'a>(problem: &SensorProblem, objective: &'a dyn SubsetObjective, seed: u64) -> SelectionTask<'a> {
    SelectionTask {
        objective,
        costed: problem.catalog.affordable(),
        budget: problem.catalog.budget,
        uniform: problem.catalog.uniform_candidates().ok(),
        random_seed: seed,
    }
}

fn actuator_task<'a>(problem: &ActuatorProblem, objective: &'a dyn SubsetObjective, seed: u64) -> SelectionTask<'a> {
    SelectionTask {
        objective,
        costed: problem.catalog.affordable(),
        budget: problem.catalog.budget,
        uniform: problem.catalog.uniform_candidates().ok(),
        random_seed: seed,
    }
}

fn run_prop_gap(config: &ExperimentConfig, p: &PropGapParams) -> Result<Vec<ReportRow>> {
    let methods = config.methods_or(&[Method::Greedy, Method::Brute]);
    let opts = config.solver_options();
    let mut rows = Vec::new();
    for &kind in &p.problems {
        for (i, &h) in p.h.iter().enumerate() {
            let gap = p.gap(h);
            let predicted = predicted_gap_ratio(&gap, kind);
            let seed = derive_seed(config.seed, i as u64);
            let (name, tol, mut out) = match kind {
                ProblemKind::Sensor => {
                    let problem = example3_instance(&gap)?;
                    let obj = CachedObjective::new(SensorObjective {
                        problem: &problem,
                        options: opts,
                    });
                    let name = format!("example3-h{h}");
                    let (rows, _) = run_methods(&name, &sensor_task(&problem, &obj, seed), &methods)?;
                    (name, 1e-4, rows)
                }
                ProblemKind::Actuator => {
                    let problem = example4_instance(&gap)?;
                    let obj = CachedObjective::new(ActuatorObjective { problem: &problem });
                    let name = format!("example4-h{h}");
                    let (rows, _) = run_methods(&name, &actuator_task(&problem, &obj, seed), &methods)?;
                    (name, 1e-6, rows)
                }
            };
            debug_assert!(out.iter().all(|r| r.instance == name));
            for row in &mut out {
                if row.method == Method::Greedy.as_str() {
                    row.reference = Some(predicted);
                    row.check = row.ratio.map(|r| close(r, predicted, tol));
                }
            }
            rows.extend(out);
        }
    }
    Ok(rows)
}

/// Every set-cover instance with `1 ≤ n ≤ max_n` elements, `1 ≤ m ≤ max_m`
/// nonempty sets (as a multiset, listed in nondecreasing bitmask order) and
/// `1 ≤ k ≤ min(max_k, m)`.
pub fn small_setcover_instances(max_n: usize, max_m: usize, max_k: usize) -> Result<Vec<SetCoverInstance>> {
    if max_n > 8 {
        return Err(Error::capacity("set-cover enumeration universe size", 8));
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        let masks: Vec<usize> = (1..1usize << n).collect();
        for m in 1..=max_m {
            let mut collections = Vec::new();
            multisets(&masks, m, 0, &mut Vec::new(), &mut collections);
            for chosen in collections {
                let sets: Vec<Vec<usize>> = chosen
                    .iter()
                    .map(|&mask| (0..n).filter(|e| mask >> e & 1 == 1).collect())
                    .collect();
                for k in 1..=max_k.min(m) {
                    out.push(SetCoverInstance::new(n, sets.clone(), k)?);
                }
            }
        }
    }
    Ok(out)
}

fn multisets(items: &[usize], len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        cur.push(items[i]);
        multisets(items, len, i, cur, out);
        cur.pop();
    }
}

fn setcover_label(sc: &SetCoverInstance) -> String {
    let sets: Vec<String> = sc
        .sets
        .iter()
        .map(|s| s.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(""))
        .collect();
    format!("n{}-k{}-{{{}}}", sc.n, sc.k, sets.join(","))
}

fn run_audit(config: &ExperimentConfig, p: &AuditParams) -> Result<Vec<ReportRow>> {
    let methods = config.methods_or(&[Method::Brute]);
    if !methods.contains(&Method::Brute) {
        return Err(Error::input("the reduction audit needs the brute method"));
    }
    let opts = config.solver_options();
    let instances = small_setcover_instances(p.max_n, p.max_m, p.max_k)?;
    let tasks: Vec<(ProblemKind, &SetCoverInstance)> = p
        .problems
        .iter()
        .flat_map(|&kind| instances.iter().map(move |sc| (kind, sc)))
        .collect();
    let per_task: Vec<Result<Vec<ReportRow>>> = tasks
        .par_iter()
        .enumerate()
        .map(|(i, &(kind, sc))| {
            let has_cover = setcover_brute_force(sc)?.is_some();
            let seed = derive_seed(config.seed, i as u64);
            let (name, threshold, bound, mut rows) = match kind {
                ProblemKind::Sensor => {
                    let red = setcover_to_fmdp_ss(sc, p.c_exp, p.reward, p.gamma)?;
                    let obj = CachedObjective::new(SensorObjective {
                        problem: &red.problem,
                        options: opts,
                    });
                    let name = format!("ss-{}", setcover_label(sc));
                    let (rows, _) = run_methods(&name, &sensor_task(&red.problem, &obj, seed), &methods)?;
                    (name, red.threshold, red.no_cover_bound, rows)
                }
                ProblemKind::Actuator => {
                    let red = setcover_to_fmdp_as(sc, p.c_exp, p.reward, p.gamma)?;
                    let obj = CachedObjective::new(ActuatorObjective { problem: &red.problem });
                    let name = format!("as-{}", setcover_label(sc));
                    let (rows, _) = run_methods(&name, &actuator_task(&red.problem, &obj, seed), &methods)?;
                    (name, red.threshold, red.no_cover_bound, rows)
                }
            };
            debug_assert!(rows.iter().all(|r| r.instance == name));
            for row in &mut rows {
                if row.method == Method::Brute.as_str() {
                    row.reference = Some(threshold);
                    row.check = row.value.map(|v| {
                        let reaches = v >= threshold - 1e-4;
                        reaches == has_cover && (has_cover || v <= bound + 1e-4)
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_task {
        rows.extend(r?);
    }
    Ok(rows)
}

fn seed_label(seed: u64) -> String {
    format!("seed-{seed}")
}

fn run_random_ss(config: &ExperimentConfig, p: &RandomSsParams) -> Result<Vec<ReportRow>> {
    let methods = config.methods_or(&[Method::Greedy, Method::Brute]);
    let opts = config.solver_options();
    let problems: Vec<(String, u64, SensorProblem)> = match &config.instance {
        Some(path) => match load_instance(path)? {
            Instance::Sensor(prob) => vec![(path.display().to_string(), config.seed, prob)],
            _ => return Err(Error::input(format!("{} is not a sensor instance", path.display()))),
        },
        None => config
            .seed_list()
            .into_iter()
            .map(|s| Ok((seed_label(s), s, random_fmdp_ss_instance(s, p)?)))
            .collect::<Result<_>>()?,
    };
    collect_rows(problems.par_iter().map(|(name, seed, prob)| {
        let obj = CachedObjective::new(SensorObjective {
            problem: prob,
            options: opts,
        });
        run_methods(name, &sensor_task(prob, &obj, derive_seed(*seed, 4)), &methods).map(|r| r.0)
    }))
}

fn run_random_as(config: &ExperimentConfig, p: &RandomAsParams) -> Result<Vec<ReportRow>> {
    let methods = config.methods_or(&[Method::Greedy, Method::Brute]);
    let problems: Vec<(String, u64, ActuatorProblem)> = match &config.instance {
        Some(path) => match load_instance(path)? {
            Instance::Actuator(prob) => vec![(path.display().to_string(), config.seed, prob)],
            _ => return Err(Error::input(format!("{} is not an actuator instance", path.display()))),
        },
        None => config
            .seed_list()
            .into_iter()
            .map(|s| Ok((seed_label(s), s, random_fmdp_as_instance(s, p)?)))
            .collect::<Result<_>>()?,
    };
    collect_rows(problems.par_iter().map(|(name, seed, prob)| {
        let obj = CachedObjective::new(ActuatorObjective { problem: prob });
        run_methods(name, &actuator_task(prob, &obj, derive_seed(*seed, 4)), &methods).map(|r| r.0)
    }))
}

fn collect_rows(it: impl IndexedParallelIterator<Item = Result<Vec<ReportRow>>>) -> Result<Vec<ReportRow>> {
    let parts: Vec<Result<Vec<ReportRow>>> = it.collect();
    let mut rows = Vec::new();
    for part in parts {
        rows.extend(part?);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
struct SweepPoint {
    network: &'static str,
    p_edge: Option<f64>,
    n: usize,
    budget: usize,
    faulty: usize,
    model: NetworkModel,
}

/// Distinct sweep points in a stable order; points shared by several
/// sweeps run once.
fn sweep_points(sweeps: &[AsenSweep]) -> Vec<SweepPoint> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in sweeps {
        for &n in &s.nodes {
            for &budget in &s.budgets {
                for &faulty in &s.faulty {
                    let key = (
                        s.network.label(),
                        s.network.p_edge().map(f64::to_bits),
                        n,
                        budget,
                        faulty,
                    );
                    if seen.insert(key) {
                        out.push(SweepPoint {
                            network: s.network.label(),
                            p_edge: s.network.p_edge(),
                            n,
                            budget,
                            faulty,
                            model: s.network.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Builds the ASEN problem for one sweep point and seed: network from
/// `derive_seed(seed, 1)`, faulty set by greedy influence maximization
/// from `derive_seed(seed, 2)`, rollouts from `derive_seed(seed, 3)`.
pub fn asen_instance(
    model: &NetworkModel,
    n: usize,
    faulty: usize,
    budget: usize,
    params: &AsenSweepParams,
    seed: u64,
) -> Result<AsenProblem> {
    let network = model.generate(n, params.influence, derive_seed(seed, 1))?;
    let faulty = influence_max_greedy(&network, faulty, params.im_rollouts, derive_seed(seed, 2))?;
    let problem = AsenProblem {
        network,
        faulty,
        budget,
        discount: params.gamma,
        rollouts: params.rollouts,
        seed: derive_seed(seed, 3),
        truncation_eps: params.truncation_eps,
    };
    problem.validate()?;
    Ok(problem)
}

/// Greedy over all nodes, brute force over a reduced pool containing
/// greedy's picks, and the random baseline, on one ASEN problem. Returns
/// rows in method order with ratios against the brute-force value.
pub fn asen_methods(
    instance: &str,
    problem: &AsenProblem,
    pool_size: usize,
    methods: &[Method],
    random_seed: u64,
) -> Result<Vec<ReportRow>> {
    let obj = CachedObjective::new(asen_objective(problem)?);
    let nodes: Vec<usize> = (0..problem.network.nodes).collect();
    let k = problem.budget;
    let greedy = greedy_select(&obj, &nodes, k)?;
    let pool: Vec<usize> = if nodes.len() <= pool_size.max(k) {
        nodes.clone()
    } else {
        // greedy's first round scored every single placement
        let mut singles: Vec<(usize, f64)> = greedy
            .trace
            .iter()
            .filter(|t| t.iteration == 0)
            .map(|t| (t.candidate, t.value))
            .collect();
        singles.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut pool = greedy.selected.clone();
        for (v, _) in singles {
            if pool.len() >= pool_size.max(k) {
                break;
            }
            if !pool.contains(&v) {
                pool.push(v);
            }
        }
        pool.sort_unstable();
        pool
    };
    let mut oracle = None;
    let mut rows = Vec::new();
    for &method in methods {
        let row = timed_row(instance, method.as_str(), |row| {
            let (selected, value) = match method {
                Method::Greedy | Method::CostRatio => (greedy.selected.clone(), greedy.value),
                Method::Brute => {
                    let rep = brute_force_select(&obj, &pool, k, DEFAULT_SUBSET_CAP)?;
                    oracle = Some(rep.value);
                    (rep.selected, rep.value)
                }
                Method::Random => {
                    let pick = random_select_baseline(&nodes, k, random_seed)?;
                    let v = obj.evaluate(&pick)?;
                    (pick, v)
                }
            };
            row.selected = selected;
            row.value = Some(value);
            Ok(())
        })?;
        rows.push(row);
    }
    for row in &mut rows {
        if row.status == "ok" {
            row.set_oracle(oracle);
        }
    }
    Ok(rows)
}

/// Objective value of one subset on a sensor, actuator or ASEN instance
/// (or a reduction wrapping one).
pub fn evaluate_instance(inst: &Instance, subset: &[usize], opts: &SolverOptions) -> Result<f64> {
    match inst {
        Instance::Sensor(p) => evaluate_sensor_set_with(&p.mdp, &p.catalog, subset, opts),
        Instance::SensorReduction(r) => {
            evaluate_sensor_set_with(&r.problem.mdp, &r.problem.catalog, subset, opts)
        }
        Instance::Actuator(p) => evaluate_actuator_set(&p.mdp, &p.catalog, subset),
        Instance::ActuatorReduction(r) => {
            evaluate_actuator_set(&r.problem.mdp, &r.problem.catalog, subset)
        }
        Instance::Asen(p) => asen_objective(p)?.evaluate(subset),
        Instance::SetCover(_) => Err(Error::input("a set-cover instance has no objective; reduce it first")),
    }
}

/// Runs one selection method on an instance. `seed` drives the random
/// baseline only.
pub fn select_instance(inst: &Instance, method: Method, opts: &SolverOptions, seed: u64) -> Result<SelectionReport> {
    let run = |obj: &dyn SubsetObjective, costed: Vec<(usize, f64)>, budget: f64, uniform: Result<(Vec<usize>, usize)>| {
        match method {
            Method::Greedy => {
                let (c, m) = uniform?;
                greedy_select(obj, &c, m)
            }
            Method::CostRatio => greedy_select_cost_ratio(obj, &costed, budget),
            Method::Brute => match uniform {
                Ok((c, m)) => brute_force_select(obj, &c, m, DEFAULT_SUBSET_CAP),
                Err(_) => brute_force_select_costed(obj, &costed, budget, DEFAULT_SUBSET_CAP),
            },
            Method::Random => {
                let (c, m) = uniform?;
                let selected = random_select_baseline(&c, m, seed)?;
                let value = obj.evaluate(&selected)?;
                Ok(SelectionReport {
                    selected,
                    value,
                    oracle_value: None,
                    ratio: None,
                    trace: Vec::new(),
                    evaluations: 1,
                })
            }
        }
    };
    let sensor = |p: &SensorProblem| {
        let obj = SensorObjective { problem: p, options: *opts };
        run(&obj, p.catalog.affordable(), p.catalog.budget, p.catalog.uniform_candidates())
    };
    let actuator = |p: &ActuatorProblem| {
        let obj = ActuatorObjective { problem: p };
        run(&obj, p.catalog.affordable(), p.catalog.budget, p.catalog.uniform_candidates())
    };
    match inst {
        Instance::Sensor(p) => sensor(p),
        Instance::SensorReduction(r) => sensor(&r.problem),
        Instance::Actuator(p) => actuator(p),
        Instance::ActuatorReduction(r) => actuator(&r.problem),
        Instance::Asen(p) => {
            let obj = CachedObjective::new(asen_objective(p)?);
            let nodes: Vec<usize> = (0..p.network.nodes).collect();
            let costed = nodes.iter().map(|&v| (v, 1.0)).collect();
            run(&obj, costed, p.budget as f64, Ok((nodes, p.budget)))
        }
        Instance::SetCover(_) => Err(Error::input("a set-cover instance has no objective; reduce it first")),
    }
}

fn run_asen(config: &ExperimentConfig, p: &AsenSweepParams) -> Result<Vec<ReportRow>> {
    // brute force runs first so its value is known when ratios are set
    let methods = config.methods_or(&[Method::Greedy, Method::Brute, Method::Random]);
    let points = sweep_points(&p.sweeps);
    let seeds = config.seed_list();
    let jobs: Vec<(&SweepPoint, u64)> = points
        .iter()
        .flat_map(|pt| seeds.iter().map(move |&s| (pt, s)))
        .collect();
    collect_rows(jobs.par_iter().map(|&(pt, seed)| {
        let problem = asen_instance(&pt.model, pt.n, pt.faulty, pt.budget, p, seed)?;
        let name = format!(
            "{}-n{}-p{}-K{}-S{}-seed{}",
            pt.network,
            pt.n,
            pt.p_edge.map(|x| x.to_string()).unwrap_or_default(),
            pt.budget,
            pt.faulty,
            seed
        );
        let mut rows = asen_methods(&name, &problem, p.pool_size, &methods, derive_seed(seed, 4))?;
        for row in &mut rows {
            row.asen = Some(AsenPoint {
                network_type: pt.network.to_string(),
                n: pt.n,
                p_edge: pt.p_edge,
                budget: pt.budget,
                faulty: pt.faulty,
                seed,
            });
        }
        Ok(rows)
    }))
}
