//! Budgeted subset selection.
//!
//! Candidates are scored through the [`SubsetObjective`] trait, so the same
//! greedy loop, cost-ratio variant and brute-force oracle serve sensor sets
//! (scored by an exact POMDP solve), actuator sets (scored by policy
//! iteration) and islanding placements (scored by cascade simulation).
//!
//! Every argmax is reduced in fixed candidate order with a small relative tie
//! slack, so results are identical from run to run and ties go to the lowest
//! candidate index (greedy) or the lexicographically smallest subset (brute
//! force).

use std::collections::HashMap;
use std::io::Write;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{FactoredMDP, Indexer, DEFAULT_FLATTEN_CAP};
use crate::mdp::policy_iteration;
use crate::pomdp::{solve_with, PomdpInstance, SolverOptions};

/// Default cap on the number of subsets a brute-force search may visit.
pub const DEFAULT_SUBSET_CAP: usize = 100_000;

const TIE_TOL: f64 = 1e-12;

fn beats(x: f64, incumbent: f64) -> bool {
    x > incumbent + TIE_TOL * incumbent.abs().max(1.0)
}

/// Value of a candidate subset. Subsets are passed as sorted candidate ids.
pub trait SubsetObjective: Sync {
    fn evaluate(&self, subset: &[usize]) -> Result<f64>;
}

impl<F> SubsetObjective for F
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    fn evaluate(&self, subset: &[usize]) -> Result<f64> {
        self(subset)
    }
}

/// Memoizes another objective; greedy and brute force on the same instance
/// share most of their evaluations.
pub struct CachedObjective<O> {
    inner: O,
    cache: Mutex<HashMap<Vec<usize>, f64>>,
}

impl<O: SubsetObjective> CachedObjective<O> {
    pub fn new(inner: O) -> Self {
        CachedObjective {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn distinct_evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl<O: SubsetObjective> SubsetObjective for CachedObjective<O> {
    fn evaluate(&self, subset: &[usize]) -> Result<f64> {
        let mut key = subset.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let v = self.inner.evaluate(&key)?;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

/// One candidate evaluation inside a greedy iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub candidate: usize,
    /// Objective of the current selection plus this candidate.
    pub value: f64,
    pub gain: f64,
    pub chosen: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected: Vec<usize>,
    pub value: f64,
    #[serde(default)]
    pub oracle_value: Option<f64>,
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub trace: Vec<TraceRow>,
    /// Number of subsets scored (greedy candidates or brute-force subsets).
    pub evaluations: usize,
}

impl SelectionReport {
    fn new(selected: Vec<usize>, value: f64, trace: Vec<TraceRow>, evaluations: usize) -> Self {
        SelectionReport {
            selected,
            value,
            oracle_value: None,
            ratio: None,
            trace,
            evaluations,
        }
    }

    /// Records `oracle`'s value and the resulting ratio on this report.
    pub fn attach_oracle(&mut self, oracle: &SelectionReport) -> Result<f64> {
        let r = greedy_ratio(self, oracle)?;
        self.oracle_value = Some(oracle.value);
        self.ratio = Some(r);
        Ok(r)
    }

    /// Writes the greedy trace as CSV with columns `iteration,candidate,gain,chosen`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "candidate", "gain", "chosen"])?;
        for row in &self.trace {
            w.write_record([
                row.iteration.to_string(),
                row.candidate.to_string(),
                format!("{:?}", row.gain),
                row.chosen.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Budgeted greedy with unit costs: exactly `budget` rounds, each adding the
/// candidate with the largest objective (equivalently, largest marginal gain).
pub fn greedy_select<O: SubsetObjective + ?Sized>(
    objective: &O,
    candidates: &[usize],
    budget: usize,
) -> Result<SelectionReport> {
    check_candidates(candidates)?;
    if budget > candidates.len() {
        return Err(Error::input(format!(
            "budget {budget} exceeds the {} candidates",
            candidates.len()
        )));
    }
    let costs: Vec<(usize, f64)> = candidates.iter().map(|&c| (c, 1.0)).collect();
    greedy_core(objective, &costs, budget as f64, false)
}

/// Greedy by marginal gain per unit cost. Stops when no remaining candidate
/// fits in the remaining budget.
pub fn greedy_select_cost_ratio<O: SubsetObjective + ?Sized>(
    objective: &O,
    candidates: &[(usize, f64)],
    budget: f64,
) -> Result<SelectionReport> {
    let ids: Vec<usize> = candidates.iter().map(|c| c.0).collect();
    check_candidates(&ids)?;
    if let Some(c) = candidates.iter().find(|c| !(c.1 > 0.0) || !c.1.is_finite()) {
        return Err(Error::input(format!("candidate {} has non-positive cost {}", c.0, c.1)));
    }
    check_budget(budget)?;
    greedy_core(objective, candidates, budget, true)
}

fn greedy_core<O: SubsetObjective + ?Sized>(
    objective: &O,
    candidates: &[(usize, f64)],
    budget: f64,
    by_ratio: bool,
) -> Result<SelectionReport> {
    let mut selected: Vec<usize> = Vec::new();
    let mut remaining: Vec<(usize, f64)> = candidates.to_vec();
    let mut left = budget;
    let mut current = objective.evaluate(&[])?;
    let mut evaluations = 1;
    let mut trace = Vec::new();
    let mut iteration = 0;
    // tolerance for budget arithmetic on accumulated float costs
    let slack = 1e-9 * budget.abs().max(1.0);
    loop {
        let feasible: Vec<(usize, f64)> = remaining
            .iter()
            .copied()
            .filter(|c| c.1 <= left + slack)
            .collect();
        if feasible.is_empty() {
            break;
        }
        iteration += 1;
        let values: Vec<Result<f64>> = feasible
            .par_iter()
            .map(|&(id, _)| {
                let mut s = selected.clone();
                s.push(id);
                s.sort_unstable();
                objective.evaluate(&s)
            })
            .collect();
        evaluations += values.len();
        let mut best: Option<(usize, f64, f64)> = None; // (position, value, score)
        let mut rows = Vec::with_capacity(feasible.len());
        for (pos, (v, &(id, cost))) in values.into_iter().zip(&feasible).enumerate() {
            let v = v?;
            let gain = v - current;
            let score = if by_ratio { gain / cost } else { v };
            if best.map_or(true, |(_, _, b)| beats(score, b)) {
                best = Some((pos, v, score));
            }
            rows.push(TraceRow {
                iteration,
                candidate: id,
                value: v,
                gain,
                chosen: false,
            });
        }
        let (pos, value, _) = best.expect("non-empty feasible set");
        rows[pos].chosen = true;
        trace.extend(rows);
        let (id, cost) = feasible[pos];
        selected.push(id);
        selected.sort_unstable();
        remaining.retain(|c| c.0 != id);
        left -= cost;
        current = value;
        if !by_ratio && selected.len() as f64 >= budget - slack {
            break;
        }
    }
    Ok(SelectionReport::new(selected, current, trace, evaluations))
}

/// Exact optimum over all subsets of exactly `budget` candidates (unit
/// costs), lexicographically smallest subset among ties.
pub fn brute_force_select<O: SubsetObjective + ?Sized>(
    objective: &O,
    candidates: &[usize],
    budget: usize,
    cap: usize,
) -> Result<SelectionReport> {
    check_candidates(candidates)?;
    if budget > candidates.len() {
        return Err(Error::input(format!(
            "budget {budget} exceeds the {} candidates",
            candidates.len()
        )));
    }
    let total = binomial(candidates.len(), budget);
    if total > cap as u128 {
        return Err(Error::capacity(format!("brute force over {total} subsets"), cap));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let subsets: Vec<Vec<usize>> = combinations(sorted.len(), budget)
        .into_iter()
        .map(|c| c.into_iter().map(|i| sorted[i]).collect())
        .collect();
    best_subset(objective, subsets)
}

/// Exact optimum over all subsets whose total cost fits the budget.
pub fn brute_force_select_costed<O: SubsetObjective + ?Sized>(
    objective: &O,
    candidates: &[(usize, f64)],
    budget: f64,
    cap: usize,
) -> Result<SelectionReport> {
    let ids: Vec<usize> = candidates.iter().map(|c| c.0).collect();
    check_candidates(&ids)?;
    check_budget(budget)?;
    if candidates.iter().any(|c| !(c.1 >= 0.0)) {
        return Err(Error::input("candidate costs must be nonnegative"));
    }
    if candidates.len() >= 63 || (1u64 << candidates.len()) > cap as u64 {
        return Err(Error::capacity(
            format!("brute force over 2^{} subsets", candidates.len()),
            cap,
        ));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by_key(|c| c.0);
    let slack = 1e-9 * budget.abs().max(1.0);
    let mut subsets = Vec::new();
    for size in 0..=sorted.len() {
        for combo in combinations(sorted.len(), size) {
            let cost: f64 = combo.iter().map(|&i| sorted[i].1).sum();
            if cost <= budget + slack {
                subsets.push(combo.into_iter().map(|i| sorted[i].0).collect());
            }
        }
    }
    subsets.sort();
    best_subset(objective, subsets)
}

fn best_subset<O: SubsetObjective + ?Sized>(
    objective: &O,
    subsets: Vec<Vec<usize>>,
) -> Result<SelectionReport> {
    let values: Vec<Result<f64>> = subsets.par_iter().map(|s| objective.evaluate(s)).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        // subsets arrive in lexicographic order, so a strict improvement keeps
        // the smallest subset among ties
        if best.map_or(true, |(_, b)| beats(v, b)) {
            best = Some((i, v));
        }
    }
    let evaluations = subsets.len();
    let (i, v) = best.ok_or_else(|| Error::input("no feasible subset"))?;
    Ok(SelectionReport::new(subsets[i].clone(), v, Vec::new(), evaluations))
}

/// `V_greedy / V_optimal`.
pub fn greedy_ratio(greedy: &SelectionReport, oracle: &SelectionReport) -> Result<f64> {
    if !(oracle.value > 0.0) {
        return Err(Error::UndefinedRatio(oracle.value));
    }
    Ok(greedy.value / oracle.value)
}

fn check_candidates(ids: &[usize]) -> Result<()> {
    let mut seen = ids.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != ids.len() {
        return Err(Error::input("candidate list contains duplicates"));
    }
    Ok(())
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::input(format!("budget {budget} must be a finite nonnegative number")));
    }
    Ok(())
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `k`-subsets of `0..n` as sorted index lists, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Sensor and actuator catalogs

/// How a sensor reads the arrival state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorModel {
    /// Noiseless reading of one state variable.
    Variable { var: usize },
    /// `P(output | values of vars)`, rows in lexicographic order of `vars`.
    Likelihood {
        vars: Vec<usize>,
        outputs: usize,
        table: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub name: String,
    pub model: SensorModel,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorCatalog {
    pub sensors: Vec<Sensor>,
    pub budget: f64,
}

/// Action values an actuator unlocks on one action factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionGrant {
    pub factor: usize,
    pub values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Actuator {
    pub name: String,
    pub grants: Vec<ActionGrant>,
    /// State variables whose transitions the granted actions affect.
    #[serde(default)]
    pub influences: Vec<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActuatorCatalog {
    pub actuators: Vec<Actuator>,
    /// Values available on each action factor without any actuator (the
    /// default action).
    pub default_actions: Vec<Vec<usize>>,
    pub budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorProblem {
    pub mdp: FactoredMDP,
    pub catalog: SensorCatalog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActuatorProblem {
    pub mdp: FactoredMDP,
    pub catalog: ActuatorCatalog,
}

fn costed_candidates(costs: impl Iterator<Item = f64>, budget: f64) -> Vec<(usize, f64)> {
    costs.enumerate().filter(|&(_, c)| c <= budget).collect()
}

/// Affordable candidates and the number of picks a unit-cost greedy may
/// make. Candidates costing more than the budget are dropped first; the rest
/// must share one positive cost.
fn uniform_candidates(costed: &[(usize, f64)], budget: f64) -> Result<(Vec<usize>, usize)> {
    let Some(&(_, c)) = costed.first() else {
        return Ok((Vec::new(), 0));
    };
    if !(c > 0.0) || costed.iter().any(|x| (x.1 - c).abs() > 1e-12 * c) {
        return Err(Error::input(
            "unit-cost selection needs one common positive cost among affordable candidates",
        ));
    }
    let picks = ((budget / c) + 1e-9).floor() as usize;
    Ok((costed.iter().map(|x| x.0).collect(), picks.min(costed.len())))
}

impl SensorCatalog {
    pub fn validate(&self, m: &FactoredMDP) -> Result<()> {
        check_budget_positive(self.budget)?;
        for (i, s) in self.sensors.iter().enumerate() {
            if !(s.cost >= 0.0) {
                return Err(Error::input(format!("sensor {i} has negative cost")));
            }
            match &s.model {
                SensorModel::Variable { var } => {
                    if *var >= m.variables.len() {
                        return Err(Error::input(format!("sensor {i} reads missing variable {var}")));
                    }
                }
                SensorModel::Likelihood { vars, outputs, table } => {
                    if vars.iter().any(|&v| v >= m.variables.len()) || *outputs == 0 {
                        return Err(Error::input(format!("sensor {i} has an invalid scope")));
                    }
                    let rows: usize = vars.iter().map(|&v| m.variables[v].size()).product();
                    if table.len() != rows * outputs {
                        return Err(Error::input(format!("sensor {i} likelihood has the wrong size")));
                    }
                    for row in table.chunks(*outputs) {
                        crate::fmdp::check_distribution(row, &format!("sensor {i} likelihood row"))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Sensors whose individual cost fits the budget, with their costs.
    pub fn affordable(&self) -> Vec<(usize, f64)> {
        costed_candidates(self.sensors.iter().map(|s| s.cost), self.budget)
    }

    /// Affordable sensors and the pick count for unit-cost greedy/brute force.
    pub fn uniform_candidates(&self) -> Result<(Vec<usize>, usize)> {
        uniform_candidates(&self.affordable(), self.budget)
    }
}

impl ActuatorCatalog {
    pub fn validate(&self, m: &FactoredMDP) -> Result<()> {
        check_budget_positive(self.budget)?;
        if self.default_actions.len() != m.action_factors.len() {
            return Err(Error::input("default actions must list every action factor"));
        }
        for (f, vals) in self.default_actions.iter().enumerate() {
            if vals.is_empty() || vals.iter().any(|&v| v >= m.action_factors[f].size()) {
                return Err(Error::input(format!("invalid default actions for factor {f}")));
            }
        }
        for (i, a) in self.actuators.iter().enumerate() {
            if !(a.cost >= 0.0) {
                return Err(Error::input(format!("actuator {i} has negative cost")));
            }
            for g in &a.grants {
                if g.factor >= m.action_factors.len()
                    || g.values.iter().any(|&v| v >= m.action_factors[g.factor].size())
                {
                    return Err(Error::input(format!("actuator {i} grants an invalid action")));
                }
            }
        }
        Ok(())
    }

    pub fn affordable(&self) -> Vec<(usize, f64)> {
        costed_candidates(self.actuators.iter().map(|a| a.cost), self.budget)
    }

    pub fn uniform_candidates(&self) -> Result<(Vec<usize>, usize)> {
        uniform_candidates(&self.affordable(), self.budget)
    }

    /// Allowed values per action factor once `subset` is installed.
    pub fn allowed_actions(&self, subset: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut allowed = self.default_actions.clone();
        for &i in subset {
            let a = self
                .actuators
                .get(i)
                .ok_or_else(|| Error::input(format!("actuator {i} not in catalog")))?;
            for g in &a.grants {
                allowed[g.factor].extend_from_slice(&g.values);
            }
        }
        for vals in &mut allowed {
            vals.sort_unstable();
            vals.dedup();
        }
        Ok(allowed)
    }
}

fn check_budget_positive(budget: f64) -> Result<()> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::input(format!("budget {budget} must be positive")));
    }
    Ok(())
}

/// Builds the POMDP induced by installing `subset` of the catalog's sensors.
///
/// Variables that neither feed a reward nor are observed (nor are parents of
/// such variables) are eliminated first; this leaves the optimal value
/// unchanged and keeps the joint space small. The joint observation is the
/// tuple of sensor outputs, the sensors also read the starting state, and an
/// empty subset yields a single constant observation.
pub fn sensor_pomdp(m: &FactoredMDP, cat: &SensorCatalog, subset: &[usize]) -> Result<PomdpInstance> {
    m.validate()?;
    cat.validate(m)?;
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let mut observed = Vec::new();
    for &i in &subset {
        let s = cat
            .sensors
            .get(i)
            .ok_or_else(|| Error::input(format!("sensor {i} not in catalog")))?;
        match &s.model {
            SensorModel::Variable { var } => observed.push(*var),
            SensorModel::Likelihood { vars, .. } => observed.extend_from_slice(vars),
        }
    }
    let keep = m.relevant_variables(&observed);
    let restriction = m.restrict(&keep)?;
    let model = &restriction.model;
    let mdp = model.flatten(DEFAULT_FLATTEN_CAP)?;
    let b0 = model.initial_joint_belief(DEFAULT_FLATTEN_CAP)?;
    let sidx = model.state_indexer()?;
    let n = sidx.total();

    // per-sensor output distribution for every restricted joint state
    let mut per_sensor: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
    for &i in &subset {
        let model_i = &cat.sensors[i].model;
        let (outputs, rows) = match model_i {
            SensorModel::Variable { var } => {
                let v = restriction.var_map[*var].expect("observed variables are kept");
                let size = model.variables[v].size();
                let rows = (0..n)
                    .map(|s| {
                        let mut row = vec![0.0; size];
                        row[sidx.decode(s)[v]] = 1.0;
                        row
                    })
                    .collect();
                (size, rows)
            }
            SensorModel::Likelihood { vars, outputs, table } => {
                let mapped: Vec<usize> = vars
                    .iter()
                    .map(|&v| restriction.var_map[v].expect("observed variables are kept"))
                    .collect();
                let sizes: Vec<usize> = mapped.iter().map(|&v| model.variables[v].size()).collect();
                let local = Indexer::new(&sizes)?;
                let rows = (0..n)
                    .map(|s| {
                        let full = sidx.decode(s);
                        let vals: Vec<usize> = mapped.iter().map(|&v| full[v]).collect();
                        let r = local.index(&vals);
                        table[r * outputs..(r + 1) * outputs].to_vec()
                    })
                    .collect();
                (*outputs, rows)
            }
        };
        per_sensor.push((outputs, rows));
    }
    let out_sizes: Vec<usize> = per_sensor.iter().map(|p| p.0).collect();
    let oidx = Indexer::new(&out_sizes)?;
    let no = oidx.total();
    if no > 4096 {
        return Err(Error::capacity(format!("{no} joint observations"), 4096));
    }
    // z[s][o] = Π_i P_i(o_i | s)
    let mut z = vec![0.0; n * no];
    for s in 0..n {
        for o in 0..no {
            let outs = oidx.decode(o);
            z[s * no + o] = per_sensor
                .iter()
                .zip(&outs)
                .map(|((_, rows), &k)| rows[s][k])
                .product();
        }
    }
    let na = mdp.n_actions;
    let mut observation = Vec::with_capacity(na * n * no);
    for _ in 0..na {
        observation.extend_from_slice(&z);
    }
    let instance = PomdpInstance {
        mdp,
        n_observations: no,
        observation,
        initial_belief: b0,
        initial_observation: if subset.is_empty() { None } else { Some(z) },
    };
    instance.validate()?;
    Ok(instance)
}

/// Optimal expected return `V*_Γ` at `b_0` with sensor set `subset` installed.
pub fn evaluate_sensor_set(m: &FactoredMDP, cat: &SensorCatalog, subset: &[usize]) -> Result<f64> {
    evaluate_sensor_set_with(m, cat, subset, &SolverOptions::default())
}

pub fn evaluate_sensor_set_with(
    m: &FactoredMDP,
    cat: &SensorCatalog,
    subset: &[usize],
    opts: &SolverOptions,
) -> Result<f64> {
    let pomdp = sensor_pomdp(m, cat, subset)?;
    Ok(solve_with(&pomdp, opts)?.value_at_b0)
}

/// Optimal expected return `V*_Υ` with actuator set `subset` installed, under
/// the model's initial distribution (uniform when none is given).
pub fn evaluate_actuator_set(m: &FactoredMDP, cat: &ActuatorCatalog, subset: &[usize]) -> Result<f64> {
    m.validate()?;
    cat.validate(m)?;
    let allowed = cat.allowed_actions(subset)?;
    let keep = m.relevant_variables(&[]);
    let restriction = m.restrict(&keep)?;
    let mut restricted_allowed = vec![Vec::new(); restriction.model.action_factors.len()];
    for (f, vals) in allowed.into_iter().enumerate() {
        if let Some(g) = restriction.action_map[f] {
            restricted_allowed[g] = vals;
        }
    }
    let (mdp, _) = restriction
        .model
        .flatten_restricted(&restricted_allowed, DEFAULT_FLATTEN_CAP)?;
    let (v, _) = policy_iteration(&mdp)?;
    let b0 = restriction.model.initial_joint_belief(DEFAULT_FLATTEN_CAP)?;
    Ok(v.expected(&b0))
}

/// [`SubsetObjective`] scoring sensor subsets by exact POMDP solves.
pub struct SensorObjective<'a> {
    pub problem: &'a SensorProblem,
    pub options: SolverOptions,
}

impl SubsetObjective for SensorObjective<'_> {
    fn evaluate(&self, subset: &[usize]) -> Result<f64> {
        evaluate_sensor_set_with(&self.problem.mdp, &self.problem.catalog, subset, &self.options)
    }
}

/// [`SubsetObjective`] scoring actuator subsets by policy iteration.
pub struct ActuatorObjective<'a> {
    pub problem: &'a ActuatorProblem,
}

impl SubsetObjective for ActuatorObjective<'_> {
    fn evaluate(&self, subset: &[usize]) -> Result<f64> {
        evaluate_actuator_set(&self.problem.mdp, &self.problem.catalog, subset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modular(gains: &'static [f64]) -> impl Fn(&[usize]) -> Result<f64> + Sync {
        move |s: &[usize]| Ok(s.iter().map(|&i| gains[i]).sum())
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(8, 2).len() as u128, binomial(8, 2));
    }

    #[test]
    fn modular_greedy_picks_top_gains() {
        let f = modular(&[3.0, 2.0, 1.0]);
        let r = greedy_select(&f, &[0, 1, 2], 2).unwrap();
        assert_eq!(r.selected, vec![0, 1]);
        assert_eq!(r.value, 5.0);
        let chosen: Vec<f64> = r.trace.iter().filter(|t| t.chosen).map(|t| t.gain).collect();
        assert_eq!(chosen, vec![3.0, 2.0]);
    }

    #[test]
    fn greedy_ties_go_to_lowest_index() {
        let f = modular(&[1.0, 1.0, 1.0]);
        let r = greedy_select(&f, &[0, 1, 2], 1).unwrap();
        assert_eq!(r.selected, vec![0]);
    }

    #[test]
    fn cost_ratio_example() {
        let f = modular(&[10.0, 6.0]);
        let r = greedy_select_cost_ratio(&f, &[(0, 5.0), (1, 2.0)], 5.0).unwrap();
        assert_eq!(r.selected, vec![1]);
        let none = greedy_select_cost_ratio(&f, &[(0, 5.0), (1, 2.0)], 1.0).unwrap();
        assert!(none.selected.is_empty());
    }

    #[test]
    fn brute_force_counts_and_ties() {
        let f = modular(&[1.0; 8]);
        let r = brute_force_select(&f, &(0..8).collect::<Vec<_>>(), 2, DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(r.evaluations, 28);
        assert_eq!(r.selected, vec![0, 1]);
        assert!(brute_force_select(&f, &(0..8).collect::<Vec<_>>(), 4, 10).unwrap_err().is_capacity());
    }

    #[test]
    fn ratio_requires_positive_oracle() {
        let a = SelectionReport::new(vec![], 1.0, vec![], 1);
        let z = SelectionReport::new(vec![], 0.0, vec![], 1);
        assert_eq!(greedy_ratio(&a, &a).unwrap(), 1.0);
        assert!(matches!(greedy_ratio(&a, &z), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn trace_csv_has_fixed_columns() {
        let f = modular(&[3.0, 2.0]);
        let r = greedy_select(&f, &[0, 1], 1).unwrap();
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("iteration,candidate,gain,chosen"));
        assert_eq!(text.lines().count(), 3);
    }
}
