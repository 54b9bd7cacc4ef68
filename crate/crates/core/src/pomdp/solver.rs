//! Exact infinite-horizon value iteration over alpha-vector sets with
//! incremental pruning.
//!
//! When every arrival state emits one observation with certainty, independent
//! of the action (noiseless sensors), the states split into observation
//! blocks and every posterior belief lies on the face of one block. The value
//! function is then kept per block with vectors over that block's states,
//! which is exact for every belief reachable after the first reading. Other
//! observation models use a single block spanning all states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alpha::{prune_with_tol, AlphaVector, PruneStats, ValueFunctionSet, DEFAULT_PRUNE_TOL};
use super::lp;
use super::{belief_reward, belief_update, BeliefState, PomdpInstance};
use crate::error::{Error, Result};

pub const DEFAULT_ETA: f64 = 1e-6;
pub const DEFAULT_MAX_VECTORS: usize = 20_000;
pub const DEFAULT_MAX_STAGES: usize = 2_000;
/// Stages without a new smallest residual after which value iteration is
/// taken to have reached its pruning noise floor.
const STALL_STAGES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop once the sup-norm change between consecutive stages is at most
    /// `eta`, or at most the absolute pruning margin when that is larger.
    /// Iteration also stops when the change has not shrunk for a run of
    /// stages while within a factor 1000 of that threshold: exact backups
    /// contract it by the discount every stage, so a stall means pruning
    /// noise dominates.
    pub eta: f64,
    pub max_vectors: usize,
    pub max_stages: usize,
    /// Relative pruning margin, see [`prune_with_tol`](super::prune_with_tol).
    #[serde(default = "default_prune_tol")]
    pub prune_tol: f64,
}

fn default_prune_tol() -> f64 {
    DEFAULT_PRUNE_TOL
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eta: DEFAULT_ETA,
            max_vectors: DEFAULT_MAX_VECTORS,
            max_stages: DEFAULT_MAX_STAGES,
            prune_tol: DEFAULT_PRUNE_TOL,
        }
    }
}

/// Alpha vectors over the states of one observation block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockValue {
    pub states: Vec<usize>,
    pub set: ValueFunctionSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PomdpSolution {
    pub blocks: Vec<BlockValue>,
    pub value_at_b0: f64,
    pub stages: usize,
    /// Sup-norm change of the last stage (an upper bound when the cheap test sufficed).
    pub residual: f64,
    pub converged: bool,
    pub lp_calls: usize,
}

impl PomdpSolution {
    pub fn vector_count(&self) -> usize {
        self.blocks.iter().map(|b| b.set.len()).sum()
    }
}

/// Sparse back-projection `g(s) = Σ_{s'} w(s, s') α(s')` for one
/// (block, action, observation) triple, with `w = γ T(s'|s,a) O(o|s',a)`.
struct Projection {
    target_block: usize,
    /// per local source state: (local target index, weight)
    rows: Vec<Vec<(usize, f64)>>,
}

struct Model {
    blocks: Vec<Vec<usize>>,
    /// block and position of each state
    locate: Vec<(usize, usize)>,
    /// rewards per (block, action) over local states
    rewards: Vec<Vec<Vec<f64>>>,
    /// projections per (block, action), only observations with positive probability
    projections: Vec<Vec<Vec<Projection>>>,
    n_actions: usize,
    prune_tol: f64,
}

fn observation_blocks(m: &PomdpInstance) -> Option<(Vec<Vec<usize>>, Vec<usize>)> {
    let n = m.n_states();
    let mut emitted = vec![usize::MAX; n];
    for a in 0..m.n_actions() {
        for (s2, slot) in emitted.iter_mut().enumerate() {
            let row = m.obs_row(a, s2);
            let hot: Vec<usize> = (0..row.len()).filter(|&o| row[o] != 0.0).collect();
            if hot.len() != 1 || (row[hot[0]] - 1.0).abs() > 1e-12 {
                return None;
            }
            if *slot == usize::MAX {
                *slot = hot[0];
            } else if *slot != hot[0] {
                return None;
            }
        }
    }
    let mut block_of_obs = vec![usize::MAX; m.n_observations];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (s, &o) in emitted.iter().enumerate() {
        if block_of_obs[o] == usize::MAX {
            block_of_obs[o] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[block_of_obs[o]].push(s);
    }
    Some((blocks, block_of_obs))
}

impl Model {
    fn build(m: &PomdpInstance, prune_tol: f64) -> Model {
        let n = m.n_states();
        let na = m.n_actions();
        let gamma = m.mdp.discount;
        let (blocks, block_of_obs) = observation_blocks(m)
            .unwrap_or_else(|| (vec![(0..n).collect()], vec![0; m.n_observations]));
        let mut locate = vec![(0, 0); n];
        for (bi, states) in blocks.iter().enumerate() {
            for (pos, &s) in states.iter().enumerate() {
                locate[s] = (bi, pos);
            }
        }
        let mut rewards = Vec::with_capacity(blocks.len());
        let mut projections = Vec::with_capacity(blocks.len());
        for states in &blocks {
            let mut block_rewards = Vec::with_capacity(na);
            let mut block_proj = Vec::with_capacity(na);
            for a in 0..na {
                block_rewards.push(states.iter().map(|&s| m.mdp.reward(s, a)).collect());
                let mut per_obs: Vec<Projection> = Vec::new();
                for o in 0..m.n_observations {
                    let target = block_of_obs[o];
                    if target == usize::MAX {
                        continue;
                    }
                    let mut rows = Vec::with_capacity(states.len());
                    let mut any = false;
                    for &s in states {
                        let mut row = Vec::new();
                        for (s2, &t) in m.mdp.row(s, a).iter().enumerate() {
                            if t == 0.0 {
                                continue;
                            }
                            let z = m.obs_prob(a, s2, o);
                            if z == 0.0 {
                                continue;
                            }
                            debug_assert_eq!(locate[s2].0, target);
                            row.push((locate[s2].1, gamma * t * z));
                        }
                        any |= !row.is_empty();
                        rows.push(row);
                    }
                    if any {
                        per_obs.push(Projection {
                            target_block: target,
                            rows,
                        });
                    }
                }
                block_proj.push(per_obs);
            }
            rewards.push(block_rewards);
            projections.push(block_proj);
        }
        Model {
            blocks,
            locate,
            rewards,
            projections,
            n_actions: na,
            prune_tol,
        }
    }

    /// One exact Bellman backup of every block's vector set.
    fn backup(&self, current: &[ValueFunctionSet]) -> Result<(Vec<ValueFunctionSet>, usize)> {
        let jobs: Vec<(usize, usize)> = (0..self.blocks.len())
            .flat_map(|b| (0..self.n_actions).map(move |a| (b, a)))
            .collect();
        let per_action: Vec<Result<(ValueFunctionSet, usize)>> = jobs
            .par_iter()
            .map(|&(b, a)| self.backup_action(b, a, current))
            .collect();
        let mut lp_calls = 0;
        let mut next = Vec::with_capacity(self.blocks.len());
        let mut iter = per_action.into_iter();
        for _ in 0..self.blocks.len() {
            let mut union = Vec::new();
            for _ in 0..self.n_actions {
                let (set, calls) = iter.next().unwrap()?;
                lp_calls += calls;
                union.extend(set.vectors);
            }
            let mut stats = PruneStats::default();
            next.push(prune_with_tol(union, self.prune_tol, &mut stats)?);
            lp_calls += stats.lp_calls;
        }
        Ok((next, lp_calls))
    }

    fn backup_action(
        &self,
        block: usize,
        action: usize,
        current: &[ValueFunctionSet],
    ) -> Result<(ValueFunctionSet, usize)> {
        let mut stats = PruneStats::default();
        let reward = &self.rewards[block][action];
        let mut acc: Vec<Vec<f64>> = vec![reward.clone()];
        for proj in &self.projections[block][action] {
            let source = &current[proj.target_block];
            let projected: Vec<AlphaVector> = source
                .vectors
                .iter()
                .map(|alpha| {
                    let g = proj
                        .rows
                        .iter()
                        .map(|row| row.iter().map(|&(t, w)| w * alpha.values[t]).sum())
                        .collect();
                    AlphaVector::new(g, action)
                })
                .collect();
            let projected = prune_with_tol(projected, self.prune_tol, &mut stats)?;
            let mut sums = Vec::with_capacity(acc.len() * projected.len());
            for x in &acc {
                for g in &projected.vectors {
                    sums.push(AlphaVector::new(
                        x.iter().zip(&g.values).map(|(p, q)| p + q).collect(),
                        action,
                    ));
                }
            }
            let pruned = prune_with_tol(sums, self.prune_tol, &mut stats)?;
            acc = pruned.vectors.into_iter().map(|a| a.values).collect();
        }
        let set = ValueFunctionSet {
            vectors: acc.into_iter().map(|v| AlphaVector::new(v, action)).collect(),
        };
        Ok((set, stats.lp_calls))
    }

    fn value_on_block(&self, sets: &[ValueFunctionSet], b: &BeliefState) -> Option<f64> {
        let mut block = None;
        for s in b.support() {
            let (bi, _) = self.locate[s];
            match block {
                None => block = Some(bi),
                Some(x) if x != bi => return None,
                _ => {}
            }
        }
        let bi = block?;
        let local: Vec<f64> = self.blocks[bi].iter().map(|&s| b.0[s]).collect();
        Some(sets[bi].value(&local))
    }

    /// Value at an arbitrary belief. Beliefs spanning several blocks are
    /// resolved with a one-step lookahead, after which every posterior lies
    /// inside one block.
    fn value_at(&self, m: &PomdpInstance, sets: &[ValueFunctionSet], b: &BeliefState) -> Result<f64> {
        if let Some(v) = self.value_on_block(sets, b) {
            return Ok(v);
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..m.n_actions() {
            let mut total = belief_reward(b, a, m);
            for o in 0..m.n_observations {
                let p = m.observation_probability(b, a, o);
                if p <= 0.0 {
                    continue;
                }
                let post = belief_update(b, a, o, m)?;
                let v = self
                    .value_on_block(sets, &post)
                    .ok_or_else(|| Error::Numerical("posterior spans several blocks".into()))?;
                total += m.mdp.discount * p * v;
            }
            best = best.max(total);
        }
        Ok(best)
    }

    fn value_at_b0(&self, m: &PomdpInstance, sets: &[ValueFunctionSet]) -> Result<f64> {
        let mut total = 0.0;
        for (p, b) in m.initial_branches() {
            total += p * self.value_at(m, sets, &b)?;
        }
        Ok(total)
    }
}

/// Upper bound on `sup_b |V'(b) - V(b)|` from vector-wise comparisons.
fn cheap_residual(next: &ValueFunctionSet, prev: &ValueFunctionSet) -> f64 {
    let one_way = |a: &ValueFunctionSet, b: &ValueFunctionSet| {
        a.vectors
            .iter()
            .map(|x| {
                b.vectors
                    .iter()
                    .map(|y| {
                        x.values
                            .iter()
                            .zip(&y.values)
                            .map(|(p, q)| p - q)
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    one_way(next, prev).max(one_way(prev, next)).max(0.0)
}

/// Exact `sup_b |V'(b) - V(b)|` over the simplex, one LP per vector.
fn exact_residual(next: &ValueFunctionSet, prev: &ValueFunctionSet) -> Result<f64> {
    let one_way = |a: &ValueFunctionSet, b: &ValueFunctionSet| -> Result<f64> {
        let others: Vec<&[f64]> = b.vectors.iter().map(|v| v.values.as_slice()).collect();
        let mut worst = 0.0f64;
        for x in &a.vectors {
            worst = worst.max(lp::max_gap(&x.values, &others)?);
        }
        Ok(worst)
    };
    Ok(one_way(next, prev)?.max(one_way(prev, next)?))
}

fn check_options(opts: &SolverOptions) -> Result<()> {
    if !(opts.eta > 0.0) {
        return Err(Error::input(format!("eta {} must be positive", opts.eta)));
    }
    if !(opts.prune_tol >= 0.0) {
        return Err(Error::input(format!("prune tolerance {} must be nonnegative", opts.prune_tol)));
    }
    Ok(())
}

/// Runs alpha-vector value iteration until the stage-to-stage change is at
/// most `eta`, then reports the value at the initial belief.
pub fn solve_infinite_horizon(m: &PomdpInstance, eta: f64) -> Result<PomdpSolution> {
    solve_with(
        m,
        &SolverOptions {
            eta,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(m: &PomdpInstance, opts: &SolverOptions) -> Result<PomdpSolution> {
    check_options(opts)?;
    run(m, opts, None)
}

/// Exactly `stages` backups from `V_0 = 0`, i.e. the optimal `stages`-step value.
pub fn solve_stages(m: &PomdpInstance, stages: usize) -> Result<PomdpSolution> {
    solve_stages_with(m, stages, &SolverOptions::default())
}

pub fn solve_stages_with(m: &PomdpInstance, stages: usize, opts: &SolverOptions) -> Result<PomdpSolution> {
    check_options(opts)?;
    run(m, opts, Some(stages))
}

fn run(m: &PomdpInstance, opts: &SolverOptions, fixed: Option<usize>) -> Result<PomdpSolution> {
    m.validate()?;
    let model = Model::build(m, opts.prune_tol);
    let mut sets: Vec<ValueFunctionSet> = model
        .blocks
        .iter()
        .map(|states| ValueFunctionSet {
            vectors: vec![AlphaVector::new(vec![0.0; states.len()], 0)],
        })
        .collect();
    let mut lp_calls = 0;
    let mut stages = 0;
    let mut residual = f64::INFINITY;
    let mut best_residual = f64::INFINITY;
    let mut stalled = 0usize;
    let finish = |sets: Vec<ValueFunctionSet>, stages, residual, converged, lp_calls| -> Result<PomdpSolution> {
        let value_at_b0 = model.value_at_b0(m, &sets)?;
        Ok(PomdpSolution {
            blocks: model
                .blocks
                .iter()
                .cloned()
                .zip(sets)
                .map(|(states, set)| BlockValue { states, set })
                .collect(),
            value_at_b0,
            stages,
            residual,
            converged,
            lp_calls,
        })
    };
    loop {
        if let Some(n) = fixed {
            if stages == n {
                return finish(sets, stages, residual, true, lp_calls);
            }
        } else if stages >= opts.max_stages {
            let partial = finish(sets, stages, residual, false, lp_calls)?;
            return Err(Error::Capacity {
                what: format!("POMDP value iteration stages (residual {residual:.3e})"),
                limit: opts.max_stages,
                partial: Some(partial.value_at_b0),
            });
        }
        let (next, calls) = model.backup(&sets)?;
        lp_calls += calls;
        stages += 1;
        let total: usize = next.iter().map(ValueFunctionSet::len).sum();
        if total > opts.max_vectors {
            let partial = finish(sets, stages - 1, residual, false, lp_calls)?;
            return Err(Error::Capacity {
                what: format!("alpha-vector set size {total}"),
                limit: opts.max_vectors,
                partial: Some(partial.value_at_b0),
            });
        }
        // pruning may move the value function by up to its margin each
        // stage, so residuals below that margin carry no information
        let scale = next
            .iter()
            .flat_map(|set| set.vectors.iter().flat_map(|a| a.values.iter()))
            .fold(1.0f64, |m, x| m.max(x.abs()));
        let stop_tol = opts.eta.max(opts.prune_tol * scale);
        if fixed.is_none() {
            residual = next
                .iter()
                .zip(&sets)
                .map(|(a, b)| cheap_residual(a, b))
                .fold(0.0, f64::max);
            if residual > stop_tol && residual <= 1e3 * stop_tol {
                let mut exact = 0.0f64;
                for (a, b) in next.iter().zip(&sets) {
                    exact = exact.max(exact_residual(a, b)?);
                }
                residual = exact;
            }
            if residual < best_residual * (1.0 - 1e-3) {
                best_residual = residual;
                stalled = 0;
            } else {
                stalled += 1;
            }
        }
        sets = next;
        // exact backups contract the residual by γ every stage; a residual
        // that stops shrinking near the pruning margin has hit the noise
        // floor that pruning leaves, and more stages only cycle through it
        let at_floor = stalled >= STALL_STAGES && best_residual <= 1e3 * stop_tol;
        if fixed.is_none() && (residual <= stop_tol || at_floor) {
            return finish(sets, stages, residual, true, lp_calls);
        }
    }
}
