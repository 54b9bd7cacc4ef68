//! Belief-space machinery and exact POMDP solving.
//!
//! A [`PomdpInstance`] is an explicit MDP plus an observation likelihood
//! `O(o | s', a)` conditioned on the arrival state. Instances built from
//! sensor sets also carry an *initial* observation model: the sensors read
//! the starting state before the first decision, so the value at `b_0` is the
//! expectation over that first reading.

mod alpha;
mod lp;
mod oracle;
mod solver;

pub use alpha::{
    prune, prune_with, prune_with_tol, AlphaVector, PruneStats, ValueFunctionSet, DEFAULT_PRUNE_TOL,
};
pub use oracle::{finite_horizon_oracle, ORACLE_MAX_ACTIONS, ORACLE_MAX_HORIZON, ORACLE_MAX_OBSERVATIONS};
pub use solver::{
    solve_infinite_horizon, solve_stages, solve_stages_with, solve_with, BlockValue, PomdpSolution, SolverOptions,
    DEFAULT_ETA, DEFAULT_MAX_STAGES, DEFAULT_MAX_VECTORS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{check_distribution, ExplicitMDP};

const SIMPLEX_TOL: f64 = 1e-12;

/// Probability vector over joint states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefState(pub Vec<f64>);

impl BeliefState {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_distribution(&p, "belief")?;
        Ok(BeliefState(p))
    }

    pub fn point(n: usize, s: usize) -> Self {
        let mut p = vec![0.0; n];
        p[s] = 1.0;
        BeliefState(p)
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&x| x >= 0.0 && x.is_finite())
            && (self.0.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, _)| s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PomdpInstance {
    pub mdp: ExplicitMDP,
    pub n_observations: usize,
    /// `O(o | s', a)` laid out as `[action][next_state][observation]`.
    pub observation: Vec<f64>,
    pub initial_belief: Vec<f64>,
    /// Optional reading of the starting state, `[state][observation]`.
    #[serde(default)]
    pub initial_observation: Option<Vec<f64>>,
}

impl PomdpInstance {
    pub fn validate(&self) -> Result<()> {
        self.mdp.validate()?;
        let (n, na, no) = (self.mdp.n_states, self.mdp.n_actions, self.n_observations);
        if no == 0 {
            return Err(Error::input("POMDP needs at least one observation"));
        }
        if self.observation.len() != na * n * no {
            return Err(Error::input("observation tensor has the wrong size"));
        }
        for a in 0..na {
            for s2 in 0..n {
                let row = self.obs_row(a, s2);
                check_distribution(row, &format!("observation row (a={a}, s'={s2})"))?;
            }
        }
        if self.initial_belief.len() != n {
            return Err(Error::input("initial belief has the wrong size"));
        }
        check_distribution(&self.initial_belief, "initial belief")?;
        if let Some(z) = &self.initial_observation {
            if z.len() != n * no {
                return Err(Error::input("initial observation model has the wrong size"));
            }
            for s in 0..n {
                check_distribution(&z[s * no..(s + 1) * no], "initial observation row")?;
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.mdp.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.mdp.n_actions
    }

    pub fn obs_row(&self, a: usize, s2: usize) -> &[f64] {
        let no = self.n_observations;
        let base = (a * self.mdp.n_states + s2) * no;
        &self.observation[base..base + no]
    }

    pub fn obs_prob(&self, a: usize, s2: usize, o: usize) -> f64 {
        self.obs_row(a, s2)[o]
    }

    /// Next-state distribution before conditioning on an observation.
    pub fn predict(&self, b: &BeliefState, a: usize) -> Vec<f64> {
        let n = self.mdp.n_states;
        let mut next = vec![0.0; n];
        for (s, &p) in b.0.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (s2, &t) in self.mdp.row(s, a).iter().enumerate() {
                next[s2] += p * t;
            }
        }
        next
    }

    /// `P(o | b, a)`.
    pub fn observation_probability(&self, b: &BeliefState, a: usize, o: usize) -> f64 {
        self.predict(b, a)
            .iter()
            .enumerate()
            .map(|(s2, &p)| p * self.obs_prob(a, s2, o))
            .sum()
    }

    /// Distribution of the initial observation and the belief after each
    /// reading. Without an initial observation model this is `[(1, b_0)]`.
    pub fn initial_branches(&self) -> Vec<(f64, BeliefState)> {
        let b0 = &self.initial_belief;
        let Some(z) = &self.initial_observation else {
            return vec![(1.0, BeliefState(b0.clone()))];
        };
        let no = self.n_observations;
        let mut out = Vec::new();
        for o in 0..no {
            let joint: Vec<f64> = b0
                .iter()
                .enumerate()
                .map(|(s, &p)| p * z[s * no + o])
                .collect();
            let total: f64 = joint.iter().sum();
            if total > 0.0 {
                out.push((total, BeliefState(normalize(joint, total))));
            }
        }
        out
    }
}

fn normalize(mut v: Vec<f64>, total: f64) -> Vec<f64> {
    for x in &mut v {
        *x /= total;
    }
    // absorb rounding so the vector sums to 1 within a few ulps
    let sum: f64 = v.iter().sum();
    if sum != 1.0 {
        if let Some(i) = (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])) {
            v[i] += 1.0 - sum;
        }
    }
    v
}

/// `ρ(b, a) = Σ_s b(s) r(s, a)`.
pub fn belief_reward(b: &BeliefState, a: usize, m: &PomdpInstance) -> f64 {
    b.0.iter()
        .enumerate()
        .map(|(s, &p)| p * m.mdp.reward(s, a))
        .sum()
}

/// Bayes update `b'(s') ∝ O(o|s',a) Σ_s T(s'|s,a) b(s)`.
pub fn belief_update(b: &BeliefState, a: usize, o: usize, m: &PomdpInstance) -> Result<BeliefState> {
    if a >= m.n_actions() || o >= m.n_observations {
        return Err(Error::input(format!("action {a} or observation {o} out of range")));
    }
    if b.0.len() != m.n_states() {
        return Err(Error::input("belief dimension mismatch"));
    }
    let joint: Vec<f64> = m
        .predict(b, a)
        .iter()
        .enumerate()
        .map(|(s2, &p)| p * m.obs_prob(a, s2, o))
        .collect();
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(Error::ImpossibleObservation {
            action: a,
            observation: o,
        });
    }
    Ok(BeliefState(normalize(joint, total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::example1_pomdp;

    #[test]
    fn belief_reward_examples() {
        let full = example1_pomdp(1.0, 0.1, 0.9, false).unwrap();
        let b = BeliefState(vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(belief_reward(&b, 0, &full), 0.0);
        assert!((belief_reward(&b, 1, &full) - (-0.05)).abs() < 1e-15);
        let c = BeliefState::point(4, 2);
        for a in 0..3 {
            assert_eq!(belief_reward(&c, a, &full), 1.0);
        }
    }

    #[test]
    fn blind_updates() {
        let blind = example1_pomdp(1.0, 0.1, 0.9, false).unwrap();
        let b = BeliefState(vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(belief_update(&b, 0, 0, &blind).unwrap().0, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(belief_update(&b, 1, 0, &blind).unwrap().0, vec![0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn noiseless_collapse() {
        let seen = example1_pomdp(1.0, 0.1, 0.9, true).unwrap();
        let b = BeliefState(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(belief_update(&b, 0, 0, &seen).unwrap().0, vec![1.0, 0.0, 0.0, 0.0]);
        let err = belief_update(&b, 0, 2, &seen).unwrap_err();
        assert!(matches!(err, Error::ImpossibleObservation { .. }));
    }
}
