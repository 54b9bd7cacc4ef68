//! Exact infinite-horizon discounted solvers for explicit MDPs.
//!
//! Both solvers return stationary deterministic policies; action ties are
//! broken toward the lowest action index.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::ExplicitMDP;

pub const DEFAULT_VI_TOL: f64 = 1e-9;

/// Relative slack used when comparing Q-values, so that analytically tied
/// actions do not flip on rounding noise.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicPolicy(pub Vec<usize>);

impl ValueFunction {
    pub fn expected(&self, belief: &[f64]) -> f64 {
        self.0.iter().zip(belief).map(|(v, b)| v * b).sum()
    }

    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn q_value(m: &ExplicitMDP, v: &[f64], s: usize, a: usize) -> f64 {
    let row = m.row(s, a);
    let future: f64 = row.iter().zip(v).map(|(p, x)| p * x).sum();
    m.reward(s, a) + m.discount * future
}

fn tie_slack(x: f64) -> f64 {
    TIE_TOL * x.abs().max(1.0)
}

/// Greedy action per state, lowest index among (near-)ties.
pub fn greedy_policy(m: &ExplicitMDP, v: &[f64]) -> DeterministicPolicy {
    let policy = (0..m.n_states)
        .map(|s| {
            let qs: Vec<f64> = (0..m.n_actions).map(|a| q_value(m, v, s, a)).collect();
            let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            qs.iter().position(|&q| q >= best - tie_slack(best)).unwrap()
        })
        .collect();
    DeterministicPolicy(policy)
}

/// Synchronous value iteration until the sup-norm Bellman residual is at most `tol`.
pub fn value_iteration(m: &ExplicitMDP, tol: f64) -> Result<(ValueFunction, DeterministicPolicy)> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance {tol} must be positive")));
    }
    let mut v = vec![0.0; m.n_states];
    loop {
        let next: Vec<f64> = (0..m.n_states)
            .map(|s| {
                (0..m.n_actions)
                    .map(|a| q_value(m, &v, s, a))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if residual <= tol {
            break;
        }
    }
    let policy = greedy_policy(m, &v);
    Ok((ValueFunction(v), policy))
}

/// Solves `(I - γ P_π) V = R_π` with a dense LU factorization.
pub fn evaluate_fixed_policy(m: &ExplicitMDP, p: &DeterministicPolicy) -> Result<ValueFunction> {
    let n = m.n_states;
    if p.0.len() != n {
        return Err(Error::input(format!("policy has {} entries for {n} states", p.0.len())));
    }
    if let Some(&a) = p.0.iter().find(|&&a| a >= m.n_actions) {
        return Err(Error::input(format!("policy uses action {a} of {}", m.n_actions)));
    }
    let mut lhs = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..n {
        let a = p.0[s];
        rhs[s] = m.reward(s, a);
        for (s2, &prob) in m.row(s, a).iter().enumerate() {
            if prob != 0.0 {
                lhs[(s, s2)] -= m.discount * prob;
            }
        }
    }
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("policy evaluation system is singular".into()))?;
    Ok(ValueFunction(x.iter().copied().collect()))
}

/// Per-iteration record of policy iteration, kept for monotonicity checks.
#[derive(Clone, Debug)]
pub struct PolicyIterationTrace {
    pub values: Vec<ValueFunction>,
    pub improvements: usize,
}

/// Howard policy iteration starting from the all-zero-action policy.
pub fn policy_iteration(m: &ExplicitMDP) -> Result<(ValueFunction, DeterministicPolicy)> {
    let (v, p, _) = policy_iteration_traced(m)?;
    Ok((v, p))
}

pub fn policy_iteration_traced(
    m: &ExplicitMDP,
) -> Result<(ValueFunction, DeterministicPolicy, PolicyIterationTrace)> {
    let mut policy = DeterministicPolicy(vec![0; m.n_states]);
    let mut trace = PolicyIterationTrace {
        values: Vec::new(),
        improvements: 0,
    };
    // Each improvement strictly increases some state value, so the loop is
    // bounded by the (finite) number of policies; the cap guards against
    // rounding-induced cycling.
    let max_rounds = 10_000;
    for _ in 0..max_rounds {
        let v = evaluate_fixed_policy(m, &policy)?;
        if let Some(prev) = trace.values.last() {
            let worst = prev
                .0
                .iter()
                .zip(&v.0)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            debug_assert!(
                worst <= 1e-8 * prev.0.iter().fold(1.0f64, |acc, x| acc.max(x.abs())),
                "policy iteration decreased a state value by {worst}"
            );
        }
        trace.values.push(v.clone());
        trace.improvements += 1;
        let mut changed = false;
        let mut next = policy.0.clone();
        for s in 0..m.n_states {
            let current = q_value(m, &v.0, s, policy.0[s]);
            let mut best_a = policy.0[s];
            let mut best_q = current;
            for a in 0..m.n_actions {
                let q = q_value(m, &v.0, s, a);
                if q > best_q + tie_slack(best_q) {
                    best_q = q;
                    best_a = a;
                }
            }
            if best_a != policy.0[s] {
                next[s] = best_a;
                changed = true;
            }
        }
        if !changed {
            let final_policy = greedy_policy(m, &v.0);
            return Ok((v, final_policy, trace));
        }
        policy = DeterministicPolicy(next);
    }
    Err(Error::Numerical("policy iteration did not stabilize".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(reward: f64, gamma: f64) -> ExplicitMDP {
        ExplicitMDP::new(1, 1, vec![1.0], vec![reward], gamma).unwrap()
    }

    #[test]
    fn geometric_series() {
        let m = single(1.0, 0.5);
        let (v, p) = value_iteration(&m, 1e-12).unwrap();
        assert!((v.0[0] - 2.0).abs() < 1e-10);
        assert_eq!(p.0, vec![0]);
        let (v, _, trace) = policy_iteration_traced(&m).unwrap();
        assert!((v.0[0] - 2.0).abs() < 1e-12);
        assert_eq!(trace.improvements, 1);
    }

    #[test]
    fn two_state_chain() {
        // state 0 -> state 1 (reward 0), state 1 absorbing with reward 1, γ = 0.5
        let m = ExplicitMDP::new(2, 1, vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 1.0], 0.5).unwrap();
        let (v, _) = policy_iteration(&m).unwrap();
        assert!((v.0[0] - 1.0).abs() < 1e-12);
        assert!((v.0[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_tol() {
        assert!(value_iteration(&single(1.0, 0.5), 0.0).is_err());
    }

    #[test]
    fn ties_pick_lowest_action() {
        let m = ExplicitMDP::new(1, 3, vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], 0.9).unwrap();
        let (_, p) = value_iteration(&m, 1e-9).unwrap();
        assert_eq!(p.0, vec![0]);
        let (_, p) = policy_iteration(&m).unwrap();
        assert_eq!(p.0, vec![0]);
    }

    #[test]
    fn bad_policy_rejected() {
        let m = single(1.0, 0.5);
        assert!(evaluate_fixed_policy(&m, &DeterministicPolicy(vec![1])).is_err());
        assert!(evaluate_fixed_policy(&m, &DeterministicPolicy(vec![])).is_err());
    }
}
