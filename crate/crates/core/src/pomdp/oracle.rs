//! Brute-force finite-horizon verifier.
//!
//! The best depth-`T` policy tree is found by exhaustive expectimax over the
//! full action/observation tree: at every history node each action is tried
//! and each observation branch is solved independently, which visits exactly
//! the same choices as enumerating all policy trees and keeping the best one,
//! without materializing the (doubly exponential) tree set.

use super::{belief_reward, belief_update, BeliefState, PomdpInstance};
use crate::error::{Error, Result};

pub const ORACLE_MAX_HORIZON: usize = 4;
pub const ORACLE_MAX_ACTIONS: usize = 4;
pub const ORACLE_MAX_OBSERVATIONS: usize = 4;

/// Optimal expected discounted return over `horizon` decisions from `b_0`.
pub fn finite_horizon_oracle(m: &PomdpInstance, horizon: usize) -> Result<f64> {
    m.validate()?;
    if horizon > ORACLE_MAX_HORIZON {
        return Err(Error::capacity("oracle horizon", ORACLE_MAX_HORIZON));
    }
    if m.n_actions() > ORACLE_MAX_ACTIONS {
        return Err(Error::capacity("oracle action count", ORACLE_MAX_ACTIONS));
    }
    if m.n_observations > ORACLE_MAX_OBSERVATIONS {
        return Err(Error::capacity("oracle observation count", ORACLE_MAX_OBSERVATIONS));
    }
    let mut total = 0.0;
    for (p, b) in m.initial_branches() {
        total += p * best(m, &b, horizon)?;
    }
    Ok(total)
}

fn best(m: &PomdpInstance, b: &BeliefState, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Ok(0.0);
    }
    let mut value = f64::NEG_INFINITY;
    for a in 0..m.n_actions() {
        let mut q = belief_reward(b, a, m);
        for o in 0..m.n_observations {
            let p = m.observation_probability(b, a, o);
            if p <= 0.0 {
                continue;
            }
            let next = belief_update(b, a, o, m)?;
            q += m.mdp.discount * p * best(m, &next, depth - 1)?;
        }
        value = value.max(q);
    }
    Ok(value)
}
