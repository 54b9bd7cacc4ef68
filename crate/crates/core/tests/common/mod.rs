//! Invariant checks shared by the property suite and the acceptance run.
//! Each check returns a description of the first violation it finds.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sensact::cascade::{asen_objective, gen_er, simulate_cascade, AsenProblem};
use sensact::fmdp::{ExplicitMDP, FactoredMDP};
use sensact::instances::{random_fmdp_as_instance, random_fmdp_ss_instance, RandomAsParams, RandomSsParams};
use sensact::pomdp::{
    belief_update, finite_horizon_oracle, prune, solve_stages, AlphaVector, BeliefState,
    PomdpInstance,
};
use sensact::selection::{sensor_pomdp, SubsetObjective};

pub type Check = Result<(), String>;

pub fn simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

pub fn random_pomdp(seed: u64, n: usize, na: usize, no: usize) -> PomdpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transitions = Vec::with_capacity(n * na * n);
    for _ in 0..n * na {
        transitions.extend(simplex_point(&mut rng, n));
    }
    let rewards = (0..n * na).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut observation = Vec::with_capacity(na * n * no);
    for _ in 0..na * n {
        observation.extend(simplex_point(&mut rng, no));
    }
    let m = PomdpInstance {
        mdp: ExplicitMDP::new(n, na, transitions, rewards, 0.9).unwrap(),
        n_observations: no,
        observation,
        initial_belief: simplex_point(&mut rng, n),
        initial_observation: None,
    };
    m.validate().unwrap();
    m
}

fn stochastic(m: &ExplicitMDP) -> Check {
    for s in 0..m.n_states {
        for a in 0..m.n_actions {
            let row = m.row(s, a);
            let total: f64 = row.iter().sum();
            if row.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(format!("transition row ({s},{a}) sums to {total}"));
            }
        }
    }
    Ok(())
}

/// Transition and observation rows of random instances are distributions.
pub fn rows_are_stochastic(seed: u64) -> Check {
    let ss = random_fmdp_ss_instance(seed, &RandomSsParams::default()).map_err(|e| e.to_string())?;
    stochastic(&ss.mdp.flatten(1 << 20).map_err(|e| e.to_string())?)?;
    let subset: Vec<usize> = (0..ss.catalog.sensors.len()).filter(|i| seed >> i & 1 == 1).collect();
    let pomdp = sensor_pomdp(&ss.mdp, &ss.catalog, &subset).map_err(|e| e.to_string())?;
    for a in 0..pomdp.n_actions() {
        for s2 in 0..pomdp.n_states() {
            let total: f64 = pomdp.obs_row(a, s2).iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(format!("observation row ({a},{s2}) sums to {total}"));
            }
        }
    }
    let act = random_fmdp_as_instance(seed, &RandomAsParams::default()).map_err(|e| e.to_string())?;
    stochastic(&act.mdp.flatten(1 << 20).map_err(|e| e.to_string())?)
}

/// Twenty Bayes updates along likely observations stay on the simplex.
pub fn beliefs_stay_on_simplex(seed: u64, n: usize, no: usize) -> Check {
    let m = random_pomdp(seed, n, 3, no);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut b = BeliefState::new(simplex_point(&mut rng, n)).map_err(|e| e.to_string())?;
    for step in 0..20 {
        let a = rng.gen_range(0..3);
        let o = (0..no)
            .max_by(|&x, &y| m.observation_probability(&b, a, x).total_cmp(&m.observation_probability(&b, a, y)))
            .unwrap();
        b = belief_update(&b, a, o, &m).map_err(|e| e.to_string())?;
        let total: f64 = b.0.iter().sum();
        if !b.is_valid() || (total - 1.0).abs() > 1e-9 {
            return Err(format!("belief left the simplex at step {step}: {:?}", b.0));
        }
    }
    Ok(())
}

/// Pruning keeps a subset of the vectors with the same upper envelope at
/// 1000 random beliefs.
pub fn pruning_is_sound(seed: u64, dim: usize, count: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<AlphaVector> = (0..count)
        .map(|i| AlphaVector::new((0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect(), i))
        .collect();
    let pruned = prune(vectors.clone()).map_err(|e| e.to_string())?;
    if pruned.is_empty() || pruned.vectors.iter().any(|v| !vectors.contains(v)) {
        return Err("pruned set is not a nonempty subset".into());
    }
    for _ in 0..1000 {
        let b = simplex_point(&mut rng, dim);
        let full = vectors.iter().map(|v| v.dot(&b)).fold(f64::NEG_INFINITY, f64::max);
        let kept = pruned.value(&b);
        if (full - kept).abs() > 1e-9 {
            return Err(format!("envelope {full} vs pruned {kept} at {b:?}"));
        }
    }
    Ok(())
}

/// Exact value iteration equals brute-force expectimax for `stages` steps.
pub fn matches_expectimax(seed: u64, n: usize, stages: usize) -> Check {
    let m = random_pomdp(seed, n, 2, 2);
    let exact = solve_stages(&m, stages).map_err(|e| e.to_string())?.value_at_b0;
    let oracle = finite_horizon_oracle(&m, stages).map_err(|e| e.to_string())?;
    if (exact - oracle).abs() > 1e-9 {
        return Err(format!("{stages} stages: solver {exact} vs expectimax {oracle}"));
    }
    Ok(())
}

/// The flattened model reproduces every factored transition probability
/// and reward.
pub fn flatten_agrees(f: &FactoredMDP) -> Check {
    let flat = f.flatten(1 << 20).map_err(|e| e.to_string())?;
    let states = f.state_indexer().map_err(|e| e.to_string())?;
    let actions = f.action_indexer().map_err(|e| e.to_string())?;
    if flat.n_states != states.total() || flat.n_actions != actions.total() {
        return Err("flattened dimensions differ".into());
    }
    for s in states.iter() {
        let si = states.index(&s);
        for a in actions.iter() {
            let ai = actions.index(&a);
            let r = f.total_reward(&s, &a).map_err(|e| e.to_string())?;
            if (flat.reward(si, ai) - r).abs() > 1e-12 {
                return Err(format!("reward at {s:?},{a:?}"));
            }
            for s2 in states.iter() {
                let p = f.joint_transition_prob(&s, &a, &s2).map_err(|e| e.to_string())?;
                let q = flat.prob(si, ai, states.index(&s2));
                if (p - q).abs() > 1e-12 {
                    return Err(format!("P({s:?},{a:?},{s2:?}) factored {p} vs flat {q}"));
                }
            }
        }
    }
    Ok(())
}

pub fn random_flatten_agrees(seed: u64) -> Check {
    let params = RandomSsParams { bits: 3, actions: 4, ..Default::default() };
    flatten_agrees(&random_fmdp_ss_instance(seed, &params).map_err(|e| e.to_string())?.mdp)?;
    let params = RandomAsParams { states: 6, actuators: 3, budget: 2, ..Default::default() };
    flatten_agrees(&random_fmdp_as_instance(seed, &params).map_err(|e| e.to_string())?.mdp)
}

/// Under shared rollouts, islanding a superset never lowers the return, and
/// single cascades only ever lose healthy nodes.
pub fn cascade_is_monotone(seed: u64, extra: usize) -> Check {
    let net = gen_er(20, 0.3, 0.3, seed).map_err(|e| e.to_string())?;
    let faulty = [0usize, 1];
    let small = [5usize];
    let large = [5usize, 2 + extra % 18];
    let t = simulate_cascade(&net, &faulty, &small, seed).map_err(|e| e.to_string())?;
    if t.healthy.len() != t.termination_step + 1 || t.healthy.windows(2).any(|w| w[1] > w[0]) {
        return Err(format!("healthy counts not monotone: {:?}", t.healthy));
    }
    let problem = AsenProblem {
        network: net,
        faulty: faulty.to_vec(),
        budget: 2,
        discount: 0.95,
        rollouts: 200,
        seed,
        truncation_eps: 1e-6,
    };
    let objective = asen_objective(&problem).map_err(|e| e.to_string())?;
    let none = objective.evaluate(&[]).map_err(|e| e.to_string())?;
    let one = objective.evaluate(&small).map_err(|e| e.to_string())?;
    let two = objective.evaluate(&large).map_err(|e| e.to_string())?;
    if none > one + 1e-9 || one > two + 1e-9 {
        return Err(format!("returns {none} {one} {two} not monotone in the islanded set"));
    }
    Ok(())
}
