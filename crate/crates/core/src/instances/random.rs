use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{ActionFactor, FactoredMDP, RewardComponent, StateVariable, TransitionKernel};
use crate::selection::{
    ActionGrant, Actuator, ActuatorCatalog, ActuatorProblem, Sensor, SensorCatalog, SensorModel,
    SensorProblem,
};

/// Random sensor-selection instances: `2^bits` joint states read by one
/// noiseless sensor per binary state variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomSsParams {
    pub bits: usize,
    pub actions: usize,
    pub budget: usize,
    pub gamma: f64,
}

/// Default discount of the random sensor instances. Exact solves at 0.9
/// grow thousands of alpha vectors on these 16-state models; at 0.5 a
/// twenty-instance study finishes in minutes.
pub const RANDOM_SS_GAMMA: f64 = 0.5;

impl Default for RandomSsParams {
    fn default() -> Self {
        RandomSsParams {
            bits: 4,
            actions: 16,
            budget: 2,
            gamma: RANDOM_SS_GAMMA,
        }
    }
}

/// Random actuator-selection instances: `states` states, `default_actions`
/// always-available actions and one extra action per actuator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomAsParams {
    pub states: usize,
    pub default_actions: usize,
    pub actuators: usize,
    pub budget: usize,
    pub gamma: f64,
}

impl Default for RandomAsParams {
    fn default() -> Self {
        RandomAsParams {
            states: 20,
            default_actions: 2,
            actuators: 10,
            budget: 5,
            gamma: 0.9,
        }
    }
}

/// Uniform point on the probability simplex (normalized exponentials).
fn simplex_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    for x in &mut row {
        *x /= total;
    }
    row
}

/// Dense random MDP data on one state variable and one action factor:
/// simplex transition rows and `|N(0, σ)|` rewards with `σ ~ U(0, 10)`
/// drawn once.
fn random_dense(rng: &mut ChaCha8Rng, n: usize, na: usize) -> Result<(TransitionKernel, RewardComponent)> {
    let mut table = Vec::with_capacity(n * na * n);
    for _ in 0..n * na {
        table.extend(simplex_row(rng, n));
    }
    let sigma: f64 = rng.gen_range(0.0..10.0);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Numerical(e.to_string()))?;
    let rewards: Vec<f64> = (0..n * na).map(|_| normal.sample(rng).abs()).collect();
    Ok((
        TransitionKernel {
            parents: vec![0],
            actions: vec![0],
            table,
        },
        RewardComponent::table(vec![0], vec![0], rewards),
    ))
}

/// Random fMDP-SS instance. The joint state is kept as one variable over
/// `2^bits` values because simplex-sampled rows do not factor across the
/// binary variables; sensor `i` reads binary variable `i` (bit `bits-1-i`
/// of the joint index, so sensor 0 reads the most significant bit).
pub fn random_fmdp_ss_instance(seed: u64, params: &RandomSsParams) -> Result<SensorProblem> {
    if params.bits == 0 || params.bits > 8 || params.actions == 0 {
        return Err(Error::input("random SS needs 1..=8 bits and at least one action"));
    }
    if params.budget == 0 || params.budget > params.bits {
        return Err(Error::input("random SS budget must lie in 1..=bits"));
    }
    let n = 1usize << params.bits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (kernel, reward) = random_dense(&mut rng, n, params.actions)?;
    let mdp = FactoredMDP {
        variables: vec![StateVariable::with_size("s", n)],
        action_factors: vec![ActionFactor::with_size("a", params.actions)],
        transitions: vec![kernel],
        reward_components: vec![reward],
        discount: params.gamma,
        initial_belief: None,
    };
    mdp.validate()?;
    let sensors = (0..params.bits)
        .map(|i| {
            let shift = params.bits - 1 - i;
            let mut table = Vec::with_capacity(2 * n);
            for v in 0..n {
                let bit = (v >> shift) & 1;
                table.extend_from_slice(if bit == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] });
            }
            Sensor {
                name: format!("omega{}", i + 1),
                model: SensorModel::Likelihood {
                    vars: vec![0],
                    outputs: 2,
                    table,
                },
                cost: 1.0,
            }
        })
        .collect();
    Ok(SensorProblem {
        mdp,
        catalog: SensorCatalog {
            sensors,
            budget: params.budget as f64,
        },
    })
}

/// Random fMDP-AS instance: actions `0..default_actions` are always
/// available and actuator `i` unlocks action `default_actions + i`.
pub fn random_fmdp_as_instance(seed: u64, params: &RandomAsParams) -> Result<ActuatorProblem> {
    if params.states == 0 || params.default_actions == 0 {
        return Err(Error::input("random AS needs states and at least one default action"));
    }
    if params.budget == 0 || params.budget > params.actuators {
        return Err(Error::input("random AS budget must lie in 1..=actuators"));
    }
    let na = params.default_actions + params.actuators;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (kernel, reward) = random_dense(&mut rng, params.states, na)?;
    let mdp = FactoredMDP {
        variables: vec![StateVariable::with_size("s", params.states)],
        action_factors: vec![ActionFactor::with_size("a", na)],
        transitions: vec![kernel],
        reward_components: vec![reward],
        discount: params.gamma,
        initial_belief: None,
    };
    mdp.validate()?;
    let actuators = (0..params.actuators)
        .map(|i| Actuator {
            name: format!("phi{}", i + 1),
            grants: vec![ActionGrant {
                factor: 0,
                values: vec![params.default_actions + i],
            }],
            influences: vec![0],
            cost: 1.0,
        })
        .collect();
    Ok(ActuatorProblem {
        mdp,
        catalog: ActuatorCatalog {
            actuators,
            default_actions: vec![(0..params.default_actions).collect()],
            budget: params.budget as f64,
        },
    })
}
