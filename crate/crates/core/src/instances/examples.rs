use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{
    ActionFactor, FactoredMDP, InitialBelief, RewardComponent, RewardRule, StateVariable,
    TransitionKernel,
};
use crate::pomdp::PomdpInstance;
use crate::selection::{
    sensor_pomdp, ActionGrant, Actuator, ActuatorCatalog, ActuatorProblem, Sensor, SensorCatalog,
    SensorModel, SensorProblem,
};

/// Starting distribution of every gadget: A or B with equal probability.
pub const GADGET_B0: [f64; 4] = [0.5, 0.5, 0.0, 0.0];

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;

fn gadget_matrices() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
        vec![
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
        vec![
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
    ]
}

/// Gadget kernel for variable `var` driven by action factor `action`.
pub fn gadget_kernel(var: usize, action: usize) -> TransitionKernel {
    TransitionKernel::per_action(var, action, &gadget_matrices())
}

/// Gadget reward `r(s, a)` as a row-major 4×3 table. With `positive = false`
/// the entries worth `+R` are zeroed and only the penalties remain.
pub fn gadget_reward_table(r: f64, delta: f64, positive: bool) -> Vec<f64> {
    let pen = -(1.0 + delta) * r;
    let pos = if positive { r } else { 0.0 };
    let mut t = vec![0.0; 12];
    let mut set = |s: usize, a: usize, v: f64| t[s * 3 + a] = v;
    set(A, 0, 0.0);
    set(B, 0, 0.0);
    set(A, 1, pos);
    set(B, 1, pen);
    set(A, 2, pen);
    set(B, 2, pos);
    for a in 0..3 {
        set(C, a, pos);
        set(D, a, pen);
    }
    t
}

fn gadget_variable(name: impl Into<String>) -> StateVariable {
    StateVariable::new(name, &["A", "B", "C", "D"])
}

fn gadget_actions(name: impl Into<String>) -> ActionFactor {
    ActionFactor {
        name: name.into(),
        domain: vec!["0".into(), "1".into(), "2".into()],
    }
}

fn check_gadget_params(r: f64, delta: f64, gamma: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("R = {r} must be positive")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::input(format!("delta = {delta} must be positive")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::input(format!("gamma = {gamma} must lie in (0,1)")));
    }
    Ok(())
}

fn single_gadget(r: f64, delta: f64, gamma: f64) -> FactoredMDP {
    FactoredMDP {
        variables: vec![gadget_variable("s")],
        action_factors: vec![gadget_actions("a")],
        transitions: vec![gadget_kernel(0, 0)],
        reward_components: vec![RewardComponent::table(
            vec![0],
            vec![0],
            gadget_reward_table(r, delta, true),
        )],
        discount: gamma,
        initial_belief: Some(InitialBelief::Product(vec![GADGET_B0.to_vec()])),
    }
}

/// Single gadget with one noiseless full-state sensor (cost 1, budget 1).
pub fn example1_mdp(r: f64, delta: f64, gamma: f64) -> Result<SensorProblem> {
    check_gadget_params(r, delta, gamma)?;
    Ok(SensorProblem {
        mdp: single_gadget(r, delta, gamma),
        catalog: SensorCatalog {
            sensors: vec![Sensor {
                name: "omega".into(),
                model: SensorModel::Variable { var: 0 },
                cost: 1.0,
            }],
            budget: 1.0,
        },
    })
}

/// The single-gadget POMDP with or without its sensor installed.
pub fn example1_pomdp(r: f64, delta: f64, gamma: f64, with_sensor: bool) -> Result<PomdpInstance> {
    let p = example1_mdp(r, delta, gamma)?;
    let subset: &[usize] = if with_sensor { &[0] } else { &[] };
    sensor_pomdp(&p.mdp, &p.catalog, subset)
}

/// Single gadget whose actions 1 and 2 require an actuator; without it only
/// the default action 0 is available.
pub fn example2_mdp(r: f64, delta: f64, gamma: f64) -> Result<ActuatorProblem> {
    check_gadget_params(r, delta, gamma)?;
    Ok(ActuatorProblem {
        mdp: single_gadget(r, delta, gamma),
        catalog: ActuatorCatalog {
            actuators: vec![Actuator {
                name: "phi".into(),
                grants: vec![ActionGrant {
                    factor: 0,
                    values: vec![1, 2],
                }],
                influences: vec![0],
                cost: 1.0,
            }],
            default_actions: vec![vec![0]],
            budget: 1.0,
        },
    })
}

/// Which reward the third gadget of the greedy-gap instance carries.
///
/// The total reward of the gap instance lists only the first two gadget
/// rewards and the pair reward, yet the instance also constrains the third
/// gadget's penalty through `delta > R4/R3 - 1`, which only matters if that
/// gadget is penalized. The default keeps the penalties `-(1+delta)R3` and
/// drops its positive entries, which reproduces the stated greedy and
/// optimal values exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var3Reward {
    #[default]
    PenaltyOnly,
    /// No reward at all on the third gadget (the literal reward sum).
    Omitted,
    /// Full gadget reward with `R = R3`.
    Full,
}

/// Parameters of the greedy-gap instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub c: f64,
    pub delta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub var3_reward: Var3Reward,
}

impl GapParams {
    /// `R1 = R2 + c`, and `delta = 2 R4 / R3`, comfortably above the
    /// required `R4/R3 - 1`.
    pub fn new(r2: f64, r3: f64, r4: f64, c: f64, gamma: f64) -> Self {
        GapParams {
            r1: r2 + c,
            r2,
            r3,
            r4,
            c,
            delta: 2.0 * r4 / r3,
            gamma,
            var3_reward: Var3Reward::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let GapParams { r1, r2, r3, r4, c, delta, gamma, .. } = *self;
        if [r1, r2, r3, r4, c, delta].iter().any(|x| !x.is_finite()) {
            return Err(Error::input("gap parameters must be finite"));
        }
        if !(r4 > r1) {
            return Err(Error::input(format!("constraint R4 > R1 violated ({r4} <= {r1})")));
        }
        if !(r1 > r2) {
            return Err(Error::input(format!("constraint R1 > R2 violated ({r1} <= {r2})")));
        }
        if !(r2 > r3) {
            return Err(Error::input(format!("constraint R2 > R3 violated ({r2} <= {r3})")));
        }
        if !(r3 > 0.0) {
            return Err(Error::input(format!("constraint R3 > 0 violated ({r3})")));
        }
        if (r1 - (r2 + c)).abs() > 1e-12 * r1.abs().max(1.0) {
            return Err(Error::input(format!("constraint R1 = R2 + c violated ({r1} != {r2} + {c})")));
        }
        if !(delta > r4 / r3 - 1.0) {
            return Err(Error::input(format!(
                "constraint delta > R4/R3 - 1 violated ({delta} <= {})",
                r4 / r3 - 1.0
            )));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::input(format!("gamma = {gamma} must lie in (0,1)")));
        }
        Ok(())
    }

    /// `(2 R2 + c) / (R2 + R4)`.
    pub fn predicted_ratio(&self) -> f64 {
        (2.0 * self.r2 + self.c) / (self.r2 + self.r4)
    }
}

/// Four gadgets; rewards `R1(s1,a1) + R2(s2,a2) + R4(s2,s3)` plus the third
/// gadget's reward per [`Var3Reward`].
///
/// The pair reward fires when both the second and third gadget land in C. It
/// is credited on arrival: the pair earns `R4` on every step whose
/// transition ends with both gadgets in C, so two gadgets that are driven to
/// C from the first decision on earn `R4/(1-γ)`.
fn gap_mdp(p: &GapParams) -> Result<FactoredMDP> {
    p.validate()?;
    let mut rewards = vec![
        RewardComponent::table(vec![0], vec![0], gadget_reward_table(p.r1, p.delta, true)),
        RewardComponent::table(vec![1], vec![1], gadget_reward_table(p.r2, p.delta, true)),
    ];
    match p.var3_reward {
        Var3Reward::PenaltyOnly => rewards.push(RewardComponent::table(
            vec![2],
            vec![2],
            gadget_reward_table(p.r3, p.delta, false),
        )),
        Var3Reward::Full => rewards.push(RewardComponent::table(
            vec![2],
            vec![2],
            gadget_reward_table(p.r3, p.delta, true),
        )),
        Var3Reward::Omitted => {}
    }
    rewards.push(
        RewardComponent::predicate(
            vec![1, 2],
            RewardRule::AllInState {
                target: C,
                reward: p.r4,
            },
        )
        .at_arrival(),
    );
    Ok(FactoredMDP {
        variables: (1..=4).map(|i| gadget_variable(format!("s{i}"))).collect(),
        action_factors: (1..=4).map(|i| gadget_actions(format!("a{i}"))).collect(),
        transitions: (0..4).map(|i| gadget_kernel(i, i)).collect(),
        reward_components: rewards,
        discount: p.gamma,
        initial_belief: Some(InitialBelief::Product(vec![GADGET_B0.to_vec(); 4])),
    })
}

/// Greedy-gap sensor instance: sensors on each gadget with costs (1,1,1,3)
/// and budget 2.
pub fn example3_instance(p: &GapParams) -> Result<SensorProblem> {
    let mdp = gap_mdp(p)?;
    let costs = [1.0, 1.0, 1.0, 3.0];
    let sensors = (0..4)
        .map(|i| Sensor {
            name: format!("omega{}", i + 1),
            model: SensorModel::Variable { var: i },
            cost: costs[i],
        })
        .collect();
    Ok(SensorProblem {
        mdp,
        catalog: SensorCatalog { sensors, budget: 2.0 },
    })
}

/// Greedy-gap actuator instance: actuator `i` unlocks actions {1,2} on
/// gadget `i`; costs (1,1,1,3) and budget 2.
pub fn example4_instance(p: &GapParams) -> Result<ActuatorProblem> {
    let mdp = gap_mdp(p)?;
    let costs = [1.0, 1.0, 1.0, 3.0];
    let actuators = (0..4)
        .map(|i| Actuator {
            name: format!("phi{}", i + 1),
            grants: vec![ActionGrant {
                factor: i,
                values: vec![1, 2],
            }],
            influences: vec![i],
            cost: costs[i],
        })
        .collect();
    Ok(ActuatorProblem {
        mdp,
        catalog: ActuatorCatalog {
            actuators,
            default_actions: vec![vec![0]; 4],
            budget: 2.0,
        },
    })
}
