use serde::{Deserialize, Serialize};

use super::examples::{gadget_kernel, gadget_reward_table, GADGET_B0};
use crate::error::{Error, Result};
use crate::fmdp::{
    ActionFactor, FactoredMDP, InitialBelief, RewardComponent, RewardRule, StateVariable,
};
use crate::selection::{
    binomial, combinations, ActionGrant, Actuator, ActuatorCatalog, ActuatorProblem, Sensor,
    SensorCatalog, SensorModel, SensorProblem,
};

/// Cap on the number of collections [`setcover_brute_force`] may examine.
pub const SETCOVER_SUBSET_CAP: usize = 1_000_000;

const C: usize = 2;

/// Decision instance: do at most `k` of `sets` cover `0..n`? Elements are
/// 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
}

impl SetCoverInstance {
    pub fn new(n: usize, sets: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let sc = SetCoverInstance { n, sets, k };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::input("universe must be non-empty"));
        }
        for (i, s) in self.sets.iter().enumerate() {
            if let Some(u) = s.iter().find(|&&u| u >= self.n) {
                return Err(Error::input(format!("set {i} contains element {u} outside the universe")));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    /// Whether the union of all sets is the universe.
    pub fn union_covers(&self) -> bool {
        self.covers(&(0..self.m()).collect::<Vec<_>>())
    }

    /// Whether the chosen set indices cover the universe.
    pub fn covers(&self, chosen: &[usize]) -> bool {
        let mut hit = vec![false; self.n];
        for &i in chosen {
            for &u in &self.sets[i] {
                hit[u] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    /// For each element, the sets containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (j, s) in self.sets.iter().enumerate() {
            for &u in s {
                if !inc[u].contains(&j) {
                    inc[u].push(j);
                }
            }
        }
        inc
    }
}

/// Smallest-first, lexicographic search for a cover of at most `k` sets.
/// Returns the first witness found.
pub fn setcover_brute_force(sc: &SetCoverInstance) -> Result<Option<Vec<usize>>> {
    sc.validate()?;
    let m = sc.m();
    let kmax = sc.k.min(m);
    let total: u128 = (0..=kmax).map(|j| binomial(m, j)).sum();
    if total > SETCOVER_SUBSET_CAP as u128 {
        return Err(Error::capacity(format!("set-cover search over {total} collections"), SETCOVER_SUBSET_CAP));
    }
    for size in 0..=kmax {
        for combo in combinations(m, size) {
            if sc.covers(&combo) {
                return Ok(Some(combo));
            }
        }
    }
    Ok(None)
}

/// `(k + γ(n-1)) / (k + γn + γn^c)`, the value ratio between the no-cover
/// and cover cases of the reduction.
pub fn r_approx(k: usize, n: usize, gamma: f64, c_exp: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::input(format!("gamma = {gamma} must lie in (0,1)")));
    }
    if !(c_exp > 1.0) || !c_exp.is_finite() {
        return Err(Error::input(format!("c_exp = {c_exp} must exceed 1")));
    }
    // divided through by γ: one rounding fewer in numerator and denominator
    let (k, n) = (k as f64 / gamma, n as f64);
    Ok((k + n - 1.0) / (k + n + n.powf(c_exp)))
}

/// A selection problem generated from a set-cover instance, together with
/// its source and the value thresholds separating the two answers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionInstance<P> {
    pub source: SetCoverInstance,
    pub c_exp: f64,
    pub reward: f64,
    pub discount: f64,
    /// Number of third-layer gadgets, `round(n^c_exp)`.
    pub n_c: usize,
    pub delta: f64,
    /// `(k + γn + γn^c) R / (1-γ)`, attained iff a cover exists.
    pub threshold: f64,
    /// `(k + γ(n-1)) R / (1-γ)`, the best value without a cover.
    pub no_cover_bound: f64,
    pub problem: P,
}

impl<P> ReductionInstance<P> {
    /// Total number of gadgets `m + n + n^c`.
    pub fn n_gadgets(&self) -> usize {
        self.source.m() + self.source.n + self.n_c
    }
}

struct Layered {
    mdp: FactoredMDP,
    n_c: usize,
    delta: f64,
}

/// The layered fMDP: `m` first-layer gadgets with the usual gadget reward,
/// `n` element gadgets rewarded when any covering first-layer gadget sits
/// in C, and `n^c` gadgets rewarded when every element is covered.
///
/// Element and coverage rewards read only first-layer states; the gadgets
/// carrying them keep gadget dynamics but no reward of their own, so they
/// earn exactly `γR/(1-γ)` each once the cover is in C from step 1 on.
/// `delta = 2(n + n^c) + 1` makes gambling on an unobserved (or
/// unactuated) first-layer gadget a net loss however many layered rewards it
/// could unlock.
fn layered_mdp(sc: &SetCoverInstance, c_exp: f64, r: f64, gamma: f64) -> Result<Layered> {
    sc.validate()?;
    if !(c_exp > 1.0) || !c_exp.is_finite() {
        return Err(Error::input(format!("c_exp = {c_exp} must exceed 1")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("R = {r} must be positive")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::input(format!("gamma = {gamma} must lie in (0,1)")));
    }
    if sc.k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let (m, n) = (sc.m(), sc.n);
    let n_c = ((n as f64).powf(c_exp).round() as usize).max(1);
    let total = m + n + n_c;
    let delta = 2.0 * (n + n_c) as f64 + 1.0;
    let incidence = sc.incidence();

    let mut rewards = Vec::with_capacity(total);
    for j in 0..m {
        rewards.push(RewardComponent::table(vec![j], vec![j], gadget_reward_table(r, delta, true)));
    }
    for inc in &incidence {
        let mut scope = inc.clone();
        scope.sort_unstable();
        rewards.push(RewardComponent::predicate(scope, RewardRule::AnyInState { target: C, reward: r }));
    }
    let layer1: Vec<usize> = (0..m).collect();
    for _ in 0..n_c {
        rewards.push(RewardComponent::predicate(
            layer1.clone(),
            RewardRule::AllGroupsCovered {
                groups: incidence.clone(),
                target: C,
                reward: r,
            },
        ));
    }
    let name = |i: usize| {
        if i < m {
            format!("set{i}")
        } else if i < m + n {
            format!("elem{}", i - m)
        } else {
            format!("cover{}", i - m - n)
        }
    };
    let mdp = FactoredMDP {
        variables: (0..total).map(|i| StateVariable::new(name(i), &["A", "B", "C", "D"])).collect(),
        action_factors: (0..total).map(|i| ActionFactor::with_size(format!("a_{}", name(i)), 3)).collect(),
        transitions: (0..total).map(|i| gadget_kernel(i, i)).collect(),
        reward_components: rewards,
        discount: gamma,
        initial_belief: Some(InitialBelief::Product(vec![GADGET_B0.to_vec(); total])),
    };
    mdp.validate()?;
    Ok(Layered { mdp, n_c, delta })
}

fn wrap<P>(sc: &SetCoverInstance, c_exp: f64, r: f64, gamma: f64, layered: &Layered, problem: P) -> ReductionInstance<P> {
    let (k, n) = (sc.k as f64, sc.n as f64);
    ReductionInstance {
        source: sc.clone(),
        c_exp,
        reward: r,
        discount: gamma,
        n_c: layered.n_c,
        delta: layered.delta,
        threshold: (k + gamma * n + gamma * layered.n_c as f64) * r / (1.0 - gamma),
        no_cover_bound: (k + gamma * (n - 1.0)) * r / (1.0 - gamma),
        problem,
    }
}

fn layered_cost(i: usize, m: usize, k: usize) -> f64 {
    if i < m {
        1.0
    } else {
        (k + 1) as f64
    }
}

/// Sensor-selection reduction: one noiseless sensor per gadget, cost 1 on
/// the first layer and `k+1` elsewhere, budget `k`.
pub fn setcover_to_fmdp_ss(
    sc: &SetCoverInstance,
    c_exp: f64,
    r: f64,
    gamma: f64,
) -> Result<ReductionInstance<SensorProblem>> {
    let layered = layered_mdp(sc, c_exp, r, gamma)?;
    let m = sc.m();
    let sensors = (0..layered.mdp.variables.len())
        .map(|i| Sensor {
            name: format!("omega_{}", layered.mdp.variables[i].name),
            model: SensorModel::Variable { var: i },
            cost: layered_cost(i, m, sc.k),
        })
        .collect();
    let problem = SensorProblem {
        mdp: layered.mdp.clone(),
        catalog: SensorCatalog {
            sensors,
            budget: sc.k as f64,
        },
    };
    Ok(wrap(sc, c_exp, r, gamma, &layered, problem))
}

/// Actuator-selection reduction: gadgets start with only action 0; an
/// actuator unlocks {1,2} on its gadget. Costs and budget as in
/// [`setcover_to_fmdp_ss`].
pub fn setcover_to_fmdp_as(
    sc: &SetCoverInstance,
    c_exp: f64,
    r: f64,
    gamma: f64,
) -> Result<ReductionInstance<ActuatorProblem>> {
    let layered = layered_mdp(sc, c_exp, r, gamma)?;
    let m = sc.m();
    let total = layered.mdp.variables.len();
    let actuators = (0..total)
        .map(|i| Actuator {
            name: format!("phi_{}", layered.mdp.variables[i].name),
            grants: vec![ActionGrant {
                factor: i,
                values: vec![1, 2],
            }],
            influences: vec![i],
            cost: layered_cost(i, m, sc.k),
        })
        .collect();
    let problem = ActuatorProblem {
        mdp: layered.mdp.clone(),
        catalog: ActuatorCatalog {
            actuators,
            default_actions: vec![vec![0]; total],
            budget: sc.k as f64,
        },
    };
    Ok(wrap(sc, c_exp, r, gamma, &layered, problem))
}
