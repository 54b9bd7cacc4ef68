//! Factored MDP data model.
//!
//! A [`FactoredMDP`] stores the joint state as a tuple of finite state
//! variables and the joint action as a tuple of finite action factors. Each
//! state variable owns a transition kernel conditioned on a declared set of
//! parent variables and action factors (by default its own previous value and
//! its own action factor), so the joint transition probability is the product
//! of the per-variable kernels. Rewards are a sum of sparse scoped components.
//!
//! Joint states and joint actions are enumerated lexicographically with the
//! first factor most significant; [`Indexer`] implements that mapping and is
//! shared by flattening, the solvers and the file format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of joint states produced by [`FactoredMDP::flatten`].
pub const DEFAULT_FLATTEN_CAP: usize = 1_000_000;

const ROW_SUM_TOL: f64 = 1e-12;

pub type JointState = Vec<usize>;
pub type JointAction = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVariable {
    pub name: String,
    pub domain: Vec<String>,
}

impl StateVariable {
    pub fn new(name: impl Into<String>, domain: &[&str]) -> Self {
        StateVariable {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn with_size(name: impl Into<String>, size: usize) -> Self {
        StateVariable {
            name: name.into(),
            domain: (0..size).map(|v| v.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionFactor {
    pub name: String,
    pub domain: Vec<String>,
}

impl ActionFactor {
    pub fn with_size(name: impl Into<String>, size: usize) -> Self {
        ActionFactor {
            name: name.into(),
            domain: (0..size).map(|v| v.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }
}

/// Conditional distribution of one state variable's next value.
///
/// Rows are indexed lexicographically by the current values of `parents`
/// followed by the values of `actions`; each row holds one probability per
/// value of the owning variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionKernel {
    pub parents: Vec<usize>,
    pub actions: Vec<usize>,
    pub table: Vec<f64>,
}

impl TransitionKernel {
    /// Kernel `T_i(s_i' | s_i, a_i)` for variable `var` driven by action factor
    /// `action`, given one row-stochastic matrix per action value.
    pub fn per_action(var: usize, action: usize, matrices: &[Vec<Vec<f64>>]) -> Self {
        // row order is (s_i, a_i): state is the more significant index
        let n_states = matrices.first().map_or(0, |m| m.len());
        let mut table = Vec::new();
        for s in 0..n_states {
            for m in matrices {
                table.extend_from_slice(&m[s]);
            }
        }
        TransitionKernel {
            parents: vec![var],
            actions: vec![action],
            table,
        }
    }
}

/// Variables and action factors a reward component reads.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    #[serde(default)]
    pub states: Vec<usize>,
    #[serde(default)]
    pub actions: Vec<usize>,
}

/// How a reward component maps its scoped values to a reward.
///
/// The predicate rules compare one-hot codes of the scoped state variables
/// against the code of `target`, so they read exactly like the bitwise
/// constructions they come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RewardRule {
    /// Dense table over (scoped states..., scoped actions...) in lexicographic order.
    Table { values: Vec<f64> },
    /// `reward` if the bitwise AND of all scoped codes equals the target code.
    AllInState { target: usize, reward: f64 },
    /// `reward` if (OR of scoped codes) AND target code equals the target code.
    AnyInState { target: usize, reward: f64 },
    /// `reward` if every group (positions into the scoped states) has at least
    /// one member in the target value; groups are combined with bitwise AND.
    AllGroupsCovered {
        groups: Vec<Vec<usize>>,
        target: usize,
        reward: f64,
    },
}

/// When a component reads its scoped state variables.
///
/// `Current` rewards the state the action is taken in. `Arrival` rewards the
/// state the transition lands in, so `r(s, a)` is the expectation of the rule
/// over the scoped variables' next values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTiming {
    #[default]
    Current,
    Arrival,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardComponent {
    pub scope: Scope,
    #[serde(default)]
    pub timing: RewardTiming,
    #[serde(flatten)]
    pub rule: RewardRule,
}

impl RewardComponent {
    pub fn table(states: Vec<usize>, actions: Vec<usize>, values: Vec<f64>) -> Self {
        RewardComponent {
            scope: Scope { states, actions },
            timing: RewardTiming::Current,
            rule: RewardRule::Table { values },
        }
    }

    pub fn predicate(states: Vec<usize>, rule: RewardRule) -> Self {
        RewardComponent {
            scope: Scope {
                states,
                actions: Vec::new(),
            },
            timing: RewardTiming::Current,
            rule,
        }
    }

    pub fn at_arrival(mut self) -> Self {
        self.timing = RewardTiming::Arrival;
        self
    }

    /// Evaluates the component on already-scoped values. `domains` are the
    /// sizes of the scoped state variables, `action_sizes` of the scoped action
    /// factors.
    fn evaluate_scoped(
        &self,
        states: &[usize],
        domains: &[usize],
        actions: &[usize],
        action_sizes: &[usize],
    ) -> f64 {
        match &self.rule {
            RewardRule::Table { values } => {
                let mut idx = 0usize;
                for (v, d) in states.iter().zip(domains) {
                    idx = idx * d + v;
                }
                for (v, d) in actions.iter().zip(action_sizes) {
                    idx = idx * d + v;
                }
                values[idx]
            }
            RewardRule::AllInState { target, reward } => {
                if states.is_empty() {
                    return 0.0;
                }
                let mut acc = u64::MAX;
                for (v, d) in states.iter().zip(domains) {
                    acc &= one_hot(*v, *d);
                }
                // all scoped domains share the target's code width
                if acc == one_hot(*target, domains[0]) {
                    *reward
                } else {
                    0.0
                }
            }
            RewardRule::AnyInState { target, reward } => {
                if states.is_empty() {
                    return 0.0;
                }
                let target_code = one_hot(*target, domains[0]);
                let codes: Vec<u64> = states
                    .iter()
                    .zip(domains)
                    .map(|(v, d)| one_hot(*v, *d))
                    .collect();
                let incidence: Vec<usize> = (0..codes.len()).collect();
                if or_and(&codes, &incidence, target_code) == target_code {
                    *reward
                } else {
                    0.0
                }
            }
            RewardRule::AllGroupsCovered {
                groups,
                target,
                reward,
            } => {
                if states.is_empty() || groups.is_empty() {
                    return 0.0;
                }
                let target_code = one_hot(*target, domains[0]);
                let codes: Vec<u64> = states
                    .iter()
                    .zip(domains)
                    .map(|(v, d)| one_hot(*v, *d))
                    .collect();
                let mut acc = u64::MAX;
                for g in groups {
                    acc &= or_and(&codes, g, target_code);
                }
                if acc == target_code {
                    *reward
                } else {
                    0.0
                }
            }
        }
    }
}

/// Initial distribution over joint states, either as independent per-variable
/// marginals or as an explicit joint vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialBelief {
    Product(Vec<Vec<f64>>),
    Joint(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredMDP {
    pub variables: Vec<StateVariable>,
    pub action_factors: Vec<ActionFactor>,
    pub transitions: Vec<TransitionKernel>,
    pub reward_components: Vec<RewardComponent>,
    pub discount: f64,
    #[serde(default)]
    pub initial_belief: Option<InitialBelief>,
}

/// Lexicographic mixed-radix indexer (first factor most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Indexer {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Indexer {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        let mut strides = vec![0; sizes.len()];
        let mut total = 1usize;
        for i in (0..sizes.len()).rev() {
            strides[i] = total;
            total = total
                .checked_mul(sizes[i])
                .ok_or_else(|| Error::capacity("joint space size overflows usize", usize::MAX))?;
        }
        Ok(Indexer {
            sizes: sizes.to_vec(),
            strides,
            total,
        })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn index(&self, values: &[usize]) -> usize {
        values
            .iter()
            .zip(&self.strides)
            .map(|(v, s)| v * s)
            .sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
        out
    }

    /// Iterates over all tuples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total).map(move |i| self.decode(i))
    }
}

impl FactoredMDP {
    pub fn state_sizes(&self) -> Vec<usize> {
        self.variables.iter().map(StateVariable::size).collect()
    }

    pub fn action_sizes(&self) -> Vec<usize> {
        self.action_factors.iter().map(ActionFactor::size).collect()
    }

    pub fn state_indexer(&self) -> Result<Indexer> {
        Indexer::new(&self.state_sizes())
    }

    pub fn action_indexer(&self) -> Result<Indexer> {
        Indexer::new(&self.action_sizes())
    }

    /// Checks every structural invariant: stochastic kernel rows, discount in
    /// (0,1), well-formed scopes and a valid initial belief.
    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::input(format!(
                "discount {} must lie strictly inside (0,1)",
                self.discount
            )));
        }
        if self.transitions.len() != self.variables.len() {
            return Err(Error::input(format!(
                "{} transition kernels for {} variables",
                self.transitions.len(),
                self.variables.len()
            )));
        }
        for v in &self.variables {
            if v.size() == 0 {
                return Err(Error::input(format!("variable {} has an empty domain", v.name)));
            }
        }
        for (i, f) in self.action_factors.iter().enumerate() {
            if f.size() == 0 {
                return Err(Error::input(format!("action factor {i} has an empty domain")));
            }
        }
        let ssz = self.state_sizes();
        let asz = self.action_sizes();
        for (i, k) in self.transitions.iter().enumerate() {
            self.check_indices(&k.parents, &k.actions, &format!("kernel {i}"))?;
            let rows: usize = k.parents.iter().map(|&p| ssz[p]).product::<usize>()
                * k.actions.iter().map(|&a| asz[a]).product::<usize>();
            if k.table.len() != rows * ssz[i] {
                return Err(Error::input(format!(
                    "kernel {i} has {} entries, expected {}",
                    k.table.len(),
                    rows * ssz[i]
                )));
            }
            for (r, row) in k.table.chunks(ssz[i]).enumerate() {
                if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::input(format!("kernel {i} row {r} has a negative entry")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::input(format!(
                        "kernel {i} row {r} sums to {sum}, not 1"
                    )));
                }
            }
        }
        for (c, comp) in self.reward_components.iter().enumerate() {
            let ctx = format!("reward component {c}");
            self.check_indices(&comp.scope.states, &comp.scope.actions, &ctx)?;
            match &comp.rule {
                RewardRule::Table { values } => {
                    let n: usize = comp.scope.states.iter().map(|&s| ssz[s]).product::<usize>()
                        * comp.scope.actions.iter().map(|&a| asz[a]).product::<usize>();
                    if values.len() != n {
                        return Err(Error::input(format!(
                            "{ctx}: table has {} entries, expected {n}",
                            values.len()
                        )));
                    }
                }
                RewardRule::AllInState { target, .. } | RewardRule::AnyInState { target, .. } => {
                    self.check_predicate_scope(&comp.scope.states, *target, &ctx)?;
                }
                RewardRule::AllGroupsCovered { groups, target, .. } => {
                    self.check_predicate_scope(&comp.scope.states, *target, &ctx)?;
                    for g in groups {
                        if g.iter().any(|&p| p >= comp.scope.states.len()) {
                            return Err(Error::input(format!("{ctx}: group position out of scope")));
                        }
                    }
                }
            }
        }
        if let Some(b0) = &self.initial_belief {
            match b0 {
                InitialBelief::Product(marginals) => {
                    if marginals.len() != self.variables.len() {
                        return Err(Error::input("initial belief has the wrong number of marginals"));
                    }
                    for (i, m) in marginals.iter().enumerate() {
                        if m.len() != ssz[i] {
                            return Err(Error::input(format!(
                                "initial marginal {i} has {} entries, expected {}",
                                m.len(),
                                ssz[i]
                            )));
                        }
                        check_distribution(m, &format!("initial marginal {i}"))?;
                    }
                }
                InitialBelief::Joint(b) => {
                    let n = self.state_indexer()?.total();
                    if b.len() != n {
                        return Err(Error::input(format!(
                            "joint initial belief has {} entries, expected {n}",
                            b.len()
                        )));
                    }
                    check_distribution(b, "joint initial belief")?;
                }
            }
        }
        Ok(())
    }

    fn check_indices(&self, states: &[usize], actions: &[usize], ctx: &str) -> Result<()> {
        if let Some(s) = states.iter().find(|&&s| s >= self.variables.len()) {
            return Err(Error::input(format!("{ctx}: state variable {s} out of range")));
        }
        if let Some(a) = actions.iter().find(|&&a| a >= self.action_factors.len()) {
            return Err(Error::input(format!("{ctx}: action factor {a} out of range")));
        }
        Ok(())
    }

    fn check_predicate_scope(&self, states: &[usize], target: usize, ctx: &str) -> Result<()> {
        let Some(&first) = states.first() else {
            return Ok(());
        };
        let width = self.variables[first].size();
        if width > 64 {
            return Err(Error::input(format!("{ctx}: one-hot codes limited to 64 values")));
        }
        if states.iter().any(|&s| self.variables[s].size() != width) {
            return Err(Error::input(format!("{ctx}: predicate scope mixes domain sizes")));
        }
        if target >= width {
            return Err(Error::input(format!("{ctx}: target {target} outside domain")));
        }
        Ok(())
    }

    fn check_dims(&self, s: &[usize], a: &[usize]) -> Result<()> {
        if s.len() != self.variables.len() {
            return Err(Error::input(format!(
                "joint state has {} entries, model has {} variables",
                s.len(),
                self.variables.len()
            )));
        }
        if a.len() != self.action_factors.len() {
            return Err(Error::input(format!(
                "joint action has {} entries, model has {} action factors",
                a.len(),
                self.action_factors.len()
            )));
        }
        for (i, (&v, var)) in s.iter().zip(&self.variables).enumerate() {
            if v >= var.size() {
                return Err(Error::input(format!("state value {v} out of range for variable {i}")));
            }
        }
        for (i, (&v, f)) in a.iter().zip(&self.action_factors).enumerate() {
            if v >= f.size() {
                return Err(Error::input(format!("action value {v} out of range for factor {i}")));
            }
        }
        Ok(())
    }

    /// Next-value distribution of variable `var` given the joint state and action.
    pub fn kernel_row(&self, var: usize, s: &[usize], a: &[usize]) -> &[f64] {
        let k = &self.transitions[var];
        let mut row = 0usize;
        for &p in &k.parents {
            row = row * self.variables[p].size() + s[p];
        }
        for &f in &k.actions {
            row = row * self.action_factors[f].size() + a[f];
        }
        let n = self.variables[var].size();
        &k.table[row * n..(row + 1) * n]
    }

    /// `∏_i T_i(s2_i | parents(s), a)`.
    pub fn joint_transition_prob(&self, s: &[usize], a: &[usize], s2: &[usize]) -> Result<f64> {
        self.check_dims(s, a)?;
        self.check_dims(s2, a)?;
        Ok((0..self.variables.len())
            .map(|i| self.kernel_row(i, s, a)[s2[i]])
            .product())
    }

    /// Sum of all reward components evaluated on their scopes.
    pub fn total_reward(&self, s: &[usize], a: &[usize]) -> Result<f64> {
        self.check_dims(s, a)?;
        Ok(self.reward_unchecked(s, a))
    }

    fn reward_unchecked(&self, s: &[usize], a: &[usize]) -> f64 {
        let mut total = 0.0;
        let mut sv = Vec::new();
        let mut sd = Vec::new();
        let mut av = Vec::new();
        let mut ad = Vec::new();
        for comp in &self.reward_components {
            sv.clear();
            sd.clear();
            av.clear();
            ad.clear();
            for &i in &comp.scope.states {
                sv.push(s[i]);
                sd.push(self.variables[i].size());
            }
            for &j in &comp.scope.actions {
                av.push(a[j]);
                ad.push(self.action_factors[j].size());
            }
            total += match comp.timing {
                RewardTiming::Current => comp.evaluate_scoped(&sv, &sd, &av, &ad),
                RewardTiming::Arrival => {
                    // expectation over the scoped variables' next values
                    let rows: Vec<&[f64]> = comp
                        .scope
                        .states
                        .iter()
                        .map(|&i| self.kernel_row(i, s, a))
                        .collect();
                    let mut expected = 0.0;
                    for next in Indexer::new(&sd).expect("scope fits").iter() {
                        let p: f64 = next.iter().zip(&rows).map(|(&v, r)| r[v]).product();
                        if p != 0.0 {
                            expected += p * comp.evaluate_scoped(&next, &sd, &av, &ad);
                        }
                    }
                    expected
                }
            };
        }
        total
    }

    /// Dense joint-space MDP over the full action space.
    pub fn flatten(&self, cap: usize) -> Result<ExplicitMDP> {
        let allowed: Vec<Vec<usize>> = self
            .action_factors
            .iter()
            .map(|f| (0..f.size()).collect())
            .collect();
        Ok(self.flatten_restricted(&allowed, cap)?.0)
    }

    /// Dense joint-space MDP whose actions are the lexicographic product of the
    /// `allowed` values of each action factor. Returns the MDP together with
    /// the joint action tuple behind each flat action index.
    pub fn flatten_restricted(
        &self,
        allowed: &[Vec<usize>],
        cap: usize,
    ) -> Result<(ExplicitMDP, Vec<JointAction>)> {
        self.validate()?;
        if allowed.len() != self.action_factors.len() {
            return Err(Error::input("allowed action sets do not match action factors"));
        }
        for (i, vals) in allowed.iter().enumerate() {
            if vals.is_empty() {
                return Err(Error::input(format!("action factor {i} has no allowed value")));
            }
            if vals.iter().any(|&v| v >= self.action_factors[i].size()) {
                return Err(Error::input(format!("allowed value out of range for factor {i}")));
            }
        }
        let sidx = self.state_indexer()?;
        let n = sidx.total();
        if n > cap {
            return Err(Error::capacity(format!("flatten: {n} joint states"), cap));
        }
        let choice_idx = Indexer::new(&allowed.iter().map(Vec::len).collect::<Vec<_>>())?;
        let actions: Vec<JointAction> = choice_idx
            .iter()
            .map(|c| c.iter().enumerate().map(|(f, &k)| allowed[f][k]).collect())
            .collect();
        let na = actions.len();
        let cells = n
            .checked_mul(na)
            .and_then(|x| x.checked_mul(n))
            .filter(|&x| x <= cap.saturating_mul(64).max(cap))
            .ok_or_else(|| Error::capacity("flatten: dense transition tensor", cap))?;
        let mut transitions = vec![0.0; cells];
        let mut rewards = vec![0.0; n * na];
        let sizes = self.state_sizes();
        let mut joint = Vec::with_capacity(n);
        for si in 0..n {
            let s = sidx.decode(si);
            for (ai, a) in actions.iter().enumerate() {
                rewards[si * na + ai] = self.reward_unchecked(&s, a);
                // Kronecker product of per-variable rows, first variable most significant.
                joint.clear();
                joint.push(1.0);
                for (var, &size) in sizes.iter().enumerate() {
                    let row = self.kernel_row(var, &s, a);
                    let mut next = Vec::with_capacity(joint.len() * size);
                    for &p in &joint {
                        for &q in row {
                            next.push(p * q);
                        }
                    }
                    joint = next;
                }
                let base = (si * na + ai) * n;
                transitions[base..base + n].copy_from_slice(&joint);
            }
        }
        let mdp = ExplicitMDP {
            n_states: n,
            n_actions: na,
            transitions,
            rewards,
            discount: self.discount,
        };
        Ok((mdp, actions))
    }

    /// Initial belief as an explicit joint vector. Absent beliefs default to
    /// uniform over joint states.
    pub fn initial_joint_belief(&self, cap: usize) -> Result<Vec<f64>> {
        let idx = self.state_indexer()?;
        let n = idx.total();
        if n > cap {
            return Err(Error::capacity(format!("initial belief over {n} states"), cap));
        }
        match &self.initial_belief {
            None => Ok(vec![1.0 / n as f64; n]),
            Some(InitialBelief::Joint(b)) => Ok(b.clone()),
            Some(InitialBelief::Product(marginals)) => {
                let mut joint = vec![1.0];
                for m in marginals {
                    let mut next = Vec::with_capacity(joint.len() * m.len());
                    for &p in &joint {
                        for &q in m {
                            next.push(p * q);
                        }
                    }
                    joint = next;
                }
                Ok(joint)
            }
        }
    }

    /// Variables that can influence the reward, plus `extra` (e.g. observed
    /// variables), closed under kernel parents.
    pub fn relevant_variables(&self, extra: &[usize]) -> Vec<bool> {
        let mut keep = vec![false; self.variables.len()];
        let mut stack: Vec<usize> = self
            .reward_components
            .iter()
            .flat_map(|c| c.scope.states.iter().copied())
            .chain(extra.iter().copied())
            .collect();
        while let Some(v) = stack.pop() {
            if !keep[v] {
                keep[v] = true;
                stack.extend(self.transitions[v].parents.iter().copied());
            }
        }
        keep
    }

    /// Projects the model onto the variables marked in `keep`. Action factors
    /// read by no kept kernel and no reward component are dropped. The caller
    /// must pass a parent-closed set containing every reward scope (see
    /// [`relevant_variables`](Self::relevant_variables)); the projected model then
    /// has the same optimal values as the original.
    pub fn restrict(&self, keep: &[bool]) -> Result<Restriction> {
        if keep.len() != self.variables.len() {
            return Err(Error::input("keep mask length mismatch"));
        }
        for (v, k) in self.transitions.iter().enumerate() {
            if keep[v] && k.parents.iter().any(|&p| !keep[p]) {
                return Err(Error::input(format!("kept variable {v} has an eliminated parent")));
            }
        }
        for c in &self.reward_components {
            if c.scope.states.iter().any(|&s| !keep[s]) {
                return Err(Error::input("reward component reads an eliminated variable"));
            }
        }
        let var_map: Vec<Option<usize>> = remap(keep);
        let mut action_used = vec![false; self.action_factors.len()];
        for (v, k) in self.transitions.iter().enumerate() {
            if keep[v] {
                for &a in &k.actions {
                    action_used[a] = true;
                }
            }
        }
        for c in &self.reward_components {
            for &a in &c.scope.actions {
                action_used[a] = true;
            }
        }
        let action_map = remap(&action_used);
        let map_states = |xs: &[usize]| -> Vec<usize> { xs.iter().map(|&x| var_map[x].unwrap()).collect() };
        let map_actions =
            |xs: &[usize]| -> Vec<usize> { xs.iter().map(|&x| action_map[x].unwrap()).collect() };
        let variables = self
            .variables
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v.clone())
            .collect();
        let action_factors = self
            .action_factors
            .iter()
            .zip(&action_used)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f.clone())
            .collect();
        let transitions = self
            .transitions
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(t, _)| TransitionKernel {
                parents: map_states(&t.parents),
                actions: map_actions(&t.actions),
                table: t.table.clone(),
            })
            .collect();
        let reward_components = self
            .reward_components
            .iter()
            .map(|c| RewardComponent {
                scope: Scope {
                    states: map_states(&c.scope.states),
                    actions: map_actions(&c.scope.actions),
                },
                timing: c.timing,
                rule: c.rule.clone(),
            })
            .collect();
        let initial_belief = match &self.initial_belief {
            None => None,
            Some(InitialBelief::Product(m)) => Some(InitialBelief::Product(
                m.iter()
                    .zip(keep)
                    .filter(|(_, &k)| k)
                    .map(|(x, _)| x.clone())
                    .collect(),
            )),
            Some(InitialBelief::Joint(b)) => {
                let full = self.state_indexer()?;
                let kept_sizes: Vec<usize> = self
                    .variables
                    .iter()
                    .zip(keep)
                    .filter(|(_, &k)| k)
                    .map(|(v, _)| v.size())
                    .collect();
                let sub = Indexer::new(&kept_sizes)?;
                let mut marg = vec![0.0; sub.total()];
                for (i, p) in b.iter().enumerate() {
                    let s = full.decode(i);
                    let kept: Vec<usize> = s
                        .iter()
                        .zip(keep)
                        .filter(|(_, &k)| k)
                        .map(|(v, _)| *v)
                        .collect();
                    marg[sub.index(&kept)] += p;
                }
                Some(InitialBelief::Joint(marg))
            }
        };
        let model = FactoredMDP {
            variables,
            action_factors,
            transitions,
            reward_components,
            discount: self.discount,
            initial_belief,
        };
        Ok(Restriction {
            model,
            var_map,
            action_map,
        })
    }
}

/// Result of [`FactoredMDP::restrict`]: the projected model and index maps
/// from original variables/action factors to projected ones.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub model: FactoredMDP,
    pub var_map: Vec<Option<usize>>,
    pub action_map: Vec<Option<usize>>,
}

fn remap(mask: &[bool]) -> Vec<Option<usize>> {
    let mut next = 0;
    mask.iter()
        .map(|&k| {
            if k {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect()
}

pub(crate) fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::input(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

/// Joint-space MDP with dense tensors. `transitions` is laid out as
/// `[state][action][next_state]`, `rewards` as `[state][action]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitMDP {
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub discount: f64,
}

impl ExplicitMDP {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        let m = ExplicitMDP {
            n_states,
            n_actions,
            transitions,
            rewards,
            discount,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::input(format!("discount {} outside (0,1)", self.discount)));
        }
        if self.n_states == 0 || self.n_actions == 0 {
            return Err(Error::input("explicit MDP needs at least one state and one action"));
        }
        if self.transitions.len() != self.n_states * self.n_actions * self.n_states {
            return Err(Error::input("transition tensor has the wrong size"));
        }
        if self.rewards.len() != self.n_states * self.n_actions {
            return Err(Error::input("reward table has the wrong size"));
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.row(s, a);
                if row.iter().any(|p| *p < 0.0 || !p.is_finite()) {
                    return Err(Error::input(format!("row ({s},{a}) has a negative entry")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::input(format!("row ({s},{a}) sums to {sum}")));
                }
            }
        }
        Ok(())
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let n = self.n_states;
        let base = (s * self.n_actions + a) * n;
        &self.transitions[base..base + n]
    }

    pub fn prob(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.row(s, a)[s2]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.n_actions + a]
    }
}

// ---------------------------------------------------------------------------
// One-hot state codes
// ---------------------------------------------------------------------------

/// 4-bit codes of the four-state gadget MDPs.
pub const CODE_A: u64 = 0b1000;
pub const CODE_B: u64 = 0b0100;
pub const CODE_C: u64 = 0b0010;
pub const CODE_D: u64 = 0b0001;

/// One-hot code of `value` in a domain of `size` values; value 0 maps to the
/// most significant bit (A = 1000 for a four-value domain).
pub fn one_hot(value: usize, size: usize) -> u64 {
    debug_assert!(value < size && size <= 64);
    1u64 << (size - 1 - value)
}

/// Inverse of [`one_hot`]; `None` unless exactly one in-range bit is set.
pub fn decode_one_hot(code: u64, size: usize) -> Option<usize> {
    if code.count_ones() != 1 || code >= (1u128 << size) as u64 && size < 64 {
        return None;
    }
    Some(size - 1 - code.trailing_zeros() as usize)
}

pub fn encode_state(s: &[usize], sizes: &[usize]) -> Vec<u64> {
    s.iter().zip(sizes).map(|(&v, &d)| one_hot(v, d)).collect()
}

pub fn decode_state(codes: &[u64], sizes: &[usize]) -> Result<JointState> {
    if codes.len() != sizes.len() {
        return Err(Error::input("code vector length mismatch"));
    }
    codes
        .iter()
        .zip(sizes)
        .map(|(&c, &d)| {
            decode_one_hot(c, d).ok_or_else(|| Error::input(format!("{c:#b} is not a one-hot code")))
        })
        .collect()
}

fn or_and(codes: &[u64], incidence: &[usize], mask: u64) -> u64 {
    incidence.iter().fold(0u64, |acc, &j| acc | codes[j]) & mask
}

/// `(OR_{j in incidence} code_j) AND 0010`: equals 0010 exactly when some
/// incident variable sits in state C. An element covered by no set yields 0000.
pub fn tilde_state(layer1: &[u64], incidence: &[usize]) -> Result<u64> {
    if let Some(j) = incidence.iter().find(|&&j| j >= layer1.len()) {
        return Err(Error::input(format!("incidence references missing layer-1 index {j}")));
    }
    Ok(or_and(layer1, incidence, CODE_C))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin_mdp() -> FactoredMDP {
        let half = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        FactoredMDP {
            variables: vec![StateVariable::with_size("x", 2), StateVariable::with_size("y", 2)],
            action_factors: vec![ActionFactor::with_size("a", 1), ActionFactor::with_size("b", 1)],
            transitions: vec![
                TransitionKernel::per_action(0, 0, &[half.clone()]),
                TransitionKernel::per_action(1, 1, &[half]),
            ],
            reward_components: vec![],
            discount: 0.9,
            initial_belief: None,
        }
    }

    #[test]
    fn independent_factors_multiply() {
        let m = coin_mdp();
        let p = m.joint_transition_prob(&[0, 1], &[0, 0], &[1, 1]).unwrap();
        assert_eq!(p, 0.25);
    }

    #[test]
    fn empty_reward_is_zero() {
        let m = coin_mdp();
        assert_eq!(m.total_reward(&[0, 0], &[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let m = coin_mdp();
        assert!(matches!(
            m.joint_transition_prob(&[0], &[0, 0], &[0, 0]),
            Err(Error::Input(_))
        ));
        assert!(matches!(m.total_reward(&[0, 2], &[0, 0]), Err(Error::Input(_))));
    }

    #[test]
    fn tilde_examples() {
        assert_eq!(tilde_state(&[CODE_C, CODE_C], &[0, 1]).unwrap(), CODE_C);
        assert_eq!(tilde_state(&[CODE_A, CODE_C], &[0, 1]).unwrap(), 0b0010);
        assert_eq!(tilde_state(&[CODE_A, CODE_B], &[0, 1]).unwrap(), 0b0000);
        assert_eq!(tilde_state(&[CODE_C], &[]).unwrap(), 0);
        assert!(tilde_state(&[CODE_C], &[3]).is_err());
    }

    #[test]
    fn gadget_codes() {
        assert_eq!(one_hot(0, 4), CODE_A);
        assert_eq!(one_hot(1, 4), CODE_B);
        assert_eq!(one_hot(2, 4), CODE_C);
        assert_eq!(one_hot(3, 4), CODE_D);
        assert_eq!(decode_one_hot(0b0110, 4), None);
        assert_eq!(decode_one_hot(0, 4), None);
        assert_eq!(decode_one_hot(0b10000, 4), None);
    }

    #[test]
    fn code_roundtrip_all_states() {
        let sizes = [4, 4, 4];
        let idx = Indexer::new(&sizes).unwrap();
        for s in idx.iter() {
            let codes = encode_state(&s, &sizes);
            assert!(codes.iter().all(|c| c.count_ones() == 1));
            assert_eq!(decode_state(&codes, &sizes).unwrap(), s);
        }
    }

    #[test]
    fn indexer_is_lexicographic() {
        let idx = Indexer::new(&[2, 3]).unwrap();
        let all: Vec<_> = idx.iter().collect();
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        assert_eq!(idx.index(&[1, 2]), 5);
    }

    #[test]
    fn validate_rejects_bad_rows_and_discount() {
        let mut m = coin_mdp();
        m.transitions[0].table[0] = 0.6;
        assert!(m.validate().is_err());
        let mut m = coin_mdp();
        m.discount = 1.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn flatten_cap() {
        let m = coin_mdp();
        assert!(matches!(m.flatten(3), Err(Error::Capacity { .. })));
        assert_eq!(m.flatten(4).unwrap().n_states, 4);
    }

    #[test]
    fn restrict_marginalizes_joint_belief() {
        let mut m = coin_mdp();
        m.reward_components
            .push(RewardComponent::table(vec![0], vec![], vec![1.0, 0.0]));
        m.initial_belief = Some(InitialBelief::Joint(vec![0.1, 0.2, 0.3, 0.4]));
        let keep = m.relevant_variables(&[]);
        assert_eq!(keep, vec![true, false]);
        let r = m.restrict(&keep).unwrap();
        assert_eq!(r.model.variables.len(), 1);
        assert_eq!(r.model.action_factors.len(), 1);
        match r.model.initial_belief.unwrap() {
            InitialBelief::Joint(b) => {
                assert!((b[0] - 0.3).abs() < 1e-15 && (b[1] - 0.7).abs() < 1e-15)
            }
            _ => panic!("expected joint belief"),
        }
    }
}
