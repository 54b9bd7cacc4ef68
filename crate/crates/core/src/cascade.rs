//! Independent-cascade fault propagation on micro-grid networks and the
//! actuator (islanding switch) placement problem built on top of it.
//!
//! Every node earns +1 per step while healthy. A faulty node makes one
//! activation attempt on each healthy, non-islanded neighbour, succeeding
//! with probability `p`. Islanding happens at `t = 0`: an islanded node is
//! cut from all its edges, so it can neither be infected nor spread a fault
//! it already carries.
//!
//! Monte Carlo returns use the live-edge form of the cascade: each rollout
//! pre-samples which directed edges would transmit, and the infection time
//! of a node is its BFS distance from the faulty seeds over live edges.
//! Every placement evaluated against the same [`AsenProblem`] shares those
//! samples, so comparisons between placements are paired.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::SubsetObjective;

/// Attachment count used by [`gen_ba`].
pub const BA_ATTACH: usize = 2;
pub const DEFAULT_ROLLOUTS: usize = 2000;
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-6;
pub const DEFAULT_INFLUENCE: f64 = 0.3;
pub const DEFAULT_ASEN_GAMMA: f64 = 0.95;

/// Undirected network with a uniform per-direction influence probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeNetwork {
    pub nodes: usize,
    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub influence: f64,
}

impl CascadeNetwork {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>, influence: f64) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        norm.sort_unstable();
        norm.dedup();
        let net = CascadeNetwork {
            nodes,
            edges: norm,
            influence,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.influence) {
            return Err(Error::input(format!(
                "influence probability {} outside [0, 1]",
                self.influence
            )));
        }
        for &(u, v) in &self.edges {
            if u >= self.nodes || v >= self.nodes {
                return Err(Error::input(format!("edge ({u}, {v}) references a missing node")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at node {u}")));
            }
        }
        Ok(())
    }

    /// Neighbour lists in increasing order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.nodes
    }
}

/// Erdős–Rényi `G(n, p_edge)`: every unordered pair is an edge independently.
pub fn gen_er(n: usize, p_edge: f64, influence: f64, seed: u64) -> Result<CascadeNetwork> {
    if n == 0 {
        return Err(Error::input("ER graph needs at least one node"));
    }
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(Error::input(format!("edge probability {p_edge} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p_edge) {
                edges.push((u, v));
            }
        }
    }
    CascadeNetwork::new(n, edges, influence)
}

/// Barabási–Albert graph with [`BA_ATTACH`] edges per new node.
pub fn gen_ba(n: usize, influence: f64, seed: u64) -> Result<CascadeNetwork> {
    gen_ba_with(n, BA_ATTACH, influence, seed)
}

/// Preferential attachment: the first `m_attach` nodes form an edgeless
/// core, and each later node links to `m_attach` distinct earlier nodes
/// drawn proportionally to degree (the first new node links to the whole
/// core). The result is connected with `m_attach · (n − m_attach)` edges.
pub fn gen_ba_with(n: usize, m_attach: usize, influence: f64, seed: u64) -> Result<CascadeNetwork> {
    if m_attach == 0 || n <= m_attach {
        return Err(Error::input(format!(
            "BA graph needs n > m_attach ≥ 1 (got n = {n}, m_attach = {m_attach})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m_attach * (n - m_attach));
    // every node appears once per incident edge
    let mut repeated: Vec<usize> = Vec::new();
    let mut targets: Vec<usize> = (0..m_attach).collect();
    for source in m_attach..n {
        for &t in &targets {
            edges.push((t, source));
            repeated.push(t);
            repeated.push(source);
        }
        targets.clear();
        while targets.len() < m_attach {
            let pick = repeated[rng.gen_range(0..repeated.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        targets.sort_unstable();
    }
    CascadeNetwork::new(n, edges, influence)
}

/// One simulated cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeTrajectory {
    /// Healthy-node count at each step, starting at `t = 0`.
    pub healthy: Vec<usize>,
    /// Nodes that became faulty at each step; entry 0 is the seed set.
    pub newly_faulty: Vec<Vec<usize>>,
    /// Step after which nothing changes.
    pub termination_step: usize,
}

fn check_nodes(net: &CascadeNetwork, set: &[usize], what: &str) -> Result<()> {
    match set.iter().find(|&&v| v >= net.nodes) {
        Some(v) => Err(Error::input(format!("{what} node {v} not in the network"))),
        None => Ok(()),
    }
}

fn mask(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Step-by-step independent cascade with fresh coin flips for every
/// activation attempt.
pub fn simulate_cascade(
    net: &CascadeNetwork,
    faulty0: &[usize],
    islanded: &[usize],
    seed: u64,
) -> Result<CascadeTrajectory> {
    check_nodes(net, faulty0, "faulty")?;
    check_nodes(net, islanded, "islanded")?;
    let adj = net.adjacency();
    let cut = mask(net.nodes, islanded);
    let mut faulty = mask(net.nodes, faulty0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frontier: Vec<usize> = (0..net.nodes).filter(|&v| faulty[v]).collect();
    let mut healthy = vec![net.nodes - frontier.len()];
    let mut newly_faulty = vec![frontier.clone()];
    loop {
        let mut next = Vec::new();
        for &u in &frontier {
            if cut[u] {
                continue;
            }
            for &v in &adj[u] {
                if !faulty[v] && !cut[v] && rng.gen_bool(net.influence) {
                    faulty[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        healthy.push(healthy.last().unwrap() - next.len());
        newly_faulty.push(next.clone());
        frontier = next;
    }
    Ok(CascadeTrajectory {
        termination_step: healthy.len() - 1,
        healthy,
        newly_faulty,
    })
}

/// Live out-edges of one rollout in compressed-row form.
#[derive(Clone, Debug)]
struct LiveEdges {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl LiveEdges {
    fn sample(adj: &[Vec<usize>], p: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in adj {
            for &v in list {
                if rng.gen_bool(p) {
                    targets.push(v as u32);
                }
            }
            offsets.push(targets.len() as u32);
        }
        LiveEdges { offsets, targets }
    }

    fn out(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }

    /// Number of nodes first reached at each BFS depth (depth 0 = seeds).
    fn layers(&self, seeds: &[usize], cut: &[bool], scratch: &mut Vec<bool>) -> Vec<usize> {
        scratch.clear();
        scratch.resize(self.offsets.len() - 1, false);
        let mut frontier: Vec<usize> = Vec::new();
        for &s in seeds {
            if !scratch[s] {
                scratch[s] = true;
                frontier.push(s);
            }
        }
        let mut layers = vec![frontier.len()];
        let mut next = Vec::new();
        while !frontier.is_empty() {
            next.clear();
            for &u in &frontier {
                if cut[u] {
                    continue;
                }
                for &v in self.out(u) {
                    let v = v as usize;
                    if !scratch[v] && !cut[v] {
                        scratch[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layers.push(next.len());
            std::mem::swap(&mut frontier, &mut next);
        }
        layers
    }
}

fn rollout_rng(seed: u64, rollout: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rollout as u64);
    rng
}

fn sample_rollouts(net: &CascadeNetwork, rollouts: usize, seed: u64) -> Vec<LiveEdges> {
    let adj = net.adjacency();
    (0..rollouts)
        .into_par_iter()
        .map(|r| LiveEdges::sample(&adj, net.influence, &mut rollout_rng(seed, r)))
        .collect()
}

/// Greedy influence maximization: repeatedly adds the node with the largest
/// Monte Carlo marginal expected spread (final faulty count). All candidates
/// are scored on the same live-edge samples; ties go to the lowest index.
pub fn influence_max_greedy(
    net: &CascadeNetwork,
    seed_count: usize,
    rollouts: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if seed_count > net.nodes {
        return Err(Error::input(format!(
            "seed count {seed_count} exceeds node count {}",
            net.nodes
        )));
    }
    if rollouts == 0 {
        return Err(Error::input("influence maximization needs at least one rollout"));
    }
    let samples = sample_rollouts(net, rollouts, seed);
    let no_cut = vec![false; net.nodes];
    let spread = |set: &[usize]| -> f64 {
        let totals: Vec<usize> = samples
            .par_iter()
            .map_init(Vec::new, |scratch, s| s.layers(set, &no_cut, scratch).iter().sum())
            .collect();
        totals.iter().sum::<usize>() as f64 / rollouts as f64
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(seed_count);
    for _ in 0..seed_count {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..net.nodes).filter(|v| !chosen.contains(v)) {
            let mut trial = chosen.clone();
            trial.push(v);
            let value = spread(&trial);
            if best.map_or(true, |(_, b)| value > b + 1e-12 * b.abs().max(1.0)) {
                best = Some((v, value));
            }
        }
        chosen.push(best.expect("seed_count <= nodes leaves a candidate").0);
    }
    Ok(chosen)
}

/// Actuator placement on a cascade network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsenProblem {
    pub network: CascadeNetwork,
    /// Initially faulty nodes.
    pub faulty: Vec<usize>,
    /// Number of islanding switches.
    pub budget: usize,
    pub discount: f64,
    pub rollouts: usize,
    pub seed: u64,
    pub truncation_eps: f64,
}

impl AsenProblem {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        check_nodes(&self.network, &self.faulty, "faulty")?;
        if self.budget > self.network.nodes {
            return Err(Error::input(format!(
                "budget {} exceeds node count {}",
                self.budget, self.network.nodes
            )));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::input(format!("discount {} outside (0, 1)", self.discount)));
        }
        if self.rollouts == 0 {
            return Err(Error::input("at least one rollout is required"));
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps < 1.0) {
            return Err(Error::input("truncation epsilon must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Smallest `T` with `γ^T < truncation_eps`.
    pub fn horizon(&self) -> usize {
        (self.truncation_eps.ln() / self.discount.ln()).floor() as usize + 1
    }
}

/// Discounted return `Σ_t γ^t · healthy_t` of one cascade given its layer
/// sizes. A cascade still spreading at `horizon` is truncated there; one
/// that stopped earlier gets the exact geometric tail.
fn discounted_return(nodes: usize, layers: &[usize], gamma: f64, horizon: usize) -> f64 {
    let mut faulty = 0usize;
    let mut total = 0.0;
    let mut weight = 1.0;
    for (t, &new) in layers.iter().enumerate() {
        if t >= horizon {
            return total;
        }
        faulty += new;
        total += weight * (nodes - faulty) as f64;
        weight *= gamma;
    }
    // after termination the healthy count is constant: exact geometric tail
    total + weight * (nodes - faulty) as f64 / (1.0 - gamma)
}

/// Monte Carlo estimate of the discounted healthy-node return with the
/// given nodes islanded at `t = 0`.
pub fn asen_discounted_return(problem: &AsenProblem, islanded: &[usize]) -> Result<f64> {
    asen_objective(problem)?.evaluate(islanded)
}

/// Subset evaluator over islanding placements. The live-edge samples are
/// drawn once from `problem.seed`, so every placement is scored on the
/// same rollouts.
pub struct AsenObjective {
    problem: AsenProblem,
    samples: Vec<LiveEdges>,
}

pub fn asen_objective(problem: &AsenProblem) -> Result<AsenObjective> {
    problem.validate()?;
    Ok(AsenObjective {
        samples: sample_rollouts(&problem.network, problem.rollouts, problem.seed),
        problem: problem.clone(),
    })
}

impl AsenObjective {
    pub fn problem(&self) -> &AsenProblem {
        &self.problem
    }
}

impl SubsetObjective for AsenObjective {
    fn evaluate(&self, islanded: &[usize]) -> Result<f64> {
        let p = &self.problem;
        check_nodes(&p.network, islanded, "islanded")?;
        if islanded.len() > p.budget {
            return Err(Error::input(format!(
                "{} islanded nodes exceed budget {}",
                islanded.len(),
                p.budget
            )));
        }
        let cut = mask(p.network.nodes, islanded);
        let horizon = p.horizon();
        let returns: Vec<f64> = self
            .samples
            .par_iter()
            .map_init(Vec::new, |scratch, s| {
                let layers = s.layers(&p.faulty, &cut, scratch);
                discounted_return(p.network.nodes, &layers, p.discount, horizon)
            })
            .collect();
        // fixed-order accumulation keeps the estimate bitwise reproducible
        Ok(returns.iter().sum::<f64>() / returns.len() as f64)
    }
}

/// Uniformly random `budget`-subset of `candidates`, sorted.
pub fn random_select_baseline(candidates: &[usize], budget: usize, seed: u64) -> Result<Vec<usize>> {
    if budget > candidates.len() {
        return Err(Error::input(format!(
            "budget {budget} exceeds {} candidates",
            candidates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick: Vec<usize> = candidates.choose_multiple(&mut rng, budget).copied().collect();
    pick.sort_unstable();
    Ok(pick)
}

/// Writes one `u v` line per edge.
pub fn write_edge_list<W: Write>(net: &CascadeNetwork, mut out: W) -> Result<()> {
    writeln!(out, "# nodes {}", net.nodes)?;
    for &(u, v) in &net.edges {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Reads an edge list of `u v` lines (0-based). Blank lines and `#`
/// comments are skipped; a `# nodes N` comment fixes the node count,
/// otherwise it is one more than the largest index seen.
pub fn read_edge_list<R: BufRead>(input: R, influence: f64) -> Result<CascadeNetwork> {
    let mut nodes: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if let Some(comment) = text.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix("nodes") {
                nodes = Some(count.trim().parse().map_err(|e| Error::Parse {
                    context: format!("edge list line {}", lineno + 1),
                    message: format!("bad node count: {e}"),
                })?);
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let parts: Vec<&str> = text.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                context: format!("edge list line {}", lineno + 1),
                message: format!("bad node index {s:?}: {e}"),
            })
        };
        if parts.len() != 2 {
            return Err(Error::Parse {
                context: format!("edge list line {}", lineno + 1),
                message: format!("expected two node indices, found {:?}", text),
            });
        }
        edges.push((parse(parts[0])?, parse(parts[1])?));
    }
    let seen = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    CascadeNetwork::new(nodes.unwrap_or(seen), edges, influence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(p: f64) -> CascadeNetwork {
        CascadeNetwork::new(3, vec![(0, 1), (1, 2)], p).unwrap()
    }

    fn problem(net: CascadeNetwork, faulty: Vec<usize>, budget: usize, gamma: f64) -> AsenProblem {
        AsenProblem {
            network: net,
            faulty,
            budget,
            discount: gamma,
            rollouts: 50,
            seed: 7,
            truncation_eps: DEFAULT_TRUNCATION_EPS,
        }
    }

    #[test]
    fn deterministic_path_cascade() {
        let t = simulate_cascade(&path(1.0), &[0], &[], 1).unwrap();
        assert_eq!(t.healthy, vec![2, 1, 0]);
        assert_eq!(t.termination_step, 2);
        let t = simulate_cascade(&path(1.0), &[0], &[1], 1).unwrap();
        assert_eq!(t.healthy, vec![2]);
        let t = simulate_cascade(&path(1.0), &[], &[], 1).unwrap();
        assert_eq!(t.healthy.len(), 1);
    }

    #[test]
    fn closed_form_returns() {
        let edgeless = CascadeNetwork::new(3, vec![], 0.3).unwrap();
        let v = asen_discounted_return(&problem(edgeless, vec![0], 0, 0.5), &[]).unwrap();
        assert!((v - 4.0).abs() < 1e-5, "{v}");
        let v = asen_discounted_return(&problem(path(1.0), vec![0], 1, 0.5), &[1]).unwrap();
        assert!((v - 4.0).abs() < 1e-5, "{v}");
        let v = asen_discounted_return(&problem(path(1.0), vec![0, 1, 2], 0, 0.5), &[]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn discounted_return_matches_direct_sum() {
        // layers 1, 2, 1 of 6 nodes: healthy 5, 3, 2, 2, ...
        let g: f64 = 0.9;
        let direct = 5.0 + g * 3.0 + g * g * 2.0 / (1.0 - g);
        let v = discounted_return(6, &[1, 2, 1], g, 1000);
        assert!((v - direct).abs() < 1e-6 * direct);
    }

    #[test]
    fn ba_graph_shape() {
        let net = gen_ba(30, 0.3, 5).unwrap();
        assert_eq!(net.edges.len(), BA_ATTACH * (30 - BA_ATTACH));
        assert!(net.is_connected());
        assert_eq!(net, gen_ba(30, 0.3, 5).unwrap());
    }

    #[test]
    fn er_extremes() {
        assert!(gen_er(6, 0.0, 0.3, 1).unwrap().edges.is_empty());
        assert_eq!(gen_er(6, 1.0, 0.3, 1).unwrap().edges.len(), 15);
    }

    #[test]
    fn edge_list_round_trip() {
        let net = gen_er(8, 0.4, 0.3, 2).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&net, &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice(), 0.3).unwrap();
        assert_eq!(back, net);
        let err = read_edge_list("0 x\n".as_bytes(), 0.3).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }
}
