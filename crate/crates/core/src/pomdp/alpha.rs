use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::lp;
use crate::error::Result;

/// Linear value-function piece `b ↦ α · b`, tagged with the action of the
/// policy tree it represents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub values: Vec<f64>,
    pub action: usize,
}

impl AlphaVector {
    pub fn new(values: Vec<f64>, action: usize) -> Self {
        AlphaVector { values, action }
    }

    pub fn dot(&self, b: &[f64]) -> f64 {
        self.values.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

/// Piecewise-linear convex value function `V(b) = max_α α · b`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValueFunctionSet {
    pub vectors: Vec<AlphaVector>,
}

impl ValueFunctionSet {
    pub fn value(&self, b: &[f64]) -> f64 {
        self.vectors
            .iter()
            .map(|a| a.dot(b))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best(&self, b: &[f64]) -> Option<&AlphaVector> {
        let mut best: Option<(&AlphaVector, f64)> = None;
        for a in &self.vectors {
            let v = a.dot(b);
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((a, v));
            }
        }
        best.map(|(a, _)| a)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PruneStats {
    pub lp_calls: usize,
}

/// Default relative margin below which a vector is not considered useful.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-10;

/// Removes every vector that is not strictly maximal somewhere on the simplex.
pub fn prune(vs: Vec<AlphaVector>) -> Result<ValueFunctionSet> {
    let mut stats = PruneStats::default();
    prune_with(vs, &mut stats)
}

/// Pointwise-domination filter followed by Lark-style witness search: each
/// surviving candidate is tested by LP against the current kept set; when a
/// witness belief is found, the best candidate at that belief joins the kept
/// set.
pub fn prune_with(vs: Vec<AlphaVector>, stats: &mut PruneStats) -> Result<ValueFunctionSet> {
    prune_with_tol(vs, DEFAULT_PRUNE_TOL, stats)
}

/// [`prune_with`] with an explicit margin `tol`, relative to the largest
/// vector entry: a vector survives only if it beats the kept set by more
/// than `tol · scale` somewhere. Dropping such vectors changes the value
/// function by at most that margin.
pub fn prune_with_tol(vs: Vec<AlphaVector>, tol: f64, stats: &mut PruneStats) -> Result<ValueFunctionSet> {
    if vs.len() <= 1 {
        return Ok(ValueFunctionSet { vectors: vs });
    }
    let scale = vs
        .iter()
        .flat_map(|a| a.values.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let eps = tol * scale;
    let dim = vs[0].values.len();

    // exact duplicates (after rounding far below eps)
    let quantum = eps * 1e-2;
    let mut seen = HashSet::new();
    let mut cand: Vec<AlphaVector> = Vec::with_capacity(vs.len());
    for a in vs {
        let key: Vec<i64> = a.values.iter().map(|x| (x / quantum).round() as i64).collect();
        if seen.insert(key) {
            cand.push(a);
        }
    }

    let sum = |a: &AlphaVector| a.values.iter().sum::<f64>();
    let mut kept: Vec<AlphaVector> = Vec::new();
    let mut live: Vec<Option<AlphaVector>> = cand.into_iter().map(Some).collect();

    // seed with the best vector at each simplex vertex
    let mut corner_best: Vec<usize> = Vec::new();
    for s in 0..dim {
        let mut best = 0usize;
        for i in 1..live.len() {
            let a = live[i].as_ref().unwrap();
            let b = live[best].as_ref().unwrap();
            if a.values[s] > b.values[s] + eps
                || (a.values[s] >= b.values[s] - eps && sum(a) > sum(b) + eps)
            {
                best = i;
            }
        }
        if !corner_best.contains(&best) {
            corner_best.push(best);
        }
    }
    for i in corner_best {
        let a = live[i].take().unwrap();
        if !kept.iter().any(|k| dominated(&a, k, eps)) {
            kept.push(a);
        }
    }

    let mut i = 0;
    while i < live.len() {
        let Some(phi) = live[i].as_ref() else {
            i += 1;
            continue;
        };
        if kept.iter().any(|k| dominated(phi, k, eps)) {
            live[i] = None;
            i += 1;
            continue;
        }
        let others: Vec<&[f64]> = kept.iter().map(|k| k.values.as_slice()).collect();
        stats.lp_calls += 1;
        let Some(belief) = lp::witness_above(&phi.values, &others, eps)? else {
            live[i] = None;
            i += 1;
            continue;
        };
        // best remaining candidate at the witness belief
        let mut best = i;
        let mut best_val = phi.dot(&belief);
        for (j, a) in live.iter().enumerate().skip(i + 1) {
            if let Some(a) = a {
                let v = a.dot(&belief);
                let incumbent = live[best].as_ref().unwrap();
                if v > best_val + eps || (v >= best_val - eps && sum(a) > sum(incumbent) + eps) {
                    best = j;
                    best_val = v;
                }
            }
        }
        let chosen = live[best].take().unwrap();
        kept.push(chosen);
        if best == i {
            i += 1;
        }
    }
    Ok(ValueFunctionSet { vectors: kept })
}

/// `a <= b + eps` componentwise.
fn dominated(a: &AlphaVector, b: &AlphaVector, eps: f64) -> bool {
    a.values.iter().zip(&b.values).all(|(x, y)| *x <= y + eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(values: &[f64]) -> AlphaVector {
        AlphaVector::new(values.to_vec(), 0)
    }

    fn sorted(set: &ValueFunctionSet) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = set.vectors.iter().map(|a| a.values.clone()).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn duplicates_collapse() {
        let p = prune(vec![v(&[1.0, 2.0]), v(&[1.0, 2.0])]).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn pointwise_domination() {
        let p = prune(vec![v(&[1.0, 1.0]), v(&[0.0, 0.0])]).unwrap();
        assert_eq!(sorted(&p), vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn lp_domination() {
        let p = prune(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.4, 0.4])]).unwrap();
        assert_eq!(sorted(&p), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn interior_vector_survives() {
        let p = prune(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.6, 0.6])]).unwrap();
        assert_eq!(p.len(), 3);
    }
}
