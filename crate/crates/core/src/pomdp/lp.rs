//! Linear programs over the belief simplex used by pruning and by the
//! convergence test.
//!
//! Every LP here has the form `max_{b ∈ Δ} min_i w_i · b` for a family of
//! difference vectors `w_i`. The belief dimension is small (one observation
//! block) while the family can be large, so the LP is solved by constraint
//! generation: a dense simplex solves the relaxation over a small active
//! subset, the most violated member of the family is added, and the loop
//! stops once the relaxation's bound is attained. Pruning only needs to know
//! whether the optimum clears a threshold, which usually settles after a
//! handful of cuts.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const OPT_TOL: f64 = 1e-12;

enum Stop {
    /// Solve to optimality.
    Exact,
    /// Stop as soon as the optimum is known to be above or at most `eps`.
    Threshold(f64),
}

struct Maximin {
    /// Optimal value (or the bound that settled the threshold question).
    value: f64,
    belief: Vec<f64>,
    /// Whether a belief with margin above the threshold was found.
    above: bool,
}

/// Finds the belief maximizing `min_{w in others} (candidate - w) · b`.
///
/// Returns the optimal margin and the maximizing belief. A positive margin
/// means `candidate` is strictly better than every vector in `others`
/// somewhere on the simplex.
#[cfg(test)]
pub fn witness(candidate: &[f64], others: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    if others.is_empty() {
        return Err(Error::input("witness LP needs at least one comparison vector"));
    }
    let r = maximin(candidate, others, Stop::Exact)?;
    Ok((r.value, r.belief))
}

/// A belief where `candidate` beats every vector in `others` by more than
/// `eps`, or `None` when no such belief exists.
pub fn witness_above(candidate: &[f64], others: &[&[f64]], eps: f64) -> Result<Option<Vec<f64>>> {
    if others.is_empty() {
        return Ok(Some(vec![1.0 / candidate.len() as f64; candidate.len()]));
    }
    let r = maximin(candidate, others, Stop::Threshold(eps))?;
    Ok(r.above.then_some(r.belief))
}

/// `max_b [candidate · b - max_{w in others} w · b]` over the simplex.
pub fn max_gap(candidate: &[f64], others: &[&[f64]]) -> Result<f64> {
    if others.is_empty() {
        return Err(Error::input("max_gap needs at least one comparison vector"));
    }
    Ok(maximin(candidate, others, Stop::Exact)?.value)
}

fn maximin(candidate: &[f64], others: &[&[f64]], stop: Stop) -> Result<Maximin> {
    let n = candidate.len();
    if n == 0 {
        return Err(Error::input("empty belief space"));
    }
    if others.iter().any(|w| w.len() != n) {
        return Err(Error::input("vector dimension mismatch"));
    }
    // work in units of the largest difference entry so tolerances are relative
    let scale = others
        .iter()
        .flat_map(|w| w.iter().zip(candidate).map(|(x, c)| (c - x).abs()))
        .fold(0.0f64, f64::max);
    let uniform = vec![1.0 / n as f64; n];
    if scale == 0.0 {
        let above = matches!(stop, Stop::Threshold(eps) if 0.0 > eps);
        return Ok(Maximin { value: 0.0, belief: uniform, above });
    }
    let diff = |i: usize, s: usize| (candidate[s] - others[i][s]) / scale;
    let threshold = match stop {
        Stop::Exact => None,
        Stop::Threshold(eps) => Some(eps / scale),
    };
    // true objective at b and its minimizing member
    let evaluate = |b: &[f64]| -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for i in 0..others.len() {
            let v: f64 = (0..n).map(|s| diff(i, s) * b[s]).sum();
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    };
    if n == 1 {
        let (v, _) = evaluate(&[1.0]);
        return Ok(Maximin {
            value: v * scale,
            belief: vec![1.0],
            above: threshold.is_some_and(|t| v > t),
        });
    }

    let (_, first) = evaluate(&uniform);
    let mut active = vec![first];
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_belief = uniform.clone();
    let max_rounds = others.len() + 8;
    for _ in 0..max_rounds {
        let rows: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| (0..n).map(|s| diff(i, s)).collect())
            .collect();
        let (upper, b) = relaxation(&rows)?;
        if let Some(t) = threshold {
            if upper <= t {
                return Ok(Maximin {
                    value: upper * scale,
                    belief: b,
                    above: false,
                });
            }
        }
        let (v, j) = evaluate(&b);
        if v > best_lower {
            best_lower = v;
            best_belief = b.clone();
        }
        if let Some(t) = threshold {
            if v > t {
                return Ok(Maximin {
                    value: v * scale,
                    belief: b,
                    above: true,
                });
            }
        }
        if v >= upper - OPT_TOL || active.contains(&j) {
            return Ok(Maximin {
                value: best_lower * scale,
                belief: best_belief,
                above: threshold.is_some_and(|t| best_lower > t),
            });
        }
        active.push(j);
    }
    Err(Error::Numerical(format!(
        "witness LP did not converge after {max_rounds} cuts"
    )))
}

/// `max t s.t. t <= w · b for every row w, b in the simplex`, solved with a
/// dense primal simplex. The last belief coordinate is eliminated through
/// `Σ b = 1` and `t` is shifted by a bound `M` so that every variable is
/// nonnegative and the all-slack basis is feasible.
fn relaxation(rows: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = rows[0].len();
    let last = n - 1;
    // rows are normalized to |w| <= 1
    let big_m = 2.0;
    let nv = n; // b_0..b_{n-2}, e
    let e_col = n - 1;
    let m = rows.len() + 1;
    let width = nv + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let rhs = width - 1;
    // Σ_{s<last} b_s <= 1
    for s in 0..last {
        t[s] = 1.0;
    }
    t[nv] = 1.0;
    t[rhs] = 1.0;
    // e - Σ b_s (w_s - w_last) <= M + w_last
    for (k, w) in rows.iter().enumerate() {
        let r = (k + 1) * width;
        for s in 0..last {
            t[r + s] = -(w[s] - w[last]);
        }
        t[r + e_col] = 1.0;
        t[r + nv + k + 1] = 1.0;
        t[r + rhs] = big_m + w[last];
    }
    // objective row: z - e = 0
    let obj = m * width;
    t[obj + e_col] = -1.0;
    let mut basis: Vec<usize> = (0..m).map(|r| nv + r).collect();

    let max_iter = 50 * (m + nv) + 100;
    let mut stalled = 0usize;
    let mut last_obj = 0.0;
    for _ in 0..max_iter {
        // entering column: Dantzig's rule, Bland's after a long stall
        let bland = stalled > 2 * (m + nv);
        let mut enter = None;
        let mut most = -PIVOT_TOL;
        for c in 0..nv + m {
            let rc = t[obj + c];
            if rc < most {
                enter = Some(c);
                if bland {
                    break;
                }
                most = rc;
            }
        }
        let Some(col) = enter else {
            let mut x = vec![0.0; nv + m];
            for (r, &bcol) in basis.iter().enumerate() {
                x[bcol] = t[r * width + rhs];
            }
            let mut b: Vec<f64> = (0..last).map(|s| x[s].max(0.0)).collect();
            let used: f64 = b.iter().sum();
            b.push((1.0 - used).max(0.0));
            let total: f64 = b.iter().sum();
            for v in &mut b {
                *v /= total;
            }
            return Ok((x[e_col] - big_m, b));
        };
        // ratio test, ties to the smallest basic column
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = t[r * width + col];
            if a > PIVOT_TOL {
                let ratio = t[r * width + rhs] / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, best)) => {
                        if ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && basis[r] < basis[lr])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Numerical("witness LP relaxation unbounded".into()));
        };
        pivot(&mut t, width, m + 1, row, col);
        basis[row] = col;
        let z = t[obj + rhs];
        if z > last_obj + PIVOT_TOL {
            stalled = 0;
            last_obj = z;
        } else {
            stalled += 1;
        }
    }
    Err(Error::Numerical("witness LP simplex hit its iteration limit".into()))
}

fn pivot(t: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for c in 0..width {
        t[row * width + c] /= p;
    }
    t[row * width + col] = 1.0;
    for r in 0..rows {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f == 0.0 {
            continue;
        }
        for c in 0..width {
            t[r * width + c] -= f * t[row * width + c];
        }
        t[r * width + col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_for_interior_vector() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let (m, x) = witness(&[0.6, 0.6], &[&a, &b]).unwrap();
        assert!((m - 0.1).abs() < 1e-9, "margin {m}");
        assert!((x[0] - 0.5).abs() < 1e-9);
        let (m, _) = witness(&[0.4, 0.4], &[&a, &b]).unwrap();
        assert!(m < 0.0);
        assert!(witness_above(&[0.4, 0.4], &[&a, &b], 0.0).unwrap().is_none());
        assert!(witness_above(&[0.6, 0.6], &[&a, &b], 0.0).unwrap().is_some());
    }

    #[test]
    fn gap_of_dominating_vector() {
        let g = max_gap(&[2.0, 1.0], &[&[1.0, 1.0]]).unwrap();
        assert!((g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_dimensional_gap() {
        // candidate beats the corners' best by 1/3 at the centroid only
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let others: Vec<&[f64]> = e.iter().map(|v| v.as_slice()).collect();
        let g = max_gap(&[2.0 / 3.0; 3], &others).unwrap();
        assert!((g - 1.0 / 3.0).abs() < 1e-12, "gap {g}");
    }

    #[test]
    fn single_state() {
        let g = max_gap(&[2.0], &[&[1.5], &[0.5]]).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
    }
}
