//! Balancing factors for multiple roots.
//!
//! `q[i][j]` measures how far the polytope grown from the roots of
//! candidate `i` reaches along the adjoint direction of candidate `j`.
//! Factors `alpha` with `alpha_i q_ij < alpha_j` for all `i != j` keep
//! every root a vertex of the combined polytope.

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::Vector;
use crate::lp::{self, LpProblem, LpStatus, Relation, Sense};
use crate::polytope::{grow, single_root_seeds, Origin, PolytopeOptions, Seed};

/// Margin cap used when no cycle constrains the balancing program.
pub const UNCONSTRAINED_MARGIN: f64 = std::f64::consts::LN_2;
/// Largest denominator tried when snapping factors to rationals.
pub const SNAP_MAX_DENOM: u32 = 16;
/// Largest relative change accepted when snapping.
pub const SNAP_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTable {
    pub k: usize,
    /// `q[i][j]`; the diagonal is unused and kept at zero.
    pub q: Vec<Vec<f64>>,
}

impl ProjectionTable {
    pub fn new(k: usize, q: Vec<Vec<f64>>) -> Result<Self> {
        let r = q.len();
        if q.iter().any(|row| row.len() != r) {
            return Err(Error::DimensionMismatch("projection table must be square".into()));
        }
        if q.iter().flatten().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidInput("projection values must be finite and nonnegative".into()));
        }
        Ok(ProjectionTable { k, q })
    }

    pub fn size(&self) -> usize {
        self.q.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancingVector {
    pub alpha: Vec<f64>,
    /// Optimal `y0` of the balancing program.
    pub margin: f64,
    pub k_used: usize,
    /// Whether `alpha` was replaced by nearby low-denominator rationals.
    pub snapped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Balancing {
    Admissible(BalancingVector),
    /// Optimal margin is not positive; carries `y0`.
    Infeasible(f64),
}

fn max_abs_projection(points: impl Iterator<Item = Vector>, dir: &Vector) -> f64 {
    points.map(|z| dir.dot(&z).abs()).fold(0.0, f64::max)
}

/// Depth-`k` projection table from single-root runs.
pub fn projection_depth_k(
    normalized: &MatrixFamily,
    cands: &CandidateSet,
    k: usize,
    opts: &PolytopeOptions,
) -> Result<ProjectionTable> {
    let r = cands.len();
    let mut q = vec![vec![0.0; r]; r];
    let words = cands.words();
    let run_opts = PolytopeOptions {
        k_max: k,
        ..opts.clone()
    };
    for i in 0..r {
        let seeds = single_root_seeds(normalized, cands, i, 1.0);
        let points: Vec<Vector> = if k == 0 {
            seeds.into_iter().map(|s| s.point).collect()
        } else {
            grow(normalized, seeds, &words, &run_opts)?.tree.points()
        };
        for (j, cj) in cands.candidates.iter().enumerate() {
            if i != j {
                q[i][j] = max_abs_projection(points.iter().cloned(), &cj.adjoint);
            }
        }
    }
    ProjectionTable::new(k, q)
}

/// Reach of the polytope grown from `x` to depth `k` along the adjoint
/// direction of candidate `j`.
pub fn q_of_point(
    normalized: &MatrixFamily,
    cands: &CandidateSet,
    j: usize,
    x: &Vector,
    k: usize,
    opts: &PolytopeOptions,
) -> Result<f64> {
    let dir = &cands
        .candidates
        .get(j)
        .ok_or_else(|| Error::InvalidInput(format!("no candidate {j}")))?
        .adjoint;
    if x.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let seeds = vec![Seed {
        point: x.clone(),
        origin: Origin::Extra { index: 0 },
    }];
    let run_opts = PolytopeOptions {
        k_max: k,
        ..opts.clone()
    };
    let g = grow(normalized, seeds, &[], &run_opts)?;
    Ok(max_abs_projection(g.tree.points().into_iter(), dir))
}

/// Largest product over simple cycles of length at least two.
pub fn max_cycle_product(t: &ProjectionTable) -> f64 {
    let r = t.size();
    let mut best: f64 = 0.0;
    let mut visited = vec![false; r];
    fn dfs(q: &[Vec<f64>], start: usize, cur: usize, prod: f64, depth: usize, visited: &mut [bool], best: &mut f64) {
        for next in start..q.len() {
            let w = q[cur][next];
            if next == cur || w == 0.0 {
                continue;
            }
            if next == start {
                if depth >= 2 {
                    *best = best.max(prod * w);
                }
                continue;
            }
            if !visited[next] {
                visited[next] = true;
                dfs(q, start, next, prod * w, depth + 1, visited, best);
                visited[next] = false;
            }
        }
    }
    for s in 0..r {
        visited[s] = true;
        dfs(&t.q, s, s, 1.0, 1, &mut visited, &mut best);
        visited[s] = false;
    }
    best
}

/// Maximum mean edge weight over cycles of the graph with weights
/// `log q_ij` (zero entries removed), by Karp's algorithm. `None` if acyclic.
pub fn max_cycle_mean_log(t: &ProjectionTable) -> Option<f64> {
    let n = t.size();
    let neg = f64::NEG_INFINITY;
    // dp[k][v]: best weight of a k-edge walk ending at v, from any start.
    let mut dp = vec![vec![neg; n]; n + 1];
    for v in 0..n {
        dp[0][v] = 0.0;
    }
    for k in 1..=n {
        for v in 0..n {
            for u in 0..n {
                let w = t.q[u][v];
                if u == v || w <= 0.0 || dp[k - 1][u] == neg {
                    continue;
                }
                dp[k][v] = dp[k][v].max(dp[k - 1][u] + w.ln());
            }
        }
    }
    let mut best: Option<f64> = None;
    for v in 0..n {
        if dp[n][v] == neg {
            continue;
        }
        let mut worst = f64::INFINITY;
        for k in 0..n {
            if dp[k][v] == neg {
                continue;
            }
            worst = worst.min((dp[n][v] - dp[k][v]) / (n - k) as f64);
        }
        if worst.is_finite() {
            best = Some(best.map_or(worst, |b: f64| b.max(worst)));
        }
    }
    best
}

/// Every simple cycle has product below one.
pub fn cycle_condition(t: &ProjectionTable) -> bool {
    if t.size() <= 8 {
        max_cycle_product(t) < 1.0
    } else {
        max_cycle_mean_log(t).is_none_or(|m| m < 0.0)
    }
}

pub fn is_admissible(alpha: &[f64], t: &ProjectionTable) -> bool {
    let r = t.size();
    alpha.len() == r
        && alpha.iter().all(|a| *a > 0.0)
        && (0..r).all(|i| (0..r).all(|j| i == j || alpha[i] * t.q[i][j] < alpha[j]))
}

fn balancing_program(t: &ProjectionTable, cap: Option<f64>) -> LpProblem {
    let r = t.size();
    let mut obj = vec![0.0; r + 1];
    obj[0] = 1.0;
    let mut lp = LpProblem::new(Sense::Maximize, obj);
    for v in 0..=r {
        lp.bound(v, f64::NEG_INFINITY, f64::INFINITY);
    }
    // Factors are defined up to a common multiple; pin the first.
    lp.bound(1, 0.0, 0.0);
    if let Some(c) = cap {
        lp.bound(0, f64::NEG_INFINITY, c);
    }
    for i in 0..r {
        for j in 0..r {
            if i == j || t.q[i][j] == 0.0 {
                continue;
            }
            let mut row = vec![0.0; r + 1];
            row[0] = 1.0;
            row[1 + i] += 1.0;
            row[1 + j] -= 1.0;
            lp.constrain(row, Relation::Le, -t.q[i][j].ln());
        }
    }
    lp
}

/// max y0 subject to y0 + y_i - y_j <= -log q_ij over pairs with q_ij > 0.
pub fn solve_balancing(t: &ProjectionTable) -> Result<Balancing> {
    let r = t.size();
    if r == 0 {
        return Err(Error::InvalidInput("empty projection table".into()));
    }
    if r == 1 {
        return Ok(Balancing::Admissible(BalancingVector {
            alpha: vec![1.0],
            margin: f64::INFINITY,
            k_used: t.k,
            snapped: false,
        }));
    }
    let mut sol = lp::solve(&balancing_program(t, None), 1e-10)?;
    if sol.status == LpStatus::Unbounded {
        sol = lp::solve(&balancing_program(t, Some(UNCONSTRAINED_MARGIN)), 1e-10)?;
    }
    if sol.status != LpStatus::Optimal {
        return Err(Error::Balancing(format!("balancing program is {:?}", sol.status)));
    }
    let y0 = sol.values[0];
    if y0 <= 0.0 {
        return Ok(Balancing::Infeasible(y0));
    }
    let ymax = sol.values[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let alpha: Vec<f64> = sol.values[1..].iter().map(|y| (y - ymax).exp()).collect();
    Ok(Balancing::Admissible(BalancingVector {
        alpha,
        margin: y0,
        k_used: t.k,
        snapped: false,
    }))
}

/// Nearest fraction `p/q` with the smallest `q <= SNAP_MAX_DENOM` within
/// `SNAP_REL_TOL` of `x`.
pub fn snap_value(x: f64) -> Option<(u32, u32)> {
    for q in 1..=SNAP_MAX_DENOM {
        let p = (x * q as f64).round();
        if p < 1.0 {
            continue;
        }
        if ((p / q as f64) - x).abs() <= SNAP_REL_TOL * x {
            return Some((p as u32, q));
        }
    }
    None
}

/// Replaces factors by low-denominator rationals when the result stays
/// admissible; otherwise returns the input unchanged.
pub fn snap(b: &BalancingVector, t: &ProjectionTable) -> BalancingVector {
    let mut alpha = Vec::with_capacity(b.alpha.len());
    for &a in &b.alpha {
        match snap_value(a) {
            Some((p, q)) => alpha.push(p as f64 / q as f64),
            None => return b.clone(),
        }
    }
    let top = alpha.iter().copied().fold(0.0, f64::max);
    let alpha: Vec<f64> = alpha.iter().map(|a| a / top).collect();
    if alpha != b.alpha && is_admissible(&alpha, t) {
        BalancingVector {
            alpha,
            snapped: true,
            ..b.clone()
        }
    } else {
        b.clone()
    }
}
