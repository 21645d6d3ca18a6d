//! Exact MSSC on small instances: a depth-first branch-and-bound over
//! point-to-cluster prefixes with the partial-SSE bound, plus a brute-force
//! enumerator used as the test oracle. Under a time budget the solver
//! degrades to a valid anytime lower bound.

use crate::dataset::{dist2, Dataset};
use crate::error::{Error, Result};
use crate::kmeans::{kmeanspp_seed, lloyd_subset, EmptyPolicy, KMeansConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Exact,
    Anytime,
    Failed,
}

/// Outcome of certifying one subset: a lower bound that is always valid,
/// the best feasible value found, and how far the search got.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubproblemResult {
    pub value_lb: f64,
    pub value_ub: f64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub time_spent: f64,
}

/// Per-cluster sufficient statistics of a prefix assignment. The partial
/// SSE around the running means is computable in O(d) per point move and
/// never decreases when a point is added.
struct PrefixStats {
    counts: Vec<usize>,
    sums: Vec<Vec<f64>>,
    partial_sse: f64,
}

impl PrefixStats {
    fn new(k: usize, d: usize) -> Self {
        Self {
            counts: vec![0; k],
            sums: vec![vec![0.0; d]; k],
            partial_sse: 0.0,
        }
    }

    /// Adds point p to cluster c; returns the SSE increment.
    fn push(&mut self, p: &[f64], c: usize) -> f64 {
        let n = self.counts[c] as f64;
        let delta = if self.counts[c] == 0 {
            0.0
        } else {
            let mut dd = 0.0;
            for (s, &x) in self.sums[c].iter().zip(p) {
                let diff = x - s / n;
                dd += diff * diff;
            }
            n / (n + 1.0) * dd
        };
        self.counts[c] += 1;
        for (s, &x) in self.sums[c].iter_mut().zip(p) {
            *s += x;
        }
        self.partial_sse += delta;
        delta
    }

    fn pop(&mut self, p: &[f64], c: usize, delta: f64) {
        self.counts[c] -= 1;
        for (s, &x) in self.sums[c].iter_mut().zip(p) {
            *s -= x;
        }
        self.partial_sse -= delta;
    }
}

/// Exact optimum by exhaustive enumeration in canonical form: point 0 opens
/// cluster 0 and each further cluster is opened in order. No pruning, so
/// this stays independent of the branch-and-bound path it checks.
pub fn brute_force(ds: &Dataset, subset: &[usize], k: usize) -> Result<(f64, Vec<usize>)> {
    let n = subset.len();
    if n > 14 || k > 4 {
        return Err(Error::BruteForceTooLarge { n, k });
    }
    if k > n {
        return Err(Error::TooFewPoints { k, n });
    }
    let mut stats = PrefixStats::new(k, ds.d());
    let mut assignment = vec![0usize; n];
    let mut best = (f64::INFINITY, vec![0usize; n]);
    enumerate(ds, subset, k, 0, 0, &mut stats, &mut assignment, &mut best);
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    ds: &Dataset,
    subset: &[usize],
    k: usize,
    idx: usize,
    used: usize,
    stats: &mut PrefixStats,
    assignment: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if idx == subset.len() {
        if used == k && stats.partial_sse < best.0 {
            *best = (stats.partial_sse, assignment.clone());
        }
        return;
    }
    let p = ds.point(subset[idx]);
    let limit = (used + 1).min(k);
    for c in 0..limit {
        let opened = if c == used { used + 1 } else { used };
        // not enough points left to open the remaining clusters
        if k - opened > subset.len() - idx - 1 {
            continue;
        }
        let delta = stats.push(p, c);
        assignment[idx] = c;
        enumerate(ds, subset, k, idx + 1, opened, stats, assignment, best);
        stats.pop(p, c, delta);
    }
}

/// A branching order that places mutually distant points first (greedy
/// max-min dispersion), tightening the partial bound early. Any
/// permutation is correct; this one just prunes sooner.
pub fn point_order(ds: &Dataset, subset: &[usize]) -> Vec<usize> {
    let n = subset.len();
    if n <= 2 {
        return subset.to_vec();
    }
    // farthest pair, ties toward lower index pair
    let mut best_pair = (0usize, 1usize);
    let mut best_d = -1.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let d = dist2(ds.point(subset[a]), ds.point(subset[b]));
            if d > best_d {
                best_d = d;
                best_pair = (a, b);
            }
        }
    }
    let mut chosen = vec![best_pair.0, best_pair.1];
    let mut in_set = vec![false; n];
    in_set[best_pair.0] = true;
    in_set[best_pair.1] = true;
    let mut min_dist: Vec<f64> = (0..n)
        .map(|a| {
            dist2(ds.point(subset[a]), ds.point(subset[best_pair.0]))
                .min(dist2(ds.point(subset[a]), ds.point(subset[best_pair.1])))
        })
        .collect();
    while chosen.len() < n {
        let mut pick = usize::MAX;
        let mut pick_d = -1.0;
        for a in 0..n {
            if !in_set[a] && min_dist[a] > pick_d {
                pick_d = min_dist[a];
                pick = a;
            }
        }
        in_set[pick] = true;
        chosen.push(pick);
        for a in 0..n {
            if !in_set[a] {
                let d = dist2(ds.point(subset[a]), ds.point(subset[pick]));
                if d < min_dist[a] {
                    min_dist[a] = d;
                }
            }
        }
    }
    chosen.into_iter().map(|a| subset[a]).collect()
}

struct Search<'a> {
    ds: &'a Dataset,
    order: Vec<usize>,
    k: usize,
    incumbent_value: f64,
    incumbent: Vec<usize>,
    nodes: u64,
    deadline: Instant,
    aborted: bool,
    /// Min partial SSE over subtrees abandoned at the deadline.
    frontier_min: f64,
}

impl Search<'_> {
    fn dfs(&mut self, idx: usize, used: usize, stats: &mut PrefixStats, assignment: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes % 64 == 0 && Instant::now() >= self.deadline {
            self.aborted = true;
        }
        if self.aborted {
            // everything below this node is bounded by its partial SSE
            if stats.partial_sse < self.frontier_min {
                self.frontier_min = stats.partial_sse;
            }
            return;
        }
        if idx == self.order.len() {
            if used == self.k && stats.partial_sse < self.incumbent_value {
                self.incumbent_value = stats.partial_sse;
                self.incumbent = assignment.clone();
            }
            return;
        }
        let p = self.ds.point(self.order[idx]);
        let limit = (used + 1).min(self.k);
        for c in 0..limit {
            let opened = if c == used { used + 1 } else { used };
            if self.k - opened > self.order.len() - idx - 1 {
                continue;
            }
            let delta = stats.push(p, c);
            if stats.partial_sse < self.incumbent_value {
                assignment[idx] = c;
                self.dfs(idx + 1, opened, stats, assignment);
            }
            stats.pop(p, c, delta);
            if self.aborted {
                if stats.partial_sse < self.frontier_min {
                    self.frontier_min = stats.partial_sse;
                }
                return;
            }
        }
    }
}

/// Certifies MSSC on a subset. On completion the result is exact; if the
/// budget runs out first, `value_lb` is the minimum partial-SSE bound over
/// all abandoned nodes, which is a valid lower bound on the optimum.
///
/// `initial_ub` may come from any feasible solution (infinity allowed); the
/// solver additionally seeds its own incumbent from a few k-means runs.
pub fn solve(
    ds: &Dataset,
    subset: &[usize],
    k: usize,
    initial_ub: f64,
    time_budget: f64,
) -> Result<SubproblemResult> {
    solve_with_assignment(ds, subset, k, initial_ub, time_budget).map(|(r, _)| r)
}

/// Like [`solve`], also returning the feasible assignment behind
/// `value_ub`, aligned with `subset` order.
pub fn solve_with_assignment(
    ds: &Dataset,
    subset: &[usize],
    k: usize,
    initial_ub: f64,
    time_budget: f64,
) -> Result<(SubproblemResult, Vec<usize>)> {
    if time_budget <= 0.0 {
        return Err(Error::InvalidBudget(time_budget));
    }
    if k > subset.len() {
        return Err(Error::TooFewPoints { k, n: subset.len() });
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(time_budget);

    // incumbent: best of 10 seeded k-means runs on the subset
    let mut cfg = KMeansConfig::new(k);
    cfg.restarts = 1;
    let mut incumbent_value = f64::INFINITY;
    let mut incumbent_cells: Option<Vec<Vec<usize>>> = None;
    for r in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(0x5eed_0000 ^ r);
        let centroids = kmeanspp_seed(ds, subset, k, &mut rng)?;
        let run = lloyd_subset(ds, subset, &centroids, &cfg, EmptyPolicy::Repair)?;
        if run.cells.iter().all(|c| !c.is_empty()) && run.value < incumbent_value {
            incumbent_value = run.value;
            incumbent_cells = Some(run.cells);
        }
        if Instant::now() >= deadline {
            break;
        }
    }

    let order = point_order(ds, subset);
    let pos_of: std::collections::HashMap<usize, usize> =
        order.iter().enumerate().map(|(pos, &i)| (i, pos)).collect();
    let mut incumbent_assignment = vec![0usize; order.len()];
    if let Some(cells) = &incumbent_cells {
        for (j, cell) in cells.iter().enumerate() {
            for &i in cell {
                incumbent_assignment[pos_of[&i]] = j;
            }
        }
    }

    // prune at >= the heuristic value, but keep a slack so an optimum equal
    // to the incumbent is still reachable through the tree
    let mut search = Search {
        ds,
        order,
        k,
        incumbent_value: incumbent_value.min(initial_ub) * (1.0 + 1e-12) + 1e-300,
        incumbent: incumbent_assignment,
        nodes: 0,
        deadline,
        aborted: false,
        frontier_min: f64::INFINITY,
    };
    let mut stats = PrefixStats::new(k, ds.d());
    let mut assignment = vec![0usize; search.order.len()];
    search.dfs(0, 0, &mut stats, &mut assignment);

    let value_ub = search.incumbent_value.min(incumbent_value.min(initial_ub));
    let (status, value_lb) = if search.aborted {
        (SolveStatus::Anytime, search.frontier_min.min(value_ub).max(0.0))
    } else {
        (SolveStatus::Exact, value_ub)
    };
    // map the incumbent back from branch order to subset order
    let subset_pos: std::collections::HashMap<usize, usize> =
        subset.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let mut final_assignment = vec![0usize; subset.len()];
    for (branch_pos, &point) in search.order.iter().enumerate() {
        final_assignment[subset_pos[&point]] = search.incumbent[branch_pos];
    }
    Ok((
        SubproblemResult {
            value_lb,
            value_ub,
            status,
            nodes_explored: search.nodes,
            time_spent: start.elapsed().as_secs_f64(),
        },
        final_assignment,
    ))
}
