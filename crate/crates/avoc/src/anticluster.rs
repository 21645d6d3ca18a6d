//! Anticlustering partitions: per-cluster random splitting, the assembly
//! assignment model that pairs splits across clusters, multi-start
//! selection, LB+ evaluation, and the ranked swap refinement.

use crate::clustering::{subset_sse, Clustering};
use crate::dataset::{dist2, Dataset};
use crate::error::{Error, Result};
use crate::kmeans::{seeded_run, KMeansConfig};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Why the swap refinement stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpsGamma,
    Timeout,
    NoImprovement,
}

/// A T-way balanced partition of the dataset together with its LB+
/// evaluation against a fixed clustering.
#[derive(Debug, Clone)]
pub struct AnticlusterPartition {
    /// Per-point anticluster index.
    assignment: Vec<usize>,
    t: usize,
    /// cells[t][j]: points of cluster j in anticluster t according to the
    /// seeded k-means run on S_t (the C_j^t of the evaluation).
    pub cells: Vec<Vec<Vec<usize>>>,
    /// cell_values[t][j]: LB+_{tj}, the SSE contribution of cells[t][j].
    pub cell_values: Vec<Vec<f64>>,
    /// per_anticluster[t]: LB+(S_t, K).
    pub per_anticluster: Vec<f64>,
    /// Sum of per_anticluster.
    pub lb_plus: f64,
}

impl AnticlusterPartition {
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Point lists per anticluster, in index order.
    pub fn subsets(&self) -> Vec<Vec<usize>> {
        let mut subsets = vec![Vec::new(); self.t];
        for (i, &s) in self.assignment.iter().enumerate() {
            subsets[s].push(i);
        }
        subsets
    }
}

/// Randomly deals each cluster's points round-robin into T splits.
/// Split sizes differ by at most one.
pub fn split_clusters(
    clustering: &Clustering,
    t: usize,
    rng: &mut StdRng,
) -> Result<Vec<Vec<Vec<usize>>>> {
    if t < 2 {
        return Err(Error::InvalidConfig("need at least 2 anticlusters".into()));
    }
    let k = clustering.k();
    let mut splits = Vec::with_capacity(k);
    for j in 0..k {
        let mut members = clustering.members(j);
        if members.len() < t {
            return Err(Error::ClusterSmallerThanT {
                cluster: j,
                size: members.len(),
                t,
            });
        }
        members.shuffle(rng);
        let mut cluster_splits = vec![Vec::new(); t];
        for (pos, i) in members.into_iter().enumerate() {
            cluster_splits[pos % t].push(i);
        }
        splits.push(cluster_splits);
    }
    Ok(splits)
}

/// Sum of squared distances over all cross pairs of two splits.
pub fn pairwise_split_distance(ds: &Dataset, split_a: &[usize], split_b: &[usize]) -> f64 {
    let mut total = 0.0;
    for &i in split_a {
        for &ip in split_b {
            total += dist2(ds.point(i), ds.point(ip));
        }
    }
    total
}

/// Split-to-anticluster assembly: for each cluster, a permutation mapping
/// split m to an anticluster.
#[derive(Debug, Clone)]
pub struct AssemblyAssignment {
    /// perm[j][m] = anticluster receiving split m of cluster j.
    pub perm: Vec<Vec<usize>>,
    /// Total between-cluster distance among co-located splits.
    pub objective: f64,
}

/// distances[j][jp][m][mp] for j < jp; other entries empty.
pub type SplitDistances = Vec<Vec<Vec<Vec<f64>>>>;

pub fn split_distances(ds: &Dataset, splits: &[Vec<Vec<usize>>]) -> SplitDistances {
    let k = splits.len();
    let t = splits[0].len();
    let mut d = vec![vec![Vec::new(); k]; k];
    for j in 0..k {
        for jp in (j + 1)..k {
            let mut table = vec![vec![0.0; t]; t];
            for (m, row) in table.iter_mut().enumerate() {
                for (mp, entry) in row.iter_mut().enumerate() {
                    *entry = pairwise_split_distance(ds, &splits[j][m], &splits[jp][mp]);
                }
            }
            d[j][jp] = table;
        }
    }
    d
}

fn assembly_objective(distances: &SplitDistances, split_at: &[Vec<usize>]) -> f64 {
    let k = split_at.len();
    let t = split_at[0].len();
    let mut total = 0.0;
    for j in 0..k {
        for jp in (j + 1)..k {
            for anticluster in 0..t {
                total += distances[j][jp][split_at[j][anticluster]][split_at[jp][anticluster]];
            }
        }
    }
    total
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (m, &dest) in perm.iter().enumerate() {
        inv[dest] = m;
    }
    inv
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Chooses which split of each cluster joins which anticluster, maximizing
/// between-cluster split distances among co-located splits. Exact by
/// exhaustive search over per-cluster permutations (cluster 0 fixed to the
/// identity) when (T!)^(K-1) <= 1e6, otherwise greedy seeding plus pairwise
/// permutation-exchange local search within the time budget.
pub fn assemble(distances: &SplitDistances, k: usize, t: usize, budget: Duration) -> AssemblyAssignment {
    let identity: Vec<usize> = (0..t).collect();
    if k == 1 {
        return AssemblyAssignment {
            perm: vec![identity],
            objective: 0.0,
        };
    }
    let search_space = factorial(t).powi(k as i32 - 1);
    if search_space <= 1e6 {
        exhaustive_assembly(distances, k, t)
    } else {
        local_search_assembly(distances, k, t, budget)
    }
}

fn exhaustive_assembly(distances: &SplitDistances, k: usize, t: usize) -> AssemblyAssignment {
    let identity: Vec<usize> = (0..t).collect();
    // split_at[j][anticluster] = split index
    let mut split_at: Vec<Vec<usize>> = vec![identity.clone(); k];
    let mut best = (f64::NEG_INFINITY, split_at.clone());
    fn recurse(
        distances: &SplitDistances,
        split_at: &mut Vec<Vec<usize>>,
        j: usize,
        k: usize,
        t: usize,
        best: &mut (f64, Vec<Vec<usize>>),
    ) {
        if j == k {
            let obj = assembly_objective(distances, split_at);
            if obj > best.0 {
                *best = (obj, split_at.clone());
            }
            return;
        }
        let mut perm: Vec<usize> = (0..t).collect();
        permute(&mut perm, 0, &mut |p| {
            split_at[j] = p.to_vec();
            recurse(distances, split_at, j + 1, k, t, best);
        });
    }
    recurse(distances, &mut split_at, 1, k, t, &mut best);
    let perm = best.1.iter().map(|inv| invert(inv)).collect();
    AssemblyAssignment {
        perm,
        objective: best.0.max(0.0),
    }
}

/// Heap-style permutation visitor.
fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

fn local_search_assembly(
    distances: &SplitDistances,
    k: usize,
    t: usize,
    budget: Duration,
) -> AssemblyAssignment {
    let deadline = Instant::now() + budget;
    let identity: Vec<usize> = (0..t).collect();
    let mut split_at: Vec<Vec<usize>> = vec![identity; k];

    // greedy seeding: clusters in order, each split placed where it gains most
    for j in 1..k {
        let mut taken = vec![false; t];
        let mut placement = vec![usize::MAX; t]; // anticluster -> split
        for m in 0..t {
            let mut best_t = usize::MAX;
            let mut best_gain = f64::NEG_INFINITY;
            for anticluster in 0..t {
                if taken[anticluster] {
                    continue;
                }
                let mut gain = 0.0;
                for jp in 0..j {
                    gain += pair_distance(distances, jp, j, split_at[jp][anticluster], m);
                }
                if gain > best_gain {
                    best_gain = gain;
                    best_t = anticluster;
                }
            }
            taken[best_t] = true;
            placement[best_t] = m;
        }
        split_at[j] = placement;
    }

    // pairwise exchange local search
    loop {
        let mut improved = false;
        'outer: for j in 1..k {
            for a in 0..t {
                for b in (a + 1)..t {
                    if Instant::now() >= deadline {
                        break 'outer;
                    }
                    let delta = exchange_delta(distances, &split_at, j, a, b, k);
                    if delta > 1e-12 {
                        split_at[j].swap(a, b);
                        improved = true;
                    }
                }
            }
        }
        if !improved || Instant::now() >= deadline {
            break;
        }
    }

    let objective = assembly_objective(distances, &split_at);
    let perm = split_at.iter().map(|inv| invert(inv)).collect();
    AssemblyAssignment { perm, objective }
}

fn pair_distance(distances: &SplitDistances, j: usize, jp: usize, m: usize, mp: usize) -> f64 {
    if j < jp {
        distances[j][jp][m][mp]
    } else {
        distances[jp][j][mp][m]
    }
}

/// Objective change from swapping the splits of cluster j between
/// anticlusters a and b.
fn exchange_delta(
    distances: &SplitDistances,
    split_at: &[Vec<usize>],
    j: usize,
    a: usize,
    b: usize,
    k: usize,
) -> f64 {
    let ma = split_at[j][a];
    let mb = split_at[j][b];
    let mut delta = 0.0;
    for jp in 0..k {
        if jp == j {
            continue;
        }
        let pa = split_at[jp][a];
        let pb = split_at[jp][b];
        delta += pair_distance(distances, j, jp, mb, pa) + pair_distance(distances, j, jp, ma, pb)
            - pair_distance(distances, j, jp, ma, pa)
            - pair_distance(distances, j, jp, mb, pb);
    }
    delta
}

/// Builds the per-point anticluster assignment from splits and an assembly.
pub fn partition_assignment(
    n: usize,
    splits: &[Vec<Vec<usize>>],
    assembly: &AssemblyAssignment,
) -> Vec<usize> {
    let mut assignment = vec![0usize; n];
    for (j, cluster_splits) in splits.iter().enumerate() {
        for (m, split) in cluster_splits.iter().enumerate() {
            for &i in split {
                assignment[i] = assembly.perm[j][m];
            }
        }
    }
    assignment
}

/// Evaluates an anticluster assignment: seeded k-means per anticluster from
/// the clustering's centroids, LB+ contributions per cell, and the total.
pub fn evaluate_lb_plus(
    ds: &Dataset,
    clustering: &Clustering,
    assignment: Vec<usize>,
    t: usize,
    config: &KMeansConfig,
) -> Result<AnticlusterPartition> {
    let mut subsets = vec![Vec::new(); t];
    for (i, &s) in assignment.iter().enumerate() {
        subsets[s].push(i);
    }
    let mut cells = Vec::with_capacity(t);
    let mut cell_values = Vec::with_capacity(t);
    let mut per_anticluster = Vec::with_capacity(t);
    for subset in &subsets {
        let (run_cells, values, value) =
            evaluate_subset(ds, clustering, subset, config)?;
        cells.push(run_cells);
        cell_values.push(values);
        per_anticluster.push(value);
    }
    let lb_plus = per_anticluster.iter().sum();
    Ok(AnticlusterPartition {
        assignment,
        t,
        cells,
        cell_values,
        per_anticluster,
        lb_plus,
    })
}

fn evaluate_subset(
    ds: &Dataset,
    clustering: &Clustering,
    subset: &[usize],
    config: &KMeansConfig,
) -> Result<(Vec<Vec<usize>>, Vec<f64>, f64)> {
    let run = seeded_run(ds, subset, clustering.centroids(), config)?;
    let values: Vec<f64> = run.cells.iter().map(|cell| subset_sse(ds, cell)).collect();
    let value: f64 = values.iter().sum();
    debug_assert!((value - run.value).abs() <= 1e-9 * run.value.max(1.0));
    Ok((run.cells, values, value))
}

/// Generates `r` candidates (split + assemble), evaluates each, and keeps
/// the one with the largest LB+. Candidates run in parallel with
/// per-candidate RNG streams, so the selection is schedule-independent.
pub fn initialize(
    ds: &Dataset,
    clustering: &Clustering,
    t: usize,
    r: usize,
    seed: u64,
    config: &KMeansConfig,
    assembly_budget: Duration,
) -> Result<AnticlusterPartition> {
    if r < 1 {
        return Err(Error::InvalidConfig("restart count must be >= 1".into()));
    }
    let candidates = (0..r)
        .into_par_iter()
        .map(|cand| {
            let mut rng = StdRng::seed_from_u64(seed ^ (0x0a11_c0de_u64.wrapping_mul(cand as u64 + 1)));
            let splits = split_clusters(clustering, t, &mut rng)?;
            let distances = split_distances(ds, &splits);
            let assembly = assemble(&distances, clustering.k(), t, assembly_budget);
            let assignment = partition_assignment(ds.n(), &splits, &assembly);
            let partition = evaluate_lb_plus(ds, clustering, assignment, t, config)?;
            Ok((cand, partition))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, best) = candidates
        .into_iter()
        .max_by(|(ca, a), (cb, b)| {
            a.lb_plus
                .partial_cmp(&b.lb_plus)
                .unwrap()
                .then(cb.cmp(ca))
        })
        .expect("r >= 1");
    Ok(best)
}

/// Outcome of [`swap_refine`].
pub struct SwapOutcome {
    pub partition: AnticlusterPartition,
    /// LB+ after each accepted swap; strictly increasing.
    pub trace: Vec<f64>,
    pub stop_reason: StopReason,
}

/// Ranked swap procedure. Repeats sweeps until the quality gap reaches
/// `eps_gamma`, the time limit expires, or a full sweep accepts nothing.
/// Swaps exchange two points of the same input cluster across two
/// anticlusters, so all balance invariants are preserved; only the two
/// touched anticlusters are re-evaluated.
pub fn swap_refine(
    ds: &Dataset,
    clustering: &Clustering,
    partition: AnticlusterPartition,
    ub: f64,
    eps_gamma: f64,
    time_limit: Duration,
    config: &KMeansConfig,
) -> Result<SwapOutcome> {
    let deadline = Instant::now() + time_limit;
    let t = partition.t();
    let k = clustering.k();

    let mut assignment = partition.assignment.clone();
    let mut subsets = partition.subsets();
    let mut cells = partition.cells.clone();
    let mut cell_values = partition.cell_values.clone();
    let mut per_anticluster = partition.per_anticluster.clone();
    let mut lb_plus = partition.lb_plus;
    let mut trace = Vec::new();

    // members[j][t]: points of input-cluster j inside anticluster t
    let mut members = vec![vec![Vec::new(); t]; k];
    for (i, (&j, &s)) in clustering.assignment().iter().zip(&assignment).enumerate() {
        members[j][s].push(i);
    }

    let gamma = |lb: f64| (ub - lb) / ub;

    let finish = |assignment: Vec<usize>,
                  cells: Vec<Vec<Vec<usize>>>,
                  cell_values: Vec<Vec<f64>>,
                  per_anticluster: Vec<f64>,
                  lb_plus: f64,
                  trace: Vec<f64>,
                  stop_reason: StopReason| SwapOutcome {
        partition: AnticlusterPartition {
            assignment,
            t,
            cells,
            cell_values,
            per_anticluster,
            lb_plus,
        },
        trace,
        stop_reason,
    };

    if gamma(lb_plus) <= eps_gamma {
        return Ok(finish(
            assignment,
            cells,
            cell_values,
            per_anticluster,
            lb_plus,
            trace,
            StopReason::EpsGamma,
        ));
    }

    'sweeps: loop {
        let mut improved_any = false;
        for j in 0..k {
            let mu_j = clustering.centroid(j);
            // rank anticlusters by LB+_{tj}, ascending and descending
            let mut order: Vec<usize> = (0..t).collect();
            order.sort_by(|&a, &b| {
                cell_values[a][j]
                    .partial_cmp(&cell_values[b][j])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let ascending = order.clone();
            let descending: Vec<usize> = order.into_iter().rev().collect();

            let mut accepted = false;
            'donor: for &donor in &ascending {
                let mut donors = members[j][donor].clone();
                donors.sort_by(|&a, &b| {
                    dist2(ds.point(a), mu_j)
                        .partial_cmp(&dist2(ds.point(b), mu_j))
                        .unwrap()
                        .then(a.cmp(&b))
                });
                for &p in &donors {
                    for &receiver in &descending {
                        if receiver == donor {
                            continue;
                        }
                        let mut receivers = members[j][receiver].clone();
                        receivers.sort_by(|&a, &b| {
                            dist2(ds.point(b), mu_j)
                                .partial_cmp(&dist2(ds.point(a), mu_j))
                                .unwrap()
                                .then(a.cmp(&b))
                        });
                        for &q in &receivers {
                            if Instant::now() >= deadline {
                                return Ok(finish(
                                    assignment,
                                    cells,
                                    cell_values,
                                    per_anticluster,
                                    lb_plus,
                                    trace,
                                    StopReason::Timeout,
                                ));
                            }
                            // candidate: p moves donor -> receiver, q the reverse
                            let mut subset_a: Vec<usize> = subsets[donor]
                                .iter()
                                .copied()
                                .filter(|&i| i != p)
                                .collect();
                            subset_a.push(q);
                            subset_a.sort_unstable();
                            let mut subset_b: Vec<usize> = subsets[receiver]
                                .iter()
                                .copied()
                                .filter(|&i| i != q)
                                .collect();
                            subset_b.push(p);
                            subset_b.sort_unstable();

                            let (cells_a, values_a, value_a) =
                                evaluate_subset(ds, clustering, &subset_a, config)?;
                            let (cells_b, values_b, value_b) =
                                evaluate_subset(ds, clustering, &subset_b, config)?;
                            let new_total = lb_plus - per_anticluster[donor]
                                - per_anticluster[receiver]
                                + value_a
                                + value_b;
                            if new_total > lb_plus {
                                assignment[p] = receiver;
                                assignment[q] = donor;
                                subsets[donor] = subset_a;
                                subsets[receiver] = subset_b;
                                cells[donor] = cells_a;
                                cells[receiver] = cells_b;
                                cell_values[donor] = values_a;
                                cell_values[receiver] = values_b;
                                per_anticluster[donor] = value_a;
                                per_anticluster[receiver] = value_b;
                                members[j][donor].retain(|&i| i != p);
                                members[j][donor].push(q);
                                members[j][receiver].retain(|&i| i != q);
                                members[j][receiver].push(p);
                                lb_plus = new_total;
                                trace.push(lb_plus);
                                improved_any = true;
                                accepted = true;
                                if gamma(lb_plus) <= eps_gamma {
                                    return Ok(finish(
                                        assignment,
                                        cells,
                                        cell_values,
                                        per_anticluster,
                                        lb_plus,
                                        trace,
                                        StopReason::EpsGamma,
                                    ));
                                }
                                break 'donor; // next cluster
                            }
                        }
                    }
                }
            }
            let _ = accepted;
        }
        if !improved_any {
            break 'sweeps;
        }
    }

    Ok(finish(
        assignment,
        cells,
        cell_values,
        per_anticluster,
        lb_plus,
        trace,
        StopReason::NoImprovement,
    ))
}
