//! Lloyd's algorithm with k-means++ seeding, a multi-start driver for the
//! input clustering, and centroid-seeded runs on anticluster subsets.

use crate::clustering::Clustering;
use crate::dataset::{dist2, Dataset, KahanSum};
use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Centroid-movement threshold for convergence.
    pub tolerance: f64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iters: 100,
            restarts: 1000,
            seed: 0,
            tolerance: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.max_iters < 1 || self.restarts < 1 {
            return Err(Error::InvalidConfig(
                "k, max_iters and restarts must all be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// k-means++: first centroid uniform, each next sampled proportionally to
/// the squared distance to the nearest chosen centroid.
pub fn kmeanspp_seed(
    ds: &Dataset,
    subset: &[usize],
    k: usize,
    rng: &mut StdRng,
) -> Result<Vec<Vec<f64>>> {
    if k > subset.len() {
        return Err(Error::TooFewPoints {
            k,
            n: subset.len(),
        });
    }
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = subset[rng.gen_range(0..subset.len())];
    centroids.push(ds.point(first).to_vec());
    let mut nearest: Vec<f64> = subset
        .iter()
        .map(|&i| dist2(ds.point(i), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = subset.len() - 1;
            for (pos, &w) in nearest.iter().enumerate() {
                if target < w {
                    pick = pos;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // all remaining mass is zero (duplicate points); fall back to uniform
            rng.gen_range(0..subset.len())
        };
        let c = ds.point(subset[chosen]).to_vec();
        for (pos, &i) in subset.iter().enumerate() {
            let d = dist2(ds.point(i), &c);
            if d < nearest[pos] {
                nearest[pos] = d;
            }
        }
        centroids.push(c);
    }
    Ok(centroids)
}

/// How Lloyd treats clusters that lose all their points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyPolicy {
    /// Reassign the point farthest from its centroid to the empty cluster.
    /// Used for full-dataset clusterings, which must have no empty cluster.
    Repair,
    /// Keep the cluster empty with zero contribution. Used for anticluster
    /// subproblems, where the value is an upper approximation.
    Allow,
}

/// Result of a Lloyd run on a point subset.
#[derive(Debug, Clone)]
pub struct SubsetRun {
    /// Global point indices per cluster; may contain empty cells under
    /// [`EmptyPolicy::Allow`].
    pub cells: Vec<Vec<usize>>,
    /// Final centroids; an empty cluster keeps its last centroid.
    pub centroids: Vec<Vec<f64>>,
    /// Final SSE of the subset around the per-cluster means.
    pub value: f64,
    pub iterations: usize,
    /// SSE after each iteration; non-increasing.
    pub trace: Vec<f64>,
}

fn assign_step(
    ds: &Dataset,
    subset: &[usize],
    centroids: &[Vec<f64>],
    assignment: &mut [usize],
) -> bool {
    let mut changed = false;
    for (pos, &i) in subset.iter().enumerate() {
        let p = ds.point(i);
        let mut best = 0usize;
        let mut best_d = dist2(p, &centroids[0]);
        for (j, c) in centroids.iter().enumerate().skip(1) {
            let d = dist2(p, c);
            // ties break toward the lowest cluster index
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if assignment[pos] != best {
            assignment[pos] = best;
            changed = true;
        }
    }
    changed
}

fn current_sse(ds: &Dataset, subset: &[usize], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    let mut s = KahanSum::new();
    for (pos, &i) in subset.iter().enumerate() {
        s.add(dist2(ds.point(i), &centroids[assignment[pos]]));
    }
    s.value()
}

/// Lloyd's algorithm on a subset from given initial centroids.
pub fn lloyd_subset(
    ds: &Dataset,
    subset: &[usize],
    initial_centroids: &[Vec<f64>],
    config: &KMeansConfig,
    policy: EmptyPolicy,
) -> Result<SubsetRun> {
    config.validate()?;
    let k = initial_centroids.len();
    let d = ds.d();
    for c in initial_centroids {
        if c.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.len(),
            });
        }
    }
    let mut centroids: Vec<Vec<f64>> = initial_centroids.to_vec();
    let mut assignment = vec![0usize; subset.len()];
    assign_step(ds, subset, &centroids, &mut assignment);
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..config.max_iters {
        iterations += 1;

        if policy == EmptyPolicy::Repair {
            repair_empty(ds, subset, &centroids, &mut assignment, k);
        }

        // update step: means of the assigned points
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (pos, &i) in subset.iter().enumerate() {
            let j = assignment[pos];
            counts[j] += 1;
            for (acc, &x) in sums[j].iter_mut().zip(ds.point(i)) {
                *acc += x;
            }
        }
        let mut movement: f64 = 0.0;
        for j in 0..k {
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                for x in sums[j].iter_mut() {
                    *x *= inv;
                }
                let moved = dist2(&sums[j], &centroids[j]).sqrt();
                if moved > movement {
                    movement = moved;
                }
                centroids[j] = std::mem::take(&mut sums[j]);
            }
        }

        let changed = assign_step(ds, subset, &centroids, &mut assignment);
        trace.push(current_sse(ds, subset, &centroids, &assignment));

        if !changed || movement < config.tolerance {
            break;
        }
    }

    if policy == EmptyPolicy::Repair {
        if repair_empty(ds, subset, &centroids, &mut assignment, k) {
            // means are stale after a forced reassignment; refresh once
            let mut sums = vec![vec![0.0; d]; k];
            let mut counts = vec![0usize; k];
            for (pos, &i) in subset.iter().enumerate() {
                let j = assignment[pos];
                counts[j] += 1;
                for (acc, &x) in sums[j].iter_mut().zip(ds.point(i)) {
                    *acc += x;
                }
            }
            for j in 0..k {
                if counts[j] > 0 {
                    let inv = 1.0 / counts[j] as f64;
                    for x in sums[j].iter_mut() {
                        *x *= inv;
                    }
                    centroids[j] = std::mem::take(&mut sums[j]);
                }
            }
        }
    }

    // final value around the exact cell means
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &i) in subset.iter().enumerate() {
        cells[assignment[pos]].push(i);
    }
    let mut value = KahanSum::new();
    for (j, cell) in cells.iter().enumerate() {
        if !cell.is_empty() {
            let mean = crate::clustering::subset_mean(ds, cell);
            for &i in cell {
                value.add(dist2(ds.point(i), &mean));
            }
            centroids[j] = mean;
        }
    }
    Ok(SubsetRun {
        cells,
        centroids,
        value: value.value(),
        iterations,
        trace,
    })
}

/// Moves the point farthest from its centroid into each empty cluster.
/// Returns true if anything moved.
fn repair_empty(
    ds: &Dataset,
    subset: &[usize],
    centroids: &[Vec<f64>],
    assignment: &mut [usize],
    k: usize,
) -> bool {
    let mut counts = vec![0usize; k];
    for &a in assignment.iter() {
        counts[a] += 1;
    }
    let mut moved = false;
    for j in 0..k {
        while counts[j] == 0 {
            let mut worst: Option<(usize, f64)> = None;
            for (pos, &i) in subset.iter().enumerate() {
                let owner = assignment[pos];
                if counts[owner] < 2 {
                    continue;
                }
                let d = dist2(ds.point(i), &centroids[owner]);
                if worst.map_or(true, |(_, wd)| d > wd) {
                    worst = Some((pos, d));
                }
            }
            match worst {
                Some((pos, _)) => {
                    counts[assignment[pos]] -= 1;
                    assignment[pos] = j;
                    counts[j] += 1;
                    moved = true;
                }
                None => break,
            }
        }
    }
    moved
}

/// Full-dataset Lloyd with empty-cluster repair.
pub fn lloyd(ds: &Dataset, initial_centroids: &[Vec<f64>], config: &KMeansConfig) -> Result<Clustering> {
    let subset: Vec<usize> = (0..ds.n()).collect();
    let run = lloyd_subset(ds, &subset, initial_centroids, config, EmptyPolicy::Repair)?;
    let mut assignment = vec![0usize; ds.n()];
    for (j, cell) in run.cells.iter().enumerate() {
        for &i in cell {
            assignment[i] = j;
        }
    }
    Clustering::new(ds, assignment, initial_centroids.len())
}

fn child_seed(master: u64, index: u64) -> u64 {
    // splitmix64 step so restarts get decorrelated, schedule-independent streams
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Best-SSE clustering over `restarts` independent seeded runs.
/// Deterministic given the seed; restarts run in parallel.
pub fn multistart(ds: &Dataset, config: &KMeansConfig) -> Result<Clustering> {
    config.validate()?;
    if config.k > ds.n() {
        return Err(Error::TooFewPoints {
            k: config.k,
            n: ds.n(),
        });
    }
    let best = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = StdRng::seed_from_u64(child_seed(config.seed, r as u64));
            let subset: Vec<usize> = (0..ds.n()).collect();
            let centroids = kmeanspp_seed(ds, &subset, config.k, &mut rng)?;
            let clustering = lloyd(ds, &centroids, config)?;
            Ok((r, clustering))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, winner) = best
        .into_iter()
        .min_by(|(ra, a), (rb, b)| {
            a.sse()
                .partial_cmp(&b.sse())
                .unwrap()
                .then(ra.cmp(rb))
        })
        .expect("restarts >= 1");
    Ok(winner)
}

/// Lloyd on a subset starting from externally given centroids (no
/// reseeding); empty clusters allowed. This is the LB+ evaluation step.
pub fn seeded_run(
    ds: &Dataset,
    subset: &[usize],
    centroids: &[Vec<f64>],
    config: &KMeansConfig,
) -> Result<SubsetRun> {
    if subset.is_empty() {
        return Err(Error::TooFewPoints { k: centroids.len(), n: 0 });
    }
    lloyd_subset(ds, subset, centroids, config, EmptyPolicy::Allow)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds_1d(xs: &[f64]) -> Dataset {
        Dataset::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn seed_k1_is_a_point() {
        let ds = ds_1d(&[1.0, 2.0, 3.0]);
        let mut rng = StdRng::seed_from_u64(0);
        let subset = vec![0, 1, 2];
        let c = kmeanspp_seed(&ds, &subset, 1, &mut rng).unwrap();
        assert_eq!(c.len(), 1);
        assert!([1.0, 2.0, 3.0].contains(&c[0][0]));
    }

    #[test]
    fn seed_identical_points_duplicates_ok() {
        let ds = ds_1d(&[5.0, 5.0, 5.0]);
        let mut rng = StdRng::seed_from_u64(0);
        let c = kmeanspp_seed(&ds, &[0, 1, 2], 2, &mut rng).unwrap();
        assert_eq!(c, vec![vec![5.0], vec![5.0]]);
    }

    #[test]
    fn seed_k_greater_than_n_errors() {
        let ds = ds_1d(&[0.0]);
        let mut rng = StdRng::seed_from_u64(0);
        assert!(matches!(
            kmeanspp_seed(&ds, &[0], 2, &mut rng),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn seed_second_centroid_distribution() {
        // 1-D {0,1,9,10}, k=2: given first seed 0, second is 9 or 10 with
        // probability (81+100)/182; over many draws the far pair dominates.
        let ds = ds_1d(&[0.0, 1.0, 9.0, 10.0]);
        let subset = vec![0, 1, 2, 3];
        let mut far = 0usize;
        let mut total = 0usize;
        for s in 0..4000 {
            let mut rng = StdRng::seed_from_u64(s);
            let c = kmeanspp_seed(&ds, &subset, 2, &mut rng).unwrap();
            if c[0][0] == 0.0 {
                total += 1;
                if c[1][0] >= 9.0 {
                    far += 1;
                }
            }
        }
        assert!(total > 500);
        let frac = far as f64 / total as f64;
        let expected = 181.0 / 182.0;
        assert!((frac - expected).abs() < 0.02, "frac = {frac}");
    }

    #[test]
    fn lloyd_optimal_start_stays() {
        let ds = ds_1d(&[0.0, 1.0, 9.0, 10.0]);
        let cfg = KMeansConfig::new(2);
        let clustering = lloyd(&ds, &[vec![0.5], vec![9.5]], &cfg).unwrap();
        assert!((clustering.sse() - 1.0).abs() < 1e-12);
        assert_eq!(clustering.assignment(), &[0, 0, 1, 1]);
    }

    #[test]
    fn lloyd_k_equals_n_zero() {
        let ds = ds_1d(&[0.0, 4.0, 8.0]);
        let cfg = KMeansConfig::new(3);
        let clustering = lloyd(&ds, &[vec![0.0], vec![4.0], vec![8.0]], &cfg).unwrap();
        assert_eq!(clustering.sse(), 0.0);
    }

    #[test]
    fn lloyd_repairs_empty_cluster() {
        // both initial centroids coincide; repair must yield 2 non-empty clusters
        let ds = ds_1d(&[0.0, 0.1, 9.0, 9.1]);
        let cfg = KMeansConfig::new(2);
        let clustering = lloyd(&ds, &[vec![0.0], vec![0.0]], &cfg).unwrap();
        let sizes = clustering.cluster_sizes();
        assert!(sizes.iter().all(|&s| s > 0), "sizes = {sizes:?}");
    }

    #[test]
    fn lloyd_trace_monotone() {
        let ds = Dataset::from_rows(
            &(0..30)
                .map(|i| vec![(i * 7 % 13) as f64, (i * 5 % 11) as f64])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let subset: Vec<usize> = (0..30).collect();
        let mut rng = StdRng::seed_from_u64(4);
        let cfg = KMeansConfig::new(3);
        let centroids = kmeanspp_seed(&ds, &subset, 3, &mut rng).unwrap();
        let run = lloyd_subset(&ds, &subset, &centroids, &cfg, EmptyPolicy::Repair).unwrap();
        for w in run.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "trace not monotone: {:?}", run.trace);
        }
    }

    #[test]
    fn multistart_two_pairs_optimum() {
        let ds = ds_1d(&[0.0, 1.0, 9.0, 10.0]);
        let mut cfg = KMeansConfig::new(2);
        cfg.restarts = 50;
        cfg.seed = 3;
        let clustering = multistart(&ds, &cfg).unwrap();
        assert!((clustering.sse() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multistart_deterministic() {
        let ds = Dataset::from_rows(
            &(0..100)
                .map(|i| vec![((i * 37) % 97) as f64 / 97.0, ((i * 61) % 89) as f64 / 89.0])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let mut cfg = KMeansConfig::new(3);
        cfg.restarts = 20;
        cfg.seed = 42;
        let a = multistart(&ds, &cfg).unwrap();
        let b = multistart(&ds, &cfg).unwrap();
        assert_eq!(a.sse().to_bits(), b.sse().to_bits());
        assert_eq!(a.assignment(), b.assignment());
    }

    #[test]
    fn multistart_prefix_monotone_in_restarts() {
        let ds = Dataset::from_rows(
            &(0..40)
                .map(|i| vec![((i * 17) % 41) as f64, ((i * 29) % 37) as f64])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for restarts in [1, 2, 5, 10, 20] {
            let mut cfg = KMeansConfig::new(3);
            cfg.restarts = restarts;
            cfg.seed = 7;
            let c = multistart(&ds, &cfg).unwrap();
            assert!(c.sse() <= prev + 1e-12);
            prev = c.sse();
        }
    }

    #[test]
    fn seeded_run_whole_dataset_not_worse() {
        let ds = ds_1d(&[0.0, 1.0, 2.0, 8.0, 9.0, 12.0]);
        let clustering =
            Clustering::new(&ds, vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let subset: Vec<usize> = (0..6).collect();
        let cfg = KMeansConfig::new(2);
        let run = seeded_run(&ds, &subset, clustering.centroids(), &cfg).unwrap();
        assert!(run.value <= clustering.sse() + 1e-12);
    }

    #[test]
    fn seeded_run_single_point_zero() {
        let ds = ds_1d(&[0.0, 5.0]);
        let cfg = KMeansConfig::new(2);
        let run = seeded_run(&ds, &[1], &[vec![0.0], vec![5.0]], &cfg).unwrap();
        assert_eq!(run.value, 0.0);
        // one empty cluster, allowed
        assert_eq!(run.cells.iter().filter(|c| c.is_empty()).count(), 1);
    }
}
