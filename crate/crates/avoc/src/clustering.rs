//! The MSSC objective in both formulations: distances to centroids and
//! pairwise distances within clusters (Huygens' theorem).

use crate::dataset::{dist2, Dataset, KahanSum};
use crate::error::{Error, Result};

/// A feasible K-clustering of a dataset: every point assigned to exactly
/// one cluster, no cluster empty, centroids equal to cluster means.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    assignment: Vec<usize>,
    k: usize,
    centroids: Vec<Vec<f64>>,
    sse: f64,
}

impl Clustering {
    pub fn new(ds: &Dataset, assignment: Vec<usize>, k: usize) -> Result<Self> {
        let (sse, centroids) = compute_sse(ds, &assignment, k)?;
        Ok(Self {
            assignment,
            k,
            centroids,
            sse,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j]
    }

    pub fn sse(&self) -> f64 {
        self.sse
    }

    /// Point indices of cluster j.
    pub fn members(&self, j: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == j).then_some(i))
            .collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

fn check_assignment(ds: &Dataset, assignment: &[usize], k: usize) -> Result<Vec<usize>> {
    if assignment.len() != ds.n() {
        return Err(Error::AssignmentLength {
            found: assignment.len(),
            expected: ds.n(),
        });
    }
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        if c >= k {
            return Err(Error::ClusterIndexOutOfRange { index: c, k });
        }
        sizes[c] += 1;
    }
    if let Some(j) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster { cluster: j });
    }
    Ok(sizes)
}

/// Total within-cluster sum of squares around cluster means, plus the means.
pub fn compute_sse(ds: &Dataset, assignment: &[usize], k: usize) -> Result<(f64, Vec<Vec<f64>>)> {
    let sizes = check_assignment(ds, assignment, k)?;
    let d = ds.d();
    let mut centroids = vec![vec![0.0; d]; k];
    for (i, &c) in assignment.iter().enumerate() {
        let p = ds.point(i);
        for (acc, &x) in centroids[c].iter_mut().zip(p) {
            *acc += x;
        }
    }
    for (j, centroid) in centroids.iter_mut().enumerate() {
        let inv = 1.0 / sizes[j] as f64;
        for x in centroid.iter_mut() {
            *x *= inv;
        }
    }
    let mut sse = KahanSum::new();
    for (i, &c) in assignment.iter().enumerate() {
        sse.add(dist2(ds.point(i), &centroids[c]));
    }
    Ok((sse.value(), centroids))
}

/// The same objective via the pairwise formulation: for each cluster, the
/// sum of squared distances over ordered pairs divided by twice the
/// cluster size. Equal to [`compute_sse`] by Huygens' theorem.
pub fn compute_sse_pairwise(ds: &Dataset, assignment: &[usize], k: usize) -> Result<f64> {
    check_assignment(ds, assignment, k)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in assignment.iter().enumerate() {
        members[c].push(i);
    }
    let mut total = KahanSum::new();
    for cluster in &members {
        let mut pair_sum = KahanSum::new();
        for &i in cluster {
            for &ip in cluster {
                pair_sum.add(dist2(ds.point(i), ds.point(ip)));
            }
        }
        total.add(pair_sum.value() / (2.0 * cluster.len() as f64));
    }
    Ok(total.value())
}

/// SSE of a point subset around its own mean; 0 for the empty set.
pub fn subset_sse(ds: &Dataset, indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let mean = subset_mean(ds, indices);
    let mut sse = KahanSum::new();
    for &i in indices {
        sse.add(dist2(ds.point(i), &mean));
    }
    sse.value()
}

pub fn subset_mean(ds: &Dataset, indices: &[usize]) -> Vec<f64> {
    let d = ds.d();
    let mut mean = vec![0.0; d];
    for &i in indices {
        for (acc, &x) in mean.iter_mut().zip(ds.point(i)) {
            *acc += x;
        }
    }
    let inv = 1.0 / indices.len() as f64;
    for x in mean.iter_mut() {
        *x *= inv;
    }
    mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ds_1d(xs: &[f64]) -> Dataset {
        Dataset::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn one_point_per_cluster_is_zero() {
        let ds = ds_1d(&[1.0, 5.0, 9.0]);
        let (sse, centroids) = compute_sse(&ds, &[0, 1, 2], 3).unwrap();
        assert_eq!(sse, 0.0);
        assert_eq!(centroids, vec![vec![1.0], vec![5.0], vec![9.0]]);
    }

    #[test]
    fn two_points_single_cluster() {
        let ds = ds_1d(&[0.0, 2.0]);
        let (sse, centroids) = compute_sse(&ds, &[0, 0], 1).unwrap();
        assert_eq!(centroids[0], vec![1.0]);
        assert_eq!(sse, 2.0);
    }

    #[test]
    fn pairwise_three_collinear() {
        // ordered-pair sum for {0,1,2}: 2*(1+4+1) = 12; / (2*3) = 2
        let ds = ds_1d(&[0.0, 1.0, 2.0]);
        let sse = compute_sse_pairwise(&ds, &[0, 0, 0], 1).unwrap();
        assert!((sse - 2.0).abs() < 1e-12);
        let (centroid_form, _) = compute_sse(&ds, &[0, 0, 0], 1).unwrap();
        assert!((sse - centroid_form).abs() < 1e-12);
    }

    #[test]
    fn pairwise_singletons_zero() {
        let ds = ds_1d(&[3.0, 7.0]);
        assert_eq!(compute_sse_pairwise(&ds, &[0, 1], 2).unwrap(), 0.0);
    }

    #[test]
    fn huygens_on_random_instance() {
        let mut rng = StdRng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let ds = Dataset::from_rows(&rows).unwrap();
        let mut assignment: Vec<usize> = (0..10).map(|_| rng.gen_range(0..2)).collect();
        assignment[0] = 0;
        assignment[1] = 1;
        let (sse, _) = compute_sse(&ds, &assignment, 2).unwrap();
        let pairwise = compute_sse_pairwise(&ds, &assignment, 2).unwrap();
        assert!((sse - pairwise).abs() <= 1e-9 * sse.max(1.0));
    }

    #[test]
    fn empty_cluster_rejected() {
        let ds = ds_1d(&[0.0, 1.0]);
        let err = compute_sse(&ds, &[0, 0], 2).unwrap_err();
        assert!(matches!(err, Error::EmptyCluster { cluster: 1 }));
    }

    #[test]
    fn duplicating_points_doubles_sse() {
        let ds = ds_1d(&[0.0, 2.0, 10.0]);
        let (sse, _) = compute_sse(&ds, &[0, 0, 1], 2).unwrap();
        let doubled = ds_1d(&[0.0, 2.0, 0.0, 2.0, 10.0, 10.0]);
        let (sse2, _) = compute_sse(&doubled, &[0, 0, 0, 0, 1, 1], 2).unwrap();
        assert!((sse2 - 2.0 * sse).abs() < 1e-12);
    }
}
