//! Restriction of a clustering to the subsets of a partition, and the
//! within/between decomposition identities built on it.

use crate::clustering::Clustering;
use crate::dataset::{dist2, Dataset, KahanSum};
use crate::error::{Error, Result};

/// Cells A_jt = C_j intersect S_t for a clustering and a T-way partition.
/// Empty cells have size 0 and no mean; they contribute 0 everywhere.
#[derive(Debug, Clone)]
pub struct RestrictedClustering {
    /// cells[j][t] -> point indices.
    pub cells: Vec<Vec<Vec<usize>>>,
    /// cell_means[j][t] -> mean of the cell, None when empty.
    pub cell_means: Vec<Vec<Option<Vec<f64>>>>,
    /// cell_sizes[j][t].
    pub cell_sizes: Vec<Vec<usize>>,
    pub k: usize,
    pub t: usize,
}

impl RestrictedClustering {
    /// f(P|_{S_t}): SSE of the restriction on anticluster t, cells around
    /// their own means.
    pub fn restricted_value(&self, ds: &Dataset, t: usize) -> f64 {
        let mut sum = KahanSum::new();
        for j in 0..self.k {
            if let Some(mean) = &self.cell_means[j][t] {
                for &i in &self.cells[j][t] {
                    sum.add(dist2(ds.point(i), mean));
                }
            }
        }
        sum.value()
    }
}

/// Builds all cells A_jt with sizes and means.
pub fn restrict(
    ds: &Dataset,
    clustering: &Clustering,
    subsets: &[usize],
    t: usize,
) -> Result<RestrictedClustering> {
    if subsets.len() != ds.n() {
        return Err(Error::AssignmentLength {
            found: subsets.len(),
            expected: ds.n(),
        });
    }
    let k = clustering.k();
    let mut cells = vec![vec![Vec::new(); t]; k];
    for (i, (&j, &s)) in clustering.assignment().iter().zip(subsets).enumerate() {
        if s >= t {
            return Err(Error::ClusterIndexOutOfRange { index: s, k: t });
        }
        cells[j][s].push(i);
    }
    let d = ds.d();
    let mut cell_means = vec![vec![None; t]; k];
    let mut cell_sizes = vec![vec![0usize; t]; k];
    for j in 0..k {
        for s in 0..t {
            let cell = &cells[j][s];
            cell_sizes[j][s] = cell.len();
            if !cell.is_empty() {
                let mut mean = vec![0.0; d];
                for &i in cell {
                    for (acc, &x) in mean.iter_mut().zip(ds.point(i)) {
                        *acc += x;
                    }
                }
                let inv = 1.0 / cell.len() as f64;
                for x in mean.iter_mut() {
                    *x *= inv;
                }
                cell_means[j][s] = Some(mean);
            }
        }
    }
    Ok(RestrictedClustering {
        cells,
        cell_means,
        cell_sizes,
        k,
        t,
    })
}

/// Per-cell within and between terms of the decomposition
///   f(P) = sum_t f(P|_{S_t}) + sum_{j,t} n_jt * ||mu_jt - mu_j||^2
/// plus the residual of the identity, which should vanish.
pub struct Decomposition {
    /// withins[j][t]: SSE of cell A_jt around its own mean.
    pub withins: Vec<Vec<f64>>,
    /// betweens[j][t]: n_jt * ||mu_jt - mu_j||^2.
    pub betweens: Vec<Vec<f64>>,
    pub residual: f64,
}

pub fn decomposition_identity(
    ds: &Dataset,
    clustering: &Clustering,
    subsets: &[usize],
    t: usize,
) -> Result<Decomposition> {
    let restricted = restrict(ds, clustering, subsets, t)?;
    let k = clustering.k();
    let mut withins = vec![vec![0.0; t]; k];
    let mut betweens = vec![vec![0.0; t]; k];
    let mut total = KahanSum::new();
    for j in 0..k {
        for s in 0..t {
            if let Some(mean) = &restricted.cell_means[j][s] {
                let mut w = KahanSum::new();
                for &i in &restricted.cells[j][s] {
                    w.add(dist2(ds.point(i), mean));
                }
                withins[j][s] = w.value();
                betweens[j][s] =
                    restricted.cell_sizes[j][s] as f64 * dist2(mean, clustering.centroid(j));
                total.add(withins[j][s]);
                total.add(betweens[j][s]);
            }
        }
    }
    let residual = clustering.sse() - total.value();
    Ok(Decomposition {
        withins,
        betweens,
        residual,
    })
}

/// Splits the certification gap into its two nonnegative sources:
/// term A = sum_t [f(P|_{S_t}) - value_t] (per-subset suboptimality) and
/// term B = sum_{j,t} n_jt * ||mu_jt - mu_j||^2 (between-subset dispersion).
pub fn gap_terms(
    ds: &Dataset,
    clustering: &Clustering,
    subsets: &[usize],
    t: usize,
    subproblem_values: &[f64],
) -> Result<(f64, f64)> {
    if subproblem_values.len() != t {
        return Err(Error::SubproblemValuesLength {
            found: subproblem_values.len(),
            expected: t,
        });
    }
    let restricted = restrict(ds, clustering, subsets, t)?;
    let mut term_a = KahanSum::new();
    for (s, &value) in subproblem_values.iter().enumerate() {
        term_a.add(restricted.restricted_value(ds, s) - value);
    }
    let mut term_b = KahanSum::new();
    for j in 0..clustering.k() {
        for s in 0..t {
            if let Some(mean) = &restricted.cell_means[j][s] {
                term_b.add(restricted.cell_sizes[j][s] as f64 * dist2(mean, clustering.centroid(j)));
            }
        }
    }
    Ok((term_a.value(), term_b.value()))
}
