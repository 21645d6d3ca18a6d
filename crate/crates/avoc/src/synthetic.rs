//! Synthetic Gaussian mixture instances: K centers drawn uniformly from
//! [-1, 10] per coordinate, equal mixing proportions, spherical covariance.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub const CENTER_LOW: f64 = -1.0;
pub const CENTER_HIGH: f64 = 10.0;

/// Samples n points from a mixture of k spherical Gaussians in dimension d.
/// Components get equal shares (sizes differ by at most one). The returned
/// labels are ground truth for diagnostics only.
pub fn generate_synthetic(
    n: usize,
    k: usize,
    sigma: f64,
    d: usize,
    rng: &mut StdRng,
) -> Result<(Dataset, Vec<usize>)> {
    if n < k || k == 0 {
        return Err(Error::TooFewPoints { k, n });
    }
    if sigma <= 0.0 {
        return Err(Error::InvalidConfig("sigma must be positive".into()));
    }
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.gen_range(CENTER_LOW..CENTER_HIGH)).collect())
        .collect();
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let component = i % k;
        let point: Vec<f64> = centers[component]
            .iter()
            .map(|&c| c + normal.sample(rng))
            .collect();
        rows.push(point);
        labels.push(component);
    }
    Ok((Dataset::from_rows(&rows)?, labels))
}
