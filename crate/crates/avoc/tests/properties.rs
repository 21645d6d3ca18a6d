//! Property tests for the algebraic identities and bound relations the
//! rest of the solver depends on.

use avoc::clustering::{compute_sse, compute_sse_pairwise};
use avoc::dataset::Dataset;
use avoc::exact::{brute_force, solve};
use avoc::kmeans::{lloyd_subset, seeded_run, EmptyPolicy, KMeansConfig};
use avoc::restriction::{decomposition_identity, restrict};
use avoc::Clustering;
use proptest::prelude::*;

fn arb_points(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
        proptest::collection::vec(
            proptest::collection::vec(-10.0f64..10.0, d..=d),
            n..=n,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn huygens_equivalence(
        rows in arb_points(50, 5),
        seed in any::<u64>(),
    ) {
        let n = rows.len();
        let k = (seed as usize % 4 + 1).min(n);
        let ds = Dataset::from_rows(&rows).unwrap();
        let mut a: Vec<usize> = (0..n).map(|i| (i.wrapping_mul(seed as usize % 31 + 1)) % k).collect();
        for j in 0..k { a[j] = j; }
        let (sse, _) = compute_sse(&ds, &a, k).unwrap();
        let pairwise = compute_sse_pairwise(&ds, &a, k).unwrap();
        prop_assert!((sse - pairwise).abs() <= 1e-9 * sse.max(1.0));
    }

    #[test]
    fn lemma1_residual_vanishes(
        rows in arb_points(40, 3),
        assignment_seed in 0usize..1000,
        t in 1usize..=4,
    ) {
        let n = rows.len();
        let k = (assignment_seed % 3 + 1).min(n);
        let ds = Dataset::from_rows(&rows).unwrap();
        let mut a: Vec<usize> = (0..n).map(|i| (i * 7 + assignment_seed) % k).collect();
        for j in 0..k { a[j] = j; }
        let clustering = Clustering::new(&ds, a, k).unwrap();
        let subsets: Vec<usize> = (0..n).map(|i| (i * 13 + assignment_seed) % t).collect();
        let dec = decomposition_identity(&ds, &clustering, &subsets, t).unwrap();
        prop_assert!(dec.residual.abs() <= 1e-8 * clustering.sse().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // Restriction baseline: the exact optimum on a subset never exceeds
    // the value of the restricted clustering on that subset.
    #[test]
    fn restriction_dominates_exact(
        rows in arb_points(10, 2),
        assignment_seed in 0usize..1000,
    ) {
        let n = rows.len();
        let k = (assignment_seed % 2 + 2).min(n);
        let ds = Dataset::from_rows(&rows).unwrap();
        let mut a: Vec<usize> = (0..n).map(|i| (i * 3 + assignment_seed) % k).collect();
        for j in 0..k { a[j] = j; }
        let clustering = Clustering::new(&ds, a, k).unwrap();
        let t = 2;
        let subsets: Vec<usize> = (0..n).map(|i| i % t).collect();
        let restricted = restrict(&ds, &clustering, &subsets, t).unwrap();
        for s in 0..t {
            let members: Vec<usize> = (0..n).filter(|&i| subsets[i] == s).collect();
            if members.len() < k {
                continue;
            }
            let (exact_value, _) = brute_force(&ds, &members, k).unwrap();
            let restricted_value = restricted.restricted_value(&ds, s);
            prop_assert!(exact_value <= restricted_value + 1e-9);
        }
    }

    // seeded_run's value is an upper bound on the subset optimum.
    #[test]
    fn seeded_run_upper_bounds_exact(
        rows in arb_points(10, 2),
        assignment_seed in 0usize..1000,
    ) {
        let n = rows.len();
        let k = 2.min(n);
        let ds = Dataset::from_rows(&rows).unwrap();
        let mut a: Vec<usize> = (0..n).map(|i| (i + assignment_seed) % k).collect();
        for j in 0..k { a[j] = j; }
        let clustering = Clustering::new(&ds, a, k).unwrap();
        let subset: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
        if subset.len() >= k {
            let cfg = KMeansConfig::new(k);
            let run = seeded_run(&ds, &subset, clustering.centroids(), &cfg).unwrap();
            let (exact_value, _) = brute_force(&ds, &subset, k).unwrap();
            prop_assert!(run.value >= exact_value - 1e-9);
        }
    }

    // Any budget yields a lower bound that never exceeds the optimum.
    #[test]
    fn anytime_bound_is_valid(
        rows in arb_points(11, 2),
        budget_us in 1u64..500,
    ) {
        let n = rows.len();
        let k = 3.min(n);
        let ds = Dataset::from_rows(&rows).unwrap();
        let subset: Vec<usize> = (0..n).collect();
        let (oracle, _) = brute_force(&ds, &subset, k).unwrap();
        let result = solve(&ds, &subset, k, f64::INFINITY, budget_us as f64 * 1e-6).unwrap();
        prop_assert!(result.value_lb <= oracle + 1e-9);
        prop_assert!(result.value_lb <= result.value_ub + 1e-9);
        prop_assert!(result.value_lb >= -1e-12);
    }

    // Lloyd never increases the SSE from one iteration to the next.
    #[test]
    fn lloyd_sse_monotone(
        rows in arb_points(30, 3),
        seed in any::<u64>(),
    ) {
        let n = rows.len();
        let k = (seed as usize % 3 + 1).min(n);
        let ds = Dataset::from_rows(&rows).unwrap();
        let subset: Vec<usize> = (0..n).collect();
        let initial: Vec<Vec<f64>> = (0..k).map(|j| ds.point(j).to_vec()).collect();
        let cfg = KMeansConfig::new(k);
        let run = lloyd_subset(&ds, &subset, &initial, &cfg, EmptyPolicy::Allow).unwrap();
        for w in run.trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
