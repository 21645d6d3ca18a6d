//! End-to-end validation: build and refine an anticlustering partition,
//! certify each anticluster with the exact solver, and report a provable
//! optimality gap for the input clustering.

use crate::anticluster::{evaluate_lb_plus, initialize, swap_refine, StopReason};
use crate::clustering::Clustering;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exact::{solve, SolveStatus, SubproblemResult};
use crate::kmeans::KMeansConfig;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Anticlusters larger than this are unlikely to certify exactly within a
/// desk-scale budget; `validate` warns when the threshold is exceeded.
pub const EXACT_RANGE_WARN: usize = 60;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub t: usize,
    /// Multi-start restarts for the input clustering.
    pub restarts_kmeans: usize,
    /// Candidate anticluster partitions R in the initialization phase.
    pub restarts_anticluster: usize,
    /// Minimum gap threshold, in percent.
    pub eps_gamma_pct: f64,
    /// Swap-procedure time limit in seconds; defaults to 4*T minutes.
    pub swap_time_limit_s: Option<f64>,
    /// Certification budget per anticluster, in seconds.
    pub certify_budget_s: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(k: usize, t: usize) -> Self {
        Self {
            k,
            t,
            restarts_kmeans: 1000,
            restarts_anticluster: 15,
            eps_gamma_pct: 0.001,
            swap_time_limit_s: None,
            certify_budget_s: 60.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1
            || self.t < 1
            || self.restarts_kmeans < 1
            || self.restarts_anticluster < 1
        {
            return Err(Error::InvalidConfig("all counts must be >= 1".into()));
        }
        if self.eps_gamma_pct < 0.0 {
            return Err(Error::InvalidConfig("eps_gamma must be >= 0".into()));
        }
        if self.certify_budget_s <= 0.0 {
            return Err(Error::InvalidBudget(self.certify_budget_s));
        }
        Ok(())
    }

    pub fn swap_time_limit(&self) -> Duration {
        Duration::from_secs_f64(
            self.swap_time_limit_s
                .unwrap_or(4.0 * 60.0 * self.t as f64),
        )
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        let mut cfg = KMeansConfig::new(self.k);
        cfg.restarts = self.restarts_kmeans;
        cfg.seed = self.seed;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnticlusterReport {
    pub t: usize,
    pub value_lb: f64,
    pub value_ub: f64,
    pub status: SolveStatus,
    pub time_s: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub init_s: f64,
    pub heur_s: f64,
    pub certify_s: f64,
    pub total_min: f64,
}

/// The validation outcome: upper bound, refined LB+ approximation,
/// certified lower bound, and both gaps in percent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub ub: f64,
    pub lb_plus: f64,
    pub lb: f64,
    pub gamma_plus_pct: f64,
    pub gamma_lb_pct: f64,
    pub stop_reason: StopReason,
    /// True when some subproblem failed and contributed a zero bound.
    pub degraded: bool,
    pub per_anticluster: Vec<AnticlusterReport>,
    pub timings: Timings,
    pub config: RunConfig,
}

impl PartialEq for Certificate {
    fn eq(&self, other: &Self) -> bool {
        self.ub == other.ub
            && self.lb_plus == other.lb_plus
            && self.lb == other.lb
            && self.gamma_plus_pct == other.gamma_plus_pct
            && self.gamma_lb_pct == other.gamma_lb_pct
            && self.stop_reason == other.stop_reason
            && self.degraded == other.degraded
            && self.per_anticluster.len() == other.per_anticluster.len()
            && self
                .per_anticluster
                .iter()
                .zip(&other.per_anticluster)
                .all(|(a, b)| {
                    a.t == b.t
                        && a.value_lb == b.value_lb
                        && a.value_ub == b.value_ub
                        && a.status == b.status
                        && a.time_s == b.time_s
                })
            && self.timings.init_s == other.timings.init_s
            && self.timings.heur_s == other.timings.heur_s
            && self.timings.certify_s == other.timings.certify_s
            && self.timings.total_min == other.timings.total_min
            && self.config == other.config
    }
}

fn certify_subsets(
    ds: &Dataset,
    subsets: &[Vec<usize>],
    k: usize,
    initial_ubs: &[f64],
    budget: f64,
) -> (Vec<AnticlusterReport>, f64, bool) {
    let reports: Vec<AnticlusterReport> = subsets
        .par_iter()
        .enumerate()
        .map(|(t, subset)| {
            let started = Instant::now();
            match solve(ds, subset, k, initial_ubs[t], budget) {
                Ok(SubproblemResult {
                    value_lb,
                    value_ub,
                    status,
                    time_spent,
                    ..
                }) => AnticlusterReport {
                    t,
                    value_lb,
                    value_ub,
                    status,
                    time_s: time_spent,
                },
                // a failed subproblem keeps the certificate valid with a
                // zero contribution
                Err(_) => AnticlusterReport {
                    t,
                    value_lb: 0.0,
                    value_ub: initial_ubs[t],
                    status: SolveStatus::Failed,
                    time_s: started.elapsed().as_secs_f64(),
                },
            }
        })
        .collect();
    let lb: f64 = reports.iter().map(|r| r.value_lb).sum();
    let degraded = reports.iter().any(|r| r.status == SolveStatus::Failed);
    (reports, lb, degraded)
}

/// Outcome of [`validate`] plus the LB+ trace of the swap phase.
pub struct ValidationRun {
    pub certificate: Certificate,
    pub lb_plus_trace: Vec<f64>,
}

/// Full AVOC pipeline on an existing clustering: initialization,
/// swap refinement, then per-anticluster certification.
pub fn validate(ds: &Dataset, clustering: &Clustering, config: &RunConfig) -> Result<ValidationRun> {
    config.validate()?;
    let started = Instant::now();
    let ub = clustering.sse();
    let kmeans_cfg = config.kmeans_config();

    let init_started = Instant::now();
    let partition = initialize(
        ds,
        clustering,
        config.t,
        config.restarts_anticluster,
        config.seed,
        &kmeans_cfg,
        Duration::from_secs(60),
    )?;
    let init_s = init_started.elapsed().as_secs_f64();

    let heur_started = Instant::now();
    let outcome = swap_refine(
        ds,
        clustering,
        partition,
        ub,
        config.eps_gamma_pct / 100.0,
        config.swap_time_limit(),
        &kmeans_cfg,
    )?;
    let heur_s = heur_started.elapsed().as_secs_f64();

    let subsets = outcome.partition.subsets();
    if let Some(big) = subsets.iter().map(|s| s.len()).max() {
        if big > EXACT_RANGE_WARN {
            eprintln!(
                "warning: largest anticluster has {big} points; exact certification \
                 within the budget is unlikely above {EXACT_RANGE_WARN}"
            );
        }
    }

    let certify_started = Instant::now();
    let (per_anticluster, lb, degraded) = certify_subsets(
        ds,
        &subsets,
        config.k,
        &outcome.partition.per_anticluster,
        config.certify_budget_s,
    );
    let certify_s = certify_started.elapsed().as_secs_f64();

    let lb_plus = outcome.partition.lb_plus;
    let certificate = Certificate {
        ub,
        lb_plus,
        lb,
        gamma_plus_pct: 100.0 * (ub - lb_plus) / ub,
        gamma_lb_pct: 100.0 * (ub - lb) / ub,
        stop_reason: outcome.stop_reason,
        degraded,
        per_anticluster,
        timings: Timings {
            init_s,
            heur_s,
            certify_s,
            total_min: started.elapsed().as_secs_f64() / 60.0,
        },
        config: config.clone(),
    };
    Ok(ValidationRun {
        certificate,
        lb_plus_trace: outcome.trace,
    })
}

/// Certifies a given partition as-is (no initialization, no refinement).
/// Used for baselines and adversarial constructions.
pub fn certify_partition(
    ds: &Dataset,
    clustering: &Clustering,
    subsets_assignment: Vec<usize>,
    config: &RunConfig,
) -> Result<Certificate> {
    config.validate()?;
    let started = Instant::now();
    let ub = clustering.sse();
    let kmeans_cfg = config.kmeans_config();
    let partition = evaluate_lb_plus(ds, clustering, subsets_assignment, config.t, &kmeans_cfg)?;
    let subsets = partition.subsets();
    let certify_started = Instant::now();
    let (per_anticluster, lb, degraded) = certify_subsets(
        ds,
        &subsets,
        config.k,
        &partition.per_anticluster,
        config.certify_budget_s,
    );
    let certify_s = certify_started.elapsed().as_secs_f64();
    Ok(Certificate {
        ub,
        lb_plus: partition.lb_plus,
        lb,
        gamma_plus_pct: 100.0 * (ub - partition.lb_plus) / ub,
        gamma_lb_pct: 100.0 * (ub - lb) / ub,
        stop_reason: StopReason::NoImprovement,
        degraded,
        per_anticluster,
        timings: Timings {
            init_s: 0.0,
            heur_s: 0.0,
            certify_s,
            total_min: started.elapsed().as_secs_f64() / 60.0,
        },
        config: config.clone(),
    })
}

/// Random equal-size partition of the dataset; the baseline the paper
/// compares against.
pub fn random_balanced_partition(n: usize, t: usize, rng: &mut StdRng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut assignment = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % t;
    }
    assignment
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

fn stop_label(reason: StopReason) -> &'static str {
    match reason {
        StopReason::EpsGamma => "\u{03b5}_\u{03b3}",
        StopReason::Timeout => "T/O",
        StopReason::NoImprovement => "h",
    }
}

/// Serializes a certificate. JSON is stable-keyed and round-trips; text
/// mirrors the tabular report layout.
pub fn emit_report(cert: &Certificate, format: ReportFormat) -> Result<String> {
    if cert.per_anticluster.is_empty() {
        return Err(Error::EmptyCertificate);
    }
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(cert)?),
        ReportFormat::Text => {
            let mut out = String::new();
            use std::fmt::Write;
            writeln!(
                out,
                "{:>4} {:>12} {:>12} {:>9} {:>9} {:>10} {:>10} {:>5}",
                "T", "gamma_LB(%)", "gamma^+(%)", "Init(s)", "Heur(s)", "Certify(s)", "Total(min)", "Stop"
            )
            .unwrap();
            writeln!(
                out,
                "{:>4} {:>12.3} {:>12.3} {:>9.1} {:>9.1} {:>10.1} {:>10.2} {:>5}",
                cert.config.t,
                cert.gamma_lb_pct,
                cert.gamma_plus_pct,
                cert.timings.init_s,
                cert.timings.heur_s,
                cert.timings.certify_s,
                cert.timings.total_min,
                stop_label(cert.stop_reason)
            )
            .unwrap();
            writeln!(out).unwrap();
            writeln!(out, "UB = {:.6}  LB+ = {:.6}  LB = {:.6}", cert.ub, cert.lb_plus, cert.lb)
                .unwrap();
            if cert.degraded {
                writeln!(out, "certificate is degraded: some subproblems failed").unwrap();
            }
            writeln!(
                out,
                "{:>4} {:>14} {:>14} {:>8} {:>9}",
                "t", "value_lb", "value_ub", "status", "time(s)"
            )
            .unwrap();
            for r in &cert.per_anticluster {
                writeln!(
                    out,
                    "{:>4} {:>14.6} {:>14.6} {:>8} {:>9.2}",
                    r.t,
                    r.value_lb,
                    r.value_ub,
                    match r.status {
                        SolveStatus::Exact => "exact",
                        SolveStatus::Anytime => "anytime",
                        SolveStatus::Failed => "failed",
                    },
                    r.time_s
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}
