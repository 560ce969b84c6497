//! Success probability, halving counts and grouping of resting positions.
//!
//! A single raindrop reaches the global optimum iff it falls inside the region
//! `T` of starts whose descent ends there. Raindrops are independent, so with
//! `p = |T| / |S|` the chance that at least one of `N` raindrops succeeds is
//! `1 - (1 - p)^N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Objective;
use crate::engine::{Raindrop, RunConfig, RunResult, Runner};
use crate::error::{Error, Result};
use crate::objectives::ObjectiveSpec;

pub const DEFAULT_SUCCESS_RADIUS: f64 = 0.1;

/// Measure of the success region `T` relative to the search box `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VicinityMeasure {
    pub t_measure: f64,
    pub s_measure: f64,
    pub ratio: f64,
}

impl VicinityMeasure {
    pub fn new(t_measure: f64, s_measure: f64) -> Result<Self> {
        if !(s_measure.is_finite() && s_measure > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "|S| must be positive, got {s_measure}"
            )));
        }
        if !(0.0..=s_measure).contains(&t_measure) {
            return Err(Error::InvalidParameter(format!(
                "|T| = {t_measure} must lie in [0, |S| = {s_measure}]"
            )));
        }
        Ok(Self {
            t_measure,
            s_measure,
            ratio: (t_measure / s_measure).clamp(0.0, 1.0),
        })
    }

    pub fn success_probability(&self, n_raindrops: usize) -> Result<f64> {
        theoretical_success_probability(self.ratio, n_raindrops)
    }
}

/// `1 - (1 - ratio)^N`, evaluated as `-expm1(N · ln(1 - ratio))`.
pub fn theoretical_success_probability(ratio: f64, n_raindrops: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!(
            "ratio {ratio} outside [0, 1]"
        )));
    }
    if n_raindrops == 0 {
        return Err(Error::InvalidParameter(
            "n_raindrops must be at least 1".into(),
        ));
    }
    Ok(-((n_raindrops as f64) * (-ratio).ln_1p()).exp_m1())
}

/// `sqrt(p (1 - p) / trials)`.
pub fn binomial_standard_error(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    /// Success radius around the known optimum.
    pub tolerance: f64,
}

/// SplitMix64 of `master` offset by `index`; used to give each trial its own seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Runs `trials` independent searches on the spec's default box and counts those
/// whose global best lies within `success_radius` of the known optimum.
///
/// Trial `t` uses seed `derive_seed(master_seed, t)`; `config.seed` is ignored.
pub fn empirical_success_probability(
    config: &RunConfig,
    spec: &ObjectiveSpec,
    trials: usize,
    success_radius: f64,
    master_seed: u64,
) -> Result<SuccessEstimate> {
    let (optimum, _) = spec.require_optimum()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(success_radius.is_finite() && success_radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "success radius must be positive, got {success_radius}"
        )));
    }
    // Reject a bad config before fanning out.
    Runner::new(config.clone(), &spec.objective, &spec.default_domain)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = RunConfig {
                seed: derive_seed(master_seed, t as u64),
                ..config.clone()
            };
            let r = Runner::new(cfg, &spec.objective, &spec.default_domain)?.run()?;
            Ok(usize::from(
                distance(&r.global_best_x, optimum) <= success_radius,
            ))
        })
        .collect::<Result<Vec<usize>>>()?;
    let successes = hits.iter().sum();
    Ok(SuccessEstimate {
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        tolerance: success_radius,
    })
}

/// Smallest `k` with `v0·√N / 2^k ≤ epsilon`: the number of sweeps a swarm that
/// never moves needs before the speed norm reaches `epsilon`.
pub fn expected_halvings(v0: f64, epsilon: f64, n_raindrops: usize) -> Result<u32> {
    if n_raindrops == 0 {
        return Err(Error::InvalidParameter(
            "n_raindrops must be at least 1".into(),
        ));
    }
    if !(v0.is_finite() && v0 > 0.0 && epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need positive v0 and epsilon, got {v0} and {epsilon}"
        )));
    }
    let initial = v0 * (n_raindrops as f64).sqrt();
    if epsilon >= initial {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} is not below v0·√N = {initial}"
        )));
    }
    let mut k = (initial / epsilon).log2().ceil().max(0.0) as i32;
    // log2 may land one off at exact powers of two.
    while k > 0 && initial * 0.5f64.powi(k - 1) <= epsilon {
        k -= 1;
    }
    while initial * 0.5f64.powi(k) > epsilon {
        k += 1;
    }
    Ok(k as u32)
}

/// A group of resting positions represented by its lowest member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub point: Vec<f64>,
    pub value: f64,
    pub multiplicity: usize,
}

/// `2·epsilon·√n`.
pub fn default_cluster_radius(epsilon: f64, dimension: usize) -> f64 {
    2.0 * epsilon * (dimension as f64).sqrt()
}

/// Groups resting raindrops into distinct local optima, best first.
pub fn cluster_local_optima(
    drops: &[Raindrop],
    f: &Objective,
    radius: f64,
) -> Result<Vec<Cluster>> {
    let values = drops
        .iter()
        .map(|d| f.eval(d.position()))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<&[f64]> = drops.iter().map(Raindrop::position).collect();
    cluster_points(&points, &values, radius)
}

/// Clusters the final swarm of a run using the values it already computed.
pub fn cluster_result(result: &RunResult, radius: f64) -> Result<Vec<Cluster>> {
    let points: Vec<&[f64]> = result
        .final_raindrops
        .iter()
        .map(Raindrop::position)
        .collect();
    cluster_points(&points, &result.final_values, radius)
}

/// Greedy clustering in ascending value order: each point joins the first cluster
/// whose representative is within `radius`, otherwise it founds a new one.
pub fn cluster_points(points: &[&[f64]], values: &[f64], radius: f64) -> Result<Vec<Cluster>> {
    if points.is_empty() {
        return Err(Error::Empty("no positions to cluster"));
    }
    if points.len() != values.len() {
        return Err(Error::InvalidParameter(
            "points and values differ in length".into(),
        ));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster radius must be positive, got {radius}"
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut clusters: Vec<Cluster> = Vec::new();
    for i in order {
        match clusters
            .iter_mut()
            .find(|c| distance(&c.point, points[i]) <= radius)
        {
            Some(c) => c.multiplicity += 1,
            None => clusters.push(Cluster {
                point: points[i].to_vec(),
                value: values[i],
                multiplicity: 1,
            }),
        }
    }
    Ok(clusters)
}
