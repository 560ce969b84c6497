//! Brute-force references: exhaustive grid minimization and grid-seeded
//! single-raindrop descents for measuring the success region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{distance, VicinityMeasure};
use crate::domain::{BoxDomain, Objective};
use crate::engine::{RunConfig, Runner};
use crate::error::{Error, Result};
use crate::objectives::ObjectiveSpec;

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const DEFAULT_RESOLUTION: usize = 201;

/// Regular grid with `resolution` points per axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    /// Maximum number of grid points an oracle call may visit.
    pub budget: u64,
}

impl GridSpec {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        Ok(Self {
            resolution,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(self, budget: u64) -> Self {
        Self { budget, ..self }
    }

    /// Number of grid points on an `n`-dimensional box, refusing anything over budget.
    pub fn points(&self, n: usize) -> Result<usize> {
        let requested = (self.resolution as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX);
        if requested > self.budget as u128 {
            return Err(Error::BudgetExceeded {
                requested,
                budget: self.budget,
            });
        }
        Ok(requested as usize)
    }

    /// Grid coordinate `i` on `[lo, hi]`. Endpoints and, for odd resolutions on a
    /// symmetric interval, the midpoint are exact.
    pub fn coordinate(&self, lo: f64, hi: f64, i: usize) -> f64 {
        let t = i as f64 / (self.resolution - 1) as f64;
        (lo * (1.0 - t) + hi * t).clamp(lo, hi)
    }

    /// The `index`-th grid point in lexicographic order (axis 0 most significant).
    pub fn point(&self, domain: &BoxDomain, mut index: usize) -> Vec<f64> {
        let n = domain.dim();
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let i = index % self.resolution;
            index /= self.resolution;
            x[k] = self.coordinate(domain.lower()[k], domain.upper()[k], i);
        }
        x
    }
}

/// Grid point of minimum value; ties go to the lexicographically smallest point.
pub fn grid_search(f: &Objective, domain: &BoxDomain, grid: &GridSpec) -> Result<(Vec<f64>, f64)> {
    if f.arity() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: f.arity(),
        });
    }
    let total = grid.points(domain.dim())?;
    let best = (0..total)
        .into_par_iter()
        .map(|i| f.eval(&grid.point(domain, i)).map(|v| (i, v)))
        .try_reduce_with(|a, b| Ok(lowest(a, b)))
        .expect("grid has at least one point")?;
    Ok((grid.point(domain, best.0), best.1))
}

fn lowest(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Estimates the measure of the set of starts from which a lone raindrop comes
/// to rest within `success_radius` of the known optimum.
///
/// Every grid point of the spec's default box seeds one deterministic descent
/// with `config.v0` and `config.epsilon`; `n_raindrops` and `seed` are ignored.
pub fn basin_measure_estimate(
    spec: &ObjectiveSpec,
    config: &RunConfig,
    grid: &GridSpec,
    success_radius: f64,
) -> Result<VicinityMeasure> {
    let (optimum, _) = spec.require_optimum()?;
    if !(success_radius.is_finite() && success_radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "success radius must be positive, got {success_radius}"
        )));
    }
    let domain = &spec.default_domain;
    let total = grid.points(domain.dim())?;
    let single = RunConfig {
        n_raindrops: 1,
        ..config.clone()
    };
    let runner = Runner::new(single, &spec.objective, domain)?;
    let hits = (0..total)
        .into_par_iter()
        .map(|i| {
            let r = runner.run_from(vec![grid.point(domain, i)])?;
            Ok(usize::from(
                distance(&r.global_best_x, optimum) <= success_radius,
            ))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    let s = domain.measure();
    let fraction = hits as f64 / total as f64;
    VicinityMeasure::new(fraction * s, s)
}
