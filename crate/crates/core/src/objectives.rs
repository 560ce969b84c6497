//! Named test problems.
//!
//! `sinc2d` is the two-dimensional sinc landscape `-sin(x)/x - sin(y)/y` on
//! `[-5, 5]²` with its global minimum `-2` at the origin. The others are the
//! usual benchmark functions in any dimension, with minimum 0 at the origin.

use std::f64::consts::{E, PI};

use crate::domain::{BoxDomain, Objective};
use crate::error::{Error, Result};

/// Below this magnitude `sin(t)/t` is replaced by its Taylor polynomial `1 - t²/6`.
pub const SINC_TAYLOR_THRESHOLD: f64 = 1e-8;

pub const DEFAULT_DIMENSION: usize = 2;

/// `sin(t)/t` with the removable singularity filled in.
pub fn sinc(t: f64) -> f64 {
    if t.abs() > SINC_TAYLOR_THRESHOLD {
        t.sin() / t
    } else {
        1.0 - t * t / 6.0
    }
}

pub fn sinc2d(p: &[f64]) -> f64 {
    -sinc(p[0]) - sinc(p[1])
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cos = x.iter().map(|&v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp() + 20.0 + E
}

/// A registered objective with its default box and, when known, its global optimum.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    pub objective: Objective,
    pub default_domain: BoxDomain,
    pub known_optimum: Option<(Vec<f64>, f64)>,
}

impl ObjectiveSpec {
    pub fn name(&self) -> &str {
        self.objective.name()
    }

    pub fn dimension(&self) -> usize {
        self.default_domain.dim()
    }

    pub fn require_optimum(&self) -> Result<(&[f64], f64)> {
        self.known_optimum
            .as_ref()
            .map(|(x, v)| (x.as_slice(), *v))
            .ok_or_else(|| Error::MissingOptimum(self.name().to_string()))
    }
}

/// Names accepted by [`lookup`].
pub const NAMES: [&str; 5] = ["sinc2d", "sphere", "rastrigin", "ackley", "constant"];

/// Looks up an objective by name. `dimension` defaults to 2 and must be 2 for `sinc2d`.
///
/// `constant` is identically zero on `[-5, 5]^n`; it has no distinguished optimum.
pub fn lookup(name: &str, dimension: Option<usize>) -> Result<ObjectiveSpec> {
    let n = dimension.unwrap_or(DEFAULT_DIMENSION);
    if n == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    let origin = || Some((vec![0.0; n], 0.0));
    let spec = match name {
        "sinc2d" => {
            if n != 2 {
                return Err(Error::InvalidParameter(format!(
                    "sinc2d is two-dimensional, got dimension {n}"
                )));
            }
            ObjectiveSpec {
                objective: Objective::new(name, 2, sinc2d),
                default_domain: BoxDomain::cube(2, -5.0, 5.0)?,
                known_optimum: Some((vec![0.0, 0.0], -2.0)),
            }
        }
        "sphere" => ObjectiveSpec {
            objective: Objective::new(name, n, sphere),
            default_domain: BoxDomain::cube(n, -5.12, 5.12)?,
            known_optimum: origin(),
        },
        "rastrigin" => ObjectiveSpec {
            objective: Objective::new(name, n, rastrigin),
            default_domain: BoxDomain::cube(n, -5.12, 5.12)?,
            known_optimum: origin(),
        },
        "ackley" => ObjectiveSpec {
            objective: Objective::new(name, n, ackley),
            default_domain: BoxDomain::cube(n, -32.768, 32.768)?,
            known_optimum: origin(),
        },
        "constant" => ObjectiveSpec {
            objective: Objective::new(name, n, |_| 0.0),
            default_domain: BoxDomain::cube(n, -5.0, 5.0)?,
            known_optimum: None,
        },
        _ => {
            return Err(Error::UnknownObjective {
                name: name.to_string(),
                available: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(spec)
}
