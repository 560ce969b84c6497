//! Raindrop search: a derivative-free global optimizer.
//!
//! A swarm of independent agents ("raindrops") falls uniformly on a box. Each
//! one walks downhill along the coordinate axes with a fixed step, halving the
//! step whenever no axis neighbour is strictly better, until the swarm is at
//! rest. The lowest resting point is the answer.
//!
//! ```
//! use raindrop::{objectives, run, RunConfig};
//!
//! let spec = objectives::lookup("sinc2d", None).unwrap();
//! let config = RunConfig { seed: 7, ..RunConfig::for_domain(&spec.default_domain) };
//! let result = run(&config, &spec.objective, &spec.default_domain).unwrap();
//! assert!(result.converged);
//! assert!((result.global_best_f + 2.0).abs() < 1e-2);
//! ```
//!
//! Besides the optimizer the crate carries the tools used to check it:
//! [`analysis`] for success-probability predictions and clustering of resting
//! points, and [`oracle`] for exhaustive grid references.

pub mod analysis;
pub mod cli;
pub mod domain;
pub mod engine;
pub mod error;
pub mod objectives;
pub mod oracle;

pub use domain::{BoxDomain, Objective};
pub use engine::{
    candidate_directions, initialize_swarm, run, select_direction, step_raindrop, velocity_norm,
    Direction, IterationTrace, Observer, Raindrop, RunConfig, RunResult, Runner, Sign, Step, Sweep,
};
pub use error::{Error, Result};
