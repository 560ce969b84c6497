//! The raindrop search loop.
//!
//! `N` raindrops fall uniformly on a box. In every sweep each raindrop looks at
//! the `2n` compass points `x ± v·e_k` that lie inside the box and moves to the
//! best one if it is strictly lower than where it stands; otherwise it halves
//! its speed. The loop stops once the ℓ2 norm of the speed vector is at most
//! `epsilon`, and the best resting position is reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoxDomain, Objective};
use crate::error::{Error, Result};

/// Orientation of a compass step along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A signed standard basis vector `±e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    pub axis: usize,
    pub sign: Sign,
}

impl Direction {
    /// Position in the canonical order returned by [`candidate_directions`].
    pub fn index(self, n: usize) -> usize {
        match self.sign {
            Sign::Plus => self.axis,
            Sign::Minus => n + self.axis,
        }
    }

    pub fn to_vector(self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[self.axis] = self.sign.as_f64();
        v
    }
}

/// The `2n` compass directions: `+e_0 … +e_{n-1}` followed by `-e_0 … -e_{n-1}`.
///
/// This order is the tie-breaking order of [`select_direction`].
pub fn candidate_directions(n: usize) -> Result<Vec<Direction>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    let plus = (0..n).map(|axis| Direction {
        axis,
        sign: Sign::Plus,
    });
    let minus = (0..n).map(|axis| Direction {
        axis,
        sign: Sign::Minus,
    });
    Ok(plus.chain(minus).collect())
}

/// One search agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raindrop {
    position: Vec<f64>,
    speed: f64,
    halvings: u32,
}

impl Raindrop {
    pub fn new(position: Vec<f64>, speed: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "speed must be positive and finite, got {speed}"
            )));
        }
        if position.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "position {position:?} is not finite"
            )));
        }
        Ok(Self {
            position,
            speed,
            halvings: 0,
        })
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Number of times the speed has been halved since the raindrop fell.
    pub fn halvings(&self) -> u32 {
        self.halvings
    }

    fn halve(&mut self) {
        self.speed *= 0.5;
        self.halvings += 1;
    }
}

/// What a raindrop did during one call to [`step_raindrop`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Step {
    /// Moved one speed-length along `direction`, lowering the objective from `from` to `to`.
    Moved {
        direction: Direction,
        from: f64,
        to: f64,
    },
    /// Stayed put and halved its speed. `best` is the best feasible candidate, if any.
    Halved {
        best: Option<(Direction, f64)>,
        value: f64,
    },
}

impl Step {
    /// Objective value at the raindrop's position after the step.
    pub fn value_after(&self) -> f64 {
        match *self {
            Step::Moved { to, .. } => to,
            Step::Halved { value, .. } => value,
        }
    }
}

/// Evaluates `f(x + v·d)` for every feasible compass direction `d` and returns the
/// minimizing direction with its value, ties going to the lowest canonical index.
///
/// Returns `None` when every compass point falls outside `domain`.
pub fn select_direction(
    f: &Objective,
    domain: &BoxDomain,
    x: &[f64],
    v: f64,
) -> Result<Option<(Direction, f64)>> {
    check_point(f, domain, x)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "speed must be positive and finite, got {v}"
        )));
    }
    let mut scratch = x.to_vec();
    best_candidate(f, domain, &mut scratch, v)
}

// `scratch` holds the current position on entry and on return.
fn best_candidate(
    f: &Objective,
    domain: &BoxDomain,
    scratch: &mut [f64],
    v: f64,
) -> Result<Option<(Direction, f64)>> {
    let n = scratch.len();
    let mut best: Option<(Direction, f64)> = None;
    for sign in [Sign::Plus, Sign::Minus] {
        for axis in 0..n {
            let origin = scratch[axis];
            let target = origin + sign.as_f64() * v;
            if !domain.axis_contains(axis, target) {
                continue;
            }
            scratch[axis] = target;
            let value = f.eval(scratch);
            scratch[axis] = origin;
            let value = value?;
            if best.is_none_or(|(_, b)| value < b) {
                best = Some((Direction { axis, sign }, value));
            }
        }
    }
    Ok(best)
}

/// Advances one raindrop by a single compass step or a speed halving.
pub fn step_raindrop(drop: &mut Raindrop, f: &Objective, domain: &BoxDomain) -> Result<Step> {
    check_point(f, domain, &drop.position)?;
    let value = f.eval(&drop.position)?;
    advance(drop, value, f, domain)
}

fn advance(drop: &mut Raindrop, value: f64, f: &Objective, domain: &BoxDomain) -> Result<Step> {
    match best_candidate(f, domain, &mut drop.position, drop.speed)? {
        Some((direction, to)) if to < value => {
            drop.position[direction.axis] += direction.sign.as_f64() * drop.speed;
            Ok(Step::Moved {
                direction,
                from: value,
                to,
            })
        }
        best => {
            drop.halve();
            Ok(Step::Halved { best, value })
        }
    }
}

fn check_point(f: &Objective, domain: &BoxDomain, x: &[f64]) -> Result<()> {
    if f.arity() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: f.arity(),
        });
    }
    if x.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: x.len(),
        });
    }
    if !domain.contains(x) {
        return Err(Error::InvalidParameter(format!(
            "point {x:?} lies outside the domain"
        )));
    }
    Ok(())
}

/// `sqrt(Σ speed_i²)` over the swarm.
pub fn velocity_norm(drops: &[Raindrop]) -> Result<f64> {
    if drops.is_empty() {
        return Err(Error::Empty("velocity norm of an empty swarm"));
    }
    Ok(drops.iter().map(|d| d.speed * d.speed).sum::<f64>().sqrt())
}

pub const DEFAULT_RAINDROPS: usize = 30;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_raindrops: usize,
    /// Initial speed of every raindrop, in domain units.
    pub v0: f64,
    /// The loop runs while the speed vector's ℓ2 norm exceeds this.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults for `domain`: 30 raindrops, `v0` a quarter of the longest side,
    /// `epsilon = 1e-3`, at most 10 000 sweeps, seed 0.
    pub fn for_domain(domain: &BoxDomain) -> Self {
        Self {
            n_raindrops: DEFAULT_RAINDROPS,
            v0: default_v0(domain),
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_raindrops == 0 {
            return Err(Error::InvalidConfig(
                "n_raindrops must be at least 1".into(),
            ));
        }
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "v0 must be positive and finite, got {}",
                self.v0
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= f64::MIN_POSITIVE) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be a positive normal number, got {}",
                self.epsilon
            )));
        }
        let initial_norm = self.v0 * (self.n_raindrops as f64).sqrt();
        if self.epsilon >= initial_norm {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} is not below the initial speed norm {initial_norm}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_v0(domain: &BoxDomain) -> f64 {
    domain.max_side() / 4.0
}

/// Swarm state after one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// 1-based sweep index.
    pub iteration: usize,
    pub velocity_l2: f64,
    pub best_f: f64,
    pub best_x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_raindrops: Vec<Raindrop>,
    /// Objective value at each final raindrop position.
    pub final_values: Vec<f64>,
    pub trace: Vec<IterationTrace>,
    pub global_best_x: Vec<f64>,
    pub global_best_f: f64,
    pub iterations_used: usize,
    /// True iff the speed norm dropped to `epsilon`; false if `max_iterations` stopped the run.
    pub converged: bool,
}

/// Uniform i.i.d. starting positions, all at speed `v0`.
///
/// Raindrop `i` draws from ChaCha8 stream `i` of `seed`, so a raindrop's start
/// does not depend on the population size.
pub fn initialize_swarm(config: &RunConfig, domain: &BoxDomain) -> Result<Vec<Raindrop>> {
    config.validate()?;
    (0..config.n_raindrops)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let position = domain
                .lower()
                .iter()
                .zip(domain.upper())
                .map(|(&lo, &hi)| {
                    let u: f64 = rng.random();
                    (lo + (hi - lo) * u).min(hi)
                })
                .collect();
            Raindrop::new(position, config.v0)
        })
        .collect()
}

/// Everything a sweep changed, handed to an [`Observer`].
#[derive(Debug)]
pub struct Sweep<'a> {
    pub iteration: usize,
    pub before: &'a [Raindrop],
    pub after: &'a [Raindrop],
    pub steps: &'a [Step],
}

/// Hooks into a run. All callbacks are made from the calling thread in raindrop order.
pub trait Observer {
    fn on_start(&mut self, _drops: &[Raindrop], _values: &[f64]) {}
    fn on_sweep(&mut self, _sweep: &Sweep<'_>) {}
    /// When false the runner skips keeping the pre-sweep swarm and `before` is empty.
    fn wants_before(&self) -> bool {
        true
    }
}

/// Observer that does nothing.
pub struct Silent;

impl Observer for Silent {
    fn wants_before(&self) -> bool {
        false
    }
}

/// Configured search over a fixed objective and domain.
#[derive(Debug, Clone)]
pub struct Runner<'a> {
    config: RunConfig,
    objective: &'a Objective,
    domain: &'a BoxDomain,
    parallel: bool,
}

impl<'a> Runner<'a> {
    pub fn new(config: RunConfig, objective: &'a Objective, domain: &'a BoxDomain) -> Result<Self> {
        config.validate()?;
        if objective.arity() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: objective.arity(),
            });
        }
        Ok(Self {
            config,
            objective,
            domain,
            parallel: false,
        })
    }

    /// Step the raindrops of each sweep on the rayon pool. Results are unchanged.
    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn run(&self) -> Result<RunResult> {
        self.run_observed(initialize_swarm(&self.config, self.domain)?, &mut Silent)
    }

    /// Runs from explicit starting positions instead of random ones, all at speed `v0`.
    pub fn run_from(&self, positions: Vec<Vec<f64>>) -> Result<RunResult> {
        let drops = positions
            .into_iter()
            .map(|p| Raindrop::new(p, self.config.v0))
            .collect::<Result<Vec<_>>>()?;
        self.run_observed(drops, &mut Silent)
    }

    pub fn run_observed<O: Observer + ?Sized>(
        &self,
        mut drops: Vec<Raindrop>,
        observer: &mut O,
    ) -> Result<RunResult> {
        if drops.len() != self.config.n_raindrops {
            return Err(Error::InvalidConfig(format!(
                "expected {} raindrops, got {}",
                self.config.n_raindrops,
                drops.len()
            )));
        }
        for d in &drops {
            check_point(self.objective, self.domain, &d.position)?;
        }
        let mut values = drops
            .iter()
            .map(|d| self.objective.eval(&d.position))
            .collect::<Result<Vec<_>>>()?;
        observer.on_start(&drops, &values);

        let keep_before = observer.wants_before();
        let mut trace = Vec::new();
        let mut norm = velocity_norm(&drops)?;
        let mut iteration = 0;
        while norm > self.config.epsilon && iteration < self.config.max_iterations {
            iteration += 1;
            let before = if keep_before {
                drops.clone()
            } else {
                Vec::new()
            };
            let steps = self.sweep(&mut drops, &mut values)?;
            norm = velocity_norm(&drops)?;
            let best = argmin(&values);
            trace.push(IterationTrace {
                iteration,
                velocity_l2: norm,
                best_f: values[best],
                best_x: drops[best].position.clone(),
            });
            observer.on_sweep(&Sweep {
                iteration,
                before: &before,
                after: &drops,
                steps: &steps,
            });
        }

        let best = argmin(&values);
        Ok(RunResult {
            global_best_x: drops[best].position.clone(),
            global_best_f: values[best],
            final_raindrops: drops,
            final_values: values,
            trace,
            iterations_used: iteration,
            converged: norm <= self.config.epsilon,
        })
    }

    fn sweep(&self, drops: &mut [Raindrop], values: &mut [f64]) -> Result<Vec<Step>> {
        let (f, domain) = (self.objective, self.domain);
        let one = |(drop, value): (&mut Raindrop, &mut f64)| -> Result<Step> {
            let step = advance(drop, *value, f, domain)?;
            *value = step.value_after();
            Ok(step)
        };
        if self.parallel {
            // collect() yields the lowest-index error, as the sequential path does.
            drops
                .par_iter_mut()
                .zip(values.par_iter_mut())
                .map(one)
                .collect()
        } else {
            drops.iter_mut().zip(values.iter_mut()).map(one).collect()
        }
    }
}

/// Runs the search from a seeded uniform start.
pub fn run(config: &RunConfig, f: &Objective, domain: &BoxDomain) -> Result<RunResult> {
    Runner::new(config.clone(), f, domain)?.run()
}

// Lowest index among the minima.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sinc(t: f64) -> f64 {
        if t == 0.0 {
            1.0
        } else {
            t.sin() / t
        }
    }

    fn neg_sinc2() -> Objective {
        Objective::new("neg_sinc2", 2, |x| -sinc(x[0]) - sinc(x[1]))
    }

    fn square5() -> BoxDomain {
        BoxDomain::cube(2, -5.0, 5.0).unwrap()
    }

    #[test]
    fn canonical_direction_order() {
        use Sign::*;
        let d = candidate_directions(2).unwrap();
        assert_eq!(
            d,
            vec![
                Direction {
                    axis: 0,
                    sign: Plus
                },
                Direction {
                    axis: 1,
                    sign: Plus
                },
                Direction {
                    axis: 0,
                    sign: Minus
                },
                Direction {
                    axis: 1,
                    sign: Minus
                },
            ]
        );
        assert_eq!(
            candidate_directions(1).unwrap(),
            vec![
                Direction {
                    axis: 0,
                    sign: Plus
                },
                Direction {
                    axis: 0,
                    sign: Minus
                }
            ]
        );
        assert!(candidate_directions(0).is_err());
    }

    #[test]
    fn three_dimensional_directions_are_distinct_unit_vectors() {
        let dirs = candidate_directions(3).unwrap();
        assert_eq!(dirs.len(), 6);
        let vecs: Vec<_> = dirs.iter().map(|d| d.to_vector(3)).collect();
        for (i, v) in vecs.iter().enumerate() {
            assert_eq!(v.iter().map(|x| x.abs()).sum::<f64>(), 1.0);
            assert_eq!(dirs[i].index(3), i);
            for w in &vecs[i + 1..] {
                assert_ne!(v, w);
            }
        }
    }

    #[test]
    fn select_direction_breaks_ties_by_index() {
        let f = Objective::new("sum", 2, |x| x[0] + x[1]);
        let (d, v) = select_direction(&f, &square5(), &[0.0, 0.0], 1.0)
            .unwrap()
            .unwrap();
        assert_eq!(
            d,
            Direction {
                axis: 0,
                sign: Sign::Minus
            }
        );
        assert_eq!(v, -1.0);
    }

    #[test]
    fn select_direction_on_constant_returns_first_feasible() {
        let f = Objective::new("const", 2, |_| 7.0);
        let (d, v) = select_direction(&f, &square5(), &[5.0, 0.0], 1.0)
            .unwrap()
            .unwrap();
        assert_eq!(
            d,
            Direction {
                axis: 1,
                sign: Sign::Plus
            }
        );
        assert_eq!(v, 7.0);
    }

    #[test]
    fn select_direction_skips_infeasible_candidates() {
        let f = Objective::new("sq", 2, |x| x[0] * x[0] + x[1] * x[1]);
        // Feasible candidates: (4.8,1) -> 24.04, (3.8,0) -> 14.44, (4.8,-1) -> 24.04.
        let (d, v) = select_direction(&f, &square5(), &[4.8, 0.0], 1.0)
            .unwrap()
            .unwrap();
        assert_eq!(
            d,
            Direction {
                axis: 0,
                sign: Sign::Minus
            }
        );
        assert!((v - 14.44).abs() < 1e-12);
    }

    #[test]
    fn select_direction_none_when_nothing_feasible() {
        let d = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        let f = Objective::new("id", 1, |x| x[0]);
        assert_eq!(select_direction(&f, &d, &[0.5], 2.0).unwrap(), None);
    }

    #[test]
    fn select_direction_reports_non_finite_point() {
        let f = Objective::new("pole", 1, |x| 1.0 / (x[0] - 1.0));
        let d = BoxDomain::cube(1, 0.0, 2.0).unwrap();
        match select_direction(&f, &d, &[0.5], 0.5) {
            Err(Error::NonFinite { point, .. }) => assert_eq!(point, vec![1.0]),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn constant_objective_halves() {
        let f = Objective::new("const", 2, |_| 0.0);
        let mut drop = Raindrop::new(vec![1.0, 2.0], 1.0).unwrap();
        let step = step_raindrop(&mut drop, &f, &square5()).unwrap();
        assert!(matches!(step, Step::Halved { .. }));
        assert_eq!(drop.position(), &[1.0, 2.0]);
        assert_eq!(drop.speed(), 0.5);
        assert_eq!(drop.halvings(), 1);
    }

    #[test]
    fn sinc_drop_moves_towards_origin() {
        // f(2,0) = -1.4546; f(3,0) = -1.0470, f(2,±1) = -1.2961, f(1,0) = -1.8415
        let f = neg_sinc2();
        let mut drop = Raindrop::new(vec![2.0, 0.0], 1.0).unwrap();
        let step = step_raindrop(&mut drop, &f, &square5()).unwrap();
        assert_eq!(drop.position(), &[1.0, 0.0]);
        assert_eq!(drop.speed(), 1.0);
        match step {
            Step::Moved {
                direction,
                from,
                to,
            } => {
                assert_eq!(
                    direction,
                    Direction {
                        axis: 0,
                        sign: Sign::Minus
                    }
                );
                assert!(to < from);
            }
            _ => panic!("expected a move"),
        }
    }

    #[test]
    fn stencil_minimum_halves() {
        let f = neg_sinc2();
        let mut drop = Raindrop::new(vec![0.0, 0.0], 0.25).unwrap();
        step_raindrop(&mut drop, &f, &square5()).unwrap();
        assert_eq!(drop.position(), &[0.0, 0.0]);
        assert_eq!(drop.speed(), 0.125);
    }

    #[test]
    fn velocity_norm_examples() {
        let ones: Vec<_> = (0..4)
            .map(|_| Raindrop::new(vec![0.0], 1.0).unwrap())
            .collect();
        assert_eq!(velocity_norm(&ones).unwrap(), 2.0);
        let pair = vec![
            Raindrop::new(vec![0.0], 3.0).unwrap(),
            Raindrop::new(vec![0.0], 4.0).unwrap(),
        ];
        assert_eq!(velocity_norm(&pair).unwrap(), 5.0);
        assert!(velocity_norm(&[]).is_err());
    }

    #[test]
    fn config_validation() {
        let domain = square5();
        let mut c = RunConfig::for_domain(&domain);
        assert_eq!(c.v0, 2.5);
        assert!(c.validate().is_ok());
        c.epsilon = c.v0 * (c.n_raindrops as f64).sqrt();
        assert!(c.validate().is_err());
        let mut c = RunConfig::for_domain(&domain);
        c.n_raindrops = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::for_domain(&domain);
        c.max_iterations = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::for_domain(&domain);
        c.v0 = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn swarm_is_seed_determined_and_feasible() {
        let domain = square5();
        let c = RunConfig::for_domain(&domain);
        let a = initialize_swarm(&c, &domain).unwrap();
        let b = initialize_swarm(&c, &domain).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|d| domain.contains(d.position()) && d.speed() == c.v0));
        let other = initialize_swarm(
            &RunConfig {
                seed: 1,
                ..c.clone()
            },
            &domain,
        )
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn swarm_prefix_independent_of_population() {
        let domain = square5();
        let small = RunConfig {
            n_raindrops: 3,
            ..RunConfig::for_domain(&domain)
        };
        let large = RunConfig {
            n_raindrops: 10,
            ..small.clone()
        };
        let a = initialize_swarm(&small, &domain).unwrap();
        let b = initialize_swarm(&large, &domain).unwrap();
        assert_eq!(a[..], b[..3]);
    }

    #[test]
    fn single_raindrop_swarm() {
        let domain = square5();
        let c = RunConfig {
            n_raindrops: 1,
            ..RunConfig::for_domain(&domain)
        };
        let s = initialize_swarm(&c, &domain).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].speed(), c.v0);
        assert_eq!(s[0].halvings(), 0);
    }

    #[test]
    fn uniform_start_mean() {
        // Std. error of a U(0,1) mean over 1e4 draws is 0.2887 / 100 ≈ 0.0029.
        let domain = BoxDomain::cube(2, 0.0, 1.0).unwrap();
        let c = RunConfig {
            n_raindrops: 10_000,
            v0: 0.25,
            epsilon: 1e-3,
            max_iterations: 1,
            seed: 42,
        };
        let s = initialize_swarm(&c, &domain).unwrap();
        for k in 0..2 {
            let mean = s.iter().map(|d| d.position()[k]).sum::<f64>() / s.len() as f64;
            assert!((mean - 0.5).abs() < 0.02, "axis {k} mean {mean}");
        }
    }

    #[test]
    fn constant_objective_run_closed_form() {
        let domain = square5();
        let f = Objective::new("const", 2, |_| 1.0);
        let c = RunConfig {
            n_raindrops: 4,
            v0: 1.0,
            epsilon: 1e-3,
            max_iterations: 100,
            seed: 3,
        };
        let start = initialize_swarm(&c, &domain).unwrap();
        let r = run(&c, &f, &domain).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations_used, 11);
        assert_eq!(r.trace.len(), 11);
        for (a, b) in start.iter().zip(&r.final_raindrops) {
            assert_eq!(a.position(), b.position());
            assert_eq!(b.halvings(), 11);
        }
    }

    #[test]
    fn cap_stop_is_not_converged() {
        let domain = square5();
        let f = neg_sinc2();
        let c = RunConfig {
            max_iterations: 1,
            ..RunConfig::for_domain(&domain)
        };
        let r = run(&c, &f, &domain).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 1);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn rejects_arity_mismatch() {
        let domain = square5();
        let f = Objective::new("one", 1, |x| x[0]);
        assert!(matches!(
            Runner::new(RunConfig::for_domain(&domain), &f, &domain),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_objective_aborts_run() {
        let domain = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        let f = Objective::new("bad", 1, |x| if x[0] > 0.9 { f64::NAN } else { -x[0] });
        let c = RunConfig {
            n_raindrops: 1,
            v0: 0.5,
            epsilon: 1e-3,
            max_iterations: 100,
            seed: 0,
        };
        let err = Runner::new(c, &f, &domain)
            .unwrap()
            .run_from(vec![vec![0.0]])
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    }

    #[test]
    fn run_from_rejects_infeasible_start() {
        let domain = square5();
        let f = neg_sinc2();
        let c = RunConfig {
            n_raindrops: 1,
            ..RunConfig::for_domain(&domain)
        };
        assert!(Runner::new(c, &f, &domain)
            .unwrap()
            .run_from(vec![vec![6.0, 0.0]])
            .is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let domain = square5();
        let f = neg_sinc2();
        let c = RunConfig {
            n_raindrops: 64,
            seed: 11,
            ..RunConfig::for_domain(&domain)
        };
        let seq = Runner::new(c.clone(), &f, &domain).unwrap().run().unwrap();
        let par = Runner::new(c, &f, &domain)
            .unwrap()
            .parallel(true)
            .run()
            .unwrap();
        assert_eq!(seq, par);
    }
}
