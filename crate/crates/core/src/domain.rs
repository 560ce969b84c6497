//! Feasible boxes and objective functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Axis-aligned box `[lower[0], upper[0]] × … × [lower[n-1], upper[n-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    /// Builds a box, rejecting empty, degenerate, inverted or unbounded sides.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "lower has {} entries but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "axis {k} has a non-finite bound"
                )));
            }
            if lo >= hi {
                return Err(Error::InvalidDomain(format!(
                    "axis {k}: lower bound {lo} is not below upper bound {hi}"
                )));
            }
        }
        let domain = Self { lower, upper };
        let measure = domain.measure();
        if !measure.is_finite() || measure <= 0.0 {
            return Err(Error::InvalidDomain(format!(
                "box measure {measure} is not finite and positive"
            )));
        }
        Ok(domain)
    }

    /// The hypercube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Lebesgue measure of the box.
    pub fn measure(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn max_side(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Whether `x` with coordinate `axis` replaced by `value` lies in the box.
    pub(crate) fn axis_contains(&self, axis: usize, value: f64) -> bool {
        self.lower[axis] <= value && value <= self.upper[axis]
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A named, pure scalar function of `arity` real arguments.
///
/// Cloning is cheap; the function body is shared.
#[derive(Clone)]
pub struct Objective {
    name: String,
    arity: usize,
    func: Arc<EvalFn>,
}

impl Objective {
    pub fn new<F>(name: impl Into<String>, arity: usize, func: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            arity,
            func: Arc::new(func),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates the objective, rejecting wrong-length points and non-finite results.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        let value = (self.func)(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite {
                objective: self.name.clone(),
                point: x.to_vec(),
                value,
            })
        }
    }

    /// `g ∘ self`, keeping the arity. Used to check order-only behaviour.
    pub fn map<G>(&self, name: impl Into<String>, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.func);
        Self::new(name, self.arity, move |x| g(inner(x)))
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish_non_exhaustive()
    }
}
