//! Homogeneous function families on the dual space.
//!
//! A weight-`k` homogeneous function satisfies `f(λξ) = λ^k f(ξ)` for
//! `λ > 0`. They are represented in the chart `ξ_d ≠ 0` as
//! `f(ξ) = ξ_d^k · base(ξ_1/ξ_d, …, ξ_{d−1}/ξ_d)`, which is homogeneous by
//! construction; [`homogeneity_check`] is the numerical validator applied
//! to arbitrary candidate maps.

use crate::expr::{EvalError, SmoothMap};
use crate::jet::{Jet2, JetError};

/// Points with |ξ_d| below this are outside the representable chart.
pub const CHART_EPS: f64 = 1e-8;

/// Scales used by default when probing `f(λξ) = λ^k f(ξ)`.
pub const DEFAULT_SCALES: [f64; 3] = [0.5, 2.0, 3.0];

/// A function homogeneous of a given weight, in the chart `ξ_d ≠ 0`.
#[derive(Debug, Clone)]
pub struct HomogeneousMap {
    weight: f64,
    base: SmoothMap,
    dim: usize,
}

impl HomogeneousMap {
    /// `base` takes the `dim − 1` ratio arguments `ξ_i/ξ_d`.
    pub fn new(weight: f64, base: SmoothMap, dim: usize) -> Result<Self, EvalError> {
        if dim == 0 || base.arity() != dim - 1 {
            return Err(EvalError::Arity {
                expected: dim.saturating_sub(1),
                got: base.arity(),
            });
        }
        Ok(HomogeneousMap { weight, base, dim })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> &SmoothMap {
        &self.base
    }

    fn integer_weight(&self) -> Option<i32> {
        let rounded = self.weight.round();
        if (self.weight - rounded).abs() < 1e-12 && rounded.abs() <= 64.0 {
            Some(rounded as i32)
        } else {
            None
        }
    }

    /// Evaluate on jets; errors when the last coordinate leaves the chart.
    pub fn eval_jets(&self, args: &[Jet2]) -> Result<Jet2, EvalError> {
        if args.len() != self.dim {
            return Err(EvalError::Arity { expected: self.dim, got: args.len() });
        }
        let last = &args[self.dim - 1];
        if last.value.abs() < CHART_EPS {
            return Err(EvalError::Jet(JetError::Domain {
                op: "homogeneous chart (xi_d near zero)",
                value: last.value,
            }));
        }
        let ratios: Vec<Jet2> = args[..self.dim - 1]
            .iter()
            .map(|a| a.div(last))
            .collect::<Result<_, _>>()?;
        let base = self.base.eval_jets(&ratios)?;
        let factor = match self.integer_weight() {
            Some(k) => last.powi(k)?,
            None => last.powf(self.weight)?,
        };
        Ok(base.mul(&factor))
    }

    pub fn eval_scalar(&self, args: &[f64]) -> Result<f64, EvalError> {
        let jets: Vec<Jet2> = args.iter().map(|&v| Jet2::constant(v, 0)).collect();
        self.eval_jets(&jets).map(|j| j.value)
    }
}

/// Max normalized deviation `|f(λξ) − λ^k f(ξ)| / (1 + |f(ξ)|)` over all
/// sample points and scales.
pub fn homogeneity_check(
    map: &SmoothMap,
    weight: f64,
    samples: &[Vec<f64>],
    scales: &[f64],
) -> Result<f64, EvalError> {
    homogeneity_check_fn(|p| map.eval_scalar(p), weight, samples, scales)
}

/// Same check for any scalar evaluator (e.g. a [`HomogeneousMap`]).
pub fn homogeneity_check_fn(
    f: impl Fn(&[f64]) -> Result<f64, EvalError>,
    weight: f64,
    samples: &[Vec<f64>],
    scales: &[f64],
) -> Result<f64, EvalError> {
    let mut worst = 0.0f64;
    for sample in samples {
        let fx = f(sample)?;
        for &lambda in scales {
            let scaled: Vec<f64> = sample.iter().map(|&x| lambda * x).collect();
            let flx = f(&scaled)?;
            let deviation = (flx - lambda.powf(weight) * fx).abs() / (1.0 + fx.abs());
            if !deviation.is_finite() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(deviation);
        }
    }
    Ok(worst)
}
