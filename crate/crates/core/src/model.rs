//! Firing-rate model primitives: the erf-type sigmoid, its Gaussian
//! expectation, and the per-population parameter bundle.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `S(x) = (1/√(2π)) ∫_0^x e^{-s²/2} ds = ½·erf(x/√2)`.
///
/// Odd bit-for-bit: `sigmoid_s(-x) == -sigmoid_s(x)` for every finite `x`.
#[inline]
pub fn sigmoid_s(x: f64) -> f64 {
    0.5 * libm::erf(x * FRAC_1_SQRT_2)
}

/// `E[S(Y)]` for `Y ~ N(u, v)`, which equals `S(u / √(1 + v))`.
pub fn gaussian_expectation_s(u: f64, v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::Domain(format!("variance must be >= 0, got {v}")));
    }
    Ok(expected_activation(u, v))
}

/// Unchecked form of [`gaussian_expectation_s`] for inner loops.
#[inline]
pub(crate) fn expected_activation(u: f64, v: f64) -> f64 {
    sigmoid_s(u / (1.0 + v).sqrt())
}

/// External input as a right-continuous step function of time.
///
/// The value at `t` is the value of the last breakpoint `<= t`, and zero
/// before the first breakpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    breakpoints: Vec<(f64, f64)>,
}

impl PiecewiseConstant {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self { breakpoints: vec![(f64::NEG_INFINITY, value)] }
    }

    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::config("input breakpoints must be strictly increasing"));
        }
        if breakpoints.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(Error::config("input values must be finite"));
        }
        Ok(Self { breakpoints })
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self.breakpoints.partition_point(|&(s, _)| s <= t) {
            0 => 0.0,
            k => self.breakpoints[k - 1].1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.breakpoints.iter().all(|&(_, v)| v == 0.0)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    /// Membrane time constant θ.
    pub theta: f64,
    /// Noise intensity λ.
    pub lambda: f64,
    pub input: PiecewiseConstant,
    pub count: usize,
    /// Fraction of the network in this population; filled in by
    /// [`FiringRateModel::new`].
    pub fraction: f64,
}

impl PopulationParams {
    pub fn new(theta: f64, lambda: f64, count: usize) -> Self {
        Self { theta, lambda, input: PiecewiseConstant::zero(), count, fraction: 1.0 }
    }

    pub fn with_input(mut self, input: PiecewiseConstant) -> Self {
        self.input = input;
        self
    }

    /// Stationary variance `λ²θ/2` of the free dynamics.
    pub fn stationary_variance(&self) -> f64 {
        0.5 * self.lambda * self.lambda * self.theta
    }
}

/// `dX = (-X/θ_α + I_α(t) + Σ_γ (1/N_γ) Σ_j J_ij S(X_j(t - τ_ij))) dt + λ_α dW`.
///
/// `coupling[α][γ]` holds the mean synaptic weight J̄_αγ. Realizations and
/// quadratures carry the actual efficacies; the matrix is what laws are
/// built from and what the linear stability analysis reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringRateModel {
    populations: Vec<PopulationParams>,
    coupling: Vec<Vec<f64>>,
}

impl FiringRateModel {
    pub fn new(mut populations: Vec<PopulationParams>, coupling: Vec<Vec<f64>>) -> Result<Self> {
        let p = populations.len();
        if p == 0 {
            return Err(Error::config("at least one population is required"));
        }
        if coupling.len() != p || coupling.iter().any(|row| row.len() != p) {
            return Err(Error::config(format!("coupling matrix must be {p}x{p}")));
        }
        if coupling.iter().flatten().any(|j| !j.is_finite()) {
            return Err(Error::config("coupling entries must be finite"));
        }
        for (alpha, pop) in populations.iter().enumerate() {
            if !(pop.theta > 0.0) || !pop.theta.is_finite() {
                return Err(Error::config(format!("theta of population {alpha} must be > 0")));
            }
            if !(pop.lambda >= 0.0) || !pop.lambda.is_finite() {
                return Err(Error::config(format!("lambda of population {alpha} must be >= 0")));
            }
            if pop.count == 0 {
                return Err(Error::config(format!("population {alpha} is empty")));
            }
        }
        let total: usize = populations.iter().map(|p| p.count).sum();
        for pop in &mut populations {
            pop.fraction = pop.count as f64 / total as f64;
        }
        let sum: f64 = populations.iter().map(|p| p.fraction).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::config("population fractions do not sum to one"));
        }
        Ok(Self { populations, coupling })
    }

    /// One population of `n` neurons with mean weight `j_bar`.
    pub fn single(theta: f64, lambda: f64, j_bar: f64, n: usize) -> Result<Self> {
        Self::new(vec![PopulationParams::new(theta, lambda, n)], vec![vec![j_bar]])
    }

    pub fn populations(&self) -> &[PopulationParams] {
        &self.populations
    }

    pub fn population_count(&self) -> usize {
        self.populations.len()
    }

    pub fn coupling(&self) -> &[Vec<f64>] {
        &self.coupling
    }

    pub fn total_count(&self) -> usize {
        self.populations.iter().map(|p| p.count).sum()
    }

    /// Population index of every neuron; populations occupy contiguous blocks.
    pub fn membership(&self) -> Vec<usize> {
        self.populations.iter().enumerate().flat_map(|(alpha, p)| std::iter::repeat_n(alpha, p.count)).collect()
    }

    /// Same parameters with every population resized to the given counts.
    pub fn with_counts(&self, counts: &[usize]) -> Result<Self> {
        if counts.len() != self.populations.len() {
            return Err(Error::config("one count per population is required"));
        }
        let pops =
            self.populations.iter().zip(counts).map(|(p, &count)| PopulationParams { count, ..p.clone() }).collect();
        Self::new(pops, self.coupling.clone())
    }
}
