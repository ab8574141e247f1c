//! Solver configuration and per-iteration trace records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparsity regularization applied to the flattened weight vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// Plain maximum-likelihood fit.
    None,
    /// `lambda * ||w||_1` added to the objective (`lambda > 0`).
    L1 { lambda: f64 },
    /// Hard cardinality constraint `||w||_0 <= beta`.
    L0 { beta: usize },
}

impl Regularization {
    pub fn lambda(&self) -> f64 {
        match self {
            Regularization::L1 { lambda } => *lambda,
            _ => 0.0,
        }
    }
}

/// How the hard-threshold step ranks elements when enforcing `||w||_0 <= beta`.
///
/// `Value` keeps the elements whose per-element surrogate value at its
/// minimizer is smallest (ascending sort). `Gain` keeps the elements whose
/// move from 0 to the minimizer decreases the surrogate the most.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum L0Ranking {
    #[default]
    Value,
    Gain,
}

/// Hyperparameters shared by all solvers.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub regularization: Regularization,
    /// Stop when `|f_k - f_{k-1}| <= rel_tol * |f_{k-1}|`.
    pub rel_tol: f64,
    pub max_outer_iters: usize,
    /// Bisection stops once the bracket width falls below this.
    pub bisection_tol: f64,
    /// Geometric growth factor for bracket expansion (> 1).
    pub bracket_growth: f64,
    /// Per-element magnitude cap used when a scalar subproblem has its
    /// infimum at infinity.
    pub weight_cap: f64,
    pub l0_ranking: L0Ranking,
    pub threads: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            regularization: Regularization::None,
            rel_tol: 1e-3,
            max_outer_iters: 500,
            bisection_tol: 1e-8,
            bracket_growth: 2.0,
            weight_cap: 1e3,
            l0_ranking: L0Ranking::default(),
            threads: std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1),
            seed: 0,
        }
    }
}

impl FitConfig {
    /// Checks value ranges. `dm` is the total element count `d * m`, needed
    /// to bound the cardinality constraint.
    pub fn validate(&self, dm: usize) -> Result<()> {
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if !self.bisection_tol.is_finite() || self.bisection_tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "bisection_tol must be > 0, got {}",
                self.bisection_tol
            )));
        }
        if !self.bracket_growth.is_finite() || self.bracket_growth <= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "bracket_growth must be > 1, got {}",
                self.bracket_growth
            )));
        }
        if !self.weight_cap.is_finite() || self.weight_cap <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "weight_cap must be > 0, got {}",
                self.weight_cap
            )));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidConfig("max_outer_iters must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidConfig("threads must be >= 1".into()));
        }
        match self.regularization {
            Regularization::L1 { lambda } if !lambda.is_finite() || lambda <= 0.0 => Err(
                Error::InvalidConfig(format!("l1 lambda must be > 0, got {lambda}")),
            ),
            Regularization::L0 { beta } if beta > dm => Err(Error::InvalidConfig(format!(
                "l0 beta={beta} exceeds element count {dm}"
            ))),
            _ => Ok(()),
        }
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    /// Penalized objective under l1, plain objective otherwise.
    pub objective: f64,
    /// Milliseconds since the fit started.
    pub wall_ms: f64,
    /// Exact nonzero count of the iterate.
    pub nnz: usize,
}

/// Output of a fit: final weights, the full trace (iteration 0 included),
/// and whether the stopping rule fired before the iteration cap.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub weights: crate::weights::WeightMatrix,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
}

impl FitResult {
    /// Objective at the returned weights (last trace record).
    pub fn final_objective(&self) -> f64 {
        self.trace.last().expect("trace never empty").objective
    }

    pub fn iterations(&self) -> usize {
        self.trace.last().expect("trace never empty").iter
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        FitConfig::default().validate(10).unwrap();
    }

    #[test]
    fn rejects_bad_ranges() {
        let c = FitConfig { rel_tol: 0.0, ..FitConfig::default() };
        assert!(c.validate(4).is_err());

        let c = FitConfig { bracket_growth: 1.0, ..FitConfig::default() };
        assert!(c.validate(4).is_err());

        let c = FitConfig {
            regularization: Regularization::L1 { lambda: 0.0 },
            ..FitConfig::default()
        };
        assert!(c.validate(4).is_err());

        let c = FitConfig {
            regularization: Regularization::L0 { beta: 5 },
            ..FitConfig::default()
        };
        assert!(c.validate(4).is_err());
        assert!(c.validate(5).is_ok());
    }
}
