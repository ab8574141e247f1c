//! Solvers for multinomial logistic regression and its sparse variants.
//!
//! The centerpiece is an element-parallel majorization-minimization scheme:
//! each outer iteration replaces the coupled log-sum-exp objective with a
//! separable upper bound and minimizes every weight element independently by
//! a parameter-free bracket-and-bisect scalar solve. The same machinery
//! extends to the `l1`-penalized problem (a subgradient case split decides
//! between an exact zero and a shifted smooth root) and to the
//! cardinality-constrained problem (unconstrained solves followed by a
//! hard-threshold step).
//!
//! Reference solvers for cross-checking fixed points live in [`baselines`]:
//! exact-Hessian Newton, fixed-bound MM, cyclic coordinate soft-thresholding,
//! and an exhaustive support-enumeration oracle.
//!
//! # Determinism
//!
//! Fits are bit-reproducible for a given seed and configuration regardless
//! of the thread count: element solves read only the previous-iterate
//! snapshot, and every reduction over samples runs in a fixed order.
//!
//! # Quick start
//!
//! ```
//! use piano_core::io::{synth_generate, SyntheticSpec};
//! use piano_core::{piano_fit, FitConfig, WeightMatrix};
//!
//! let (data, _) = synth_generate(&SyntheticSpec::new(50, 4, 3)).unwrap();
//! let w0 = WeightMatrix::zeros(data.m(), data.d());
//! let fit = piano_fit(&data, &w0, &FitConfig::default()).unwrap();
//! assert!(fit.trace.windows(2).all(|p| p[1].objective <= p[0].objective));
//! ```

pub mod baselines;
pub mod config;
pub mod dataset;
pub mod error;
pub mod io;
pub mod model;
pub mod piano;
pub mod scalar;
pub mod surrogate;
pub mod weights;

pub use config::{FitConfig, FitResult, L0Ranking, Regularization, TraceRecord};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use model::{
    class_scores, mlr_gradient, mlr_hessian, mlr_objective, penalized_objective,
    softmax_posteriors,
};
pub use piano::{fit, piano_fit, piano_fit_l0, piano_fit_l1, piano_iterate};
pub use scalar::{
    bisect, bracket_root, scalar_grad, scalar_objective, solve_scalar_l1, solve_scalar_smooth,
    BisectionSettings, BracketResult, ExpTerm, ScalarExpSum,
};
pub use surrogate::{build_context, element_subproblem, surrogate_value, ClassMoments};
pub use weights::WeightMatrix;
