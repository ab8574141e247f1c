//! Per-iteration surrogate construction.
//!
//! At each outer iteration the coupled log-sum-exp objective is replaced by a
//! separable upper bound built from two ingredients: a tangent-line bound on
//! the log (contributing the per-sample mixing weights `a_j`) and a uniform
//! `1/d` Jensen split of each `exp(w_i^T x_j)` that decouples the feature
//! coordinates. The result is one independent scalar problem per weight
//! element, all reading the same iterate snapshot.

use ndarray::parallel::prelude::*;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::logsumexp;
use crate::scalar::{ExpTerm, ScalarExpSum};
use crate::weights::WeightMatrix;

/// The data moments `v_i = sum_j y_ji x_j`, one row per class.
///
/// These do not depend on the weights; compute them once per fit and reuse
/// them across iterations.
#[derive(Debug, Clone)]
pub struct ClassMoments {
    v: Array2<f64>,
}

impl ClassMoments {
    pub fn compute(data: &Dataset) -> Self {
        // labels^T (n x m) . features (n x d) -> m x d
        let v = data.labels().t().dot(&data.features());
        Self { v }
    }

    pub fn get(&self, class: usize, feature: usize) -> f64 {
        self.v[(class, feature)]
    }

    pub fn as_array(&self) -> ArrayView2<'_, f64> {
        self.v.view()
    }
}

/// Snapshot quantities of one outer iteration: the score matrix of the
/// current iterate and `log a_j = -logsumexp_i(scores_j)`.
#[derive(Debug)]
pub struct SurrogateContext<'a> {
    log_a: Array1<f64>,
    scores: Array2<f64>,
    moments: &'a ClassMoments,
    d: usize,
}

impl<'a> SurrogateContext<'a> {
    pub fn log_a(&self) -> &Array1<f64> {
        &self.log_a
    }

    pub fn scores(&self) -> ArrayView2<'_, f64> {
        self.scores.view()
    }

    pub fn moments(&self) -> &ClassMoments {
        self.moments
    }
}

/// Builds the surrogate context for the iterate `w_k`: a parallel map over
/// samples computing each score row and its `log a_j`. Rows are written to
/// disjoint slots, so the result does not depend on scheduling.
pub fn build_context<'a>(
    w_k: &WeightMatrix,
    data: &Dataset,
    moments: &'a ClassMoments,
) -> Result<SurrogateContext<'a>> {
    if w_k.d() != data.d() || w_k.m() != data.m() {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{} but dataset has m={}, d={}",
            w_k.m(),
            w_k.d(),
            data.m(),
            data.d()
        )));
    }
    let (n, m) = (data.n(), data.m());
    let mut scores = Array2::zeros((n, m));
    let mut log_a = Array1::zeros(n);
    let weight_rows = w_k.as_array();
    Zip::from(scores.axis_iter_mut(Axis(0)))
        .and(log_a.view_mut())
        .and(data.features().axis_iter(Axis(0)))
        .into_par_iter()
        .with_min_len(32)
        .for_each(|(mut score_row, log_a_j, x)| {
            for i in 0..m {
                score_row[i] = weight_rows.row(i).dot(&x);
            }
            *log_a_j = -logsumexp(score_row.view());
        });
    Ok(SurrogateContext {
        log_a,
        scores,
        moments,
        d: data.d(),
    })
}

/// The scalar subproblem for element `(class, feature)` of the surrogate.
///
/// Samples with `x_jl = 0` contribute only a constant and are omitted from
/// the exponential terms; each remaining sample `j` contributes coefficient
/// `log a_j - log d + s_ji - d x_jl w_il^k` with slope `d x_jl`.
pub fn element_subproblem(
    ctx: &SurrogateContext<'_>,
    w_k: &WeightMatrix,
    data: &Dataset,
    class: usize,
    feature: usize,
) -> Result<ScalarExpSum> {
    if class >= data.m() || feature >= data.d() {
        return Err(Error::DimensionMismatch(format!(
            "element ({class}, {feature}) out of range for m={}, d={}",
            data.m(),
            data.d()
        )));
    }
    let d_f = ctx.d as f64;
    let log_d = d_f.ln();
    let w_inc = w_k.get(class, feature);
    let mut terms = Vec::new();
    for j in 0..data.n() {
        let x = data.features()[(j, feature)];
        if x == 0.0 {
            continue;
        }
        let slope = d_f * x;
        terms.push(ExpTerm {
            log_coeff: ctx.log_a[j] - log_d + ctx.scores[(j, class)] - slope * w_inc,
            slope,
        });
    }
    let v = ctx.moments.get(class, feature);
    // A zero feature column forces v = 0 as well, so the degenerate guard in
    // ScalarExpSum::new cannot fire for subproblems built from real data.
    ScalarExpSum::new(v, terms)
}

/// Full separable surrogate evaluated at `w`, including the constant terms
/// from zero feature entries. Exponents are assembled in log space before a
/// single `exp`.
pub fn surrogate_value(
    ctx: &SurrogateContext<'_>,
    w_k: &WeightMatrix,
    data: &Dataset,
    w: &WeightMatrix,
) -> Result<f64> {
    if w.d() != data.d() || w.m() != data.m() || w_k.d() != data.d() || w_k.m() != data.m() {
        return Err(Error::DimensionMismatch(
            "surrogate_value: weight shapes must match the dataset".into(),
        ));
    }
    let d_f = ctx.d as f64;
    let log_d = d_f.ln();
    let mut linear = 0.0;
    for i in 0..data.m() {
        for l in 0..data.d() {
            linear += w.get(i, l) * ctx.moments.get(i, l);
        }
    }
    let mut exps = 0.0;
    for j in 0..data.n() {
        for i in 0..data.m() {
            let base = ctx.log_a[j] - log_d + ctx.scores[(j, i)];
            for l in 0..data.d() {
                let x = data.features()[(j, l)];
                exps += (base + d_f * x * (w.get(i, l) - w_k.get(i, l))).exp();
            }
        }
    }
    Ok(-linear + exps)
}

/// Sum of the constant contributions that `element_subproblem` drops
/// (samples with `x_jl = 0`), needed to reconcile per-element objectives with
/// [`surrogate_value`].
pub fn surrogate_constant(ctx: &SurrogateContext<'_>, data: &Dataset) -> f64 {
    let log_d = (ctx.d as f64).ln();
    let mut total = 0.0;
    for j in 0..data.n() {
        let zero_features = (0..data.d())
            .filter(|&l| data.features()[(j, l)] == 0.0)
            .count();
        if zero_features == 0 {
            continue;
        }
        for i in 0..data.m() {
            total += zero_features as f64 * (ctx.log_a[j] - log_d + ctx.scores[(j, i)]).exp();
        }
    }
    total
}
