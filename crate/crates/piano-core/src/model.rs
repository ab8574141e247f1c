//! The multinomial logistic regression objective, its gradient and Hessian,
//! and the numerically stable softmax machinery shared by every solver.
//!
//! All reductions over samples run in a fixed (ascending sample index) order,
//! so results are bit-identical regardless of how many threads the caller
//! uses elsewhere.

use ndarray::{Array1, Array2, ArrayView1};

use crate::config::{FitConfig, Regularization};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::weights::WeightMatrix;

/// Hard cap on `d * m` for dense Hessian materialization.
pub const HESSIAN_GUARD: usize = 5000;

/// `max_i s_i + log sum_i exp(s_i - max)`, finite for any finite scores.
pub fn logsumexp(scores: ArrayView1<'_, f64>) -> f64 {
    let max = scores.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
    max + sum.ln()
}

fn check_dims(w: &WeightMatrix, data: &Dataset) -> Result<()> {
    if w.d() != data.d() || w.m() != data.m() {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{} but dataset has m={}, d={}",
            w.m(),
            w.d(),
            data.m(),
            data.d()
        )));
    }
    Ok(())
}

/// Per-class linear scores `w_i^T x` for one feature vector.
pub fn class_scores(w: &WeightMatrix, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if x.len() != w.d() {
        return Err(Error::DimensionMismatch(format!(
            "feature vector has length {}, weights expect {}",
            x.len(),
            w.d()
        )));
    }
    Ok(w.as_array().dot(&x))
}

/// The full `n x m` score matrix `X W^T`.
pub fn score_matrix(w: &WeightMatrix, data: &Dataset) -> Result<Array2<f64>> {
    check_dims(w, data)?;
    Ok(data.features().dot(&w.as_array().t()))
}

/// Softmax with max-subtraction; rows of scores up to about `1e4` in
/// magnitude stay finite.
pub fn softmax_posteriors(scores: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = scores.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut out = scores.mapv(|s| (s - max).exp());
    let sum = out.sum();
    out.mapv_inplace(|e| e / sum);
    out
}

/// Negative log-likelihood `sum_j (-y_j . s_j + logsumexp(s_j))`.
pub fn mlr_objective(w: &WeightMatrix, data: &Dataset) -> Result<f64> {
    let scores = score_matrix(w, data)?;
    Ok(objective_from_scores(&scores, data))
}

/// Objective evaluated from a precomputed score matrix.
pub(crate) fn objective_from_scores(scores: &Array2<f64>, data: &Dataset) -> f64 {
    let mut total = 0.0;
    for j in 0..data.n() {
        let row = scores.row(j);
        total += logsumexp(row) - row[data.class_index(j)];
    }
    total
}

/// Objective plus `lambda * ||w||_1` for l1 regularization; the plain
/// objective for `None` and `L0` (the cardinality bound is a constraint, not
/// a penalty).
pub fn penalized_objective(w: &WeightMatrix, data: &Dataset, config: &FitConfig) -> Result<f64> {
    let base = mlr_objective(w, data)?;
    Ok(match config.regularization {
        Regularization::L1 { lambda } => {
            base + lambda * w.as_array().iter().map(|v| v.abs()).sum::<f64>()
        }
        _ => base,
    })
}

/// Gradient of the objective, flattened class-major: block `i` is
/// `sum_j (p_j^(i) - y_ji) x_j`.
pub fn mlr_gradient(w: &WeightMatrix, data: &Dataset) -> Result<Array1<f64>> {
    let scores = score_matrix(w, data)?;
    let (d, m) = (data.d(), data.m());
    let labels = data.labels();
    let mut grad = Array1::zeros(d * m);
    for j in 0..data.n() {
        let p = softmax_posteriors(scores.row(j));
        let x = data.sample(j);
        let y = labels.row(j);
        for i in 0..m {
            let coeff = p[i] - y[i];
            if coeff == 0.0 {
                continue;
            }
            for l in 0..d {
                grad[i * d + l] += coeff * x[l];
            }
        }
    }
    Ok(grad)
}

/// Dense Hessian `sum_j (diag(p_j) - p_j p_j^T) (x) x_j x_j^T`, laid out in
/// `d`-sized class blocks matching the flattened gradient.
///
/// Only tests and the Newton baseline materialize this; it is guarded at
/// `d * m <=` [`HESSIAN_GUARD`].
pub fn mlr_hessian(w: &WeightMatrix, data: &Dataset) -> Result<Array2<f64>> {
    check_dims(w, data)?;
    let (d, m) = (data.d(), data.m());
    let dm = d * m;
    if dm > HESSIAN_GUARD {
        return Err(Error::SizeGuard {
            what: "dense Hessian",
            quantity: "d*m",
            limit: HESSIAN_GUARD,
            actual: dm,
        });
    }
    let scores = score_matrix(w, data)?;
    let mut hess = Array2::zeros((dm, dm));
    let mut outer = Array2::zeros((d, d));
    for j in 0..data.n() {
        let p = softmax_posteriors(scores.row(j));
        let x = data.sample(j);
        for a in 0..d {
            for b in 0..d {
                outer[(a, b)] = x[a] * x[b];
            }
        }
        for i in 0..m {
            for i2 in 0..m {
                let coeff = if i == i2 {
                    p[i] * (1.0 - p[i])
                } else {
                    -p[i] * p[i2]
                };
                if coeff == 0.0 {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        hess[(i * d + a, i2 * d + b)] += coeff * outer[(a, b)];
                    }
                }
            }
        }
    }
    Ok(hess)
}
