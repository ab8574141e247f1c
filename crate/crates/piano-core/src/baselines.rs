//! Reference solvers used to cross-check fixed points and for benchmark
//! comparisons: exact-Hessian Newton (IRLS), the fixed-curvature bound MM
//! update, cyclic coordinate soft-thresholding for the l1 problem, and an
//! exhaustive support-enumeration oracle for the cardinality-constrained
//! problem.
//!
//! These exist for correctness, not speed: they are single-threaded and
//! guarded to modest problem sizes.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use ndarray::Array2;

use crate::config::{FitConfig, FitResult, Regularization, TraceRecord};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{
    mlr_gradient, mlr_hessian, mlr_objective, penalized_objective, score_matrix,
    softmax_posteriors, HESSIAN_GUARD,
};
use crate::weights::WeightMatrix;

/// Relative ridge applied to singular curvature matrices before factorizing
/// (the objective's shift invariance makes both the Hessian and the fixed
/// bound rank-deficient).
const RIDGE_SCALE: f64 = 1e-8;

fn guard_dm(what: &'static str, dm: usize) -> Result<()> {
    if dm > HESSIAN_GUARD {
        return Err(Error::SizeGuard {
            what,
            quantity: "d*m",
            limit: HESSIAN_GUARD,
            actual: dm,
        });
    }
    Ok(())
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

/// Factorizes `mat + ridge I`, escalating the ridge a few times if the
/// Cholesky fails by rounding.
fn ridged_cholesky(mat: &DMatrix<f64>, base_ridge: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = mat.nrows();
    let mut ridge = if base_ridge > 0.0 { base_ridge } else { 1e-12 };
    for _ in 0..4 {
        let mut work = mat.clone();
        for i in 0..n {
            work[(i, i)] += ridge;
        }
        if let Some(chol) = Cholesky::new(work) {
            return Ok((chol, ridge));
        }
        ridge *= 100.0;
    }
    Err(Error::LinearSolveFailed(format!(
        "Cholesky failed up to ridge {ridge}"
    )))
}

fn to_nalgebra(h: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| h[(r, c)])
}

/// The fixed quadratic majorizer curvature
/// `B = 1/2 (I - 11^T/m) (x) sum_j x_j x_j^T`, with a factorization of the
/// ridged matrix built once per fit.
pub struct BohningBound {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    ridge: f64,
}

impl BohningBound {
    pub fn new(data: &Dataset) -> Result<Self> {
        let (d, m) = (data.d(), data.m());
        let dm = d * m;
        guard_dm("fixed-bound curvature", dm)?;
        let gram = data.features().t().dot(&data.features());
        let mut matrix = DMatrix::zeros(dm, dm);
        for i in 0..m {
            for i2 in 0..m {
                let coeff = 0.5 * (if i == i2 { 1.0 } else { 0.0 } - 1.0 / m as f64);
                for a in 0..d {
                    for b in 0..d {
                        matrix[(i * d + a, i2 * d + b)] = coeff * gram[(a, b)];
                    }
                }
            }
        }
        let ridge = RIDGE_SCALE * matrix.trace() / dm as f64;
        let (chol, ridge) = ridged_cholesky(&matrix, ridge)?;
        Ok(Self {
            matrix,
            chol,
            ridge,
        })
    }

    /// The exact (unridged) curvature matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Solves `(B + ridge I) x = rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    /// Ridged diagonal entry for flat (class-major) index `f`.
    pub fn diag(&self, f: usize) -> f64 {
        self.matrix[(f, f)] + self.ridge
    }

    /// Quadratic model `l(w_k) + r^T delta + 1/2 delta^T B delta` using the
    /// exact curvature.
    pub fn quadratic_model(&self, obj_k: f64, grad: &DVector<f64>, delta: &DVector<f64>) -> f64 {
        obj_k + grad.dot(delta) + 0.5 * delta.dot(&(&self.matrix * delta))
    }

}

/// `sign(a) * max(0, |a| - b)`, the proximal map of `b * |.|`. Exact zero
/// whenever `|a| <= b`.
pub fn soft_threshold(a: f64, b: f64) -> f64 {
    if a.abs() <= b {
        0.0
    } else if a > 0.0 {
        a - b
    } else {
        a + b
    }
}

struct TraceBuilder {
    start: Instant,
    records: Vec<TraceRecord>,
}

impl TraceBuilder {
    fn new(objective: f64, nnz: usize) -> Self {
        let start = Instant::now();
        Self {
            start,
            records: vec![TraceRecord {
                iter: 0,
                objective,
                wall_ms: 0.0,
                nnz,
            }],
        }
    }

    fn push(&mut self, iter: usize, objective: f64, nnz: usize) {
        self.records.push(TraceRecord {
            iter,
            objective,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
            nnz,
        });
    }
}

fn require_smooth(config: &FitConfig, who: &str) -> Result<()> {
    match config.regularization {
        Regularization::None => Ok(()),
        _ => Err(Error::InvalidConfig(format!(
            "{who} solves the unregularized problem only"
        ))),
    }
}

/// Newton's method with the exact Hessian, ridged for solvability.
///
/// The raw update is `w - H^{-1} r`; a step-halving guard keeps the
/// objective nonincreasing when a full step overshoots (the raw step is used
/// unchanged whenever it already descends).
pub fn irls_fit(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    check_dims(w0, data)?;
    let dm = data.d() * data.m();
    guard_dm("Newton (dense Hessian)", dm)?;
    config.validate(dm)?;
    require_smooth(config, "irls_fit")?;

    let mut weights = w0.clone();
    let mut prev = mlr_objective(&weights, data)?;
    let mut trace = TraceBuilder::new(prev, weights.nnz());
    let mut converged = false;

    for iter in 1..=config.max_outer_iters {
        let grad = mlr_gradient(&weights, data)?;
        let grad = DVector::from_iterator(dm, grad.iter().copied());
        let hess = to_nalgebra(&mlr_hessian(&weights, data)?);
        let ridge = RIDGE_SCALE * hess.trace() / dm as f64;
        let (chol, _) = ridged_cholesky(&hess, ridge)?;
        let delta = chol.solve(&grad);

        let flat = weights.flatten();
        let mut accepted = weights.clone();
        let mut accepted_obj = prev;
        let mut scale = 1.0;
        for _ in 0..40 {
            let stepped: Vec<f64> = flat
                .iter()
                .zip(delta.iter())
                .map(|(w, d)| w - scale * d)
                .collect();
            let candidate = WeightMatrix::from_flat(&stepped, data.m(), data.d())?;
            let candidate_obj = mlr_objective(&candidate, data)?;
            if candidate_obj <= prev {
                accepted = candidate;
                accepted_obj = candidate_obj;
                break;
            }
            scale *= 0.5;
        }

        weights = accepted;
        if !accepted_obj.is_finite() {
            return Err(Error::NonFiniteObjective { iter });
        }
        trace.push(iter, accepted_obj, weights.nnz());
        if (accepted_obj - prev).abs() <= config.rel_tol * prev.abs() {
            converged = true;
            break;
        }
        prev = accepted_obj;
    }

    Ok(FitResult {
        weights,
        trace: trace.records,
        converged,
    })
}

/// Fixed-matrix MM: `w <- w - B^{-1} r` with the bound factorized once.
/// Descent is guaranteed because the ridged bound still majorizes the
/// objective's curvature.
pub fn bohning_mm_fit(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    check_dims(w0, data)?;
    let dm = data.d() * data.m();
    guard_dm("fixed-bound MM", dm)?;
    config.validate(dm)?;
    require_smooth(config, "bohning_mm_fit")?;

    let bound = BohningBound::new(data)?;
    let mut weights = w0.clone();
    let mut prev = mlr_objective(&weights, data)?;
    let mut trace = TraceBuilder::new(prev, weights.nnz());
    let mut converged = false;

    for iter in 1..=config.max_outer_iters {
        let grad = mlr_gradient(&weights, data)?;
        let grad = DVector::from_iterator(dm, grad.iter().copied());
        let delta = bound.solve(&grad);
        let stepped: Vec<f64> = weights
            .flatten()
            .iter()
            .zip(delta.iter())
            .map(|(w, d)| w - d)
            .collect();
        weights = WeightMatrix::from_flat(&stepped, data.m(), data.d())?;
        let current = mlr_objective(&weights, data)?;
        if !current.is_finite() {
            return Err(Error::NonFiniteObjective { iter });
        }
        trace.push(iter, current, weights.nnz());
        if (current - prev).abs() <= config.rel_tol * prev.abs() {
            converged = true;
            break;
        }
        prev = current;
    }

    Ok(FitResult {
        weights,
        trace: trace.records,
        converged,
    })
}

/// Cyclic coordinate descent with the bound's diagonal curvature and a soft
/// threshold: `w_f <- soft(w_f - r_f / B_ff, lambda / B_ff)`.
///
/// Each coordinate update re-evaluates its gradient entry at the current
/// iterate (alternating minimization), maintained incrementally through a
/// running score matrix that is refreshed at the top of every sweep. Sweep
/// order is fixed class-major. Accepts `lambda = 0` (plain diagonal-scaled
/// coordinate MM) as well as an l1 configuration.
pub fn coord_mm_l1_fit(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    check_dims(w0, data)?;
    let (d, m, n) = (data.d(), data.m(), data.n());
    let dm = d * m;
    guard_dm("coordinate MM", dm)?;
    config.validate(dm)?;
    let lambda = match config.regularization {
        Regularization::None => 0.0,
        Regularization::L1 { lambda } => lambda,
        Regularization::L0 { .. } => {
            return Err(Error::InvalidConfig(
                "coord_mm_l1_fit supports none or l1 regularization".into(),
            ))
        }
    };

    let bound = BohningBound::new(data)?;
    let mut weights = w0.clone();
    let mut prev = penalized_objective(&weights, data, config)?;
    let mut trace = TraceBuilder::new(prev, weights.nnz());
    let mut converged = false;

    let mut flat = weights.flatten().to_vec();
    for sweep in 1..=config.max_outer_iters {
        // refresh to stop incremental drift from accumulating across sweeps
        let mut scores = score_matrix(&weights, data)?;
        for (f, slot) in flat.iter_mut().enumerate() {
            let (class, feature) = (f / d, f % d);
            let mut grad_f = 0.0;
            for j in 0..n {
                let x = data.features()[(j, feature)];
                if x == 0.0 {
                    continue;
                }
                let p = softmax_posteriors(scores.row(j));
                grad_f += (p[class] - data.labels()[(j, class)]) * x;
            }
            let curvature = bound.diag(f);
            let target = *slot - grad_f / curvature;
            let updated = soft_threshold(target, lambda / curvature);
            let delta = updated - *slot;
            if delta != 0.0 {
                *slot = updated;
                for j in 0..n {
                    scores[(j, class)] += delta * data.features()[(j, feature)];
                }
            }
        }
        weights = WeightMatrix::from_flat(&flat, m, d)?;
        let current = penalized_objective(&weights, data, config)?;
        if !current.is_finite() {
            return Err(Error::NonFiniteObjective { iter: sweep });
        }
        trace.push(sweep, current, weights.nnz());
        if (current - prev).abs() <= config.rel_tol * prev.abs() {
            converged = true;
            break;
        }
        prev = current;
    }

    Ok(FitResult {
        weights,
        trace: trace.records,
        converged,
    })
}

/// Result of the exhaustive cardinality oracle.
#[derive(Debug, Clone)]
pub struct L0Oracle {
    /// Flat (class-major) indices of the optimal support, ascending.
    pub support: Vec<usize>,
    pub objective: f64,
    pub weights: WeightMatrix,
}

const BRUTE_FORCE_DM_LIMIT: usize = 12;
const BRUTE_FORCE_BETA_LIMIT: usize = 4;

/// Newton restricted to a fixed support, all other elements pinned at zero.
fn restricted_newton(data: &Dataset, support: &[usize], config: &FitConfig) -> Result<(WeightMatrix, f64)> {
    let (d, m) = (data.d(), data.m());
    let dm = d * m;
    let mut flat = vec![0.0; dm];
    let mut weights = WeightMatrix::from_flat(&flat, m, d)?;
    let mut prev = mlr_objective(&weights, data)?;
    if support.is_empty() {
        return Ok((weights, prev));
    }
    let k = support.len();
    for _ in 0..config.max_outer_iters {
        let grad = mlr_gradient(&weights, data)?;
        let hess = mlr_hessian(&weights, data)?;
        let grad_s = DVector::from_iterator(k, support.iter().map(|&f| grad[f]));
        let hess_s = DMatrix::from_fn(k, k, |r, c| hess[(support[r], support[c])]);
        let ridge = RIDGE_SCALE * hess_s.trace() / k as f64;
        let (chol, _) = ridged_cholesky(&hess_s, ridge)?;
        let delta = chol.solve(&grad_s);

        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let mut stepped = flat.clone();
            for (idx, &f) in support.iter().enumerate() {
                stepped[f] -= scale * delta[idx];
            }
            let candidate = WeightMatrix::from_flat(&stepped, m, d)?;
            let candidate_obj = mlr_objective(&candidate, data)?;
            if candidate_obj <= prev {
                flat = stepped;
                weights = candidate;
                improved = candidate_obj < prev - 1e-14 * (1.0 + prev.abs());
                let done = (candidate_obj - prev).abs() <= 1e-12 * prev.abs();
                prev = candidate_obj;
                if done {
                    improved = false;
                }
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((weights, prev))
}

/// Enumerates every support of size `<= beta` and solves the restricted
/// problem on each, returning the best. Exhaustive, so it lower-bounds any
/// solver that respects the cardinality constraint; guarded to
/// `d*m <= 12`, `beta <= 4`.
pub fn l0_brute_force(data: &Dataset, beta: usize, config: &FitConfig) -> Result<L0Oracle> {
    let dm = data.d() * data.m();
    if dm > BRUTE_FORCE_DM_LIMIT {
        return Err(Error::SizeGuard {
            what: "support enumeration",
            quantity: "d*m",
            limit: BRUTE_FORCE_DM_LIMIT,
            actual: dm,
        });
    }
    if beta > BRUTE_FORCE_BETA_LIMIT && beta != dm {
        return Err(Error::SizeGuard {
            what: "support enumeration",
            quantity: "beta",
            limit: BRUTE_FORCE_BETA_LIMIT,
            actual: beta,
        });
    }

    let mut best: Option<L0Oracle> = None;
    for mask in 0u32..(1u32 << dm) {
        if (mask.count_ones() as usize) > beta {
            continue;
        }
        let support: Vec<usize> = (0..dm).filter(|&f| mask & (1 << f) != 0).collect();
        let (weights, objective) = restricted_newton(data, &support, config)?;
        let better = match &best {
            None => true,
            Some(b) => objective < b.objective,
        };
        if better {
            best = Some(L0Oracle {
                support,
                objective,
                weights,
            });
        }
    }
    Ok(best.expect("mask 0 always evaluated"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piano::piano_fit_l0;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, n: usize, d: usize, m: usize) -> (Dataset, WeightMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features = Array2::from_shape_simple_fn((n, d), || rng.random::<f64>() * 2.0 - 1.0);
        let classes: Vec<usize> = (0..n)
            .map(|j| if j < m { j } else { rng.random_range(0..m) })
            .collect();
        let names = (0..m).map(|i| i.to_string()).collect();
        let data = Dataset::from_class_indices(features, &classes, names).unwrap();
        let w = WeightMatrix::random_uniform(m, d, &mut rng);
        (data, w)
    }

    /// Pairs every feature vector with both class labels so the gradient at
    /// zero weights vanishes exactly.
    fn stationary_at_zero(seed: u64, half_n: usize, d: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Array2::zeros((2 * half_n, d));
        let mut classes = Vec::new();
        for j in 0..half_n {
            let row: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            for (copy, class) in [(2 * j, 0), (2 * j + 1, 1)] {
                for l in 0..d {
                    features[(copy, l)] = row[l];
                }
                classes.push(class);
            }
        }
        Dataset::from_class_indices(features, &classes, vec!["0".into(), "1".into()]).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-0.8, 0.5), -0.8 + 0.5);
        assert_eq!(soft_threshold(0.8, 0.5), 0.8 - 0.5);
        assert_eq!(soft_threshold(0.0, 0.0), 0.0);
    }

    #[test]
    fn soft_threshold_magnitude_and_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let a = rng.random::<f64>() * 4.0 - 2.0;
            let b = rng.random::<f64>();
            let s = soft_threshold(a, b);
            assert_relative_eq!(s.abs(), (a.abs() - b).max(0.0), epsilon = 1e-15);
            if s != 0.0 {
                assert_eq!(s > 0.0, a > 0.0);
            }
        }
    }

    #[test]
    fn irls_zero_step_at_stationary_point() {
        let data = stationary_at_zero(5, 10, 3);
        let w0 = WeightMatrix::zeros(2, 3);
        let g = mlr_gradient(&w0, &data).unwrap();
        assert!(g.iter().all(|&v| v.abs() < 1e-12));
        let result = irls_fit(&data, &w0, &FitConfig::default()).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations(), 1);
        assert!(result.weights.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn irls_reruns_agree_across_starts() {
        let (data, w_a) = random_instance(21, 100, 10, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        let w_b = WeightMatrix::random_uniform(3, 10, &mut rng);
        let config = FitConfig {
            rel_tol: 1e-10,
            max_outer_iters: 300,
            ..FitConfig::default()
        };
        let a = irls_fit(&data, &w_a, &config).unwrap();
        let b = irls_fit(&data, &w_b, &config).unwrap();
        assert!(a.converged && b.converged);
        let rel = (a.final_objective() - b.final_objective()).abs()
            / a.final_objective().abs();
        assert!(rel < 1e-6, "rel diff {rel}");
    }

    #[test]
    fn bohning_fixed_point_at_zero_gradient() {
        let data = stationary_at_zero(6, 8, 3);
        let w0 = WeightMatrix::zeros(2, 3);
        let result = bohning_mm_fit(&data, &w0, &FitConfig::default()).unwrap();
        assert!(result.converged);
        assert!(result.weights.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bohning_descends_monotonically() {
        let (data, w0) = random_instance(22, 40, 5, 3);
        let config = FitConfig {
            max_outer_iters: 60,
            rel_tol: 1e-9,
            ..FitConfig::default()
        };
        let result = bohning_mm_fit(&data, &w0, &config).unwrap();
        for pair in result.trace.windows(2) {
            assert!(
                pair[1].objective <= pair[0].objective + 1e-10 * (1.0 + pair[0].objective.abs())
            );
        }
    }

    #[test]
    fn bohning_and_irls_reach_same_objective() {
        let (data, w0) = random_instance(23, 80, 6, 3);
        let config = FitConfig {
            rel_tol: 1e-9,
            max_outer_iters: 3000,
            ..FitConfig::default()
        };
        let newton = irls_fit(&data, &w0, &config).unwrap();
        let bound = bohning_mm_fit(&data, &w0, &config).unwrap();
        let rel = (newton.final_objective() - bound.final_objective()).abs()
            / newton.final_objective().abs();
        assert!(rel < 1e-3, "rel diff {rel}");
    }

    #[test]
    fn bound_majorizes_objective_quadratically() {
        let (data, w_k) = random_instance(24, 15, 4, 3);
        let bound = BohningBound::new(&data).unwrap();
        let obj_k = mlr_objective(&w_k, &data).unwrap();
        let grad = mlr_gradient(&w_k, &data).unwrap();
        let dm = grad.len();
        let grad = DVector::from_iterator(dm, grad.iter().copied());
        let mut rng = ChaCha8Rng::seed_from_u64(600);
        for _ in 0..40 {
            let w = WeightMatrix::from_array(Array2::from_shape_simple_fn(
                (data.m(), data.d()),
                || rng.random::<f64>() * 4.0 - 2.0,
            ))
            .unwrap();
            let delta_vec: Vec<f64> = w
                .flatten()
                .iter()
                .zip(w_k.flatten().iter())
                .map(|(a, b)| a - b)
                .collect();
            let delta = DVector::from_vec(delta_vec);
            let model = bound.quadratic_model(obj_k, &grad, &delta);
            let actual = mlr_objective(&w, &data).unwrap();
            assert!(
                model >= actual - 1e-8 * (1.0 + actual.abs()),
                "model {model} < objective {actual}"
            );
        }
    }

    #[test]
    fn coord_with_zero_lambda_matches_bohning() {
        let (data, w0) = random_instance(25, 60, 5, 2);
        let config = FitConfig {
            rel_tol: 1e-9,
            max_outer_iters: 4000,
            ..FitConfig::default()
        };
        let coord = coord_mm_l1_fit(&data, &w0, &config).unwrap();
        let bound = bohning_mm_fit(&data, &w0, &config).unwrap();
        let rel = (coord.final_objective() - bound.final_objective()).abs()
            / bound.final_objective().abs();
        assert!(rel < 1e-3, "rel diff {rel}");
    }

    #[test]
    fn coord_l1_produces_exact_zeros_and_descends() {
        let (data, w0) = random_instance(26, 30, 8, 2);
        let config = FitConfig {
            regularization: Regularization::L1 { lambda: 1.5 },
            rel_tol: 1e-8,
            max_outer_iters: 2000,
            ..FitConfig::default()
        };
        let result = coord_mm_l1_fit(&data, &w0, &config).unwrap();
        for pair in result.trace.windows(2) {
            assert!(
                pair[1].objective <= pair[0].objective + 1e-9 * (1.0 + pair[0].objective.abs())
            );
        }
        assert!(result.weights.nnz() < result.weights.len());
    }

    #[test]
    fn coord_rejects_l0_config() {
        let (data, w0) = random_instance(27, 10, 2, 2);
        let config = FitConfig {
            regularization: Regularization::L0 { beta: 2 },
            ..FitConfig::default()
        };
        assert!(coord_mm_l1_fit(&data, &w0, &config).is_err());
    }

    #[test]
    fn guards_reject_oversized_problems() {
        let n = 2;
        let d = 2501;
        let features = Array2::zeros((n, d));
        let data = Dataset::from_class_indices(features, &[0, 1], vec!["0".into(), "1".into()])
            .unwrap();
        let w = WeightMatrix::zeros(2, d);
        assert!(matches!(
            irls_fit(&data, &w, &FitConfig::default()),
            Err(Error::SizeGuard { .. })
        ));
        assert!(matches!(
            bohning_mm_fit(&data, &w, &FitConfig::default()),
            Err(Error::SizeGuard { .. })
        ));
        let (small, _) = random_instance(1, 8, 7, 2);
        assert!(matches!(
            l0_brute_force(&small, 2, &FitConfig::default()),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn brute_force_empty_support_is_uniform_objective() {
        let (data, _) = random_instance(28, 8, 3, 2);
        let oracle = l0_brute_force(&data, 0, &FitConfig::default()).unwrap();
        assert!(oracle.support.is_empty());
        assert_relative_eq!(
            oracle.objective,
            8.0 * 2f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn brute_force_full_support_matches_newton() {
        let (data, _) = random_instance(29, 12, 3, 2);
        let dm = 6;
        let config = FitConfig {
            rel_tol: 1e-10,
            max_outer_iters: 200,
            ..FitConfig::default()
        };
        let oracle = l0_brute_force(&data, dm, &config).unwrap();
        let newton = irls_fit(&data, &WeightMatrix::zeros(2, 3), &config).unwrap();
        let rel =
            (oracle.objective - newton.final_objective()).abs() / newton.final_objective().abs();
        assert!(rel < 1e-6, "rel diff {rel}");
    }

    #[test]
    fn brute_force_lower_bounds_hard_threshold_solver() {
        let (data, w0) = random_instance(30, 8, 3, 2);
        let beta = 2;
        let config = FitConfig {
            regularization: Regularization::L0 { beta },
            rel_tol: 1e-8,
            max_outer_iters: 2000,
            ..FitConfig::default()
        };
        let fit = piano_fit_l0(&data, &w0, &config).unwrap();
        let oracle = l0_brute_force(&data, beta, &config).unwrap();
        assert!(
            fit.final_objective() >= oracle.objective - 1e-9 * (1.0 + oracle.objective.abs()),
            "oracle {} above solver {}",
            oracle.objective,
            fit.final_objective()
        );
    }
}
