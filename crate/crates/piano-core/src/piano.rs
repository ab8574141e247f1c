//! The element-parallel majorization-minimization outer loops: a plain
//! maximum-likelihood variant, an l1-penalized variant, and a hard-threshold
//! variant for the cardinality-constrained problem.
//!
//! Every outer iteration builds one surrogate context from the current
//! iterate and then solves the `d * m` scalar subproblems independently
//! (Jacobi style: all elements read the same snapshot, none observes another
//! element's new value). Per-element work reduces over samples in a fixed
//! order, so results are bit-identical for any thread count.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::{FitConfig, FitResult, L0Ranking, Regularization, TraceRecord};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{mlr_objective, penalized_objective};
use crate::scalar::{
    scalar_objective, solve_scalar_l1, solve_scalar_smooth, BisectionSettings,
};
use crate::surrogate::{build_context, element_subproblem, ClassMoments, SurrogateContext};
use crate::weights::WeightMatrix;

fn settings_from(config: &FitConfig) -> BisectionSettings {
    BisectionSettings {
        tol: config.bisection_tol,
        growth: config.bracket_growth,
        w_max: config.weight_cap,
    }
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

fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Solves one element's subproblem; a constant surrogate (empty term list)
/// keeps the incumbent in the smooth case, while the l1 term pins it at 0.
fn solve_element(
    ctx: &SurrogateContext<'_>,
    w_k: &WeightMatrix,
    data: &Dataset,
    flat: usize,
    lambda: f64,
    settings: &BisectionSettings,
) -> Result<f64> {
    let d = data.d();
    let (class, feature) = (flat / d, flat % d);
    let problem = element_subproblem(ctx, w_k, data, class, feature)?;
    if lambda > 0.0 {
        return solve_scalar_l1(&problem.with_lambda(lambda)?, settings);
    }
    if problem.terms().is_empty() {
        return Ok(w_k.get(class, feature));
    }
    solve_scalar_smooth(&problem, settings)
}

// Keep parallel tasks coarse: tiny per-element solves make rayon's split
// bookkeeping dominate otherwise.
fn chunk_len(dm: usize) -> usize {
    (dm / (4 * rayon::current_num_threads())).max(8)
}

fn iterate_kernel(
    w_k: &WeightMatrix,
    data: &Dataset,
    ctx: &SurrogateContext<'_>,
    lambda: f64,
    settings: &BisectionSettings,
) -> Result<WeightMatrix> {
    let dm = data.d() * data.m();
    let solved: Vec<Result<f64>> = (0..dm)
        .into_par_iter()
        .with_min_len(chunk_len(dm))
        .map(|f| solve_element(ctx, w_k, data, f, lambda, settings))
        .collect();
    let flat = solved.into_iter().collect::<Result<Vec<_>>>()?;
    WeightMatrix::from_flat(&flat, data.m(), data.d())
}

struct ElementSolve {
    minimizer: f64,
    value_at_min: f64,
    value_at_zero: f64,
}

/// Unconstrained per-element solves followed by the hard-threshold step:
/// rank elements, keep `beta` of them, zero the rest. Ties break toward the
/// lower flat (class-major) index.
fn l0_step(
    w_k: &WeightMatrix,
    data: &Dataset,
    ctx: &SurrogateContext<'_>,
    beta: usize,
    ranking: L0Ranking,
    settings: &BisectionSettings,
) -> Result<WeightMatrix> {
    let d = data.d();
    let dm = d * data.m();
    let solved: Vec<Result<ElementSolve>> = (0..dm)
        .into_par_iter()
        .with_min_len(chunk_len(dm))
        .map(|f| -> Result<ElementSolve> {
            let (class, feature) = (f / d, f % d);
            let problem = element_subproblem(ctx, w_k, data, class, feature)?;
            let minimizer = if problem.terms().is_empty() {
                w_k.get(class, feature)
            } else {
                solve_scalar_smooth(&problem, settings)?
            };
            Ok(ElementSolve {
                minimizer,
                value_at_min: scalar_objective(&problem, minimizer),
                value_at_zero: scalar_objective(&problem, 0.0),
            })
        })
        .collect();
    let solves = solved.into_iter().collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..dm).collect();
    match ranking {
        L0Ranking::Value => order.sort_by(|&a, &b| {
            solves[a]
                .value_at_min
                .total_cmp(&solves[b].value_at_min)
                .then(a.cmp(&b))
        }),
        L0Ranking::Gain => order.sort_by(|&a, &b| {
            let gain_a = solves[a].value_at_zero - solves[a].value_at_min;
            let gain_b = solves[b].value_at_zero - solves[b].value_at_min;
            gain_b.total_cmp(&gain_a).then(a.cmp(&b))
        }),
    }

    let mut flat = vec![0.0; dm];
    for &f in order.iter().take(beta) {
        flat[f] = solves[f].minimizer;
    }
    WeightMatrix::from_flat(&flat, data.m(), d)
}

/// One outer iteration: every element of the iterate is replaced by the
/// minimizer of its scalar subproblem, in parallel over the `config.threads`
/// pool. The l1 variant is selected by `config.regularization`; the
/// cardinality constraint is applied only by [`piano_fit_l0`]'s loop.
pub fn piano_iterate(
    w_k: &WeightMatrix,
    data: &Dataset,
    ctx: &SurrogateContext<'_>,
    config: &FitConfig,
) -> Result<WeightMatrix> {
    check_dims(w_k, data)?;
    config.validate(data.d() * data.m())?;
    let settings = settings_from(config);
    let lambda = config.regularization.lambda();
    let pool = build_pool(config.threads)?;
    pool.install(|| iterate_kernel(w_k, data, ctx, lambda, &settings))
}

enum Mode {
    Smooth,
    L1 { lambda: f64 },
    L0 { beta: usize, ranking: L0Ranking },
}

fn run_fit(data: &Dataset, w0: &WeightMatrix, config: &FitConfig, mode: Mode) -> Result<FitResult> {
    check_dims(w0, data)?;
    config.validate(data.d() * data.m())?;
    let settings = settings_from(config);
    let moments = ClassMoments::compute(data);
    let pool = build_pool(config.threads)?;
    let start = Instant::now();

    let objective = |w: &WeightMatrix| -> Result<f64> {
        match mode {
            Mode::L1 { .. } => penalized_objective(w, data, config),
            _ => mlr_objective(w, data),
        }
    };

    let mut weights = w0.clone();
    let mut prev = objective(&weights)?;
    if !prev.is_finite() {
        return Err(Error::NonFiniteObjective { iter: 0 });
    }
    let mut trace = vec![TraceRecord {
        iter: 0,
        objective: prev,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        nnz: weights.nnz(),
    }];
    let mut converged = false;

    pool.install(|| -> Result<()> {
        for iter in 1..=config.max_outer_iters {
            let ctx = build_context(&weights, data, &moments)?;
            weights = match mode {
                Mode::Smooth => iterate_kernel(&weights, data, &ctx, 0.0, &settings)?,
                Mode::L1 { lambda } => iterate_kernel(&weights, data, &ctx, lambda, &settings)?,
                Mode::L0 { beta, ranking } => {
                    l0_step(&weights, data, &ctx, beta, ranking, &settings)?
                }
            };
            let current = objective(&weights)?;
            if !current.is_finite() {
                return Err(Error::NonFiniteObjective { iter });
            }
            trace.push(TraceRecord {
                iter,
                objective: current,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                nnz: weights.nnz(),
            });
            if (current - prev).abs() <= config.rel_tol * prev.abs() {
                converged = true;
                break;
            }
            prev = current;
        }
        Ok(())
    })?;

    Ok(FitResult {
        weights,
        trace,
        converged,
    })
}

/// Plain maximum-likelihood fit (`regularization` must be `None`).
///
/// Loops context construction and element-parallel iterates until the
/// relative objective change drops below `rel_tol` or the iteration cap is
/// reached; the trace records every iterate including iteration 0.
pub fn piano_fit(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    match config.regularization {
        Regularization::None => run_fit(data, w0, config, Mode::Smooth),
        _ => Err(Error::InvalidConfig(
            "piano_fit requires regularization = none".into(),
        )),
    }
}

/// l1-penalized fit: per-element soft-decision solves, penalized objective
/// in the trace and stopping rule. Elements land on exact 0.0 whenever the
/// scaled smooth gradient at the origin is within the subgradient interval.
pub fn piano_fit_l1(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    match config.regularization {
        Regularization::L1 { lambda } => run_fit(data, w0, config, Mode::L1 { lambda }),
        _ => Err(Error::InvalidConfig(
            "piano_fit_l1 requires l1 regularization".into(),
        )),
    }
}

/// Cardinality-constrained fit: per iteration, every element is minimized
/// without the constraint, then the elements ranked first keep their
/// minimizers and the rest are zeroed, so `||w||_0 <= beta` holds after
/// every iteration. The trace and stopping rule use the plain objective (the
/// constraint term is constant once active).
pub fn piano_fit_l0(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    match config.regularization {
        Regularization::L0 { beta } => run_fit(
            data,
            w0,
            config,
            Mode::L0 {
                beta,
                ranking: config.l0_ranking,
            },
        ),
        _ => Err(Error::InvalidConfig(
            "piano_fit_l0 requires l0 regularization".into(),
        )),
    }
}

/// Dispatches on `config.regularization`.
pub fn fit(data: &Dataset, w0: &WeightMatrix, config: &FitConfig) -> Result<FitResult> {
    match config.regularization {
        Regularization::None => piano_fit(data, w0, config),
        Regularization::L1 { .. } => piano_fit_l1(data, w0, config),
        Regularization::L0 { .. } => piano_fit_l0(data, w0, config),
    }
}
