//! The generic one-dimensional subproblem
//! `f(w) = -w v + sum_j r_j exp(x_j w) (+ lambda |w|)` and its parameter-free
//! bracket-and-bisect minimizer.
//!
//! Coefficients `r_j > 0` arise as exponentials of score differences and can
//! overflow on their own, so they are stored and combined in log space: each
//! gradient term is evaluated as `sign(x_j) * exp(log r_j + log|x_j| + x_j w)`.

use crate::error::{Error, Result};

/// One exponential term `exp(log_coeff) * exp(slope * w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub log_coeff: f64,
    pub slope: f64,
}

/// A scalar objective `-w v + sum_j exp(log_coeff_j + slope_j w) + lambda |w|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpSum {
    v: f64,
    terms: Vec<ExpTerm>,
    // log_coeff + ln|slope| per nonzero-slope term, so each gradient
    // evaluation costs one exp per term instead of exp + ln
    grad_terms: Vec<ExpTerm>,
    lambda: f64,
}

impl ScalarExpSum {
    /// Builds an unregularized problem. Every `log_coeff`/`slope` must be
    /// finite, and a problem with no exponential terms must have `v = 0`
    /// (otherwise it is unbounded below).
    pub fn new(v: f64, terms: Vec<ExpTerm>) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidData(format!("linear coefficient v={v}")));
        }
        if terms.is_empty() && v != 0.0 {
            return Err(Error::InvalidData(
                "scalar problem with no exponential terms must have v = 0".into(),
            ));
        }
        for (j, t) in terms.iter().enumerate() {
            if !t.log_coeff.is_finite() || !t.slope.is_finite() {
                return Err(Error::InvalidData(format!(
                    "term {j} has non-finite log_coeff={} or slope={}",
                    t.log_coeff, t.slope
                )));
            }
        }
        let grad_terms = terms
            .iter()
            .filter(|t| t.slope != 0.0)
            .map(|t| ExpTerm {
                log_coeff: t.log_coeff + t.slope.abs().ln(),
                slope: t.slope,
            })
            .collect();
        Ok(Self {
            v,
            terms,
            grad_terms,
            lambda: 0.0,
        })
    }

    /// Attaches an l1 weight (`lambda >= 0`).
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidData(format!("lambda must be >= 0, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Knobs for the bracket-and-bisect solver.
#[derive(Debug, Clone, Copy)]
pub struct BisectionSettings {
    /// Bisection stops once the bracket is narrower than this.
    pub tol: f64,
    /// Geometric expansion factor for the initial bracket endpoint.
    pub growth: f64,
    /// Search bound; problems whose gradient never changes sign inside
    /// `|w| <= w_max` are reported as [`BracketResult::NoRoot`].
    pub w_max: f64,
}

impl Default for BisectionSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            growth: 2.0,
            w_max: 1e3,
        }
    }
}

/// Outcome of the bracket search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BracketResult {
    /// The gradient changes sign (or vanishes) between `a = 0` and `b`.
    Bracket { a: f64, b: f64 },
    /// No sign change within `|w| <= w_max`; the objective decreases all the
    /// way to `clamp` (`+w_max` or `-w_max`).
    NoRoot { clamp: f64 },
}

/// Gradient of the smooth part: `-v + sum_j slope_j exp(log_coeff_j + slope_j w)`.
///
/// Exponents beyond the representable range saturate to `0` or `+inf`; at any
/// fixed `w` every saturating term has the same slope sign, so the sum never
/// produces NaN.
pub fn scalar_grad(p: &ScalarExpSum, w: f64) -> f64 {
    let mut acc = -p.v;
    for t in &p.grad_terms {
        let magnitude = (t.log_coeff + t.slope * w).exp();
        acc += if t.slope > 0.0 { magnitude } else { -magnitude };
    }
    acc
}

/// Objective value `-w v + sum_j exp(log_coeff_j + slope_j w) + lambda |w|`.
pub fn scalar_objective(p: &ScalarExpSum, w: f64) -> f64 {
    let mut acc = -w * p.v + p.lambda * w.abs();
    for t in &p.terms {
        acc += (t.log_coeff + t.slope * w).exp();
    }
    acc
}

fn bracket_root_of(grad: impl Fn(f64) -> f64, settings: &BisectionSettings) -> BracketResult {
    let g0 = grad(0.0);
    if g0 == 0.0 {
        return BracketResult::Bracket { a: 0.0, b: 0.0 };
    }
    let direction = if g0 > 0.0 { -1.0 } else { 1.0 };
    let mut magnitude: f64 = 1.0;
    loop {
        let clamped = magnitude >= settings.w_max;
        let b = direction * magnitude.min(settings.w_max);
        let gb = grad(b);
        if gb == 0.0 || (gb > 0.0) != (g0 > 0.0) {
            return BracketResult::Bracket { a: 0.0, b };
        }
        if clamped {
            return BracketResult::NoRoot {
                clamp: direction * settings.w_max,
            };
        }
        magnitude *= settings.growth;
    }
}

fn bisect_of(grad: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(a);
    }
    let ga = grad(a);
    let gb = grad(b);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if (ga > 0.0) == (gb > 0.0) {
        return Err(Error::NoSignChange { a, b });
    }
    let (mut lo, mut hi) = (a, b);
    let mut g_lo = ga;
    while (hi - lo).abs() >= tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = grad(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn solve_smooth_of(grad: impl Fn(f64) -> f64, settings: &BisectionSettings) -> Result<f64> {
    match bracket_root_of(&grad, settings) {
        BracketResult::Bracket { a, b } => bisect_of(&grad, a, b, settings.tol),
        BracketResult::NoRoot { clamp } => Ok(clamp),
    }
}

/// Finds an initial bisection bracket for the smooth gradient.
///
/// The gradient is nondecreasing, so its sign at the origin picks the search
/// direction: a positive gradient at 0 means the root (if any) is negative,
/// and vice versa. The far endpoint starts at magnitude 1 and grows
/// geometrically, clamped at `w_max` for a final check before giving up.
pub fn bracket_root(p: &ScalarExpSum, settings: &BisectionSettings) -> BracketResult {
    bracket_root_of(|w| scalar_grad(p, w), settings)
}

/// Bisection on the smooth gradient over `[a, b]`.
///
/// Requires a sign change (or a zero endpoint, or `a == b`); terminates when
/// the bracket is narrower than `tol`, so the iteration count is a fixed
/// function of the initial width.
pub fn bisect(p: &ScalarExpSum, a: f64, b: f64, tol: f64) -> Result<f64> {
    bisect_of(|w| scalar_grad(p, w), a, b, tol)
}

/// Minimizes the smooth problem (`lambda` ignored): bracket, bisect, and
/// clamp to `+-w_max` when the infimum is at infinity.
pub fn solve_scalar_smooth(p: &ScalarExpSum, settings: &BisectionSettings) -> Result<f64> {
    solve_smooth_of(|w| scalar_grad(p, w), settings)
}

/// Minimizes the l1-regularized problem (`lambda > 0` required).
///
/// With `h(w)` the smooth gradient scaled by `1/lambda`, the subgradient
/// optimality condition splits into three cases: `|h(0)| <= 1` pins the
/// minimizer at exactly 0; `h(0) > 1` fixes the subgradient at -1 and roots
/// `h(w) - 1` on the negative axis; `h(0) < -1` fixes it at +1 and roots
/// `h(w) + 1` on the positive axis. Folding the chosen subgradient into the
/// linear coefficient turns both root problems back into the smooth case.
pub fn solve_scalar_l1(p: &ScalarExpSum, settings: &BisectionSettings) -> Result<f64> {
    let lambda = p.lambda;
    if lambda <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "solve_scalar_l1 requires lambda > 0, got {lambda}"
        )));
    }
    let smooth_at_zero = scalar_grad(p, 0.0);
    if smooth_at_zero.abs() <= lambda {
        return Ok(0.0);
    }
    let shift = if smooth_at_zero > lambda {
        lambda
    } else {
        -lambda
    };
    solve_smooth_of(|w| scalar_grad(p, w) - shift, settings)
}
