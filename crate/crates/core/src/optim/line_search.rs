//! Strong-Wolfe line search: bracketing phase followed by zoom with
//! safeguarded quadratic interpolation.

use thiserror::Error;

use super::{axpy, dot, Budgeted, Halt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub c1: f64,
    pub c2: f64,
    /// Maximum number of trial points (each costs one cost evaluation).
    pub max_trials: usize,
}

/// Accepted step with the data at the new point.
#[derive(Debug, Clone, PartialEq)]
pub struct LineStep {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    /// False when the trials ran out and the best sufficient-decrease point
    /// was returned instead.
    pub strong_wolfe: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineSearchError {
    #[error("search direction is not a descent direction (slope {0:.3e})")]
    NotDescent(f64),
    #[error("no acceptable step found")]
    NoProgress,
    #[error("run halted: {0:?}")]
    Halted(Halt),
}

impl From<Halt> for LineSearchError {
    fn from(h: Halt) -> Self {
        LineSearchError::Halted(h)
    }
}

struct Point {
    alpha: f64,
    f: f64,
    slope: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

/// Finds a step along `d` from `x` satisfying the strong Wolfe conditions
///
/// ```text
/// f(x + αd) ≤ f(x) + c1·α·gᵀd
/// |∇f(x + αd)ᵀd| ≤ c2·|gᵀd|
/// ```
///
/// starting from `alpha0`. Every trial costs one unit; the gradient at a
/// trial is requested only once it passes the sufficient-decrease test.
pub fn line_search_wolfe(
    session: &mut Budgeted<'_>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
    params: &LineSearchParams,
) -> Result<LineStep, LineSearchError> {
    let slope0 = dot(g0, d);
    if slope0.is_nan() || slope0 >= 0.0 {
        return Err(LineSearchError::NotDescent(slope0));
    }
    let armijo = |alpha: f64, f: f64| f <= f0 + params.c1 * alpha * slope0;
    let curvature = |slope: f64| slope.abs() <= -params.c2 * slope0;

    let mut trials = 0;
    let mut prev = Point {
        alpha: 0.0,
        f: f0,
        slope: slope0,
        x: x.to_vec(),
        g: g0.to_vec(),
    };
    let mut alpha = alpha0;

    // Bracketing phase. `zoom_from` holds (lo, hi_alpha, hi_f).
    let zoom_from: (Point, f64, f64) = loop {
        if trials == params.max_trials {
            return fallback(prev);
        }
        trials += 1;
        let xa = axpy(x, alpha, d);
        let fa = session.cost(&xa)?;
        if !armijo(alpha, fa) || (trials > 1 && fa >= prev.f) {
            break (prev, alpha, fa);
        }
        let ga = session.gradient(&xa)?;
        let slope = dot(&ga, d);
        let cur = Point {
            alpha,
            f: fa,
            slope,
            x: xa,
            g: ga,
        };
        if curvature(slope) {
            return Ok(accept(cur, true));
        }
        if slope >= 0.0 {
            let (hi_alpha, hi_f) = (prev.alpha, prev.f);
            break (cur, hi_alpha, hi_f);
        }
        prev = cur;
        alpha *= 2.0;
    };

    let (mut lo, mut hi_alpha, mut hi_f) = zoom_from;
    loop {
        if trials == params.max_trials {
            return fallback(lo);
        }
        trials += 1;
        let aj = interpolate(&lo, hi_alpha, hi_f);
        let xj = axpy(x, aj, d);
        let fj = session.cost(&xj)?;
        if !armijo(aj, fj) || fj >= lo.f {
            hi_alpha = aj;
            hi_f = fj;
            continue;
        }
        let gj = session.gradient(&xj)?;
        let slope = dot(&gj, d);
        let cur = Point {
            alpha: aj,
            f: fj,
            slope,
            x: xj,
            g: gj,
        };
        if curvature(slope) {
            return Ok(accept(cur, true));
        }
        if slope * (hi_alpha - lo.alpha) >= 0.0 {
            hi_alpha = lo.alpha;
            hi_f = lo.f;
        }
        lo = cur;
    }
}

fn accept(p: Point, strong_wolfe: bool) -> LineStep {
    LineStep {
        alpha: p.alpha,
        x: p.x,
        f: p.f,
        g: p.g,
        strong_wolfe,
    }
}

fn fallback(lo: Point) -> Result<LineStep, LineSearchError> {
    if lo.alpha > 0.0 {
        Ok(accept(lo, false))
    } else {
        Err(LineSearchError::NoProgress)
    }
}

/// Minimizer of the quadratic through (lo, f_lo, f'_lo) and (hi, f_hi),
/// kept at least 10% of the interval away from both ends.
fn interpolate(lo: &Point, hi_alpha: f64, hi_f: f64) -> f64 {
    let delta = hi_alpha - lo.alpha;
    let denom = 2.0 * (hi_f - lo.f - lo.slope * delta);
    let candidate = lo.alpha - lo.slope * delta * delta / denom;
    let (a, b) = if lo.alpha < hi_alpha {
        (lo.alpha, hi_alpha)
    } else {
        (hi_alpha, lo.alpha)
    };
    let margin = 0.1 * (b - a);
    if candidate.is_finite() && candidate >= a + margin && candidate <= b - margin {
        candidate
    } else {
        0.5 * (a + b)
    }
}
