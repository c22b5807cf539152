//! Dense BFGS and the quasi-Newton loop it shares with L-BFGS.

use super::line_search::{line_search_wolfe, LineSearchError, LineSearchParams};
use super::{dot, inf_norm, initial_step, Budgeted, GradientConfig, Halt};

/// Curvature pairs with yᵀs at or below this are skipped.
pub(super) const CURVATURE_FLOOR: f64 = 1e-10;

/// Inverse-Hessian model driven by the quasi-Newton loop.
pub(super) trait InverseHessian {
    /// H·g
    fn apply(&self, g: &[f64]) -> Vec<f64>;
    /// Incorporates a pair with yᵀs > [`CURVATURE_FLOOR`].
    fn update(&mut self, s: &[f64], y: &[f64]);
    /// Back to the identity.
    fn reset(&mut self);
    fn is_identity(&self) -> bool;
}

struct Dense {
    n: usize,
    h: Vec<f64>,
    fresh: bool,
}

impl Dense {
    fn new(n: usize) -> Self {
        let mut d = Self {
            n,
            h: Vec::new(),
            fresh: true,
        };
        d.reset();
        d
    }
}

impl InverseHessian for Dense {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.h[i * self.n..(i + 1) * self.n], g))
            .collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let n = self.n;
        let sy = dot(s, y);
        if self.fresh {
            // Scale the identity by yᵀs / yᵀy before the first update.
            let gamma = sy / dot(y, y);
            self.h.iter_mut().for_each(|v| *v *= gamma);
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        // H ← H − ρ(Hy sᵀ + s yᵀH) + (ρ² yᵀHy + ρ) s sᵀ, H symmetric.
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }

    fn reset(&mut self) {
        let n = self.n;
        self.h = vec![0.0; n * n];
        for i in 0..n {
            self.h[i * n + i] = 1.0;
        }
        self.fresh = true;
    }

    fn is_identity(&self) -> bool {
        self.fresh
    }
}

pub(super) fn run(session: &mut Budgeted<'_>, theta0: &[f64], cfg: &GradientConfig) -> Result<(), Halt> {
    quasi_newton(session, theta0, cfg, &mut Dense::new(theta0.len()))
}

pub(super) fn quasi_newton(
    session: &mut Budgeted<'_>,
    theta0: &[f64],
    cfg: &GradientConfig,
    model: &mut dyn InverseHessian,
) -> Result<(), Halt> {
    let params = LineSearchParams {
        c1: cfg.c1,
        c2: cfg.c2_quasi_newton,
        max_trials: cfg.max_line_trials,
    };
    let mut x = theta0.to_vec();
    let mut f = session.cost(&x)?;
    let mut g = session.gradient(&x)?;
    let mut previous_f = f + g.iter().map(|v| v * v).sum::<f64>().sqrt() / 2.0;
    loop {
        if inf_norm(&g) < cfg.gtol {
            return Ok(());
        }
        let mut d: Vec<f64> = model.apply(&g).iter().map(|v| -v).collect();
        if dot(&g, &d) >= 0.0 {
            model.reset();
            d = g.iter().map(|v| -v).collect();
        }
        // A scaled model already estimates the step length.
        let alpha0 = if model.is_identity() {
            initial_step(f, previous_f, dot(&g, &d))
        } else {
            1.0
        };
        let step = match line_search_wolfe(session, &x, f, &g, &d, alpha0, &params) {
            Ok(step) => step,
            Err(LineSearchError::Halted(h)) => return Err(h),
            Err(e) if model.is_identity() => return Err(Halt::Failure(e.to_string())),
            Err(_) => {
                model.reset();
                continue;
            }
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        previous_f = f;
        (x, f, g) = (step.x, step.f, step.g);
        if dot(&s, &y) > CURVATURE_FLOOR {
            model.update(&s, &y);
        }
    }
}
