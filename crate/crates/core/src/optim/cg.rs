//! Nonlinear conjugate gradient, Polak-Ribière with non-negative β.

use super::line_search::{line_search_wolfe, LineSearchError, LineSearchParams};
use super::{dot, inf_norm, initial_step, Budgeted, GradientConfig, Halt};

pub(super) fn run(session: &mut Budgeted<'_>, theta0: &[f64], cfg: &GradientConfig) -> Result<(), Halt> {
    let params = LineSearchParams {
        c1: cfg.c1,
        c2: cfg.c2_cg,
        max_trials: cfg.max_line_trials,
    };
    let mut x = theta0.to_vec();
    let mut f = session.cost(&x)?;
    let mut g = session.gradient(&x)?;
    let mut previous_f = f + g.iter().map(|v| v * v).sum::<f64>().sqrt() / 2.0;
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut restarted = true;
    loop {
        if inf_norm(&g) < cfg.gtol {
            return Ok(());
        }
        if dot(&g, &d) >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            restarted = true;
        }
        let alpha0 = initial_step(f, previous_f, dot(&g, &d));
        let step = match line_search_wolfe(session, &x, f, &g, &d, alpha0, &params) {
            Ok(step) => step,
            Err(LineSearchError::Halted(h)) => return Err(h),
            Err(e) if restarted => return Err(Halt::Failure(e.to_string())),
            Err(_) => {
                d = g.iter().map(|v| -v).collect();
                restarted = true;
                continue;
            }
        };
        let beta = (dot(&step.g, &step.g) - dot(&step.g, &g)) / dot(&g, &g);
        let beta = beta.max(0.0);
        d = step.g.iter().zip(&d).map(|(gi, di)| -gi + beta * di).collect();
        restarted = false;
        previous_f = f;
        (x, f, g) = (step.x, step.f, step.g);
    }
}
