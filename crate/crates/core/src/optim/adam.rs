//! ADAM and AMSGrad with bias-corrected learning rate.

use super::{Budgeted, Halt};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Element-wise running maximum of `v`; only used by AMSGrad.
    pub v_max: Vec<f64>,
    pub t: u32,
    pub amsgrad: bool,
}

impl AdamState {
    pub fn new(param_count: usize, amsgrad: bool) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            v_max: vec![0.0; param_count],
            t: 0,
            amsgrad,
        }
    }

    /// One update θ ← θ − lr_t·m / (√v̂ + ε) with
    /// lr_t = lr·√(1 − β2^t) / (1 − β1^t).
    pub fn step(&mut self, cfg: &AdamConfig, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let t = self.t as i32;
        let lr_t = cfg.lr * (1.0 - cfg.beta2.powi(t)).sqrt() / (1.0 - cfg.beta1.powi(t));
        for i in 0..theta.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grad[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let v_hat = if self.amsgrad {
                self.v_max[i] = self.v_max[i].max(self.v[i]);
                self.v_max[i]
            } else {
                self.v[i]
            };
            theta[i] -= lr_t * self.m[i] / (v_hat.sqrt() + cfg.eps);
        }
    }
}

pub(super) fn run(session: &mut Budgeted<'_>, theta0: &[f64], cfg: &AdamConfig, amsgrad: bool) -> Result<(), Halt> {
    let mut theta = theta0.to_vec();
    let mut state = AdamState::new(theta.len(), amsgrad);
    loop {
        session.cost(&theta)?;
        let g = session.gradient(&theta)?;
        state.step(cfg, &mut theta, &g);
    }
}
