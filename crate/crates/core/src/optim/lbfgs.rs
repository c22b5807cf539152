//! Limited-memory BFGS (two-loop recursion).
//!
//! The initial scaling γ = yᵀs / yᵀy is fixed from the first stored pair,
//! so while fewer than `memory` pairs exist the iterates coincide with
//! dense BFGS.

use std::collections::VecDeque;

use super::bfgs::{quasi_newton, InverseHessian};
use super::{dot, Budgeted, GradientConfig, Halt};

struct Limited {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    gamma: Option<f64>,
}

impl InverseHessian for Limited {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = self.gamma.unwrap_or(1.0);
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let sy = dot(s, y);
        self.gamma.get_or_insert(sy / dot(y, y));
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s.to_vec(), y.to_vec(), 1.0 / sy));
    }

    fn reset(&mut self) {
        self.pairs.clear();
        self.gamma = None;
    }

    fn is_identity(&self) -> bool {
        self.gamma.is_none()
    }
}

pub(super) fn run(session: &mut Budgeted<'_>, theta0: &[f64], cfg: &GradientConfig) -> Result<(), Halt> {
    let mut model = Limited {
        memory: cfg.lbfgs_memory.max(1),
        pairs: VecDeque::new(),
        gamma: None,
    };
    quasi_newton(session, theta0, cfg, &mut model)
}
