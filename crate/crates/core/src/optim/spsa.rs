//! Simultaneous perturbation stochastic approximation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Budgeted, Halt};

/// Gain sequences a_k = a / (A + k + 1)^α and c_k = c / (k + 1)^γ, with
/// A = budget × `stability_fraction`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub stability_fraction: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a: 0.2,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
            stability_fraction: 0.05,
        }
    }
}

pub(super) fn run(
    session: &mut Budgeted<'_>,
    theta0: &[f64],
    cfg: &SpsaConfig,
    budget: u64,
    seed: u64,
) -> Result<(), Halt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stability = budget as f64 * cfg.stability_fraction;
    let mut theta = theta0.to_vec();
    for k in 0.. {
        if !session.affords(2) {
            return Err(Halt::Budget);
        }
        let kf = k as f64;
        let ak = cfg.a / (stability + kf + 1.0).powf(cfg.alpha);
        let ck = cfg.c / (kf + 1.0).powf(cfg.gamma);
        let delta: Vec<f64> = (0..theta.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
        let diff = session.cost(&plus)? - session.cost(&minus)?;
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= ak * diff / (2.0 * ck * d);
        }
    }
    unreachable!()
}
