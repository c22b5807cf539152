//! Downhill simplex.

use super::{Budgeted, Halt};

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
    /// Converged when max f − min f over the simplex is below this.
    pub fatol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
            fatol: 1e-8,
        }
    }
}

fn toward(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

pub(super) fn run(session: &mut Budgeted<'_>, theta0: &[f64], cfg: &NelderMeadConfig) -> Result<(), Halt> {
    let p = theta0.len();
    let mut sim: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p + 1);
    let f0 = session.cost(theta0)?;
    sim.push((theta0.to_vec(), f0));
    for k in 0..p {
        let mut x = theta0.to_vec();
        x[k] += cfg.initial_step;
        let f = session.cost(&x)?;
        sim.push((x, f));
    }

    loop {
        sim.sort_by(|a, b| a.1.total_cmp(&b.1));
        if sim[p].1 - sim[0].1 < cfg.fatol {
            return Ok(());
        }
        let mut centroid = vec![0.0; p];
        for (x, _) in &sim[..p] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / p as f64;
            }
        }
        let worst = sim[p].0.clone();
        let xr = toward(&centroid, &worst, -cfg.reflection);
        let fr = session.cost(&xr)?;

        if fr < sim[0].1 {
            let xe = toward(&centroid, &worst, -cfg.reflection * cfg.expansion);
            let fe = session.cost(&xe)?;
            sim[p] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < sim[p - 1].1 {
            sim[p] = (xr, fr);
            continue;
        }
        if fr < sim[p].1 {
            let xc = toward(&centroid, &xr, cfg.contraction);
            let fc = session.cost(&xc)?;
            if fc <= fr {
                sim[p] = (xc, fc);
                continue;
            }
        } else {
            let xcc = toward(&centroid, &worst, cfg.contraction);
            let fcc = session.cost(&xcc)?;
            if fcc < sim[p].1 {
                sim[p] = (xcc, fcc);
                continue;
            }
        }
        let best = sim[0].0.clone();
        for vertex in sim.iter_mut().skip(1) {
            let x = toward(&best, &vertex.0, cfg.shrink);
            let f = session.cost(&x)?;
            *vertex = (x, f);
        }
    }
}
