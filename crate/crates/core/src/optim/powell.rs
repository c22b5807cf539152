//! Powell's conjugate-direction method with Brent line minimization.

use super::{axpy, Budgeted, Halt};

#[derive(Debug, Clone, PartialEq)]
pub struct PowellConfig {
    /// Relative step tolerance of each line minimization.
    pub line_tol: f64,
    /// Cost evaluations allowed per line minimization, bracketing included.
    pub max_line_evals: usize,
    /// Converged when a full sweep lowers f by less than this, relatively.
    pub ftol: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        Self {
            line_tol: 1e-4,
            max_line_evals: 20,
            ftol: 1e-4,
        }
    }
}

const GOLDEN: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;
const GROW_LIMIT: f64 = 110.0;
const TINY: f64 = 1e-21;

/// f along one line, with an evaluation allowance and a record of the
/// lowest point seen.
struct Line<'s, 'a> {
    session: &'s mut Budgeted<'a>,
    x: &'s [f64],
    d: &'s [f64],
    evals_left: usize,
    best: (f64, f64),
}

impl Line<'_, '_> {
    /// None once the allowance is spent.
    fn eval(&mut self, t: f64) -> Result<Option<f64>, Halt> {
        if self.evals_left == 0 {
            return Ok(None);
        }
        self.evals_left -= 1;
        let f = self.session.cost(&axpy(self.x, t, self.d))?;
        if f < self.best.1 {
            self.best = (t, f);
        }
        Ok(Some(f))
    }
}

/// Minimizes along `d` from `x` (where f = `fx`); returns (t, f) of the
/// best point found, which is never worse than t = 0.
fn line_minimize(
    session: &mut Budgeted<'_>,
    x: &[f64],
    fx: f64,
    d: &[f64],
    cfg: &PowellConfig,
) -> Result<(f64, f64), Halt> {
    let mut line = Line {
        session,
        x,
        d,
        evals_left: cfg.max_line_evals,
        best: (0.0, fx),
    };
    if let Some((a, b, c, fb)) = bracket(&mut line, fx)? {
        brent(&mut line, (a, b, c), fb, cfg.line_tol)?;
    }
    Ok(line.best)
}

/// Downhill bracketing from t ∈ {0, 1} with parabolic extrapolation.
/// Returns a, b, c, f(b) with f(b) ≤ f(a), f(c), or None when the
/// allowance ran out first.
fn bracket(line: &mut Line<'_, '_>, fx: f64) -> Result<Option<(f64, f64, f64, f64)>, Halt> {
    let (mut xa, mut fa) = (0.0, fx);
    let (mut xb, mut fb) = match line.eval(1.0)? {
        Some(f) => (1.0, f),
        None => return Ok(None),
    };
    if fa < fb {
        std::mem::swap(&mut xa, &mut xb);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut xc = xb + GOLDEN * (xb - xa);
    let Some(mut fc) = line.eval(xc)? else { return Ok(None) };
    while fc < fb {
        let tmp1 = (xb - xa) * (fb - fc);
        let tmp2 = (xb - xa) * (fb - fa);
        let val = tmp2 - tmp1;
        let denom = 2.0 * if val.abs() < TINY { TINY } else { val };
        let mut w = xb - ((xb - xc) * tmp2 - (xb - xa) * tmp1) / denom;
        let wlim = xb + GROW_LIMIT * (xc - xb);
        let fw;
        if (w - xc) * (xb - w) > 0.0 {
            let Some(f) = line.eval(w)? else { return Ok(None) };
            if f < fc {
                return Ok(Some((xb, w, xc, f)));
            } else if f > fb {
                return Ok(Some((xa, xb, w, fb)));
            }
            w = xc + GOLDEN * (xc - xb);
            let Some(f) = line.eval(w)? else { return Ok(None) };
            fw = f;
        } else if (w - wlim) * (wlim - xc) >= 0.0 {
            w = wlim;
            let Some(f) = line.eval(w)? else { return Ok(None) };
            fw = f;
        } else if (w - wlim) * (xc - w) > 0.0 {
            let Some(f) = line.eval(w)? else { return Ok(None) };
            if f < fc {
                xb = xc;
                xc = w;
                w = xc + GOLDEN * (xc - xb);
                fb = fc;
                fc = f;
                let Some(f2) = line.eval(w)? else { return Ok(None) };
                fw = f2;
            } else {
                fw = f;
            }
        } else {
            w = xc + GOLDEN * (xc - xb);
            let Some(f) = line.eval(w)? else { return Ok(None) };
            fw = f;
        }
        (xa, xb, xc) = (xb, xc, w);
        (fa, fb, fc) = (fb, fc, fw);
    }
    Ok(Some((xa, xb, xc, fb)))
}

/// Brent's parabolic/golden-section minimization inside a bracket.
fn brent(line: &mut Line<'_, '_>, (xa, xb, xc): (f64, f64, f64), fb: f64, tol: f64) -> Result<(), Halt> {
    const ZEPS: f64 = 1e-11;
    let (mut a, mut b) = if xa < xc { (xa, xc) } else { (xc, xa) };
    let (mut x, mut w, mut v) = (xb, xb, xb);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    loop {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(());
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let Some(fu) = line.eval(u)? else { return Ok(()) };
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, w, x) = (w, x, u);
            (fv, fw, fx) = (fw, fx, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, w) = (w, u);
                (fv, fw) = (fw, fu);
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
}

pub(super) fn run(session: &mut Budgeted<'_>, theta0: &[f64], cfg: &PowellConfig) -> Result<(), Halt> {
    let p = theta0.len();
    let mut directions: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut e = vec![0.0; p];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut x = theta0.to_vec();
    let mut fval = session.cost(&x)?;
    loop {
        let x_start = x.clone();
        let f_start = fval;
        let mut biggest = (0, 0.0);
        for (i, d) in directions.iter().enumerate() {
            let before = fval;
            let (t, f) = line_minimize(session, &x, fval, d, cfg)?;
            x = axpy(&x, t, d);
            fval = f;
            if before - fval > biggest.1 {
                biggest = (i, before - fval);
            }
        }
        if 2.0 * (f_start - fval) <= cfg.ftol * (f_start.abs() + fval.abs()) + 1e-20 {
            return Ok(());
        }
        let shift: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let extrapolated: Vec<f64> = x.iter().zip(&shift).map(|(a, s)| a + s).collect();
        let f_ext = session.cost(&extrapolated)?;
        if f_start > f_ext {
            let (bigind, delta) = biggest;
            let t = 2.0 * (f_start + f_ext - 2.0 * fval) * (f_start - fval - delta).powi(2)
                - delta * (f_start - f_ext).powi(2);
            if t < 0.0 {
                let (t, f) = line_minimize(session, &x, fval, &shift, cfg)?;
                let step: Vec<f64> = shift.iter().map(|s| t * s).collect();
                x = axpy(&x, 1.0, &step);
                fval = f;
                if step.iter().any(|&s| s != 0.0) {
                    directions[bigind] = directions[p - 1].clone();
                    directions[p - 1] = step;
                }
            }
        }
    }
}
