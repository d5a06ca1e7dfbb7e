//! Levenberg-Marquardt on small dense systems with a central-difference
//! Jacobian. Jacobian columns are independent and evaluated in parallel.

use nalgebra::{DMatrix, DVector};

use crate::par;

#[derive(Clone, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 80, tol: 1e-13, fd_step: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sumsq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn jacobian<F>(f: &F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let n = x.len();
    let cols = par::map_range(n, |k| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>()
    });
    let m = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(m, n, |i, k| cols[k][i])
}

pub fn solve<F>(f: F, x0: &[f64], opt: &LmOptions) -> LmOutcome
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut cost = sumsq(&r);
    let mut lam = 1e-3;
    let mut it = 0;
    while it < opt.max_iter && max_abs(&r) > opt.tol {
        it += 1;
        let j = jacobian(&f, &x, opt.fd_step);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        while lam < 1e12 {
            let mut m = a.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += lam * a[(i, i)].max(1e-300);
            }
            let step = match m.lu().solve(&g) {
                Some(s) => s,
                None => {
                    lam *= 10.0;
                    continue;
                }
            };
            // full step first, then two backtracked ones before damping harder
            for (t, frac) in [1.0, 0.5, 0.25].into_iter().enumerate() {
                let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - frac * s).collect();
                let rn = f(&xn);
                let cn = sumsq(&rn);
                if cn.is_finite() && cn < cost {
                    x = xn;
                    r = rn;
                    cost = cn;
                    if t == 0 {
                        lam = (lam / 10.0).max(1e-12);
                    }
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
            lam *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let converged = max_abs(&r) <= opt.tol;
    LmOutcome { x, residual: r, iterations: it, converged }
}
