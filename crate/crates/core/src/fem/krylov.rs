//! Jacobi-preconditioned Krylov solvers.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Relative residual target `||b - Ax|| <= tol ||b||`.
    pub tol: f64,
    /// Iteration cap; `None` means ten times the dimension.
    pub max_iter: Option<usize>,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

impl KrylovOptions {
    pub fn with_tol(tol: f64) -> Self {
        KrylovOptions { tol, max_iter: None }
    }

    fn cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inverse_diagonal(a: &CsrMatrix) -> Vec<f64> {
    a.diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

/// Preconditioned conjugate gradients for SPD `a`, starting from `x`.
/// Returns the number of iterations used.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], opts: &KrylovOptions, system: &str) -> Result<usize> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let target = opts.tol * bnorm;
    let dinv = inverse_diagonal(a);
    let cap = opts.cap(n);
    let mut r = residual(a, b, x);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iters = 0;
    while norm(&r) > target {
        if iters >= cap {
            return Err(Error::SolverFailure {
                system: system.to_string(),
                iterations: iters,
                residual: norm(&r) / bnorm,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::SolverFailure {
                system: format!("{system} (matrix not positive definite)"),
                iterations: iters,
                residual: norm(&r) / bnorm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iters += 1;
    }
    Ok(iters)
}

/// Solves an SPD system from a zero initial guess with the default
/// iteration cap of ten times the dimension.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    pcg(a, b, &mut x, &KrylovOptions::with_tol(tol), "spd system")?;
    Ok(x)
}

/// Restarted GMRES with right Jacobi preconditioning for general square `a`.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    restart: usize,
    opts: &KrylovOptions,
    system: &str,
) -> Result<usize> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let m = restart.clamp(1, n.max(1));
    let target = opts.tol * bnorm;
    let dinv = inverse_diagonal(a);
    let cap = opts.cap(n);
    let mut iters = 0;
    let mut w = vec![0.0; n];
    let mut zbuf = vec![0.0; n];
    loop {
        let r = residual(a, b, x);
        let beta = norm(&r);
        if beta <= target {
            return Ok(iters);
        }
        if iters >= cap {
            return Err(Error::SolverFailure {
                system: system.to_string(),
                iterations: iters,
                residual: beta / bnorm,
            });
        }
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            for i in 0..n {
                zbuf[i] = v[k][i] * dinv[i];
            }
            a.mul_vec_into(&zbuf, &mut w);
            for j in 0..=k {
                let hjk = dot(&w, &v[j]);
                h[j][k] = hjk;
                for i in 0..n {
                    w[i] -= hjk * v[j][i];
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            iters += 1;
            if g[k + 1].abs() <= target || iters >= cap || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        if k_used == 0 {
            return Err(Error::SolverFailure {
                system: format!("{system} (Krylov breakdown)"),
                iterations: iters,
                residual: beta / bnorm,
            });
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for i in 0..n {
            let mut s = 0.0;
            for (j, yj) in y.iter().enumerate() {
                s += yj * v[j][i];
            }
            x[i] += dinv[i] * s;
        }
    }
}
