//! Matrix-free search for the lowest few eigenpairs of real symmetric operators.
//!
//! Each cycle runs up to `cycle_len` Lanczos steps with full reorthogonalization
//! and restarts from the sum of the wanted Ritz vectors. Vectors in `locked` are
//! projected out of every Krylov vector, which deflates previously found
//! eigenvectors. A single Krylov sequence sees one copy of each degenerate
//! eigenvalue; deflate through `locked` when multiplicities matter.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Converged when `‖A x − θ x‖ ≤ tol · max(1, |θ|)`.
    pub tol: f64,
    pub cycle_len: usize,
    pub max_cycles: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-10,
            cycle_len: 100,
            max_cycles: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four partial sums let the compiler vectorize
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn gram_schmidt_pass(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(v, u);
        axpy(-c, u, v);
    }
}

/// Classical Gram-Schmidt with a second pass only when the first removed most
/// of the norm.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    if basis.is_empty() {
        return;
    }
    let before = norm(v);
    gram_schmidt_pass(v, basis);
    if norm(v) < std::f64::consts::FRAC_1_SQRT_2 * before {
        gram_schmidt_pass(v, basis);
    }
}

/// `index`-th smallest eigenvalue of the tridiagonal matrix by Sturm-sequence
/// bisection, and the last component of its normalized eigenvector.
fn ritz_estimate(alphas: &[f64], betas: &[f64], index: usize) -> (f64, f64) {
    let k = alphas.len();
    let off = |i: usize| if i < betas.len() { betas[i].abs() } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &a) in alphas.iter().enumerate() {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(a - r);
        hi = hi.max(a + r);
    }
    // number of eigenvalues below x
    let below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..k {
            let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
            q = alphas[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = f64::EPSILON * (x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    // two steps of inverse iteration; (T - θ) is solved without pivoting
    let shift = theta - f64::EPSILON * (lo.abs() + hi.abs() + 1.0);
    let mut y = vec![1.0f64; k];
    let tiny = f64::MIN_POSITIVE.sqrt();
    for _ in 0..2 {
        let mut diag: Vec<f64> = alphas.iter().map(|a| a - shift).collect();
        let mut rhs = y.clone();
        for i in 1..k {
            if diag[i - 1].abs() < tiny {
                diag[i - 1] = tiny;
            }
            let m = betas[i - 1] / diag[i - 1];
            diag[i] -= m * betas[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        if diag[k - 1].abs() < tiny {
            diag[k - 1] = tiny;
        }
        y[k - 1] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            y[i] = (rhs[i] - betas[i] * y[i + 1]) / diag[i];
        }
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= ny);
    }
    (theta, y[k - 1].abs())
}

/// Steps between in-cycle convergence estimates.
const CHECK_EVERY: usize = 8;

/// Lowest eigenpair of `op` restricted to the orthogonal complement of `locked`.
///
/// `locked` must be orthonormal.
pub fn lowest_eigenpair<F>(op: F, start: &[f64], locked: &[Vec<f64>], opts: &LanczosOptions) -> Result<RitzPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut pairs = lowest_eigenpairs(op, start, locked, 1, opts)?;
    Ok(pairs.remove(0))
}

/// The `count` lowest eigenpairs, in ascending order, from one Krylov sequence.
pub fn lowest_eigenpairs<F>(
    op: F,
    start: &[f64],
    locked: &[Vec<f64>],
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<RitzPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    let free_dim = dim.saturating_sub(locked.len());
    if count == 0 || count > free_dim {
        return Err(Error::InvalidArgument(format!(
            "cannot extract {count} eigenpairs from a {free_dim}-dimensional space"
        )));
    }
    let mut v = start.to_vec();
    project_out(&mut v, locked);
    let mut nv = norm(&v);
    if nv < 1e-12 {
        // start vector lies in the locked span; fall back to a deterministic probe
        v = (0..dim).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
        project_out(&mut v, locked);
        nv = norm(&v);
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let m_max = opts.cycle_len.max(count + 1).min(free_dim);
    let mut w = vec![0.0; dim];
    let mut matvecs = 0usize;
    let mut last_residual = f64::INFINITY;
    let converged = |residual: f64, value: f64| residual <= opts.tol * value.abs().max(1.0);

    for _cycle in 0..opts.max_cycles {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        loop {
            let j = basis.len() - 1;
            op(&basis[j], &mut w);
            matvecs += 1;
            let alpha = dot(&w, &basis[j]);
            axpy(-alpha, &basis[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &basis[j - 1], &mut w);
            }
            project_out(&mut w, locked);
            project_out(&mut w, &basis);
            alphas.push(alpha);
            let beta = norm(&w);
            let scale = alphas.iter().fold(1.0f64, |m, a| m.max(a.abs()));
            if basis.len() >= m_max || beta <= 1e-13 * scale {
                break;
            }
            // |β_j y_last| is the residual of a Ritz pair
            if alphas.len().is_multiple_of(CHECK_EVERY) && alphas.len() > count {
                let done = (0..count).all(|i| {
                    let (theta, y_last) = ritz_estimate(&alphas, &betas, i);
                    beta * y_last <= 0.1 * opts.tol * theta.abs().max(1.0)
                });
                if done {
                    break;
                }
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }

        let k = alphas.len();
        if k < count {
            return Err(Error::InvalidState(format!(
                "Krylov space closed after {k} steps, fewer than the {count} requested eigenpairs"
            )));
        }
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut pairs = Vec::with_capacity(count);
        let mut all_converged = true;
        for &idx in &order[..count] {
            let mut x = vec![0.0; dim];
            for (coef, q) in eig.eigenvectors.column(idx).iter().zip(&basis) {
                axpy(*coef, q, &mut x);
            }
            project_out(&mut x, locked);
            let nx = norm(&x);
            x.iter_mut().for_each(|xi| *xi /= nx);

            op(&x, &mut w);
            matvecs += 1;
            let value = dot(&x, &w);
            axpy(-value, &x, &mut w);
            project_out(&mut w, locked);
            let residual = norm(&w);
            all_converged &= converged(residual, value);
            last_residual = if all_converged { last_residual.min(residual) } else { residual };
            pairs.push(RitzPair {
                value,
                vector: x,
                residual,
                matvecs: 0,
            });
        }
        if all_converged {
            pairs.iter_mut().for_each(|p| p.matvecs = matvecs);
            return Ok(pairs);
        }
        v = vec![0.0; dim];
        for p in &pairs {
            axpy(1.0, &p.vector, &mut v);
        }
        project_out(&mut v, locked);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
    }
    Err(Error::Convergence {
        iterations: matvecs,
        residual: last_residual,
    })
}
