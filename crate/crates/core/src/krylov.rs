//! Lanczos approximation of `exp(-iHt) v` for a Hermitian operator given as a matvec.
//!
//! The Krylov basis is fully reorthogonalized; at the subspace sizes used here
//! (<= 64) that is cheaper than dealing with ghost eigenvalues. When the
//! residual estimate does not reach the tolerance within `max_dim` vectors the
//! step is halved and retried.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Residual tolerance relative to the input norm.
    pub tol: f64,
    pub max_dim: usize,
    /// Maximum number of step halvings before giving up.
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { tol: 1e-10, max_dim: 64, max_halvings: 40 }
    }
}

/// Diagnostics from one propagation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub matvecs: usize,
    pub max_subspace: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(-i T dt) e_1` for a real symmetric tridiagonal `T`.
fn small_expm_e1(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let v = eig.eigenvectors[(r, s)] * eig.eigenvectors[(0, s)];
                    Complex64::from_polar(v, -eig.eigenvalues[s] * dt)
                })
                .sum()
        })
        .collect()
}

enum StepOutcome {
    Done(Vec<Complex64>, usize),
    NotConverged,
}

fn lanczos_step<F>(apply: &F, v: &[Complex64], dt: f64, opts: &KrylovOptions, stats: &mut KrylovStats) -> StepOutcome
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let dim = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return StepOutcome::Done(v.to_vec(), 0);
    }
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let max_dim = opts.max_dim.min(dim);

    for j in 0..max_dim {
        apply(&basis[j], &mut w);
        stats.matvecs += 1;
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Full reorthogonalization (twice is enough).
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let b = norm(&w);
        let k = j + 1;
        let small = small_expm_e1(&alpha, &beta, dt);
        // Happy breakdown: the subspace is invariant, the result is exact.
        let breakdown = b <= 1e-13 * (a.abs() + beta.last().copied().unwrap_or(0.0) + 1.0);
        let err = b * small[k - 1].norm();
        if breakdown || err <= opts.tol || k == dim {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (q, s) in basis.iter().zip(&small) {
                let coef = s * beta0;
                out.iter_mut().zip(q).for_each(|(o, x)| *o += coef * x);
            }
            return StepOutcome::Done(out, k);
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    StepOutcome::NotConverged
}

/// Computes `exp(-i H t) v` where `apply(x, out)` writes `H x` into `out`.
pub fn expm_multiply<F>(apply: F, v: &[Complex64], t: f64, opts: &KrylovOptions) -> Result<(Vec<Complex64>, KrylovStats)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let mut stats = KrylovStats::default();
    let mut state = v.to_vec();
    if t == 0.0 {
        return Ok((state, stats));
    }
    let min_dt = t * 0.5f64.powi(opts.max_halvings as i32);
    let mut done = 0.0;
    let mut dt = t;
    while done < t {
        let step = dt.min(t - done);
        match lanczos_step(&apply, &state, step, opts, &mut stats) {
            StepOutcome::Done(next, k) => {
                state = next;
                done += step;
                stats.substeps += 1;
                stats.max_subspace = stats.max_subspace.max(k);
                // Grow again after a successful step.
                dt = step * 2.0;
            }
            StepOutcome::NotConverged => {
                dt = step / 2.0;
                if dt < min_dt {
                    return Err(Error::KrylovNonConvergence(format!(
                        "step fell below {min_dt:e} after {} halvings at t = {done}",
                        opts.max_halvings
                    )));
                }
            }
        }
    }
    Ok((state, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Diagonal operator: exp(-iDt) v is known elementwise.
    #[test]
    fn diagonal_operator_exact() {
        let d: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let v: Vec<Complex64> = (0..50).map(|i| Complex64::new(1.0, i as f64 * 0.1)).collect();
        let apply = |x: &[Complex64], out: &mut [Complex64]| {
            out.iter_mut().zip(x).zip(&d).for_each(|((o, a), e)| *o = a * e);
        };
        let t = 17.0;
        let (out, stats) = expm_multiply(apply, &v, t, &KrylovOptions::default()).unwrap();
        for i in 0..50 {
            let want = v[i] * Complex64::from_polar(1.0, -d[i] * t);
            assert!((out[i] - want).norm() < 1e-9, "{i}");
        }
        assert!(stats.substeps >= 1);
    }

    #[test]
    fn tiny_budget_fails_loudly() {
        let d: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let v = vec![Complex64::new(1.0, 0.0); 200];
        let apply = |x: &[Complex64], out: &mut [Complex64]| {
            out.iter_mut().zip(x).zip(&d).for_each(|((o, a), e)| *o = a * e);
        };
        let opts = KrylovOptions { tol: 1e-14, max_dim: 2, max_halvings: 3 };
        assert!(matches!(
            expm_multiply(apply, &v, 100.0, &opts),
            Err(Error::KrylovNonConvergence(_))
        ));
    }
}
