//! Stochastic Lanczos quadrature for Tr f(T) on large windows.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::window::WindowOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlqOptions {
    pub probes: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for SlqOptions {
    fn default() -> Self {
        SlqOptions {
            probes: 64,
            steps: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlqEstimate {
    pub value: f64,
    /// Standard error of the probe mean.
    pub std_error: f64,
    pub probes: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Gauss nodes and weights of the Lanczos tridiagonalisation started at z.
fn lanczos_quadrature(op: &WindowOperator, z: &[Complex64], steps: usize) -> (Vec<f64>, Vec<f64>) {
    let n0 = norm(z);
    let mut basis: Vec<Vec<Complex64>> = vec![z.iter().map(|x| x / n0).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = steps.min(op.size()).max(1);
    for j in 0..steps {
        let mut w = op.matvec(&basis[j]);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Full reorthogonalisation, applied twice for stability.
        for _ in 0..2 {
            for v in &basis {
                let h = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
            }
        }
        let b = norm(&w);
        if j + 1 == steps || b <= 1e-12 * (a.abs() + beta.last().copied().unwrap_or(0.0) + 1.0) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let e = t.symmetric_eigen();
    let weights = (0..m)
        .map(|c| e.eigenvectors[(0, c)].powi(2) * n0 * n0)
        .collect();
    (e.eigenvalues.iter().copied().collect(), weights)
}

/// Hutchinson estimate of Tr f(T) with Rademacher probes, each probe
/// evaluated by Lanczos quadrature. Deterministic for a fixed seed.
pub fn slq_trace<F: Fn(f64) -> f64>(op: &WindowOperator, f: F, opts: SlqOptions) -> SlqEstimate {
    let n = op.size();
    if n == 0 || opts.probes == 0 {
        return SlqEstimate {
            value: 0.0,
            std_error: 0.0,
            probes: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut samples = Vec::with_capacity(opts.probes);
    for _ in 0..opts.probes {
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let (nodes, weights) = lanczos_quadrature(op, &z, opts.steps);
        samples.push(
            nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * f(*x))
                .sum::<f64>(),
        );
    }
    let p = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / p;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (p - 1.0)
    } else {
        0.0
    };
    SlqEstimate {
        value: mean,
        std_error: (var / p).sqrt(),
        probes: samples.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble_window, ModeWindow, SpectralTriple};
    use crate::DeformationMatrix;

    #[test]
    fn matches_exact_trace_of_smooth_function() {
        let t = SpectralTriple::new(DeformationMatrix::golden(2)).unwrap();
        let op = assemble_window(&t.dirac(), &ModeWindow::max_norm(6), 10_000).unwrap();
        let f = |x: f64| (-x * x / 10.0).exp();
        let exact: f64 = op.eigenvalues(10_000).unwrap().iter().map(|&x| f(x)).sum();
        let est = slq_trace(
            &op,
            f,
            SlqOptions {
                probes: 200,
                steps: 30,
                seed: 3,
            },
        );
        assert!(
            (est.value - exact).abs() < 4.0 * est.std_error + 1e-9,
            "{est:?} vs {exact}"
        );
        let again = slq_trace(
            &op,
            f,
            SlqOptions {
                probes: 200,
                steps: 30,
                seed: 3,
            },
        );
        assert_eq!(est, again);
    }
}
