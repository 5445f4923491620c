//! Tr f(D_A) on a finite mode window: block-wise dense diagonalisation, or
//! stochastic Lanczos quadrature once a coupled block is too large.

use serde::{Deserialize, Serialize};

use crate::operator::{
    assemble_window, slq_trace, ModeWindow, OneForm, SlqOptions, SpectralTriple,
    DEFAULT_BASIS_LIMIT, DEFAULT_BLOCK_LIMIT,
};
use crate::special::Neumaier;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMethod {
    ExactFormula,
    DenseWindow,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowOptions {
    /// Relative size of f at the window edge that is treated as negligible.
    pub edge_tol: f64,
    pub basis_limit: usize,
    pub block_limit: usize,
    /// Fall back to stochastic estimation for oversized blocks.
    pub allow_stochastic: bool,
    pub slq: SlqOptions,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            edge_tol: 1e-15,
            basis_limit: DEFAULT_BASIS_LIMIT,
            block_limit: DEFAULT_BLOCK_LIMIT,
            allow_stochastic: true,
            slq: SlqOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowTrace {
    pub value: f64,
    /// Zero for the dense method, the probe standard error otherwise.
    pub std_error: f64,
    pub method: TraceMethod,
    /// Max-norm radius of the window.
    pub cutoff: u64,
    pub basis_size: usize,
    /// Upper estimate of what the window edge cuts off.
    pub truncation_bound: f64,
}

/// Window radius for a function negligible beyond spectral radius `reach`,
/// padded by the spread of the one-form.
pub fn window_radius(reach: f64, a: &OneForm) -> u64 {
    reach.ceil() as u64 + a.spread()
}

/// Tr f(D_A) over the max-norm window of radius `cutoff`.
///
/// `edge_value` bounds |f| for eigenvalues beyond the part of the window not
/// reached by the one-form.
pub fn window_trace<F>(
    triple: &SpectralTriple,
    a: &OneForm,
    f: F,
    cutoff: u64,
    edge_value: f64,
    opts: &WindowOptions,
) -> Result<WindowTrace>
where
    F: Fn(f64) -> f64 + Sync,
{
    let window = ModeWindow::max_norm(cutoff);
    let op = assemble_window(
        &triple.covariant_dirac_direct(a)?,
        &window,
        opts.basis_limit,
    )?;
    let basis_size = op.size();
    let truncation_bound = edge_value * basis_size as f64;
    match op.eigenvalues(opts.block_limit) {
        Ok(ev) => {
            let mut acc = Neumaier::default();
            // Smallest contributions first.
            let mut vals: Vec<f64> = ev.iter().map(|&x| f(x)).collect();
            vals.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
            for v in vals {
                acc.add(v);
            }
            Ok(WindowTrace {
                value: acc.sum(),
                std_error: 0.0,
                method: TraceMethod::DenseWindow,
                cutoff,
                basis_size,
                truncation_bound,
            })
        }
        Err(Error::WindowTooLarge { .. }) if opts.allow_stochastic => {
            let est = slq_trace(&op, &f, opts.slq);
            Ok(WindowTrace {
                value: est.value,
                std_error: est.std_error,
                method: TraceMethod::Stochastic,
                cutoff,
                basis_size,
                truncation_bound,
            })
        }
        Err(e) => Err(e),
    }
}
