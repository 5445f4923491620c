//! Mode-level operators on the basis {U_k ⊗ e_i} of the GNS space of A_Θ
//! tensored with spinors.
//!
//! A [`ModeMap`] is an exact rule: every basis vector is sent to a finite
//! list of weighted basis vectors. Sums and compositions stay exact. Truncation
//! to a finite [`ModeWindow`] only happens when a matrix is assembled.

mod map;
mod slq;
mod triple;
mod window;

pub use map::{BasisIndex, ModeMap, Output, SparseVector};
pub use slq::{slq_trace, SlqEstimate, SlqOptions};
pub use triple::{phase_unitary, OneForm, SpectralTriple};
pub use window::{
    assemble_dense, assemble_dense_with, assemble_window, kernel_projector, spectrum,
    spectrum_with, DenseAssembly, KernelProjection, ModeWindow, SpectrumOptions, WindowOperator,
    WindowShape, DEFAULT_BASIS_LIMIT, DEFAULT_BLOCK_LIMIT, DEFAULT_KERNEL_TOL,
};
