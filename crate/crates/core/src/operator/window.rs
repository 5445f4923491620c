use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::map::{BasisIndex, ModeMap};
use crate::clifford::CMatrix;
use crate::lattice::{ball, cube};
use crate::{Error, LatticePoint, Result};

/// Refuse dense assembly above this many basis vectors.
pub const DEFAULT_BASIS_LIMIT: usize = 200_000;
/// Largest coupled block handed to the dense eigensolver.
pub const DEFAULT_BLOCK_LIMIT: usize = 2_500;
/// Relative threshold below which eigenvalues count as kernel.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShape {
    MaxNorm,
    Euclidean,
    /// Contains no modes at all.
    Empty,
}

/// The finite set of modes {k : |k| ≤ K} used for truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeWindow {
    pub cutoff: u64,
    pub shape: WindowShape,
}

impl ModeWindow {
    pub fn max_norm(cutoff: u64) -> Self {
        ModeWindow {
            cutoff,
            shape: WindowShape::MaxNorm,
        }
    }

    pub fn euclidean(cutoff: u64) -> Self {
        ModeWindow {
            cutoff,
            shape: WindowShape::Euclidean,
        }
    }

    pub fn empty() -> Self {
        ModeWindow {
            cutoff: 0,
            shape: WindowShape::Empty,
        }
    }

    pub fn contains(&self, k: &LatticePoint) -> bool {
        match self.shape {
            WindowShape::Empty => false,
            WindowShape::MaxNorm => k.max_norm() <= self.cutoff,
            WindowShape::Euclidean => k.norm2() <= (self.cutoff as i128) * (self.cutoff as i128),
        }
    }

    /// Window modes in lexicographic order.
    pub fn points(&self, n: usize) -> Vec<LatticePoint> {
        let k = self.cutoff as i64;
        match self.shape {
            WindowShape::Empty => Vec::new(),
            WindowShape::MaxNorm => cube(n, k),
            WindowShape::Euclidean => ball(n, k * k),
        }
    }

    /// Number of basis vectors (modes × spinor components).
    pub fn basis_size(&self, n: usize, spin_dim: usize) -> usize {
        match self.shape {
            WindowShape::Empty => 0,
            WindowShape::MaxNorm => (2 * self.cutoff as usize + 1).pow(n as u32) * spin_dim,
            WindowShape::Euclidean => self.points(n).len() * spin_dim,
        }
    }
}

/// Sparse truncation P T P of a mode map to a window.
#[derive(Debug, Clone)]
pub struct WindowOperator {
    basis: Vec<BasisIndex>,
    /// rows[r] lists (column, value).
    rows: Vec<Vec<(usize, Complex64)>>,
    /// `inexact[j]` is set when T(basis_j) leaves the window.
    inexact: Vec<bool>,
}

/// Assembles the sparse truncation, refusing bases above `basis_limit`.
pub fn assemble_window(
    t: &ModeMap,
    window: &ModeWindow,
    basis_limit: usize,
) -> Result<WindowOperator> {
    let n = t.dim();
    let s = t.spin_dim();
    let size = window.basis_size(n, s);
    if size > basis_limit {
        return Err(Error::WindowTooLarge {
            size,
            limit: basis_limit,
        });
    }
    let basis: Vec<BasisIndex> = window
        .points(n)
        .into_iter()
        .flat_map(|k| (0..s).map(move |i| (k.clone(), i)))
        .collect();
    let index: FxHashMap<BasisIndex, usize> = basis
        .iter()
        .cloned()
        .enumerate()
        .map(|(j, b)| (b, j))
        .collect();
    let columns: Vec<(Vec<(usize, Complex64)>, bool)> = basis
        .par_iter()
        .map(|(k, i)| {
            let mut col: Vec<(usize, Complex64)> = Vec::new();
            let mut leaked = false;
            for (k2, j, a) in t.apply_basis(k, *i) {
                match index.get(&(k2, j)) {
                    Some(&r) => col.push((r, a)),
                    None => leaked |= a != Complex64::new(0.0, 0.0),
                }
            }
            col.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(col.len());
            for (r, a) in col {
                match merged.last_mut() {
                    Some(last) if last.0 == r => last.1 += a,
                    _ => merged.push((r, a)),
                }
            }
            merged.retain(|e| e.1 != Complex64::new(0.0, 0.0));
            (merged, leaked)
        })
        .collect();
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); basis.len()];
    let mut inexact = Vec::with_capacity(basis.len());
    for (j, (col, leaked)) in columns.into_iter().enumerate() {
        inexact.push(leaked);
        for (r, a) in col {
            rows[r].push((j, a));
        }
    }
    Ok(WindowOperator {
        basis,
        rows,
        inexact,
    })
}

impl WindowOperator {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisIndex] {
        &self.basis
    }

    pub fn inexact(&self) -> &[bool] {
        &self.inexact
    }

    /// True when no column was cut by the window boundary.
    pub fn is_exact(&self) -> bool {
        !self.inexact.iter().any(|&b| b)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .par_iter()
            .map(|row| row.iter().map(|(j, a)| a * x[*j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.size();
        let mut m = CMatrix::zeros(n, n);
        for (r, row) in self.rows.iter().enumerate() {
            for (j, a) in row {
                m[(r, *j)] += a;
            }
        }
        m
    }

    /// max |M_rj − conj(M_jr)|.
    pub fn hermitian_defect(&self) -> f64 {
        let mut lookup: FxHashMap<(usize, usize), Complex64> = FxHashMap::default();
        for (r, row) in self.rows.iter().enumerate() {
            for (j, a) in row {
                lookup.insert((r, *j), *a);
            }
        }
        lookup
            .iter()
            .map(|(&(r, j), a)| {
                (a - lookup.get(&(j, r)).copied().unwrap_or_default().conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Connected components of the coupling graph, each sorted ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (r, row) in self.rows.iter().enumerate() {
            for (j, _) in row {
                let (a, b) = (find(&mut parent, r), find(&mut parent, *j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
        for x in 0..n {
            let root = find(&mut parent, x);
            groups.entry(root).or_default().push(x);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|g| g[0]);
        out
    }

    /// Hermitian part of the restriction to `idx`.
    pub fn dense_block(&self, idx: &[usize]) -> CMatrix {
        let local: FxHashMap<usize, usize> = idx.iter().enumerate().map(|(a, &g)| (g, a)).collect();
        let m = idx.len();
        let mut out = CMatrix::zeros(m, m);
        for (a, &r) in idx.iter().enumerate() {
            for (j, v) in &self.rows[r] {
                if let Some(&b) = local.get(j) {
                    out[(a, b)] += v * 0.5;
                    out[(b, a)] += v.conj() * 0.5;
                }
            }
        }
        out
    }

    /// All eigenvalues, ascending, by block-wise dense diagonalisation.
    pub fn eigenvalues(&self, block_limit: usize) -> Result<Vec<f64>> {
        let blocks = self.blocks();
        if let Some(big) = blocks.iter().find(|b| b.len() > block_limit) {
            return Err(Error::WindowTooLarge {
                size: big.len(),
                limit: block_limit,
            });
        }
        let parts: Vec<Vec<f64>> = blocks
            .par_iter()
            .map(|b| {
                if b.len() == 1 {
                    let r = b[0];
                    let v = self.rows[r]
                        .iter()
                        .find(|(j, _)| *j == r)
                        .map(|e| e.1.re)
                        .unwrap_or(0.0);
                    vec![v]
                } else {
                    self.dense_block(b)
                        .symmetric_eigenvalues()
                        .iter()
                        .copied()
                        .collect()
                }
            })
            .collect();
        let mut all: Vec<f64> = parts.into_iter().flatten().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(all)
    }
}

/// Dense truncation with its basis ordering and boundary flags.
#[derive(Debug, Clone)]
pub struct DenseAssembly {
    pub basis: Vec<BasisIndex>,
    pub matrix: CMatrix,
    pub inexact: Vec<bool>,
}

impl DenseAssembly {
    pub fn is_exact(&self) -> bool {
        !self.inexact.iter().any(|&b| b)
    }

    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn assemble_dense(t: &ModeMap, window: &ModeWindow) -> Result<DenseAssembly> {
    assemble_dense_with(t, window, DEFAULT_BASIS_LIMIT)
}

pub fn assemble_dense_with(
    t: &ModeMap,
    window: &ModeWindow,
    basis_limit: usize,
) -> Result<DenseAssembly> {
    let w = assemble_window(t, window, basis_limit)?;
    Ok(DenseAssembly {
        matrix: w.to_dense(),
        basis: w.basis,
        inexact: w.inexact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub basis_limit: usize,
    pub block_limit: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            basis_limit: DEFAULT_BASIS_LIMIT,
            block_limit: DEFAULT_BLOCK_LIMIT,
        }
    }
}

/// Eigenvalues of the window truncation, ascending.
pub fn spectrum(t: &ModeMap, window: &ModeWindow) -> Result<Vec<f64>> {
    spectrum_with(t, window, SpectrumOptions::default())
}

pub fn spectrum_with(t: &ModeMap, window: &ModeWindow, opts: SpectrumOptions) -> Result<Vec<f64>> {
    assemble_window(t, window, opts.basis_limit)?.eigenvalues(opts.block_limit)
}

/// Numerical kernel of a hermitian map on a window.
#[derive(Debug, Clone)]
pub struct KernelProjection {
    pub dim: usize,
    /// Orthogonal projector onto the kernel; zero outside the window.
    pub projector: ModeMap,
    /// Largest weight a kernel vector places on boundary-cut columns.
    pub boundary_weight: f64,
    /// Set when some kernel vector is not resolved by the window.
    pub touches_boundary: bool,
}

/// Kernel of T on `window`: eigenvectors with |λ| ≤ tol·max|λ|.
///
/// Fails with [`Error::WindowTooSmall`] when the window omits the zero
/// mode, where kernels of Dirac-type operators live.
pub fn kernel_projector(t: &ModeMap, window: &ModeWindow, tol: f64) -> Result<KernelProjection> {
    if !window.contains(&LatticePoint::zero(t.dim())) {
        return Err(Error::WindowTooSmall);
    }
    let w = assemble_window(t, window, DEFAULT_BASIS_LIMIT)?;
    let blocks = w.blocks();
    if let Some(big) = blocks.iter().find(|b| b.len() > DEFAULT_BLOCK_LIMIT) {
        return Err(Error::WindowTooLarge {
            size: big.len(),
            limit: DEFAULT_BLOCK_LIMIT,
        });
    }
    let eig: Vec<SymmetricEigen<Complex64, nalgebra::Dyn>> = blocks
        .par_iter()
        .map(|b| SymmetricEigen::new(w.dense_block(b)))
        .collect();
    let scale = eig
        .iter()
        .flat_map(|e| e.eigenvalues.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let cut = tol * scale;
    let mut dim = 0;
    let mut boundary_weight: f64 = 0.0;
    let mut pieces: Vec<(Vec<usize>, CMatrix)> = Vec::new();
    for (b, e) in blocks.iter().zip(&eig) {
        let keep: Vec<usize> = (0..b.len())
            .filter(|&c| e.eigenvalues[c].abs() <= cut)
            .collect();
        if keep.is_empty() {
            continue;
        }
        dim += keep.len();
        let mut p = CMatrix::zeros(b.len(), b.len());
        for &c in &keep {
            let v = e.eigenvectors.column(c);
            p += v * v.adjoint();
            let weight: f64 = b
                .iter()
                .enumerate()
                .filter(|(_, &g)| w.inexact[g])
                .map(|(a, _)| v[a].norm_sqr())
                .sum();
            boundary_weight = boundary_weight.max(weight);
        }
        pieces.push((b.clone(), p));
    }
    let lookup: FxHashMap<BasisIndex, (usize, usize)> = pieces
        .iter()
        .enumerate()
        .flat_map(|(pi, (b, _))| b.iter().enumerate().map(move |(a, &g)| (g, (pi, a))))
        .map(|(g, loc)| (w.basis[g].clone(), loc))
        .collect();
    let basis = Arc::new(w.basis.clone());
    let pieces = Arc::new(pieces);
    let projector = ModeMap::from_rule(t.dim(), t.spin_dim(), 2 * window.cutoff, move |k, i| {
        let Some(&(pi, a)) = lookup.get(&(k.clone(), i)) else {
            return Vec::new();
        };
        let (b, p) = &pieces[pi];
        b.iter()
            .enumerate()
            .filter(|(r, _)| p[(*r, a)].norm() > 0.0)
            .map(|(r, &g)| (basis[g].0.clone(), basis[g].1, p[(r, a)]))
            .collect()
    });
    Ok(KernelProjection {
        dim,
        projector,
        boundary_weight,
        touches_boundary: boundary_weight > 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_counts() {
        assert_eq!(ModeWindow::max_norm(1).basis_size(2, 2), 18);
        assert_eq!(ModeWindow::euclidean(1).points(2).len(), 5);
        assert_eq!(
            ModeWindow::euclidean(2).basis_size(3, 2),
            2 * ball(3, 4).len()
        );
        assert!(ModeWindow::euclidean(2).contains(&LatticePoint::new(&[1, 1])));
        assert!(!ModeWindow::euclidean(1).contains(&LatticePoint::new(&[1, 1])));
    }

    #[test]
    fn memory_guard() {
        let id = ModeMap::identity(3, 2);
        let err = assemble_dense_with(&id, &ModeWindow::max_norm(10), 1000).unwrap_err();
        assert_eq!(
            err,
            Error::WindowTooLarge {
                size: 21usize.pow(3) * 2,
                limit: 1000
            }
        );
    }

    #[test]
    fn blocks_of_diagonal_map_are_singletons() {
        let w = assemble_window(&ModeMap::identity(2, 1), &ModeWindow::max_norm(1), 100).unwrap();
        assert_eq!(w.blocks().len(), 9);
        assert_eq!(w.eigenvalues(1).unwrap(), vec![1.0; 9]);
        assert!(w.is_exact());
    }
}
