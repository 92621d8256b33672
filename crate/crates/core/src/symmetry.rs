//! Atom-swap symmetry: the unitary that fixes the symmetric atomic states
//! and flips the sign of the antisymmetric one, strong-symmetry commutation
//! checks, and the block decomposition of the Liouvillian into symmetry
//! sectors.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::sync::Arc;

use crate::eig;
use crate::error::{Error, Result};
use crate::fcs::{build_tilted, Superoperator};
use crate::hilbert::{commutator, HilbertSpace, Operator};
use crate::model::LindbladModel;

/// A unitary involution together with its eigenvalue table.
#[derive(Debug, Clone)]
pub struct SymmetryOp {
    pub op: Operator,
    /// (eigenvalue, multiplicity), sorted by eigenvalue.
    pub eigenvalues: Vec<(f64, usize)>,
}

impl SymmetryOp {
    /// Wrap a user-supplied unitary involution (U² = 1, U = U†).
    pub fn from_operator(op: Operator) -> Result<SymmetryOp> {
        let dim = op.dim();
        let u2 = op.matmul(&op)?;
        let id = Array2::<C64>::eye(dim);
        let defect = eig::frobenius(&(u2.matrix() - &id));
        if defect > 1e-12 * (dim as f64).sqrt() {
            return Err(Error::Config(format!(
                "symmetry operator is not an involution: ||U^2 - 1|| = {defect:.3e}"
            )));
        }
        let (vals, _) = eig::eigh_hermitian(op.matrix())?;
        let mut eigenvalues: Vec<(f64, usize)> = Vec::new();
        for v in vals.iter() {
            match eigenvalues.last_mut() {
                Some((prev, count)) if (*prev - v).abs() < 1e-8 => *count += 1,
                _ => eigenvalues.push((*v, 1)),
            }
        }
        Ok(SymmetryOp { op, eigenvalues })
    }
}

/// The atom-swap unitary: diagonal (+1, +1, -1, +1) over the atomic basis
/// [00, s, a, 11], identity on the photons.
pub fn build_swap(space: &Arc<HilbertSpace>) -> SymmetryOp {
    let dim = space.dim();
    let mut elems = Array2::<C64>::zeros((dim, dim));
    let mut minus = 0usize;
    for (k, state) in space.basis().iter().enumerate() {
        elems[(k, k)] = C64::new(state.atom.parity(), 0.0);
        if state.atom.parity() < 0.0 {
            minus += 1;
        }
    }
    let op = Operator::from_matrix(space, elems).expect("square by construction");
    SymmetryOp {
        op,
        eigenvalues: vec![(-1.0, minus), (1.0, dim - minus)],
    }
}

/// Commutator norms of a candidate symmetry against every generator piece.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    /// (object label, ‖[U, ·]‖_F).
    pub commutator_norms: Vec<(String, f64)>,
    pub tolerance: f64,
    /// True iff every norm is below the tolerance.
    pub strong_symmetry: bool,
}

/// Frobenius norms of [U, H] and [U, L_k] for every channel; the verdict is
/// strong symmetry iff all of them vanish to tolerance.
pub fn check_strong_symmetry(
    model: &LindbladModel,
    sym: &SymmetryOp,
    tol: f64,
) -> Result<SymmetryReport> {
    let mut norms = Vec::with_capacity(model.channels.len() + 1);
    let h_norm = commutator(&sym.op, &model.hamiltonian)?.frobenius_norm();
    norms.push(("H".to_string(), h_norm));
    for c in &model.channels {
        let n = commutator(&sym.op, &c.op)?.frobenius_norm();
        norms.push((c.label.clone(), n));
    }
    let strong = norms.iter().all(|(_, n)| *n < tol);
    Ok(SymmetryReport {
        commutator_norms: norms,
        tolerance: tol,
        strong_symmetry: strong,
    })
}

/// One symmetry block of the Liouvillian, acting on operators supported on
/// a (row sector, column sector) pair of the symmetry eigenspaces.
#[derive(Debug)]
pub struct SectorBlock {
    pub row_eigenvalue: f64,
    pub col_eigenvalue: f64,
    /// Dense block in the induced operator basis.
    pub matrix: Array2<C64>,
    /// Spectral abscissa of the block (diagonal blocks host their own
    /// steady states at zero).
    pub spectral_abscissa: f64,
    /// Steady states of the block, embedded back into the full space;
    /// populated for diagonal sectors only.
    pub steady_states: Vec<Array2<C64>>,
    /// Largest coupling from this block to any other, as a consistency
    /// check of the decomposition.
    pub leakage: f64,
}

impl SectorBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_diagonal_sector(&self) -> bool {
        (self.row_eigenvalue - self.col_eigenvalue).abs() < 1e-8
    }
}

/// Decompose the (untilted) Liouvillian into symmetry sector blocks.
///
/// Requires a strong symmetry; refuses otherwise, reporting the violating
/// commutator norms. The symmetry must be diagonal in the computational
/// basis (as the swap operator is); states are grouped by its diagonal
/// eigenvalues and the superoperator is sliced on the induced index sets.
pub fn sector_decompose(
    model: &LindbladModel,
    sym: &SymmetryOp,
    tol: f64,
    dense_limit: usize,
) -> Result<Vec<SectorBlock>> {
    let report = check_strong_symmetry(model, sym, tol)?;
    if !report.strong_symmetry {
        let violating: Vec<String> = report
            .commutator_norms
            .iter()
            .filter(|(_, n)| *n >= tol)
            .map(|(l, n)| format!("{l}: {n:.3e}"))
            .collect();
        return Err(Error::NotSymmetric(violating.join(", ")));
    }

    let dim = model.dim();
    let u = sym.op.matrix();
    let off_diag: f64 = u
        .indexed_iter()
        .filter(|((r, c), _)| r != c)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if off_diag > 1e-12 {
        return Err(Error::Config(
            "sector decomposition requires a symmetry diagonal in the computational basis".into(),
        ));
    }

    // Group basis states by the diagonal eigenvalue.
    let mut sectors: Vec<(f64, Vec<usize>)> = Vec::new();
    for k in 0..dim {
        let ev = u[(k, k)].re;
        match sectors.iter_mut().find(|(v, _)| (*v - ev).abs() < 1e-8) {
            Some((_, idx)) => idx.push(k),
            None => sectors.push((ev, vec![k])),
        }
    }
    sectors.sort_by(|a, b| b.0.total_cmp(&a.0));

    let w = build_tilted(model, 0.0, dense_limit)?;
    let mut blocks = Vec::new();
    for (row_ev, row_idx) in &sectors {
        for (col_ev, col_idx) in &sectors {
            blocks.push(extract_block(&w, dim, *row_ev, row_idx, *col_ev, col_idx)?);
        }
    }
    Ok(blocks)
}

fn extract_block(
    w: &Superoperator,
    dim: usize,
    row_ev: f64,
    row_idx: &[usize],
    col_ev: f64,
    col_idx: &[usize],
) -> Result<SectorBlock> {
    // Column-stacking vec index of the (r, c) density-matrix entry.
    let vec_idx: Vec<usize> = col_idx
        .iter()
        .flat_map(|&c| row_idx.iter().map(move |&r| c * dim + r))
        .collect();
    let n = vec_idx.len();
    let wm = w.matrix();
    let mut block = Array2::<C64>::zeros((n, n));
    for (bi, &i) in vec_idx.iter().enumerate() {
        for (bj, &j) in vec_idx.iter().enumerate() {
            block[(bi, bj)] = wm[(i, j)];
        }
    }

    // Entries of W coupling this block's columns to rows outside it
    // measure decomposition leakage.
    let in_block = {
        let mut mask = vec![false; wm.nrows()];
        for &i in &vec_idx {
            mask[i] = true;
        }
        mask
    };
    let mut leakage = 0.0f64;
    for &j in &vec_idx {
        for i in 0..wm.nrows() {
            if !in_block[i] {
                leakage = leakage.max(wm[(i, j)].norm());
            }
        }
    }

    let (vals, vecs) = eig::spectrum_dense(&block)?;
    let spectral_abscissa = vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);

    // Diagonal sectors carry their own steady states; lift their null
    // vectors back onto the full space.
    let mut steady = Vec::new();
    if (row_ev - col_ev).abs() < 1e-8 {
        let m = row_idx.len();
        let block_scale = eig::frobenius(&block);
        for (k, lambda) in vals.iter().enumerate() {
            if lambda.norm() >= 1e-8 * block_scale {
                continue;
            }
            let local = crate::fcs::devectorize(&vecs.column(k).to_owned(), m);
            if let Some(rho_local) = crate::fcs::physical_state_from_null_matrix(&local)? {
                let mut full = Array2::<C64>::zeros((dim, dim));
                for (r, &ri) in row_idx.iter().enumerate() {
                    for (c, &ci) in col_idx.iter().enumerate() {
                        full[(ri, ci)] = rho_local[(r, c)];
                    }
                }
                steady.push(full);
            }
        }
    }

    Ok(SectorBlock {
        row_eigenvalue: row_ev,
        col_eigenvalue: col_ev,
        matrix: block,
        spectral_abscissa,
        steady_states: steady,
        leakage,
    })
}

/// Weights of a pure state in each symmetry eigenspace (diagonal symmetry).
pub fn sector_weights(sym: &SymmetryOp, psi: &ndarray::Array1<C64>) -> Vec<(f64, f64)> {
    let u = sym.op.matrix();
    let mut acc: Vec<(f64, f64)> = sym.eigenvalues.iter().map(|(v, _)| (*v, 0.0)).collect();
    for (k, amp) in psi.iter().enumerate() {
        let ev = u[(k, k)].re;
        if let Some((_, w)) = acc.iter_mut().find(|(v, _)| (*v - ev).abs() < 1e-8) {
            *w += amp.norm_sqr();
        }
    }
    let total: f64 = acc.iter().map(|(_, w)| w).sum();
    if total > 0.0 {
        for (_, w) in acc.iter_mut() {
            *w /= total;
        }
    }
    acc
}
