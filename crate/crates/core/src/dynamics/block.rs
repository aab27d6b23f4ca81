//! `e^{-iHt}` for Hamiltonians that conserve the excitation number, by
//! Hermitian eigendecomposition of each excitation block.

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigh;
use crate::hilbert::{max_abs, CMatrix, Operator, SpaceLayout, C64, ZERO};
use crate::tolerances;

/// Excitation count of every composite basis index: one per excited atom
/// (subsystems labelled `atom*`) plus the photon number of every mode.
pub fn excitation_counts(layout: &SpaceLayout) -> Vec<usize> {
    let atoms: Vec<bool> = layout.labels().iter().map(|l| l.starts_with("atom")).collect();
    (0..layout.total_dim())
        .map(|i| {
            layout
                .decode(i)
                .iter()
                .zip(&atoms)
                .map(|(&digit, &is_atom)| if is_atom { 1 - digit } else { digit })
                .sum()
        })
        .collect()
}

/// Diagonal excitation-number operator.
pub fn excitation_operator(layout: &SpaceLayout) -> Operator {
    let counts = excitation_counts(layout);
    let diag = nalgebra::DVector::from_iterator(counts.len(), counts.iter().map(|&n| C64::new(n as f64, 0.0)));
    Operator::new(layout.clone(), CMatrix::from_diagonal(&diag)).expect("square")
}

#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    energies: Vec<f64>,
    vectors: CMatrix,
}

/// Spectral data of a block-diagonal Hermitian Hamiltonian.
#[derive(Clone, Debug)]
pub struct BlockExact {
    layout: SpaceLayout,
    blocks: Vec<Block>,
}

impl BlockExact {
    pub fn new(h: &Operator) -> Result<Self> {
        let m = h.matrix();
        let scale = max_abs(m).max(1.0);
        let herm = h.hermiticity_error();
        if herm > tolerances::HERMITIAN * scale {
            return Err(Error::NotHermitian(herm));
        }
        let counts = excitation_counts(h.layout());
        let n = counts.len();
        let mut coupling: f64 = 0.0;
        for c in 0..n {
            for r in 0..n {
                if counts[r] != counts[c] {
                    coupling = coupling.max(m[(r, c)].norm());
                }
            }
        }
        if coupling > tolerances::HERMITIAN * scale {
            return Err(Error::BlockStructure(coupling));
        }
        let max_count = counts.iter().copied().max().unwrap_or(0);
        let mut blocks = Vec::new();
        for k in 0..=max_count {
            let indices: Vec<usize> = (0..n).filter(|&i| counts[i] == k).collect();
            if indices.is_empty() {
                continue;
            }
            let sub = CMatrix::from_fn(indices.len(), indices.len(), |r, c| {
                0.5 * (m[(indices[r], indices[c])] + m[(indices[c], indices[r])].conj())
            });
            let (energies, vectors) = hermitian_eigh(&sub)?;
            blocks.push(Block { indices, energies, vectors });
        }
        Ok(Self { layout: h.layout().clone(), blocks })
    }

    /// Builds the blocks of `sum c sigma_j^+ a_q + h.c.` directly from the
    /// `(atom, mode, c)` couplings, without forming the dense Hamiltonian.
    pub fn from_couplings(layout: &SpaceLayout, couplings: &[(&str, &str, C64)]) -> Result<Self> {
        let counts = excitation_counts(layout);
        let n = counts.len();
        let max_count = counts.iter().copied().max().unwrap_or(0);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); max_count + 1];
        let mut slot = vec![0usize; n];
        for (i, &k) in counts.iter().enumerate() {
            slot[i] = members[k].len();
            members[k].push(i);
        }
        let mut mats: Vec<CMatrix> = members.iter().map(|m| CMatrix::zeros(m.len(), m.len())).collect();
        for (i, term) in coupling_terms(layout, couplings)? {
            let (r, c, v) = term;
            let k = counts[i];
            mats[k][(slot[r], slot[c])] += v;
            mats[k][(slot[c], slot[r])] += v.conj();
        }
        let blocks = members
            .into_iter()
            .zip(mats)
            .filter(|(m, _)| !m.is_empty())
            .map(|(indices, sub)| {
                let (energies, vectors) = hermitian_eigh(&sub)?;
                Ok(Block { indices, energies, vectors })
            })
            .collect::<Result<_>>()?;
        Ok(Self { layout: layout.clone(), blocks })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn phased(block: &Block, t: f64) -> CMatrix {
        let mut v = block.vectors.clone();
        for (k, &e) in block.energies.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            v.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
        v
    }

    /// Dense `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> Operator {
        let n = self.layout.total_dim();
        let mut u = CMatrix::zeros(n, n);
        for block in &self.blocks {
            let sub = Self::phased(block, t) * block.vectors.adjoint();
            for (r, &i) in block.indices.iter().enumerate() {
                for (c, &j) in block.indices.iter().enumerate() {
                    u[(i, j)] = sub[(r, c)];
                }
            }
        }
        Operator::new(self.layout.clone(), u).expect("square")
    }

    /// Eigenbasis coefficients of `columns`, for repeated evaluation.
    pub fn prepare(&self, columns: &CMatrix) -> Prepared {
        let coeffs = self
            .blocks
            .iter()
            .map(|b| {
                let rows = CMatrix::from_fn(b.indices.len(), columns.ncols(), |r, c| columns[(b.indices[r], c)]);
                b.vectors.adjoint() * rows
            })
            .collect();
        Prepared { coeffs, rank: columns.ncols() }
    }

    /// `e^{-iHt} C` from prepared coefficients.
    pub fn evolve(&self, prepared: &Prepared, t: f64) -> CMatrix {
        let mut out = CMatrix::from_element(self.layout.total_dim(), prepared.rank, ZERO);
        for (block, coeff) in self.blocks.iter().zip(&prepared.coeffs) {
            let mut c = coeff.clone();
            for (k, &e) in block.energies.iter().enumerate() {
                let phase = C64::from_polar(1.0, -e * t);
                c.row_mut(k).iter_mut().for_each(|z| *z *= phase);
            }
            let rows = &block.vectors * c;
            for (r, &i) in block.indices.iter().enumerate() {
                for col in 0..prepared.rank {
                    out[(i, col)] = rows[(r, col)];
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Prepared {
    coeffs: Vec<CMatrix>,
    rank: usize,
}

/// `e^{-iHt}` by block-wise eigendecomposition.
pub fn propagator_block_exact(h: &Operator, t: f64) -> Result<Operator> {
    Ok(BlockExact::new(h)?.propagator(t))
}

/// Nonzero matrix elements `(r, c, v)` of `c sigma_j^+ a_q` for every
/// coupling, keyed by the column index `c`.
pub(crate) fn coupling_terms(
    layout: &SpaceLayout,
    couplings: &[(&str, &str, C64)],
) -> Result<Vec<(usize, (usize, usize, C64))>> {
    let strides = layout.strides();
    let mut resolved = Vec::with_capacity(couplings.len());
    for &(atom, mode, c) in couplings {
        let (j, q) = (layout.position(atom)?, layout.position(mode)?);
        if layout.dims()[j] != 2 {
            return Err(Error::LayoutMismatch(format!("{atom} is not a two-level subsystem")));
        }
        resolved.push((j, q, c));
    }
    let mut terms = Vec::new();
    for col in 0..layout.total_dim() {
        let digits = layout.decode(col);
        for &(j, q, c) in &resolved {
            // sigma^+ takes g (digit 1) to e (digit 0); a lowers the photon number
            if digits[j] == 1 && digits[q] >= 1 {
                let row = col - strides[j] - strides[q];
                terms.push((col, (row, col, c * (digits[q] as f64).sqrt())));
            }
        }
    }
    Ok(terms)
}
