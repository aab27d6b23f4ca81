//! Truncated Fock-space and qubit tensor algebra.
//!
//! Composite indices are row-major over [`SpaceLayout::dims`]: the first
//! subsystem is the most significant digit. Atoms use the basis order
//! `(e, g)`, so the two-atom basis reads `{ee, eg, ge, gg}`; modes use
//! ascending Fock index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_eigh};
use crate::tolerances;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ATOM1: &str = "atom1";
pub const ATOM2: &str = "atom2";
/// Original field modes.
pub const F1: &str = "F1";
pub const F2: &str = "F2";
/// Transformed modes `A1 = (a1 + a2)/sqrt2`, `A2 = (a1 - a2)/sqrt2`.
pub const TF1: &str = "TF1";
pub const TF2: &str = "TF2";

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Ordered subsystem dimensions with unique labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SpaceLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let (labels, dims): (Vec<String>, Vec<usize>) =
            parts.into_iter().map(|(l, d)| (l.into(), d)).unzip();
        if dims.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one subsystem".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "subsystem `{}` has dimension 0",
                labels[pos]
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidArgument(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { dims, labels })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// `(atom1, atom2)`.
    pub fn atoms() -> Self {
        Self::new([(ATOM1, 2), (ATOM2, 2)]).expect("static layout")
    }

    /// `(atom1, atom2, mode)` with one field mode of the given cutoff.
    pub fn atoms_one_mode(mode: &str, cutoff: usize) -> Result<Self> {
        Self::new([(ATOM1, 2), (ATOM2, 2), (mode, cutoff)])
    }

    /// `(atom1, atom2, mode1, mode2)`.
    pub fn atoms_two_modes(modes: [&str; 2], cutoff: usize) -> Result<Self> {
        Self::new([(ATOM1, 2), (ATOM2, 2), (modes[0], cutoff), (modes[1], cutoff)])
    }

    pub fn two_modes(modes: [&str; 2], cutoff: usize) -> Result<Self> {
        Self::new([(modes[0], cutoff), (modes[1], cutoff)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Row-major strides, one per subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Per-subsystem digits of a composite index.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            digits[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&d, &n)| acc * n + d)
    }

    /// Sub-layout made of the given subsystem positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> SpaceLayout {
        SpaceLayout {
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
            labels: positions.iter().map(|&p| self.labels[p].clone()).collect(),
        }
    }

    pub fn concat(&self, other: &SpaceLayout) -> Result<SpaceLayout> {
        Self::new(
            self.labels
                .iter()
                .cloned()
                .zip(self.dims.iter().copied())
                .chain(other.labels.iter().cloned().zip(other.dims.iter().copied())),
        )
    }

    /// Same dimensions, new labels.
    pub fn relabel(&self, labels: &[&str]) -> Result<SpaceLayout> {
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: labels.len() });
        }
        Self::new(labels.iter().copied().zip(self.dims.iter().copied()))
    }

    /// Sorted, deduplicated positions of `labels`.
    pub fn positions_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut positions = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        positions.sort_unstable();
        positions.dedup();
        Ok(positions)
    }
}

/// Dense complex square matrix acting on a [`SpaceLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { layout, matrix })
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: CMatrix::identity(n, n) }
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: CMatrix::zeros(n, n) }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.layout.dims(),
                other.layout.dims()
            )));
        }
        Ok(())
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Self { layout: self.layout.clone(), matrix: &self.matrix * factor }
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        Ok(Self {
            layout: self.layout.concat(&other.layout)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// `max |H - H^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `max |U^dag U - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)))
    }

    pub fn apply(&self, state: &StateVector) -> Result<CVector> {
        if self.layout.dims() != state.layout.dims() {
            return Err(Error::LayoutMismatch("operator and state".into()));
        }
        Ok(&self.matrix * &state.vector)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Ladder operator with `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(cutoff: usize) -> Result<Operator> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!("cutoff must be >= 2, got {cutoff}")));
    }
    let mut m = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(SpaceLayout::single("mode", cutoff)?, m)
}

pub fn creation(cutoff: usize) -> Result<Operator> {
    Ok(annihilation(cutoff)?.adjoint())
}

pub fn number(cutoff: usize) -> Result<Operator> {
    let a = annihilation(cutoff)?;
    a.adjoint().compose(&a)
}

/// `|e> -> |g>` in the `(e, g)` basis.
pub fn sigma_minus() -> Operator {
    let mut m = CMatrix::zeros(2, 2);
    m[(1, 0)] = ONE;
    Operator::new(SpaceLayout::single("atom", 2).expect("static"), m).expect("2x2")
}

pub fn sigma_plus() -> Operator {
    sigma_minus().adjoint()
}

/// Kronecker product of `op` at subsystem `which` with identities elsewhere.
pub fn embed(op: &Operator, layout: &SpaceLayout, which: &str) -> Result<Operator> {
    let pos = layout.position(which)?;
    let dim = layout.dims()[pos];
    if op.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
    }
    let before: usize = layout.dims()[..pos].iter().product();
    let after: usize = layout.dims()[pos + 1..].iter().product();
    let m = CMatrix::identity(before, before)
        .kronecker(&op.matrix)
        .kronecker(&CMatrix::identity(after, after));
    Operator::new(layout.clone(), m)
}

/// Pure state over a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SpaceLayout,
    vector: CVector,
}

impl StateVector {
    /// Accepts only vectors of unit norm (within [`tolerances::NORM`]).
    pub fn new(layout: SpaceLayout, vector: CVector) -> Result<Self> {
        let n = layout.total_dim();
        if vector.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: vector.len() });
        }
        let dev = (vector.norm() - 1.0).abs();
        if dev > tolerances::NORM {
            return Err(Error::BadNorm(dev));
        }
        Ok(Self { layout, vector })
    }

    pub fn normalized(layout: SpaceLayout, vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Self::new(layout, vector / C64::new(norm, 0.0))
    }

    pub fn basis(layout: SpaceLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() || digits.iter().zip(layout.dims()).any(|(&d, &n)| d >= n) {
            return Err(Error::InvalidArgument(format!("basis digits {digits:?} out of range")));
        }
        let mut v = CVector::zeros(layout.total_dim());
        v[layout.encode(digits)] = ONE;
        Ok(Self { layout, vector: v })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn into_vector(self) -> CVector {
        self.vector
    }

    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        Ok(Self {
            layout: self.layout.concat(&other.layout)?,
            vector: self.vector.kronecker(&other.vector),
        })
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.vector.dotc(&other.vector)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            layout: self.layout.clone(),
            matrix: &self.vector * self.vector.adjoint(),
        }
    }

    pub fn relabel(self, labels: &[&str]) -> Result<Self> {
        Ok(Self { layout: self.layout.relabel(labels)?, vector: self.vector })
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix over a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(layout: SpaceLayout, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_trusted(layout, matrix)?;
        for &lambda in rho.eigenvalues()?.iter() {
            if lambda < -tolerances::PSD {
                return Err(Error::NotPositive(lambda));
            }
        }
        Ok(rho)
    }

    /// Skips the eigenvalue check; used for matrices that are positive by
    /// construction (e.g. `C C^dag`).
    pub(crate) fn from_trusted(layout: SpaceLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let herm = max_abs(&(&matrix - matrix.adjoint()));
        if herm > tolerances::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let tr = (matrix.trace().re - 1.0).abs();
        if tr > tolerances::TRACE {
            return Err(Error::BadTrace(tr));
        }
        // Exact Hermitian symmetrization removes the remaining roundoff.
        let matrix = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { layout, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self {
            layout: self.layout.concat(&other.layout)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_with_pure(&self, state: &StateVector) -> Result<f64> {
        if state.layout.dims() != self.layout.dims() {
            return Err(Error::LayoutMismatch("fidelity".into()));
        }
        Ok(state.vector.dotc(&(&self.matrix * &state.vector)).re)
    }

    /// `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::LayoutMismatch("trace distance".into()));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigenvalues(&diff)?.iter().map(|l| l.abs()).sum::<f64>())
    }

    pub fn relabel(self, labels: &[&str]) -> Result<Self> {
        Ok(Self { layout: self.layout.relabel(labels)?, matrix: self.matrix })
    }
}

/// Reduced density matrix on `keep`, in the subsystems' original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace needs a nonempty keep set".into()));
    }
    let layout = rho.layout();
    let kept = layout.positions_of(keep)?;
    let traced: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();
    let kept_layout = layout.select(&kept);
    let (dk, dt) = (kept_layout.total_dim(), layout.select(&traced).total_dim());

    let strides = layout.strides();
    let offsets = |positions: &[usize], sub: &SpaceLayout, idx: usize| -> usize {
        sub.decode(idx)
            .iter()
            .zip(positions)
            .map(|(&digit, &p)| digit * strides[p])
            .sum()
    };
    let traced_layout = layout.select(&traced);
    let kept_off: Vec<usize> = (0..dk).map(|i| offsets(&kept, &kept_layout, i)).collect();
    let traced_off: Vec<usize> = (0..dt).map(|k| offsets(&traced, &traced_layout, k)).collect();

    let m = rho.matrix();
    let out = CMatrix::from_fn(dk, dk, |i, j| {
        traced_off
            .iter()
            .map(|&k| m[(kept_off[i] + k, kept_off[j] + k)])
            .sum()
    });
    DensityMatrix::from_trusted(kept_layout, out)
}

/// `<j,k|rho^T|l,q> = <j,q|rho|l,k>` on the indices of `subsystem`.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: &str) -> Result<Operator> {
    partial_transpose_matrix(rho.layout(), rho.matrix(), subsystem)
        .and_then(|m| Operator::new(rho.layout().clone(), m))
}

pub(crate) fn partial_transpose_matrix(
    layout: &SpaceLayout,
    m: &CMatrix,
    subsystem: &str,
) -> Result<CMatrix> {
    let pos = layout.position(subsystem)?;
    let stride = layout.strides()[pos];
    let dim = layout.dims()[pos];
    let n = layout.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for c in 0..n {
        let dc = (c / stride) % dim;
        for r in 0..n {
            let dr = (r / stride) % dim;
            let nr = r + dc * stride - dr * stride;
            let nc = c + dr * stride - dc * stride;
            out[(nr, nc)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Mixed state stored as `rho = C C^dag`; each column is a
/// sub-normalized pure component.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    layout: SpaceLayout,
    columns: CMatrix,
}

/// Eigenvalues below this are dropped when decomposing a density matrix.
const ENSEMBLE_DROP: f64 = 1e-15;

impl Ensemble {
    pub fn from_state(state: &StateVector) -> Self {
        Self {
            layout: state.layout.clone(),
            columns: CMatrix::from_column_slice(state.vector.len(), 1, state.vector.as_slice()),
        }
    }

    /// Eigen-decomposition of `rho`; negligible weights are dropped.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.dim();
        let m = rho.matrix();
        let is_diagonal = (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO));
        let mut cols: Vec<CVector> = Vec::new();
        if is_diagonal {
            for i in 0..n {
                let w = m[(i, i)].re;
                if w > ENSEMBLE_DROP {
                    let mut v = CVector::zeros(n);
                    v[i] = C64::new(w.sqrt(), 0.0);
                    cols.push(v);
                }
            }
        } else {
            let (values, vectors) = hermitian_eigh(m)?;
            for (k, &w) in values.iter().enumerate() {
                if w > ENSEMBLE_DROP {
                    cols.push(vectors.column(k) * C64::new(w.sqrt(), 0.0));
                }
            }
        }
        Ok(Self::from_columns(rho.layout.clone(), &cols))
    }

    /// Weighted pure components `sum_k w_k |v_k><v_k|`.
    pub fn from_weighted(layout: SpaceLayout, parts: &[(f64, CVector)]) -> Result<Self> {
        let n = layout.total_dim();
        let mut cols = Vec::with_capacity(parts.len());
        for (w, v) in parts {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
            if *w < 0.0 {
                return Err(Error::InvalidArgument("negative ensemble weight".into()));
            }
            if *w > 0.0 {
                cols.push(v * C64::new(w.sqrt(), 0.0));
            }
        }
        Ok(Self::from_columns(layout, &cols))
    }

    fn from_columns(layout: SpaceLayout, cols: &[CVector]) -> Self {
        let n = layout.total_dim();
        let columns = if cols.is_empty() {
            CMatrix::zeros(n, 0)
        } else {
            CMatrix::from_columns(cols)
        };
        Self { layout, columns }
    }

    pub(crate) fn from_matrix(layout: SpaceLayout, columns: CMatrix) -> Self {
        debug_assert_eq!(columns.nrows(), layout.total_dim());
        Self { layout, columns }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_pure(&self) -> bool {
        self.columns.ncols() == 1
    }

    pub fn trace(&self) -> f64 {
        self.columns.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tensor product; every pair of components becomes one component.
    pub fn kron(&self, other: &Ensemble) -> Result<Ensemble> {
        let layout = self.layout.concat(&other.layout)?;
        let mut cols = Vec::with_capacity(self.rank() * other.rank());
        for a in self.columns.column_iter() {
            for b in other.columns.column_iter() {
                cols.push(a.kronecker(&b));
            }
        }
        Ok(Self::from_columns(layout, &cols))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_trusted(self.layout.clone(), &self.columns * self.columns.adjoint())
    }

    /// Weight of the basis states selected by `pred` (applied to composite indices).
    pub fn population_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        let mut total = 0.0;
        for i in (0..self.columns.nrows()).filter(|&i| pred(i)) {
            total += self.columns.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        total
    }

    pub fn relabel(self, labels: &[&str]) -> Result<Self> {
        Ok(Self { layout: self.layout.relabel(labels)?, columns: self.columns })
    }
}

/// Reduced matrix on the leading `lead` composite dimension of column data:
/// `out[a, b] = sum_col sum_f psi[a*rest + f] conj(psi[b*rest + f])`.
pub(crate) fn trace_trailing(columns: &CMatrix, lead: usize) -> CMatrix {
    let rest = columns.nrows() / lead;
    let mut out = CMatrix::zeros(lead, lead);
    for col in columns.column_iter() {
        for a in 0..lead {
            let ra = col.rows(a * rest, rest);
            for b in a..lead {
                let rb = col.rows(b * rest, rest);
                let v = rb.dotc(&ra);
                out[(a, b)] += v;
            }
        }
    }
    for a in 0..lead {
        for b in 0..a {
            out[(a, b)] = out[(b, a)].conj();
        }
        out[(a, a)] = C64::new(out[(a, a)].re, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_small_cutoffs() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.matrix()[(0, 1)], ONE);
        assert_eq!(a.matrix()[(1, 0)], ZERO);
        assert_eq!(a.matrix()[(0, 0)], ZERO);
        let a4 = annihilation(4).unwrap();
        assert_abs_diff_eq!(a4.matrix()[(2, 3)].re, 3f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(annihilation(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn truncated_commutator_exposes_cutoff() {
        for cutoff in 2..9 {
            let a = annihilation(cutoff).unwrap();
            let comm = a.commutator(&a.adjoint()).unwrap();
            for i in 0..cutoff {
                for j in 0..cutoff {
                    let expected = match (i == j, i == cutoff - 1) {
                        (true, false) => 1.0,
                        (true, true) => 1.0 - cutoff as f64,
                        _ => 0.0,
                    };
                    assert!((comm.matrix()[(i, j)] - c(expected)).norm() < 1e-13, "cutoff {cutoff} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn sigma_minus_action() {
        let sm = sigma_minus();
        let e = CVector::from_vec(vec![ONE, ZERO]);
        let g = CVector::from_vec(vec![ZERO, ONE]);
        assert_eq!(sm.matrix() * &e, g);
        assert_eq!(sm.matrix() * &g, CVector::zeros(2));
        let proj = sigma_plus().compose(&sm).unwrap();
        assert_eq!(proj.matrix(), &(&e * e.adjoint()));
    }

    #[test]
    fn layout_decode_encode_roundtrip() {
        let layout = SpaceLayout::atoms_two_modes([F1, F2], 3).unwrap();
        assert_eq!(layout.total_dim(), 36);
        for idx in 0..layout.total_dim() {
            assert_eq!(layout.encode(&layout.decode(idx)), idx);
        }
        assert_eq!(layout.decode(1), vec![0, 0, 0, 1]);
        assert_eq!(layout.strides(), vec![18, 9, 3, 1]);
        assert!(SpaceLayout::new([("x", 2), ("x", 3)]).is_err());
        assert!(SpaceLayout::new([("x", 0)]).is_err());
    }

    #[test]
    fn embed_matches_kronecker_order() {
        let layout = SpaceLayout::atoms();
        let e = embed(&sigma_minus(), &layout, ATOM1).unwrap();
        let expected = sigma_minus().matrix().kronecker(&CMatrix::identity(2, 2));
        assert_eq!(e.matrix(), &expected);
        assert!(matches!(embed(&sigma_minus(), &layout, "nope"), Err(Error::UnknownLabel(_))));
        let a3 = annihilation(3).unwrap();
        assert!(matches!(embed(&a3, &layout, ATOM2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn embed_identity_is_identity() {
        let layout = SpaceLayout::atoms_two_modes([F1, F2], 3).unwrap();
        let id = Operator::identity(SpaceLayout::single("mode", 3).unwrap());
        let e = embed(&id, &layout, F2).unwrap();
        assert_eq!(e.matrix(), &CMatrix::identity(36, 36));
    }

    #[test]
    fn embedded_ladder_acts_on_second_mode() {
        let layout = SpaceLayout::atoms_two_modes([F1, F2], 4).unwrap();
        let a = embed(&annihilation(4).unwrap(), &layout, F2).unwrap();
        let psi = StateVector::basis(layout.clone(), &[0, 0, 0, 1]).unwrap();
        let out = a.apply(&psi).unwrap();
        let expected = StateVector::basis(layout, &[0, 0, 0, 0]).unwrap();
        assert_eq!(&out, expected.vector());
    }

    #[test]
    fn embed_respects_composition() {
        let layout = SpaceLayout::atoms_one_mode(TF1, 5).unwrap();
        let a = annihilation(5).unwrap();
        let ad = a.adjoint();
        let lhs = embed(&a.compose(&ad).unwrap(), &layout, TF1).unwrap();
        let rhs = embed(&a, &layout, TF1)
            .unwrap()
            .compose(&embed(&ad, &layout, TF1).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    fn bell_phi() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        let v = CVector::from_vec(vec![c(s), ZERO, ZERO, c(s)]);
        StateVector::new(SpaceLayout::atoms(), v).unwrap().to_density()
    }

    #[test]
    fn maximally_entangled_marginal() {
        let r = partial_trace(&bell_phi(), &[ATOM1]).unwrap();
        assert_eq!(r.layout().labels(), &[ATOM1.to_string()]);
        let half = CMatrix::identity(2, 2) * c(0.5);
        assert!(max_abs(&(r.matrix() - half)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let ra = DensityMatrix::new(
            SpaceLayout::single("A", 2).unwrap(),
            CMatrix::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]),
        )
        .unwrap();
        let rb = DensityMatrix::new(
            SpaceLayout::single("B", 3).unwrap(),
            CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5), c(0.25), c(0.25)])),
        )
        .unwrap();
        let joint = ra.kron(&rb).unwrap();
        let back = partial_trace(&joint, &["A"]).unwrap();
        assert!(max_abs(&(back.matrix() - ra.matrix())) < 1e-15);
        let back_b = partial_trace(&joint, &["B"]).unwrap();
        assert!(max_abs(&(back_b.matrix() - rb.matrix())) < 1e-15);
        assert!(partial_trace(&joint, &[]).is_err());
        assert!(partial_trace(&joint, &["C"]).is_err());
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let pt = partial_transpose(&bell_phi(), ATOM2).unwrap();
        let eig = hermitian_eigenvalues(pt.matrix()).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in eig.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let layout = SpaceLayout::new([("A", 2), ("B", 3)]).unwrap();
        let v = CVector::from_fn(6, |i, _| C64::new(i as f64 + 1.0, (i * i) as f64 * 0.3));
        let rho = StateVector::normalized(layout.clone(), v).unwrap().to_density();
        let once = partial_transpose(&rho, "B").unwrap();
        let twice = partial_transpose_matrix(&layout, once.matrix(), "B").unwrap();
        assert!(max_abs(&(twice - rho.matrix())) < 1e-15);
        assert!(once.hermiticity_error() < 1e-15);
        assert_abs_diff_eq!(once.matrix().trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn product_state_transpose_stays_positive() {
        let layout = SpaceLayout::atoms();
        let psi = StateVector::normalized(
            layout,
            CVector::from_vec(vec![c(1.0), C64::new(0.0, 1.0), c(0.5), C64::new(0.0, 0.5)]),
        )
        .unwrap();
        let pt = partial_transpose(&psi.to_density(), ATOM2).unwrap();
        assert!(hermitian_eigenvalues(pt.matrix()).unwrap()[0] > -1e-14);
    }

    #[test]
    fn density_validation() {
        let layout = SpaceLayout::single("A", 2).unwrap();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(layout.clone(), bad_trace), Err(Error::BadTrace(_))));
        let not_psd = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(matches!(DensityMatrix::new(layout.clone(), not_psd), Err(Error::NotPositive(_))));
        let mut non_herm = CMatrix::identity(2, 2) * c(0.5);
        non_herm[(0, 1)] = c(0.1);
        assert!(matches!(DensityMatrix::new(layout, non_herm), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn ensemble_density_roundtrip() {
        let rho = bell_phi();
        let mixed = DensityMatrix::new(
            SpaceLayout::atoms(),
            rho.matrix() * c(0.6) + CMatrix::identity(4, 4) * c(0.1),
        )
        .unwrap();
        let ens = Ensemble::from_density(&mixed).unwrap();
        assert_eq!(ens.rank(), 4);
        let back = ens.to_density().unwrap();
        assert!(max_abs(&(back.matrix() - mixed.matrix())) < 1e-13);
        let reduced = trace_trailing(ens.columns(), 2);
        let expected = partial_trace(&mixed, &[ATOM1]).unwrap();
        assert!(max_abs(&(reduced - expected.matrix())) < 1e-13);
    }
}
