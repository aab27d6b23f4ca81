//! Two-qubit concurrence and entanglement of formation, negativity across an
//! arbitrary bipartition, and the closed-form negativities of the DJC model
//! for weak two-mode squeezing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, partial_transpose_matrix, CMatrix, DensityMatrix, StateVector, C64, ZERO};
use crate::linalg::{eigenvalues, hermitian_eigenvalues, hermitian_eigh, singular_values};
use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Measure {
    Concurrence,
    Eof,
    Negativity,
}

/// A measured value together with what was measured and across which cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub measure: Measure,
    pub bipartition: String,
}

impl MeasureResult {
    pub fn concurrence(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self { value: concurrence(rho)?, measure: Measure::Concurrence, bipartition: cut_name(rho, 1) })
    }

    pub fn eof(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self { value: eof(concurrence(rho)?)?, measure: Measure::Eof, bipartition: cut_name(rho, 1) })
    }

    pub fn negativity(rho: &DensityMatrix, cut: &[&str]) -> Result<Self> {
        let value = negativity(rho, cut)?;
        let labels = rho.layout().labels();
        let rest: Vec<&str> = labels.iter().map(String::as_str).filter(|l| !cut.contains(l)).collect();
        Ok(Self { value, measure: Measure::Negativity, bipartition: format!("{} | {}", cut.join(","), rest.join(",")) })
    }
}

fn cut_name(rho: &DensityMatrix, at: usize) -> String {
    let labels = rho.layout().labels();
    format!("{} | {}", labels[..at].join(","), labels[at..].join(","))
}

fn check_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.layout().dims() != [2, 2] {
        return Err(Error::LayoutMismatch(format!(
            "concurrence needs two qubits, got dims {:?}",
            rho.layout().dims()
        )));
    }
    Ok(())
}

/// `(sigma_y x sigma_y) rho^* (sigma_y x sigma_y)` in the basis
/// `{ee, eg, ge, gg}`.
pub fn spin_flip(rho: &CMatrix) -> CMatrix {
    // sigma_y x sigma_y is antidiagonal with signs (-1, 1, 1, -1)
    let sign = [-1.0, 1.0, 1.0, -1.0];
    CMatrix::from_fn(4, 4, |i, j| rho[(3 - i, 3 - j)].conj() * (sign[i] * sign[j]))
}

/// Square roots of the eigenvalues of `rho rho~`, in decreasing order.
///
/// The spectrum of `rho rho~` is checked (imaginary parts, negativity), but
/// the roots are taken as the singular values of `C^T (sigma_y x sigma_y) C`
/// for `rho = C C^dag`, which are the same numbers without the square root
/// of eigenvalue roundoff: a zero eigenvalue computed as 1e-17 would
/// otherwise contribute 3e-9.
fn wootters_roots(rho: &DensityMatrix) -> Result<[f64; 4]> {
    check_two_qubits(rho)?;
    let m = rho.matrix();
    let product = m * spin_flip(m);
    for lambda in eigenvalues(&product)? {
        if lambda.im.abs() > tolerances::EIGEN_IMAG {
            return Err(Error::ComplexEigenvalue(lambda.im));
        }
        if lambda.re < -tolerances::PSD {
            return Err(Error::NotPositive(lambda.re));
        }
    }
    let (weights, vectors) = hermitian_eigh(m)?;
    if let Some(&w) = weights.iter().find(|&&w| w < -tolerances::PSD) {
        return Err(Error::NotPositive(w));
    }
    let c = CMatrix::from_fn(4, 4, |i, k| vectors[(i, k)] * weights[k].max(0.0).sqrt());
    let flip = CMatrix::from_fn(4, 4, |i, j| {
        // sigma_y x sigma_y
        let sign = [-1.0, 1.0, 1.0, -1.0];
        if i + j == 3 {
            C64::new(sign[i], 0.0)
        } else {
            ZERO
        }
    });
    let tau = c.transpose() * flip * &c;
    let values = singular_values(&tau)?;
    let mut roots = [0.0; 4];
    roots.copy_from_slice(&values[..4]);
    Ok(roots)
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, clamped to `[0, 1]`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence_margin(rho)?.clamp(0.0, 1.0))
}

/// `l1 - l2 - l3 - l4` before clamping at zero. Negative values measure how
/// far a separable state is from the entangled region, which gives
/// root-finders a signed quantity to bracket.
pub fn concurrence_margin(rho: &DensityMatrix) -> Result<f64> {
    let l = wootters_roots(rho)?;
    Ok(l[0] - l[1] - l[2] - l[3])
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation `h((1 + sqrt(1 - C^2)) / 2)`.
pub fn eof(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidArgument(format!("concurrence must lie in [0, 1], got {c}")));
    }
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt())))
}

/// `(||rho^{T_cut}||_1 - 1) / 2`, transposing every subsystem in `cut`.
pub fn negativity(rho: &DensityMatrix, cut: &[&str]) -> Result<f64> {
    let layout = rho.layout();
    let positions = layout.positions_of(cut)?;
    if positions.is_empty() || positions.len() == layout.len() {
        return Err(Error::InvalidArgument(format!(
            "cut {cut:?} does not split {:?}",
            layout.labels()
        )));
    }
    let mut m = rho.matrix().clone();
    for label in cut {
        m = partial_transpose_matrix(layout, &m, label)?;
    }
    let norm: f64 = hermitian_eigenvalues(&m)?.iter().map(|l| l.abs()).sum();
    Ok((0.5 * (norm - rho.trace())).max(0.0))
}

/// Atom-atom and mode-mode negativities of a pure state on
/// `(atom1, atom2, mode1, mode2)`.
pub fn pure_state_negativities(state: &StateVector) -> Result<(f64, f64)> {
    let labels: Vec<&str> = state.layout().labels().iter().map(String::as_str).collect();
    if labels.len() != 4 || state.layout().dims()[..2] != [2, 2] {
        return Err(Error::LayoutMismatch(format!("expected two atoms and two modes, got {labels:?}")));
    }
    let rho = state.to_density();
    let atoms = partial_trace(&rho, &labels[..2])?;
    let fields = partial_trace(&rho, &labels[2..])?;
    Ok((negativity(&atoms, &labels[..1])?, negativity(&fields, &labels[2..3])?))
}

/// Closed-form `(N_atoms, N_fields)` for two excited atoms in a weakly
/// two-mode-squeezed DJC field, from the four lowest-energy states:
/// `|min(s1^2 c1^2 - xi s1^2 c2^2, 0)|` and `|min(s1^2 c1^2 - xi c1^2 c2^2, 0)|`
/// with `s1 = sin(sqrt2 gt)`, `c1 = cos(sqrt2 gt)`, `c2 = cos(2 gt)`.
pub fn small_squeezing_negativities(xi: f64, gt: f64) -> (f64, f64) {
    let (s1, c1) = (2f64.sqrt() * gt).sin_cos();
    let c2 = (2.0 * gt).cos();
    let (s1, c1, c2) = (s1 * s1, c1 * c1, c2 * c2);
    let atoms = (s1 * c1 - xi * s1 * c2).min(0.0).abs();
    let fields = (s1 * c1 - xi * c1 * c2).min(0.0).abs();
    (atoms, fields)
}
