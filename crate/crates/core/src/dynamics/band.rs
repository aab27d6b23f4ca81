//! Single-mode operators with one nonzero diagonal band.
//!
//! Every block of the closed-form propagators is a product of ladder
//! operators and functions of the number operator, so it maps `|n>` to a
//! multiple of `|n + shift>`. Products stay in this form and cost `O(d)`.

use crate::hilbert::{CMatrix, CVector, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    /// `op |n> = coeffs[n] |n + shift>`; entries whose target leaves the
    /// space are zero.
    pub shift: isize,
    pub coeffs: Vec<C64>,
}

impl Band {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn zeros(dim: usize) -> Self {
        Self { shift: 0, coeffs: vec![ZERO; dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(dim, |_| 1.0)
    }

    pub fn diag(dim: usize, f: impl Fn(usize) -> f64) -> Self {
        Self { shift: 0, coeffs: (0..dim).map(|n| C64::new(f(n), 0.0)).collect() }
    }

    /// Truncated annihilation operator.
    pub fn lower(dim: usize) -> Self {
        Self { shift: -1, coeffs: (0..dim).map(|n| C64::new((n as f64).sqrt(), 0.0)).collect() }
    }

    /// Truncated creation operator; `|d-1>` is annihilated.
    pub fn raise(dim: usize) -> Self {
        let coeffs = (0..dim)
            .map(|n| if n + 1 < dim { C64::new(((n + 1) as f64).sqrt(), 0.0) } else { ZERO })
            .collect();
        Self { shift: 1, coeffs }
    }

    fn target(&self, n: usize) -> Option<usize> {
        let m = n as isize + self.shift;
        (m >= 0 && (m as usize) < self.dim()).then_some(m as usize)
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Band) -> Band {
        debug_assert_eq!(self.dim(), other.dim());
        let coeffs = (0..other.dim())
            .map(|n| match other.target(n) {
                Some(m) if other.coeffs[n] != ZERO => other.coeffs[n] * self.coeffs[m],
                _ => ZERO,
            })
            .collect();
        Band { shift: self.shift + other.shift, coeffs }
    }

    pub fn scale(&self, z: C64) -> Band {
        Band { shift: self.shift, coeffs: self.coeffs.iter().map(|c| c * z).collect() }
    }

    /// Sum of two bands with the same shift.
    pub fn add(&self, other: &Band) -> Band {
        assert_eq!(self.shift, other.shift, "bands with different shifts");
        Band {
            shift: self.shift,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Band) -> Band {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `out[n + shift] += coeffs[n] * input[n]` over strided views.
    #[inline]
    pub(crate) fn apply_add(&self, input: &[C64], out: &mut [C64]) {
        let d = self.dim() as isize;
        let lo = (-self.shift).max(0) as usize;
        let hi = (d - self.shift.max(0)).max(0) as usize;
        for n in lo..hi {
            let c = self.coeffs[n];
            out[(n as isize + self.shift) as usize] += c * input[n];
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim());
        self.apply_add(v.as_slice(), out.as_mut_slice());
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for n in 0..self.dim() {
            if let Some(r) = self.target(n) {
                m[(r, n)] = self.coeffs[n];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, creation, max_abs};

    #[test]
    fn ladder_bands_match_dense() {
        for d in 2..7 {
            assert!(max_abs(&(Band::lower(d).to_dense() - annihilation(d).unwrap().matrix())) < 1e-15);
            assert!(max_abs(&(Band::raise(d).to_dense() - creation(d).unwrap().matrix())) < 1e-15);
        }
    }

    #[test]
    fn products_match_dense_products() {
        let d = 6;
        let f = Band::diag(d, |n| (n as f64 + 0.5).sin());
        let words = [
            vec![Band::lower(d), f.clone(), Band::raise(d)],
            vec![Band::raise(d), Band::raise(d), f.clone()],
            vec![f.clone(), Band::lower(d), Band::lower(d)],
            vec![Band::raise(d), f.clone(), Band::lower(d)],
        ];
        for word in words {
            let band = word.iter().skip(1).fold(word[0].clone(), |acc, b| acc.mul(b));
            let dense = word.iter().skip(1).fold(word[0].to_dense(), |acc, b| acc * b.to_dense());
            assert!(max_abs(&(band.to_dense() - dense)) < 1e-14);
        }
    }

    #[test]
    fn apply_matches_dense() {
        let d = 5;
        let v = CVector::from_fn(d, |i, _| C64::new(i as f64 + 1.0, -(i as f64)));
        for b in [Band::lower(d), Band::raise(d), Band::lower(d).mul(&Band::lower(d))] {
            assert!((b.apply(&v) - b.to_dense() * &v).norm() < 1e-14);
        }
    }
}
