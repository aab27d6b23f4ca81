//! Closed-form propagators of the single-mode symmetric model and of one
//! Jaynes-Cummings pair, built block by block from ladder operators and
//! spectral functions of the number operator.

use crate::error::Result;
use crate::hilbert::{CMatrix, Operator, SpaceLayout, ATOM1, ATOM2, C64, TF1, TF2, ZERO};

use super::band::Band;

/// `sin(sqrt(k x) gt) / sqrt(x)`, continued to `sqrt(k) gt` at `x = 0`.
fn sin_over_sqrt(k: f64, x: f64, gt: f64) -> f64 {
    if x == 0.0 {
        k.sqrt() * gt
    } else {
        ((k * x).sqrt() * gt).sin() / x.sqrt()
    }
}

/// `e^{-iHt}` of `sqrt2 g [(s1+ + s2+) A + h.c.]` as a 4x4 grid of mode
/// operators in the atomic basis `{ee, eg, ge, gg}`.
#[derive(Clone, Debug)]
pub struct SmscPropagator {
    pub blocks: [[Band; 4]; 4],
}

impl SmscPropagator {
    pub fn new(gt: f64, cutoff: usize) -> Self {
        let d = cutoff;
        let a = Band::lower(d);
        let ad = Band::raise(d);
        // calA = A A^dag + A^dag A = 2n + 1 on the truncated space's interior
        let cal = |n: usize| 2.0 * n as f64 + 1.0;
        let cos_term = |n: usize| ((4.0 * cal(n)).sqrt() * gt).cos();
        let sin_frac = Band::diag(d, |n| ((4.0 * cal(n)).sqrt() * gt).sin() / (2.0 * cal(n)).sqrt());
        let inv = Band::diag(d, |n| 1.0 / cal(n));
        let cos_frac = Band::diag(d, |n| cos_term(n) / cal(n));
        let one = Band::identity(d);
        let minus_i = C64::new(0.0, -1.0);

        let s1 = a.mul(&sin_frac);
        let s2 = sin_frac.mul(&ad);
        let s3 = sin_frac.mul(&a);
        let s4 = ad.mul(&sin_frac);
        let c1 = one.sub(&a.mul(&inv).mul(&ad)).add(&a.mul(&cos_frac).mul(&ad));
        let c2 = a.mul(&cos_frac).mul(&a).sub(&a.mul(&inv).mul(&a));
        let c3 = Band::diag(d, |n| 0.5 * (cos_term(n) + 1.0));
        let c4 = Band::diag(d, |n| 0.5 * (cos_term(n) - 1.0));
        let c5 = ad.mul(&cos_frac).mul(&ad).sub(&ad.mul(&inv).mul(&ad));
        let c6 = one.sub(&ad.mul(&inv).mul(&a)).add(&ad.mul(&cos_frac).mul(&a));

        let (s1, s2, s3, s4) = (
            s1.scale(minus_i),
            s2.scale(minus_i),
            s3.scale(minus_i),
            s4.scale(minus_i),
        );
        let blocks = [
            [c1, s1.clone(), s1, c2],
            [s2.clone(), c3.clone(), c4.clone(), s3.clone()],
            [s2, c4, c3, s3],
            [c5, s4.clone(), s4, c6],
        ];
        Self { blocks }
    }

    pub fn cutoff(&self) -> usize {
        self.blocks[0][0].dim()
    }

    /// Applies the propagator to a vector on `(atom1, atom2, TF1)`.
    pub fn apply_slice(&self, input: &[C64], out: &mut [C64]) {
        let d = self.cutoff();
        out.iter_mut().for_each(|z| *z = ZERO);
        for (r, row) in self.blocks.iter().enumerate() {
            let (_, tail) = out.split_at_mut(r * d);
            let target = &mut tail[..d];
            for (c, band) in row.iter().enumerate() {
                band.apply_add(&input[c * d..(c + 1) * d], target);
            }
        }
    }

    pub fn apply_columns(&self, columns: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(columns.nrows(), columns.ncols());
        for (src, mut dst) in columns.column_iter().zip(out.column_iter_mut()) {
            self.apply_slice(src.as_slice(), dst.as_mut_slice());
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.cutoff();
        let mut m = CMatrix::zeros(4 * d, 4 * d);
        for (r, row) in self.blocks.iter().enumerate() {
            for (c, band) in row.iter().enumerate() {
                m.view_mut((r * d, c * d), (d, d)).copy_from(&band.to_dense());
            }
        }
        m
    }
}

/// Closed-form SMSC propagator on `(atom1, atom2, TF1)` with transformed
/// coupling `sqrt2 g`.
pub fn propagator_smsc_closed(t: f64, g: f64, cutoff: usize) -> Result<Operator> {
    let layout = SpaceLayout::atoms_one_mode(TF1, cutoff)?;
    Operator::new(layout, SmscPropagator::new(g * t, cutoff).to_dense())
}

/// One atom coupled to one mode with strength `sqrt2 g`, as a 2x2 grid of
/// mode operators in the atomic basis `(e, g)`.
#[derive(Clone, Debug)]
pub struct PairPropagator {
    pub blocks: [[Band; 2]; 2],
}

impl PairPropagator {
    pub fn new(gt: f64, cutoff: usize) -> Self {
        let d = cutoff;
        let minus_i = C64::new(0.0, -1.0);
        // cos(sqrt(2 A A^dag) gt) and cos(sqrt(2 A^dag A) gt)
        let c_1 = Band::diag(d, |n| ((2.0 * (n + 1) as f64).sqrt() * gt).cos());
        let c_2 = Band::diag(d, |n| ((2.0 * n as f64).sqrt() * gt).cos());
        let f_aad = Band::diag(d, |n| sin_over_sqrt(2.0, (n + 1) as f64, gt));
        let f_ada = Band::diag(d, |n| sin_over_sqrt(2.0, n as f64, gt));
        let s_1 = f_aad.mul(&Band::lower(d));
        // The function of A^dag A acts after A^dag.
        let s_2 = f_ada.mul(&Band::raise(d));
        Self { blocks: [[c_1, s_1.scale(minus_i)], [s_2.scale(minus_i), c_2]] }
    }

    /// Same as [`PairPropagator::new`] but with the lowering block written as
    /// `A^dag f(A^dag A)`, i.e. with the function evaluated before the
    /// creation operator.
    pub fn with_verbatim_lowering(gt: f64, cutoff: usize) -> Self {
        let mut p = Self::new(gt, cutoff);
        let f_ada = Band::diag(cutoff, |n| sin_over_sqrt(2.0, n as f64, gt));
        p.blocks[1][0] = Band::raise(cutoff).mul(&f_ada).scale(C64::new(0.0, -1.0));
        p
    }

    pub fn cutoff(&self) -> usize {
        self.blocks[0][0].dim()
    }

    /// Dense matrix on `(atom, mode)`.
    pub fn to_dense(&self) -> CMatrix {
        let d = self.cutoff();
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        for (r, row) in self.blocks.iter().enumerate() {
            for (c, band) in row.iter().enumerate() {
                m.view_mut((r * d, c * d), (d, d)).copy_from(&band.to_dense());
            }
        }
        m
    }

    /// Applies `first` on `(atom1, TF1)` and `second` on `(atom2, TF2)` to a
    /// vector on `(atom1, atom2, TF1, TF2)`.
    pub fn apply_both(first: &Self, second: &Self, input: &[C64], scratch: &mut [C64], out: &mut [C64]) {
        let d = first.cutoff();
        let dd = d * d;
        // pair 1: (atom1, TF1); index = ((a1*2 + a2)*d + n1)*d + n2
        scratch.iter_mut().for_each(|z| *z = ZERO);
        let mut line_in = vec![ZERO; d];
        let mut line_out = vec![ZERO; d];
        for a2 in 0..2 {
            for n2 in 0..d {
                for r in 0..2 {
                    line_out.iter_mut().for_each(|z| *z = ZERO);
                    for c in 0..2 {
                        let base = (c * 2 + a2) * dd + n2;
                        for n1 in 0..d {
                            line_in[n1] = input[base + n1 * d];
                        }
                        first.blocks[r][c].apply_add(&line_in, &mut line_out);
                    }
                    let base = (r * 2 + a2) * dd + n2;
                    for n1 in 0..d {
                        scratch[base + n1 * d] = line_out[n1];
                    }
                }
            }
        }
        // pair 2: (atom2, TF2), contiguous in n2
        out.iter_mut().for_each(|z| *z = ZERO);
        for a1 in 0..2 {
            for n1 in 0..d {
                for r in 0..2 {
                    let dst = (a1 * 2 + r) * dd + n1 * d;
                    for c in 0..2 {
                        let src = (a1 * 2 + c) * dd + n1 * d;
                        let (s, o) = (&scratch[src..src + d], &mut out[dst..dst + d]);
                        second.blocks[r][c].apply_add(s, o);
                    }
                }
            }
        }
    }

    /// Single-atom channel `X -> Tr_mode[U P (X (x) rho) P U^dag]` for a mode
    /// state `rho = F F^dag`, as a 4x4 matrix on row-major `vec(X)`. `P`
    /// removes `|e, d-1>`, whose excitation sector does not fit below the
    /// cutoff.
    pub fn channel(&self, field_columns: &CMatrix) -> CMatrix {
        let d = self.cutoff();
        let mut sup = CMatrix::zeros(4, 4);
        let mut kraus_cols = [vec![ZERO; 2 * d], vec![ZERO; 2 * d]];
        for f in field_columns.column_iter() {
            // column a of K_k: <., k| U |a, f>
            for (a, col) in kraus_cols.iter_mut().enumerate() {
                col.iter_mut().for_each(|z| *z = ZERO);
                let mut input = f.clone_owned();
                if a == 0 {
                    input[d - 1] = ZERO;
                }
                for r in 0..2 {
                    self.blocks[r][a].apply_add(input.as_slice(), &mut col[r * d..(r + 1) * d]);
                }
            }
            for k in 0..d {
                let kr = [
                    [kraus_cols[0][k], kraus_cols[1][k]],
                    [kraus_cols[0][d + k], kraus_cols[1][d + k]],
                ];
                // sup[(i j), (p q)] += K[i,p] conj(K[j,q])
                for i in 0..2 {
                    for j in 0..2 {
                        for p in 0..2 {
                            for q in 0..2 {
                                sup[(i * 2 + j, p * 2 + q)] += kr[i][p] * kr[j][q].conj();
                            }
                        }
                    }
                }
            }
        }
        sup
    }
}

/// Applies `L1 (x) L2` to a two-qubit density matrix, with each `Li` a 4x4
/// superoperator on row-major `vec` of a single-qubit operator.
pub fn apply_product_channel(l1: &CMatrix, l2: &CMatrix, rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(4, 4);
    for a1 in 0..2 {
        for b1 in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let mut acc = ZERO;
                    for p1 in 0..2 {
                        for q1 in 0..2 {
                            let w1 = l1[(a1 * 2 + b1, p1 * 2 + q1)];
                            if w1 == ZERO {
                                continue;
                            }
                            for p2 in 0..2 {
                                for q2 in 0..2 {
                                    acc += w1
                                        * l2[(a2 * 2 + b2, p2 * 2 + q2)]
                                        * rho[(p1 * 2 + p2, q1 * 2 + q2)];
                                }
                            }
                        }
                    }
                    out[(a1 * 2 + a2, b1 * 2 + b2)] = acc;
                }
            }
        }
    }
    out
}

/// Closed-form DJC propagator `U1 (x) U2` on `(atom1, atom2, TF1, TF2)`.
pub fn propagator_djc_closed(t: f64, g: f64, cutoff: usize) -> Result<Operator> {
    let layout = SpaceLayout::new([(ATOM1, 2), (ATOM2, 2), (TF1, cutoff), (TF2, cutoff)])?;
    let pair = PairPropagator::new(g * t, cutoff).to_dense();
    Operator::new(layout, djc_dense_from_pairs(&pair, &pair, cutoff))
}

/// Dense `U1 (x) U2` rearranged from `(atom1, TF1, atom2, TF2)` order.
pub(crate) fn djc_dense_from_pairs(u1: &CMatrix, u2: &CMatrix, d: usize) -> CMatrix {
    let pair_order = u1.kronecker(u2);
    let n = 4 * d * d;
    // native index (a1, a2, n1, n2) -> pair index (a1, n1, a2, n2)
    let perm: Vec<usize> = (0..n)
        .map(|i| {
            let n2 = i % d;
            let n1 = (i / d) % d;
            let a2 = (i / (d * d)) % 2;
            let a1 = i / (2 * d * d);
            ((a1 * d + n1) * 2 + a2) * d + n2
        })
        .collect();
    CMatrix::from_fn(n, n, |r, c| pair_order[(perm[r], perm[c])])
}
