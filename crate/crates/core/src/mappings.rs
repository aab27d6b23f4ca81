//! The two-mode mixing `A1 = (a1 + a2)/sqrt2`, `A2 = (a1 - a2)/sqrt2` and the
//! model equivalences it induces: TMSC reduces to SMSC after tracing out TF2,
//! TMAC maps onto DJC without any trace.

use nalgebra::DMatrix;

use crate::dynamics::{Backend, Evolution, ModelConfig, Scheme};
use crate::error::{Error, Result};
use crate::hilbert::{
    trace_trailing, CMatrix, CVector, DensityMatrix, Ensemble, Operator, SpaceLayout, StateVector, C64, TF1, TF2,
    ZERO,
};
use crate::states::{assemble_initial, AtomicLabel, ComplexParam, FieldSpec, FieldState};

/// Mixing unitary on two modes with a shared cutoff `d`, exact on every
/// total-photon block `N < d` (the blocks that fit completely).
#[derive(Clone, Debug)]
pub struct ModeTransform {
    cutoff: usize,
    /// Block `N` acts on `|N - j, j>` for `j = 0..=N`.
    blocks: Vec<CMatrix>,
    flip_second: bool,
}

impl ModeTransform {
    /// `U = B(-pi/4) P` with `B(theta) = exp(theta (a1^dag a2 - a2^dag a1))` and
    /// `P = exp(i pi a2^dag a2)`, so that `U a1 U^dag = (a1 + a2)/sqrt2` and
    /// `U a2 U^dag = (a1 - a2)/sqrt2`.
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidArgument(format!("cutoff must be >= 2, got {cutoff}")));
        }
        let theta = -std::f64::consts::FRAC_PI_4;
        let blocks = (0..cutoff)
            .map(|n| {
                let mut gen = DMatrix::from_element(n + 1, n + 1, ZERO);
                for j in 0..=n {
                    // a1^dag a2 |n-j, j> = sqrt((n-j+1) j) |n-j+1, j-1>
                    if j > 0 {
                        gen[(j - 1, j)] += C64::new(theta * (((n - j + 1) * j) as f64).sqrt(), 0.0);
                    }
                    // a2^dag a1 |n-j, j> = sqrt((n-j)(j+1)) |n-j-1, j+1>
                    if j < n {
                        gen[(j + 1, j)] -= C64::new(theta * (((n - j) * (j + 1)) as f64).sqrt(), 0.0);
                    }
                }
                let mut u = gen.exp();
                for j in (1..=n).step_by(2) {
                    u.column_mut(j).neg_mut();
                }
                u
            })
            .collect();
        Ok(Self { cutoff, blocks, flip_second: false })
    }

    /// The same mixing with the sign of `A2` reversed.
    pub fn with_flipped_second(mut self) -> Self {
        self.flip_second = !self.flip_second;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Dense matrix on `d x d` two-mode space; rows and columns with
    /// `n1 + n2 >= d` are zero.
    pub fn unitary(&self) -> CMatrix {
        let d = self.cutoff;
        let mut u = CMatrix::zeros(d * d, d * d);
        for (n, block) in self.blocks.iter().enumerate() {
            for j in 0..=n {
                for k in 0..=n {
                    u[((n - j) * d + j, (n - k) * d + k)] = block[(j, k)] * self.sign(j);
                }
            }
        }
        u
    }

    pub fn operator(&self, labels: [&str; 2]) -> Result<Operator> {
        Operator::new(SpaceLayout::two_modes(labels, self.cutoff)?, self.unitary())
    }

    fn sign(&self, j: usize) -> f64 {
        if self.flip_second && j % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// Weight of `v` on blocks with `n1 + n2 >= d`.
    pub fn weight_above_cap(&self, v: &[C64]) -> f64 {
        let d = self.cutoff;
        (0..d * d).filter(|i| i / d + i % d >= d).map(|i| v[i].norm_sqr()).sum()
    }

    fn apply_raw(&self, v: &[C64], out: &mut [C64]) {
        let d = self.cutoff;
        out.iter_mut().for_each(|z| *z = ZERO);
        let mut input = CVector::zeros(d);
        for (n, block) in self.blocks.iter().enumerate() {
            let mut seg = input.rows_mut(0, n + 1);
            for j in 0..=n {
                seg[j] = v[(n - j) * d + j];
            }
            let mapped = block * seg;
            for j in 0..=n {
                out[(n - j) * d + j] = mapped[j] * self.sign(j);
            }
        }
    }

    /// Maps every column; fails if the columns carry more than `tau` of their
    /// weight above the exact blocks.
    pub fn apply_columns(&self, columns: &CMatrix, tau: f64) -> Result<CMatrix> {
        let d = self.cutoff;
        if columns.nrows() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: columns.nrows() });
        }
        let total: f64 = columns.iter().map(|z| z.norm_sqr()).sum();
        let above: f64 = columns.column_iter().map(|c| self.weight_above_cap(c.as_slice())).sum();
        if above > tau * total {
            let highest = (0..d * d)
                .filter(|&i| columns.row(i).iter().any(|z| *z != ZERO))
                .map(|i| i / d + i % d)
                .max()
                .unwrap_or(0);
            return Err(Error::TruncationInsufficient {
                what: "two-mode mixing".into(),
                cutoff: d,
                required: highest + 1,
                tail: above / total,
            });
        }
        let mut out = CMatrix::zeros(d * d, columns.ncols());
        for (src, mut dst) in columns.column_iter().zip(out.column_iter_mut()) {
            self.apply_raw(src.as_slice(), dst.as_mut_slice());
        }
        let kept: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        Ok(out * C64::new((total / kept).sqrt(), 0.0))
    }

    pub fn apply(&self, state: &StateVector, tau: f64) -> Result<StateVector> {
        let cols = CMatrix::from_column_slice(state.vector().len(), 1, state.vector().as_slice());
        let mapped = self.apply_columns(&cols, tau)?;
        StateVector::normalized(SpaceLayout::two_modes([TF1, TF2], self.cutoff)?, mapped.column(0).into_owned())
    }
}

/// Mixing unitary for a per-mode cutoff.
pub fn mode_transform_unitary(cutoff: usize) -> Result<ModeTransform> {
    ModeTransform::new(cutoff)
}

fn two_mode_cutoff(layout: &SpaceLayout) -> Result<usize> {
    match layout.dims() {
        [a, b] if a == b => Ok(*a),
        dims => Err(Error::LayoutMismatch(format!("expected two modes with one cutoff, got {dims:?}"))),
    }
}

/// Mixed TF1 state of the SMSC model equivalent to a TMSC field.
pub fn tmsc_to_smsc(field: &FieldState, tau: f64) -> Result<DensityMatrix> {
    let layout = field.layout();
    let d = two_mode_cutoff(&layout)?;
    let mapped = ModeTransform::new(d)?.apply_columns(field.to_ensemble().columns(), tau)?;
    let rho = trace_trailing(&mapped, d);
    let tr = rho.trace().re;
    DensityMatrix::from_trusted(SpaceLayout::single(TF1, d)?, rho / C64::new(tr, 0.0))
}

/// DJC field state equivalent to a pure TMAC field.
pub fn tmac_to_djc(field: &StateVector, tau: f64) -> Result<StateVector> {
    let d = two_mode_cutoff(field.layout())?;
    ModeTransform::new(d)?.apply(field, tau)
}

pub(crate) fn map_field_tmsc(field: &FieldState, tau: f64) -> Result<FieldState> {
    Ok(FieldState::Mixed(Ensemble::from_density(&tmsc_to_smsc(field, tau)?)?))
}

/// Diagonal weights of a single-mode ensemble whose components are Fock
/// states, or `None`.
fn fock_diagonal(e: &Ensemble) -> Option<Vec<f64>> {
    let c = e.columns();
    let mut p = vec![0.0; c.nrows()];
    for col in c.column_iter() {
        let nonzero: Vec<usize> = (0..col.len()).filter(|&i| col[i] != ZERO).collect();
        if nonzero.len() > 1 {
            return None;
        }
        for i in nonzero {
            p[i] += col[i].norm_sqr();
        }
    }
    Some(p)
}

/// True when both marginals are the same geometric distribution, so that
/// the product depends only on `n1 + n2` and commutes with the mixing.
fn equal_thermal_pair(a: &Ensemble, b: &Ensemble) -> bool {
    let (Some(pa), Some(pb)) = (fock_diagonal(a), fock_diagonal(b)) else {
        return false;
    };
    if pa.len() != pb.len() || pa.iter().zip(&pb).any(|(x, y)| (x - y).abs() > 1e-15) {
        return false;
    }
    let q = if pa[0] > 0.0 { pa[1] / pa[0] } else { return false };
    pa.iter().enumerate().all(|(n, &p)| (p - pa[0] * q.powi(n as i32)).abs() <= 1e-14 * pa[0])
}

pub(crate) fn map_field_tmac(field: &FieldState, tau: f64) -> Result<FieldState> {
    let layout = field.layout();
    let d = two_mode_cutoff(&layout)?;
    let transform = ModeTransform::new(d)?;
    match field {
        FieldState::Pure(s) => Ok(FieldState::Pure(transform.apply(s, tau)?)),
        FieldState::Product(a, b) if equal_thermal_pair(a, b) => {
            let pa = fock_diagonal(a).expect("checked");
            let above: f64 = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .filter(|(i, j)| i + j >= d)
                .map(|(i, j)| pa[i] * pa[j])
                .sum();
            if above > tau {
                return Err(Error::TruncationInsufficient {
                    what: "two-mode mixing of a thermal pair".into(),
                    cutoff: d,
                    required: d + 1,
                    tail: above,
                });
            }
            Ok(FieldState::Product(a.clone().relabel(&[TF1])?, b.clone().relabel(&[TF2])?))
        }
        _ => {
            let mapped = transform.apply_columns(field.to_ensemble().columns(), tau)?;
            let layout = SpaceLayout::two_modes([TF1, TF2], d)?;
            Ok(FieldState::Mixed(Ensemble::from_matrix(layout, mapped)))
        }
    }
}

/// Field spec of the reduced model (SMSC for TMSC, DJC for TMAC) that the
/// mapping produces, in closed form.
pub fn reduce_field_spec(spec: &FieldSpec, scheme: Scheme) -> Result<FieldSpec> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mix = |a: ComplexParam, b: ComplexParam| {
        let (a, b) = (a.to_c64(), b.to_c64());
        (ComplexParam::from((a + b) * s), ComplexParam::from((a - b) * s))
    };
    let unsupported = || Error::InvalidArgument(format!("{spec:?} is not a two-mode field"));
    match scheme {
        Scheme::Tmsc => Ok(match *spec {
            FieldSpec::Vacuum => FieldSpec::Vacuum,
            FieldSpec::FockPair { n, m } => FieldSpec::RhoNM { n, m },
            FieldSpec::EtaNM { n, .. } => FieldSpec::Fock { n },
            FieldSpec::Thermal { nbar } => FieldSpec::Thermal { nbar },
            FieldSpec::CoherentPair { alpha, beta } => FieldSpec::Coherent { alpha: mix(alpha, beta).0 },
            FieldSpec::SqueezedPair { xi } => FieldSpec::Thermal { nbar: xi.to_c64().norm().sinh().powi(2) },
            FieldSpec::TwoModeSqueezed { xi } => FieldSpec::Squeezed { xi },
            _ => return Err(unsupported()),
        }),
        Scheme::Tmac => Ok(match *spec {
            FieldSpec::Vacuum => FieldSpec::Vacuum,
            FieldSpec::FockPair { n, m } => FieldSpec::EtaNM { n, m },
            FieldSpec::EtaNM { n, m } => FieldSpec::FockPair { n, m },
            FieldSpec::Thermal { nbar } => FieldSpec::Thermal { nbar },
            FieldSpec::CoherentPair { alpha, beta } => {
                let (a, b) = mix(alpha, beta);
                FieldSpec::CoherentPair { alpha: a, beta: b }
            }
            FieldSpec::SqueezedPair { xi } => FieldSpec::TwoModeSqueezed { xi },
            FieldSpec::TwoModeSqueezed { xi } => FieldSpec::SqueezedPair { xi },
            _ => return Err(unsupported()),
        }),
        other => Err(Error::InvalidArgument(format!("{} has no reduced model", other.name()))),
    }
}

/// Largest trace distance over `cfg.grid` between the atomic states of the
/// full two-mode model (block-exact) and of the mapped reduced model
/// (closed form).
pub fn verify_equivalence(atomic: AtomicLabel, field: &FieldSpec, cfg: &ModelConfig) -> Result<f64> {
    if !matches!(cfg.scheme, Scheme::Tmsc | Scheme::Tmac) {
        return Err(Error::InvalidArgument("equivalence is defined for TMSC and TMAC".into()));
    }
    let initial = assemble_initial(atomic, field, cfg)?;
    let full = Evolution::new(&initial, &cfg.with_backend(Backend::BlockExact))?;
    let reduced = Evolution::new(&initial, &cfg.with_backend(Backend::Closed))?;
    let mut worst: f64 = 0.0;
    for t in cfg.grid.times() {
        worst = worst.max(full.atoms_at(t)?.trace_distance(&reduced.atoms_at(t)?)?);
    }
    Ok(worst)
}
