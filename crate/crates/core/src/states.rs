//! Initial atomic and field states.
//!
//! Every field constructor checks the probability mass that the Fock cutoff
//! discards against an analytic tail (Poisson, geometric or squeezed
//! distribution) and fails with [`Error::TruncationInsufficient`] instead of
//! silently renormalizing a badly truncated state.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::ModelConfig;
use crate::error::{Error, Result};
use crate::hilbert::{
    partial_trace, CVector, DensityMatrix, Ensemble, SpaceLayout, StateVector, C64, ONE, TF1, TF2,
    ZERO,
};

/// Named two-atom pure states in the `{ee, eg, ge, gg}` basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AtomicLabel {
    Gg,
    Ee,
    Eg,
    Ge,
    /// `(|ee> + |gg>)/sqrt2`
    Phi,
    /// `(|eg> + |ge>)/sqrt2`
    Psi,
}

impl AtomicLabel {
    pub const ALL: [AtomicLabel; 6] = [Self::Gg, Self::Ee, Self::Eg, Self::Ge, Self::Phi, Self::Psi];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gg => "GG",
            Self::Ee => "EE",
            Self::Eg => "EG",
            Self::Ge => "GE",
            Self::Phi => "PHI",
            Self::Psi => "PSI",
        }
    }

    /// Product states carry no initial entanglement.
    pub fn is_separable(self) -> bool {
        !matches!(self, Self::Phi | Self::Psi)
    }
}

pub fn atomic_state(label: AtomicLabel) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps: [f64; 4] = match label {
        AtomicLabel::Ee => [1.0, 0.0, 0.0, 0.0],
        AtomicLabel::Eg => [0.0, 1.0, 0.0, 0.0],
        AtomicLabel::Ge => [0.0, 0.0, 1.0, 0.0],
        AtomicLabel::Gg => [0.0, 0.0, 0.0, 1.0],
        AtomicLabel::Phi => [s, 0.0, 0.0, s],
        AtomicLabel::Psi => [0.0, s, s, 0.0],
    };
    real_atomic(amps)
}

/// The antisymmetric state `(|eg> - |ge>)/sqrt2`, decoupled from a
/// symmetrically coupled mode.
pub fn dark_state() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    real_atomic([0.0, s, -s, 0.0])
}

fn real_atomic(amps: [f64; 4]) -> StateVector {
    let v = CVector::from_iterator(4, amps.iter().map(|&a| C64::new(a, 0.0)));
    StateVector::new(SpaceLayout::atoms(), v).expect("unit atomic state")
}

/// Complex parameter as it appears in configuration files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexParam {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ComplexParam {
    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re, self.im)
    }
}

impl From<C64> for ComplexParam {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// How many field modes a [`FieldSpec`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeCount {
    One,
    Two,
    /// Defined for either (vacuum, thermal).
    Any,
}

/// Initial field state. Two-mode variants describe both modes in the frame
/// of the model they are handed to; `RhoNM`, `Fock`, `Coherent` and
/// `Squeezed` describe a single mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldSpec {
    Vacuum,
    FockPair { n: usize, m: usize },
    CoherentPair { alpha: ComplexParam, beta: ComplexParam },
    /// `|xi, -xi>`: product of single-mode squeezed vacua with opposite parameters.
    SqueezedPair { xi: ComplexParam },
    TwoModeSqueezed { xi: ComplexParam },
    /// Both modes (or the single mode) thermal with mean photon number `nbar`.
    Thermal { nbar: f64 },
    EtaNM { n: usize, m: usize },
    RhoNM { n: usize, m: usize },
    Fock { n: usize },
    Coherent { alpha: ComplexParam },
    Squeezed { xi: ComplexParam },
}

/// Prepared field state.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldState {
    Pure(StateVector),
    Mixed(Ensemble),
    /// Uncorrelated mixed two-mode state `rho1 (x) rho2`.
    Product(Ensemble, Ensemble),
}

impl FieldState {
    pub fn layout(&self) -> SpaceLayout {
        match self {
            Self::Pure(s) => s.layout().clone(),
            Self::Mixed(e) => e.layout().clone(),
            Self::Product(a, b) => a.layout().concat(b.layout()).expect("distinct mode labels"),
        }
    }

    pub fn to_ensemble(&self) -> Ensemble {
        match self {
            Self::Pure(s) => Ensemble::from_state(s),
            Self::Mixed(e) => e.clone(),
            Self::Product(a, b) => a.kron(b).expect("distinct mode labels"),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure(_))
    }
}

impl FieldSpec {
    pub fn mode_count(&self) -> ModeCount {
        match self {
            Self::Vacuum | Self::Thermal { .. } => ModeCount::Any,
            Self::FockPair { .. }
            | Self::CoherentPair { .. }
            | Self::SqueezedPair { .. }
            | Self::TwoModeSqueezed { .. }
            | Self::EtaNM { .. } => ModeCount::Two,
            Self::RhoNM { .. } | Self::Fock { .. } | Self::Coherent { .. } | Self::Squeezed { .. } => {
                ModeCount::One
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: &ComplexParam| z.re.is_finite() && z.im.is_finite();
        let ok = match self {
            Self::Thermal { nbar } => nbar.is_finite() && *nbar >= 0.0,
            Self::CoherentPair { alpha, beta } => finite(alpha) && finite(beta),
            Self::SqueezedPair { xi } | Self::TwoModeSqueezed { xi } | Self::Squeezed { xi } => finite(xi),
            Self::Coherent { alpha } => finite(alpha),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid field parameters: {self:?}")))
        }
    }

    /// Largest probability mass dropped by a per-mode cutoff.
    pub fn tail_mass(&self, cutoff: usize) -> f64 {
        match self {
            Self::Vacuum => 0.0,
            Self::FockPair { n, m } => step_tail(*n.max(m), cutoff),
            Self::Fock { n } => step_tail(*n, cutoff),
            Self::EtaNM { n, m } | Self::RhoNM { n, m } => step_tail(n + m, cutoff),
            Self::Thermal { nbar } => thermal_tail(*nbar, cutoff),
            Self::Coherent { alpha } => poisson_tail(alpha.to_c64().norm_sqr(), cutoff),
            Self::CoherentPair { alpha, beta } => poisson_tail(alpha.to_c64().norm_sqr(), cutoff)
                .max(poisson_tail(beta.to_c64().norm_sqr(), cutoff)),
            Self::Squeezed { xi } | Self::SqueezedPair { xi } => squeezed_tail(xi.to_c64().norm(), cutoff),
            Self::TwoModeSqueezed { xi } => tmss_tail(xi.to_c64().norm(), cutoff),
        }
    }

    /// Smallest cutoff whose discarded tail is below `tau`.
    pub fn required_cutoff(&self, tau: f64) -> Result<usize> {
        required_cutoff(|c| self.tail_mass(c), tau, &format!("{self:?}"))
    }

    /// Probability that the total photon number reaches `cutoff`; equal to
    /// [`FieldSpec::tail_mass`] for single-mode specs.
    pub fn total_tail(&self, cutoff: usize) -> f64 {
        match self {
            Self::FockPair { n, m } | Self::EtaNM { n, m } => step_tail(n + m, cutoff),
            Self::CoherentPair { alpha, beta } => {
                poisson_tail(alpha.to_c64().norm_sqr() + beta.to_c64().norm_sqr(), cutoff)
            }
            Self::TwoModeSqueezed { xi } => tmss_tail(xi.to_c64().norm(), cutoff.div_ceil(2)),
            Self::Thermal { nbar } => {
                let q = nbar / (1.0 + nbar);
                q.powi(cutoff as i32) * ((cutoff + 1) as f64 * (1.0 - q) + q)
            }
            Self::SqueezedPair { xi } => {
                let r = xi.to_c64().norm();
                let pmf = squeezed_pmf(r, cutoff);
                let own: f64 = (0..cutoff).map(|n| pmf[n] * squeezed_tail(r, cutoff - n)).sum();
                own + squeezed_tail(r, cutoff)
            }
            _ => self.tail_mass(cutoff),
        }
    }

    /// Smallest cutoff at which [`FieldSpec::total_tail`] is below `tau`.
    pub fn required_total_cutoff(&self, tau: f64) -> Result<usize> {
        required_cutoff(|c| self.total_tail(c), tau, &format!("{self:?}"))
    }

    /// Builds the state on modes labelled `labels` (one or two labels).
    pub fn build(&self, labels: &[&str], cutoff: usize, tau: f64) -> Result<FieldState> {
        self.validate()?;
        let want = match labels.len() {
            1 => ModeCount::One,
            2 => ModeCount::Two,
            k => return Err(Error::InvalidArgument(format!("{k} field modes requested"))),
        };
        let mc = self.mode_count();
        if mc != ModeCount::Any && mc != want {
            return Err(Error::LayoutMismatch(format!(
                "{self:?} is not a {}-mode field",
                labels.len()
            )));
        }
        if cutoff < 2 {
            return Err(Error::InvalidArgument(format!("cutoff must be >= 2, got {cutoff}")));
        }
        let tail = self.tail_mass(cutoff);
        if tail > tau {
            return Err(Error::TruncationInsufficient {
                what: format!("{self:?}"),
                cutoff,
                required: self.required_cutoff(tau)?,
                tail,
            });
        }
        let pair = |a: StateVector, b: StateVector| -> Result<FieldState> {
            Ok(FieldState::Pure(a.relabel(&[labels[0]])?.kron(&b.relabel(&[labels[1]])?)?))
        };
        match self {
            Self::Vacuum => {
                let layout = SpaceLayout::new(labels.iter().map(|&l| (l, cutoff)))?;
                let digits = vec![0; labels.len()];
                Ok(FieldState::Pure(StateVector::basis(layout, &digits)?))
            }
            Self::Thermal { nbar } => {
                let single = |label: &str| -> Result<Ensemble> {
                    Ensemble::from_density(&thermal_state(*nbar, cutoff, tau)?.relabel(&[label])?)
                };
                if labels.len() == 1 {
                    Ok(FieldState::Mixed(single(labels[0])?))
                } else {
                    Ok(FieldState::Product(single(labels[0])?, single(labels[1])?))
                }
            }
            Self::FockPair { n, m } => pair(fock_state(*n, cutoff)?, fock_state(*m, cutoff)?),
            Self::CoherentPair { alpha, beta } => pair(
                coherent_state(alpha.to_c64(), cutoff, tau)?,
                coherent_state(beta.to_c64(), cutoff, tau)?,
            ),
            Self::SqueezedPair { xi } => pair(
                squeezed_vacuum(xi.to_c64(), cutoff, tau)?,
                squeezed_vacuum(-xi.to_c64(), cutoff, tau)?,
            ),
            Self::TwoModeSqueezed { xi } => Ok(FieldState::Pure(
                two_mode_squeezed_vacuum(xi.to_c64(), cutoff, tau)?.relabel(labels)?,
            )),
            Self::EtaNM { n, m } => Ok(FieldState::Pure(eta_nm(*n, *m, cutoff)?.relabel(labels)?)),
            Self::RhoNM { n, m } => Ok(FieldState::Mixed(Ensemble::from_density(
                &rho_nm(*n, *m, cutoff)?.relabel(labels)?,
            )?)),
            Self::Fock { n } => Ok(FieldState::Pure(fock_state(*n, cutoff)?.relabel(labels)?)),
            Self::Coherent { alpha } => Ok(FieldState::Pure(
                coherent_state(alpha.to_c64(), cutoff, tau)?.relabel(labels)?,
            )),
            Self::Squeezed { xi } => Ok(FieldState::Pure(
                squeezed_vacuum(xi.to_c64(), cutoff, tau)?.relabel(labels)?,
            )),
        }
    }
}

const MAX_CUTOFF: usize = 4096;

fn required_cutoff(tail: impl Fn(usize) -> f64, tau: f64, what: &str) -> Result<usize> {
    (2..MAX_CUTOFF).find(|&c| tail(c) <= tau).ok_or_else(|| Error::TruncationInsufficient {
        what: what.to_string(),
        cutoff: MAX_CUTOFF,
        required: MAX_CUTOFF,
        tail: tail(MAX_CUTOFF),
    })
}

fn step_tail(n_max: usize, cutoff: usize) -> f64 {
    if n_max < cutoff {
        0.0
    } else {
        1.0
    }
}

/// `sum_{n >= cutoff} nbar^n / (1 + nbar)^(n+1) = (nbar / (1 + nbar))^cutoff`.
pub fn thermal_tail(nbar: f64, cutoff: usize) -> f64 {
    if nbar == 0.0 {
        0.0
    } else {
        (nbar / (1.0 + nbar)).powi(cutoff as i32)
    }
}

/// Poisson tail `sum_{n >= cutoff} e^{-mu} mu^n / n!`, summed directly.
pub fn poisson_tail(mu: f64, cutoff: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let ln_fact: f64 = (1..=cutoff).map(|k| (k as f64).ln()).sum();
    let mut term = (-mu + cutoff as f64 * mu.ln() - ln_fact).exp();
    let mut total = 0.0;
    let mut n = cutoff;
    loop {
        total += term;
        n += 1;
        term *= mu / n as f64;
        if (n as f64 > mu && term < total * 1e-17) || term == 0.0 || n > cutoff + 100_000 {
            break;
        }
    }
    total
}

/// Photon-number tail of a single-mode squeezed vacuum with `r = |xi|`:
/// `P(2k) = (2k)! / (4^k k!^2) tanh^{2k} r / cosh r`.
pub fn squeezed_tail(r: f64, cutoff: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut total = 0.0;
    let mut k = 0usize;
    loop {
        if 2 * k >= cutoff {
            total += p;
            if p < total * 1e-17 || p == 0.0 {
                break;
            }
        }
        k += 1;
        p *= t2 * (2 * k - 1) as f64 / (2 * k) as f64;
        if k > 1_000_000 {
            break;
        }
    }
    total
}

/// Photon-number distribution of a squeezed vacuum on `0..len`.
fn squeezed_pmf(r: f64, len: usize) -> Vec<f64> {
    let t2 = r.tanh().powi(2);
    let mut out = vec![0.0; len];
    let mut p = 1.0 / r.cosh();
    let mut n = 0;
    while n < len {
        out[n] = p;
        let k = n / 2 + 1;
        p *= t2 * (2 * k - 1) as f64 / (2 * k) as f64;
        n += 2;
    }
    out
}

/// `sum_{n >= cutoff} tanh^{2n} r / cosh^2 r = tanh^{2 cutoff} r`.
pub fn tmss_tail(r: f64, cutoff: usize) -> f64 {
    r.tanh().powi(2 * cutoff as i32)
}

fn mode_layout(cutoff: usize) -> Result<SpaceLayout> {
    SpaceLayout::single("mode", cutoff)
}

pub fn fock_state(n: usize, cutoff: usize) -> Result<StateVector> {
    if n >= cutoff {
        return Err(Error::TruncationInsufficient {
            what: format!("Fock |{n}>"),
            cutoff,
            required: n + 1,
            tail: 1.0,
        });
    }
    StateVector::basis(mode_layout(cutoff)?, &[n])
}

fn check_tail(what: impl Fn() -> String, tail: f64, cutoff: usize, tau: f64, req: impl Fn() -> Result<usize>) -> Result<()> {
    if tail > tau {
        return Err(Error::TruncationInsufficient { what: what(), cutoff, required: req()?, tail });
    }
    Ok(())
}

/// Glauber coherent state `e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n>`.
pub fn coherent_state(alpha: C64, cutoff: usize, tau: f64) -> Result<StateVector> {
    let mu = alpha.norm_sqr();
    check_tail(
        || format!("coherent alpha={alpha}"),
        poisson_tail(mu, cutoff),
        cutoff,
        tau,
        || required_cutoff(|c| poisson_tail(mu, c), tau, "coherent"),
    )?;
    let mut v = CVector::zeros(cutoff);
    let mut amp = C64::new((-mu / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        v[n] = amp;
    }
    StateVector::normalized(mode_layout(cutoff)?, v)
}

/// Single-mode squeezed vacuum `exp((xi^* a^2 - xi a^dag^2)/2)|0>`; with
/// `xi = r e^{i theta}` the even amplitudes are
/// `(-e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k!) / sqrt(cosh r)`.
pub fn squeezed_vacuum(xi: C64, cutoff: usize, tau: f64) -> Result<StateVector> {
    let r = xi.norm();
    check_tail(
        || format!("squeezed xi={xi}"),
        squeezed_tail(r, cutoff),
        cutoff,
        tau,
        || required_cutoff(|c| squeezed_tail(r, c), tau, "squeezed"),
    )?;
    let phase = if r == 0.0 { ONE } else { xi / r };
    let ratio = -phase * r.tanh();
    let mut v = CVector::zeros(cutoff);
    let mut amp = C64::new(1.0 / r.cosh().sqrt(), 0.0);
    let mut n = 0;
    while n < cutoff {
        v[n] = amp;
        let k = (n / 2 + 1) as f64;
        amp *= ratio * ((2.0 * k - 1.0) / (2.0 * k)).sqrt();
        n += 2;
    }
    StateVector::normalized(mode_layout(cutoff)?, v)
}

/// `exp(xi^* a1 a2 - xi a1^dag a2^dag)|00>`, obtained by exponentiating the
/// generator on the pair subspace `{|n,n>}` of a padded space and
/// truncating back to `cutoff`.
pub fn two_mode_squeezed_vacuum(xi: C64, cutoff: usize, tau: f64) -> Result<StateVector> {
    let r = xi.norm();
    check_tail(
        || format!("two-mode squeezed xi={xi}"),
        tmss_tail(r, cutoff),
        cutoff,
        tau,
        || required_cutoff(|c| tmss_tail(r, c), tau, "two-mode squeezed"),
    )?;
    let padded = 2 * cutoff + 16;
    let gen = DMatrix::from_fn(padded, padded, |i, j| {
        if i == j + 1 {
            -xi * (i as f64)
        } else if j == i + 1 {
            xi.conj() * (j as f64)
        } else {
            ZERO
        }
    });
    let u = gen.exp();
    let layout = SpaceLayout::two_modes(["mode1", "mode2"], cutoff)?;
    let mut v = CVector::zeros(layout.total_dim());
    for n in 0..cutoff {
        v[layout.encode(&[n, n])] = u[(n, 0)];
    }
    StateVector::normalized(layout, v)
}

/// Thermal state with geometric weights `nbar^n / (1 + nbar)^(n+1)`.
pub fn thermal_state(nbar: f64, cutoff: usize, tau: f64) -> Result<DensityMatrix> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::InvalidArgument(format!("thermal nbar must be >= 0, got {nbar}")));
    }
    check_tail(
        || format!("thermal nbar={nbar}"),
        thermal_tail(nbar, cutoff),
        cutoff,
        tau,
        || required_cutoff(|c| thermal_tail(nbar, c), tau, "thermal"),
    )?;
    let q = nbar / (1.0 + nbar);
    let weights: Vec<f64> = (0..cutoff).map(|n| q.powi(n as i32) / (1.0 + nbar)).collect();
    let total: f64 = weights.iter().sum();
    let diag = CVector::from_iterator(cutoff, weights.iter().map(|w| C64::new(w / total, 0.0)));
    DensityMatrix::from_trusted(mode_layout(cutoff)?, DMatrix::from_diagonal(&diag))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Amplitudes of `|eta_nm>` on `|n+m-j, j>` for `j = 0..=n+m`, straight from
/// the binomial double sum, without renormalization.
pub fn eta_nm_amplitudes(n: usize, m: usize) -> Vec<f64> {
    let total = n + m;
    let prefactor = 1.0 / (2f64.powi(total as i32) * factorial(m) * factorial(n)).sqrt();
    let mut amps = vec![0.0; total + 1];
    for k in 0..=n {
        for l in 0..=m {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let j = k + l;
            amps[j] += prefactor
                * binomial(n, k)
                * binomial(m, l)
                * (factorial(total - j) * factorial(j)).sqrt()
                * sign;
        }
    }
    amps
}

/// The image of the Fock pair `|n, m>` under the two-mode mixing, on a
/// two-mode layout with per-mode cutoff `cutoff`.
pub fn eta_nm(n: usize, m: usize, cutoff: usize) -> Result<StateVector> {
    if cutoff < n + m + 1 {
        return Err(Error::TruncationInsufficient {
            what: format!("eta_{n}{m}"),
            cutoff,
            required: n + m + 1,
            tail: 1.0,
        });
    }
    let layout = SpaceLayout::two_modes([TF1, TF2], cutoff)?;
    let mut v = CVector::zeros(layout.total_dim());
    let total = n + m;
    for (j, a) in eta_nm_amplitudes(n, m).into_iter().enumerate() {
        v[layout.encode(&[total - j, j])] = C64::new(a, 0.0);
    }
    StateVector::normalized(layout, v)
}

/// `Tr_TF2 |eta_nm><eta_nm|`, on a single mode labelled `TF1`.
pub fn rho_nm(n: usize, m: usize, cutoff: usize) -> Result<DensityMatrix> {
    partial_trace(&eta_nm(n, m, cutoff)?.to_density(), &[TF1])
}

/// Atoms and field of a separable initial state, kept factored.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    pub atoms: StateVector,
    pub field: FieldState,
}

/// Full-system state: pure, or a density matrix when the field is mixed.
#[derive(Clone, Debug, PartialEq)]
pub enum FullState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl InitialState {
    pub fn new(atoms: StateVector, field: FieldState) -> Result<Self> {
        if atoms.layout().dims() != [2, 2] {
            return Err(Error::LayoutMismatch("atoms must be two qubits".into()));
        }
        Ok(Self { atoms, field })
    }

    pub fn layout(&self) -> SpaceLayout {
        self.atoms.layout().concat(&self.field.layout()).expect("distinct labels")
    }

    /// `atoms (x) field` as an ensemble of pure components.
    pub fn to_ensemble(&self) -> Ensemble {
        Ensemble::from_state(&self.atoms)
            .kron(&self.field.to_ensemble())
            .expect("distinct labels")
    }

    pub fn to_full(&self) -> Result<FullState> {
        match &self.field {
            FieldState::Pure(f) => Ok(FullState::Pure(self.atoms.kron(f)?)),
            _ => Ok(FullState::Mixed(self.to_ensemble().to_density()?)),
        }
    }

    pub fn is_pure(&self) -> bool {
        self.field.is_pure()
    }
}

/// `atomic (x) field` on the native layout of `model`.
pub fn assemble_initial(atomic: AtomicLabel, field: &FieldSpec, model: &ModelConfig) -> Result<InitialState> {
    let labels = model.scheme.mode_labels();
    let cutoff = model.cutoff_for(field)?;
    let field = field.build(labels, cutoff, model.tolerances.tail)?;
    InitialState::new(atomic_state(atomic), field)
}
