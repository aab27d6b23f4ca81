//! Interaction Hamiltonians and time evolution.
//!
//! Everything is in the interaction picture at exact resonance with
//! `hbar = 1`; times are in units of `1/g`. Three propagator backends are
//! available: closed forms for the single-mode symmetric model (SMSC) and
//! the double Jaynes-Cummings model (DJC), and block-wise exact
//! exponentiation for any excitation-conserving Hamiltonian.
//!
//! States are evolved only on the excitation-complete subspace: basis states
//! whose conserved sector does not fit below the cutoff are projected out
//! before evolution. Their weight is bounded by the leakage monitor.

mod band;
mod block;
mod closed;

pub use band::Band;
pub use block::{excitation_counts, excitation_operator, propagator_block_exact, BlockExact, Prepared};
pub use closed::{
    apply_product_channel, propagator_djc_closed, propagator_smsc_closed, PairPropagator, SmscPropagator,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    trace_trailing, CMatrix, DensityMatrix, Ensemble, Operator, SpaceLayout,
    StateVector, ATOM1, ATOM2, C64, F1, F2, TF1, TF2, ZERO,
};
use crate::mappings;
use crate::states::{FieldSpec, FieldState, InitialState, ModeCount};
use crate::tolerances;

/// Coupling configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// Two modes, symmetric coupling (`phi = 0`).
    #[serde(rename = "TMSC")]
    Tmsc,
    /// Two modes, antisymmetric coupling (`phi = pi`).
    #[serde(rename = "TMAC")]
    Tmac,
    /// Two modes with an arbitrary separation phase.
    #[serde(rename = "GENERAL_PHI")]
    GeneralPhi { phi: f64 },
    /// Both atoms coupled to one mode with strength `sqrt2 g`.
    #[serde(rename = "SMSC")]
    Smsc,
    /// Atom 1 coupled to TF1 and atom 2 to TF2, each with strength `sqrt2 g`.
    #[serde(rename = "DJC")]
    Djc,
}

impl Scheme {
    pub fn name(&self) -> String {
        match self {
            Self::Tmsc => "TMSC".into(),
            Self::Tmac => "TMAC".into(),
            Self::GeneralPhi { phi } => format!("PHI={phi}"),
            Self::Smsc => "SMSC".into(),
            Self::Djc => "DJC".into(),
        }
    }

    /// Field-mode labels of the scheme's native layout.
    pub fn mode_labels(&self) -> &'static [&'static str] {
        match self {
            Self::Tmsc | Self::Tmac | Self::GeneralPhi { .. } => &[F1, F2],
            Self::Smsc => &[TF1],
            Self::Djc => &[TF1, TF2],
        }
    }

    /// Separation phase of a two-mode scheme.
    pub fn phi(&self) -> Option<f64> {
        match self {
            Self::Tmsc => Some(0.0),
            Self::Tmac => Some(std::f64::consts::PI),
            Self::GeneralPhi { phi } => Some(*phi),
            Self::Smsc | Self::Djc => None,
        }
    }

    pub fn layout(&self, cutoff: usize) -> Result<SpaceLayout> {
        let modes = self.mode_labels();
        let mut parts = vec![(ATOM1, 2), (ATOM2, 2)];
        parts.extend(modes.iter().map(|&m| (m, cutoff)));
        SpaceLayout::new(parts)
    }

    fn validate(&self) -> Result<()> {
        if let Self::GeneralPhi { phi } = self {
            if !(phi.is_finite() && (0.0..std::f64::consts::TAU).contains(phi)) {
                return Err(Error::InvalidArgument(format!("phi must lie in [0, 2pi), got {phi}")));
            }
        }
        Ok(())
    }
}

/// Propagator choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Backend {
    /// Closed forms for TMSC/SMSC and TMAC/DJC, block-exact otherwise.
    #[default]
    Auto,
    /// Closed form on the reduced model; TMSC and TMAC fields are mapped first.
    Closed,
    /// Block-wise exact exponentiation of the scheme's own Hamiltonian.
    BlockExact,
}

/// Uniform time grid on `[0, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub samples: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_max: 25.0, samples: 2001 }
    }
}

impl TimeGrid {
    pub fn new(t_max: f64, samples: usize) -> Result<Self> {
        let grid = Self { t_max, samples };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) || self.samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs t_max > 0 and at least 2 samples, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.t_max / (self.samples - 1) as f64;
        (0..self.samples).map(|k| k as f64 * step).collect()
    }
}

/// Run-level thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Concurrence below this counts as zero.
    pub zero: f64,
    /// Minimum width of a zero region that counts as sudden death.
    pub dead_width: f64,
    /// Probability mass allowed beyond the Fock cutoff.
    pub tail: f64,
    /// Population allowed in the top excitation sectors.
    pub leak: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero: tolerances::ZERO,
            dead_width: tolerances::DEAD_WIDTH,
            tail: tolerances::TAIL,
            leak: tolerances::LEAK,
        }
    }
}

/// Cutoff headroom added above the smallest tail-compliant cutoff.
pub const AUTO_MARGIN: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub scheme: Scheme,
    pub g: f64,
    /// Per-mode Fock cutoff; `None` picks one from the field's tail.
    pub cutoff: Option<usize>,
    /// Optional cap on the conserved excitation number; sectors above it
    /// count as truncated.
    pub excitation_cap: Option<usize>,
    pub grid: TimeGrid,
    pub tolerances: Tolerances,
    pub backend: Backend,
}

impl ModelConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            g: 1.0,
            cutoff: None,
            excitation_cap: None,
            grid: TimeGrid::default(),
            tolerances: Tolerances::default(),
            backend: Backend::Auto,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_grid(mut self, t_max: f64, samples: usize) -> Self {
        self.grid = TimeGrid { t_max, samples };
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::InvalidArgument(format!("g must be > 0, got {}", self.g)));
        }
        if let Some(d) = self.cutoff {
            if d < 2 {
                return Err(Error::InvalidArgument(format!("cutoff must be >= 2, got {d}")));
            }
        }
        if self.excitation_cap == Some(0) {
            return Err(Error::InvalidArgument("excitation cap must be positive".into()));
        }
        self.grid.validate()
    }

    /// The configured cutoff, or the smallest tail-compliant one plus
    /// [`AUTO_MARGIN`]. Two-mode schemes use the tail of the total photon
    /// number, which bounds both the mode mapping and the leakage.
    pub fn cutoff_for(&self, field: &FieldSpec) -> Result<usize> {
        if let Some(d) = self.cutoff {
            return Ok(d);
        }
        let tau = self.tolerances.tail;
        let required = if self.scheme.phi().is_some() && field.mode_count() != ModeCount::One {
            field.required_total_cutoff(tau)?
        } else {
            field.required_cutoff(tau)?
        };
        Ok(required + AUTO_MARGIN)
    }
}

/// `sum c sigma_j^+ a_q + h.c.` for `(atom, mode, c)` triples.
pub fn hamiltonian_from_couplings(layout: &SpaceLayout, couplings: &[(&str, &str, C64)]) -> Result<Operator> {
    let n = layout.total_dim();
    let mut h = CMatrix::zeros(n, n);
    for (_, (r, c, v)) in block::coupling_terms(layout, couplings)? {
        h[(r, c)] += v;
        h[(c, r)] += v.conj();
    }
    Operator::new(layout.clone(), h)
}

/// Coupling triples of `scheme`.
///
/// Two-mode schemes use `g [s1+ a1 + s1+ a2 + s2+ a1 + e^{i phi} s2+ a2] + h.c.`
/// on `(atom1, atom2, F1, F2)`.
fn scheme_couplings(scheme: Scheme, g: f64) -> Vec<(&'static str, &'static str, C64)> {
    let g = C64::new(g, 0.0);
    let s2g = g * std::f64::consts::SQRT_2;
    match scheme {
        Scheme::Smsc => vec![(ATOM1, TF1, s2g), (ATOM2, TF1, s2g)],
        Scheme::Djc => vec![(ATOM1, TF1, s2g), (ATOM2, TF2, s2g)],
        s => {
            let phi = s.phi().expect("two-mode scheme");
            vec![(ATOM1, F1, g), (ATOM1, F2, g), (ATOM2, F1, g), (ATOM2, F2, g * C64::from_polar(1.0, phi))]
        }
    }
}

/// Interaction Hamiltonian of `cfg.scheme` on its native layout.
pub fn interaction_hamiltonian(cfg: &ModelConfig, cutoff: usize) -> Result<Operator> {
    cfg.validate()?;
    hamiltonian_from_couplings(&cfg.scheme.layout(cutoff)?, &scheme_couplings(cfg.scheme, cfg.g))
}

/// Evolution frame actually integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Frame {
    Smsc,
    Djc,
    TwoMode,
}

impl Frame {
    /// Conserved sector of an (atoms, field) basis state.
    fn sector(self, atom_exc: [usize; 2], photons: &[usize]) -> usize {
        match self {
            Self::Smsc | Self::TwoMode => atom_exc[0] + atom_exc[1] + photons.iter().sum::<usize>(),
            Self::Djc => (atom_exc[0] + photons[0]).max(atom_exc[1] + photons[1]),
        }
    }
}

/// Atomic excitations of the basis index `a` of `{ee, eg, ge, gg}`.
fn atom_excitations(a: usize) -> [usize; 2] {
    [1 - a / 2, 1 - a % 2]
}

/// Photon-number distribution over the composite field index.
fn field_populations(field: &FieldState) -> Vec<f64> {
    let from_columns = |c: &CMatrix| -> Vec<f64> {
        c.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
    };
    match field {
        FieldState::Pure(s) => s.vector().iter().map(|z| z.norm_sqr()).collect(),
        FieldState::Mixed(e) => from_columns(e.columns()),
        FieldState::Product(a, b) => {
            let (pa, pb) = (from_columns(a.columns()), from_columns(b.columns()));
            pa.iter().flat_map(|x| pb.iter().map(move |y| x * y)).collect()
        }
    }
}

/// Population of sectors at or above `first`, for a product initial state.
fn sector_population(frame: Frame, atoms: &StateVector, field: &FieldState, first: usize) -> f64 {
    let layout = field.layout();
    let pf = field_populations(field);
    let mut total = 0.0;
    for (a, amp) in atoms.vector().iter().enumerate() {
        let pa = amp.norm_sqr();
        if pa == 0.0 {
            continue;
        }
        for (i, p) in pf.iter().enumerate() {
            if *p != 0.0 && frame.sector(atom_excitations(a), &layout.decode(i)) >= first {
                total += pa * p;
            }
        }
    }
    total
}

enum Engine {
    Smsc { columns: CMatrix, cutoff: usize },
    Djc { columns: CMatrix, cutoff: usize },
    /// DJC with an uncorrelated mixed field: product of single-atom channels.
    DjcChannel { atoms: CMatrix, first: CMatrix, second: CMatrix, cutoff: usize },
    Block { exact: Box<BlockExact>, prepared: Prepared },
}

/// A prepared time evolution of one initial state.
pub struct Evolution {
    engine: Engine,
    g: f64,
    layout: SpaceLayout,
    leakage: f64,
}

impl std::fmt::Debug for Evolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Evolution").field("layout", &self.layout).field("leakage", &self.leakage).finish()
    }
}

impl Evolution {
    /// Prepares the evolution of `initial` (on the native layout of
    /// `cfg.scheme`) with the backend selected by `cfg.backend`. Fails with
    /// [`Error::Leakage`] when the top excitation sectors hold more than
    /// `cfg.tolerances.leak`.
    pub fn new(initial: &InitialState, cfg: &ModelConfig) -> Result<Self> {
        Self::build(initial, cfg, true)
    }

    /// Like [`Evolution::new`], but a DJC product field is evolved as a full
    /// ensemble instead of through single-atom channels.
    pub fn new_without_channels(initial: &InitialState, cfg: &ModelConfig) -> Result<Self> {
        Self::build(initial, cfg, false)
    }

    fn build(initial: &InitialState, cfg: &ModelConfig, channels: bool) -> Result<Self> {
        cfg.validate()?;
        let field_layout = initial.field.layout();
        let expected: Vec<&str> = cfg.scheme.mode_labels().to_vec();
        let labels: Vec<&str> = field_layout.labels().iter().map(String::as_str).collect();
        if labels != expected {
            return Err(Error::LayoutMismatch(format!(
                "{} expects field modes {expected:?}, got {labels:?}",
                cfg.scheme.name()
            )));
        }
        let cutoff = field_layout.dims()[0];
        if field_layout.dims().iter().any(|&d| d != cutoff) {
            return Err(Error::LayoutMismatch("field modes must share one cutoff".into()));
        }
        let tau = cfg.tolerances.tail;

        let (frame, field, block) = match (cfg.scheme, cfg.backend) {
            (Scheme::Smsc, Backend::BlockExact) => (Frame::Smsc, initial.field.clone(), true),
            (Scheme::Smsc, _) => (Frame::Smsc, initial.field.clone(), false),
            (Scheme::Djc, Backend::BlockExact) => (Frame::Djc, initial.field.clone(), true),
            (Scheme::Djc, _) => (Frame::Djc, initial.field.clone(), false),
            (Scheme::Tmsc, Backend::Auto | Backend::Closed) => {
                (Frame::Smsc, mappings::map_field_tmsc(&initial.field, tau)?, false)
            }
            (Scheme::Tmac, Backend::Auto | Backend::Closed) => {
                (Frame::Djc, mappings::map_field_tmac(&initial.field, tau)?, false)
            }
            (Scheme::GeneralPhi { .. }, Backend::Closed) => {
                return Err(Error::InvalidArgument(
                    "closed forms exist only for phi = 0 and phi = pi".into(),
                ))
            }
            _ => (Frame::TwoMode, initial.field.clone(), true),
        };

        let first_top = match cfg.excitation_cap {
            Some(cap) => cap.saturating_sub(1),
            None => cutoff.saturating_sub(2),
        };
        let leakage = sector_population(frame, &initial.atoms, &field, first_top);
        if leakage > cfg.tolerances.leak {
            return Err(Error::Leakage { population: leakage, limit: cfg.tolerances.leak });
        }
        let complete = |a: usize, photons: &[usize]| frame.sector(atom_excitations(a), photons) < cutoff;

        let engine = match (&field, frame, block) {
            (FieldState::Product(f1, f2), Frame::Djc, false) if channels => {
                let atoms = initial.atoms.to_density().matrix().clone();
                Engine::DjcChannel {
                    atoms,
                    first: f1.columns().clone(),
                    second: f2.columns().clone(),
                    cutoff,
                }
            }
            _ => {
                let full = crate::states::InitialState::new(initial.atoms.clone(), field.clone())?.to_ensemble();
                let columns = project_complete(&full, &complete);
                match (frame, block) {
                    (Frame::Smsc, false) => Engine::Smsc { columns, cutoff },
                    (Frame::Djc, false) => Engine::Djc { columns, cutoff },
                    _ => {
                        let scheme = match frame {
                            Frame::Smsc => Scheme::Smsc,
                            Frame::Djc => Scheme::Djc,
                            Frame::TwoMode => cfg.scheme,
                        };
                        let exact =
                            BlockExact::from_couplings(&scheme.layout(cutoff)?, &scheme_couplings(scheme, cfg.g))?;
                        let prepared = exact.prepare(&columns);
                        Engine::Block { exact: Box::new(exact), prepared }
                    }
                }
            }
        };
        let layout = SpaceLayout::atoms().concat(&field.layout())?;
        Ok(Self { engine, g: cfg.g, layout, leakage })
    }

    /// Population of the two highest complete excitation sectors and above.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// Layout of the integrated frame (SMSC or DJC for mapped schemes).
    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    /// Full-system components `C(t)` with `rho(t) = C C^dag`, when the engine
    /// keeps them (everything except the DJC channel path).
    pub fn columns_at(&self, t: f64) -> Option<CMatrix> {
        let gt = self.g * t;
        match &self.engine {
            Engine::Smsc { columns, cutoff } => Some(SmscPropagator::new(gt, *cutoff).apply_columns(columns)),
            Engine::Djc { columns, cutoff } => {
                let pair = PairPropagator::new(gt, *cutoff);
                let mut out = CMatrix::zeros(columns.nrows(), columns.ncols());
                let mut scratch = vec![ZERO; columns.nrows()];
                for (src, mut dst) in columns.column_iter().zip(out.column_iter_mut()) {
                    PairPropagator::apply_both(&pair, &pair, src.as_slice(), &mut scratch, dst.as_mut_slice());
                }
                Some(out)
            }
            Engine::DjcChannel { .. } => None,
            Engine::Block { exact, prepared } => Some(exact.evolve(prepared, t)),
        }
    }

    /// Pure full state at `t`, if the initial state was pure.
    pub fn pure_state_at(&self, t: f64) -> Option<StateVector> {
        let cols = self.columns_at(t)?;
        if cols.ncols() != 1 {
            return None;
        }
        StateVector::normalized(self.layout.clone(), cols.column(0).into_owned()).ok()
    }

    /// Reduced atomic density matrix at `t`.
    pub fn atoms_at(&self, t: f64) -> Result<DensityMatrix> {
        let m = match &self.engine {
            Engine::DjcChannel { atoms, first, second, cutoff } => {
                let pair = PairPropagator::new(self.g * t, *cutoff);
                let l1 = pair.channel(first);
                let l2 = pair.channel(second);
                apply_product_channel(&l1, &l2, atoms)
            }
            _ => trace_trailing(&self.columns_at(t).expect("column engine"), 4),
        };
        let tr = m.trace().re;
        DensityMatrix::from_trusted(SpaceLayout::atoms(), m / C64::new(tr, 0.0))
    }
}

/// Drops components outside the excitation-complete subspace and restores
/// unit trace. Rows are `(atoms, field...)` in row-major order.
fn project_complete(ensemble: &Ensemble, complete: &dyn Fn(usize, &[usize]) -> bool) -> CMatrix {
    let layout = ensemble.layout();
    let field_layout = layout.select(&(2..layout.len()).collect::<Vec<_>>());
    let rest = field_layout.total_dim();
    let mut columns = ensemble.columns().clone();
    for a in 0..4 {
        for f in 0..rest {
            if !complete(a, &field_layout.decode(f)) {
                columns.row_mut(a * rest + f).fill(ZERO);
            }
        }
    }
    let tr: f64 = columns.iter().map(|z| z.norm_sqr()).sum();
    columns / C64::new(tr.sqrt(), 0.0)
}

/// Atomic trajectory on `cfg.grid`.
pub fn evolve_reduced(initial: &InitialState, cfg: &ModelConfig) -> Result<Vec<(f64, DensityMatrix)>> {
    let evolution = Evolution::new(initial, cfg)?;
    cfg.grid.times().into_iter().map(|t| Ok((t, evolution.atoms_at(t)?))).collect()
}
