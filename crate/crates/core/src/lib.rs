//! Exact numerics for two two-level atoms coupled to two resonant field
//! modes: Hamiltonians for any separation phase, closed-form propagators of
//! the single-mode (symmetric) and double Jaynes-Cummings reductions,
//! the mode mappings between them, entanglement measures and the
//! sudden-death / death-for-an-instant / always-alive classification.

pub mod classify;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod mappings;
pub mod states;
pub mod tolerances;

pub use classify::{
    classify_series, find_threshold, table1_harness, EntanglementClass, EntanglementSeries, Label, Scenario, Table1Report,
};
pub use dynamics::{evolve_reduced, Backend, Evolution, ModelConfig, Scheme, TimeGrid, Tolerances};
pub use entanglement::{
    concurrence, concurrence_margin, eof, negativity, pure_state_negativities, small_squeezing_negativities, Measure,
    MeasureResult,
};
pub use error::{Error, Result};
pub use hilbert::{
    annihilation, creation, embed, partial_trace, partial_transpose, sigma_minus, sigma_plus,
    DensityMatrix, Ensemble, Operator, SpaceLayout, StateVector, C64,
};
pub use mappings::{mode_transform_unitary, reduce_field_spec, tmac_to_djc, tmsc_to_smsc, verify_equivalence, ModeTransform};
pub use states::{assemble_initial, atomic_state, AtomicLabel, ComplexParam, FieldSpec, FieldState, InitialState};
