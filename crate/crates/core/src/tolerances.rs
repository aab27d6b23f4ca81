//! Numerical tolerances shared across the crate.

/// Hermiticity of constructed density matrices, `max |rho - rho^dag|`.
pub const HERMITIAN: f64 = 1e-12;

/// `|tr rho - 1|`.
pub const TRACE: f64 = 1e-10;

/// Eigenvalues in `(-PSD, 0)` are clipped to zero; anything lower is an error.
pub const PSD: f64 = 1e-10;

/// `| <psi|psi> - 1 |` accepted by `StateVector::new`.
pub const NORM: f64 = 1e-10;

/// Probability mass allowed beyond a Fock cutoff.
pub const TAIL: f64 = 1e-8;

/// Population allowed in the two highest complete excitation sectors (and above).
pub const LEAK: f64 = 1e-6;

/// Concurrence below this value counts as "no entanglement".
pub const ZERO: f64 = 1e-9;

/// Minimum width (in units of 1/g) of a zero region that counts as sudden death.
pub const DEAD_WIDTH: f64 = 0.01;

/// Imaginary parts of the rho*rho~ spectrum below this are discarded.
pub const EIGEN_IMAG: f64 = 1e-10;

/// Propagator unitarity on the excitation-complete subspace.
pub const UNITARY: f64 = 1e-10;
