//! Simulation and analysis toolkit for a superradiantly pumped cavity
//! quantum Otto engine.
//!
//! The physical setup is a damped single-mode cavity that is repeatedly
//! "kicked" by small clusters of coherently prepared two-level atoms
//! (Tavis–Cummings coupling, Lindblad cavity damping). The toolkit covers:
//!
//! - [`hilbert`]: finite Hilbert spaces, ladder/spin operators, thermal and
//!   displaced (thermal coherent) states, tensor products, partial traces,
//!   and Uhlmann fidelity.
//! - [`lindblad`]: Hamiltonian and dissipator construction plus an adaptive
//!   embedded Runge–Kutta integrator for the master equation with
//!   trace/Hermiticity/positivity integrity guards.
//! - [`protocol`]: the repeated-injection ignition stroke driving the cavity
//!   to its superradiant steady state, with steady-state statistics and
//!   decoherence sweeps.
//! - [`otto`]: effective temperatures and four-stroke quantum Otto cycle
//!   bookkeeping (heat intake/output, work, efficiency).
//! - [`fitting`]: quadratic/power-law scaling fits, thermal-coherent-state
//!   fits, and the single-atom micromaser intensity oracle.
//! - [`cost`]: the analytic coherence-generation cost chain (pulse energy
//!   per atom, per cluster, total, and cost/work ratio).
//!
//! Energies, times, and temperatures are expressed in units of the high
//! frequency `omega_H` (`hbar = k_B = 1`) unless a function explicitly works
//! in SI units.

pub mod cost;
pub mod error;
pub mod fitting;
pub mod hilbert;
pub mod linalg;
pub mod lindblad;
pub mod otto;
pub mod protocol;

pub use error::{Error, Result};
