//! Local adiabatic quantum search along driven interpolation paths.
//!
//! The search Hamiltonian interpolates from `H0 = I - |psi0><psi0|` to
//! `Hm = I - |m><m|` with an extra path-deforming term
//! `a(s) (|psi0><m| + |m><psi0|)`. Everything lives in the two-dimensional
//! invariant subspace spanned by `|m>` and `|psi0>`, so spectra, locally
//! adiabatic schedules and Schrödinger propagation are exact at any database
//! size. Dense full-space realizations exist for small qubit counts and back
//! the reduction in tests.
//!
//! Modules, bottom up:
//!
//! * [`model`]: search instances, driving profiles, Hamiltonian construction.
//! * [`spectrum`]: eigensystems, gaps, minimum gap, `dH/ds` matrix elements.
//! * [`schedule`]: local schedules `ds/dt = eps g(s)^2`, runtimes, closed forms.
//! * [`dynamics`]: exact piecewise propagation and fidelities.
//! * [`experiments`]: figure tables, sweeps, scaling fits.
//! * [`oracle`]: slow independent reference implementations.
//! * [`cli`]: the `adia` command-line front end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod schedule;
pub mod spectrum;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{DrivingProfile, EffectiveHamiltonian, FullHamiltonian, ReducedState, SearchInstance};
