//! Numerical laboratory for quantifier-based quantum proof systems.
//!
//! Dense states and effects live in [`qstate`]; the SWAP and product tests in
//! [`protocols`]; quantified game values in [`games`]; compiled verifiers in
//! [`verifiers`]; disentanglers, hitting sets and the toy amplifier in
//! [`disentangle`]; sparse Hamiltonians and the clock construction in
//! [`hamiltonian`].

pub mod disentangle;
pub mod error;
pub mod games;
pub mod hamiltonian;
pub mod protocols;
pub mod verifiers;
pub mod qstate;

pub use error::{Error, Result};
pub use qstate::{DensityOperator, EffectOperator, KrausChannel, Layout, PureState, SeededRng};
