//! Generalised quantum speed limits (GQSL) for arbitrary continuous evolutions
//! of finite-dimensional quantum states.
//!
//! The bound is geometric: a state curve `t -> |psi(t)>` traced in projective
//! Hilbert space has Fubini-Study length `S` at least the geodesic distance
//! `S0` between its endpoints, so `T >= T_qsl = S0 / V_bar` with `V_bar` the
//! time-averaged speed. Nothing in that argument needs unitarity, so the same
//! pipeline covers Hermitian, non-Hermitian and (via purification) mixed-state
//! dynamics.
//!
//! Layout:
//! - [`numerics`]: dense complex linear algebra, matrix exponential, RK4, Simpson.
//! - [`geometry`]: Fubini-Study distance, speed, and the bound report.
//! - [`dynamics`]: generators, Hermitian/anti-Hermitian split, variance-form speeds.
//! - [`models`]: gain-loss (incl. PT-symmetric) and Bethe-Lamb closed forms.
//! - [`mixed`]: purification of density-matrix trajectories.
//! - [`cli`]: the `qsl` command-line surface.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod mixed;
pub mod models;
pub mod numerics;

pub use error::{QslError, Result};
