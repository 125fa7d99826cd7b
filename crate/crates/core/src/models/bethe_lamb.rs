//! Driven two-level atom with level-dependent radiative decay, in the
//! rotating-wave approximation (hbar = 1):
//!
//! ```text
//! H(t) = [[-i gamma_1 / 2, Omega e^{i Delta t}], [Omega e^{-i Delta t}, -i gamma_2 / 2]]
//! ```
//!
//! The propagator factors as `U(t) = T(t) Z(t) e^{i M t}` with
//! `T = diag(e^{-gamma_1 t/2}, e^{-gamma_2 t/2})`,
//! `Z = diag(1, e^{-i t (Delta - i gamma)})`, `M = [[0, -Omega], [-Omega, Delta - i gamma]]`
//! and `gamma = (gamma_1 - gamma_2) / 2`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{split_hamiltonian, two_level_speed, GeneratorSpec, HermitianSplit};
use crate::error::{QslError, Result};
use crate::geometry::{qsl_report, BoundReport, PureState, Trajectory};
use crate::numerics::{c, mat_exp, ComplexMatrix, ComplexVector, TimeGrid, I};

use super::{check_time, default_steps, maximally_coherent};

/// Below this `|c2| t`, the hyperbolic factors are replaced by their series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetheLambParams {
    /// Excited-state decay rate.
    pub gamma_1: f64,
    /// Ground-state decay rate.
    pub gamma_2: f64,
    /// Laser detuning.
    #[serde(rename = "Delta")]
    pub detuning: f64,
    /// Rabi frequency.
    #[serde(rename = "Omega")]
    pub rabi: f64,
}

impl BetheLambParams {
    pub fn new(gamma_1: f64, gamma_2: f64, detuning: f64, rabi: f64) -> Result<Self> {
        for (name, v) in [("gamma_1", gamma_1), ("gamma_2", gamma_2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(QslError::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [("Delta", detuning), ("Omega", rabi)] {
            if !v.is_finite() {
                return Err(QslError::InvalidArgument(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        Ok(Self {
            gamma_1,
            gamma_2,
            detuning,
            rabi,
        })
    }

    /// Hydrogen-like parameters: lifetimes 0.1 s and 1.6 ns, 180 MHz detuning,
    /// 60 MHz Rabi frequency.
    pub fn hydrogen_like() -> Self {
        Self {
            gamma_1: 1.0 / 0.1,
            gamma_2: 1.0 / 1.6e-9,
            detuning: 1.8e8,
            rabi: 6e7,
        }
    }

    /// `(gamma_1 - gamma_2) / 2`.
    pub fn gamma(&self) -> f64 {
        0.5 * (self.gamma_1 - self.gamma_2)
    }

    /// Principal `sqrt((gamma + i Delta)^2 - 4 Omega^2)`.
    pub fn c2(&self) -> Complex64 {
        let a = c(self.gamma(), self.detuning);
        (a * a - 4.0 * self.rabi * self.rabi).sqrt()
    }

    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let drive = Complex64::from_polar(self.rabi, self.detuning * t);
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, -0.5 * self.gamma_1),
                drive,
                drive.conj(),
                c(0.0, -0.5 * self.gamma_2),
            ],
        )
    }

    pub fn split(&self, t: f64) -> HermitianSplit {
        split_hamiltonian(&self.hamiltonian(t)).expect("finite 2x2 generator")
    }

    pub fn generator_spec(&self) -> GeneratorSpec {
        let p = *self;
        GeneratorSpec::time_dependent(2, Arc::new(move |t| p.hamiltonian(t)), false, 1.0)
            .expect("valid generator")
    }

    /// `max(|c2|, |Delta|, |Omega|, gamma_1, gamma_2)`.
    pub fn characteristic_rate(&self) -> f64 {
        [
            self.c2().norm(),
            self.detuning.abs(),
            self.rabi.abs(),
            self.gamma_1,
            self.gamma_2,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `T(t)`.
    pub fn floquet_t(&self, t: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            c((-0.5 * self.gamma_1 * t).exp(), 0.0),
            c((-0.5 * self.gamma_2 * t).exp(), 0.0),
        ]))
    }

    /// `Z(t)`.
    pub fn floquet_z(&self, t: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            c(1.0, 0.0),
            (-I * t * c(self.detuning, -self.gamma())).exp(),
        ]))
    }

    /// `M`.
    pub fn floquet_m(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, 0.0),
                c(-self.rabi, 0.0),
                c(-self.rabi, 0.0),
                c(self.detuning, -self.gamma()),
            ],
        )
    }
}

/// `U(t) = T(t) Z(t) e^{i M t}`.
///
/// `T` and `Z` are diagonal; their product is formed from summed exponents so
/// the separately overflowing factors never materialize.
pub fn bl_propagator(p: &BetheLambParams, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    let lower = c(-0.5 * p.gamma_2 * t, 0.0) - I * t * c(p.detuning, -p.gamma());
    let tz = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
        c(-0.5 * p.gamma_1 * t, 0.0).exp(),
        lower.exp(),
    ]));
    let rotating = mat_exp(&(p.floquet_m() * I), t)?;
    Ok(tz * rotating)
}

/// Raw evolved amplitudes `U(t) (|0> + |1>)/sqrt2`; the norm carries the decay.
pub fn bl_amplitudes(p: &BetheLambParams, t: f64) -> Result<ComplexVector> {
    Ok(bl_propagator(p, t)? * maximally_coherent())
}

/// `(z1, z2) / c2`, rescaled by `e^{-c2 t / 2}` so that neither overflows.
/// The common factor drops out of every normalized quantity.
fn scaled_z(p: &BetheLambParams, t: f64) -> (Complex64, Complex64) {
    let c2 = p.c2();
    let x = c2 * (0.5 * t);
    let damp = (-x * 2.0).exp();
    let cosh = (c(1.0, 0.0) + damp) * 0.5;
    // sinh(x) e^{-x} / c2
    let sinh = if c2.norm() * t < SERIES_THRESHOLD {
        c(0.5 * t, 0.0) * (c(1.0, 0.0) + x * x / 6.0) * (-x).exp()
    } else {
        (c(1.0, 0.0) - damp) / (c2 * 2.0)
    };
    let sqrt2 = std::f64::consts::SQRT_2;
    let base = c(p.gamma(), p.detuning) / sqrt2;
    let drive = I * (sqrt2 * p.rabi);
    let z1 = cosh / sqrt2 - (base + drive) * sinh;
    let z2 = cosh / sqrt2 + (base - drive) * sinh;
    (z1, z2)
}

fn rotated_amplitudes(p: &BetheLambParams, t: f64) -> ComplexVector {
    let (z1, z2) = scaled_z(p, t);
    let phase = Complex64::from_polar(1.0, 0.5 * t * p.detuning);
    ComplexVector::from_vec(vec![phase * z1, phase.conj() * z2])
}

/// Normalized state `(e^{i t Delta/2} z1, e^{-i t Delta/2} z2) / sqrt(|z1|^2 + |z2|^2)`.
pub fn bl_state(p: &BetheLambParams, t: f64) -> Result<PureState> {
    check_time(t)?;
    let raw = PureState::new(rotated_amplitudes(p, t))?;
    PureState::new(raw.normalized())
}

/// Trajectory of normalized closed-form states on `grid`.
pub fn bl_trajectory(p: &BetheLambParams, grid: TimeGrid) -> Result<Trajectory> {
    grid.validate()?;
    let samples = grid
        .times()
        .into_iter()
        .map(|t| bl_state(p, t))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(samples, grid.dt(), 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetheLambQuantities {
    /// Geodesic distance from the initial state.
    pub s0_term: f64,
    pub var_h_plus: f64,
    pub var_gamma: f64,
    /// `i <[Gamma, H+]>`.
    pub comm_term: f64,
    /// `2 sqrt(var_h_plus + var_gamma + comm_term)`, evaluated without cancellation.
    pub v: f64,
}

/// Closed-form geodesic distance and speed ingredients at time `t`.
pub fn bl_quantities(p: &BetheLambParams, t: f64) -> Result<BetheLambQuantities> {
    check_time(t)?;
    let (z1, z2) = scaled_z(p, t);
    let norm2 = z1.norm_sqr() + z2.norm_sqr();
    if !(norm2 > 0.0 && norm2.is_finite()) {
        return Err(QslError::ZeroNorm);
    }
    let cross = z1 * z2.conj();
    let phase = Complex64::from_polar(1.0, 0.5 * t * p.detuning);
    let overlap = (phase * z1 + phase.conj() * z2).norm() / (2.0 * norm2).sqrt();
    let gamma = p.gamma();
    Ok(BetheLambQuantities {
        s0_term: 2.0 * overlap.min(1.0).acos(),
        var_h_plus: p.rabi * p.rabi * (1.0 - 4.0 * cross.re * cross.re / (norm2 * norm2)),
        var_gamma: z1.norm_sqr() * z2.norm_sqr() * gamma * gamma / (norm2 * norm2),
        comm_term: 2.0 * p.rabi * gamma * cross.im / norm2,
        v: two_level_speed(&p.hamiltonian(t), &rotated_amplitudes(p, t), 1.0)?,
    })
}

/// Speed-limit report over `[0, t_total]`; `steps = None` sizes the grid to
/// resolve the fastest rate in the problem.
pub fn bl_bound(p: &BetheLambParams, t_total: f64, steps: Option<usize>) -> Result<BoundReport> {
    let steps = steps.unwrap_or_else(|| default_steps(t_total, p.characteristic_rate()));
    let traj = bl_trajectory(p, TimeGrid::new(t_total, steps)?)?;
    qsl_report(&traj)
}
