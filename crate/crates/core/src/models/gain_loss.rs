//! Two coupled modes, one damped at `gamma_L`, one pumped at `gamma_G`,
//! exchanging excitations at rate `g`:
//!
//! ```text
//! H = [[-i gamma_L, g], [g, i gamma_G]]
//! ```
//!
//! With `kappa_pm = (gamma_L +- gamma_G) / 2` and `delta = sqrt(g^2 - kappa_+^2)`
//! the eigenvalues are `-i kappa_- +- delta`. `delta` is real in strong coupling
//! (`g > kappa_+`), imaginary in weak coupling, and zero at the exceptional
//! point. All closed forms here run through one complex-`delta` code path and
//! are written in terms of `sin(delta t) / delta`, which stays finite at the
//! exceptional point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{commutator_term, split_hamiltonian, two_level_speed, HermitianSplit};
use crate::error::{QslError, Result};
use crate::geometry::{qsl_report, BoundReport, PureState, Trajectory};
use crate::numerics::{c, ComplexMatrix, ComplexVector, TimeGrid, I};

use super::{check_imaginary, check_time, default_steps, maximally_coherent};

/// Below this `|delta t|`, `sin(delta t)/delta` is replaced by its series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLossParams {
    pub g: f64,
    #[serde(rename = "gamma_L")]
    pub gamma_l: f64,
    #[serde(rename = "gamma_G")]
    pub gamma_g: f64,
}

impl GainLossParams {
    pub fn new(g: f64, gamma_l: f64, gamma_g: f64) -> Result<Self> {
        for (name, v) in [("g", g), ("gamma_L", gamma_l), ("gamma_G", gamma_g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(QslError::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self {
            g,
            gamma_l,
            gamma_g,
        })
    }

    /// Balanced gain and loss.
    pub fn pt_symmetric(g: f64, gamma: f64) -> Result<Self> {
        Self::new(g, gamma, gamma)
    }

    pub fn kappa_plus(&self) -> f64 {
        0.5 * (self.gamma_l + self.gamma_g)
    }

    pub fn kappa_minus(&self) -> f64 {
        0.5 * (self.gamma_l - self.gamma_g)
    }

    /// Principal square root of `g^2 - kappa_+^2`.
    pub fn delta(&self) -> Complex64 {
        let kp = self.kappa_plus();
        c((self.g - kp) * (self.g + kp), 0.0).sqrt()
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0, -self.gamma_l),
                c(self.g, 0.0),
                c(self.g, 0.0),
                c(0.0, self.gamma_g),
            ],
        )
    }

    pub fn split(&self) -> HermitianSplit {
        split_hamiltonian(&self.hamiltonian()).expect("finite 2x2 generator")
    }

    /// Rate used to size time grids: `max(|delta|, kappa_+, g)`.
    pub fn characteristic_rate(&self) -> f64 {
        self.delta().norm().max(self.kappa_plus()).max(self.g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Strong,
    Weak,
    Exceptional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub regime: Regime,
}

pub fn gl_spectrum(p: &GainLossParams) -> Spectrum {
    let kp = p.kappa_plus();
    let shift = c(0.0, -p.kappa_minus());
    let regime = if (p.g - kp).abs() < 1e-12 * p.g.max(kp) || (p.g == 0.0 && kp == 0.0) {
        Regime::Exceptional
    } else if p.g > kp {
        Regime::Strong
    } else {
        Regime::Weak
    };
    let delta = if regime == Regime::Exceptional {
        c(0.0, 0.0)
    } else {
        p.delta()
    };
    Spectrum {
        lambda_plus: shift + delta,
        lambda_minus: shift - delta,
        regime,
    }
}

/// `(cos(delta t), sin(delta t) / delta)`.
fn trig_pair(delta: Complex64, t: f64) -> (Complex64, Complex64) {
    let x = delta * t;
    let cos = x.cos();
    let sinc = if x.norm() < SERIES_THRESHOLD {
        c(t, 0.0) * (c(1.0, 0.0) - x * x / 6.0)
    } else {
        x.sin() / delta
    };
    (cos, sinc)
}

/// Non-unitary propagator `exp(-i H t)`:
///
/// ```text
/// e^{-kappa_- t} [ cos(delta t) I + sin(delta t)/delta [[-kappa_+, -i g], [-i g, kappa_+]] ]
/// ```
pub fn gl_propagator(p: &GainLossParams, t: f64) -> Result<ComplexMatrix> {
    check_time(t)?;
    let (cos, sinc) = trig_pair(p.delta(), t);
    let kp = p.kappa_plus();
    let decay = c((-p.kappa_minus() * t).exp(), 0.0);
    let off = -I * p.g * sinc;
    Ok(ComplexMatrix::from_row_slice(2, 2, &[cos - sinc * kp, off, off, cos + sinc * kp]) * decay)
}

/// Raw (unnormalized) evolved amplitudes from the maximally coherent start.
pub fn gl_amplitudes(p: &GainLossParams, t: f64) -> Result<ComplexVector> {
    Ok(gl_propagator(p, t)? * maximally_coherent())
}

/// Normalized evolved state from `(|0> + |1>)/sqrt2`.
pub fn gl_state(p: &GainLossParams, t: f64) -> Result<PureState> {
    let raw = PureState::new(gl_amplitudes(p, t)?)?;
    PureState::new(raw.normalized())
}

/// Sampled trajectory on `[0, t_max]`, keeping raw amplitudes.
pub fn gl_trajectory(p: &GainLossParams, grid: TimeGrid) -> Result<Trajectory> {
    grid.validate()?;
    let samples = grid
        .times()
        .into_iter()
        .map(|t| gl_amplitudes(p, t))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_amplitudes(samples, grid.dt(), 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLossQuantities {
    pub var_h_plus: f64,
    pub var_gamma: f64,
    /// `i <[Gamma, H+]>` on the normalized state.
    pub comm_term: f64,
    pub v: f64,
}

/// `A(t) / delta^2 = 1 + 2 kappa_+^2 (sin(delta t)/delta)^2`, where
/// `A = g^2 - kappa_+^2 cos(2 delta t)`.
fn scaled_denominator(p: &GainLossParams, sinc: Complex64) -> Complex64 {
    let kp = p.kappa_plus();
    c(1.0, 0.0) + sinc * sinc * (2.0 * kp * kp)
}

/// Variance of `H+` on the evolved state, `g^2 (1 - delta^4 / A^2)`.
pub fn gl_var_h_plus(p: &GainLossParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let (_, sinc) = trig_pair(p.delta(), t);
    let a = scaled_denominator(p, sinc);
    let v = (c(1.0, 0.0) - (a * a).inv()) * (p.g * p.g);
    check_imaginary("var_H+", v)
}

/// Variance of `Gamma`, `kappa_+^2 - delta^2 kappa_+^4 sin^2(2 delta t) / A^2`.
pub fn gl_var_gamma(p: &GainLossParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let (cos, sinc) = trig_pair(p.delta(), t);
    let kp = p.kappa_plus();
    let a = scaled_denominator(p, sinc);
    let v = c(kp * kp, 0.0) - sinc * sinc * cos * cos * (4.0 * kp.powi(4)) / (a * a);
    check_imaginary("var_Gamma", v)
}

/// Closed-form speed ingredients. The commutator term is measured as an
/// expectation on the evolved state; see [`displayed`] for the alternatives.
/// `v` equals `2 sqrt(var_h_plus + var_gamma + comm_term)`, evaluated without
/// cancellation.
pub fn gl_quantities(p: &GainLossParams, t: f64) -> Result<GainLossQuantities> {
    let var_h_plus = gl_var_h_plus(p, t)?;
    let var_gamma = gl_var_gamma(p, t)?;
    let amplitudes = gl_amplitudes(p, t)?;
    let comm_term = commutator_term(&p.split(), &PureState::new(amplitudes.clone())?)?;
    Ok(GainLossQuantities {
        var_h_plus,
        var_gamma,
        comm_term,
        v: two_level_speed(&p.hamiltonian(), &amplitudes, 1.0)?,
    })
}

/// Speed-limit report over `[0, t_total]`; `steps = None` uses the default grid rule.
pub fn gl_bound(p: &GainLossParams, t_total: f64, steps: Option<usize>) -> Result<BoundReport> {
    let steps = steps.unwrap_or_else(|| default_steps(t_total, p.characteristic_rate()));
    let traj = gl_trajectory(p, TimeGrid::new(t_total, steps)?)?;
    qsl_report(&traj)
}

/// Alternative closed forms kept for comparison against measured values.
///
/// These are the expressions as usually displayed for this model, evaluated
/// literally with complex `delta`. None of them feed the shipped speed.
pub mod displayed {
    use super::*;

    fn a_of_t(p: &GainLossParams, t: f64) -> Complex64 {
        let kp = p.kappa_plus();
        c(p.g * p.g, 0.0) - (p.delta() * (2.0 * t)).cos() * (kp * kp)
    }

    /// `g^2 (1 - delta^4 / (g^2 - kappa_+^2 cos 2 delta t)^2)`; 0/0 at the
    /// exceptional point.
    pub fn var_h_plus(p: &GainLossParams, t: f64) -> Complex64 {
        let d2 = p.delta() * p.delta();
        let a = a_of_t(p, t);
        (c(1.0, 0.0) - d2 * d2 / (a * a)) * (p.g * p.g)
    }

    pub fn var_gamma(p: &GainLossParams, t: f64) -> Complex64 {
        let kp = p.kappa_plus();
        let d = p.delta();
        let a = a_of_t(p, t);
        let s2 = (d * (2.0 * t)).sin();
        c(kp * kp, 0.0) - d * d * s2 * s2 * kp.powi(4) / (a * a)
    }

    /// `<[Gamma, H+]> = 4 i g^2 kappa_+^2 e^{-2 kappa_- t} sin^2(delta t) / delta^2`.
    pub fn commutator(p: &GainLossParams, t: f64) -> Complex64 {
        let (_, sinc) = trig_pair(p.delta(), t);
        let kp = p.kappa_plus();
        I * sinc * sinc * (4.0 * p.g * p.g * kp * kp * (-2.0 * p.kappa_minus() * t).exp())
    }

    /// `<[Gamma, H+]>` on the normalized state,
    /// `4 i g^2 kappa_+^2 sin^2(delta t) / (g^2 - kappa_+^2 cos 2 delta t)`.
    pub fn commutator_normalized(p: &GainLossParams, t: f64) -> Complex64 {
        let (_, sinc) = trig_pair(p.delta(), t);
        let kp = p.kappa_plus();
        I * sinc * sinc * (4.0 * p.g * p.g * kp * kp) / scaled_denominator(p, sinc)
    }

    /// Collected speed
    /// `2 / (A sqrt2) [2g^6 - 2g^4 k^2 - g^2 (2 delta^4 + k^4) - delta^2 k^4 + k^6]^{1/2}`.
    pub fn speed(p: &GainLossParams, t: f64) -> Complex64 {
        let g2 = p.g * p.g;
        let k2 = p.kappa_plus().powi(2);
        let d2 = p.delta() * p.delta();
        let poly = c(
            2.0 * g2.powi(3) - 2.0 * g2 * g2 * k2 - g2 * k2 * k2 + k2.powi(3),
            0.0,
        ) - d2 * d2 * (2.0 * g2)
            - d2 * (k2 * k2);
        poly.sqrt() * 2.0 / (a_of_t(p, t) * std::f64::consts::SQRT_2)
    }
}
