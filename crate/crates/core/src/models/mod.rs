//! Closed-form models: the gain-loss dimer (with its PT-symmetric limit) and
//! the Bethe-Lamb two-level atom.

pub mod bethe_lamb;
pub mod gain_loss;

pub use bethe_lamb::{
    bl_amplitudes, bl_bound, bl_propagator, bl_quantities, bl_state, bl_trajectory,
    BetheLambParams, BetheLambQuantities,
};
pub use gain_loss::{
    gl_amplitudes, gl_bound, gl_propagator, gl_quantities, gl_spectrum, gl_state, gl_trajectory,
    GainLossParams, GainLossQuantities, Regime, Spectrum,
};

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{QslError, Result};
use crate::numerics::{c, ComplexVector};

/// Minimum number of steps per trajectory.
pub const MIN_STEPS: usize = 2000;
/// Steps per unit of `t_max * rate` above the minimum.
pub const STEPS_PER_RATE: f64 = 40.0;

/// `max(2000, 40 ceil(t_max * rate))`.
pub fn default_steps(t_max: f64, rate: f64) -> usize {
    let scaled = STEPS_PER_RATE * (t_max * rate).ceil();
    if scaled.is_finite() && scaled > MIN_STEPS as f64 {
        scaled as usize
    } else {
        MIN_STEPS
    }
}

/// `(|0> + |1>) / sqrt2`.
pub fn maximally_coherent() -> ComplexVector {
    ComplexVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)])
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(QslError::InvalidArgument(format!(
            "time must be finite and non-negative, got {t}"
        )))
    }
}

/// Real part of `z` once its imaginary part is confirmed to be roundoff.
pub(crate) fn check_imaginary(quantity: &'static str, z: Complex64) -> Result<f64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(QslError::NonFinite(quantity.to_string()));
    }
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(QslError::ImaginaryResidue {
            quantity,
            residue: z.im,
        });
    }
    Ok(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_step_rule() {
        assert_eq!(default_steps(1.0, 1.0), 2000);
        assert_eq!(default_steps(100.0, 1.0), 4000);
        assert!((4000..=4040).contains(&default_steps(1.6e-7, 6.25e8)));
        assert_eq!(default_steps(1.0, f64::INFINITY), 2000);
    }
}
