//! Fubini-Study geometry on rays of unnormalized vectors, evolution speed
//! along sampled curves, and the speed-limit report.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::numerics::{check_finite_vector, integrate_samples, ComplexVector};

/// Default lower bound on `|<psi_i|psi_{i+1}>|` between consecutive samples.
pub const DEFAULT_CONTINUITY: f64 = 0.9;

/// Allowed shortfall of `S` below `S0` before the grid is declared too coarse.
pub const PATH_TOLERANCE: f64 = 1e-4;

/// Slack for negative speed radicands produced by roundoff.
pub const RADICAND_SLACK: f64 = 1e-10;

/// A ray in projective Hilbert space, stored as raw amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    norm: f64,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        check_finite_vector(&amplitudes, "state amplitudes")?;
        let norm = amplitudes.norm();
        if norm == 0.0 || amplitudes.is_empty() {
            return Err(QslError::ZeroNorm);
        }
        Ok(Self { amplitudes, norm })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(ComplexVector::from_column_slice(amplitudes))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn normalized(&self) -> ComplexVector {
        &self.amplitudes / Complex64::new(self.norm, 0.0)
    }

    /// `<self~|other~>` between the normalized representatives.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes) / (self.norm * other.norm))
    }

    fn check_dim(&self, other: &PureState) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QslError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `(|<a~|b~>|, ||b~ - <a~|b~> a~||)`: cosine and sine of half the
    /// geodesic angle. The sine comes from the orthogonal component so it
    /// stays accurate for nearby rays.
    fn angle_parts(&self, other: &PureState) -> Result<(f64, f64)> {
        self.check_dim(other)?;
        let a = self.normalized();
        let b = other.normalized();
        let ov = a.dotc(&b);
        let perp = (b - a * ov).norm();
        Ok((ov.norm().min(1.0), perp.min(1.0)))
    }
}

/// Generalized Fubini-Study distance `2 sqrt(1 - |<a~|b~>|^2)`, in `[0, 2]`.
pub fn fs_distance(a: &PureState, b: &PureState) -> Result<f64> {
    let (_, sin) = a.angle_parts(b)?;
    Ok(2.0 * sin)
}

/// Geodesic distance `2 arccos |<a~|b~>|`, in `[0, pi]`.
pub fn geodesic_distance(a: &PureState, b: &PureState) -> Result<f64> {
    let (cos, sin) = a.angle_parts(b)?;
    Ok(2.0 * sin.atan2(cos))
}

/// Uniformly sampled state curve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<PureState>,
    dt: f64,
    hbar: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<PureState>, dt: f64, hbar: f64) -> Result<Self> {
        Self::with_continuity(samples, dt, hbar, DEFAULT_CONTINUITY)
    }

    pub fn with_continuity(
        samples: Vec<PureState>,
        dt: f64,
        hbar: f64,
        threshold: f64,
    ) -> Result<Self> {
        if samples.len() < 3 {
            return Err(QslError::InvalidGrid(format!(
                "trajectory needs at least 3 samples, got {}",
                samples.len()
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(QslError::InvalidGrid(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(QslError::InvalidArgument(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let dim = samples[0].dim();
        for s in &samples {
            if s.dim() != dim {
                return Err(QslError::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
        }
        for (index, pair) in samples.windows(2).enumerate() {
            let overlap = pair[0].overlap(&pair[1])?.norm();
            if overlap <= threshold {
                return Err(QslError::Discontinuous { index, overlap });
            }
        }
        Ok(Self { samples, dt, hbar })
    }

    /// Wraps raw amplitude vectors.
    pub fn from_amplitudes(samples: Vec<ComplexVector>, dt: f64, hbar: f64) -> Result<Self> {
        let states = samples
            .into_iter()
            .map(PureState::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(states, dt, hbar)
    }

    pub fn samples(&self) -> &[PureState] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn first(&self) -> &PureState {
        &self.samples[0]
    }

    pub fn last(&self) -> &PureState {
        &self.samples[self.samples.len() - 1]
    }

    /// First `len` samples as a new trajectory.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len > self.samples.len() {
            return Err(QslError::InvalidArgument(format!(
                "prefix of {len} samples requested from a trajectory of {}",
                self.samples.len()
            )));
        }
        // continuity already checked
        if len < 3 {
            return Err(QslError::InvalidGrid(format!(
                "trajectory needs at least 3 samples, got {len}"
            )));
        }
        Ok(Self {
            samples: self.samples[..len].to_vec(),
            dt: self.dt,
            hbar: self.hbar,
        })
    }
}

/// Normalized `state` with its phase rotated so that `<reference|result>` is
/// real and non-negative. Removes the gauge from finite differences.
fn aligned(reference: &ComplexVector, state: &PureState) -> ComplexVector {
    let v = state.normalized();
    let ov = reference.dotc(&v);
    let m = ov.norm();
    if m == 0.0 {
        v
    } else {
        v * (ov.conj() / m)
    }
}

/// Evolution speed `V = 2 sqrt(<d|d> - (i<psi~|d>)^2)` at a sample, where `d`
/// is the finite-difference derivative of the normalized state.
///
/// Interior points use the central difference and the endpoints the one-sided
/// second-order stencils. Neighbours are phase-aligned to the centre sample
/// first, so the value depends only on the sampled rays.
pub fn speed_numeric(traj: &Trajectory, index: usize) -> Result<f64> {
    let n = traj.len();
    if index >= n {
        return Err(QslError::InvalidArgument(format!(
            "sample index {index} out of range for {n} samples"
        )));
    }
    let s = traj.samples();
    let centre = s[index].normalized();
    let h = traj.dt;
    // differences against the centre keep a stationary curve exactly at zero
    let step = |k: usize| aligned(&centre, &s[k]) - &centre;
    let deriv = if index == 0 {
        (step(1) * Complex64::new(4.0, 0.0) - step(2)) / Complex64::new(2.0 * h, 0.0)
    } else if index == n - 1 {
        (step(n - 3) - step(n - 2) * Complex64::new(4.0, 0.0)) / Complex64::new(2.0 * h, 0.0)
    } else {
        (step(index + 1) - step(index - 1)) / Complex64::new(2.0 * h, 0.0)
    };
    check_finite_vector(&deriv, "state derivative")?;

    let i_proj = Complex64::i() * centre.dotc(&deriv);
    let radicand = deriv.norm_squared() - (i_proj * i_proj).re;
    let radicand = clamp_radicand(radicand, deriv.norm_squared())?;
    Ok(2.0 * radicand.sqrt())
}

/// Clamps small negative radicands to zero. `scale` sets the magnitude the
/// slack is measured against.
pub(crate) fn clamp_radicand(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -RADICAND_SLACK * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(QslError::NegativeRadicand { value })
    }
}

/// Speeds at every sample.
pub fn speeds(traj: &Trajectory) -> Result<Vec<f64>> {
    (0..traj.len()).map(|k| speed_numeric(traj, k)).collect()
}

/// Summary of the speed-limit bound over one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Evolution time.
    #[serde(rename = "T")]
    pub t: f64,
    /// Geodesic distance between the endpoints.
    #[serde(rename = "S0")]
    pub s0: f64,
    /// Fubini-Study path length.
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "V_bar")]
    pub v_bar: f64,
    #[serde(rename = "T_qsl")]
    pub t_qsl: f64,
    /// `T_qsl / T`.
    pub ratio: f64,
}

impl BoundReport {
    /// Assembles a report from its geometric ingredients. `S = 0` means the
    /// state never left its ray and gives `T_qsl = 0`.
    pub fn from_lengths(t: f64, s0: f64, s: f64, tolerance: f64) -> Result<Self> {
        if s < s0 - tolerance {
            return Err(QslError::GridTooCoarse { s, s0 });
        }
        let (t_qsl, v_bar) = if s == 0.0 {
            (0.0, 0.0)
        } else {
            (t * s0 / s, s / t)
        };
        Ok(Self {
            t,
            s0,
            s,
            v_bar,
            t_qsl,
            ratio: t_qsl / t,
        })
    }
}

/// `T_qsl = S0 / V_bar` over the trajectory.
pub fn qsl_report(traj: &Trajectory) -> Result<BoundReport> {
    qsl_report_with_tolerance(traj, PATH_TOLERANCE)
}

pub fn qsl_report_with_tolerance(traj: &Trajectory, tolerance: f64) -> Result<BoundReport> {
    let v = speeds(traj)?;
    let s = integrate_samples(&v, traj.dt())?;
    let s0 = geodesic_distance(traj.first(), traj.last())?;
    BoundReport::from_lengths(traj.duration(), s0, s, tolerance)
}
