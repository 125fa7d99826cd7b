//! Generators `H(t)`, their Hermitian/anti-Hermitian split, propagation, and
//! closed-form speeds.
//!
//! Any generator splits as `H = H+ - i Gamma` with `H+` and the decay-rate
//! operator `Gamma` both Hermitian. The projective speed of a state driven by
//! `H` is then
//!
//! ```text
//! V = (2 / hbar) sqrt(dH+^2 + dGamma^2 + i<[Gamma, H+]>)
//! ```
//!
//! on the normalized state, and reduces to `2 dH / hbar` when `Gamma = 0`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QslError, Result};
use crate::geometry::{
    clamp_radicand, geodesic_distance, BoundReport, PureState, Trajectory, PATH_TOLERANCE,
};
use crate::numerics::{
    check_finite_matrix, check_overflow, check_square, hermitian_residual, integrate_samples,
    mat_exp, solve_ode, ComplexMatrix, ComplexVector, TimeGrid,
};

/// Tolerance on `||H - H^dagger||` for a generator declared Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

pub type MatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

#[derive(Clone)]
pub enum Generator {
    Constant(ComplexMatrix),
    /// Must be a pure function of time.
    TimeDependent(MatrixFn),
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Constant(h) => f.debug_tuple("Constant").field(h).finish(),
            Generator::TimeDependent(_) => f.write_str("TimeDependent(..)"),
        }
    }
}

/// A (possibly time-dependent, possibly non-Hermitian) generator with its `hbar`.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    dim: usize,
    generator: Generator,
    hermitian: bool,
    hbar: f64,
}

fn hermitian_scale(h: &ComplexMatrix) -> f64 {
    h.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar.is_finite() && hbar > 0.0 {
        Ok(())
    } else {
        Err(QslError::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )))
    }
}

impl GeneratorSpec {
    /// Time-independent generator; the Hermitian flag is detected.
    pub fn constant(h: ComplexMatrix, hbar: f64) -> Result<Self> {
        check_square(&h)?;
        check_finite_matrix(&h, "generator")?;
        check_hbar(hbar)?;
        let hermitian = hermitian_residual(&h) < HERMITIAN_TOLERANCE * hermitian_scale(&h);
        Ok(Self {
            dim: h.nrows(),
            generator: Generator::Constant(h),
            hermitian,
            hbar,
        })
    }

    /// Time-independent generator that must be Hermitian.
    pub fn hermitian(h: ComplexMatrix, hbar: f64) -> Result<Self> {
        let spec = Self::constant(h, hbar)?;
        if !spec.hermitian {
            let Generator::Constant(h) = &spec.generator else {
                unreachable!()
            };
            return Err(QslError::NotHermitian {
                residual: hermitian_residual(h),
            });
        }
        Ok(spec)
    }

    pub fn time_dependent(dim: usize, h: MatrixFn, hermitian: bool, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if dim == 0 {
            return Err(QslError::InvalidArgument(
                "generator dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            generator: Generator::TimeDependent(h),
            hermitian,
            hbar,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// `H(t)`, validated for shape, finiteness and the Hermitian flag.
    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let h = match &self.generator {
            Generator::Constant(h) => return Ok(h.clone()),
            Generator::TimeDependent(f) => f(t),
        };
        check_square(&h)?;
        if h.nrows() != self.dim {
            return Err(QslError::DimensionMismatch {
                expected: self.dim,
                found: h.nrows(),
            });
        }
        check_finite_matrix(&h, "generator")?;
        if self.hermitian {
            let residual = hermitian_residual(&h);
            if residual >= HERMITIAN_TOLERANCE * hermitian_scale(&h) {
                return Err(QslError::NotHermitian { residual });
            }
        }
        Ok(h)
    }
}

/// `H = h_plus - i gamma` with both parts Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSplit {
    pub h_plus: ComplexMatrix,
    pub gamma: ComplexMatrix,
}

impl HermitianSplit {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.h_plus - &self.gamma * Complex64::i()
    }

    pub fn dim(&self) -> usize {
        self.h_plus.nrows()
    }
}

pub fn split_hamiltonian(h: &ComplexMatrix) -> Result<HermitianSplit> {
    check_square(h)?;
    check_finite_matrix(h, "generator")?;
    let adj = h.adjoint();
    let half = Complex64::new(0.5, 0.0);
    Ok(HermitianSplit {
        h_plus: (h + &adj) * half,
        gamma: (h - &adj) * Complex64::new(0.0, 0.5),
    })
}

/// Propagates `psi0` under `i hbar d/dt psi = H(t) psi` over `grid`.
///
/// Samples keep their raw norm. Constant generators are exponentiated at each
/// grid time; time-dependent ones go through RK4.
pub fn evolve(spec: &GeneratorSpec, psi0: &PureState, grid: TimeGrid) -> Result<Trajectory> {
    grid.validate()?;
    if psi0.dim() != spec.dim {
        return Err(QslError::DimensionMismatch {
            expected: spec.dim,
            found: psi0.dim(),
        });
    }
    let scale = Complex64::new(0.0, -1.0 / spec.hbar);
    let samples = match &spec.generator {
        Generator::Constant(h) => {
            let a = h * scale;
            let mut out = Vec::with_capacity(grid.steps + 1);
            for t in grid.times() {
                let psi = mat_exp(&a, t)? * psi0.amplitudes();
                check_overflow(&psi, t)?;
                out.push(psi);
            }
            out
        }
        Generator::TimeDependent(_) => {
            // validate the generator before handing an infallible closure to RK4
            for t in grid.times() {
                spec.at(t)?;
            }
            let f = match &spec.generator {
                Generator::TimeDependent(f) => f.clone(),
                Generator::Constant(_) => unreachable!(),
            };
            solve_ode(move |t, y| (f(t) * y) * scale, psi0.amplitudes(), grid)?
        }
    };
    Trajectory::from_amplitudes(samples, grid.dt(), spec.hbar)
}

fn check_operator(a: &ComplexMatrix, psi: &PureState) -> Result<()> {
    check_square(a)?;
    if a.nrows() != psi.dim() {
        return Err(QslError::DimensionMismatch {
            expected: a.nrows(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// `<psi~|A|psi~>` on the normalized state.
pub fn expectation(a: &ComplexMatrix, psi: &PureState) -> Result<Complex64> {
    check_operator(a, psi)?;
    let v = psi.normalized();
    Ok(v.dotc(&(a * &v)))
}

/// `<A^2> - <A>^2` for Hermitian `A`, evaluated as `||(A - <A>) psi~||^2`.
pub fn variance(a: &ComplexMatrix, psi: &PureState) -> Result<f64> {
    check_operator(a, psi)?;
    let residual = hermitian_residual(a);
    if residual >= HERMITIAN_TOLERANCE * hermitian_scale(a) {
        return Err(QslError::NotHermitian { residual });
    }
    let v = psi.normalized();
    let av = a * &v;
    let mean = v.dotc(&av).re;
    Ok((av - v * Complex64::new(mean, 0.0)).norm_squared())
}

/// Mandelstam-Tamm speed `2 dH / hbar`.
pub fn speed_hermitian(h: &ComplexMatrix, psi: &PureState, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    Ok(2.0 * variance(h, psi)?.sqrt() / hbar)
}

/// `i <[Gamma, H+]>` on the normalized state; real by construction.
pub fn commutator_term(split: &HermitianSplit, psi: &PureState) -> Result<f64> {
    let comm = &split.gamma * &split.h_plus - &split.h_plus * &split.gamma;
    let value = Complex64::i() * expectation(&comm, psi)?;
    let scale = comm.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if value.im.abs() > 1e-12 * scale {
        return Err(QslError::ImaginaryResidue {
            quantity: "i<[Gamma, H+]>",
            residue: value.im,
        });
    }
    Ok(value.re)
}

/// The three terms under the square root of the non-Hermitian speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedTerms {
    pub var_h_plus: f64,
    pub var_gamma: f64,
    pub comm_term: f64,
}

impl SpeedTerms {
    pub fn speed(&self, hbar: f64) -> Result<f64> {
        let sum = self.var_h_plus + self.var_gamma + self.comm_term;
        let scale = self.var_h_plus + self.var_gamma;
        Ok(2.0 * clamp_radicand(sum, scale)?.sqrt() / hbar)
    }
}

pub fn speed_terms(split: &HermitianSplit, psi: &PureState) -> Result<SpeedTerms> {
    Ok(SpeedTerms {
        var_h_plus: variance(&split.h_plus, psi)?,
        var_gamma: variance(&split.gamma, psi)?,
        comm_term: commutator_term(split, psi)?,
    })
}

/// `(2 / hbar) sqrt(dH+^2 + dGamma^2 + i<[Gamma, H+]>)`.
pub fn speed_nonhermitian(split: &HermitianSplit, psi: &PureState, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    speed_terms(split, psi)?.speed(hbar)
}

/// Speed of a two-level state `(a, b)`,
/// `2 |H10 a^2 + (H11 - H00) a b - H01 b^2| / (hbar (|a|^2 + |b|^2))`.
///
/// Same value as [`speed_nonhermitian`], but without its cancellation when the
/// state approaches an eigenvector.
pub fn two_level_speed(h: &ComplexMatrix, psi: &ComplexVector, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    for found in [h.nrows(), h.ncols(), psi.len()] {
        if found != 2 {
            return Err(QslError::DimensionMismatch { expected: 2, found });
        }
    }
    let (a, b) = (psi[0], psi[1]);
    let norm2 = a.norm_sqr() + b.norm_sqr();
    if !(norm2 > 0.0 && norm2.is_finite()) {
        return Err(QslError::ZeroNorm);
    }
    let rate = h[(1, 0)] * a * a + (h[(1, 1)] - h[(0, 0)]) * a * b - h[(0, 1)] * b * b;
    Ok(2.0 * rate.norm() / (hbar * norm2))
}

/// Variance-form speed at every sample of a trajectory produced by `spec`.
pub fn analytic_speeds(traj: &Trajectory, spec: &GeneratorSpec) -> Result<Vec<f64>> {
    traj.samples()
        .iter()
        .enumerate()
        .map(|(k, psi)| {
            let h = spec.at(k as f64 * traj.dt())?;
            speed_nonhermitian(&split_hamiltonian(&h)?, psi, spec.hbar)
        })
        .collect()
}

/// Mandelstam-Tamm bound `hbar S0 / (2 <dH>_T)` along a unitary trajectory.
pub fn mt_bound(traj: &Trajectory, spec: &GeneratorSpec) -> Result<BoundReport> {
    if !spec.hermitian {
        return Err(QslError::InvalidArgument(
            "Mandelstam-Tamm bound needs a Hermitian generator".into(),
        ));
    }
    let spreads = traj
        .samples()
        .iter()
        .enumerate()
        .map(|(k, psi)| Ok(variance(&spec.at(k as f64 * traj.dt())?, psi)?.sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let t = traj.duration();
    let mean_spread = integrate_samples(&spreads, traj.dt())? / t;
    let s0 = geodesic_distance(traj.first(), traj.last())?;
    let s = 2.0 * mean_spread * t / spec.hbar;
    BoundReport::from_lengths(t, s0, s, PATH_TOLERANCE)
}
