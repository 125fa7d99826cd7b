//! Mixed-state speed limits through purification.
//!
//! A density matrix `rho = sum_i p_i |phi_i><phi_i|` is embedded as
//! `|Psi> = sum_i sqrt(p_i) |phi_i> (x) |a_i>` with a fixed ancilla basis
//! `{|a_i>}`. The purified amplitude for system index `s` and ancilla index
//! `a` sits at `s * dim + a`.
//!
//! Differentiating `|Psi(t)>` requires a gauge for the eigenvectors. Branches
//! are followed from sample to sample by maximal overlap and then rotated
//! (a phase for simple eigenvalues, a unitary within degenerate blocks) to
//! line up with the previous frame: per-branch parallel transport.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::geometry::{
    qsl_report_with_tolerance, BoundReport, PureState, Trajectory, PATH_TOLERANCE,
};
use crate::numerics::{
    c, check_finite_matrix, hermitian_residual, identity, max_abs_diff, ComplexMatrix,
    ComplexVector,
};

/// Tolerance on Hermiticity, trace and negative eigenvalues of inputs.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below this are set to zero before renormalizing.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate block.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;
/// Competing branch overlaps closer than this make the matching ambiguous.
pub const AMBIGUITY_TOLERANCE: f64 = 1e-6;

/// Gauge conventions used by [`purified_trajectory`], for output metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeInfo {
    pub gauge: String,
    pub ancilla_basis: String,
    pub branch_matching: String,
    pub degenerate_blocks: String,
}

impl GaugeInfo {
    pub fn canonical() -> Self {
        Self {
            gauge: "parallel_transport".into(),
            ancilla_basis: "computational".into(),
            branch_matching: "maximal_overlap".into(),
            degenerate_blocks: "procrustes_alignment".into(),
        }
    }
}

/// Uniformly sampled density-matrix curve.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    samples: Vec<ComplexMatrix>,
    dt: f64,
    hbar: f64,
}

impl DensityTrajectory {
    pub fn new(samples: Vec<ComplexMatrix>, dt: f64, hbar: f64) -> Result<Self> {
        if samples.len() < 3 {
            return Err(QslError::InvalidGrid(format!(
                "density trajectory needs at least 3 samples, got {}",
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
        let dim = samples[0].nrows();
        for (index, rho) in samples.iter().enumerate() {
            if rho.nrows() != dim || rho.ncols() != dim {
                return Err(QslError::InvalidDensity {
                    index,
                    reason: format!("expected {dim}x{dim}, got {}x{}", rho.nrows(), rho.ncols()),
                });
            }
            spectrum(rho, index)?;
        }
        Ok(Self { samples, dt, hbar })
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
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
}

/// Eigenvalues (descending, clamped, renormalized) and eigenvectors as columns.
fn spectrum(rho: &ComplexMatrix, index: usize) -> Result<(Vec<f64>, ComplexMatrix)> {
    let invalid = |reason: String| QslError::InvalidDensity { index, reason };
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(invalid(format!(
            "not square: {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    check_finite_matrix(rho, "density matrix").map_err(|e| invalid(e.to_string()))?;
    let residual = hermitian_residual(rho);
    if residual > DENSITY_TOLERANCE {
        return Err(invalid(format!("not Hermitian (residual {residual:e})")));
    }
    let trace = rho.trace();
    if (trace - c(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
        return Err(invalid(format!(
            "trace is {} + {}i, expected 1",
            trace.re, trace.im
        )));
    }
    let hermitian = (rho + rho.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(hermitian);
    let mut order: Vec<usize> = (0..rho.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = Vec::with_capacity(order.len());
    for &k in &order {
        let p = eig.eigenvalues[k];
        if p < -DENSITY_TOLERANCE {
            return Err(invalid(format!("negative eigenvalue {p:e}")));
        }
        values.push(if p < EIGENVALUE_FLOOR { 0.0 } else { p });
    }
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|p| *p /= total);
    let vectors = ComplexMatrix::from_fn(rho.nrows(), order.len(), |r, col| {
        eig.eigenvectors[(r, order[col])]
    });
    Ok((values, vectors))
}

/// Index ranges of consecutive (descending) eigenvalues within the degeneracy tolerance.
fn degenerate_blocks(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k - 1] - values[k] > DEGENERACY_TOLERANCE {
            blocks.push(start..k);
            start = k;
        }
    }
    blocks
}

/// Replaces each degenerate block by its mean so the block is exactly degenerate.
fn flatten_blocks(values: &mut [f64]) {
    for block in degenerate_blocks(values) {
        let mean = values[block.clone()].iter().sum::<f64>() / block.len() as f64;
        values[block].iter_mut().for_each(|p| *p = mean);
    }
}

/// Rotates every eigenvector so its largest component is real and positive.
fn canonical_phases(vectors: &mut ComplexMatrix) {
    for mut col in vectors.column_iter_mut() {
        let pivot =
            col.iter().copied().fold(
                c(0.0, 0.0),
                |best, z| if z.norm() > best.norm() { z } else { best },
            );
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

fn assemble(values: &[f64], frame: &ComplexMatrix) -> ComplexVector {
    let dim = frame.nrows();
    ComplexVector::from_fn(dim * dim, |k, _| {
        let (s, a) = (k / dim, k % dim);
        frame[(s, a)] * values[a].sqrt()
    })
}

/// Canonical purification of a single density matrix in the computational
/// ancilla basis.
pub fn purify(rho: &ComplexMatrix) -> Result<PureState> {
    let (mut values, mut vectors) = spectrum(rho, 0)?;
    flatten_blocks(&mut values);
    canonical_phases(&mut vectors);
    PureState::new(assemble(&values, &vectors))
}

/// Reduced state of the system after tracing out the ancilla.
pub fn partial_trace(psi: &PureState) -> Result<ComplexMatrix> {
    let n = psi.dim();
    let dim = (n as f64).sqrt().round() as usize;
    if dim * dim != n {
        return Err(QslError::InvalidArgument(format!(
            "purified dimension {n} is not a perfect square"
        )));
    }
    let v = psi.normalized();
    Ok(ComplexMatrix::from_fn(dim, dim, |s, r| {
        (0..dim)
            .map(|a| v[s * dim + a] * v[r * dim + a].conj())
            .sum()
    }))
}

/// Moves the new eigenvectors into the previous frame's branch slots.
fn transport(
    previous: &ComplexMatrix,
    values: &[f64],
    vectors: &ComplexMatrix,
    index: usize,
) -> Result<(Vec<f64>, ComplexMatrix)> {
    let dim = vectors.nrows();
    let blocks = degenerate_blocks(values);
    let weights = (previous.adjoint() * vectors).map(|z| z.norm_sqr());

    // weight of previous branch j in each new block
    let block_weight =
        |j: usize, b: usize| -> f64 { blocks[b].clone().map(|m| weights[(j, m)]).sum() };
    let mut pairs: Vec<(f64, usize, usize)> = (0..dim)
        .flat_map(|j| (0..blocks.len()).map(move |b| (j, b)))
        .map(|(j, b)| (block_weight(j, b), j, b))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut capacity: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; dim];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); blocks.len()];
    for &(w, j, b) in &pairs {
        if owner[j].is_some() || capacity[b] == 0 {
            continue;
        }
        let rival = (0..blocks.len())
            .filter(|&other| other != b && capacity[other] > 0)
            .map(|other| block_weight(j, other))
            .fold(f64::NEG_INFINITY, f64::max);
        if w - rival < AMBIGUITY_TOLERANCE {
            return Err(QslError::AmbiguousBranch { index });
        }
        owner[j] = Some(b);
        capacity[b] -= 1;
        members[b].push(j);
    }

    let mut frame = ComplexMatrix::zeros(dim, dim);
    let mut new_values = vec![0.0; dim];
    for (b, block) in blocks.iter().enumerate() {
        let slots = &members[b];
        let basis = vectors.columns(block.start, block.len()).into_owned();
        let target = ComplexMatrix::from_fn(dim, slots.len(), |r, k| previous[(r, slots[k])]);
        let svd = (basis.adjoint() * &target).svd(true, true);
        let rotation =
            svd.u.expect("left singular vectors") * svd.v_t.expect("right singular vectors");
        let aligned = basis * rotation;
        for (k, &j) in slots.iter().enumerate() {
            frame.set_column(j, &aligned.column(k));
            new_values[j] = values[block.start];
        }
    }
    Ok((new_values, frame))
}

/// Purified trajectory in the parallel-transport gauge.
pub fn purified_trajectory(rhos: &DensityTrajectory) -> Result<Trajectory> {
    purified_trajectory_in_basis(rhos, &identity(rhos.dim()))
}

/// As [`purified_trajectory`], with ancilla basis vectors given by the columns
/// of the unitary `ancilla`.
pub fn purified_trajectory_in_basis(
    rhos: &DensityTrajectory,
    ancilla: &ComplexMatrix,
) -> Result<Trajectory> {
    let dim = rhos.dim();
    if ancilla.nrows() != dim || ancilla.ncols() != dim {
        return Err(QslError::DimensionMismatch {
            expected: dim,
            found: ancilla.nrows(),
        });
    }
    if max_abs_diff(&(ancilla.adjoint() * ancilla), &identity(dim)) > DENSITY_TOLERANCE {
        return Err(QslError::InvalidArgument(
            "ancilla basis is not unitary".into(),
        ));
    }
    let embed = |values: &[f64], frame: &ComplexMatrix| -> Result<PureState> {
        let base = assemble(values, frame);
        let rotated = ComplexVector::from_fn(dim * dim, |k, _| {
            let (s, a) = (k / dim, k % dim);
            (0..dim).map(|b| ancilla[(a, b)] * base[s * dim + b]).sum()
        });
        PureState::new(rotated)
    };

    let mut states = Vec::with_capacity(rhos.len());
    let (mut values, mut frame) = spectrum(&rhos.samples[0], 0)?;
    flatten_blocks(&mut values);
    canonical_phases(&mut frame);
    states.push(embed(&values, &frame)?);
    for (index, rho) in rhos.samples.iter().enumerate().skip(1) {
        let (mut next_values, vectors) = spectrum(rho, index)?;
        flatten_blocks(&mut next_values);
        (values, frame) = transport(&frame, &next_values, &vectors, index)?;
        states.push(embed(&values, &frame)?);
    }
    Trajectory::new(states, rhos.dt, rhos.hbar)
}

/// Speed-limit report of the purified trajectory.
pub fn mixed_qsl(rhos: &DensityTrajectory) -> Result<BoundReport> {
    mixed_qsl_with_tolerance(rhos, PATH_TOLERANCE)
}

pub fn mixed_qsl_with_tolerance(rhos: &DensityTrajectory, tolerance: f64) -> Result<BoundReport> {
    qsl_report_with_tolerance(&purified_trajectory(rhos)?, tolerance)
}
