//! Small dense complex linear algebra, matrix exponentials, fixed-step ODE
//! propagation and quadrature.
//!
//! Everything here is sized for the `dim <= ~16` systems the rest of the crate
//! works with; no attempt is made at sparse or blocked algorithms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QslError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Amplitude magnitude beyond which propagation is aborted.
pub const OVERFLOW_THRESHOLD: f64 = 1e150;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Builds a matrix from row-major real and imaginary parts.
pub fn matrix_from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix> {
    let rows = re.len();
    if im.len() != rows {
        return Err(QslError::InvalidArgument(format!(
            "real part has {} rows but imaginary part has {}",
            rows,
            im.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(rows, rows);
    for (r, (re_row, im_row)) in re.iter().zip(im).enumerate() {
        if re_row.len() != rows || im_row.len() != rows {
            return Err(QslError::NotSquare {
                rows,
                cols: re_row.len().max(im_row.len()),
            });
        }
        for col in 0..rows {
            m[(r, col)] = c(re_row[col], im_row[col]);
        }
    }
    check_finite_matrix(&m, "matrix")?;
    Ok(m)
}

pub fn check_square(a: &ComplexMatrix) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(QslError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

pub fn check_finite_matrix(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(QslError::NonFinite(what.to_string()))
    }
}

pub fn check_finite_vector(v: &ComplexVector, what: &str) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(QslError::NonFinite(what.to_string()))
    }
}

/// Largest entrywise modulus of `A - A^dagger`.
pub fn hermitian_residual(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(a: &ComplexMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

// Pade coefficients and theta_m bounds for scaling and squaring (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

/// `exp(s * A)` by scaling and squaring with a diagonal Pade approximant.
///
/// Works for defective `A` (exceptional points) since no eigendecomposition
/// is involved.
pub fn mat_exp(a: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    check_square(a)?;
    check_finite_matrix(a, "mat_exp input")?;
    if !s.is_finite() {
        return Err(QslError::NonFinite("mat_exp scale".into()));
    }
    let n = a.nrows();
    let a = a * c(s, 0.0);
    let norm = norm_one(&a);
    if norm == 0.0 {
        return Ok(identity(n));
    }

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(&a, coeffs);
        }
    }

    let squarings = (norm / THETA13).log2().ceil().max(0.0) as i32;
    let scaled = &a * c(0.5_f64.powi(squarings), 0.0);
    let mut result = pade13(&scaled)?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    check_finite_matrix(&result, "mat_exp result")?;
    Ok(result)
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = identity(n);
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for k in 0..b.len() / 2 {
        v += &power * c(b[2 * k], 0.0);
        u += &power * c(b[2 * k + 1], 0.0);
        power = &power * &a2;
    }
    let u = a * u;
    pade_solve(u, v)
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let b = |k: usize| c(PADE13[k], 0.0);
    let id = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    pade_solve(u, v)
}

fn pade_solve(u: ComplexMatrix, v: ComplexMatrix) -> Result<ComplexMatrix> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| QslError::NonFinite("singular Pade denominator".into()))
}

/// Uniform time grid on `[0, t_max]` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        let grid = Self { t_max, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(QslError::InvalidGrid(format!(
                "t_max must be positive and finite, got {}",
                self.t_max
            )));
        }
        if self.steps < 2 {
            return Err(QslError::InvalidGrid(format!(
                "need at least 2 steps, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        // exact endpoint, no accumulated rounding
        if k == self.steps {
            self.t_max
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

pub(crate) fn check_overflow(y: &ComplexVector, time: f64) -> Result<()> {
    let ok = y.iter().all(|z| {
        let m = z.norm();
        m.is_finite() && m <= OVERFLOW_THRESHOLD
    });
    if ok {
        Ok(())
    } else {
        Err(QslError::Overflow { time })
    }
}

/// Classical fourth-order Runge-Kutta on a uniform grid.
///
/// Returns `steps + 1` samples, the first being `y0`.
pub fn solve_ode<F>(rhs: F, y0: &ComplexVector, grid: TimeGrid) -> Result<Vec<ComplexVector>>
where
    F: Fn(f64, &ComplexVector) -> ComplexVector,
{
    grid.validate()?;
    check_finite_vector(y0, "initial state")?;
    let dt = grid.dt();
    let half = c(0.5 * dt, 0.0);
    let full = c(dt, 0.0);
    let sixth = c(dt / 6.0, 0.0);
    let two = c(2.0, 0.0);

    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push(y0.clone());
    let mut y = y0.clone();
    for k in 0..grid.steps {
        let t = grid.time(k);
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * dt, &(&y + &k1 * half));
        let k3 = rhs(t + 0.5 * dt, &(&y + &k2 * half));
        let k4 = rhs(t + dt, &(&y + &k3 * full));
        y += (k1 + &k2 * two + &k3 * two + k4) * sixth;
        check_overflow(&y, grid.time(k + 1))?;
        out.push(y.clone());
    }
    Ok(out)
}

/// Running integral of uniformly spaced samples; `out[i]` approximates the
/// integral over the first `i` intervals.
///
/// Even interval counts use composite Simpson. Odd counts close the last three
/// intervals with Simpson's 3/8 rule; the first interval alone uses the
/// three-point quadratic rule. Only a two-sample input falls back to the
/// trapezoid.
pub fn cumulative_integral(values: &[f64], dt: f64) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(QslError::InvalidArgument(format!(
            "quadrature needs at least 2 samples, got {}",
            values.len()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(QslError::InvalidArgument(format!(
            "quadrature step must be positive, got {dt}"
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(QslError::NonFinite(format!("quadrature sample {i}")));
    }

    let n = values.len();
    let mut out = vec![0.0; n];
    if n == 2 {
        out[1] = 0.5 * dt * (values[0] + values[1]);
        return Ok(out);
    }

    // Simpson prefix at even indices
    let mut simpson = vec![0.0; n];
    let mut i = 2;
    while i < n {
        simpson[i] = simpson[i - 2] + dt / 3.0 * (values[i - 2] + 4.0 * values[i - 1] + values[i]);
        i += 2;
    }
    out[1] = dt / 12.0 * (5.0 * values[0] + 8.0 * values[1] - values[2]);
    for i in 2..n {
        out[i] = if i % 2 == 0 {
            simpson[i]
        } else {
            simpson[i - 3]
                + 3.0 * dt / 8.0
                    * (values[i - 3] + 3.0 * values[i - 2] + 3.0 * values[i - 1] + values[i])
        };
    }
    Ok(out)
}

/// Integral of uniformly spaced samples over the whole range.
pub fn integrate_samples(values: &[f64], dt: f64) -> Result<f64> {
    Ok(*cumulative_integral(values, dt)?.last().expect("non-empty"))
}
