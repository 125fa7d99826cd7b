//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Reference values come from oracles defined here (a Taylor exponential,
//! the exact derivative of the normalized state, composite Simpson), never
//! from the library routines under test.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::ExitCode;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsl_core::cli::spec::Problem;
use qsl_core::cli::verify::{curve_times, formula_audit, GAIN_LOSS_SETS};
use qsl_core::cli::{bound_rows, ModelSpec, RunOptions, SweepSpec};
use qsl_core::dynamics::{analytic_speeds, evolve, GeneratorSpec};
use qsl_core::geometry::{qsl_report, speeds, BoundReport, PureState, Trajectory};
use qsl_core::mixed::{mixed_qsl, partial_trace, purify, DensityTrajectory};
use qsl_core::models::gain_loss::{displayed, gl_var_gamma, gl_var_h_plus};
use qsl_core::models::{
    bl_bound, bl_quantities, bl_trajectory, default_steps, gl_bound, gl_propagator, gl_quantities,
    gl_state, gl_trajectory, BetheLambParams, GainLossParams,
};
use qsl_core::numerics::{ComplexMatrix as M, ComplexVector as V, TimeGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn max_abs(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// ---------- oracles ----------

fn expm(a: &M) -> M {
    let n = a.nrows();
    let bound: f64 = a.iter().map(|z| z.norm()).sum();
    let squarings = if bound > 0.25 {
        (bound / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = a * c(0.5f64.powi(squarings), 0.0);
    let mut term = M::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &b * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn unit(v: &V) -> V {
    v / c(v.norm(), 0.0)
}

/// Twice the norm of the exact derivative projected off the ray.
fn fs_speed(h: &M, psi: &V, hbar: f64) -> f64 {
    let p = unit(psi);
    let d = (h * &p) * (-I / hbar);
    2.0 * (&d - &p * p.dotc(&d)).norm()
}

fn expect(a: &M, psi: &V) -> Complex64 {
    let p = unit(psi);
    p.dotc(&(a * &p))
}

fn variance(a: &M, psi: &V) -> f64 {
    let p = unit(psi);
    let ap = a * &p;
    ap.norm_squared() - p.dotc(&ap).norm_sqr()
}

fn geodesic(a: &V, b: &V) -> f64 {
    let (a, b) = (unit(a), unit(b));
    let ov = a.dotc(&b);
    let perp = (&b - &a * ov).norm();
    2.0 * perp.atan2(ov.norm())
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    assert!(n.is_multiple_of(2) && n >= 2);
    let inner: f64 = (1..n)
        .map(|k| if k % 2 == 1 { 4.0 * f[k] } else { 2.0 * f[k] })
        .sum();
    (f[0] + f[n] + inner) * h / 3.0
}

fn hermitian_parts(h: &M) -> (M, M) {
    let hp = (h + h.adjoint()) * c(0.5, 0.0);
    let gamma = (h - h.adjoint()) * c(0.0, 0.5);
    (hp, gamma)
}

#[derive(Clone, Copy)]
struct Bound {
    s: f64,
    t_qsl: f64,
    ratio: f64,
}

/// Bound along `psi(t_k) = frame(t_k, step^k psi0)` with the exact speed of the lab generator.
fn oracle_bound(
    generator: &M,
    lab: &dyn Fn(f64) -> M,
    frame: &dyn Fn(f64, &V) -> V,
    psi0: &V,
    t: f64,
    n: usize,
) -> Bound {
    let h = t / n as f64;
    let step = expm(&(generator * (-I * h)));
    let mut phi = unit(psi0);
    let first = frame(0.0, &phi);
    let mut last = first.clone();
    let mut v = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let tk = k as f64 * h;
        let psi = frame(tk, &phi);
        v.push(fs_speed(&lab(tk), &psi, 1.0));
        if k == n {
            last = psi;
        }
        phi = unit(&(&step * &phi));
    }
    let s = simpson(&v, h);
    let s0 = geodesic(&first, &last);
    Bound {
        s,
        t_qsl: t * s0 / s,
        ratio: s0 / s,
    }
}

fn gain_loss_oracle(p: &GainLossParams, t: f64) -> Bound {
    let h = p.hamiltonian();
    let psi0 = V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
    oracle_bound(&h, &|_| h.clone(), &|_, v| v.clone(), &psi0, t, 4000)
}

fn bethe_lamb_lab(p: &BetheLambParams, t: f64) -> M {
    let drive = Complex64::from_polar(p.rabi, p.detuning * t);
    M::from_row_slice(
        2,
        2,
        &[
            c(0.0, -0.5 * p.gamma_1),
            drive,
            drive.conj(),
            c(0.0, -0.5 * p.gamma_2),
        ],
    )
}

/// In the frame `psi = diag(1, e^{-i Delta t}) phi` the generator is constant.
fn bethe_lamb_oracle(p: &BetheLambParams, t: f64) -> Bound {
    let rotating = M::from_row_slice(
        2,
        2,
        &[
            c(0.0, -0.5 * p.gamma_1),
            c(p.rabi, 0.0),
            c(p.rabi, 0.0),
            c(-p.detuning, -0.5 * p.gamma_2),
        ],
    );
    let frame = |t: f64, phi: &V| {
        V::from_vec(vec![
            phi[0],
            phi[1] * Complex64::from_polar(1.0, -p.detuning * t),
        ])
    };
    let psi0 = V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
    let n = 2 * (2000usize).max((20.0 * t * 1e9).ceil() as usize);
    oracle_bound(&rotating, &|s| bethe_lamb_lab(p, s), &frame, &psi0, t, n)
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> M {
    M::from_fn(dim, dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> M {
    hermitian_parts(&random_matrix(rng, dim)).0
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> V {
    V::from_fn(dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// A fifth of the draws sit exactly on the exceptional point.
fn random_gain_loss(rng: &mut ChaCha8Rng, k: usize) -> GainLossParams {
    let gamma_l = rng.random_range(0.0..1.5);
    let gamma_g = rng.random_range(0.0..1.5);
    let g = if k.is_multiple_of(5) {
        0.5 * (gamma_l + gamma_g)
    } else {
        rng.random_range(0.0..1.5)
    };
    GainLossParams::new(g, gamma_l, gamma_g).unwrap()
}

fn sets() -> Vec<GainLossParams> {
    GAIN_LOSS_SETS
        .iter()
        .map(|&(_, g, l, gain)| GainLossParams::new(g, l, gain).unwrap())
        .collect()
}

// ---------- reporting ----------

enum Cmp {
    AtMost,
    Below,
    AtLeast,
    Above,
}

struct Part {
    label: &'static str,
    measured: f64,
    cmp: Cmp,
    limit: f64,
}

impl Part {
    fn passed(&self) -> bool {
        let (m, l) = (self.measured, self.limit);
        match self.cmp {
            Cmp::AtMost => m <= l,
            Cmp::Below => m < l,
            Cmp::AtLeast => m >= l,
            Cmp::Above => m > l,
        }
    }
}

fn at_most(label: &'static str, measured: f64, limit: f64) -> Part {
    Part {
        label,
        measured,
        cmp: Cmp::AtMost,
        limit,
    }
}

fn below(label: &'static str, measured: f64, limit: f64) -> Part {
    Part {
        label,
        measured,
        cmp: Cmp::Below,
        limit,
    }
}

fn at_least(label: &'static str, measured: f64, limit: f64) -> Part {
    Part {
        label,
        measured,
        cmp: Cmp::AtLeast,
        limit,
    }
}

fn above(label: &'static str, measured: f64, limit: f64) -> Part {
    Part {
        label,
        measured,
        cmp: Cmp::Above,
        limit,
    }
}

type Outcome = Result<Vec<Part>, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn report(traj: &Trajectory) -> Result<BoundReport, String> {
    qsl_report(traj).map_err(fail)
}

// ---------- criteria ----------

fn mandelstam_tamm(rows: &mut Vec<BoundReport>) -> Outcome {
    let h = M::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
    let spec = GeneratorSpec::hermitian(h.clone(), 1.0).map_err(fail)?;
    let psi0 = PureState::new(V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).map_err(fail)?;
    let mut saturation: f64 = 0.0;
    for t in [0.1, 1.0, PI / 2.0] {
        let traj = evolve(
            &spec,
            &psi0,
            TimeGrid::new(t, default_steps(t, 1.0)).map_err(fail)?,
        )
        .map_err(fail)?;
        let r = report(&traj)?;
        saturation = saturation.max(rel(r.t_qsl, t));
        rows.push(r);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut random: f64 = 0.0;
    for k in 0..50 {
        let dim = 2 + k % 3;
        let h = random_hermitian(&mut rng, dim);
        let v0 = random_vector(&mut rng, dim);
        let t = 1.0;
        let spec = GeneratorSpec::hermitian(h.clone(), 1.0).map_err(fail)?;
        let steps = default_steps(t, h.iter().map(|z| z.norm()).sum());
        let traj = evolve(
            &spec,
            &PureState::new(v0.clone()).map_err(fail)?,
            TimeGrid::new(t, steps).map_err(fail)?,
        )
        .map_err(fail)?;
        let r = report(&traj)?;
        let end = expm(&(&h * (-I * t))) * &v0;
        let oracle = geodesic(&v0, &end) / (2.0 * variance(&h, &v0).sqrt());
        random = random.max(rel(r.t_qsl, oracle));
        rows.push(r);
    }
    Ok(vec![
        at_most("saturation", saturation, 1e-6),
        at_most("random_generators", random, 1e-6),
    ])
}

fn worst_speed_error(numeric: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().copied().fold(0.0, f64::max);
    numeric
        .iter()
        .zip(reference)
        .map(|(n, r)| (n - r).abs() / r.abs().max(1e-8 * scale))
        .fold(0.0, f64::max)
}

fn master_identity(_: &mut Vec<BoundReport>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut cases: Vec<(M, V, f64)> = (0..100)
        .map(|_| (random_matrix(&mut rng, 2), random_vector(&mut rng, 2), 2.0))
        .collect();
    for p in sets() {
        cases.push((
            p.hamiltonian(),
            V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            6.0,
        ));
    }
    let (mut default, mut dense, mut shipped): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (h, v0, t) in &cases {
        let spec = GeneratorSpec::constant(h.clone(), 1.0).map_err(fail)?;
        let psi0 = PureState::new(v0.clone()).map_err(fail)?;
        let base = default_steps(*t, h.iter().map(|z| z.norm()).sum());
        for (density, worst) in [(1, &mut default), (4, &mut dense)] {
            let traj = evolve(
                &spec,
                &psi0,
                TimeGrid::new(*t, density * base).map_err(fail)?,
            )
            .map_err(fail)?;
            let oracle: Vec<f64> = traj
                .samples()
                .iter()
                .map(|s| fs_speed(h, s.amplitudes(), 1.0))
                .collect();
            *worst = worst.max(worst_speed_error(&speeds(&traj).map_err(fail)?, &oracle));
            if density == 1 {
                shipped = shipped.max(worst_speed_error(
                    &analytic_speeds(&traj, &spec).map_err(fail)?,
                    &oracle,
                ));
            }
        }
    }
    Ok(vec![
        below("default_grid", default, 1e-4),
        below("dense_grid", dense, 1e-5),
        at_most("variance_form_vs_oracle", shipped, 1e-9),
    ])
}

fn gain_loss_closed_forms(_: &mut Vec<BoundReport>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut propagator, mut variances): (f64, f64) = (0.0, 0.0);
    for k in 0..200 {
        let p = random_gain_loss(&mut rng, k);
        let t = rng.random_range(0.0..8.0);
        let brute = expm(&(p.hamiltonian() * (-I * t)));
        let scale = brute.iter().map(|z| z.norm()).fold(1.0, f64::max);
        propagator = propagator.max(max_abs(&gl_propagator(&p, t).map_err(fail)?, &brute) / scale);

        let psi = &brute * V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let (hp, gamma) = hermitian_parts(&p.hamiltonian());
        variances = variances
            .max((gl_var_h_plus(&p, t).map_err(fail)? - variance(&hp, &psi)).abs())
            .max((gl_var_gamma(&p, t).map_err(fail)? - variance(&gamma, &psi)).abs());
    }
    Ok(vec![
        at_most("propagator", propagator, 1e-9),
        at_most("variances", variances, 1e-9),
    ])
}

fn formula_audit_criterion(_: &mut Vec<BoundReport>) -> Outcome {
    let audit = formula_audit().map_err(fail)?;
    let resolved = audit
        .commutator
        .residual_displayed_vs_normalized
        .min(audit.commutator.residual_displayed_vs_unnormalized);

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut draws = sets();
    draws.extend((0..200).map(|k| random_gain_loss(&mut rng, k)));
    let (mut confirmed, mut speed): (f64, f64) = (0.0, 0.0);
    for (k, p) in draws.iter().enumerate() {
        let h = p.hamiltonian();
        let (hp, gamma) = hermitian_parts(&h);
        let comm = &gamma * &hp - &hp * &gamma;
        for j in 0..=8 {
            let t = if k < GAIN_LOSS_SETS.len() {
                0.75 * j as f64
            } else {
                rng.random_range(0.0..8.0)
            };
            let psi = expm(&(&h * (-I * t))) * V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
            let truth = expect(&comm, &psi);
            confirmed = confirmed.max(
                (displayed::commutator_normalized(p, t) - truth).norm() / truth.norm().max(1.0),
            );
            let v = gl_quantities(p, t).map_err(fail)?.v;
            let o = fs_speed(&h, &psi, 1.0);
            speed = speed.max((v - o).abs() / o.max(1e-6 * p.characteristic_rate()));
            let shipped = gl_state(p, t).map_err(fail)?;
            speed = speed.max(geodesic(shipped.amplitudes(), &psi));
        }
    }

    let bl = BetheLambParams::hydrogen_like();
    let mut bl_speed: f64 = 0.0;
    for k in 0..=32 {
        let t = 0.5e-9 * k as f64;
        let oracle = bethe_lamb_oracle_state(&bl, t);
        let v = bl_quantities(&bl, t).map_err(fail)?.v;
        bl_speed = bl_speed.max(rel(v, fs_speed(&bethe_lamb_lab(&bl, t), &oracle, 1.0)));
    }
    Ok(vec![
        at_most("displayed_form_identified", resolved, 1e-9),
        at_most("confirmed_commutator_vs_oracle", confirmed, 1e-9),
        at_most(
            "audit_confirmed_residual",
            audit.commutator.residual_confirmed_vs_normalized,
            1e-9,
        ),
        at_most("gain_loss_speed_vs_oracle", speed, 1e-9),
        at_most("bethe_lamb_speed_vs_oracle", bl_speed, 1e-9),
    ])
}

fn bethe_lamb_oracle_state(p: &BetheLambParams, t: f64) -> V {
    let rotating = M::from_row_slice(
        2,
        2,
        &[
            c(0.0, -0.5 * p.gamma_1),
            c(p.rabi, 0.0),
            c(p.rabi, 0.0),
            c(-p.detuning, -0.5 * p.gamma_2),
        ],
    );
    let phi = expm(&(rotating * (-I * t))) * V::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
    V::from_vec(vec![
        phi[0],
        phi[1] * Complex64::from_polar(1.0, -p.detuning * t),
    ])
}

struct Curves {
    library: Vec<BoundReport>,
    oracle: Vec<Bound>,
}

fn gain_loss_curve(
    g: f64,
    gamma_l: f64,
    gamma_g: f64,
    rows: &mut Vec<BoundReport>,
) -> Result<Curves, String> {
    let p = GainLossParams::new(g, gamma_l, gamma_g).map_err(fail)?;
    let mut library = Vec::new();
    let mut oracle = Vec::new();
    for t in curve_times() {
        library.push(gl_bound(&p, t, None).map_err(fail)?);
        oracle.push(gain_loss_oracle(&p, t));
    }
    rows.extend(library.iter().copied());
    Ok(Curves { library, oracle })
}

fn agreement(curves: &[&Curves]) -> f64 {
    curves
        .iter()
        .flat_map(|cv| {
            cv.library
                .iter()
                .zip(&cv.oracle)
                .map(|(l, o)| rel(l.t_qsl, o.t_qsl))
        })
        .fold(0.0, f64::max)
}

fn equal_kappa(rows: &mut Vec<BoundReport>) -> Outcome {
    let (mut coincide, mut dominance, mut oracle_dominance, mut agree): (f64, f64, f64, f64) =
        (0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0);
    for g in [0.2, 0.7] {
        let high = gain_loss_curve(g, 0.8, 0.4, rows)?;
        let loss = gain_loss_curve(g, 0.6, 0.0, rows)?;
        let gain = gain_loss_curve(g, 0.0, 0.6, rows)?;
        for (a, b) in loss.library.iter().zip(&gain.library) {
            for (x, y) in [
                (a.t_qsl, b.t_qsl),
                (a.s, b.s),
                (a.s0, b.s0),
                (a.ratio, b.ratio),
            ] {
                coincide = coincide.max((x - y).abs());
            }
        }
        for low in [&loss, &gain] {
            for (h, l) in high.library.iter().zip(&low.library) {
                dominance = dominance.max(l.t_qsl - h.t_qsl);
            }
            for (h, l) in high.oracle.iter().zip(&low.oracle) {
                oracle_dominance = oracle_dominance.max(l.t_qsl - h.t_qsl);
            }
        }
        agree = agree.max(agreement(&[&high, &loss, &gain]));
    }
    Ok(vec![
        at_most("equal_kappa_coincide", coincide, 1e-8),
        below("low_minus_high_t_qsl", dominance, 0.0),
        below("oracle_low_minus_high_t_qsl", oracle_dominance, 0.0),
        at_most("library_vs_oracle", agree, 1e-5),
    ])
}

fn coupling_strength(rows: &mut Vec<BoundReport>) -> Outcome {
    let weak = gain_loss_curve(0.2, 0.4, 0.4, rows)?;
    let strong = gain_loss_curve(0.6, 0.4, 0.4, rows)?;
    let worst = |f: &dyn Fn(usize) -> f64| {
        (0..weak.library.len())
            .map(f)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let path = worst(&|k| weak.library[k].s - strong.library[k].s);
    let tight = worst(&|k| strong.library[k].ratio - weak.library[k].ratio);
    let oracle_path = worst(&|k| weak.oracle[k].s - strong.oracle[k].s);
    let oracle_tight = worst(&|k| strong.oracle[k].ratio - weak.oracle[k].ratio);
    Ok(vec![
        below("weak_minus_strong_path", path, 0.0),
        below("strong_minus_weak_ratio", tight, 0.0),
        below("oracle_weak_minus_strong_path", oracle_path, 0.0),
        below("oracle_strong_minus_weak_ratio", oracle_tight, 0.0),
        at_most("library_vs_oracle", agreement(&[&weak, &strong]), 1e-5),
    ])
}

fn ground_lifetime(rows: &mut Vec<BoundReport>) -> Outcome {
    let p = BetheLambParams::new(1.0 / 0.1, 1.0 / 1.6e-9, 1.8e8, 6e7).map_err(fail)?;
    let times: Vec<f64> = (0..=20)
        .map(|k| 0.16e-9 * 100f64.powf(k as f64 / 20.0))
        .collect();
    let (mut peak, mut oracle_peak, mut agree): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &t in &times {
        let r = bl_bound(&p, t, None).map_err(fail)?;
        let o = bethe_lamb_oracle(&p, t);
        peak = peak.max(r.ratio);
        oracle_peak = oracle_peak.max(o.ratio);
        agree = agree.max(rel(r.t_qsl, o.t_qsl));
        rows.push(r);
    }
    let late = bl_bound(&p, 160e-9, None).map_err(fail)?;
    let oracle_late = bethe_lamb_oracle(&p, 160e-9);
    agree = agree.max(rel(late.t_qsl, oracle_late.t_qsl));
    rows.push(late);
    Ok(vec![
        at_least("peak_ratio", peak, 0.99),
        above("peak_minus_ratio_at_160ns", peak - late.ratio, 0.0),
        at_least("oracle_peak_ratio", oracle_peak, 0.99),
        above(
            "oracle_peak_minus_ratio_at_160ns",
            oracle_peak - oracle_late.ratio,
            0.0,
        ),
        at_most("library_vs_oracle", agree, 1e-5),
    ])
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> M {
    let a = M::from_fn(dim, rank, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn oracle_partial_trace(psi: &V, dim: usize) -> M {
    let p = unit(psi);
    let ancilla = p.len() / dim;
    M::from_fn(dim, dim, |s, r| {
        (0..ancilla)
            .map(|a| p[s * ancilla + a] * p[r * ancilla + a].conj())
            .sum()
    })
}

fn mixed_reduction(rows: &mut Vec<BoundReport>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut trajectories = vec![
        gl_trajectory(
            &GainLossParams::new(0.2, 0.8, 0.4).unwrap(),
            TimeGrid::new(4.0, 2000).unwrap(),
        )
        .map_err(fail)?,
        gl_trajectory(
            &GainLossParams::new(0.7, 0.8, 0.4).unwrap(),
            TimeGrid::new(4.0, 2000).unwrap(),
        )
        .map_err(fail)?,
        bl_trajectory(
            &BetheLambParams::hydrogen_like(),
            TimeGrid::new(16e-9, 4000).unwrap(),
        )
        .map_err(fail)?,
    ];
    for dim in [2, 3] {
        let h = random_hermitian(&mut rng, dim);
        let spec = GeneratorSpec::hermitian(h, 1.0).map_err(fail)?;
        let psi0 = PureState::new(random_vector(&mut rng, dim)).map_err(fail)?;
        trajectories.push(evolve(&spec, &psi0, TimeGrid::new(2.0, 2000).unwrap()).map_err(fail)?);
    }
    let mut reduction: f64 = 0.0;
    for traj in &trajectories {
        let rhos = traj
            .samples()
            .iter()
            .map(|s| {
                let p = unit(s.amplitudes());
                &p * p.adjoint()
            })
            .collect();
        let mixed = mixed_qsl(&DensityTrajectory::new(rhos, traj.dt(), traj.hbar()).map_err(fail)?)
            .map_err(fail)?;
        let pure = report(traj)?;
        for (a, b) in [
            (mixed.t_qsl, pure.t_qsl),
            (mixed.s, pure.s),
            (mixed.s0, pure.s0),
            (mixed.ratio, pure.ratio),
        ] {
            reduction = reduction.max(rel(a, b));
        }
        rows.push(mixed);
    }

    let (mut round_trip, mut independent): (f64, f64) = (0.0, 0.0);
    for k in 0..100 {
        let dim = 2 + k % 3;
        let rank = 1 + k % dim;
        let rho = random_density(&mut rng, dim, rank);
        let psi = purify(&rho).map_err(fail)?;
        round_trip = round_trip.max(max_abs(&partial_trace(&psi).map_err(fail)?, &rho));
        independent = independent.max(max_abs(&oracle_partial_trace(psi.amplitudes(), dim), &rho));
    }
    Ok(vec![
        at_most("rank_one_vs_pure", reduction, 1e-6),
        at_most("partial_trace_round_trip", round_trip, 1e-10),
        at_most("oracle_partial_trace", independent, 1e-10),
    ])
}

fn gauge_change(traj: &Trajectory, rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let coeffs: Vec<Complex64> = (0..3)
        .map(|_| c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)))
        .collect();
    let t_max = traj.duration();
    let scaled = traj
        .samples()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let x = k as f64 * traj.dt() / t_max;
            let factor =
                c(1.0, 0.0) + coeffs[0] * x + coeffs[1] * x * x + coeffs[2] * I * x * x * x;
            s.amplitudes() * factor
        })
        .collect();
    let scaled = Trajectory::from_amplitudes(scaled, traj.dt(), traj.hbar()).map_err(fail)?;
    let (a, b) = (speeds(traj).map_err(fail)?, speeds(&scaled).map_err(fail)?);
    let scale = a.iter().copied().fold(0.0, f64::max);
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1e-9 * scale))
        .fold(0.0, f64::max))
}

fn specs() -> Vec<(&'static str, String)> {
    let precession: Vec<String> = (0..=2000)
        .map(|k| {
            let t = 0.001 * k as f64;
            format!(
                r#"{{"re":[{},{}],"im":[{},{}]}}"#,
                (t / 2.0).cos(),
                (t / 2.0).cos(),
                -(t / 2.0).sin(),
                (t / 2.0).sin()
            )
        })
        .collect();
    vec![
        ("gain_loss", r#"{"model":"gain_loss","params":{"g":0.2,"gamma_L":0.8,"gamma_G":0.4}}"#.into()),
        ("pt_symmetric", r#"{"model":"pt_symmetric","params":{"g":0.6,"gamma":0.4}}"#.into()),
        (
            "bethe_lamb",
            r#"{"model":"bethe_lamb","params":{"gamma_1":10,"gamma_2":6.25e8,"Delta":1.8e8,"Omega":6e7}}"#.into(),
        ),
        (
            "hermitian_matrix",
            r#"{"model":"hermitian_matrix","params":{"H":{"re":[[1,0.3,0],[0.3,-0.5,0.2],[0,0.2,0.1]],"im":[[0,0.1,-0.4],[-0.1,0,0],[0.4,0,0]]}},"initial_state":{"re":[1,0.5,0],"im":[0,0,0.5]}}"#.into(),
        ),
        (
            "matrix",
            r#"{"model":"matrix","params":{"H":{"re":[[0.2,1],[0.4,-0.3]],"im":[[-0.5,0.2],[0,0.1]]}}}"#.into(),
        ),
        ("tabulated", format!(r#"{{"model":"tabulated","params":{{"dt":0.001,"states":[{}]}}}}"#, precession.join(","))),
    ]
}

fn universal(rows: &mut Vec<BoundReport>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut trajectories: Vec<Trajectory> = sets()
        .iter()
        .map(|p| gl_trajectory(p, TimeGrid::new(3.0, 600).unwrap()))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    trajectories.push(
        bl_trajectory(
            &BetheLambParams::hydrogen_like(),
            TimeGrid::new(16e-9, 2000).unwrap(),
        )
        .map_err(fail)?,
    );
    for dim in [2, 3, 4] {
        let psi0 = PureState::new(random_vector(&mut rng, dim)).map_err(fail)?;
        let spec = GeneratorSpec::constant(random_matrix(&mut rng, dim), 1.0).map_err(fail)?;
        trajectories.push(evolve(&spec, &psi0, TimeGrid::new(2.0, 1000).unwrap()).map_err(fail)?);
    }
    let mut gauge: f64 = 0.0;
    for traj in &trajectories {
        gauge = gauge.max(gauge_change(traj, &mut rng)?);
    }

    let mut short: f64 = f64::INFINITY;
    for (name, text) in specs() {
        let spec = ModelSpec::from_json(&text).map_err(|e| format!("{name}: {e}"))?;
        let sweep = if name == "tabulated" {
            SweepSpec::new(vec![0.5, 1.0, 2.0])
        } else {
            SweepSpec::parse("0.5:6:12")
        }
        .map_err(fail)?;
        let scale = if name == "bethe_lamb" { 1e-9 } else { 1.0 };
        let sweep =
            SweepSpec::new(sweep.values.iter().map(|t| t * scale).collect()).map_err(fail)?;
        rows.extend(
            bound_rows(&spec, Some(&sweep), &RunOptions::default())
                .map_err(|e| format!("{name}: {e}"))?,
        );

        if name != "tabulated" {
            let problem: Problem = spec.resolve().map_err(fail)?;
            let limit = SweepSpec::new(vec![1e-3 / problem.characteristic_rate()]).map_err(fail)?;
            let r = bound_rows(&spec, Some(&limit), &RunOptions::default())
                .map_err(|e| format!("{name}: {e}"))?;
            short = short.min(r[0].ratio);
            rows.extend(r);
        }
    }
    let fine: Vec<String> = (0..=200)
        .map(|k| {
            let t = 5e-6 * k as f64;
            format!(
                r#"{{"re":[{},{}],"im":[{},{}]}}"#,
                (t / 2.0).cos(),
                (t / 2.0).cos(),
                -(t / 2.0).sin(),
                (t / 2.0).sin()
            )
        })
        .collect();
    let tab = ModelSpec::from_json(&format!(
        r#"{{"model":"tabulated","params":{{"dt":5e-6,"states":[{}]}}}}"#,
        fine.join(",")
    ))
    .map_err(fail)?;
    let r = bound_rows(&tab, None, &RunOptions::default()).map_err(fail)?;
    short = short.min(r[0].ratio);
    rows.extend(r);

    let rhos = (0..=200)
        .map(|k| {
            let t = 5e-6 * k as f64;
            let psi = V::from_vec(vec![c((t / 2.0).cos(), 0.0), c(0.0, -(t / 2.0).sin())]);
            let p = 0.7 + 0.2 * (-t).exp();
            &psi * psi.adjoint() * c(p, 0.0) + M::identity(2, 2) * c(0.5 * (1.0 - p), 0.0)
        })
        .collect();
    let mixed = mixed_qsl(&DensityTrajectory::new(rhos, 5e-6, 1.0).map_err(fail)?).map_err(fail)?;
    short = short.min(mixed.ratio);
    rows.push(mixed);

    let ratio_excess = rows
        .iter()
        .map(|r| r.ratio - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio_floor = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let shortfall = rows
        .iter()
        .map(|r| r.s0 - r.s)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        below("gauge_change", gauge, 1e-6),
        at_most("ratio_minus_one", ratio_excess, 1e-6),
        at_least("min_ratio", ratio_floor, 0.0),
        at_most("s0_minus_s", shortfall, 1e-4),
        above("short_time_min_ratio", short, 0.999),
    ])
}

type Criterion = fn(&mut Vec<BoundReport>) -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("mandelstam_tamm_reduction", mandelstam_tamm),
        ("master_speed_identity", master_identity),
        ("gain_loss_closed_forms", gain_loss_closed_forms),
        ("formula_audit", formula_audit_criterion),
        ("equal_kappa_curves", equal_kappa),
        ("coupling_strength_ordering", coupling_strength),
        ("ground_lifetime_tightness", ground_lifetime),
        ("mixed_state_reduction", mixed_reduction),
        ("universal_properties", universal),
    ];
    let mut rows = Vec::new();
    let mut passed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run(&mut rows) {
            Ok(parts) => {
                let mut detail = String::new();
                for (j, p) in parts.iter().enumerate() {
                    let op = match p.cmp {
                        Cmp::AtMost => "<=",
                        Cmp::Below => "<",
                        Cmp::AtLeast => ">=",
                        Cmp::Above => ">",
                    };
                    let sep = if j == 0 { "" } else { "; " };
                    let mark = if p.passed() { "" } else { " (violated)" };
                    let limit = if p.limit == 0.0 || (1e-3..1e4).contains(&p.limit.abs()) {
                        p.limit.to_string()
                    } else {
                        format!("{:e}", p.limit)
                    };
                    let _ = write!(
                        detail,
                        "{sep}{} {:.3e} {op} {limit}{mark}",
                        p.label, p.measured
                    );
                }
                (parts.iter().all(Part::passed), detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if ok {
            passed += 1;
        }
        println!(
            "[{}] {} {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            k + 1
        );
    }
    println!("{passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
