//! Evolution runs, bound sweeps and mixed-state reports.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{analytic_speeds, evolve, GeneratorSpec};
use crate::error::QslError;
use crate::geometry::{qsl_report_with_tolerance, speeds, BoundReport, Trajectory, PATH_TOLERANCE};
use crate::mixed::{mixed_qsl_with_tolerance, DensityTrajectory, GaugeInfo};
use crate::models::{
    bethe_lamb::bl_amplitudes, bl_quantities, bl_trajectory, gl_quantities, gl_trajectory,
};
use crate::numerics::{cumulative_integral, TimeGrid};

use super::spec::{ComplexTable, Model, ModelSpec, Problem, SweepSpec};
use super::CliError;

/// Rows whose ratio exceeds one by more than this are rejected.
pub const RATIO_SLACK: f64 = 1e-6;

pub const BOUND_HEADER: &str = "T,S0,S,V_bar,T_qsl,ratio";

/// Knobs shared by the `evolve` and `bound` subcommands.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub steps: Option<usize>,
    pub tolerance: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            steps: None,
            tolerance: PATH_TOLERANCE,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn numerical(context: String) -> impl FnOnce(QslError) -> CliError {
    move |e| CliError::Numerical(format!("{context}: {e}"))
}

fn generator_path(problem: &Problem) -> Option<GeneratorSpec> {
    match (&problem.model, &problem.initial) {
        (Model::Generator(g), _) => Some(g.clone()),
        (Model::GainLoss(p), Some(_)) => {
            Some(GeneratorSpec::constant(p.hamiltonian(), 1.0).expect("finite generator"))
        }
        (Model::BetheLamb(p), Some(_)) => Some(p.generator_spec()),
        _ => None,
    }
}

impl Problem {
    fn grid_for(&self, t_max: f64, steps: Option<usize>) -> Result<TimeGrid, QslError> {
        TimeGrid::new(t_max, steps.unwrap_or_else(|| self.default_steps(t_max)))
    }

    /// Trajectory on `[0, t_max]` used for bound rows.
    pub fn trajectory(&self, t_max: f64, steps: Option<usize>) -> Result<Trajectory, QslError> {
        if let Model::Tabulated(traj) = &self.model {
            let len = (t_max / traj.dt() + 1e-9).floor() as usize + 1;
            if len > traj.len() {
                return Err(QslError::InvalidGrid(format!(
                    "T = {t_max} lies beyond the tabulated duration {}",
                    traj.duration()
                )));
            }
            return traj.prefix(len);
        }
        let grid = self.grid_for(t_max, steps)?;
        if let Some(spec) = generator_path(self) {
            let psi0 = self.initial.as_ref().expect("generator runs carry a state");
            return evolve(&spec, psi0, grid);
        }
        match &self.model {
            Model::GainLoss(p) => gl_trajectory(p, grid),
            Model::BetheLamb(p) => bl_trajectory(p, grid),
            _ => unreachable!("handled above"),
        }
    }

    /// Trajectory with physical (unnormalized) amplitudes, for `evolve`.
    fn raw_trajectory(&self, grid: TimeGrid) -> Result<Trajectory, QslError> {
        match (&self.model, &self.initial) {
            (Model::BetheLamb(p), None) => {
                let samples = grid
                    .times()
                    .into_iter()
                    .map(|t| bl_amplitudes(p, t))
                    .collect::<Result<Vec<_>, _>>()?;
                Trajectory::from_amplitudes(samples, grid.dt(), 1.0)
            }
            _ => self.trajectory(grid.t_max, Some(grid.steps)),
        }
    }

    fn analytic(&self, traj: &Trajectory) -> Option<Result<Vec<f64>, QslError>> {
        let times = || (0..traj.len()).map(|k| k as f64 * traj.dt());
        if let Some(spec) = generator_path(self) {
            return Some(analytic_speeds(traj, &spec));
        }
        match &self.model {
            Model::GainLoss(p) => Some(times().map(|t| gl_quantities(p, t).map(|q| q.v)).collect()),
            Model::BetheLamb(p) => {
                Some(times().map(|t| bl_quantities(p, t).map(|q| q.v)).collect())
            }
            _ => None,
        }
    }
}

/// CSV of the sampled state, its norm, numeric and closed-form speeds, and
/// the accumulated path length.
pub fn run_evolve(spec: &ModelSpec, opts: &RunOptions) -> Result<String, CliError> {
    let problem = spec.resolve()?;
    let traj = match (&problem.model, problem.grid) {
        (Model::Tabulated(traj), _) => traj.clone(),
        (_, None) => return Err(CliError::Input("evolve needs a `grid`".into())),
        (_, Some(grid)) => {
            let grid = match opts.steps {
                Some(steps) => {
                    TimeGrid::new(grid.t_max, steps).map_err(|e| CliError::Input(e.to_string()))?
                }
                None => grid,
            };
            problem
                .raw_trajectory(grid)
                .map_err(numerical("evolution".into()))?
        }
    };
    let v_numeric = speeds(&traj).map_err(numerical("numeric speed".into()))?;
    let v_analytic = problem
        .analytic(&traj)
        .transpose()
        .map_err(numerical("closed-form speed".into()))?;
    let s_cum =
        cumulative_integral(&v_numeric, traj.dt()).map_err(numerical("path length".into()))?;

    let dim = traj.first().dim();
    let mut out = String::from("t");
    for k in 0..dim {
        write!(out, ",re_{k},im_{k}").unwrap();
    }
    out.push_str(",norm,V_numeric");
    if v_analytic.is_some() {
        out.push_str(",V_analytic");
    }
    out.push_str(",S_cum\n");
    for (k, psi) in traj.samples().iter().enumerate() {
        out.push_str(&num(k as f64 * traj.dt()));
        for z in psi.amplitudes().iter() {
            write!(out, ",{},{}", num(z.re), num(z.im)).unwrap();
        }
        write!(out, ",{},{}", num(psi.norm()), num(v_numeric[k])).unwrap();
        if let Some(v) = &v_analytic {
            write!(out, ",{}", num(v[k])).unwrap();
        }
        writeln!(out, ",{}", num(s_cum[k])).unwrap();
    }
    Ok(out)
}

/// Bound reports, one per evolution time.
pub fn bound_rows(
    spec: &ModelSpec,
    sweep: Option<&SweepSpec>,
    opts: &RunOptions,
) -> Result<Vec<BoundReport>, CliError> {
    let problem = spec.resolve()?;
    let times = match (sweep, &problem.model, problem.grid) {
        (Some(s), _, _) => s.values.clone(),
        (None, Model::Tabulated(traj), _) => vec![traj.duration()],
        (None, _, Some(grid)) => vec![grid.t_max],
        (None, _, None) => {
            return Err(CliError::Input("bound needs a `grid` or a --sweep".into()));
        }
    };
    let steps = match (sweep, problem.grid) {
        (None, Some(grid)) => opts.steps.or(Some(grid.steps)),
        _ => opts.steps,
    };
    times
        .par_iter()
        .map(|&t| {
            let context = || format!("T = {t:e}");
            let traj = problem.trajectory(t, steps).map_err(numerical(context()))?;
            let report =
                qsl_report_with_tolerance(&traj, opts.tolerance).map_err(numerical(context()))?;
            if !(report.ratio >= 0.0 && report.ratio <= 1.0 + RATIO_SLACK) {
                return Err(CliError::Numerical(format!(
                    "{}: ratio {} outside [0, 1]",
                    context(),
                    report.ratio
                )));
            }
            Ok(report)
        })
        .collect()
}

pub fn bound_csv(rows: &[BoundReport]) -> String {
    let mut out = format!("{BOUND_HEADER}\n");
    for r in rows {
        let cells = [r.t, r.s0, r.s, r.v_bar, r.t_qsl, r.ratio].map(num);
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

/// CSV with header `T,S0,S,V_bar,T_qsl,ratio`.
pub fn run_bound(
    spec: &ModelSpec,
    sweep: Option<&SweepSpec>,
    opts: &RunOptions,
) -> Result<String, CliError> {
    Ok(bound_csv(&bound_rows(spec, sweep, opts)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    dt: f64,
    #[serde(default = "one")]
    hbar: f64,
    samples: Vec<ComplexTable>,
}

fn one() -> f64 {
    1.0
}

/// Parses `{dt, hbar, samples: [{re, im}]}` into a validated trajectory.
pub fn ingest_density_trajectory(text: &str) -> Result<DensityTrajectory, CliError> {
    let file: DensityFile = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("invalid density file: {e}")))?;
    let samples = file
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.to_matrix()
                .map_err(|e| CliError::Input(format!("sample {k}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    DensityTrajectory::new(samples, file.dt, file.hbar).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedOutput {
    pub report: BoundReport,
    pub gauge: GaugeInfo,
    pub dim: usize,
    pub samples: usize,
    pub dt: f64,
    pub hbar: f64,
}

pub fn run_mixed(text: &str, tolerance: f64) -> Result<MixedOutput, CliError> {
    let rhos = ingest_density_trajectory(text)?;
    let report = mixed_qsl_with_tolerance(&rhos, tolerance)
        .map_err(numerical("mixed-state bound".into()))?;
    Ok(MixedOutput {
        report,
        gauge: GaugeInfo::canonical(),
        dim: rhos.dim(),
        samples: rhos.len(),
        dt: rhos.dt(),
        hbar: rhos.hbar(),
    })
}
