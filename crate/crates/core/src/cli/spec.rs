//! Model specifications and parameter sweeps as read from the command line.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::GeneratorSpec;
use crate::geometry::{PureState, Trajectory};
use crate::models::{default_steps, maximally_coherent, BetheLambParams, GainLossParams};
use crate::numerics::{c, matrix_from_parts, norm_one, ComplexMatrix, ComplexVector, TimeGrid};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GainLoss,
    PtSymmetric,
    BetheLamb,
    HermitianMatrix,
    Matrix,
    Tabulated,
}

/// Complex vector as separate real and imaginary parts; `im` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexArray {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl ComplexArray {
    pub fn to_vector(&self) -> Result<ComplexVector, String> {
        let zeros = vec![0.0; self.re.len()];
        let im = self.im.as_ref().unwrap_or(&zeros);
        if im.len() != self.re.len() {
            return Err(format!(
                "re has {} entries but im has {}",
                self.re.len(),
                im.len()
            ));
        }
        Ok(ComplexVector::from_iterator(
            self.re.len(),
            self.re.iter().zip(im).map(|(&r, &i)| c(r, i)),
        ))
    }
}

/// Complex matrix as nested rows of real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexTable {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl ComplexTable {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        let zeros: Vec<Vec<f64>> = self.re.iter().map(|row| vec![0.0; row.len()]).collect();
        matrix_from_parts(&self.re, self.im.as_ref().unwrap_or(&zeros)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform {
        t_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
    },
    List {
        t_list: Vec<f64>,
    },
}

fn default_hbar() -> f64 {
    1.0
}

fn is_default_hbar(h: &f64) -> bool {
    *h == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: ModelKind,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default = "default_hbar", skip_serializing_if = "is_default_hbar")]
    pub hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

/// A spec after validation.
#[derive(Debug, Clone)]
pub enum Model {
    GainLoss(GainLossParams),
    BetheLamb(BetheLambParams),
    Generator(GeneratorSpec),
    Tabulated(Trajectory),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub model: Model,
    /// `None` runs the closed-form path from the maximally coherent state.
    pub initial: Option<PureState>,
    pub grid: Option<TimeGrid>,
    pub hbar: f64,
}

struct Params<'a> {
    map: &'a Map<String, Value>,
    model: &'static str,
}

impl<'a> Params<'a> {
    fn expect_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Input(format!(
                    "unknown parameter `{key}` for model {}; expected {}",
                    self.model,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn value(&self, key: &str) -> Result<&'a Value, CliError> {
        self.map
            .get(key)
            .ok_or_else(|| CliError::Input(format!("model {} needs parameter `{key}`", self.model)))
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        self.value(key)?.as_f64().ok_or_else(|| {
            CliError::Input(format!(
                "parameter `{key}` of model {} must be a number",
                self.model
            ))
        })
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self, key: &str) -> Result<T, CliError> {
        serde_json::from_value(self.value(key)?.clone())
            .map_err(|e| CliError::Input(format!("parameter `{key}` of model {}: {e}", self.model)))
    }
}

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{context}: {e}"))
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(input("invalid model spec"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    fn name(&self) -> &'static str {
        match self.model {
            ModelKind::GainLoss => "gain_loss",
            ModelKind::PtSymmetric => "pt_symmetric",
            ModelKind::BetheLamb => "bethe_lamb",
            ModelKind::HermitianMatrix => "hermitian_matrix",
            ModelKind::Matrix => "matrix",
            ModelKind::Tabulated => "tabulated",
        }
    }

    /// Validates parameters, grid and initial state.
    pub fn resolve(&self) -> Result<Problem, CliError> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(CliError::Input(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        let params = Params {
            map: &self.params,
            model: self.name(),
        };
        let closed_form = matches!(
            self.model,
            ModelKind::GainLoss | ModelKind::PtSymmetric | ModelKind::BetheLamb
        );
        if closed_form && self.hbar != 1.0 {
            return Err(CliError::Input(format!(
                "model {} is defined with hbar = 1",
                self.name()
            )));
        }
        let model = match self.model {
            ModelKind::GainLoss => {
                params.expect_keys(&["g", "gamma_L", "gamma_G"])?;
                let p = GainLossParams::new(
                    params.real("g")?,
                    params.real("gamma_L")?,
                    params.real("gamma_G")?,
                );
                Model::GainLoss(p.map_err(input("gain_loss"))?)
            }
            ModelKind::PtSymmetric => {
                params.expect_keys(&["g", "gamma"])?;
                let p = GainLossParams::pt_symmetric(params.real("g")?, params.real("gamma")?);
                Model::GainLoss(p.map_err(input("pt_symmetric"))?)
            }
            ModelKind::BetheLamb => {
                params.expect_keys(&["gamma_1", "gamma_2", "Delta", "Omega"])?;
                let p = BetheLambParams::new(
                    params.real("gamma_1")?,
                    params.real("gamma_2")?,
                    params.real("Delta")?,
                    params.real("Omega")?,
                );
                Model::BetheLamb(p.map_err(input("bethe_lamb"))?)
            }
            ModelKind::HermitianMatrix | ModelKind::Matrix => {
                params.expect_keys(&["H"])?;
                let h = params
                    .parse::<ComplexTable>("H")?
                    .to_matrix()
                    .map_err(input("parameter `H`"))?;
                let spec = if self.model == ModelKind::HermitianMatrix {
                    GeneratorSpec::hermitian(h, self.hbar)
                } else {
                    GeneratorSpec::constant(h, self.hbar)
                };
                Model::Generator(spec.map_err(input("parameter `H`"))?)
            }
            ModelKind::Tabulated => {
                params.expect_keys(&["dt", "states"])?;
                if self.grid.is_some() || self.initial_state.is_some() {
                    return Err(CliError::Input(
                        "tabulated models take their grid and states from `params`".into(),
                    ));
                }
                let states = params
                    .parse::<Vec<ComplexArray>>("states")?
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        s.to_vector()
                            .map_err(|e| CliError::Input(format!("state {k}: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let traj = Trajectory::from_amplitudes(states, params.real("dt")?, self.hbar)
                    .map_err(input("tabulated states"))?;
                Model::Tabulated(traj)
            }
        };

        let dim = match &model {
            Model::Generator(g) => g.dim(),
            Model::Tabulated(t) => t.first().dim(),
            _ => 2,
        };
        let initial = match &self.initial_state {
            Some(state) => {
                let v = state.to_vector().map_err(input("initial_state"))?;
                if v.len() != dim {
                    return Err(CliError::Input(format!(
                        "initial_state has {} entries, model dimension is {dim}",
                        v.len()
                    )));
                }
                Some(PureState::new(v).map_err(input("initial_state"))?)
            }
            None if matches!(model, Model::Generator(_)) => {
                if dim != 2 {
                    return Err(CliError::Input(format!(
                        "initial_state is required for dimension {dim}"
                    )));
                }
                Some(PureState::new(maximally_coherent()).expect("unit vector"))
            }
            None => None,
        };

        let mut problem = Problem {
            model,
            initial,
            grid: None,
            hbar: self.hbar,
        };
        problem.grid = match &self.grid {
            None => None,
            Some(GridSpec::Uniform { t_max, steps }) => {
                let steps = steps.unwrap_or_else(|| problem.default_steps(*t_max));
                Some(TimeGrid::new(*t_max, steps).map_err(input("grid"))?)
            }
            Some(GridSpec::List { t_list }) => Some(uniform_from_list(t_list)?),
        };
        Ok(problem)
    }
}

/// Sample times must start at zero and be evenly spaced.
fn uniform_from_list(t_list: &[f64]) -> Result<TimeGrid, CliError> {
    if t_list.len() < 3 {
        return Err(CliError::Input(format!(
            "t_list needs at least 3 times, got {}",
            t_list.len()
        )));
    }
    if t_list[0] != 0.0 {
        return Err(CliError::Input(format!(
            "t_list must start at 0, got {}",
            t_list[0]
        )));
    }
    let steps = t_list.len() - 1;
    let t_max = t_list[steps];
    let dt = t_max / steps as f64;
    for (k, &t) in t_list.iter().enumerate() {
        if !t.is_finite() || (t - k as f64 * dt).abs() > 1e-9 * dt {
            return Err(CliError::Input(format!(
                "t_list must be evenly spaced; entry {k} is {t}, expected {}",
                k as f64 * dt
            )));
        }
    }
    TimeGrid::new(t_max, steps).map_err(input("t_list"))
}

impl Problem {
    /// Rate that sets the default grid density.
    pub fn characteristic_rate(&self) -> f64 {
        match &self.model {
            Model::GainLoss(p) => p.characteristic_rate(),
            Model::BetheLamb(p) => p.characteristic_rate(),
            Model::Generator(g) => g.at(0.0).map(|h| norm_one(&h) / self.hbar).unwrap_or(0.0),
            Model::Tabulated(_) => 0.0,
        }
    }

    pub fn default_steps(&self, t_max: f64) -> usize {
        default_steps(t_max, self.characteristic_rate())
    }
}

/// Values of the swept evolution time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(values: Vec<f64>) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(CliError::Input("sweep has no values".into()));
        }
        for (k, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input(format!(
                    "sweep value {k} must be positive, got {v}"
                )));
            }
            if k > 0 && v <= values[k - 1] {
                return Err(CliError::Input(format!(
                    "sweep values must increase strictly; {v} follows {}",
                    values[k - 1]
                )));
            }
        }
        Ok(Self {
            variable: "T".into(),
            values,
        })
    }

    /// `min:max:count[:log]` or a comma-separated list.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad number `{s}` in sweep `{text}`")))
        };
        if !text.contains(':') {
            return Self::new(text.split(',').map(number).collect::<Result<_, _>>()?);
        }
        let parts: Vec<&str> = text.split(':').collect();
        let log = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") | Some("linear") => false,
            Some("log") => true,
            Some(other) => {
                return Err(CliError::Input(format!("unknown sweep spacing `{other}`")));
            }
        };
        if !(3..=4).contains(&parts.len()) {
            return Err(CliError::Input(format!(
                "sweep `{text}` is not min:max:count[:log]"
            )));
        }
        let (min, max) = (number(parts[0])?, number(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad count `{}` in sweep", parts[2])))?;
        if count == 0 {
            return Err(CliError::Input("sweep count must be at least 1".into()));
        }
        if count == 1 {
            return Self::new(vec![min]);
        }
        if log && !(min > 0.0 && max > 0.0) {
            return Err(CliError::Input("log sweeps need positive bounds".into()));
        }
        let last = (count - 1) as f64;
        let values = (0..count)
            .map(|k| {
                let f = k as f64 / last;
                if k == 0 {
                    min
                } else if k == count - 1 {
                    max
                } else if log {
                    (min.ln() + f * (max.ln() - min.ln())).exp()
                } else {
                    min + f * (max - min)
                }
            })
            .collect();
        Self::new(values)
    }
}
