//! Config-file parsing, flag merging, and tolerance tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qtraj_core::linalg::{DensityMatrix, HermitianMatrix};
use qtraj_core::scenarios::{Convention, Scenario};
use serde::Deserialize;

use crate::args::RunArgs;
use crate::matjson::{matrix_from_raw, RawMatrix};
use crate::CliError;

/// On-disk run configuration. Every field is optional; flags win over file
/// values. Unknown keys are rejected so typos cannot silently change a run.
/// Exactly one of `scenario` and `generator` selects what to run.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub generator: Option<GeneratorConfig>,
    pub initial_state: Option<RawMatrix>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub omega0: Option<f64>,
    pub t0: Option<f64>,
    pub tf: Option<f64>,
    pub step: Option<f64>,
    pub convention: Option<String>,
    pub regularize_delta: Option<f64>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub tolerances: Option<BTreeMap<String, f64>>,
}

/// Inline dynamics description: Hamiltonian terms with polynomial envelopes
/// plus jump terms.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub hamiltonian: Vec<TermConfig>,
    #[serde(default)]
    pub jumps: Vec<JumpConfig>,
}

/// One Hamiltonian term: a Hermitian operator scaled by a polynomial in
/// `(t - t0)`. Omitted coefficients mean a constant envelope of one.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub name: String,
    pub operator: RawMatrix,
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub rate: f64,
    pub operator: RawMatrix,
}

/// Validated inline dynamics, ready for generator assembly once the time
/// window is known.
#[derive(Debug)]
pub struct CustomSpec {
    /// `(name, operator, envelope coefficients in powers of t - t0)`.
    pub terms: Vec<(String, HermitianMatrix, Vec<f64>)>,
    pub jumps: Vec<(f64, qtraj_core::linalg::ComplexMatrix)>,
    pub initial: DensityMatrix,
}

/// What a run or audit operates on.
#[derive(Debug)]
pub enum Target {
    Scenario(String),
    Custom(CustomSpec),
}

fn custom_spec(
    generator: &GeneratorConfig,
    initial: &RawMatrix,
) -> Result<CustomSpec, CliError> {
    if generator.hamiltonian.is_empty() {
        return Err(CliError::Validation(
            "generator needs at least one hamiltonian term".into(),
        ));
    }
    let mut terms = Vec::with_capacity(generator.hamiltonian.len());
    for term in &generator.hamiltonian {
        let label = format!("hamiltonian term '{}'", term.name);
        let m = matrix_from_raw(&term.operator, &label)?;
        let op = HermitianMatrix::new(m)
            .map_err(|e| CliError::Validation(format!("{label}: {e}")))?;
        let coefficients = term.coefficients.clone().unwrap_or_else(|| vec![1.0]);
        if coefficients.is_empty() || coefficients.len() > 4 {
            return Err(CliError::Validation(format!(
                "{label}: envelope needs 1 to 4 coefficients (degree <= 3), got {}",
                coefficients.len()
            )));
        }
        terms.push((term.name.clone(), op, coefficients));
    }
    let mut jumps = Vec::with_capacity(generator.jumps.len());
    for (i, jump) in generator.jumps.iter().enumerate() {
        let m = matrix_from_raw(&jump.operator, &format!("jump {i}"))?;
        jumps.push((jump.rate, m));
    }
    let initial = matrix_from_raw(initial, "initial_state")?;
    let initial = DensityMatrix::new(initial)
        .map_err(|e| CliError::Validation(format!("initial_state: {e}")))?;
    Ok(CustomSpec { terms, jumps, initial })
}

/// Check tolerances, overridable by name.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub first_law: f64,
    pub first_law_sc: f64,
    pub heat_split: f64,
    pub wcd_routes: f64,
    pub sir_routes: f64,
    pub rel_entropy: f64,
    pub reconstruction: f64,
    pub bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            first_law: 1e-10,
            first_law_sc: 1e-10,
            heat_split: 1e-10,
            wcd_routes: 1e-10,
            sir_routes: 1e-10,
            rel_entropy: 1e-8,
            reconstruction: 1e-8,
            bound: 1e-10,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 8] = [
        "first-law",
        "first-law-sc",
        "heat-split",
        "wcd-routes",
        "sir-routes",
        "rel-entropy",
        "reconstruction",
        "bound",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        if !value.is_finite() || value < 0.0 {
            return Err(CliError::Validation(format!(
                "tolerance '{name}' must be finite and nonnegative, got {value}"
            )));
        }
        let slot = match name {
            "first-law" => &mut self.first_law,
            "first-law-sc" => &mut self.first_law_sc,
            "heat-split" => &mut self.heat_split,
            "wcd-routes" => &mut self.wcd_routes,
            "sir-routes" => &mut self.sir_routes,
            "rel-entropy" => &mut self.rel_entropy,
            "reconstruction" => &mut self.reconstruction,
            "bound" => &mut self.bound,
            _ => {
                return Err(CliError::Validation(format!(
                    "unknown tolerance '{name}'; valid names: {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<(), CliError> {
        for pair in pairs {
            let (name, value) = pair.split_once('=').ok_or_else(|| {
                CliError::Validation(format!(
                    "tolerance override '{pair}' is not of the form <name>=<value>"
                ))
            })?;
            let value: f64 = value.parse().map_err(|_| {
                CliError::Validation(format!("tolerance '{name}' has non-numeric value '{value}'"))
            })?;
            self.set(name.trim(), value)?;
        }
        Ok(())
    }

    pub fn as_json(&self) -> serde_json::Value {
        serde_json::json!({
            "first-law": self.first_law,
            "first-law-sc": self.first_law_sc,
            "heat-split": self.heat_split,
            "wcd-routes": self.wcd_routes,
            "sir-routes": self.sir_routes,
            "rel-entropy": self.rel_entropy,
            "reconstruction": self.reconstruction,
            "bound": self.bound,
        })
    }
}

/// Fully merged and validated settings for a run or audit.
#[derive(Debug)]
pub struct Settings {
    pub target: Target,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub omega0: Option<f64>,
    pub t0: Option<f64>,
    pub tf: Option<f64>,
    pub step: f64,
    pub convention: Convention,
    pub regularize_delta: Option<f64>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub tolerances: Tolerances,
}

fn parse_convention(label: &str) -> Result<Convention, CliError> {
    match label {
        "sz" => Ok(Convention::Sz),
        "sz-half" => Ok(Convention::SzHalf),
        other => Err(CliError::Validation(format!(
            "unknown convention '{other}'; valid values: sz, sz-half"
        ))),
    }
}

pub fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

impl Settings {
    /// Merges flags over the optional config file and validates the result.
    pub fn merge(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => load_config(path)?,
            None => FileConfig::default(),
        };
        let scenario_name = args.scenario.clone().or(file.scenario);
        let target = match (&file.generator, scenario_name) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "a run takes either a scenario or an inline generator, not both".into(),
                ))
            }
            (Some(generator), None) => {
                let initial = file.initial_state.as_ref().ok_or_else(|| {
                    CliError::Validation(
                        "an inline generator needs \"initial_state\" in the config".into(),
                    )
                })?;
                Target::Custom(custom_spec(generator, initial)?)
            }
            (None, Some(name)) => {
                if file.initial_state.is_some() {
                    return Err(CliError::Validation(
                        "\"initial_state\" only applies to inline generator runs".into(),
                    ));
                }
                Target::Scenario(name)
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "nothing to run: pass --scenario or set \"scenario\" or \"generator\" in the config"
                        .into(),
                ))
            }
        };
        let beta = args.beta.or(file.beta).ok_or_else(|| {
            CliError::Validation(
                "beta is required and has no default: pass --beta or set \"beta\" in the config"
                    .into(),
            )
        })?;
        let convention_label = args.convention.as_deref().or(file.convention.as_deref());
        if matches!(target, Target::Custom(_)) {
            // These knobs parameterize the built-in scenarios; silently
            // ignoring them on a custom run would misreport the physics.
            if convention_label.is_some() {
                return Err(CliError::Validation(
                    "convention applies to built-in scenarios only".into(),
                ));
            }
            if file.gamma.is_some() || file.omega0.is_some() {
                return Err(CliError::Validation(
                    "gamma/omega0 apply to built-in scenarios only; bake rates into the generator"
                        .into(),
                ));
            }
        }
        let convention = match convention_label {
            Some(label) => parse_convention(label)?,
            None => Convention::default(),
        };
        let step = args.step.or(file.step).unwrap_or(1e-3);
        if !step.is_finite() || step <= 0.0 {
            return Err(CliError::Validation(format!(
                "step must be finite and positive, got {step}"
            )));
        }
        let mut tolerances = Tolerances::default();
        if let Some(table) = &file.tolerances {
            for (name, value) in table {
                tolerances.set(name, *value)?;
            }
        }
        tolerances.apply_overrides(&args.tolerances)?;
        Ok(Self {
            target,
            beta,
            gamma: file.gamma,
            omega0: file.omega0,
            t0: args.t0.or(file.t0),
            tf: args.tf.or(file.tf),
            step,
            convention,
            regularize_delta: args.regularize_delta.or(file.regularize_delta),
            out_csv: args.out_csv.clone().or(file.out_csv),
            out_json: args.out_json.clone().or(file.out_json),
            tolerances,
        })
    }

    /// Builds the configured scenario. Fails on custom-generator settings.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let name = match &self.target {
            Target::Scenario(name) => name,
            Target::Custom(_) => {
                return Err(CliError::Validation(
                    "settings describe an inline generator, not a scenario".into(),
                ))
            }
        };
        let mut scenario = Scenario::by_name(name, self.beta)?.with_convention(self.convention);
        if self.gamma.is_some() || self.omega0.is_some() {
            let gamma = self.gamma.unwrap_or(scenario.params().gamma);
            let omega0 = self.omega0.unwrap_or(scenario.params().omega0);
            scenario = scenario.with_rates(gamma, omega0)?;
        }
        if self.t0.is_some() || self.tf.is_some() {
            let (t0, tf) = scenario.window();
            scenario = scenario.with_window(self.t0.unwrap_or(t0), self.tf.unwrap_or(tf))?;
        }
        Ok(scenario)
    }
}

/// Resolves an output path: explicit paths are used as given, defaults land
/// in `QTRAJ_OUT_DIR` when set, else the working directory.
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    match explicit {
        Some(path) => path.to_path_buf(),
        None => match std::env::var_os("QTRAJ_OUT_DIR") {
            Some(dir) => PathBuf::from(dir).join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}
