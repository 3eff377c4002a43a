//! Experiment configuration: a TOML document with `grid`, `sampling`,
//! `reconstruction`, `prior`, `input`, `lambda` and optional `output`
//! sections. See `docs/config.md` for the grammar.

use std::path::{Path, PathBuf};

use gsrp_core::numerics::Signal;
use gsrp_core::signals::{
    gaussian_signal, read_signal, synthetic_wideband, GeneratorSpec, GridSpec, ShiftPolicy,
};
use gsrp_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// A generator plus the rule choosing its shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub shifts: ShiftPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Gaussian { sigma: f64 },
    File { path: PathBuf },
    SyntheticWideband { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum LambdaSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: GridSpec,
    sampling: SpaceSpec,
    reconstruction: SpaceSpec,
    prior: SpaceSpec,
    input: InputSpec,
    lambda: LambdaSpec,
    #[serde(default)]
    output: OutputSpec,
}

/// A validated experiment. File paths are resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub sampling: SpaceSpec,
    pub reconstruction: SpaceSpec,
    pub prior: SpaceSpec,
    pub input: InputSpec,
    /// Sorted, unique, within `[0, 1]`.
    pub lambda_grid: Vec<f64>,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Samples of the configured input on the grid.
    pub fn input_signal(&self) -> Result<Signal> {
        match &self.input {
            InputSpec::Gaussian { sigma } => gaussian_signal(*sigma, &self.grid),
            InputSpec::SyntheticWideband { seed } => synthetic_wideband(*seed, &self.grid),
            InputSpec::File { path } => read_signal(path)?.on_grid(&self.grid),
        }
    }
}

fn semantic(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigSemantic {
        field: field.into(),
        message: message.into(),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |nl| before.len() - nl - 1)
        + 1;
    (line, column)
}

/// Parses and validates a config. Relative input paths are taken relative to
/// the current directory.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig> {
    validate_config_in(raw, None)
}

/// Like [`validate_config`], resolving relative paths against `base`.
pub fn validate_config_in(raw: &str, base: Option<&Path>) -> Result<ExperimentConfig> {
    let parsed: RawConfig = toml::from_str(raw).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(raw, s.start));
        Error::ConfigParse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let grid = parsed.grid;
    grid.validate().map_err(|e| semantic("grid", e.to_string()))?;
    for (field, space) in [
        ("sampling", &parsed.sampling),
        ("reconstruction", &parsed.reconstruction),
        ("prior", &parsed.prior),
    ] {
        space
            .generator
            .validate(&grid)
            .map_err(|e| semantic(&format!("{field}.generator"), e.to_string()))?;
    }

    let input = match parsed.input {
        InputSpec::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
            return Err(semantic("input.sigma", format!("must be positive, got {sigma}")));
        }
        InputSpec::File { path } => {
            let path = match base {
                Some(b) if path.is_relative() => b.join(path),
                _ => path,
            };
            if !path.is_file() {
                return Err(semantic(
                    "input.path",
                    format!("{} does not exist", path.display()),
                ));
            }
            InputSpec::File { path }
        }
        other => other,
    };

    let lambda_grid = match parsed.lambda {
        LambdaSpec::Values(v) => v,
        LambdaSpec::Range { start, stop, count } => {
            if count < 2 {
                return Err(semantic("lambda.count", "a range needs at least two points"));
            }
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
    };
    if lambda_grid.is_empty() {
        return Err(semantic("lambda", "the lambda grid is empty"));
    }
    if let Some(bad) = lambda_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(semantic("lambda", format!("{bad} is outside [0, 1]")));
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(semantic("lambda", "values must be strictly increasing"));
    }

    Ok(ExperimentConfig {
        grid,
        sampling: parsed.sampling,
        reconstruction: parsed.reconstruction,
        prior: parsed.prior,
        input,
        lambda_grid,
        output: parsed.output,
    })
}

/// Built-in configs, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("gaussian_fig3", include_str!("../presets/gaussian_fig3.toml")),
    (
        "synthetic_wideband",
        include_str!("../presets/synthetic_wideband.toml"),
    ),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Loads a config from a file, or from a preset when `source` names one and
/// no such file exists.
pub fn load_config(source: &str) -> Result<ExperimentConfig> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return validate_config_in(&text, path.parent());
    }
    match preset(source) {
        Some(text) => validate_config(text),
        None => Err(semantic(
            "config",
            format!(
                "{source} is neither a file nor a preset ({})",
                PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ),
        )),
    }
}
