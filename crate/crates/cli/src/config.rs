//! TOML run configuration.
//!
//! ```toml
//! [model]
//! preset = "NSE-EL"          # or theta / theta1 / theta2 / chi (+ dissipation)
//! alpha = 1.0
//! mu4 = 1.0
//!
//! [leslie]
//! mu1 = 0.0
//! mu2 = -1.0
//! mu3 = 0.0
//! mu5 = 0.5
//! mu6 = 0.5
//! case = 1
//!
//! [grid]
//! dim = 2
//! n_modes = 32
//! length = 6.283185307179586
//!
//! [time]
//! dt = 1e-3
//! t_end = 1.0
//! record_every = 10
//!
//! [init.velocity]
//! kind = "random_solenoidal"
//! amplitude = 0.5
//! spectrum_slope = -1.0
//! seed = 1
//!
//! [init.director]
//! kind = "constant"
//! vector = [1.0, 0.0]
//! ```
//!
//! Optional sections: `[forcing]` (`kind = "zero" | "steady" | "decaying"`
//! with a `[forcing.profile]` velocity generator and `delta`), `[output]`
//! (`csv_path`, `snapshot_dir`), `[tolerances]` (`maxp`, `budget`,
//! `blowup_threshold`) and `[[extra_norms]]` (`field = "velocity" |
//! "director"`, `s`).

use std::path::PathBuf;

use elreg_core::coefficients::{
    validate_constraints, Case, ChiVariant, Dissipation, LeslieCoefficients, ModelParams, Preset, ValidationReport,
};
use elreg_core::diagnostics::ExtraNorm;
use elreg_core::dynamics::{DirectorInit, ForcingConfig, GridSpec, RunConfig, Scheme, VelocityInit};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("coefficient constraint violated: {0}")]
    Constraint(ValidationReport),

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] elreg_core::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_variant: Option<ChiVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipation: Option<Dissipation>,
    pub alpha: f64,
    pub mu4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeslieSection {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub case: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub snapshot_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub velocity: VelocityInit,
    pub director: DirectorInit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack of the maximum-principle monitor.
    #[serde(default = "default_maxp")]
    pub maxp: f64,
    /// Budget residual above which `run` warns.
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

fn default_maxp() -> f64 {
    1e-6
}

fn default_budget() -> f64 {
    1e-2
}

fn default_blowup() -> f64 {
    1e8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            maxp: default_maxp(),
            budget: default_budget(),
            blowup_threshold: default_blowup(),
        }
    }
}

/// The file as written, before any derivation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    pub leslie: LeslieSection,
    pub grid: GridSpec,
    pub time: TimeSection,
    pub init: InitSection,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_norms: Vec<ExtraNorm>,
}

/// A validated configuration with its derived quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub file: ConfigFile,
    pub preset: Option<Preset>,
    pub params: ModelParams,
    pub leslie: LeslieCoefficients,
    pub lambda1: f64,
    pub lambda2: f64,
    pub report: ValidationReport,
}

impl SimConfig {
    pub fn run_config(&self) -> RunConfig {
        let f = &self.file;
        RunConfig {
            grid: f.grid,
            params: self.params,
            leslie: self.leslie,
            dt: f.time.dt,
            t_end: f.time.t_end,
            scheme: f.time.scheme,
            record_every: f.time.record_every,
            snapshot_every: f.time.snapshot_every,
            velocity_init: f.init.velocity.clone(),
            director_init: f.init.director.clone(),
            forcing: f.forcing.clone(),
            tol_maxp: f.tolerances.maxp,
            blowup_threshold: f.tolerances.blowup_threshold,
            extra_norms: f.extra_norms.clone(),
        }
    }

    /// Serializes the configuration back to TOML.
    pub fn emit(&self) -> String {
        emit_config(&self.file)
    }

    pub fn extra_column_names(&self) -> Vec<String> {
        self.file.extra_norms.iter().map(ExtraNorm::column_name).collect()
    }
}

pub fn emit_config(file: &ConfigFile) -> String {
    toml::to_string(file).expect("configuration is always representable in TOML")
}

/// Parses and fully validates a configuration.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate_file(file)
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn validate_file(file: ConfigFile) -> Result<SimConfig, ConfigError> {
    let (preset, params) = resolve_model(&file.model)?;
    params.validate()?;

    let l = &file.leslie;
    let case = Case::from_number(l.case)?;
    let leslie = LeslieCoefficients::new(l.mu1, l.mu2, l.mu3, l.mu5, l.mu6, case);
    let report = validate_constraints(&leslie);
    if !report.passed() {
        return Err(ConfigError::Constraint(report));
    }

    let g = &file.grid;
    g.build()?;
    if let DirectorInit::Constant { vector } | DirectorInit::PerturbedConstant { vector, .. } = &file.init.director {
        if vector.len() != g.dim {
            return Err(ConfigError::Invalid(format!(
                "init.director.vector has {} components, grid.dim is {}",
                vector.len(),
                g.dim
            )));
        }
    }
    if let ForcingConfig::Decaying { delta, .. } = file.forcing {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ConfigError::Invalid(format!("forcing.delta must lie in (0, 1), got {delta}")));
        }
    }
    if !(file.tolerances.budget > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "tolerances.budget must be > 0, got {}",
            file.tolerances.budget
        )));
    }

    let cfg = SimConfig {
        lambda1: leslie.lambda1(),
        lambda2: leslie.lambda2(),
        preset,
        params,
        leslie,
        report,
        file,
    };
    cfg.run_config().validate()?;
    Ok(cfg)
}

fn resolve_model(m: &ModelSection) -> Result<(Option<Preset>, ModelParams), ConfigError> {
    let explicit = [m.theta, m.theta1, m.theta2].iter().filter(|x| x.is_some()).count() + m.chi.is_some() as usize;
    let mut params = match &m.preset {
        Some(name) => {
            if explicit > 0 || m.dissipation.is_some() {
                return Err(ConfigError::Invalid(
                    "model: give either `preset` or explicit theta/theta1/theta2/chi/dissipation, not both".into(),
                ));
            }
            let preset: Preset = name.parse()?;
            return Ok((Some(preset), with_variant(preset.params(m.alpha, m.mu4), m.chi_variant)));
        }
        None => {
            let (Some(theta), Some(theta1), Some(theta2), Some(chi)) = (m.theta, m.theta1, m.theta2, m.chi) else {
                return Err(ConfigError::Invalid(
                    "model: without `preset`, all of theta, theta1, theta2 and chi are required".into(),
                ));
            };
            ModelParams {
                theta,
                theta1,
                theta2,
                chi,
                chi_variant: ChiVariant::default(),
                alpha: m.alpha,
                mu4: m.mu4,
                dissipation: m.dissipation.unwrap_or_default(),
            }
        }
    };
    params = with_variant(params, m.chi_variant);
    Ok((None, params))
}

fn with_variant(mut p: ModelParams, v: Option<ChiVariant>) -> ModelParams {
    if let Some(v) = v {
        p.chi_variant = v;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[model]
preset = "NSE-EL"
alpha = 1.0
mu4 = 1.0

[leslie]
mu1 = 0.0
mu2 = -1.0
mu3 = 0.5
mu5 = 0.75
mu6 = 0.25
case = 1

[grid]
dim = 2
n_modes = 16
length = 6.283185307179586

[time]
dt = 0.001
t_end = 0.01

[init.velocity]
kind = "zero"

[init.director]
kind = "constant"
vector = [1.0, 0.0]
"#;

    #[test]
    fn minimal_config_derives_lambdas() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.lambda1, -1.5);
        assert_eq!(c.lambda2, 0.5);
        assert_eq!(c.preset, Some(Preset::NseEl));
        assert!(c.report.passed());
        assert_eq!(c.file.time.record_every, 1);
        assert_eq!(c.file.tolerances, Tolerances::default());
    }

    #[test]
    fn lambda1_violation_names_the_inequality() {
        let text = MINIMAL.replace("mu2 = -1.0", "mu2 = 0.5");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Constraint(_)));
        assert!(err.to_string().contains("λ₁ < 0"), "{err}");
    }

    #[test]
    fn unknown_preset_lists_all_names() {
        let text = MINIMAL.replace("NSE-EL", "Euler");
        let msg = parse_config(&text).unwrap_err().to_string();
        for p in Preset::ALL {
            assert!(msg.contains(p.name()), "{msg}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = MINIMAL.replace("alpha = 1.0", "alpha = = 1.0");
        match parse_config(&text).unwrap_err() {
            ConfigError::Syntax { line, column, .. } => {
                assert_eq!(line, 4);
                assert!(column >= 8);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let full = MINIMAL.replace(
            "[init.velocity]\nkind = \"zero\"",
            "[init.velocity]\nkind = \"random_solenoidal\"\namplitude = 0.25\nspectrum_slope = -1.5\nseed = 42",
        ) + r#"
[forcing]
kind = "decaying"
delta = 0.5

[forcing.profile]
kind = "taylor_green"
amplitude = 0.001

[output]
csv_path = "out/records.csv"

[tolerances]
maxp = 1e-7

[[extra_norms]]
field = "velocity"
s = 1.0

[[extra_norms]]
field = "director"
s = 2.0
"#;
        let c = parse_config(&full).unwrap();
        let again = parse_config(&c.emit()).unwrap();
        assert_eq!(again, c);
        assert_eq!(c.extra_column_names(), vec!["norm_u_s1", "norm_d_s2"]);

        let explicit = MINIMAL.replace(
            "preset = \"NSE-EL\"",
            "theta = 1.0\ntheta1 = 1.0\ntheta2 = 1.0\nchi = 1\nchi_variant = \"literal\"",
        );
        let c = parse_config(&explicit).unwrap();
        assert_eq!(c.params.chi_variant, ChiVariant::Literal);
        assert_eq!(parse_config(&c.emit()).unwrap(), c);
    }

    #[test]
    fn mixed_or_incomplete_models_are_rejected() {
        let mixed = MINIMAL.replace("preset = \"NSE-EL\"", "preset = \"NSE-EL\"\ntheta = 1.0");
        assert!(matches!(parse_config(&mixed), Err(ConfigError::Invalid(_))));
        let partial = MINIMAL.replace("preset = \"NSE-EL\"", "theta = 1.0");
        assert!(matches!(parse_config(&partial), Err(ConfigError::Invalid(_))));
        let bad_dim = MINIMAL.replace("vector = [1.0, 0.0]", "vector = [1.0, 0.0, 0.0]");
        assert!(matches!(parse_config(&bad_dim), Err(ConfigError::Invalid(_))));
        let bad_dt = MINIMAL.replace("dt = 0.001", "dt = -1.0");
        assert!(matches!(parse_config(&bad_dt), Err(ConfigError::Model(_))));
    }
}
