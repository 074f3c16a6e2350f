//! Run configuration: JSON schema, parsing with pointer-precise errors, emission.

use std::fmt;
use std::path::Path;

use ruin_core::mc::McConfig;
use ruin_core::{AndersenModel, ClassicalModel, Convention, SeasonalModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ComputeDiscrete,
    ComputeClassical,
    ComputeAndersen,
    SweepEpsilon,
    Simulate,
    Verify,
}

impl Command {
    fn implied_kind(self) -> Option<ModelKind> {
        match self {
            Command::ComputeDiscrete => Some(ModelKind::Discrete),
            Command::ComputeClassical => Some(ModelKind::Classical),
            Command::ComputeAndersen => Some(ModelKind::Andersen),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Discrete,
    Classical,
    Andersen,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Discrete => "discrete",
            ModelKind::Classical => "classical",
            ModelKind::Andersen => "andersen",
        }
    }
}

/// A model tagged by its `kind` field when written out.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Discrete(SeasonalModel<f64>),
    Classical(ClassicalModel),
    Andersen(AndersenModel),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Discrete(_) => ModelKind::Discrete,
            ModelSpec::Classical(_) => ModelKind::Classical,
            ModelSpec::Andersen(_) => ModelKind::Andersen,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    /// Stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Origin of the first `cN` survival values for seasonal models.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockSourceKind {
    #[default]
    Mc,
    Dp,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSpec,
    #[serde(flatten)]
    pub settings: Settings,
}

/// Everything except the command and the model. Unused fields are ignored by
/// commands that do not need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    pub convention: Convention,
    pub u_max: f64,
    /// Truncation tolerance for compound-geometric series.
    pub tolerance: f64,
    pub grid_step: f64,
    pub mc: McConfig,
    pub output: OutputSpec,
    pub epsilons: Vec<f64>,
    /// Surplus points reported by continuous sweeps.
    pub u_list: Vec<f64>,
    /// Threshold `a` of the continuous perturbation; `E X ln 2` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Season perturbed by discrete sweeps and coupling runs.
    pub season: usize,
    /// Step counts reported by the Spitzer estimator.
    pub n_list: Vec<usize>,
    /// Claim events simulated per path when sampling ladder heights.
    pub ladder_horizon: usize,
    pub block_source: BlockSourceKind,
    pub dp_horizon: usize,
    pub max_states: usize,
    /// Horizons reported by `simulate` and `verify`; `[mc.horizon]` when empty.
    pub horizons: Vec<usize>,
    /// Initial surplus for `simulate` and coupling runs.
    pub u: f64,
    /// `verify`: smallest acceptable `psi(0, T)` at the last horizon for a neutral model.
    pub trend_threshold: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            convention: Convention::Weak,
            u_max: 10.0,
            tolerance: 1e-6,
            grid_step: ruin_core::classical::DEFAULT_GRID_STEP,
            mc: McConfig::new(100_000, 1000, 0),
            output: OutputSpec::default(),
            epsilons: vec![0.1, 0.01, 0.001],
            u_list: vec![0.0],
            threshold: None,
            season: 0,
            n_list: vec![1, 10, 100, 1000],
            ladder_horizon: 10_000,
            block_source: BlockSourceKind::Mc,
            dp_horizon: 10_000,
            max_states: 1 << 22,
            horizons: Vec::new(),
            u: 0.0,
            trend_threshold: 0.95,
        }
    }
}

impl Settings {
    pub fn horizons(&self) -> Vec<usize> {
        if self.horizons.is_empty() {
            vec![self.mc.horizon]
        } else {
            self.horizons.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Io,
    Syntax,
    Schema,
}

/// Config problem located by a JSON pointer into the document.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    fn schema(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            kind: ConfigErrorKind::Schema,
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", escape(key))),
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = format!("{prefix}{}", pointer_of(e.path()));
        ConfigError::schema(pointer, e.into_inner())
    })
}

/// Parses a config whose relative model paths resolve against the working directory.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_in(text, Path::new("."))
}

/// Parses and validates a config; a string `model` is read as a JSON file
/// relative to `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError {
        kind: ConfigErrorKind::Syntax,
        pointer: String::new(),
        message: e.to_string(),
    })?;
    let Value::Object(mut root) = value else {
        return Err(ConfigError::schema("", "config must be a JSON object"));
    };
    let command: Command = typed(root.remove("command").ok_or_else(|| missing("command"))?, "/command")?;
    let model_value = root.remove("model").ok_or_else(|| missing("model"))?;
    let model = parse_model(model_value, command, base)?;
    let settings: Settings = typed(Value::Object(root), "")?;
    let config = RunConfig {
        command,
        model,
        settings,
    };
    validate(&config)?;
    Ok(config)
}

fn missing(field: &str) -> ConfigError {
    ConfigError::schema("", format!("missing field `{field}`"))
}

fn parse_model(value: Value, command: Command, base: &Path) -> Result<ModelSpec, ConfigError> {
    let value = match value {
        Value::String(path) => {
            let full = base.join(&path);
            let text = std::fs::read_to_string(&full).map_err(|e| ConfigError {
                kind: ConfigErrorKind::Io,
                pointer: "/model".into(),
                message: format!("cannot read {}: {e}", full.display()),
            })?;
            serde_json::from_str(&text).map_err(|e| ConfigError {
                kind: ConfigErrorKind::Syntax,
                pointer: "/model".into(),
                message: format!("{}: {e}", full.display()),
            })?
        }
        other => other,
    };
    let Value::Object(mut fields) = value else {
        return Err(ConfigError::schema("/model", "model must be an object or a file path"));
    };
    let declared = match fields.remove("kind") {
        Some(k) => Some(typed::<ModelKind>(k, "/model/kind")?),
        None => None,
    };
    let kind = match (declared, command.implied_kind()) {
        (Some(d), Some(i)) if d != i => {
            return Err(ConfigError::schema(
                "/model/kind",
                format!("command needs a {} model, got {}", i.name(), d.name()),
            ))
        }
        (Some(d), _) => d,
        (None, Some(i)) => i,
        (None, None) => infer_kind(&fields)?,
    };
    let value = Value::Object(fields);
    let spec = match kind {
        ModelKind::Discrete => ModelSpec::Discrete(typed(value, "/model")?),
        ModelKind::Classical => ModelSpec::Classical(typed(value, "/model")?),
        ModelKind::Andersen => ModelSpec::Andersen(typed(value, "/model")?),
    };
    let checked = match &spec {
        ModelSpec::Discrete(m) => m.validate(),
        ModelSpec::Classical(m) => m.validate(),
        ModelSpec::Andersen(m) => m.validate(),
    };
    checked.map_err(|e| ConfigError::schema("/model", e))?;
    Ok(spec)
}

fn infer_kind(fields: &Map<String, Value>) -> Result<ModelKind, ConfigError> {
    if fields.contains_key("pmfs") {
        Ok(ModelKind::Discrete)
    } else if fields.contains_key("interarrival") {
        Ok(ModelKind::Andersen)
    } else if fields.contains_key("lambda") {
        Ok(ModelKind::Classical)
    } else {
        Err(ConfigError::schema(
            "/model",
            "cannot tell the model kind; set `kind` to discrete, classical or andersen",
        ))
    }
}

fn validate(config: &RunConfig) -> Result<(), ConfigError> {
    let s = &config.settings;
    let positive = |x: f64, ptr: &str| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::schema(ptr, format!("must be positive and finite, got {x}")))
        }
    };
    positive(s.tolerance, "/tolerance")?;
    positive(s.grid_step, "/grid_step")?;
    if !(s.u_max >= 0.0 && s.u_max.is_finite()) {
        return Err(ConfigError::schema("/u_max", format!("must be nonnegative, got {}", s.u_max)));
    }
    if !(s.u >= 0.0 && s.u.is_finite()) {
        return Err(ConfigError::schema("/u", format!("must be nonnegative, got {}", s.u)));
    }
    if let Some(a) = s.threshold {
        positive(a, "/threshold")?;
    }
    s.mc.validate().map_err(|e| ConfigError::schema("/mc", e))?;
    for (i, &e) in s.epsilons.iter().enumerate() {
        positive(e, &format!("/epsilons/{i}"))?;
    }
    for (i, &u) in s.u_list.iter().enumerate() {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(ConfigError::schema(format!("/u_list/{i}"), format!("must be nonnegative, got {u}")));
        }
    }
    if s.n_list.is_empty() || s.n_list.contains(&0) {
        return Err(ConfigError::schema("/n_list", "needs at least one entry, all positive"));
    }
    if s.horizons.contains(&0) {
        return Err(ConfigError::schema("/horizons", "horizons must be positive"));
    }
    for (value, ptr) in [(s.ladder_horizon, "/ladder_horizon"), (s.dp_horizon, "/dp_horizon"), (s.max_states, "/max_states")] {
        if value == 0 {
            return Err(ConfigError::schema(ptr, "must be positive"));
        }
    }
    if !(0.0..=1.0).contains(&s.trend_threshold) {
        return Err(ConfigError::schema("/trend_threshold", "must lie in [0, 1]"));
    }
    if config.command == Command::SweepEpsilon && s.epsilons.is_empty() {
        return Err(ConfigError::schema("/epsilons", "sweep needs at least one epsilon"));
    }
    if let ModelSpec::Discrete(m) = &config.model {
        if s.u_max.fract() != 0.0 || s.u.fract() != 0.0 {
            return Err(ConfigError::schema("/u_max", "discrete surplus levels are integers"));
        }
        if s.season >= m.period() {
            return Err(ConfigError::schema(
                "/season",
                format!("season {} out of range for period {}", s.season, m.period()),
            ));
        }
    }
    Ok(())
}

/// Pretty JSON with every field written out; [`parse_config`] reads it back unchanged.
pub fn emit_config(config: &RunConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"command": "compute-discrete", "model": {"c": 1, "pmfs": [{"probs": {"0": 0.55, "2": 0.45}}]}}"#;

    #[test]
    fn minimal_discrete() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.command, Command::ComputeDiscrete);
        assert_eq!(cfg.model.kind(), ModelKind::Discrete);
        assert_eq!(cfg.settings, Settings::default());
    }

    #[test]
    fn negative_probability_pointer() {
        let text = r#"{"command": "compute-discrete",
            "model": {"c": 1, "pmfs": [{"probs": {"0": 1.2, "2": -0.2}}]}}"#;
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.pointer, "/model/pmfs/0/probs/2");
        assert_eq!(err.kind, ConfigErrorKind::Schema);
    }

    #[test]
    fn unknown_command_lists_choices() {
        let err = parse_config(r#"{"command": "frobnicate", "model": {"c": 1, "pmfs": []}}"#).unwrap_err();
        assert_eq!(err.pointer, "/command");
        for name in ["compute-discrete", "compute-classical", "compute-andersen", "sweep-epsilon", "simulate", "verify"] {
            assert!(err.message.contains(name), "{}", err.message);
        }
    }

    #[test]
    fn kind_inferred_and_checked() {
        let text = r#"{"command": "sweep-epsilon", "model": {"lambda": 1, "c": 1,
            "claim": {"family": "exponential", "params": {"mean": 1}}}}"#;
        assert_eq!(parse_config(text).unwrap().model.kind(), ModelKind::Classical);
        let clash = r#"{"command": "compute-discrete", "model": {"kind": "classical", "lambda": 1, "c": 1,
            "claim": {"family": "exponential", "params": {"mean": 1}}}}"#;
        assert_eq!(parse_config(clash).unwrap_err().pointer, "/model/kind");
    }

    #[test]
    fn unknown_field_and_bad_tolerance() {
        let text = MINIMAL.replace("\"command\"", "\"colour\": 1, \"command\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("colour"));
        let text = MINIMAL.replace("\"command\"", "\"tolerance\": 0, \"command\"");
        assert_eq!(parse_config(&text).unwrap_err().pointer, "/tolerance");
        let text = MINIMAL.replace("\"command\"", "\"mc\": {\"paths\": 10, \"horizon\": 5, \"seed\": \"x\"}, \"command\"");
        assert_eq!(parse_config(&text).unwrap_err().pointer, "/mc/seed");
    }

    #[test]
    fn model_from_file() {
        let dir = std::env::temp_dir().join(format!("ruin-lab-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("m.json"), r#"{"c": 1, "pmfs": [{"probs": {"0": 0.55, "2": 0.45}}]}"#).unwrap();
        let cfg = parse_config_in(r#"{"command": "compute-discrete", "model": "m.json"}"#, &dir).unwrap();
        assert_eq!(cfg, parse_config(MINIMAL).unwrap());
        let err = parse_config_in(r#"{"command": "compute-discrete", "model": "nope.json"}"#, &dir).unwrap_err();
        assert_eq!(err.kind, ConfigErrorKind::Io);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn emitted_config_round_trips() {
        let text = r#"{"command": "compute-andersen", "convention": "strict", "threshold": 0.7,
            "model": {"c": 1, "claim": {"family": "uniform", "params": {"low": 0, "high": 1.5}},
                      "interarrival": {"family": "exponential", "params": {"mean": 1}}},
            "mc": {"paths": 1000, "horizon": 50, "seed": 9, "chunks": 3},
            "output": {"format": "json", "path": "out.json"}}"#;
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&emit_config(&cfg)).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(emit_config(&cfg), emit_config(&again));
    }
}
