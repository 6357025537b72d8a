use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{default_buffer_delay, ModelConfig, ModelVariant};
use crate::stats::SequentialConfig;
use crate::streams::DEFAULT_ROOT_SEED;

/// How many replications to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunMode {
    Fixed(u64),
    Sequential(SequentialConfig),
}

impl RunMode {
    pub fn label(&self) -> String {
        match self {
            RunMode::Fixed(n) => format!("fixed:{n}"),
            RunMode::Sequential(_) => "sequential".into(),
        }
    }
}

/// The `--mode` / `experiment.mode` value before the sequential settings are
/// attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Fixed(u64),
    Sequential,
}

impl FromStr for ModeKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "sequential" {
            return Ok(ModeKind::Sequential);
        }
        let n = s
            .strip_prefix("fixed:")
            .and_then(|n| n.parse::<u64>().ok())
            .ok_or_else(|| ConfigError::invalid(format!("expected fixed:N or sequential, got `{s}`")))?;
        if n == 0 {
            return Err(ConfigError::invalid("fixed replication count must be >= 1"));
        }
        Ok(ModeKind::Fixed(n))
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub variant: ModelVariant,
    pub model: ModelConfig,
    pub mode: RunMode,
    pub root_seed: u64,
    pub output: Option<PathBuf>,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ExperimentSection {
    variant: ModelVariant,
    root_seed: u64,
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    workers: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            variant: ModelVariant::Base,
            root_seed: DEFAULT_ROOT_SEED,
            mode: "fixed:500".into(),
            output: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    sequential: SequentialConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelConfig>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::for_variant(ModelVariant::Base)
    }
}

impl ExperimentSpec {
    /// Defaults for `variant`: 500 fixed replications from the default seed.
    pub fn for_variant(variant: ModelVariant) -> Self {
        Self {
            variant,
            model: ModelConfig::for_variant(variant),
            mode: RunMode::Fixed(500),
            root_seed: DEFAULT_ROOT_SEED,
            output: None,
            workers: 1,
        }
    }

    /// Parses and validates experiment TOML. Errors carry the source line.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| {
            let err = ConfigError::invalid(e.message().trim_end());
            match e.span() {
                Some(span) => err.on_line(line_of(text, span.start)),
                None => err,
            }
        })?;
        Self::from_file(file).map_err(|e| match e.key.as_deref().and_then(|k| locate_key(text, k)) {
            Some(line) => e.on_line(line),
            None => e,
        })
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|source| crate::Error::ConfigFile { path: path.into(), source })
    }

    fn from_file(file: ExperimentFile) -> Result<Self, ConfigError> {
        let ExperimentFile { experiment, sequential, model } = file;
        let variant = experiment.variant;
        let model = model.unwrap_or_else(|| ModelConfig::for_variant(variant));
        let kind: ModeKind = experiment.mode.parse().map_err(|e: ConfigError| e.at("experiment.mode"))?;
        let spec = Self {
            variant,
            model,
            mode: match kind {
                ModeKind::Fixed(n) => RunMode::Fixed(n),
                ModeKind::Sequential => RunMode::Sequential(sequential),
            },
            root_seed: experiment.root_seed,
            output: experiment.output,
            workers: experiment.workers,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate(self.variant).map_err(|e| e.at("model"))?;
        if let RunMode::Sequential(seq) = &self.mode {
            seq.validate().map_err(|e| e.at("sequential"))?;
        }
        if self.workers == 0 {
            return Err(ConfigError::invalid("must be >= 1").at("experiment.workers"));
        }
        Ok(())
    }

    /// Switches variant, adding or dropping the buffer stage to match.
    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        if variant.has_buffer() && self.model.buffer_delay.is_none() {
            self.model.buffer_delay = Some(default_buffer_delay());
        }
        if !variant.has_buffer() {
            self.model.buffer_delay = None;
        }
        self.variant = variant;
        self
    }

    pub fn sequential_config(&self) -> Option<&SequentialConfig> {
        match &self.mode {
            RunMode::Sequential(c) => Some(c),
            RunMode::Fixed(_) => None,
        }
    }

    /// The resolved experiment as TOML; `from_toml` reads it back unchanged.
    pub fn to_toml(&self) -> String {
        let file = ExperimentFile {
            experiment: ExperimentSection {
                variant: self.variant,
                root_seed: self.root_seed,
                mode: self.mode.label(),
                output: self.output.clone(),
                workers: self.workers,
            },
            sequential: self.sequential_config().copied().unwrap_or_default(),
            model: Some(self.model.clone()),
        };
        toml::to_string(&file).expect("experiment spec serializes")
    }
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} seed={}", self.variant, self.mode.label(), self.root_seed)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Source line of a dotted key path such as `model.shifts.windows[1]`,
/// falling back to the deepest enclosing key that exists.
pub fn locate_key(text: &str, path: &str) -> Option<usize> {
    let root = toml::de::DeTable::parse(text).ok()?;
    let mut table = root.get_ref();
    let mut found: Option<usize> = None;
    for segment in path.split('.') {
        let (name, index) = match segment.split_once('[') {
            Some((name, rest)) => (name, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (segment, None),
        };
        let Some((key, value)) = table.iter().find(|(k, _)| k.get_ref().as_ref() == name) else {
            break;
        };
        found = Some(key.span().start);
        let mut value = value;
        if let Some(i) = index {
            match value.get_ref().as_array().and_then(|a| a.get(i)) {
                Some(item) => {
                    found = Some(item.span().start);
                    value = item;
                }
                None => break,
            }
        }
        match value.get_ref().as_table() {
            Some(t) => table = t,
            None => break,
        }
    }
    found.map(|offset| line_of(text, offset))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let spec = ExperimentSpec::from_toml("").unwrap();
        assert_eq!(spec, ExperimentSpec::default());
    }

    #[test]
    fn toml_round_trip() {
        let mut spec = ExperimentSpec::for_variant(ModelVariant::BufferedCrn);
        spec.mode = RunMode::Sequential(SequentialConfig::with_target(25.0));
        spec.root_seed = 99;
        spec.workers = 4;
        let text = spec.to_toml();
        assert_eq!(ExperimentSpec::from_toml(&text).unwrap(), spec);
    }

    #[test]
    fn syntax_errors_report_the_line() {
        let text = "[experiment]\nvariant = \"base\"\nroot_seed = \"abc\"\n";
        let err = ExperimentSpec::from_toml(text).unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = "[experiment]\nvariant = \"base\"\n\n[model]\npicking_point = 4\n";
        let err = ExperimentSpec::from_toml(text).unwrap_err();
        assert_eq!(err.line, Some(5));
    }

    #[test]
    fn semantic_errors_locate_the_key() {
        let text = "\
[experiment]
variant = \"base\"

[model.staffing]
skilled = 2
unskilled = 2
automated = 0
";
        let err = ExperimentSpec::from_toml(text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("model.staffing.automated"));
        assert_eq!(err.line, Some(7));
        assert!(err.to_string().starts_with("line 7: model.staffing.automated"));
    }

    #[test]
    fn missing_buffer_for_buffered_variant() {
        let text = "[experiment]\nvariant = \"buffered\"\n\n[model]\npicking_points = 4\n";
        let err = ExperimentSpec::from_toml(text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("model.buffer_delay"));
        assert_eq!(err.line, Some(4));
    }

    #[test]
    fn bad_mode_is_located() {
        let text = "[experiment]\nmode = \"fixed:zero\"\n";
        let err = ExperimentSpec::from_toml(text).unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!("fixed:10".parse::<ModeKind>().unwrap(), ModeKind::Fixed(10));
        assert!("fixed:0".parse::<ModeKind>().is_err());
    }

    #[test]
    fn variant_switch_adjusts_buffer() {
        let spec = ExperimentSpec::default().with_variant(ModelVariant::Buffered);
        assert!(spec.validate().is_ok());
        let back = spec.with_variant(ModelVariant::Base);
        assert!(back.model.buffer_delay.is_none());
        assert!(back.validate().is_ok());
    }
}
