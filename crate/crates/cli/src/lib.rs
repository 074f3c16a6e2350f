//! Batch front-end: JSON run configs in, CSV or JSON tables out.

pub mod config;
pub mod output;
pub mod run;

pub use config::{emit_config, parse_config, parse_config_in, Command, ConfigError, ModelSpec, RunConfig, Settings};
pub use run::{run, Check, CliError, Report};

/// Values given on the command line that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<u64>,
    pub chunks: Option<usize>,
    pub out: Option<String>,
    pub format: Option<config::OutputFormat>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        let s = &mut config.settings;
        if let Some(seed) = self.seed {
            s.mc.seed = seed;
        }
        if let Some(paths) = self.paths {
            s.mc.paths = paths;
        }
        if let Some(chunks) = self.chunks {
            s.mc.chunks = chunks;
        }
        if let Some(out) = &self.out {
            s.output.path = Some(out.clone());
        }
        if let Some(format) = self.format {
            s.output.format = format;
        }
    }
}
