//! Run configuration: defaults, then the `key=value` file, then the
//! environment, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bernoulli_core::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(format!("unknown output format {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub settings: Settings,
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { settings: Settings::default(), seed: 0, threads: None, format: Format::Table }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

impl RunConfig {
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let s = &mut self.settings;
        match key {
            "precision_bits" => s.precision_bits = parse(key, value)?,
            "budget" => s.budget = parse(key, value)?,
            "degree_cap" => s.degree_cap = parse(key, value)?,
            "max_reduction_steps" => s.max_reduction_steps = parse(key, value)?,
            "guard" => s.guard = parse(key, value)?,
            "trace_cap" => s.trace_cap = parse(key, value)?,
            "cache_dir" => s.cache_dir = Some(PathBuf::from(value)),
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            "output_format" => self.format = parse(key, value)?,
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
            self.apply(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.settings.precision_bits < 64 {
            return Err("precision_bits must be at least 64".into());
        }
        if self.settings.budget < 1 << 10 {
            return Err("budget must be at least 1024".into());
        }
        if self.threads == Some(0) {
            return Err("threads must be positive".into());
        }
        Ok(())
    }
}
