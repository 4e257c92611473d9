use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sfhd_core::{KernelConfig, ModelParams, SimulationConfig, SpectralMeasure};

/// Contents of the `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub measure: SpectralMeasure,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Reads `path`, applies `overrides` (dotted path, raw value) and
    /// validates the result.
    pub fn load(path: &Path, overrides: &[Override]) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut doc: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for (key, raw) in overrides {
            set_path(&mut doc, key, parse_scalar(raw))?;
        }
        let cfg: RunConfig = serde_json::from_value(doc).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate().context("model")?;
        self.measure.validate().context("measure")?;
        self.kernel.validate().context("kernel")?;
        if let Some(sim) = &self.simulation {
            sim.validate().context("simulation")?;
        }
        Ok(())
    }

    /// Creates the output directory and checks that it accepts files.
    pub fn prepare_output(&self) -> Result<()> {
        fs::create_dir_all(&self.output_dir)
            .with_context(|| format!("creating {}", self.output_dir.display()))?;
        let probe = self.output_dir.join(".sfhd-write-test");
        fs::write(&probe, b"")
            .with_context(|| format!("{} is not writable", self.output_dir.display()))?;
        fs::remove_file(&probe).ok();
        Ok(())
    }
}

fn parse_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            bail!("malformed override path `{key}`");
        }
        let obj = match cur {
            Value::Object(map) => map,
            _ => bail!(
                "override `{key}`: `{}` is not a section",
                parts[..i].join(".")
            ),
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Dotted path and raw value of a `--a.b value` flag.
pub type Override = (String, String);

/// Splits `--a.b value` and `--a.b=value` pairs out of the argument list.
pub fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<Override>)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        if !flag.contains('.') || flag.starts_with(|c: char| c.is_ascii_digit()) {
            rest.push(arg);
            continue;
        }
        match flag.split_once('=') {
            Some((k, v)) => overrides.push((k.to_string(), v.to_string())),
            None => match it.next() {
                Some(v) => overrides.push((flag.to_string(), v)),
                None => bail!("override --{flag} needs a value"),
            },
        }
    }
    Ok((rest, overrides))
}
