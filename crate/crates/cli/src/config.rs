use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fbmwalk::walk::past_horizon_for_tolerance;
use fbmwalk::{make_grid, GridSpec, HurstIndex, PathForm};

pub const DEFAULT_N: u64 = 256;
pub const DEFAULT_HORIZON: f64 = 1.0;
pub const DEFAULT_PATHS: u64 = 1;
pub const AUTO_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_NS: [u64; 4] = [16, 64, 256, 1024];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PastSteps {
    #[default]
    Auto,
    Steps(u64),
}

impl FromStr for PastSteps {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(PastSteps::Auto);
        }
        s.parse::<u64>()
            .map(PastSteps::Steps)
            .map_err(|_| format!("past steps must be a positive integer or \"auto\", got {s:?}"))
    }
}

impl fmt::Display for PastSteps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PastSteps::Auto => f.write_str("auto"),
            PastSteps::Steps(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
pub enum Scale {
    #[default]
    #[serde(rename = "raw")]
    Raw,
    #[value(name = "c_H", alias = "c_h")]
    #[serde(rename = "c_H", alias = "c_h")]
    CH,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Raw => "raw",
            Scale::CH => "c_H",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    Incremental,
    Fast,
    Coefficient,
    Kernel,
}

impl From<FormArg> for PathForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Incremental => PathForm::Incremental,
            FormArg::Fast => PathForm::Fast,
            FormArg::Coefficient => PathForm::Coefficient,
            FormArg::Kernel => PathForm::Kernel,
        }
    }
}

/// Flags shared by every subcommand; unset flags fall back to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Hurst index in (0, 1)
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Grid points per unit time
    #[arg(long)]
    pub n: Option<u64>,
    /// Last simulated time, a multiple of 1/n
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Truncated past in steps, or "auto"
    #[arg(long, value_name = "STEPS|auto")]
    pub past_steps: Option<PastSteps>,
    /// Number of paths (seeds)
    #[arg(long)]
    pub paths: Option<u64>,
    /// First seed; path i uses seed + i
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Walk evaluation used for generated paths
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    /// TOML file with defaults for any of these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub hurst: Option<f64>,
    pub n: Option<u64>,
    pub horizon: Option<f64>,
    pub past_steps: Option<PastStepsValue>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub scale: Option<Scale>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub form: Option<FormArg>,
    pub ns: Option<Vec<u64>>,
}

/// `past_steps = 4096` or `past_steps = "auto"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PastStepsValue {
    Steps(u64),
    Text(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub hurst: HurstIndex,
    pub n: u64,
    pub horizon: f64,
    pub past_steps: PastSteps,
    pub paths: u64,
    pub seed: u64,
    pub scale: Scale,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub form: PathForm,
    pub ns: Vec<u64>,
}

impl RunConfig {
    /// Flags win over the file, the file over the defaults.
    pub fn resolve(args: &CommonArgs, ns: Option<Vec<u64>>) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let past_steps = match (args.past_steps, file.past_steps) {
            (Some(p), _) => p,
            (None, Some(PastStepsValue::Steps(m))) => PastSteps::Steps(m),
            (None, Some(PastStepsValue::Text(s))) => s.parse().map_err(anyhow::Error::msg)?,
            (None, None) => PastSteps::Auto,
        };
        let Some(h) = args.hurst.or(file.hurst) else {
            bail!("--hurst is required (0 < H < 1)");
        };
        let hurst = HurstIndex::new(h).map_err(|e| anyhow::anyhow!("--hurst: {e}"))?;
        let config = Self {
            hurst,
            n: args.n.or(file.n).unwrap_or(DEFAULT_N),
            horizon: args.horizon.or(file.horizon).unwrap_or(DEFAULT_HORIZON),
            past_steps,
            paths: args.paths.or(file.paths).unwrap_or(DEFAULT_PATHS),
            seed: args.seed.or(file.seed).unwrap_or(0),
            scale: args.scale.or(file.scale).unwrap_or_default(),
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format).unwrap_or_default(),
            form: args.form.or(file.form).map(PathForm::from).unwrap_or_default(),
            ns: ns.or(file.ns).unwrap_or_else(|| DEFAULT_NS.to_vec()),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.n == 0 {
            bail!("--n must be at least 1");
        }
        if self.paths == 0 {
            bail!("--paths must be at least 1");
        }
        if self.past_steps == PastSteps::Steps(0) {
            bail!("--past-steps must be at least 1");
        }
        if self.seed.checked_add(self.paths - 1).is_none() {
            bail!("--seed + --paths overflows the seed range");
        }
        self.grid()?;
        Ok(())
    }

    pub fn past_steps(&self) -> anyhow::Result<u64> {
        match self.past_steps {
            PastSteps::Steps(m) => Ok(m),
            PastSteps::Auto => past_horizon_for_tolerance(self.hurst, self.n, self.horizon, AUTO_TOLERANCE)
                .map_err(|e| anyhow::anyhow!("--past-steps auto: {e}")),
        }
    }

    pub fn grid(&self) -> anyhow::Result<GridSpec> {
        make_grid(self.n, self.horizon, self.past_steps()?).map_err(|e| anyhow::anyhow!("grid: {e}"))
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.paths).map(|i| self.seed + i).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(h: f64) -> CommonArgs {
        CommonArgs {
            hurst: Some(h),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_fill_unset_values() {
        let c = RunConfig::resolve(&args(0.3), None).unwrap();
        assert_eq!((c.n, c.horizon, c.paths, c.seed), (256, 1.0, 1, 0));
        assert_eq!(c.past_steps, PastSteps::Auto);
        assert_eq!(c.scale, Scale::Raw);
        assert_eq!(c.ns, DEFAULT_NS);
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join(format!("fbmwalk-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "hurst = 0.7\nn = 32\npast_steps = 100\nscale = \"c_H\"\n").unwrap();
        let mut a = CommonArgs {
            n: Some(8),
            config: Some(path.clone()),
            ..Default::default()
        };
        let c = RunConfig::resolve(&a, None).unwrap();
        assert_eq!(c.hurst.value(), 0.7);
        assert_eq!(c.n, 8);
        assert_eq!(c.past_steps, PastSteps::Steps(100));
        assert_eq!(c.scale, Scale::CH);
        a.past_steps = Some(PastSteps::Auto);
        assert_eq!(RunConfig::resolve(&a, None).unwrap().past_steps, PastSteps::Auto);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn invalid_values_name_the_constraint() {
        let e = RunConfig::resolve(&args(1.0), None).unwrap_err().to_string();
        assert!(e.contains("--hurst"), "{e}");
        let mut a = args(0.3);
        a.n = Some(0);
        assert!(RunConfig::resolve(&a, None).unwrap_err().to_string().contains("--n"));
        let mut a = args(0.3);
        a.horizon = Some(0.3);
        a.n = Some(4);
        assert!(RunConfig::resolve(&a, None).is_err());
        assert!("12x".parse::<PastSteps>().is_err());
        assert_eq!("AUTO".parse::<PastSteps>().unwrap(), PastSteps::Auto);
    }
}
