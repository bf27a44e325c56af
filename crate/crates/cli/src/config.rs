//! Run configuration: a TOML file whose relative paths resolve against the
//! file's own directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hoiem::combined::CombinationMode;
use hoiem::host::{ClimateRequirement, Cutoff};
use hoiem::MissingPolicy;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub weights: WeightsSection,
    #[serde(default)]
    pub forecast: ForecastSection,
    pub stage1: Option<Stage1Section>,
    pub winter: Option<WinterSection>,
    pub summer: Option<SummerSection>,
    #[serde(default)]
    pub schemes: SchemesSection,
    #[serde(default)]
    pub sensitivity: SensitivitySection,
    #[serde(default)]
    pub rsm: RsmSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub hierarchy: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    /// CSV/TSV or `.json` decision matrix.
    pub matrix: Option<PathBuf>,
    pub delimiter: Option<char>,
    #[serde(default)]
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    #[serde(default)]
    pub mode: CombinationMode,
    pub features: Option<usize>,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastSection {
    pub pool: Option<PathBuf>,
    pub until: Option<i32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage1Section {
    pub pool: PathBuf,
    pub gdp_cutoff: Cutoff,
    pub sports_cutoff: Cutoff,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WinterSection {
    pub pool: Option<PathBuf>,
    #[serde(default = "default_until")]
    pub until: i32,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default)]
    pub requirement: ClimateRequirement,
    #[serde(default)]
    pub s_base: BTreeMap<String, f64>,
    /// Externally fixed S_evaluate per city; reported as such.
    #[serde(default)]
    pub s_evaluate: BTreeMap<String, f64>,
}

fn default_until() -> i32 {
    2050
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummerSection {
    pub medal_cutoff: Cutoff,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default = "default_finalists")]
    pub finalists: usize,
    pub s_base_default: Option<f64>,
    #[serde(default)]
    pub s_base: BTreeMap<String, f64>,
    pub swot: Option<PathBuf>,
}

fn default_finalists() -> usize {
    4
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemesSection {
    pub plans: Option<PathBuf>,
    /// Fixed feature group (ids with γ) rated by the plans; the computed
    /// selection is used when absent.
    pub selection: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_swaps")]
    pub n_swap: usize,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            n_swap: default_swaps(),
        }
    }
}

fn default_trials() -> usize {
    200
}

fn default_swaps() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsmSection {
    #[serde(default = "default_factors")]
    pub factors: Vec<String>,
    /// Relative half-width of the γ perturbation (0.5 = ±50 %).
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_centers")]
    pub center_replicates: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Alternative whose χ is the response; defaults to the first row.
    pub alternative: Option<String>,
}

impl Default for RsmSection {
    fn default() -> Self {
        Self {
            factors: default_factors(),
            delta: default_delta(),
            center_replicates: default_centers(),
            grid: default_grid(),
            alternative: None,
        }
    }
}

fn default_factors() -> Vec<String> {
    vec!["ξ1".into(), "ξ10".into()]
}

fn default_delta() -> f64 {
    0.5
}

fn default_centers() -> usize {
    3
}

fn default_grid() -> usize {
    25
}

/// A parsed config plus what every output header records about it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub sha256: String,
}

impl Loaded {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text =
            std::str::from_utf8(&bytes).map_err(|_| CliError::Config(format!("{}: not UTF-8", path.display())))?;
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        let loaded = Self {
            config,
            base_dir,
            sha256,
        };
        loaded.check_paths()?;
        Ok(loaded)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn referenced(&self) -> Vec<(&'static str, &PathBuf)> {
        let c = &self.config;
        [
            ("data.hierarchy", c.data.hierarchy.as_ref()),
            ("data.judgments", c.data.judgments.as_ref()),
            ("data.matrix", c.data.matrix.as_ref()),
            ("forecast.pool", c.forecast.pool.as_ref()),
            ("stage1.pool", c.stage1.as_ref().map(|s| &s.pool)),
            ("winter.pool", c.winter.as_ref().and_then(|w| w.pool.as_ref())),
            ("summer.swot", c.summer.as_ref().and_then(|s| s.swot.as_ref())),
            ("schemes.plans", c.schemes.plans.as_ref()),
            ("schemes.selection", c.schemes.selection.as_ref()),
        ]
        .into_iter()
        .filter_map(|(k, p)| p.map(|p| (k, p)))
        .collect()
    }

    /// Every referenced path must exist when the config is loaded.
    fn check_paths(&self) -> CliResult<()> {
        for (key, p) in self.referenced() {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(CliError::Config(format!("{key}: {} does not exist", full.display())));
            }
        }
        Ok(())
    }

    /// Read a referenced file, or report the missing key.
    pub fn read(&self, key: &str, p: Option<&PathBuf>) -> CliResult<(PathBuf, String)> {
        let p = p.ok_or_else(|| CliError::Config(format!("`{key}` is not set")))?;
        let full = self.resolve(p);
        let text =
            fs::read_to_string(&full).map_err(|e| CliError::Config(format!("{key}: {}: {e}", full.display())))?;
        Ok((full, text))
    }
}

/// Read a file named on the command line.
pub fn read_arg(key: &str, p: &Path) -> CliResult<(PathBuf, String)> {
    let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{key}: {}: {e}", p.display())))?;
    Ok((p.to_path_buf(), text))
}
