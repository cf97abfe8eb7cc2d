use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conversion::ReadingParams;
use crate::divergence::QualityBand;
use crate::ecs::{self, SeriesPolicy};
use crate::growthfit::{FitPreset, RangeChoice};
use crate::loopsim::LoopParams;
use crate::sensitivity;
use crate::timeline;
use crate::{Error, Result};

fn default_exclusions() -> Vec<String> {
    vec![timeline::DEFAULT_EXCLUSION.to_string()]
}

fn default_resamples() -> usize {
    10_000
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_first_year() -> i32 {
    2017
}

fn default_last_year() -> i32 {
    2026
}

/// Full pipeline configuration. Input paths left unset use the bundled
/// reference data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub timeline_path: Option<PathBuf>,
    #[serde(default)]
    pub anchors_path: Option<PathBuf>,
    #[serde(default)]
    pub asserted_ecs_path: Option<PathBuf>,
    #[serde(default)]
    pub scenarios_path: Option<PathBuf>,
    #[serde(default = "default_exclusions")]
    pub exclusions: Vec<String>,
    #[serde(default = "default_preset")]
    pub fit_preset: FitPreset,
    #[serde(default)]
    pub range_choice: RangeChoice,
    #[serde(default)]
    pub ecs_policy: SeriesPolicy,
    #[serde(default)]
    pub qa_band: QualityBand,
    #[serde(default)]
    pub reading: ReadingParams,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_first_year")]
    pub first_year: i32,
    #[serde(default = "default_last_year")]
    pub last_year: i32,
    #[serde(default)]
    pub loop_sim: LoopConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_preset() -> FitPreset {
    FitPreset::YearlyFrontier
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

fn default_periods() -> usize {
    40
}

fn default_tolerance() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// Period at which the practice floor is raised; none runs the plain loop.
    #[serde(default)]
    pub intervene_at: Option<usize>,
    /// Practice floor applied by the intervention; defaults to the initial
    /// capacity.
    #[serde(default)]
    pub intervention_floor: Option<f64>,
    /// Classification tolerance in capacity units per period.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Overrides the illustrative couplings; growth defaults to the fitted
    /// rate when absent.
    #[serde(default)]
    pub params: Option<LoopParams>,
}

impl Default for LoopConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty loop config deserializes")
    }
}

impl RunConfig {
    /// Reads a JSON config; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_input(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [
            &mut cfg.timeline_path,
            &mut cfg.anchors_path,
            &mut cfg.asserted_ecs_path,
            &mut cfg.scenarios_path,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.bootstrap_resamples < crate::growthfit::MIN_RESAMPLES {
            return Err(Error::domain(format!(
                "bootstrap_resamples {} below {}",
                self.bootstrap_resamples,
                crate::growthfit::MIN_RESAMPLES
            )));
        }
        if self.first_year >= self.last_year {
            return Err(Error::domain("first_year must precede last_year"));
        }
        if self.loop_sim.periods == 0 {
            return Err(Error::domain("loop periods must be >= 1"));
        }
        Ok(())
    }
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

/// Raw text of every input plus where it came from.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub timeline: Source,
    pub anchors: Source,
    pub asserted: Source,
    pub scenarios: Source,
}

#[derive(Debug, Clone)]
pub struct Source {
    pub origin: String,
    pub text: String,
}

fn source(path: &Option<PathBuf>, bundled_name: &str, bundled: &str, stage: &'static str) -> Result<Source> {
    match path {
        Some(p) => Ok(Source {
            origin: p.display().to_string(),
            text: read_input(p).map_err(|e| e.in_stage(stage))?,
        }),
        None => Ok(Source {
            origin: format!("bundled:{bundled_name}"),
            text: bundled.to_string(),
        }),
    }
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            timeline: source(&cfg.timeline_path, "timeline.csv", timeline::BUNDLED_TIMELINE, "timeline")?,
            anchors: source(&cfg.anchors_path, "ecs_anchors.csv", ecs::BUNDLED_ANCHORS, "ecs")?,
            asserted: source(&cfg.asserted_ecs_path, "ecs_asserted.csv", ecs::BUNDLED_ASSERTED, "ecs")?,
            scenarios: source(&cfg.scenarios_path, "scenarios.json", sensitivity::BUNDLED_SCENARIOS, "sensitivity")?,
        })
    }
}

/// SHA-256 over the config (output directory cleared) and every input text.
pub fn config_hash(cfg: &RunConfig, inputs: &Inputs) -> String {
    let mut canonical = cfg.clone();
    canonical.output_dir = PathBuf::new();
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&canonical).expect("config serializes"));
    for s in [&inputs.timeline, &inputs.anchors, &inputs.asserted, &inputs.scenarios] {
        h.update([0u8]);
        h.update(s.text.as_bytes());
    }
    hex::encode(h.finalize())
}
