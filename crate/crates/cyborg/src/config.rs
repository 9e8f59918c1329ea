//! Pipeline configuration.
//!
//! A TOML file with one section per stage. Every key has a default, and the
//! shipped `config/defaults.toml` spells all of them out.

use std::path::{Path, PathBuf};

use cyborg_core::scoring::DEFAULT_AUTOMATION_SOURCES;
use cyborg_core::CyborgThresholds;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::timefmt::parse_day;

pub const DEFAULTS_TOML: &str = include_str!("../config/defaults.toml");

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Archives, one per monthly collection. Only agents present in all of
    /// them are kept.
    pub paths: Vec<PathBuf>,
    /// CSV of `agent_id,suspended`, read by the cohort stage.
    pub suspensions: Option<PathBuf>,
    /// Ground truth to compare the classification against in the report.
    pub ground_truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub bot_threshold: f64,
    pub min_flips: u32,
    pub min_mean_delta: f64,
    pub percentile: f64,
    /// Classify with the thresholds chosen by `calibrate` instead of the
    /// two above.
    pub use_calibration: bool,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let t = CyborgThresholds::default();
        ThresholdConfig {
            bot_threshold: t.bot_threshold,
            min_flips: t.min_flips,
            min_mean_delta: t.min_mean_delta,
            percentile: 75.0,
            use_calibration: false,
        }
    }
}

impl ThresholdConfig {
    pub fn thresholds(&self) -> CyborgThresholds {
        CyborgThresholds {
            bot_threshold: self.bot_threshold,
            min_flips: self.min_flips,
            min_mean_delta: self.min_mean_delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    /// Weight file for the reference scorer; the shipped weights if unset.
    pub weights: Option<PathBuf>,
    /// Precomputed `agent_id,day,probability[,scorer_id]` CSV used instead
    /// of the reference scorer.
    pub external_scores: Option<PathBuf>,
    pub automation_sources: Vec<String>,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            weights: None,
            external_scores: None,
            automation_sources: DEFAULT_AUTOMATION_SOURCES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StanceConfig {
    /// `vaccine`, `elections`, or a path to a lexicon file.
    pub lexicon: String,
    pub max_iter: usize,
    pub tol: f64,
    pub neutral_band: f64,
}

impl Default for StanceConfig {
    fn default() -> Self {
        StanceConfig { lexicon: "vaccine".into(), max_iter: 100, tol: 1e-6, neutral_band: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsConfig {
    pub k: usize,
    pub iterations: usize,
    /// `50 / k` if unset.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub top_n: usize,
    /// Stop-word file, one word per line; the shipped list if unset.
    pub stopwords: Option<PathBuf>,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig { k: 5, iterations: 1000, alpha: None, beta: 0.01, top_n: 10, stopwords: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            eigen_tol: cyborg_core::network::EIGEN_TOL,
            eigen_max_iter: cyborg_core::network::EIGEN_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    /// `YYYY-MM-DD`; the day after the last post if unset.
    pub analysis_date: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthShape {
    Coronavirus,
    Elections,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub agents: usize,
    /// Which collection's flip-count distribution to follow.
    pub shape: SynthShape,
    pub degree_inflation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { agents: 5000, shape: SynthShape::Coronavirus, degree_inflation: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 42, jobs: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub output: OutputConfig,
    pub thresholds: ThresholdConfig,
    pub scoring: ScoringConfig,
    pub stance: StanceConfig,
    pub topics: TopicsConfig,
    pub network: NetworkConfig,
    pub cohort: CohortConfig,
    pub synth: SynthConfig,
    pub run: RunConfig,
}

fn check(ok: bool, field: &str, message: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(field, message()))
    }
}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::new(text);
        let config: PipelineConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CliError::config(if field == "." { "config".to_string() } else { field }, inner.message().trim().to_string())
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Range checks on every numeric field.
    pub fn validate(&self) -> CliResult<()> {
        let t = &self.thresholds;
        check(open_unit(t.bot_threshold), "thresholds.bot_threshold", || format!("{} not in (0, 1)", t.bot_threshold))?;
        check(t.min_flips >= 1, "thresholds.min_flips", || "must be at least 1".into())?;
        check(open_unit(t.min_mean_delta), "thresholds.min_mean_delta", || {
            format!("{} not in (0, 1)", t.min_mean_delta)
        })?;
        check(t.percentile > 0.0 && t.percentile < 100.0, "thresholds.percentile", || {
            format!("{} not in (0, 100)", t.percentile)
        })?;
        check(!self.scoring.automation_sources.iter().any(|s| s.trim().is_empty()), "scoring.automation_sources", || {
            "empty source name".into()
        })?;
        let s = &self.stance;
        check(!s.lexicon.trim().is_empty(), "stance.lexicon", || "empty lexicon".into())?;
        check(s.max_iter >= 1, "stance.max_iter", || "must be at least 1".into())?;
        check(positive(s.tol), "stance.tol", || format!("{} must be positive", s.tol))?;
        check((0.0..1.0).contains(&s.neutral_band), "stance.neutral_band", || {
            format!("{} not in [0, 1)", s.neutral_band)
        })?;
        let k = &self.topics;
        check(k.k >= 1, "topics.k", || "must be at least 1".into())?;
        check(k.iterations >= 1, "topics.iterations", || "must be at least 1".into())?;
        check(k.alpha.map_or(true, positive), "topics.alpha", || "must be positive".into())?;
        check(positive(k.beta), "topics.beta", || format!("{} must be positive", k.beta))?;
        check(k.top_n >= 1, "topics.top_n", || "must be at least 1".into())?;
        let n = &self.network;
        check(positive(n.eigen_tol), "network.eigen_tol", || format!("{} must be positive", n.eigen_tol))?;
        check(n.eigen_max_iter >= 1, "network.eigen_max_iter", || "must be at least 1".into())?;
        if let Some(d) = &self.cohort.analysis_date {
            check(parse_day(d).is_some(), "cohort.analysis_date", || format!("{d:?} is not YYYY-MM-DD"))?;
        }
        let y = &self.synth;
        check(y.agents >= 2, "synth.agents", || "need at least 2 agents".into())?;
        check(positive(y.degree_inflation), "synth.degree_inflation", || {
            format!("{} must be positive", y.degree_inflation)
        })?;
        check(!self.output.dir.as_os_str().is_empty(), "output.dir", || "empty path".into())?;
        Ok(())
    }
}
