//! Bot/human classification flips and the Cyborg rule.
//!
//! A flip is a change of the daily bot/human label between two consecutive
//! *observed* days; calendar gaps are skipped. An agent is a Cyborg when it
//! flips at least `min_flips` times and the mean absolute score change across
//! those flips is at least `min_mean_delta`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ingest::Day;
pub use crate::scoring::BotLabel;
use crate::{CoreError, CoreResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentClass {
    Bot,
    Human,
    Cyborg,
}

impl AgentClass {
    pub const ALL: [AgentClass; 3] = [AgentClass::Bot, AgentClass::Cyborg, AgentClass::Human];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentClass::Bot => "bot",
            AgentClass::Human => "human",
            AgentClass::Cyborg => "cyborg",
        }
    }

    pub fn parse(s: &str) -> Option<AgentClass> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bot" => Some(AgentClass::Bot),
            "human" => Some(AgentClass::Human),
            "cyborg" => Some(AgentClass::Cyborg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub agent_id: String,
    pub observations: Vec<(Day, f64)>,
}

impl ScoreSeries {
    /// Builds a series, rejecting unordered days or probabilities outside
    /// `[0, 1]`.
    pub fn new(agent_id: impl Into<String>, observations: Vec<(Day, f64)>) -> CoreResult<Self> {
        let agent_id = agent_id.into();
        if observations.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(CoreError::InvalidSeries { agent: agent_id, reason: "days not strictly increasing" });
        }
        if observations.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            return Err(CoreError::InvalidSeries { agent: agent_id, reason: "probability outside [0, 1]" });
        }
        Ok(ScoreSeries { agent_id, observations })
    }

    /// Series on consecutive days starting at `start`.
    pub fn from_scores(agent_id: impl Into<String>, start: Day, scores: &[f64]) -> CoreResult<Self> {
        let obs = scores
            .iter()
            .enumerate()
            .map(|(i, &p)| (Day(start.0 + i as i32), p))
            .collect();
        ScoreSeries::new(agent_id, obs)
    }

    pub fn labels(&self, bot_threshold: f64) -> Vec<BotLabel> {
        self.observations.iter().map(|&(_, p)| label_of(p, bot_threshold)).collect()
    }
}

fn label_of(p: f64, bot_threshold: f64) -> BotLabel {
    if p >= bot_threshold {
        BotLabel::Bot
    } else {
        BotLabel::Human
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlipDirection {
    BotToHuman,
    HumanToBot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipEvent {
    pub from_day: Day,
    pub to_day: Day,
    pub direction: FlipDirection,
    pub abs_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipStats {
    pub agent_id: String,
    pub n_flips: u32,
    pub n_bot_to_human: u32,
    pub n_human_to_bot: u32,
    /// Zero when there are no flips.
    pub mean_abs_delta: f64,
    /// Population standard deviation of every observed probability.
    pub score_stddev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyborgThresholds {
    pub bot_threshold: f64,
    pub min_flips: u32,
    pub min_mean_delta: f64,
}

impl Default for CyborgThresholds {
    fn default() -> Self {
        CyborgThresholds { bot_threshold: 0.70, min_flips: 3, min_mean_delta: 0.10 }
    }
}

impl CyborgThresholds {
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.bot_threshold > 0.0 && self.bot_threshold < 1.0) {
            return Err(CoreError::OutOfRange { field: "bot_threshold", value: self.bot_threshold });
        }
        if !(self.min_mean_delta > 0.0 && self.min_mean_delta < 1.0) {
            return Err(CoreError::OutOfRange { field: "min_mean_delta", value: self.min_mean_delta });
        }
        if self.min_flips < 1 {
            return Err(CoreError::OutOfRange { field: "min_flips", value: self.min_flips as f64 });
        }
        Ok(())
    }
}

pub fn detect_flips(series: &ScoreSeries, bot_threshold: f64) -> Vec<FlipEvent> {
    series
        .observations
        .windows(2)
        .filter_map(|w| {
            let (d0, p0) = w[0];
            let (d1, p1) = w[1];
            let direction = match (label_of(p0, bot_threshold), label_of(p1, bot_threshold)) {
                (BotLabel::Bot, BotLabel::Human) => FlipDirection::BotToHuman,
                (BotLabel::Human, BotLabel::Bot) => FlipDirection::HumanToBot,
                _ => return None,
            };
            Some(FlipEvent { from_day: d0, to_day: d1, direction, abs_delta: libm::fabs(p1 - p0) })
        })
        .collect()
}

pub fn flip_stats(series: &ScoreSeries, events: &[FlipEvent]) -> FlipStats {
    let n_b2h = events.iter().filter(|e| e.direction == FlipDirection::BotToHuman).count() as u32;
    let n_flips = events.len() as u32;
    let mean_abs_delta = if events.is_empty() {
        0.0
    } else {
        events.iter().map(|e| e.abs_delta).sum::<f64>() / events.len() as f64
    };
    FlipStats {
        agent_id: series.agent_id.clone(),
        n_flips,
        n_bot_to_human: n_b2h,
        n_human_to_bot: n_flips - n_b2h,
        mean_abs_delta,
        score_stddev: population_stddev(series.observations.iter().map(|&(_, p)| p)),
    }
}

/// Welford's online update; agrees with the two-pass formula to rounding.
fn population_stddev(xs: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in xs {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    if n == 0 {
        0.0
    } else {
        libm::sqrt((m2 / n as f64).max(0.0))
    }
}

/// Cumulative share of flipping agents with at most `n` flips.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTable {
    /// Agents with at least one flip.
    pub population: usize,
    /// `(n, fraction with 1 <= flips <= n)` for `n = 1..=max`.
    pub rows: Vec<(u32, f64)>,
}

impl CumulativeTable {
    pub fn at(&self, n: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.0 == n).map(|r| r.1)
    }
}

pub fn flip_count_distribution(all_stats: &[FlipStats]) -> CoreResult<CumulativeTable> {
    if all_stats.is_empty() {
        return Err(CoreError::Empty("flip statistics"));
    }
    let max = all_stats.iter().map(|s| s.n_flips).max().unwrap_or(0);
    let mut counts = alloc::vec![0usize; max as usize + 1];
    for s in all_stats {
        counts[s.n_flips as usize] += 1;
    }
    let population: usize = counts[1..].iter().sum();
    let mut rows = Vec::with_capacity(max as usize);
    let mut running = 0usize;
    for (n, &c) in counts.iter().enumerate().skip(1) {
        running += c;
        rows.push((n as u32, running as f64 / population as f64));
    }
    Ok(CumulativeTable { population, rows })
}

pub const DELTA_BIN_WIDTH: f64 = 0.05;
const DELTA_BINS: usize = 20;

/// Histogram over `[0, 1]` in 0.05-wide bins; bin `k` is
/// `[k/20, (k+1)/20)` and the last bin also takes 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaHistogram {
    pub counts: Vec<usize>,
}

impl DeltaHistogram {
    pub fn bin_of(x: f64) -> usize {
        let x = x.clamp(0.0, 1.0);
        let mut k = (libm::floor(x * DELTA_BINS as f64) as usize).min(DELTA_BINS - 1);
        while k > 0 && x < k as f64 / DELTA_BINS as f64 {
            k -= 1;
        }
        while k + 1 < DELTA_BINS && x >= (k + 1) as f64 / DELTA_BINS as f64 {
            k += 1;
        }
        k
    }

    pub fn bin_range(k: usize) -> (f64, f64) {
        (k as f64 / DELTA_BINS as f64, (k + 1) as f64 / DELTA_BINS as f64)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Lowest-index bin with the maximum count.
    pub fn mode_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }
}

pub fn delta_distribution(all_stats: &[FlipStats]) -> CoreResult<DeltaHistogram> {
    if all_stats.is_empty() {
        return Err(CoreError::Empty("flip statistics"));
    }
    let mut counts = alloc::vec![0usize; DELTA_BINS];
    for s in all_stats {
        counts[DeltaHistogram::bin_of(s.mean_abs_delta)] += 1;
    }
    Ok(DeltaHistogram { counts })
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_percentile(percentile: f64) -> CoreResult<()> {
    if percentile > 0.0 && percentile < 100.0 {
        Ok(())
    } else {
        Err(CoreError::OutOfRange { field: "percentile", value: percentile })
    }
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn percentile_threshold(values: &[f64], percentile: f64) -> CoreResult<f64> {
    check_percentile(percentile)?;
    if values.is_empty() {
        return Err(CoreError::Empty("percentile input"));
    }
    let v = sorted(values);
    let rank = (libm::ceil(percentile / 100.0 * v.len() as f64) as usize).clamp(1, v.len());
    Ok(v[rank - 1])
}

/// Smallest observed value `t` such that the share of values `>= t` is at
/// most `1 - p/100`: the point where the top `(100 - p)` percent begins.
///
/// For integer-valued data this is one step above the nearest-rank
/// percentile whenever the percentile sits inside a tied block. When even
/// the maximum is shared by more than that share, the maximum is returned.
pub fn upper_tail_threshold(values: &[f64], percentile: f64) -> CoreResult<f64> {
    check_percentile(percentile)?;
    if values.is_empty() {
        return Err(CoreError::Empty("percentile input"));
    }
    let v = sorted(values);
    let n = v.len() as f64;
    let allowed = (100.0 - percentile) * n;
    let mut i = 0;
    while i < v.len() {
        if (v.len() - i) as f64 * 100.0 <= allowed {
            return Ok(v[i]);
        }
        let x = v[i];
        while i < v.len() && v[i] == x {
            i += 1;
        }
    }
    Ok(v[v.len() - 1])
}

/// Distribution tables and the thresholds chosen from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub percentile: f64,
    pub flip_table: CumulativeTable,
    pub delta_histogram: DeltaHistogram,
    /// Nearest-rank percentile of flip counts among flipping agents.
    pub flips_at_percentile: f64,
    /// Nearest-rank percentile of mean flip deltas among flipping agents.
    pub delta_at_percentile: f64,
    pub min_flips: u32,
    pub min_mean_delta: f64,
}

/// Chooses `min_flips` and `min_mean_delta` from the agents with at least
/// one flip. Both thresholds mark where the top `(100 - percentile)` percent
/// of that population begins ([`upper_tail_threshold`]).
pub fn calibrate(all_stats: &[FlipStats], percentile: f64) -> CoreResult<Calibration> {
    check_percentile(percentile)?;
    let flip_table = flip_count_distribution(all_stats)?;
    let flippers: Vec<&FlipStats> = all_stats.iter().filter(|s| s.n_flips > 0).collect();
    let counts: Vec<f64> = flippers.iter().map(|s| s.n_flips as f64).collect();
    let deltas: Vec<f64> = flippers.iter().map(|s| s.mean_abs_delta).collect();
    let flipper_stats: Vec<FlipStats> = flippers.iter().map(|s| (*s).clone()).collect();
    let delta_histogram = if flipper_stats.is_empty() {
        DeltaHistogram { counts: alloc::vec![0; DELTA_BINS] }
    } else {
        delta_distribution(&flipper_stats)?
    };
    Ok(Calibration {
        percentile,
        flip_table,
        delta_histogram,
        flips_at_percentile: percentile_threshold(&counts, percentile)?,
        delta_at_percentile: percentile_threshold(&deltas, percentile)?,
        min_flips: upper_tail_threshold(&counts, percentile)? as u32,
        min_mean_delta: upper_tail_threshold(&deltas, percentile)?,
    })
}

/// Cyborg if both flip criteria hold (inclusive); otherwise Bot when
/// strictly more than half the daily labels are Bot, else Human.
pub fn classify_agent(stats: &FlipStats, thresholds: &CyborgThresholds, daily_labels: &[BotLabel]) -> AgentClass {
    if stats.n_flips >= thresholds.min_flips && stats.mean_abs_delta >= thresholds.min_mean_delta {
        return AgentClass::Cyborg;
    }
    let bots = daily_labels.iter().filter(|&&l| l == BotLabel::Bot).count();
    if 2 * bots > daily_labels.len() {
        AgentClass::Bot
    } else {
        AgentClass::Human
    }
}

/// Everything derived from one agent's series.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentAnalysis {
    pub events: Vec<FlipEvent>,
    pub stats: FlipStats,
    pub class: AgentClass,
}

pub fn analyze(series: &ScoreSeries, thresholds: &CyborgThresholds) -> AgentAnalysis {
    let events = detect_flips(series, thresholds.bot_threshold);
    let stats = flip_stats(series, &events);
    let class = classify_agent(&stats, thresholds, &series.labels(thresholds.bot_threshold));
    AgentAnalysis { events, stats, class }
}
