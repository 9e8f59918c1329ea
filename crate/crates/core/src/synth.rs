//! Seeded synthetic populations with recorded ground truth.
//!
//! Scores live on a 0.001 grid. A day's score is `threshold + offset` with
//! `|offset| >= 5` grid units, so labels are never ambiguous. The two days on
//! either side of every flip sit at `+-t/2` for the agent's flip size `t`,
//! which makes every flip delta exactly `t` grid units.
//!
//! Posts are built backwards from the target scores: for each agent-day a
//! posting template (post count, automated posts, retweets, hashtags) is
//! chosen and the inter-post gap, status count and first-post time are solved
//! so that the reference scorer returns the target score to within 1e-9.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::flips::{AgentClass, CyborgThresholds, ScoreSeries};
use crate::ingest::{DailyWindow, Day, PostRecord, ProfileSnapshot, Timestamp, SECONDS_PER_DAY};
use crate::rng::{derive_seed, Rng};
use crate::scoring::{extract_features, AutomationSources, FeatureVector, ReferenceScorer, ScorerContract};
use crate::stance::StanceLabel;
use crate::{CoreError, CoreResult};

/// Grid units per unit of score.
pub const SCORE_SCALE: i32 = 1000;
/// Lowest and highest score the generator emits, in grid units.
pub const SCORE_FLOOR: i32 = 50;
pub const SCORE_CEIL: i32 = 950;
/// Minimum distance from the bot threshold, in grid units.
pub const MIN_OFFSET: i32 = 5;
const INTERIOR_OFFSET: i32 = 20;
/// Distance kept between generated flip sizes and `min_mean_delta`.
pub const DELTA_MARGIN: u32 = 4;
/// Largest mean score error tolerated when realizing posts.
pub const REALIZE_TOLERANCE: f64 = 1e-7;

pub const PRO_TAGS: [&str; 8] = [
    "vaccineswork",
    "sharethevaccine",
    "protectvaccineprogress",
    "getvaccine",
    "vaccinesaresafe",
    "igotvaccinated",
    "vaccinesaves",
    "getthevaccine",
];
pub const ANTI_TAGS: [&str; 8] = [
    "novaccines",
    "saynotovaccine",
    "vaccineskill",
    "stopvaccine",
    "antivaccine",
    "novaccine",
    "vaccinesharm",
    "forcedvaccines",
];
pub const NEUTRAL_TAGS: [&str; 6] = ["covid19", "coronavirus", "pandemic", "news", "health", "stayhome"];

const THEMES: [[&str; 12]; 5] = [
    ["mask", "hospital", "doctors", "nurses", "cases", "testing", "symptoms", "quarantine", "lockdown", "patients", "clinic", "outbreak"],
    ["vaccine", "trial", "dose", "pfizer", "moderna", "immunity", "science", "research", "approval", "efficacy", "booster", "antibodies"],
    ["election", "vote", "president", "senate", "congress", "ballot", "campaign", "debate", "policy", "governor", "democracy", "candidate"],
    ["economy", "jobs", "market", "stocks", "business", "unemployment", "stimulus", "workers", "money", "rent", "prices", "taxes"],
    ["truth", "media", "hoax", "freedom", "control", "agenda", "lies", "rights", "mandate", "censorship", "plandemic", "microchip"],
];

const MANUAL_SOURCES: [&str; 3] = ["Twitter Web App", "Twitter for iPhone", "Twitter for Android"];
const AUTOMATED_SOURCES: [&str; 2] = ["IFTTT", "TweetDeck"];

/// Flip sizes drawn uniformly from the even grid values in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBand {
    pub lo_milli: u32,
    pub hi_milli: u32,
    pub weight: f64,
}

impl DeltaBand {
    pub const fn new(lo_milli: u32, hi_milli: u32, weight: f64) -> Self {
        DeltaBand { lo_milli, hi_milli, weight }
    }

    fn even_bounds(&self) -> (u32, u32) {
        (self.lo_milli.div_ceil(2) * 2, self.hi_milli / 2 * 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    pub n_agents: usize,
    /// Weight of each flip count, indexed by count.
    pub flip_weights: Vec<f64>,
    /// Flip-size distribution. Non-Cyborg agents with at least `min_flips`
    /// flips only draw from bands that end below `min_mean_delta`.
    pub delta_bands: Vec<DeltaBand>,
    pub suspension_rate: f64,
    pub lifespan_mean_days: f64,
    pub lifespan_sd_days: f64,
    pub followers_median: f64,
    pub friends_median: f64,
    pub verified_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub bot: ClassSpec,
    pub cyborg: ClassSpec,
    pub human: ClassSpec,
    pub start_day: Day,
    /// Window length in days.
    pub days: u32,
    /// Inclusive range of observed days per agent, raised to `flips + 1`
    /// when needed.
    pub active_days: (u32, u32),
    pub thresholds: CyborgThresholds,
    /// Interaction weight of a Cyborg relative to everyone else.
    pub degree_inflation: f64,
    /// Mean mentions an agent of weight 1 sends over the window.
    pub mentions_per_agent: f64,
    /// Pro, anti and neutral shares.
    pub stance_mix: [f64; 3],
    pub seed: u64,
}

/// Cumulative share of flipping agents at 1, 2, 3, 4 flips for the
/// coronavirus collection.
pub const CORONAVIRUS_FLIP_TARGETS: [f64; 4] = [0.4968, 0.7576, 0.8414, 0.9056];
/// Same for the US elections collection.
pub const ELECTIONS_FLIP_TARGETS: [f64; 4] = [0.4439, 0.6998, 0.7864, 0.8618];

/// Share of flipping agents with 5..=10 flips, as fractions of the tail
/// beyond 4.
const TAIL_SHAPE: [f64; 6] = [0.30, 0.22, 0.17, 0.13, 0.10, 0.08];

impl PopulationSpec {
    /// A population shaped after the coronavirus collection: cumulative
    /// flip shares from [`CORONAVIRUS_FLIP_TARGETS`], a flip-size mode in
    /// `[0.05, 0.10)` with about a quarter of flipping agents at or above
    /// 0.10, suspension shares of 89.2, 56.0 and 19.5 percent for Bots,
    /// Cyborgs and Humans, and Cyborgs with three times the interaction
    /// weight.
    pub fn coronavirus_shaped(n_agents: usize, seed: u64) -> Self {
        Self::from_flip_targets(n_agents, CORONAVIRUS_FLIP_TARGETS, seed)
    }

    pub fn from_flip_targets(n_agents: usize, cumulative: [f64; 4], seed: u64) -> Self {
        let zero_share = 0.4;
        let cyborg_share_of_eligible = 0.6;
        let high_delta_share = 0.138;

        let mut flippers = vec![0.0; 11];
        let mut prev = 0.0;
        for (i, &c) in cumulative.iter().enumerate() {
            flippers[i + 1] = c - prev;
            prev = c;
        }
        for (i, s) in TAIL_SHAPE.iter().enumerate() {
            flippers[5 + i] = (1.0 - prev) * s;
        }

        let eligible: f64 = flippers[3..].iter().sum();
        let cyborg_frac = (1.0 - zero_share) * cyborg_share_of_eligible * eligible;
        let n_cyborg = libm::round(n_agents as f64 * cyborg_frac) as usize;
        let n_bot = libm::round((n_agents - n_cyborg) as f64 * 0.4) as usize;
        let n_human = n_agents - n_cyborg - n_bot;

        let cyborg_flips: Vec<f64> = flippers.iter().enumerate().map(|(n, &f)| if n >= 3 { f } else { 0.0 }).collect();
        let non_cyborg_flips: Vec<f64> = flippers
            .iter()
            .enumerate()
            .map(|(n, &f)| match n {
                0 => zero_share,
                1 | 2 => (1.0 - zero_share) * f,
                _ => (1.0 - zero_share) * (1.0 - cyborg_share_of_eligible) * f,
            })
            .collect();
        let low_bands = vec![
            DeltaBand::new(10, 48, 0.3 * (1.0 - high_delta_share)),
            DeltaBand::new(50, 96, 0.7 * (1.0 - high_delta_share)),
            DeltaBand::new(104, 300, high_delta_share),
        ];
        let non_cyborg = |n_agents, suspension_rate, mean, sd, verified_rate| ClassSpec {
            n_agents,
            flip_weights: non_cyborg_flips.clone(),
            delta_bands: low_bands.clone(),
            suspension_rate,
            lifespan_mean_days: mean,
            lifespan_sd_days: sd,
            followers_median: 300.0,
            friends_median: 300.0,
            verified_rate,
        };
        PopulationSpec {
            bot: non_cyborg(n_bot, 0.892, 2751.0, 1226.0, 0.02),
            cyborg: ClassSpec {
                n_agents: n_cyborg,
                flip_weights: cyborg_flips,
                delta_bands: vec![DeltaBand::new(104, 240, 1.0)],
                suspension_rate: 0.560,
                lifespan_mean_days: 3663.0,
                lifespan_sd_days: 1141.0,
                followers_median: 900.0,
                friends_median: 800.0,
                verified_rate: 0.0,
            },
            human: non_cyborg(n_human, 0.195, 2901.0, 1294.0, 0.08),
            start_day: Day(18414),
            days: 30,
            active_days: (3, 10),
            thresholds: CyborgThresholds::default(),
            degree_inflation: 3.0,
            mentions_per_agent: 2.0,
            stance_mix: [0.4, 0.4, 0.2],
            seed,
        }
    }

    pub fn class(&self, class: AgentClass) -> &ClassSpec {
        match class {
            AgentClass::Bot => &self.bot,
            AgentClass::Cyborg => &self.cyborg,
            AgentClass::Human => &self.human,
        }
    }

    pub fn class_mut(&mut self, class: AgentClass) -> &mut ClassSpec {
        match class {
            AgentClass::Bot => &mut self.bot,
            AgentClass::Cyborg => &mut self.cyborg,
            AgentClass::Human => &mut self.human,
        }
    }

    pub fn total_agents(&self) -> usize {
        self.bot.n_agents + self.cyborg.n_agents + self.human.n_agents
    }

    /// Day after the window, at midnight.
    pub fn analysis_date(&self) -> Timestamp {
        Day(self.start_day.0 + self.days as i32).start()
    }

    pub fn validate(&self) -> CoreResult<()> {
        let bad = |what: String| Err(CoreError::Infeasible(what));
        self.thresholds.validate()?;
        let grid = Grid::new(&self.thresholds)?;
        if self.days < 2 {
            return bad(format!("window of {} days is too short", self.days));
        }
        let (lo, hi) = self.active_days;
        if lo < 1 || lo > hi || hi > self.days {
            return bad(format!("active days {lo}..={hi} outside 1..={}", self.days));
        }
        if !(self.degree_inflation.is_finite() && self.degree_inflation > 0.0) {
            return Err(CoreError::OutOfRange { field: "degree_inflation", value: self.degree_inflation });
        }
        if !(self.mentions_per_agent.is_finite() && self.mentions_per_agent >= 0.0) {
            return Err(CoreError::OutOfRange { field: "mentions_per_agent", value: self.mentions_per_agent });
        }
        check_weights("stance_mix", &self.stance_mix)?;
        for class in AgentClass::ALL {
            let spec = self.class(class);
            let name = class.as_str();
            for (field, p) in [("suspension_rate", spec.suspension_rate), ("verified_rate", spec.verified_rate)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CoreError::OutOfRange { field, value: p });
                }
            }
            for (field, v) in [
                ("lifespan_mean_days", spec.lifespan_mean_days),
                ("lifespan_sd_days", spec.lifespan_sd_days),
                ("followers_median", spec.followers_median),
                ("friends_median", spec.friends_median),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CoreError::OutOfRange { field, value: v });
                }
            }
            if spec.n_agents == 0 {
                continue;
            }
            check_weights("flip_weights", &spec.flip_weights)?;
            let max_flips = spec.flip_weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            if min_days(class, max_flips as u32) > self.days as usize {
                return bad(format!("{name}: {max_flips} flips need more than {} days", self.days));
            }
            let flips_at_least = |k: usize| spec.flip_weights.iter().skip(k).any(|&w| w > 0.0);
            let min_flips = self.thresholds.min_flips as usize;
            for band in &spec.delta_bands {
                let (lo, hi) = band.even_bounds();
                if !(band.weight >= 0.0) || lo > hi || lo < grid.min_delta() || hi > grid.max_delta() {
                    return bad(format!(
                        "{name}: delta band {}..={} must hold even values within {}..={}",
                        band.lo_milli,
                        band.hi_milli,
                        grid.min_delta(),
                        grid.max_delta()
                    ));
                }
            }
            if flips_at_least(1) {
                let weights: Vec<f64> = spec.delta_bands.iter().map(|b| b.weight).collect();
                check_weights("delta_bands", &weights)?;
            }
            if class == AgentClass::Cyborg {
                if spec.flip_weights.iter().take(min_flips).any(|&w| w > 0.0) {
                    return bad(format!("cyborg flip weights below {min_flips} flips must be zero"));
                }
                if spec.delta_bands.iter().any(|b| b.weight > 0.0 && b.even_bounds().0 < grid.cyborg_delta_floor) {
                    return bad(format!("cyborg delta bands must start at {} or above", grid.cyborg_delta_floor));
                }
            } else if flips_at_least(min_flips) && restricted_bands(&spec.delta_bands, &grid).is_empty() {
                return bad(format!("{name}: no delta band below {} for agents with many flips", grid.non_cyborg_delta_ceil));
            }
        }
        Ok(())
    }
}

fn check_weights(field: &'static str, weights: &[f64]) -> CoreResult<()> {
    if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(CoreError::OutOfRange { field, value: w });
    }
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0) {
        return Err(CoreError::OutOfRange { field, value: sum });
    }
    Ok(())
}

fn restricted_bands(bands: &[DeltaBand], grid: &Grid) -> Vec<DeltaBand> {
    bands
        .iter()
        .filter(|b| b.weight > 0.0)
        .filter_map(|b| {
            let (lo, hi) = b.even_bounds();
            let hi = hi.min(grid.non_cyborg_delta_ceil);
            (lo <= hi).then_some(DeltaBand { lo_milli: lo, hi_milli: hi, weight: b.weight })
        })
        .collect()
}

/// Threshold-dependent limits on the score grid.
#[derive(Debug, Clone, Copy)]
struct Grid {
    threshold: i32,
    bot_room: i32,
    human_room: i32,
    cyborg_delta_floor: u32,
    non_cyborg_delta_ceil: u32,
}

impl Grid {
    fn new(thresholds: &CyborgThresholds) -> CoreResult<Self> {
        let on_grid = |x: f64, field: &'static str| -> CoreResult<i32> {
            let scaled = x * SCORE_SCALE as f64;
            let r = libm::round(scaled);
            if libm::fabs(scaled - r) > 1e-6 {
                return Err(CoreError::Infeasible(format!("{field} {x} is not on the 0.001 grid")));
            }
            Ok(r as i32)
        };
        let threshold = on_grid(thresholds.bot_threshold, "bot_threshold")?;
        let min_delta = on_grid(thresholds.min_mean_delta, "min_mean_delta")?;
        let bot_room = SCORE_CEIL - threshold;
        let human_room = threshold - SCORE_FLOOR;
        if bot_room < INTERIOR_OFFSET || human_room < INTERIOR_OFFSET {
            return Err(CoreError::Infeasible(format!("bot_threshold {} leaves no room on the grid", thresholds.bot_threshold)));
        }
        Ok(Grid {
            threshold,
            bot_room,
            human_room,
            cyborg_delta_floor: (min_delta as u32 + DELTA_MARGIN).div_ceil(2) * 2,
            non_cyborg_delta_ceil: (min_delta as u32).saturating_sub(DELTA_MARGIN) / 2 * 2,
        })
    }

    fn min_delta(&self) -> u32 {
        2 * MIN_OFFSET as u32
    }

    fn max_delta(&self) -> u32 {
        2 * self.bot_room.min(self.human_room) as u32
    }
}

/// Largest-remainder apportionment of `total` in proportion to `weights`;
/// remainder ties go to the lower index.
pub fn quotas(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if total == 0 || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| libm::floor(*e) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - counts[a] as f64;
        let fb = exact[b] - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// What to generate for one agent's series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPlan {
    pub class: AgentClass,
    pub n_flips: u32,
    /// Size of every flip, in grid units. Ignored when `n_flips` is 0.
    pub flip_delta_milli: u32,
    /// Observed days, strictly increasing.
    pub days: Vec<Day>,
    pub thresholds: CyborgThresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSeries {
    pub series: ScoreSeries,
    /// Grid offsets from the bot threshold, one per observed day.
    pub offsets: Vec<i32>,
    pub true_flips: u32,
    pub true_deltas: Vec<f64>,
}

impl GeneratedSeries {
    pub fn true_mean_delta(&self) -> f64 {
        if self.true_deltas.is_empty() {
            0.0
        } else {
            self.true_deltas.iter().sum::<f64>() / self.true_deltas.len() as f64
        }
    }
}

/// Sizes of `parts` runs, each at least 1, summing to `total`.
fn composition(total: usize, parts: usize, rng: &mut Rng) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let cuts = rng.sample_indices(total - 1, parts - 1);
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        sizes.push(c + 1 - prev);
        prev = c + 1;
    }
    sizes.push(total - prev);
    sizes
}

/// Builds a series with exactly `plan.n_flips` label changes, every one of
/// size `plan.flip_delta_milli`, and a day-label majority that agrees with
/// `plan.class` for non-Cyborgs.
pub fn gen_score_series(agent_id: &str, plan: &SeriesPlan, rng: &mut Rng) -> CoreResult<GeneratedSeries> {
    let grid = Grid::new(&plan.thresholds)?;
    let k = plan.days.len();
    let n = plan.n_flips as usize;
    let infeasible = |why: String| Err(CoreError::Infeasible(format!("agent {agent_id}: {why}")));
    if k == 0 {
        return infeasible("no observed days".to_string());
    }
    if n + 1 > k {
        return infeasible(format!("{n} flips need at least {} observed days, got {k}", n + 1));
    }
    let t = plan.flip_delta_milli;
    if n > 0 {
        if t % 2 == 1 || t < grid.min_delta() || t > grid.max_delta() {
            return infeasible(format!("flip size {t} must be even within {}..={}", grid.min_delta(), grid.max_delta()));
        }
        let cyborg_like = plan.n_flips >= plan.thresholds.min_flips && t >= grid.cyborg_delta_floor;
        let ambiguous = plan.n_flips >= plan.thresholds.min_flips
            && t > grid.non_cyborg_delta_ceil
            && t < grid.cyborg_delta_floor;
        if ambiguous {
            return infeasible(format!("flip size {t} is too close to min_mean_delta"));
        }
        if (plan.class == AgentClass::Cyborg) != cyborg_like {
            return infeasible(format!("{n} flips of size {t} do not make a {}", plan.class.as_str()));
        }
    } else if plan.class == AgentClass::Cyborg {
        return infeasible("a cyborg needs flips".to_string());
    }

    // Runs alternate sides starting from `start`; `bot_days` is the total
    // length of the bot-side runs.
    let runs = n + 1;
    let bot_days_range = |start_bot: bool| -> Option<(usize, usize)> {
        let bot_runs = if start_bot { runs.div_ceil(2) } else { runs / 2 };
        let human_runs = runs - bot_runs;
        let mut lo = if human_runs == 0 { k } else { bot_runs };
        let mut hi = if bot_runs == 0 { 0 } else { k - human_runs };
        match plan.class {
            AgentClass::Bot => lo = lo.max(k / 2 + 1),
            AgentClass::Human => hi = hi.min(k / 2),
            AgentClass::Cyborg => {}
        }
        (lo <= hi).then_some((lo, hi))
    };
    let first = rng.bernoulli(0.5);
    let (start_bot, (lo, hi)) = match bot_days_range(first) {
        Some(r) => (first, r),
        None => match bot_days_range(!first) {
            Some(r) => (!first, r),
            None => return infeasible(format!("no {} majority fits {n} flips over {k} days", plan.class.as_str())),
        },
    };
    let bot_days = rng.range_inclusive(lo as i64, hi as i64) as usize;
    let bot_runs = if start_bot { runs.div_ceil(2) } else { runs / 2 };
    let mut bot_sizes = composition(bot_days, bot_runs, rng).into_iter();
    let mut human_sizes = composition(k - bot_days, runs - bot_runs, rng).into_iter();
    let mut sides = Vec::with_capacity(k);
    for r in 0..runs {
        let bot = (r % 2 == 0) == start_bot;
        let len = if bot { bot_sizes.next() } else { human_sizes.next() }.expect("run sizes");
        sides.extend(core::iter::repeat(bot).take(len));
    }

    let half = (t / 2) as i32;
    let offsets: Vec<i32> = (0..k)
        .map(|i| {
            let edge = (i > 0 && sides[i] != sides[i - 1]) || (i + 1 < k && sides[i] != sides[i + 1]);
            match (sides[i], edge) {
                (true, true) => half,
                (false, true) => -half,
                (true, false) => rng.range_inclusive(INTERIOR_OFFSET as i64, grid.bot_room as i64) as i32,
                (false, false) => -(rng.range_inclusive(INTERIOR_OFFSET as i64, grid.human_room as i64) as i32),
            }
        })
        .collect();
    let observations = plan
        .days
        .iter()
        .zip(&offsets)
        .map(|(&d, &o)| (d, (grid.threshold + o) as f64 / SCORE_SCALE as f64))
        .collect();
    let series = ScoreSeries::new(agent_id, observations)?;
    Ok(GeneratedSeries {
        series,
        offsets,
        true_flips: plan.n_flips,
        true_deltas: vec![t as f64 / SCORE_SCALE as f64; n],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub agent_id: String,
    pub class: AgentClass,
    pub true_flips: u32,
    pub true_mean_delta: f64,
    pub stance: StanceLabel,
    pub suspended: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticAgent {
    pub truth: GroundTruth,
    pub generated: GeneratedSeries,
    /// Profile at the end of the window, suspension status included.
    pub profile: ProfileSnapshot,
    /// Interaction weight.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<SyntheticAgent>,
    /// Sorted by time, then post id.
    pub posts: Vec<PostRecord>,
    pub analysis_date: Timestamp,
}

impl Population {
    pub fn truth(&self) -> impl Iterator<Item = &GroundTruth> {
        self.agents.iter().map(|a| &a.truth)
    }

    pub fn profiles(&self) -> BTreeMap<String, ProfileSnapshot> {
        self.agents.iter().map(|a| (a.truth.agent_id.clone(), a.profile.clone())).collect()
    }

    pub fn classes(&self) -> BTreeMap<String, AgentClass> {
        self.agents.iter().map(|a| (a.truth.agent_id.clone(), a.truth.class)).collect()
    }
}

pub fn agent_id(index: usize) -> String {
    format!("{}", 1_000_000 + index)
}

struct Slot {
    class: AgentClass,
    flips: u32,
    suspended: bool,
}

fn layout(spec: &PopulationSpec) -> Vec<Slot> {
    let mut rng = Rng::seed_from_u64(derive_seed(spec.seed, 0));
    let mut slots = Vec::with_capacity(spec.total_agents());
    for class in AgentClass::ALL {
        let cs = spec.class(class);
        let mut flips: Vec<u32> = Vec::with_capacity(cs.n_agents);
        for (n, &q) in quotas(&cs.flip_weights, cs.n_agents).iter().enumerate() {
            flips.extend(core::iter::repeat(n as u32).take(q));
        }
        let n_suspended = libm::round(cs.suspension_rate * cs.n_agents as f64) as usize;
        let mut suspended: Vec<bool> = (0..cs.n_agents).map(|i| i < n_suspended).collect();
        rng.shuffle(&mut flips);
        rng.shuffle(&mut suspended);
        slots.extend(flips.into_iter().zip(suspended).map(|(flips, suspended)| Slot { class, flips, suspended }));
    }
    rng.shuffle(&mut slots);
    slots
}

/// Fewest observed days that fit `flips` flips with the class's majority.
fn min_days(class: AgentClass, flips: u32) -> usize {
    // a bot with an odd flip count ends on the human side, so it needs one
    // more bot day than human days
    flips as usize + 1 + (class == AgentClass::Bot && flips % 2 == 1) as usize
}

fn draw_band(bands: &[DeltaBand], rng: &mut Rng) -> u32 {
    let weights: Vec<f64> = bands.iter().map(|b| b.weight).collect();
    let (lo, hi) = bands[rng.categorical(&weights)].even_bounds();
    lo + 2 * rng.below(((hi - lo) / 2 + 1) as u64) as u32
}

fn lognormal(median: f64, rng: &mut Rng) -> f64 {
    median * libm::exp(0.8 * rng.standard_normal())
}

fn truncated_normal(mean: f64, sd: f64, lo: f64, hi: f64, rng: &mut Rng) -> f64 {
    for _ in 0..64 {
        let x = rng.normal(mean, sd);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
    mean.clamp(lo, hi)
}

fn gen_agent(spec: &PopulationSpec, grid: &Grid, index: usize, slot: &Slot) -> CoreResult<(SyntheticAgent, Rng)> {
    let id = agent_id(index);
    let mut rng = Rng::seed_from_u64(derive_seed(spec.seed, index as u64 + 1));
    let cs = spec.class(slot.class);

    let delta = if slot.flips == 0 {
        0
    } else if slot.class != AgentClass::Cyborg && slot.flips >= spec.thresholds.min_flips {
        draw_band(&restricted_bands(&cs.delta_bands, grid), &mut rng)
    } else {
        draw_band(&cs.delta_bands, &mut rng)
    };
    let (lo, hi) = spec.active_days;
    let wanted = (rng.range_inclusive(lo as i64, hi as i64) as usize).max(min_days(slot.class, slot.flips));
    let days: Vec<Day> = rng
        .sample_indices(spec.days as usize, wanted)
        .into_iter()
        .map(|i| Day(spec.start_day.0 + i as i32))
        .collect();
    let plan = SeriesPlan {
        class: slot.class,
        n_flips: slot.flips,
        flip_delta_milli: delta,
        days,
        thresholds: spec.thresholds,
    };
    let generated = gen_score_series(&id, &plan, &mut rng)?;

    let lifespan = truncated_normal(cs.lifespan_mean_days, cs.lifespan_sd_days, (spec.days + 30) as f64, 5500.0, &mut rng);
    let created = spec.analysis_date().0 - libm::floor(lifespan) as i64 * SECONDS_PER_DAY - rng.below(SECONDS_PER_DAY as u64) as i64;
    let followers = libm::round(lognormal(cs.followers_median, &mut rng).min(20_000.0)) as u64;
    let friends = (libm::round(lognormal(cs.friends_median, &mut rng).min(20_000.0)) as u64).max(1).max(followers / 20);
    let statuses = 500 + rng.below(20_000);
    let verified = rng.bernoulli(cs.verified_rate);
    let stance = [StanceLabel::Pro, StanceLabel::Anti, StanceLabel::Neutral][rng.categorical(&spec.stance_mix)];

    let truth = GroundTruth {
        agent_id: id,
        class: slot.class,
        true_flips: generated.true_flips,
        true_mean_delta: generated.true_mean_delta(),
        stance,
        suspended: slot.suspended,
    };
    let profile = ProfileSnapshot {
        followers_count: followers,
        friends_count: friends,
        statuses_count: statuses,
        account_created_at: Timestamp(created),
        is_verified: verified,
        is_suspended: Some(slot.suspended),
    };
    let weight = if slot.class == AgentClass::Cyborg { spec.degree_inflation } else { 1.0 };
    Ok((SyntheticAgent { truth, generated, profile, weight }, rng))
}

fn gen_agents(spec: &PopulationSpec) -> CoreResult<Vec<(SyntheticAgent, Rng)>> {
    spec.validate()?;
    let grid = Grid::new(&spec.thresholds)?;
    layout(spec).iter().enumerate().map(|(i, slot)| gen_agent(spec, &grid, i, slot)).collect()
}

/// Ground truth, score series and profiles without posts. Series match
/// those of [`gen_population`] for the same spec.
pub fn gen_series_population(spec: &PopulationSpec) -> CoreResult<Vec<SyntheticAgent>> {
    Ok(gen_agents(spec)?.into_iter().map(|(a, _)| a).collect())
}

/// Cumulative-weight table for drawing agents in proportion to weight.
#[derive(Debug, Clone)]
pub struct WeightedPicker {
    cumulative: Vec<f64>,
}

impl WeightedPicker {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        WeightedPicker {
            cumulative: weights
                .iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect(),
        }
    }

    pub fn pick(&self, rng: &mut Rng) -> usize {
        let total = *self.cumulative.last().expect("nonempty picker");
        let x = rng.next_f64() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }

    /// Draws until the pick differs from `exclude`; falls back to the next
    /// index after a few tries.
    pub fn pick_other(&self, exclude: usize, rng: &mut Rng) -> usize {
        for _ in 0..16 {
            let j = self.pick(rng);
            if j != exclude {
                return j;
            }
        }
        (exclude + 1) % self.cumulative.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DayTemplate {
    posts: u32,
    automated: u32,
    retweets: u32,
    tags_per_post: u32,
}

impl DayTemplate {
    fn sources(&self) -> u64 {
        (self.automated > 0) as u64 + (self.automated < self.posts) as u64
    }

    fn all() -> Vec<DayTemplate> {
        let mut out = Vec::new();
        for posts in 2..=8 {
            for automated in 0..=posts {
                for retweets in 0..=posts {
                    for tags_per_post in 0..=5 {
                        out.push(DayTemplate { posts, automated, retweets, tags_per_post });
                    }
                }
            }
        }
        out
    }
}

/// Inverts the reference scorer for one agent-day.
struct Realizer<'a> {
    scorer: &'a ReferenceScorer,
    automation: AutomationSources,
    templates: Vec<DayTemplate>,
    gap_step: f64,
    status_step: f64,
    age_step: f64,
    first_post_cap: i64,
}

struct DayLayout {
    template: DayTemplate,
    first_post: i64,
    gap: i64,
    statuses: u64,
}

impl<'a> Realizer<'a> {
    fn new(scorer: &'a ReferenceScorer) -> CoreResult<Self> {
        let w = &scorer.weights.weights;
        let (age, statuses, gap) = (w[0], w[3], w[6]);
        if !(gap < 0.0 && statuses > 0.0 && age < 0.0) {
            return Err(CoreError::Infeasible(
                "scorer weights need negative age and gap weights and a positive status weight".to_string(),
            ));
        }
        let gap_step = -gap;
        let age_step = -age / SECONDS_PER_DAY as f64;
        let fine = statuses.min(gap_step);
        let first_post_cap = libm::ceil(fine / age_step) as i64 + 1;
        if first_post_cap >= SECONDS_PER_DAY / 2 {
            return Err(CoreError::Infeasible("age weight too small to place posts".to_string()));
        }
        Ok(Realizer {
            scorer,
            automation: AutomationSources::default(),
            templates: DayTemplate::all(),
            gap_step,
            status_step: statuses,
            age_step,
            first_post_cap,
        })
    }

    fn max_gap(&self, posts: u32) -> i64 {
        (SECONDS_PER_DAY - 1 - self.first_post_cap) / (posts as i64 - 1)
    }

    fn base_features(&self, profile: &ProfileSnapshot, day: Day, statuses: u64, t: &DayTemplate) -> FeatureVector {
        let n = t.posts as f64;
        FeatureVector {
            account_age_days: (day.start().0 - profile.account_created_at.0) as f64 / SECONDS_PER_DAY as f64,
            followers: profile.followers_count,
            friends: profile.friends_count,
            statuses,
            follower_friend_ratio: if profile.friends_count == 0 {
                profile.followers_count as f64
            } else {
                profile.followers_count as f64 / profile.friends_count as f64
            },
            posts_today: t.posts as u64,
            mean_interpost_gap_seconds: 0.0,
            gap_coefficient_of_variation: 0.0,
            distinct_sources: t.sources(),
            automation_source_fraction: t.automated as f64 / n,
            retweet_fraction: t.retweets as f64 / n,
            hashtags_per_post: t.tags_per_post as f64,
        }
    }

    fn plan(&self, profile: &ProfileSnapshot, day: Day, statuses: u64, target: f64, rng: &mut Rng) -> Option<DayLayout> {
        let z_target = libm::log(target / (1.0 - target));
        let slack = |t: &DayTemplate| self.scorer.logit(&self.base_features(profile, day, statuses, t)) - z_target;
        let feasible = |t: &DayTemplate, d: f64| d >= self.gap_step && d < self.gap_step * self.max_gap(t.posts) as f64;
        let fitting: Vec<(DayTemplate, f64)> = self
            .templates
            .iter()
            .map(|t| (*t, slack(t)))
            .filter(|(t, d)| feasible(t, *d))
            .collect();
        let fewest = fitting.iter().map(|(t, _)| t.posts).min()?;
        let pool: Vec<&(DayTemplate, f64)> = fitting.iter().filter(|(t, _)| t.posts <= fewest + 1).collect();
        let &(template, d) = pool[rng.below(pool.len() as u64) as usize];

        let gap = libm::floor(d / self.gap_step) as i64;
        let rest = (d - gap as f64 * self.gap_step).max(0.0);
        let drop = (libm::floor(rest / self.status_step) as u64).min(statuses);
        let rest = (rest - drop as f64 * self.status_step).max(0.0);
        let first_post = (libm::round(rest / self.age_step) as i64).min(self.first_post_cap);
        Some(DayLayout { template, first_post, gap, statuses: statuses - drop })
    }
}

fn words(stance: StanceLabel, rng: &mut Rng, count: usize) -> Vec<&'static str> {
    let themes: &[usize] = match stance {
        StanceLabel::Pro => &[0, 1, 3],
        StanceLabel::Anti => &[4, 2, 3],
        StanceLabel::Neutral => &[0, 2, 3],
    };
    (0..count)
        .map(|_| {
            let theme = themes[rng.below(themes.len() as u64) as usize];
            THEMES[theme][rng.below(12) as usize]
        })
        .collect()
}

fn tags(stance: StanceLabel, count: usize, rng: &mut Rng) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(count);
    while out.len() < count {
        let pool: &[&str] = match stance {
            StanceLabel::Pro if rng.bernoulli(0.6) => &PRO_TAGS,
            StanceLabel::Anti if rng.bernoulli(0.6) => &ANTI_TAGS,
            _ => &NEUTRAL_TAGS,
        };
        let tag = pool[rng.below(pool.len() as u64) as usize];
        if !out.iter().any(|t| t == tag) {
            out.push(tag.to_string());
        }
    }
    out
}

fn realize_agent(
    spec: &PopulationSpec,
    realizer: &Realizer<'_>,
    picker: &WeightedPicker,
    ids: &[String],
    index: usize,
    agent: &mut SyntheticAgent,
    rng: &mut Rng,
) -> CoreResult<Vec<PostRecord>> {
    let manual = MANUAL_SOURCES[rng.below(MANUAL_SOURCES.len() as u64) as usize];
    let automated = AUTOMATED_SOURCES[rng.below(AUTOMATED_SOURCES.len() as u64) as usize];
    let stance = agent.truth.stance;
    let id = agent.truth.agent_id.clone();
    let mut posts = Vec::new();
    let mut profile = agent.profile.clone();
    profile.is_suspended = None;

    let observations = agent.generated.series.observations.clone();
    for &(day, target) in &observations {
        let statuses = agent.profile.statuses_count + 20 * (day.0 - spec.start_day.0) as u64;
        let layout = realizer.plan(&profile, day, statuses, target, rng).ok_or_else(|| {
            CoreError::Infeasible(format!("agent {id}: no posting template reaches score {target} on day {}", day.0))
        })?;
        let t = layout.template;
        let day_profile = ProfileSnapshot { statuses_count: layout.statuses, ..profile.clone() };
        let auto_slots = rng.sample_indices(t.posts as usize, t.automated as usize);
        let rt_slots = rng.sample_indices(t.posts as usize, t.retweets as usize);
        let start = day.start().0 + layout.first_post;
        let mut day_posts = Vec::with_capacity(t.posts as usize);
        for i in 0..t.posts as usize {
            let hashtags = tags(stance, t.tags_per_post as usize, rng);
            let n_words = 3 + rng.below(3) as usize;
            let mut text = words(stance, rng, n_words).join(" ");
            for h in &hashtags {
                text.push_str(" #");
                text.push_str(h);
            }
            let retweet_of = rt_slots.contains(&i).then(|| ids[picker.pick_other(index, rng)].clone());
            if let Some(target) = &retweet_of {
                text = format!("RT @{target}: {text}");
            }
            let source = if auto_slots.contains(&i) { automated } else { manual };
            day_posts.push(PostRecord {
                post_id: format!("{id}{:03}{i}", day.0 - spec.start_day.0),
                author_id: id.clone(),
                created_at: Timestamp(start + i as i64 * layout.gap),
                text,
                hashtags,
                retweet_of,
                quote_of: None,
                mentions: Vec::new(),
                source_client: source.to_string(),
                author_profile: day_profile.clone(),
            });
        }
        let window = DailyWindow { agent_id: id.clone(), day, posts: day_posts };
        let got = realizer.scorer.score(&extract_features(&window, &realizer.automation));
        if libm::fabs(got - target) > REALIZE_TOLERANCE {
            return Err(CoreError::Infeasible(format!(
                "agent {id}: realized score {got} misses target {target} on day {}",
                day.0
            )));
        }
        posts.extend(window.posts);
        agent.profile.statuses_count = layout.statuses;
    }

    let expected = spec.mentions_per_agent * agent.weight;
    let n_mentions = libm::floor(expected) as usize + rng.bernoulli(expected - libm::floor(expected)) as usize;
    if !posts.is_empty() && ids.len() > 1 {
        for _ in 0..n_mentions {
            let target = ids[picker.pick_other(index, rng)].clone();
            let slot = rng.below(posts.len() as u64) as usize;
            let post = &mut posts[slot];
            post.text.push_str(" @");
            post.text.push_str(&target);
            post.mentions.push(target);
        }
    }
    Ok(posts)
}

/// Full population: ground truth, profiles, and posts whose reference
/// scores reproduce each agent's generated series.
pub fn gen_population(spec: &PopulationSpec) -> CoreResult<Population> {
    gen_population_with(spec, &ReferenceScorer::default())
}

pub fn gen_population_with(spec: &PopulationSpec, scorer: &ReferenceScorer) -> CoreResult<Population> {
    let drafts = gen_agents(spec)?;
    let realizer = Realizer::new(scorer)?;
    let ids: Vec<String> = drafts.iter().map(|(a, _)| a.truth.agent_id.clone()).collect();
    let weights: Vec<f64> = drafts.iter().map(|(a, _)| a.weight).collect();
    let picker = WeightedPicker::new(&weights);
    let mut agents = Vec::with_capacity(drafts.len());
    let mut posts = Vec::new();
    for (i, (mut agent, mut rng)) in drafts.into_iter().enumerate() {
        posts.extend(realize_agent(spec, &realizer, &picker, &ids, i, &mut agent, &mut rng)?);
        agents.push(agent);
    }
    posts.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.post_id.cmp(&b.post_id)));
    Ok(Population { agents, posts, analysis_date: spec.analysis_date() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommSpec {
    pub n_agents: usize,
    pub cyborg_fraction: f64,
    pub n_interactions: usize,
    pub degree_inflation: f64,
    pub start_day: Day,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommPopulation {
    pub posts: Vec<PostRecord>,
    pub classes: BTreeMap<String, AgentClass>,
}

/// Mention-only posts over a Chung-Lu style graph: both ends of every
/// interaction are drawn in proportion to agent weight, so a Cyborg's
/// expected degree is `degree_inflation` times anyone else's.
pub fn gen_comm_posts(spec: &CommSpec) -> CoreResult<CommPopulation> {
    if !(0.0..=1.0).contains(&spec.cyborg_fraction) {
        return Err(CoreError::OutOfRange { field: "cyborg_fraction", value: spec.cyborg_fraction });
    }
    if !(spec.degree_inflation.is_finite() && spec.degree_inflation > 0.0) {
        return Err(CoreError::OutOfRange { field: "degree_inflation", value: spec.degree_inflation });
    }
    let mut rng = Rng::seed_from_u64(spec.seed);
    let n_cyborg = libm::round(spec.cyborg_fraction * spec.n_agents as f64) as usize;
    let mut classes_by_index: Vec<AgentClass> = (0..spec.n_agents)
        .map(|i| if i < n_cyborg { AgentClass::Cyborg } else if i % 2 == 0 { AgentClass::Bot } else { AgentClass::Human })
        .collect();
    rng.shuffle(&mut classes_by_index);
    let ids: Vec<String> = (0..spec.n_agents).map(agent_id).collect();
    let weights: Vec<f64> = classes_by_index
        .iter()
        .map(|&c| if c == AgentClass::Cyborg { spec.degree_inflation } else { 1.0 })
        .collect();
    let mut posts = Vec::with_capacity(spec.n_interactions);
    if spec.n_agents >= 2 {
        let picker = WeightedPicker::new(&weights);
        for k in 0..spec.n_interactions {
            let src = picker.pick(&mut rng);
            let dst = picker.pick_other(src, &mut rng);
            posts.push(PostRecord {
                post_id: format!("{}", 9_000_000_000u64 + k as u64),
                author_id: ids[src].clone(),
                created_at: Timestamp(spec.start_day.start().0 + rng.below(SECONDS_PER_DAY as u64) as i64),
                text: format!("@{}", ids[dst]),
                mentions: vec![ids[dst].clone()],
                source_client: MANUAL_SOURCES[0].to_string(),
                ..Default::default()
            });
        }
    }
    posts.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.post_id.cmp(&b.post_id)));
    Ok(CommPopulation { posts, classes: ids.into_iter().zip(classes_by_index).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flips::{analyze, detect_flips, flip_count_distribution, BotLabel};
    use crate::ingest::window_by_day;
    use crate::scoring::score;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn plan(class: AgentClass, n_flips: u32, delta: u32, k: usize) -> SeriesPlan {
        SeriesPlan {
            class,
            n_flips,
            flip_delta_milli: delta,
            days: (0..k as i32).map(Day).collect(),
            thresholds: CyborgThresholds::default(),
        }
    }

    #[test]
    fn quotas_hit_totals() {
        assert_eq!(quotas(&[1.0, 1.0, 1.0], 10), [4, 3, 3]);
        assert_eq!(quotas(&[0.0, 2.0], 5), [0, 5]);
        assert_eq!(quotas(&[1.0], 0), [0]);
        assert_eq!(quotas(&[0.5, 0.25, 0.25], 4), [2, 1, 1]);
    }

    #[test]
    fn zero_flips_stay_on_one_side() {
        let mut rng = Rng::seed_from_u64(1);
        for class in [AgentClass::Bot, AgentClass::Human] {
            let g = gen_score_series("a", &plan(class, 0, 0, 30), &mut rng).unwrap();
            let labels = g.series.labels(0.70);
            let want = if class == AgentClass::Bot { BotLabel::Bot } else { BotLabel::Human };
            assert!(labels.iter().all(|&l| l == want));
            assert!(detect_flips(&g.series, 0.70).is_empty());
        }
    }

    #[test]
    fn three_flips_make_a_cyborg() {
        let mut rng = Rng::seed_from_u64(2);
        let g = gen_score_series("a", &plan(AgentClass::Cyborg, 3, 104, 10), &mut rng).unwrap();
        let a = analyze(&g.series, &CyborgThresholds::default());
        assert_eq!(a.stats.n_flips, 3);
        assert!((a.stats.mean_abs_delta - 0.104).abs() < 1e-12);
        assert_eq!(a.class, AgentClass::Cyborg);
    }

    #[test]
    fn saturated_flips_alternate() {
        let mut rng = Rng::seed_from_u64(3);
        for class in [AgentClass::Human, AgentClass::Cyborg] {
            let delta = if class == AgentClass::Cyborg { 200 } else { 60 };
            let g = gen_score_series("a", &plan(class, 9, delta, 10), &mut rng).unwrap();
            let labels = g.series.labels(0.70);
            assert!(labels.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn infeasible_plans() {
        let mut rng = Rng::seed_from_u64(4);
        let err = |p: SeriesPlan| matches!(gen_score_series("a", &p, &mut Rng::seed_from_u64(0)), Err(CoreError::Infeasible(_)));
        assert!(err(plan(AgentClass::Human, 10, 50, 10)));
        assert!(err(plan(AgentClass::Cyborg, 2, 200, 10)));
        assert!(err(plan(AgentClass::Cyborg, 3, 60, 10)));
        assert!(err(plan(AgentClass::Human, 3, 200, 10)));
        assert!(err(plan(AgentClass::Human, 3, 100, 10)));
        assert!(err(plan(AgentClass::Human, 2, 51, 10)));
        // bot majority impossible with 9 alternating flips over 10 days
        assert!(err(plan(AgentClass::Bot, 9, 50, 10)));
        assert!(gen_score_series("a", &plan(AgentClass::Bot, 8, 50, 10), &mut rng).is_ok());
    }

    #[test]
    fn coronavirus_shape_validates() {
        let spec = PopulationSpec::coronavirus_shaped(5000, 1);
        spec.validate().unwrap();
        assert_eq!(spec.total_agents(), 5000);
    }

    #[test]
    fn all_zero_flips_has_no_flipping_population() {
        let mut spec = PopulationSpec::coronavirus_shaped(300, 5);
        spec.cyborg.n_agents = 0;
        spec.bot.flip_weights = vec![1.0];
        spec.human.flip_weights = vec![1.0];
        let agents = gen_series_population(&spec).unwrap();
        let stats: Vec<_> = agents.iter().map(|a| analyze(&a.generated.series, &spec.thresholds).stats).collect();
        assert_eq!(flip_count_distribution(&stats).unwrap().population, 0);
        let err = crate::flips::calibrate(&stats, 75.0).unwrap_err();
        assert!(alloc::format!("{err}").contains("empty"));
    }

    #[test]
    fn series_population_recovers_truth() {
        let spec = PopulationSpec::coronavirus_shaped(3000, 9);
        for a in gen_series_population(&spec).unwrap() {
            let got = analyze(&a.generated.series, &spec.thresholds);
            assert_eq!(got.stats.n_flips, a.truth.true_flips);
            assert_eq!(got.class, a.truth.class, "{}", a.truth.agent_id);
            assert!((got.stats.mean_abs_delta - a.truth.true_mean_delta).abs() < 1e-9);
        }
    }

    #[test]
    fn posts_rescore_to_targets() {
        let spec = PopulationSpec::coronavirus_shaped(300, 21);
        let pop = gen_population(&spec).unwrap();
        let windows = window_by_day(pop.posts.iter().cloned());
        let scorer = ReferenceScorer::default();
        let automation = AutomationSources::default();
        for agent in &pop.agents {
            let days = &windows[&agent.truth.agent_id];
            assert_eq!(days.len(), agent.generated.series.observations.len());
            for (w, &(day, target)) in days.iter().zip(&agent.generated.series.observations) {
                assert_eq!(w.day, day);
                let s = score(&extract_features(w, &automation), &scorer);
                assert!((s - target).abs() < 1e-7, "{} {:?}: {s} vs {target}", agent.truth.agent_id, day);
            }
        }
        for p in &pop.posts {
            p.validate().unwrap();
            assert_ne!(p.retweet_of.as_deref(), Some(p.author_id.as_str()));
        }
    }

    #[test]
    fn population_is_deterministic() {
        let spec = PopulationSpec::coronavirus_shaped(200, 3);
        assert_eq!(gen_population(&spec).unwrap(), gen_population(&spec).unwrap());
        let other = PopulationSpec { seed: 4, ..spec.clone() };
        assert_ne!(gen_population(&spec).unwrap().posts, gen_population(&other).unwrap().posts);
    }

    #[test]
    fn suspension_quotas_are_exact() {
        let spec = PopulationSpec::coronavirus_shaped(2000, 8);
        let agents = gen_series_population(&spec).unwrap();
        for class in AgentClass::ALL {
            let cs = spec.class(class);
            let n = agents.iter().filter(|a| a.truth.class == class).count();
            let s = agents.iter().filter(|a| a.truth.class == class && a.truth.suspended).count();
            assert_eq!(n, cs.n_agents);
            assert_eq!(s, libm::round(cs.suspension_rate * n as f64) as usize);
        }
    }

    #[test]
    fn comm_posts_empty_without_interactions() {
        let spec = CommSpec {
            n_agents: 100,
            cyborg_fraction: 0.1,
            n_interactions: 0,
            degree_inflation: 3.0,
            start_day: Day(0),
            seed: 1,
        };
        let pop = gen_comm_posts(&spec).unwrap();
        assert!(pop.posts.is_empty());
        assert_eq!(pop.classes.len(), 100);
    }

    #[test]
    fn picker_follows_weights() {
        let picker = WeightedPicker::new(&[1.0, 3.0, 0.0, 1.0]);
        let mut rng = Rng::seed_from_u64(6);
        let mut counts = [0usize; 4];
        for _ in 0..50_000 {
            counts[picker.pick(&mut rng)] += 1;
        }
        assert_eq!(counts[2], 0);
        let share = counts[1] as f64 / 50_000.0;
        assert!((share - 0.6).abs() < 0.01, "{share}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn generated_series_match_plan(
            k in 2usize..31,
            flips_frac in 0.0f64..1.0,
            class_idx in 0usize..3,
            delta_half in 5u32..=250,
            seed in any::<u64>(),
        ) {
            let class = AgentClass::ALL[class_idx];
            let n = (flips_frac * k as f64) as u32;
            let n = n.min(k as u32 - 1);
            let mut t = delta_half * 2;
            if class == AgentClass::Cyborg {
                prop_assume!(n >= 3);
                t = t.max(104);
            } else if n >= 3 {
                t = t.min(96);
            }
            let p = plan(class, n, t, k);
            let mut rng = Rng::seed_from_u64(seed);
            match gen_score_series("x", &p, &mut rng) {
                Ok(g) => {
                    let a = analyze(&g.series, &p.thresholds);
                    prop_assert_eq!(a.stats.n_flips, n);
                    prop_assert_eq!(a.class, class);
                    prop_assert!(a.stats.n_bot_to_human.abs_diff(a.stats.n_human_to_bot) <= 1);
                    for e in &a.events {
                        prop_assert!((e.abs_delta - t as f64 / 1000.0).abs() < 1e-12);
                    }
                    for &o in &g.offsets {
                        prop_assert!(o.abs() >= MIN_OFFSET);
                    }
                }
                Err(CoreError::Infeasible(_)) => {
                    // a bot majority needs more than half the days outside the human runs
                    let human_runs = (n as usize + 1) / 2;
                    prop_assert!(class == AgentClass::Bot && 2 * (k - human_runs) <= k);
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
