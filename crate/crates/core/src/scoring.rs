//! Per-day features and bot-probability scoring.
//!
//! Any scorer plugs in through [`ScorerContract`]. The built-in
//! [`ReferenceScorer`] is a fixed logistic model over [`FeatureVector`]; its
//! weights ship as `weights/reference.txt` in the `cyborg` crate and must
//! match [`ReferenceWeights::default`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::ingest::DailyWindow;
use crate::{CoreError, CoreResult};

pub const DAY_SECONDS: f64 = 86_400.0;

pub const DEFAULT_AUTOMATION_SOURCES: [&str; 4] = ["TweetDeck", "IFTTT", "dlvr.it", "twittbot.net"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BotLabel {
    Bot,
    Human,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    pub account_age_days: f64,
    pub followers: u64,
    pub friends: u64,
    pub statuses: u64,
    pub follower_friend_ratio: f64,
    pub posts_today: u64,
    pub mean_interpost_gap_seconds: f64,
    pub gap_coefficient_of_variation: f64,
    pub distinct_sources: u64,
    pub automation_source_fraction: f64,
    pub retweet_fraction: f64,
    pub hashtags_per_post: f64,
}

/// Feature names in weight-file order.
pub const FEATURE_NAMES: [&str; 12] = [
    "account_age_days",
    "followers",
    "friends",
    "statuses",
    "follower_friend_ratio",
    "posts_today",
    "mean_interpost_gap_seconds",
    "gap_coefficient_of_variation",
    "distinct_sources",
    "automation_source_fraction",
    "retweet_fraction",
    "hashtags_per_post",
];

impl FeatureVector {
    pub fn values(&self) -> [f64; 12] {
        [
            self.account_age_days,
            self.followers as f64,
            self.friends as f64,
            self.statuses as f64,
            self.follower_friend_ratio,
            self.posts_today as f64,
            self.mean_interpost_gap_seconds,
            self.gap_coefficient_of_variation,
            self.distinct_sources as f64,
            self.automation_source_fraction,
            self.retweet_fraction,
            self.hashtags_per_post,
        ]
    }
}

/// Client names whose posts count as automated.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomationSources(Vec<String>);

impl Default for AutomationSources {
    fn default() -> Self {
        AutomationSources(DEFAULT_AUTOMATION_SOURCES.iter().map(|s| String::from(*s)).collect())
    }
}

impl AutomationSources {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AutomationSources(names.into_iter().map(Into::into).collect())
    }

    /// Case-insensitive match on the client name. Sources given as an HTML
    /// anchor (`<a href=..>TweetDeck</a>`) are matched on the anchor text.
    pub fn contains(&self, source: &str) -> bool {
        let name = client_name(source);
        self.0.iter().any(|s| s.eq_ignore_ascii_case(name))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }
}

fn client_name(source: &str) -> &str {
    let s = source.trim();
    if let (Some(open), Some(close)) = (s.find('>'), s.rfind("</")) {
        if open < close {
            return s[open + 1..close].trim();
        }
    }
    s
}

/// Features of one agent-day. Deterministic; windows are assumed nonempty
/// (an empty window yields the all-zero vector).
pub fn extract_features(window: &DailyWindow, automation: &AutomationSources) -> FeatureVector {
    let posts = &window.posts;
    let Some(first) = posts.first() else {
        return FeatureVector::default();
    };
    let n = posts.len();
    let profile = &first.author_profile;

    let age_secs = (first.created_at.0 - profile.account_created_at.0).max(0);
    let ratio = if profile.friends_count == 0 {
        profile.followers_count as f64
    } else {
        profile.followers_count as f64 / profile.friends_count as f64
    };

    let mut times: Vec<i64> = posts.iter().map(|p| p.created_at.0).collect();
    times.sort_unstable();
    let (mean_gap, cv) = if n < 2 {
        (DAY_SECONDS, 0.0)
    } else {
        let gaps: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
        let cv = if mean > 0.0 { libm::sqrt(var) / mean } else { 0.0 };
        (mean, cv)
    };

    let mut sources: Vec<&str> = posts.iter().map(|p| p.source_client.as_str()).collect();
    sources.sort_unstable();
    sources.dedup();

    let automated = posts.iter().filter(|p| automation.contains(&p.source_client)).count();
    let retweets = posts.iter().filter(|p| p.retweet_of.is_some()).count();
    let tags: usize = posts.iter().map(|p| p.hashtags.len()).sum();

    FeatureVector {
        account_age_days: age_secs as f64 / DAY_SECONDS,
        followers: profile.followers_count,
        friends: profile.friends_count,
        statuses: profile.statuses_count,
        follower_friend_ratio: ratio,
        posts_today: n as u64,
        mean_interpost_gap_seconds: mean_gap,
        gap_coefficient_of_variation: cv,
        distinct_sources: sources.len() as u64,
        automation_source_fraction: automated as f64 / n as f64,
        retweet_fraction: retweets as f64 / n as f64,
        hashtags_per_post: tags as f64 / n as f64,
    }
}

/// A source of daily bot probabilities. Implementations must be pure
/// functions of the feature vector and their own parameters.
pub trait ScorerContract {
    fn scorer_id(&self) -> &str;
    /// Probability in `[0, 1]`.
    fn score(&self, features: &FeatureVector) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWeights {
    pub bias: f64,
    pub weights: [f64; 12],
}

impl Default for ReferenceWeights {
    fn default() -> Self {
        ReferenceWeights {
            bias: -2.0,
            weights: [
                -0.000_05,  // account_age_days
                -0.000_02,  // followers
                0.000_02,   // friends
                0.000_005,  // statuses
                -0.01,      // follower_friend_ratio
                0.15,       // posts_today
                -0.000_1,   // mean_interpost_gap_seconds
                -1.0,       // gap_coefficient_of_variation
                -0.2,       // distinct_sources
                2.5,        // automation_source_fraction
                1.5,        // retweet_fraction
                0.3,        // hashtags_per_post
            ],
        }
    }
}

impl ReferenceWeights {
    /// All-zero weights, for building up from a weight file.
    pub fn zeros() -> Self {
        ReferenceWeights { bias: 0.0, weights: [0.0; 12] }
    }

    pub fn set(&mut self, key: &str, value: f64) -> CoreResult<()> {
        if key == "bias" {
            self.bias = value;
            return Ok(());
        }
        let idx = FEATURE_NAMES
            .iter()
            .position(|&n| n == key)
            .ok_or_else(|| CoreError::UnknownFeature(String::from(key)))?;
        self.weights[idx] = value;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        if key == "bias" {
            return Some(self.bias);
        }
        FEATURE_NAMES.iter().position(|&n| n == key).map(|i| self.weights[i])
    }

    /// `(name, weight)` pairs, `bias` first.
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        core::iter::once(("bias", self.bias)).chain(FEATURE_NAMES.iter().copied().zip(self.weights))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceScorer {
    pub weights: ReferenceWeights,
}

impl Default for ReferenceScorer {
    fn default() -> Self {
        ReferenceScorer { weights: ReferenceWeights::default() }
    }
}

impl ReferenceScorer {
    pub const ID: &'static str = "reference-logistic-v1";

    pub fn new(weights: ReferenceWeights) -> Self {
        ReferenceScorer { weights }
    }

    /// Linear predictor before the sigmoid.
    pub fn logit(&self, features: &FeatureVector) -> f64 {
        let mut z = self.weights.bias;
        for (w, x) in self.weights.weights.iter().zip(features.values()) {
            z += w * x;
        }
        z
    }
}

impl ScorerContract for ReferenceScorer {
    fn scorer_id(&self) -> &str {
        Self::ID
    }

    fn score(&self, features: &FeatureVector) -> f64 {
        logistic(self.logit(features))
    }
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

pub fn score<S: ScorerContract + ?Sized>(features: &FeatureVector, model: &S) -> f64 {
    model.score(features).clamp(0.0, 1.0)
}

/// Bot iff `probability >= bot_threshold`.
pub fn classify_bot(probability: f64, bot_threshold: f64) -> CoreResult<BotLabel> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(CoreError::OutOfRange { field: "probability", value: probability });
    }
    if !(0.0..=1.0).contains(&bot_threshold) {
        return Err(CoreError::OutOfRange { field: "bot_threshold", value: bot_threshold });
    }
    Ok(if probability >= bot_threshold { BotLabel::Bot } else { BotLabel::Human })
}
