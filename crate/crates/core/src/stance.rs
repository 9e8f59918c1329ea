//! Pro/anti stance by label propagation over the user-hashtag graph.
//!
//! Scores live in `[-1, 1]` (positive = pro). Each round, computed from the
//! previous round's values only:
//!
//! * a user's score is the usage-weighted mean of its hashtags' scores,
//! * a hashtag's score is the usage-weighted mean of its users' scores,
//! * seed hashtags are held at `+1` (pro) or `-1` (anti).
//!
//! There is no damping. Iteration stops when no score moves by `tol` or
//! more, or after `max_iter` rounds. Anything with no path to a seed keeps
//! score 0 and is labelled neutral.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::flips::AgentClass;
use crate::ingest::{normalize_hashtag, PostRecord};
use crate::{CoreError, CoreResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedLexicon {
    pub name: String,
    pub pro: BTreeSet<String>,
    pub anti: BTreeSet<String>,
}

impl SeedLexicon {
    /// Normalizes tags (lowercase, no `#`), collapses duplicates and rejects
    /// any tag that lands on both sides.
    pub fn new<P, A, S>(name: impl Into<String>, pro: P, anti: A) -> CoreResult<Self>
    where
        P: IntoIterator<Item = S>,
        A: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let norm = |it: &mut dyn Iterator<Item = S>| -> BTreeSet<String> {
            it.map(|s| normalize_hashtag(s.as_ref().trim())).filter(|s| !s.is_empty()).collect()
        };
        let pro = norm(&mut pro.into_iter());
        let anti = norm(&mut anti.into_iter());
        if let Some(tag) = pro.intersection(&anti).next() {
            return Err(CoreError::SeedConflict(tag.clone()));
        }
        Ok(SeedLexicon { name: name.into(), pro, anti })
    }

    /// Same seeds with the sides exchanged.
    pub fn swapped(&self) -> Self {
        SeedLexicon { name: self.name.clone(), pro: self.anti.clone(), anti: self.pro.clone() }
    }

    fn seed_value(&self, tag: &str) -> Option<f64> {
        if self.pro.contains(tag) {
            Some(1.0)
        } else if self.anti.contains(tag) {
            Some(-1.0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bipartite {
    pub users: Vec<String>,
    pub hashtags: Vec<String>,
    /// Per user: `(hashtag index, weight)`.
    user_adj: Vec<Vec<(usize, u64)>>,
    /// Per hashtag: `(user index, weight)`.
    tag_adj: Vec<Vec<(usize, u64)>>,
}

impl Bipartite {
    pub fn from_weights(weights: &BTreeMap<(String, String), u64>) -> Self {
        let users: Vec<String> = weights.keys().map(|(u, _)| u.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let hashtags: Vec<String> =
            weights.keys().map(|(_, h)| h.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let ui: BTreeMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
        let hi: BTreeMap<&str, usize> = hashtags.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
        let mut user_adj = vec![Vec::new(); users.len()];
        let mut tag_adj = vec![Vec::new(); hashtags.len()];
        for ((u, h), &w) in weights {
            if w == 0 {
                continue;
            }
            let (u, h) = (ui[u.as_str()], hi[h.as_str()]);
            user_adj[u].push((h, w));
            tag_adj[h].push((u, w));
        }
        Bipartite { users, hashtags, user_adj, tag_adj }
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty() && self.hashtags.is_empty()
    }

    /// `(user, hashtag, weight)` triples, sorted.
    pub fn edges(&self) -> Vec<(&str, &str, u64)> {
        let mut out = Vec::new();
        for (u, adj) in self.user_adj.iter().enumerate() {
            for &(h, w) in adj {
                out.push((self.users[u].as_str(), self.hashtags[h].as_str(), w));
            }
        }
        out
    }
}

/// Edge `(u, h)` weighs the number of posts by `u` that carry `h`.
pub fn build_bipartite(posts: &[PostRecord]) -> Bipartite {
    let mut weights: BTreeMap<(String, String), u64> = BTreeMap::new();
    for p in posts {
        let tags: BTreeSet<String> = p.hashtags.iter().map(|h| normalize_hashtag(h)).filter(|h| !h.is_empty()).collect();
        for h in tags {
            *weights.entry((p.author_id.clone(), h)).or_default() += 1;
        }
    }
    Bipartite::from_weights(&weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StanceLabel {
    Pro,
    Anti,
    Neutral,
}

impl StanceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Pro => "pro",
            StanceLabel::Anti => "anti",
            StanceLabel::Neutral => "neutral",
        }
    }

    pub fn parse(s: &str) -> Option<StanceLabel> {
        match s {
            "pro" => Some(StanceLabel::Pro),
            "anti" => Some(StanceLabel::Anti),
            "neutral" => Some(StanceLabel::Neutral),
            _ => None,
        }
    }
}

pub fn label_for(score: f64, neutral_band: f64) -> StanceLabel {
    if score > neutral_band {
        StanceLabel::Pro
    } else if score < -neutral_band {
        StanceLabel::Anti
    } else {
        StanceLabel::Neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StanceAssignment {
    pub score: f64,
    pub label: StanceLabel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub neutral_band: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig { max_iter: 100, tol: 1e-6, neutral_band: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StanceResult {
    pub users: BTreeMap<String, StanceAssignment>,
    pub hashtags: BTreeMap<String, StanceAssignment>,
    pub iterations: usize,
    /// Largest score change in the final round.
    pub residual: f64,
    pub converged: bool,
    /// Largest change per round.
    pub history: Vec<f64>,
    /// Lexicon seeds that never occur in the graph.
    pub unused_seeds: Vec<String>,
}

pub fn propagate_stance(graph: &Bipartite, lexicon: &SeedLexicon, config: &PropagationConfig) -> StanceResult {
    let seeds: Vec<Option<f64>> = graph.hashtags.iter().map(|h| lexicon.seed_value(h)).collect();
    let present: BTreeSet<&str> = graph.hashtags.iter().map(String::as_str).collect();
    let unused_seeds = lexicon
        .pro
        .iter()
        .chain(&lexicon.anti)
        .filter(|s| !present.contains(s.as_str()))
        .cloned()
        .collect();

    let mut tags: Vec<f64> = seeds.iter().map(|s| s.unwrap_or(0.0)).collect();
    let mut users = vec![0.0; graph.users.len()];
    let mut new_tags = tags.clone();
    let mut new_users = users.clone();
    let mut history = Vec::new();
    let mut residual = 0.0;
    let mut converged = graph.is_empty();
    let mut iterations = 0;

    let weighted_mean = |adj: &[(usize, u64)], values: &[f64]| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(j, w) in adj {
            num += w as f64 * values[j];
            den += w as f64;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };

    while !converged && iterations < config.max_iter {
        iterations += 1;
        for (u, adj) in graph.user_adj.iter().enumerate() {
            new_users[u] = weighted_mean(adj, &tags);
        }
        for (h, adj) in graph.tag_adj.iter().enumerate() {
            new_tags[h] = seeds[h].unwrap_or_else(|| weighted_mean(adj, &users));
        }
        residual = users
            .iter()
            .zip(&new_users)
            .chain(tags.iter().zip(&new_tags))
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max);
        core::mem::swap(&mut users, &mut new_users);
        core::mem::swap(&mut tags, &mut new_tags);
        history.push(residual);
        converged = residual < config.tol;
    }

    let assign = |names: &[String], values: &[f64]| -> BTreeMap<String, StanceAssignment> {
        names
            .iter()
            .zip(values)
            .map(|(n, &s)| (n.clone(), StanceAssignment { score: s, label: label_for(s, config.neutral_band) }))
            .collect()
    };
    StanceResult {
        users: assign(&graph.users, &users),
        hashtags: assign(&graph.hashtags, &tags),
        iterations,
        residual,
        converged,
        history,
        unused_seeds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stratum {
    ProCyborg,
    ProNonCyborg,
    AntiCyborg,
    AntiNonCyborg,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::ProCyborg, Stratum::ProNonCyborg, Stratum::AntiCyborg, Stratum::AntiNonCyborg];

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::ProCyborg => "pro_cyborg",
            Stratum::ProNonCyborg => "pro_noncyborg",
            Stratum::AntiCyborg => "anti_cyborg",
            Stratum::AntiNonCyborg => "anti_noncyborg",
        }
    }

    fn of(label: StanceLabel, class: AgentClass) -> Option<Stratum> {
        let cyborg = class == AgentClass::Cyborg;
        match (label, cyborg) {
            (StanceLabel::Pro, true) => Some(Stratum::ProCyborg),
            (StanceLabel::Pro, false) => Some(Stratum::ProNonCyborg),
            (StanceLabel::Anti, true) => Some(Stratum::AntiCyborg),
            (StanceLabel::Anti, false) => Some(Stratum::AntiNonCyborg),
            (StanceLabel::Neutral, _) => None,
        }
    }
}

/// Posts of non-neutral agents split into the four stance x class strata,
/// indexed in [`Stratum::ALL`] order. Authors missing from either map are
/// left out.
pub fn split_by_stance_and_class<'a>(
    posts: &'a [PostRecord],
    assignments: &BTreeMap<String, StanceAssignment>,
    classes: &BTreeMap<String, AgentClass>,
) -> [Vec<&'a PostRecord>; 4] {
    let mut out: [Vec<&PostRecord>; 4] = Default::default();
    for p in posts {
        let (Some(a), Some(&c)) = (assignments.get(&p.author_id), classes.get(&p.author_id)) else {
            continue;
        };
        if let Some(s) = Stratum::of(a.label, c) {
            out[s as usize].push(p);
        }
    }
    out
}
