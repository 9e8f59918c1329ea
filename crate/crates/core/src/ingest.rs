//! Post records and their organisation into per-agent daily windows.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::{CoreError, CoreResult};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub i64);

/// UTC calendar day, counted in days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Day(pub i32);

impl Timestamp {
    pub fn day(self) -> Day {
        Day(self.0.div_euclid(SECONDS_PER_DAY) as i32)
    }

    /// Whole days elapsed from `earlier` to `self`, floored; negative if
    /// `earlier` is later.
    pub fn days_since(self, earlier: Timestamp) -> i64 {
        (self.0 - earlier.0).div_euclid(SECONDS_PER_DAY)
    }
}

impl Day {
    pub fn start(self) -> Timestamp {
        Timestamp(self.0 as i64 * SECONDS_PER_DAY)
    }

    pub fn succ(self) -> Day {
        Day(self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileSnapshot {
    pub followers_count: u64,
    pub friends_count: u64,
    pub statuses_count: u64,
    pub account_created_at: Timestamp,
    pub is_verified: bool,
    /// Known only after a later revisit of the account.
    pub is_suspended: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PostRecord {
    pub post_id: String,
    pub author_id: String,
    pub created_at: Timestamp,
    pub text: String,
    /// Lowercase, without the leading `#`.
    pub hashtags: Vec<String>,
    pub retweet_of: Option<String>,
    pub quote_of: Option<String>,
    pub mentions: Vec<String>,
    pub source_client: String,
    pub author_profile: ProfileSnapshot,
}

/// Lowercases a tag and strips any `#` characters.
pub fn normalize_hashtag(tag: &str) -> String {
    tag.chars()
        .filter(|&c| c != '#')
        .flat_map(char::to_lowercase)
        .collect()
}

impl PostRecord {
    /// Checks the per-record invariants; returns the first violation.
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.post_id.is_empty() {
            return Err("empty post id");
        }
        if self.author_id.is_empty() {
            return Err("empty author id");
        }
        if self
            .hashtags
            .iter()
            .any(|h| h.is_empty() || h.contains('#') || h.chars().any(char::is_uppercase))
        {
            return Err("hashtag not normalized");
        }
        if self.author_profile.account_created_at > self.created_at {
            return Err("account created after post");
        }
        Ok(())
    }

    pub fn day(&self) -> Day {
        self.created_at.day()
    }

    /// Every agent this post interacts with, one entry per interaction.
    pub fn interaction_targets(&self) -> impl Iterator<Item = &str> {
        self.retweet_of
            .as_deref()
            .into_iter()
            .chain(self.quote_of.as_deref())
            .chain(self.mentions.iter().map(String::as_str))
    }
}

/// All posts by one agent on one UTC day, ordered by time.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyWindow {
    pub agent_id: String,
    pub day: Day,
    pub posts: Vec<PostRecord>,
}

/// Partitions posts by author and UTC day.
///
/// Windows for each agent come out in increasing day order; posts inside a
/// window are sorted by timestamp, ties keeping input order.
pub fn window_by_day<I>(posts: I) -> BTreeMap<String, Vec<DailyWindow>>
where
    I: IntoIterator<Item = PostRecord>,
{
    let mut grouped: BTreeMap<String, BTreeMap<Day, Vec<PostRecord>>> = BTreeMap::new();
    for post in posts {
        let day = post.day();
        grouped
            .entry(post.author_id.clone())
            .or_default()
            .entry(day)
            .or_default()
            .push(post);
    }
    grouped
        .into_iter()
        .map(|(agent_id, days)| {
            let windows = days
                .into_iter()
                .map(|(day, mut posts)| {
                    posts.sort_by_key(|p| p.created_at);
                    DailyWindow {
                        agent_id: agent_id.clone(),
                        day,
                        posts,
                    }
                })
                .collect();
            (agent_id, windows)
        })
        .collect()
}

/// Agents present in every collection snapshot.
pub fn filter_consistent_agents(snapshots: &[BTreeSet<String>]) -> CoreResult<BTreeSet<String>> {
    let (first, rest) = snapshots.split_first().ok_or(CoreError::NoSnapshots)?;
    let mut keep = first.clone();
    for snap in rest {
        keep.retain(|a| snap.contains(a));
    }
    Ok(keep)
}

/// Distinct authors in a batch of posts.
pub fn author_set<'a, I>(posts: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    posts.into_iter().map(|p| p.author_id.clone()).collect()
}
