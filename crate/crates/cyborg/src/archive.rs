//! Newline-delimited post archives.
//!
//! One JSON object per line; the layout is described in
//! `docs/archive_schema.md`. Malformed lines are skipped and counted, unless
//! they make up more than half of the stream.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use cyborg_core::ingest::normalize_hashtag;
use cyborg_core::{PostRecord, ProfileSnapshot};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::timefmt::{format_timestamp, parse_timestamp};

/// Error messages kept in a [`ParseReport`].
pub const MAX_REPORTED_ERRORS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("cannot read archive: {0}")]
    Io(#[from] io::Error),
    #[error("wrong format: {skipped} of {total} lines malformed")]
    WrongFormat { skipped: usize, total: usize, report: ParseReport },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParseReport {
    pub ok: usize,
    pub skipped: usize,
    /// The first few problems, as `line N: message`.
    pub errors: Vec<String>,
}

impl ParseReport {
    fn skip(&mut self, line: usize, message: impl std::fmt::Display) {
        self.skipped += 1;
        if self.errors.len() < MAX_REPORTED_ERRORS {
            self.errors.push(format!("line {line}: {message}"));
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdRepr {
    Text(String),
    Number(u64),
}

impl IdRepr {
    fn into_string(self) -> String {
        match self {
            IdRepr::Text(s) => s,
            IdRepr::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TagRepr {
    Plain(String),
    Object { text: String },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MentionRepr {
    Id(IdRepr),
    Object { id: IdRepr },
}

#[derive(Deserialize)]
struct RawUser {
    id: IdRepr,
    followers_count: u64,
    friends_count: u64,
    statuses_count: u64,
    created_at: String,
    verified: bool,
}

#[derive(Deserialize)]
struct RawEntities {
    hashtags: Vec<TagRepr>,
    user_mentions: Vec<MentionRepr>,
}

#[derive(Deserialize)]
struct RawRefUser {
    id: IdRepr,
}

#[derive(Deserialize)]
struct RawRef {
    user: RawRefUser,
}

#[derive(Deserialize)]
struct RawPost {
    id: IdRepr,
    created_at: String,
    text: String,
    source: String,
    user: RawUser,
    entities: RawEntities,
    retweeted_status: Option<RawRef>,
    quoted_status: Option<RawRef>,
}

#[derive(Serialize)]
struct OutUser<'a> {
    id: &'a str,
    followers_count: u64,
    friends_count: u64,
    statuses_count: u64,
    created_at: String,
    verified: bool,
}

#[derive(Serialize)]
struct OutEntities<'a> {
    hashtags: &'a [String],
    user_mentions: &'a [String],
}

#[derive(Serialize)]
struct OutRefUser<'a> {
    id: &'a str,
}

#[derive(Serialize)]
struct OutRef<'a> {
    user: OutRefUser<'a>,
}

#[derive(Serialize)]
struct OutPost<'a> {
    id: &'a str,
    created_at: String,
    text: &'a str,
    source: &'a str,
    user: OutUser<'a>,
    entities: OutEntities<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retweeted_status: Option<OutRef<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quoted_status: Option<OutRef<'a>>,
}

fn convert(raw: RawPost) -> Result<PostRecord, String> {
    let created_at = parse_timestamp(&raw.created_at).ok_or_else(|| format!("bad created_at {:?}", raw.created_at))?;
    let account_created_at = parse_timestamp(&raw.user.created_at)
        .ok_or_else(|| format!("bad user.created_at {:?}", raw.user.created_at))?;
    let hashtags = raw
        .entities
        .hashtags
        .into_iter()
        .map(|t| match t {
            TagRepr::Plain(s) | TagRepr::Object { text: s } => normalize_hashtag(&s),
        })
        .filter(|t| !t.is_empty())
        .collect();
    let mentions = raw
        .entities
        .user_mentions
        .into_iter()
        .map(|m| match m {
            MentionRepr::Id(id) | MentionRepr::Object { id } => id.into_string(),
        })
        .collect();
    let post = PostRecord {
        post_id: raw.id.into_string(),
        author_id: raw.user.id.into_string(),
        created_at,
        text: raw.text,
        hashtags,
        retweet_of: raw.retweeted_status.map(|r| r.user.id.into_string()),
        quote_of: raw.quoted_status.map(|r| r.user.id.into_string()),
        mentions,
        source_client: raw.source,
        author_profile: ProfileSnapshot {
            followers_count: raw.user.followers_count,
            friends_count: raw.user.friends_count,
            statuses_count: raw.user.statuses_count,
            account_created_at,
            is_verified: raw.user.verified,
            is_suspended: None,
        },
    };
    post.validate().map_err(str::to_string)?;
    Ok(post)
}

/// Parses one archive line.
pub fn parse_line(line: &str) -> Result<PostRecord, String> {
    let raw: RawPost = serde_json::from_str(line).map_err(|e| e.to_string())?;
    convert(raw)
}

/// Reads a whole archive. Blank lines are ignored; lines that are not valid
/// UTF-8, not valid records, or repeat an earlier post id are skipped.
pub fn parse_archive<R: BufRead>(mut reader: R) -> Result<(Vec<PostRecord>, ParseReport), ArchiveError> {
    let mut posts = Vec::new();
    let mut report = ParseReport::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let Ok(text) = std::str::from_utf8(&buf) else {
            report.skip(line_no, "not valid UTF-8");
            continue;
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        match parse_line(text) {
            Ok(post) if !seen.insert(post.post_id.clone()) => {
                report.skip(line_no, format!("duplicate post id {}", post.post_id))
            }
            Ok(post) => {
                report.ok += 1;
                posts.push(post);
            }
            Err(e) => report.skip(line_no, e),
        }
    }
    let total = report.ok + report.skipped;
    if 2 * report.skipped > total {
        return Err(ArchiveError::WrongFormat { skipped: report.skipped, total, report });
    }
    Ok((posts, report))
}

pub fn read_archive_file(path: &Path) -> Result<(Vec<PostRecord>, ParseReport), ArchiveError> {
    parse_archive(BufReader::new(File::open(path)?))
}

/// Reads several archives in parallel, preserving input order.
pub fn read_archive_files(paths: &[PathBuf]) -> Vec<Result<(Vec<PostRecord>, ParseReport), ArchiveError>> {
    paths.par_iter().map(|p| read_archive_file(p)).collect()
}

/// One archive line, without the trailing newline.
pub fn to_line(post: &PostRecord) -> String {
    let profile = &post.author_profile;
    let out = OutPost {
        id: &post.post_id,
        created_at: format_timestamp(post.created_at),
        text: &post.text,
        source: &post.source_client,
        user: OutUser {
            id: &post.author_id,
            followers_count: profile.followers_count,
            friends_count: profile.friends_count,
            statuses_count: profile.statuses_count,
            created_at: format_timestamp(profile.account_created_at),
            verified: profile.is_verified,
        },
        entities: OutEntities { hashtags: &post.hashtags, user_mentions: &post.mentions },
        retweeted_status: post.retweet_of.as_deref().map(|id| OutRef { user: OutRefUser { id } }),
        quoted_status: post.quote_of.as_deref().map(|id| OutRef { user: OutRefUser { id } }),
    };
    serde_json::to_string(&out).expect("archive records always serialize")
}

pub fn write_archive<'a, W, I>(posts: I, mut out: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a PostRecord>,
{
    for post in posts {
        out.write_all(to_line(post).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyborg_core::Timestamp;

    const LINE: &str = r#"{"id":"1","created_at":"2020-06-01T12:00:00Z","text":"hi #Vax","source":"IFTTT","user":{"id":"a","followers_count":1,"friends_count":2,"statuses_count":3,"created_at":"2019-01-01T00:00:00Z","verified":false},"entities":{"hashtags":["Vax"],"user_mentions":["b"]}}"#;

    #[test]
    fn numeric_ids_and_tag_objects() {
        let line = r##"{"id":17,"created_at":"2020-06-01T12:00:00Z","text":"","source":"web","user":{"id":5,"followers_count":0,"friends_count":0,"statuses_count":0,"created_at":"2020-06-01T12:00:00Z","verified":true},"entities":{"hashtags":[{"text":"#Covid19"}],"user_mentions":[{"id":9}]},"retweeted_status":{"user":{"id":8}}}"##;
        let p = parse_line(line).unwrap();
        assert_eq!(p.post_id, "17");
        assert_eq!(p.author_id, "5");
        assert_eq!(p.hashtags, ["covid19"]);
        assert_eq!(p.mentions, ["9"]);
        assert_eq!(p.retweet_of.as_deref(), Some("8"));
        assert!(p.author_profile.is_verified);
    }

    #[test]
    fn line_fields() {
        let p = parse_line(LINE).unwrap();
        assert_eq!(p.created_at, Timestamp(1_591_012_800));
        assert_eq!(p.hashtags, ["vax"]);
        assert_eq!(p.quote_of, None);
        assert_eq!(p.author_profile.friends_count, 2);
    }

    #[test]
    fn missing_field_is_malformed() {
        let line = LINE.replace(r#""source":"IFTTT","#, "");
        assert!(parse_line(&line).unwrap_err().contains("source"));
    }

    #[test]
    fn account_after_post_is_malformed() {
        let line = LINE.replace("2019-01-01T00:00:00Z", "2021-01-01T00:00:00Z");
        assert_eq!(parse_line(&line).unwrap_err(), "account created after post");
    }

    #[test]
    fn duplicate_ids_are_skipped() {
        let input = format!("{LINE}\n{LINE}\n{}\n", LINE.replace(r#""id":"1""#, r#""id":"2""#));
        let (posts, report) = parse_archive(input.as_bytes()).unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(report.skipped, 1);
        assert!(report.errors[0].starts_with("line 2: duplicate"));
    }

    #[test]
    fn invalid_utf8_counts_as_malformed() {
        let mut input = format!("{LINE}\n").into_bytes();
        input.extend_from_slice(b"\xff\xfe\n");
        input.extend_from_slice(format!("{}\n", LINE.replace(r#""id":"1""#, r#""id":"2""#)).as_bytes());
        let (posts, report) = parse_archive(&input[..]).unwrap();
        assert_eq!((posts.len(), report.skipped), (2, 1));
    }

    #[test]
    fn error_list_is_capped() {
        let mut input = String::new();
        for i in 0..30 {
            input.push_str(&LINE.replace(r#""id":"1""#, &format!(r#""id":"{i}""#)));
            input.push('\n');
        }
        for _ in 0..20 {
            input.push_str("{\n");
        }
        let (_, report) = parse_archive(input.as_bytes()).unwrap();
        assert_eq!(report.skipped, 20);
        assert_eq!(report.errors.len(), MAX_REPORTED_ERRORS);
    }
}
