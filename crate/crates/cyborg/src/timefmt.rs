//! UTC timestamp and calendar-day text forms used in archives and CSVs.

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use cyborg_core::{Day, Timestamp};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";
pub const DAY_FORMAT: &str = "%Y-%m-%d";

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

/// Parses `YYYY-MM-DDTHH:MM:SSZ`.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .ok()
        .map(|t| Timestamp(t.and_utc().timestamp()))
}

pub fn format_timestamp(t: Timestamp) -> String {
    match DateTime::from_timestamp(t.0, 0) {
        Some(dt) => dt.format(TIMESTAMP_FORMAT).to_string(),
        None => format!("@{}", t.0),
    }
}

pub fn parse_day(s: &str) -> Option<Day> {
    let date = NaiveDate::parse_from_str(s.trim(), DAY_FORMAT).ok()?;
    i32::try_from((date - epoch()).num_days()).ok().map(Day)
}

pub fn format_day(d: Day) -> String {
    match epoch().checked_add_signed(chrono::TimeDelta::days(d.0 as i64)) {
        Some(date) => date.format(DAY_FORMAT).to_string(),
        None => format!("day{}", d.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_round_trip() {
        let t = parse_timestamp("2020-06-01T23:59:59Z").unwrap();
        assert_eq!(t.0, 1_591_055_999);
        assert_eq!(format_timestamp(t), "2020-06-01T23:59:59Z");
        assert_eq!(t.day(), parse_day("2020-06-01").unwrap());
        assert_eq!(format_day(t.day()), "2020-06-01");
    }

    #[test]
    fn rejects_other_layouts() {
        assert!(parse_timestamp("2020-06-01 23:59:59").is_none());
        assert!(parse_timestamp("2020-06-01T23:59:59+00:00").is_none());
        assert!(parse_timestamp("2020-13-01T00:00:00Z").is_none());
        assert!(parse_day("06/01/2020").is_none());
    }

    #[test]
    fn days_before_epoch() {
        assert_eq!(format_day(Day(-1)), "1969-12-31");
        assert_eq!(parse_day("1969-12-31"), Some(Day(-1)));
    }
}
