//! MTG-Jamendo metadata ingestion and conditional tag statistics.
//!
//! The input is the dataset's tab-separated layout:
//!
//! ```text
//! TRACK_ID  ARTIST_ID  ALBUM_ID  PATH  DURATION  TAGS...
//! ```
//!
//! where every field from the sixth on is a `category---value` tag.
//!
//! [`TagStats`] persist as TOML:
//!
//! ```toml
//! format_version = 1
//!
//! [moods.happy]
//! track_count = 2
//!
//! [moods.happy.instrument]
//! guitar = 0.5
//! piano = 0.5
//!
//! [moods.happy.genre]
//! pop = 1.0
//! ```
//!
//! Each non-empty distribution sums to one and holds only positive
//! frequencies. A distribution is empty when no track with that mood had
//! a tag of the category.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STATS_FORMAT_VERSION: u32 = 1;
const MIN_FIELDS: usize = 6;
const DIST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("missing TRACK_ID header")]
    MissingHeader,
    #[error("stats file: {0}")]
    InvalidStats(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagCategory {
    Genre,
    Instrument,
    MoodTheme,
}

impl TagCategory {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "genre" => Some(Self::Genre),
            "instrument" => Some(Self::Instrument),
            "mood/theme" => Some(Self::MoodTheme),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Genre => "genre",
            Self::Instrument => "instrument",
            Self::MoodTheme => "mood/theme",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub track_id: String,
    pub duration_s: f64,
    pub tags: Vec<(TagCategory, String)>,
}

impl TrackRecord {
    pub fn values(&self, category: TagCategory) -> impl Iterator<Item = &str> {
        self.tags
            .iter()
            .filter(move |(c, _)| *c == category)
            .map(|(_, v)| v.as_str())
    }
}

/// Result of a tolerant parse: good rows, per-line errors and a count of
/// tags dropped for having an unknown category.
#[derive(Debug, Default)]
pub struct ParseReport {
    pub records: Vec<TrackRecord>,
    pub errors: Vec<IngestError>,
    pub unknown_category_tags: usize,
}

/// Parses the dataset TSV. Malformed rows are collected into
/// [`ParseReport::errors`] and skipped; only a missing header or an I/O
/// failure aborts the parse.
pub fn parse_jamendo_tsv<R: BufRead>(reader: R) -> Result<ParseReport, IngestError> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(IngestError::MissingHeader),
        }
    };
    if !header
        .trim_start_matches('\u{feff}')
        .starts_with("TRACK_ID")
    {
        return Err(IngestError::MissingHeader);
    }

    let mut report = ParseReport::default();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(&line, line_no, &mut report.unknown_category_tags) {
            Ok(record) => report.records.push(record),
            Err(e) => report.errors.push(e),
        }
    }
    if report.unknown_category_tags > 0 {
        log::warn!(
            "dropped {} tags with unknown categories",
            report.unknown_category_tags
        );
    }
    Ok(report)
}

fn parse_row(line: &str, line_no: usize, unknown: &mut usize) -> Result<TrackRecord, IngestError> {
    let malformed = |reason: String| IngestError::MalformedLine {
        line: line_no,
        reason,
    };
    let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
    if fields.len() < MIN_FIELDS {
        return Err(malformed(format!(
            "expected at least {MIN_FIELDS} fields, found {}",
            fields.len()
        )));
    }
    let track_id = fields[0].trim();
    if track_id.is_empty() {
        return Err(malformed("empty TRACK_ID".into()));
    }
    let duration_s: f64 = fields[4]
        .trim()
        .parse()
        .map_err(|_| malformed(format!("bad duration `{}`", fields[4])))?;
    if !(duration_s.is_finite() && duration_s >= 0.0) {
        return Err(malformed(format!("bad duration `{}`", fields[4])));
    }

    let mut tags = Vec::new();
    let mut dropped = 0;
    for raw in &fields[5..] {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let (category, value) = raw
            .split_once("---")
            .ok_or_else(|| malformed(format!("tag `{raw}` lacks `---`")))?;
        match TagCategory::parse(category) {
            Some(c) => tags.push((c, value.to_ascii_lowercase())),
            None => dropped += 1,
        }
    }
    *unknown += dropped;
    Ok(TrackRecord {
        track_id: track_id.to_string(),
        duration_s,
        tags,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MoodStats {
    pub track_count: u64,
    pub instrument: BTreeMap<String, f64>,
    pub genre: BTreeMap<String, f64>,
}

impl MoodStats {
    pub fn distribution(&self, category: TagCategory) -> &BTreeMap<String, f64> {
        match category {
            TagCategory::Instrument => &self.instrument,
            TagCategory::Genre => &self.genre,
            TagCategory::MoodTheme => panic!("moods have no mood distribution"),
        }
    }
}

/// Per-mood empirical distributions of instrument and genre labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TagStats {
    pub per_mood: BTreeMap<String, MoodStats>,
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    format_version: u32,
    #[serde(default)]
    moods: BTreeMap<String, MoodStats>,
}

#[derive(Default)]
struct MoodCounts {
    tracks: u64,
    with_instrument: u64,
    with_genre: u64,
    instrument: ShareCounts,
    genre: ShareCounts,
}

/// label → (tags on the track → number of such tracks). Keeping integer
/// counts per share size makes the final sums independent of record order.
type ShareCounts = BTreeMap<String, BTreeMap<usize, u64>>;

fn add_shares(counts: &mut ShareCounts, labels: &BTreeSet<&str>) {
    for &label in labels {
        *counts
            .entry(label.to_string())
            .or_default()
            .entry(labels.len())
            .or_default() += 1;
    }
}

/// Conditional instrument and genre distributions per mood.
///
/// Every track with the mood and at least one tag of a category carries
/// unit mass for that category, split equally over its distinct labels; a
/// track with `k` instruments adds `1/k` to each. The distribution divides
/// by the number of such tracks, so it sums to one. With one tag per track
/// this is the plain co-occurrence frequency.
pub fn compute_tag_stats(records: &[TrackRecord]) -> TagStats {
    let mut counts: BTreeMap<&str, MoodCounts> = BTreeMap::new();
    for record in records {
        let moods: BTreeSet<&str> = record.values(TagCategory::MoodTheme).collect();
        let instruments: BTreeSet<&str> = record.values(TagCategory::Instrument).collect();
        let genres: BTreeSet<&str> = record.values(TagCategory::Genre).collect();
        for mood in moods {
            let c = counts.entry(mood).or_default();
            c.tracks += 1;
            if !instruments.is_empty() {
                c.with_instrument += 1;
                add_shares(&mut c.instrument, &instruments);
            }
            if !genres.is_empty() {
                c.with_genre += 1;
                add_shares(&mut c.genre, &genres);
            }
        }
    }

    let normalize = |m: ShareCounts, total: u64| -> BTreeMap<String, f64> {
        m.into_iter()
            .map(|(label, shares)| {
                let mass: f64 = shares.iter().map(|(&k, &n)| n as f64 / k as f64).sum();
                (label, mass / total as f64)
            })
            .collect()
    };
    let per_mood = counts
        .into_iter()
        .map(|(mood, c)| {
            let stats = MoodStats {
                track_count: c.tracks,
                instrument: normalize(c.instrument, c.with_instrument),
                genre: normalize(c.genre, c.with_genre),
            };
            (mood.to_string(), stats)
        })
        .collect();
    TagStats { per_mood }
}

impl TagStats {
    pub fn get(&self, mood: &str) -> Option<&MoodStats> {
        self.per_mood.get(mood)
    }

    pub fn track_count(&self, mood: &str) -> u64 {
        self.per_mood.get(mood).map_or(0, |m| m.track_count)
    }

    pub fn to_toml(&self) -> String {
        let file = StatsFile {
            format_version: STATS_FORMAT_VERSION,
            moods: self.per_mood.clone(),
        };
        toml::to_string(&file).expect("stats serialize to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, IngestError> {
        let file: StatsFile =
            toml::from_str(text).map_err(|e| IngestError::InvalidStats(e.to_string()))?;
        if file.format_version != STATS_FORMAT_VERSION {
            return Err(IngestError::InvalidStats(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        let stats = TagStats {
            per_mood: file.moods,
        };
        stats.validate()?;
        Ok(stats)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), IngestError> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        for (mood, stats) in &self.per_mood {
            for (name, dist) in [("instrument", &stats.instrument), ("genre", &stats.genre)] {
                if dist.is_empty() {
                    continue;
                }
                if let Some((label, p)) = dist.iter().find(|(_, &p)| !(p > 0.0 && p <= 1.0)) {
                    return Err(IngestError::InvalidStats(format!(
                        "{mood}.{name}.{label} = {p} is not a probability"
                    )));
                }
                let sum: f64 = dist.values().sum();
                if (sum - 1.0).abs() > DIST_TOLERANCE {
                    return Err(IngestError::InvalidStats(format!(
                        "{mood}.{name} sums to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "TRACK_ID\tARTIST_ID\tALBUM_ID\tPATH\tDURATION\tTAGS\n";

    fn parse(body: &str) -> ParseReport {
        parse_jamendo_tsv(format!("{HEADER}{body}").as_bytes()).unwrap()
    }

    fn track(id: &str, tags: &[(TagCategory, &str)]) -> TrackRecord {
        TrackRecord {
            track_id: id.into(),
            duration_s: 100.0,
            tags: tags.iter().map(|(c, v)| (*c, v.to_string())).collect(),
        }
    }

    use TagCategory::*;

    #[test]
    fn parses_dataset_row() {
        let r = parse("t1\ta1\tal1\t48/948.mp3\t212.6\tmood/theme---happy\tgenre---pop\n");
        assert!(r.errors.is_empty());
        assert_eq!(
            r.records,
            vec![TrackRecord {
                track_id: "t1".into(),
                duration_s: 212.6,
                tags: vec![(MoodTheme, "happy".into()), (Genre, "pop".into())],
            }]
        );
    }

    #[test]
    fn empty_body_yields_no_records() {
        let r = parse("");
        assert!(r.records.is_empty() && r.errors.is_empty());
    }

    #[test]
    fn short_rows_are_reported_and_parsing_continues() {
        let r = parse("t1\ta1\tal1\tp\nt2\ta\tal\tp\t1.0\tgenre---rock\n");
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].track_id, "t2");
        assert!(matches!(
            r.errors[..],
            [IngestError::MalformedLine { line: 2, .. }]
        ));
    }

    #[test]
    fn tags_without_separator_are_malformed() {
        let r = parse("t1\ta\tal\tp\t1.0\tmood/theme-happy\n");
        assert!(r.records.is_empty());
        assert!(matches!(
            r.errors[..],
            [IngestError::MalformedLine { line: 2, .. }]
        ));
    }

    #[test]
    fn unknown_categories_are_dropped_and_counted() {
        let r = parse("t1\ta\tal\tp\t1.0\tmood/theme---sad\tlanguage---en\tdecade---80s\n");
        assert_eq!(r.unknown_category_tags, 2);
        assert_eq!(r.records[0].tags, vec![(MoodTheme, "sad".into())]);
    }

    #[test]
    fn header_is_required() {
        assert!(matches!(
            parse_jamendo_tsv("t1\ta\tal\tp\t1.0\n".as_bytes()),
            Err(IngestError::MissingHeader)
        ));
        assert!(matches!(
            parse_jamendo_tsv("".as_bytes()),
            Err(IngestError::MissingHeader)
        ));
    }

    #[test]
    fn identical_instruments_give_a_point_mass() {
        let stats = compute_tag_stats(&[
            track("a", &[(MoodTheme, "happy"), (Instrument, "piano")]),
            track("b", &[(MoodTheme, "happy"), (Instrument, "piano")]),
        ]);
        let happy = stats.get("happy").unwrap();
        assert_eq!(
            happy.instrument,
            BTreeMap::from([("piano".to_string(), 1.0)])
        );
        assert_eq!(happy.track_count, 2);
    }

    #[test]
    fn two_instruments_split_evenly() {
        let stats = compute_tag_stats(&[
            track("a", &[(MoodTheme, "happy"), (Instrument, "piano")]),
            track("b", &[(MoodTheme, "happy"), (Instrument, "guitar")]),
        ]);
        let happy = stats.get("happy").unwrap();
        assert_eq!(happy.instrument["piano"], 0.5);
        assert_eq!(happy.instrument["guitar"], 0.5);
        assert!(happy.genre.is_empty());
    }

    #[test]
    fn denominator_counts_tracks_with_the_category() {
        // the two-instrument track splits its mass; the track without
        // instruments stays out of the denominator
        let stats = compute_tag_stats(&[
            track(
                "a",
                &[
                    (MoodTheme, "dark"),
                    (Instrument, "piano"),
                    (Instrument, "cello"),
                ],
            ),
            track("b", &[(MoodTheme, "dark"), (Instrument, "piano")]),
            track("c", &[(MoodTheme, "dark"), (Genre, "ambient")]),
        ]);
        let dark = stats.get("dark").unwrap();
        assert_eq!(dark.track_count, 3);
        assert_eq!(dark.instrument["piano"], 0.75);
        assert_eq!(dark.instrument["cello"], 0.25);
        assert_eq!(dark.genre["ambient"], 1.0);
    }

    #[test]
    fn record_order_does_not_matter() {
        let mut records: Vec<TrackRecord> = (0..30)
            .map(|i| {
                let mut tags = vec![(MoodTheme, "calm")];
                let pool = ["piano", "cello", "pad", "flute", "harp", "voice", "bells"];
                for (j, p) in pool.iter().enumerate() {
                    if (i * 7 + j * 3) % (j + 2) == 0 {
                        tags.push((Instrument, *p));
                    }
                }
                track(&format!("t{i}"), &tags)
            })
            .collect();
        let forward = compute_tag_stats(&records);
        records.reverse();
        records.rotate_left(11);
        let shuffled = compute_tag_stats(&records);
        assert_eq!(forward, shuffled);
        let sum: f64 = forward.get("calm").unwrap().instrument.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip() {
        let stats = compute_tag_stats(&[
            track(
                "a",
                &[(MoodTheme, "happy"), (Instrument, "piano"), (Genre, "pop")],
            ),
            track("b", &[(MoodTheme, "happy"), (Instrument, "guitar")]),
            track("c", &[(MoodTheme, "happy"), (Instrument, "synthesizer")]),
            track("d", &[(MoodTheme, "calm")]),
        ]);
        let text = stats.to_toml();
        assert!(text.starts_with("format_version = 1"));
        assert_eq!(TagStats::from_toml(&text).unwrap(), stats);
    }

    #[test]
    fn invalid_stats_are_rejected() {
        let bad = "format_version = 1\n[moods.x]\ntrack_count = 1\n[moods.x.instrument]\npiano = 0.7\n[moods.x.genre]\n";
        assert!(matches!(
            TagStats::from_toml(bad),
            Err(IngestError::InvalidStats(_))
        ));
        let wrong_version = "format_version = 9\n";
        assert!(matches!(
            TagStats::from_toml(wrong_version),
            Err(IngestError::InvalidStats(_))
        ));
    }
}
