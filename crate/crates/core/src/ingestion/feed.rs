use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Sub-daily sampling intervals a feed may declare, in minutes.
pub const ALLOWED_INTERVALS: [u32; 3] = [15, 30, 60];

/// One slot of a generation feed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reading {
    Value(f64),
    /// No data was reported (`n/e` or an empty cell).
    Missing,
    /// A reported cell that holds no number (`N/A`, `void`, garbage).
    NotANumber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    Value,
    Missing,
    NotANumber,
}

impl Reading {
    pub fn quality(&self) -> Quality {
        match self {
            Reading::Value(_) => Quality::Value,
            Reading::Missing => Quality::Missing,
            Reading::NotANumber => Quality::NotANumber,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Reading::Value(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawObservation {
    pub source_id: String,
    pub timestamp: NaiveDateTime,
    pub interval_minutes: u32,
    pub category: String,
    pub reading: Reading,
}

/// Column layout and sentinel vocabulary of one feed source.
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct FeedSchema {
    #[serde(default = "default_timestamp")]
    pub timestamp: String,
    #[serde(default = "default_interval")]
    pub interval: String,
    #[serde(default = "default_category")]
    pub category: String,
    #[serde(default = "default_value")]
    pub value: String,
    #[serde(default = "default_timestamp_format")]
    pub timestamp_format: String,
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
    #[serde(default = "default_nan")]
    pub not_a_number: Vec<String>,
}

fn default_timestamp() -> String {
    "timestamp_utc".into()
}
fn default_interval() -> String {
    "interval_min".into()
}
fn default_category() -> String {
    "category".into()
}
fn default_value() -> String {
    "value".into()
}
fn default_timestamp_format() -> String {
    "%Y-%m-%dT%H:%M:%SZ".into()
}
fn default_missing() -> Vec<String> {
    vec!["n/e".into()]
}
fn default_nan() -> Vec<String> {
    vec!["N/A".into(), "void".into()]
}

impl Default for FeedSchema {
    fn default() -> Self {
        FeedSchema {
            timestamp: default_timestamp(),
            interval: default_interval(),
            category: default_category(),
            value: default_value(),
            timestamp_format: default_timestamp_format(),
            missing: default_missing(),
            not_a_number: default_nan(),
        }
    }
}

impl FeedSchema {
    fn classify(&self, cell: Option<&str>) -> Reading {
        let Some(cell) = cell else {
            return Reading::Missing;
        };
        // sentinels are matched bit-exactly, before any trimming
        if self.missing.iter().any(|m| m == cell) {
            return Reading::Missing;
        }
        if self.not_a_number.iter().any(|m| m == cell) {
            return Reading::NotANumber;
        }
        let trimmed = cell.trim();
        if trimmed.is_empty() {
            return Reading::Missing;
        }
        match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Reading::Value(v),
            _ => Reading::NotANumber,
        }
    }
}

/// Named feed schemas. `standard` is always available; a registry file can
/// add more so new sources need no code change.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedSchemaRegistry {
    schemas: BTreeMap<String, FeedSchema>,
}

impl Default for FeedSchemaRegistry {
    fn default() -> Self {
        let mut schemas = BTreeMap::new();
        schemas.insert("standard".to_string(), FeedSchema::default());
        FeedSchemaRegistry { schemas }
    }
}

impl FeedSchemaRegistry {
    /// Parses a TOML registry of the form `[schemas.<id>] ...`.
    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            #[serde(default)]
            schemas: BTreeMap<String, FeedSchema>,
        }
        let file: File =
            toml::from_str(text).map_err(|e| Error::config(format!("feed schema registry: {e}")))?;
        let mut reg = FeedSchemaRegistry::default();
        reg.schemas.extend(file.schemas);
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| Error::MissingFixture(path.to_path_buf()))?;
        FeedSchemaRegistry::from_toml(&text)
    }

    pub fn get(&self, id: &str) -> Result<&FeedSchema> {
        self.schemas
            .get(id)
            .ok_or_else(|| Error::config(format!("unknown feed schema {id:?}")))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.schemas.keys().map(String::as_str)
    }
}

/// Reads a power feed file; every data row becomes one observation.
pub fn parse_power_feed(
    path: &Path,
    schema_id: &str,
    registry: &FeedSchemaRegistry,
) -> Result<Vec<RawObservation>> {
    let schema = registry.get(schema_id)?;
    let file = std::fs::File::open(path).map_err(|_| Error::MissingFixture(path.to_path_buf()))?;
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_feed_reader(file, &path.display().to_string(), &source_id, schema)
}

pub fn parse_feed_reader<R: std::io::Read>(
    reader: R,
    file_label: &str,
    source_id: &str,
    schema: &FeedSchema,
) -> Result<Vec<RawObservation>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let expected = [&schema.timestamp, &schema.interval, &schema.category, &schema.value];
    let (Some(ts_col), Some(iv_col), Some(cat_col), Some(val_col)) = (
        find(&schema.timestamp),
        find(&schema.interval),
        find(&schema.category),
        find(&schema.value),
    ) else {
        return Err(Error::parse(
            file_label,
            1,
            format!(
                "malformed header, expected columns {}",
                expected.map(|s| s.as_str()).join(",")
            ),
        ));
    };

    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let ts_cell = record
            .get(ts_col)
            .ok_or_else(|| Error::parse(file_label, row, "missing timestamp"))?;
        let timestamp = NaiveDateTime::parse_from_str(ts_cell.trim(), &schema.timestamp_format)
            .map_err(|e| Error::parse(file_label, row, format!("bad timestamp {ts_cell:?}: {e}")))?;
        let interval_minutes: u32 = record
            .get(iv_col)
            .and_then(|s| s.trim().parse().ok())
            .filter(|m| ALLOWED_INTERVALS.contains(m))
            .ok_or_else(|| {
                Error::parse(file_label, row, "interval must be one of 15, 30 or 60 minutes")
            })?;
        let category = record
            .get(cat_col)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::parse(file_label, row, "missing category"))?
            .to_string();
        out.push(RawObservation {
            source_id: source_id.to_string(),
            timestamp,
            interval_minutes,
            category,
            reading: schema.classify(record.get(val_col)),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<RawObservation>> {
        parse_feed_reader(text.as_bytes(), "test.csv", "test", &FeedSchema::default())
    }

    #[test]
    fn hourly_day_parses_to_values() {
        let mut text = String::from("timestamp_utc,interval_min,category,value\n");
        for h in 0..24 {
            text.push_str(&format!("2020-01-01T{h:02}:00:00Z,60,Coal,{}\n", 100 + h));
        }
        let obs = parse(&text).unwrap();
        assert_eq!(obs.len(), 24);
        assert!(obs.iter().all(|o| o.reading.quality() == Quality::Value));
        assert_eq!(obs[5].reading, Reading::Value(105.0));
    }

    #[test]
    fn sentinels() {
        let text = "timestamp_utc,interval_min,category,value\n\
                    2020-01-01T00:00:00Z,60,Coal,n/e\n\
                    2020-01-01T01:00:00Z,60,Coal,N/A\n\
                    2020-01-01T02:00:00Z,60,Coal,void\n\
                    2020-01-01T03:00:00Z,60,Coal,\n\
                    2020-01-01T04:00:00Z,60,Coal,12x\n\
                    2020-01-01T05:00:00Z,60,Coal\n";
        let q: Vec<_> = parse(text).unwrap().iter().map(|o| o.reading).collect();
        assert_eq!(
            q,
            vec![
                Reading::Missing,
                Reading::NotANumber,
                Reading::NotANumber,
                Reading::Missing,
                Reading::NotANumber,
                Reading::Missing
            ]
        );
    }

    #[test]
    fn sentinels_are_case_sensitive() {
        let text = "timestamp_utc,interval_min,category,value\n2020-01-01T00:00:00Z,60,Coal,N/E\n";
        // not the missing sentinel, and not a number either
        assert_eq!(parse(text).unwrap()[0].reading, Reading::NotANumber);
    }

    #[test]
    fn malformed_header_names_expected_columns() {
        let err = parse("time,interval_min,category,value\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("timestamp_utc,interval_min,category,value"), "{msg}");
    }

    #[test]
    fn bad_interval_reports_row() {
        let err = parse("timestamp_utc,interval_min,category,value\n2020-01-01T00:00:00Z,60,C,1\n2020-01-01T00:00:00Z,20,C,1\n")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_schema_is_config_error() {
        let reg = FeedSchemaRegistry::default();
        let err = parse_power_feed(Path::new("/nonexistent.csv"), "eia", &reg).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn registry_file_adds_schemas() {
        let reg = FeedSchemaRegistry::from_toml(
            "[schemas.semicolon]\ntimestamp = \"ts\"\nvalue = \"mw\"\ntimestamp_format = \"%Y-%m-%d %H:%M\"\n",
        )
        .unwrap();
        let s = reg.get("semicolon").unwrap();
        assert_eq!(s.timestamp, "ts");
        assert_eq!(s.category, "category");
        assert!(reg.get("standard").is_ok());
        let obs = parse_feed_reader(
            "ts,interval_min,category,mw\n2020-01-01 00:30,30,Gas,7\n".as_bytes(),
            "x",
            "x",
            s,
        )
        .unwrap();
        assert_eq!(obs[0].reading, Reading::Value(7.0));
        assert_eq!(obs[0].interval_minutes, 30);
    }
}
