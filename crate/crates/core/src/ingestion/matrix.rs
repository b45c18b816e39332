use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime, Timelike};

use super::clean::{clean_column, ColumnCleaning};
use super::feed::{RawObservation, Reading};
use crate::error::{Error, Result};

/// Observations after duplicate averaging, with the number of rows folded
/// into each (date, category).
#[derive(Debug, Clone, Default)]
pub struct Deduplicated {
    pub observations: Vec<RawObservation>,
    pub duplicates: BTreeMap<(NaiveDate, String), usize>,
}

/// Collapses observations sharing a (timestamp, category) key. Values are
/// averaged over the copies that carry one; if none does, a single
/// non-value reading survives (NotANumber wins over Missing).
pub fn resolve_duplicates(observations: Vec<RawObservation>) -> Deduplicated {
    let mut groups: BTreeMap<(NaiveDateTime, String), Vec<RawObservation>> = BTreeMap::new();
    for obs in observations {
        groups
            .entry((obs.timestamp, obs.category.clone()))
            .or_default()
            .push(obs);
    }
    let mut out = Deduplicated::default();
    for ((ts, category), mut copies) in groups {
        if copies.len() == 1 {
            out.observations.push(copies.pop().expect("one copy"));
            continue;
        }
        *out.duplicates.entry((ts.date(), category)).or_default() += copies.len() - 1;
        let values: Vec<f64> = copies.iter().filter_map(|o| o.reading.value()).collect();
        let reading = if !values.is_empty() {
            Reading::Value(values.iter().sum::<f64>() / values.len() as f64)
        } else if copies.iter().any(|o| o.reading == Reading::NotANumber) {
            Reading::NotANumber
        } else {
            Reading::Missing
        };
        let mut first = copies.swap_remove(0);
        first.reading = reading;
        out.observations.push(first);
    }
    out
}

/// One day of sub-daily generation, one column per production category.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyPowerMatrix {
    pub date: NaiveDate,
    pub interval_minutes: u32,
    pub columns: BTreeMap<String, Vec<Reading>>,
}

impl DailyPowerMatrix {
    pub fn sampling_times(&self) -> usize {
        (24 * 60 / self.interval_minutes) as usize
    }
}

/// Arranges observations into per-day matrices. Slots without a row are Missing.
pub fn build_daily_matrices(observations: &[RawObservation]) -> Result<Vec<DailyPowerMatrix>> {
    let mut days: BTreeMap<NaiveDate, DailyPowerMatrix> = BTreeMap::new();
    for obs in observations {
        let date = obs.timestamp.date();
        let matrix = days.entry(date).or_insert_with(|| DailyPowerMatrix {
            date,
            interval_minutes: obs.interval_minutes,
            columns: BTreeMap::new(),
        });
        if matrix.interval_minutes != obs.interval_minutes {
            return Err(Error::domain(format!(
                "{}: mixed sampling intervals on {date} ({} and {} minutes)",
                obs.source_id, matrix.interval_minutes, obs.interval_minutes
            )));
        }
        let slots = matrix.sampling_times();
        let minute = obs.timestamp.hour() * 60 + obs.timestamp.minute();
        if minute % obs.interval_minutes != 0 || obs.timestamp.second() != 0 {
            return Err(Error::domain(format!(
                "{}: timestamp {} is not aligned to its {}-minute interval",
                obs.source_id, obs.timestamp, obs.interval_minutes
            )));
        }
        let column = matrix
            .columns
            .entry(obs.category.clone())
            .or_insert_with(|| vec![Reading::Missing; slots]);
        column[(minute / obs.interval_minutes) as usize] = obs.reading;
    }
    Ok(days.into_values().collect())
}

/// Per-column account of duplicates, anomalies and missing slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanReportEntry {
    pub date: NaiveDate,
    pub category: String,
    pub duplicates_averaged: usize,
    pub cleaning: ColumnCleaning,
    /// The column held no usable slot and was left out of the daily total.
    pub omitted: bool,
}

pub type CleanReport = Vec<CleanReportEntry>;

/// Cleans every column of a matrix.
pub fn clean_matrix(matrix: &DailyPowerMatrix) -> Result<(DailyPowerMatrix, Vec<(String, ColumnCleaning)>)> {
    let mut cleaned = matrix.clone();
    let mut notes = Vec::new();
    for (category, column) in cleaned.columns.iter_mut() {
        let (col, rep) = clean_column(column)?;
        *column = col;
        notes.push((category.clone(), rep));
    }
    Ok((cleaned, notes))
}

/// Daily generation per category: the mean over reported slots times the
/// number of slots per day. NotANumber slots left after cleaning count as
/// zero. Fully missing columns are returned separately.
pub fn aggregate_daily(matrix: &DailyPowerMatrix) -> (BTreeMap<String, f64>, Vec<String>) {
    let n = matrix.sampling_times() as f64;
    let mut totals = BTreeMap::new();
    let mut omitted = Vec::new();
    for (category, column) in &matrix.columns {
        // shifted mean, so a constant column yields its value exactly
        let shift = column
            .iter()
            .find_map(|r| if let Reading::Value(v) = r { Some(*v) } else { None })
            .unwrap_or(0.0);
        let mut dev = 0.0;
        let mut count = 0usize;
        for r in column {
            match r {
                Reading::Value(v) => {
                    dev += v - shift;
                    count += 1;
                }
                Reading::NotANumber => {
                    dev -= shift;
                    count += 1;
                }
                Reading::Missing => {}
            }
        }
        if count == 0 {
            omitted.push(category.clone());
        } else {
            totals.insert(category.clone(), (shift + dev / count as f64) * n);
        }
    }
    (totals, omitted)
}

/// Daily generation per category for a whole feed.
pub type DailyGeneration = BTreeMap<NaiveDate, BTreeMap<String, f64>>;

/// Duplicates → matrices → cleaning → daily totals, with the clean report.
pub fn daily_generation(observations: Vec<RawObservation>) -> Result<(DailyGeneration, CleanReport)> {
    let dedup = resolve_duplicates(observations);
    let matrices = build_daily_matrices(&dedup.observations)?;
    let mut generation = DailyGeneration::new();
    let mut report = CleanReport::new();
    for matrix in matrices {
        let (cleaned, notes) = clean_matrix(&matrix)?;
        let (totals, omitted) = aggregate_daily(&cleaned);
        for (category, cleaning) in notes {
            report.push(CleanReportEntry {
                date: matrix.date,
                duplicates_averaged: dedup
                    .duplicates
                    .get(&(matrix.date, category.clone()))
                    .copied()
                    .unwrap_or(0),
                omitted: omitted.contains(&category),
                category,
                cleaning,
            });
        }
        generation.insert(matrix.date, totals);
    }
    Ok((generation, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(h: u32, m: u32, interval: u32, cat: &str, r: Reading) -> RawObservation {
        RawObservation {
            source_id: "t".into(),
            timestamp: NaiveDate::from_ymd_opt(2020, 3, 1)
                .unwrap()
                .and_hms_opt(h, m, 0)
                .unwrap(),
            interval_minutes: interval,
            category: cat.into(),
            reading: r,
        }
    }

    #[test]
    fn duplicates_average_over_values() {
        let d = resolve_duplicates(vec![
            obs(0, 0, 60, "Coal", Reading::Value(10.0)),
            obs(0, 0, 60, "Coal", Reading::Value(20.0)),
            obs(1, 0, 60, "Coal", Reading::Value(10.0)),
            obs(1, 0, 60, "Coal", Reading::NotANumber),
            obs(2, 0, 60, "Coal", Reading::Missing),
            obs(2, 0, 60, "Coal", Reading::NotANumber),
            obs(3, 0, 60, "Coal", Reading::Value(4.0)),
        ]);
        let r: Vec<_> = d.observations.iter().map(|o| o.reading).collect();
        assert_eq!(
            r,
            vec![Reading::Value(15.0), Reading::Value(10.0), Reading::NotANumber, Reading::Value(4.0)]
        );
        let date = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        assert_eq!(d.duplicates[&(date, "Coal".to_string())], 3);
    }

    #[test]
    fn constant_columns_aggregate_exactly() {
        let hourly: Vec<_> = (0..24).map(|h| obs(h, 0, 60, "Gas", Reading::Value(100.0))).collect();
        let m = build_daily_matrices(&hourly).unwrap();
        assert_eq!(aggregate_daily(&m[0]).0["Gas"], 2400.0);

        let quarter: Vec<_> = (0..96)
            .map(|i| obs(i / 4, (i % 4) * 15, 15, "Gas", Reading::Value(100.0)))
            .collect();
        let m = build_daily_matrices(&quarter).unwrap();
        assert_eq!(m[0].sampling_times(), 96);
        assert_eq!(aggregate_daily(&m[0]).0["Gas"], 9600.0);
    }

    #[test]
    fn cleaned_example_column_scales_to_day() {
        let base = [10.0, 11.0, 9.0, 10.0, 50.0, 10.0, 11.0, 9.0];
        let rows: Vec<_> = (0..24)
            .map(|h| obs(h, 0, 60, "Coal", Reading::Value(base[h as usize % 8])))
            .collect();
        let (gen, report) = daily_generation(rows).unwrap();
        let day = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        assert!((gen[&day]["Coal"] - 240.0).abs() < 1e-9);
        assert_eq!(report[0].cleaning.anomalies_replaced, 3);
    }

    #[test]
    fn fully_missing_column_is_omitted() {
        let mut rows: Vec<_> = (0..24).map(|h| obs(h, 0, 60, "Gas", Reading::Value(1.0))).collect();
        rows.push(obs(0, 0, 60, "Hydro", Reading::Missing));
        let (gen, report) = daily_generation(rows).unwrap();
        let day = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        assert!(!gen[&day].contains_key("Hydro"));
        assert!(report.iter().any(|e| e.category == "Hydro" && e.omitted));
    }

    #[test]
    fn mixed_intervals_rejected() {
        let rows = vec![obs(0, 0, 60, "Gas", Reading::Value(1.0)), obs(0, 30, 30, "Gas", Reading::Value(1.0))];
        assert!(build_daily_matrices(&rows).is_err());
    }
}
