//! Power-sector daily emissions from cleaned generation.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::DailyGeneration;
use crate::model::{distribute_annual_to_daily, CountryCode, DailyEmissionSeries, Sector};
pub use crate::model::{align_dates, reference_day};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenerationKind {
    Thermal,
    Total,
}

/// Daily generation (MWh/day) of one country.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSeries {
    pub country: CountryCode,
    pub kind: GenerationKind,
    pub daily: BTreeMap<NaiveDate, f64>,
}

impl GenerationSeries {
    pub fn scaled(&self, factor: f64) -> GenerationSeries {
        GenerationSeries {
            daily: self.daily.iter().map(|(d, v)| (*d, v * factor)).collect(),
            ..self.clone()
        }
    }
}

/// Sums the configured thermal categories day by day.
pub fn thermal_aggregate(
    country: CountryCode,
    per_type: &DailyGeneration,
    categories: &[String],
) -> Result<GenerationSeries> {
    let mut daily = BTreeMap::new();
    let mut seen = false;
    for (date, by_cat) in per_type {
        let mut total = 0.0;
        for cat in categories {
            if let Some(v) = by_cat.get(cat) {
                total += v;
                seen = true;
            }
        }
        daily.insert(*date, total);
    }
    if !seen {
        return Err(Error::config(format!(
            "{country}: none of the thermal categories [{}] appear in the feed",
            categories.join(", ")
        )));
    }
    Ok(GenerationSeries {
        country,
        kind: GenerationKind::Thermal,
        daily,
    })
}

/// Sums every category, for countries without a thermal breakdown.
pub fn total_generation(country: CountryCode, per_type: &DailyGeneration) -> GenerationSeries {
    GenerationSeries {
        country,
        kind: GenerationKind::Total,
        daily: per_type
            .iter()
            .map(|(d, cats)| (*d, cats.values().sum()))
            .collect(),
    }
}

/// Splits an annual power baseline (tonnes) over the days of `gen2019`,
/// shaped by that year's generation: the window receives `n/365` of the year.
pub fn shaped_baseline(
    country: CountryCode,
    sector: Sector,
    annual_tonnes: f64,
    gen2019: &GenerationSeries,
) -> Result<DailyEmissionSeries> {
    let weights: Vec<f64> = gen2019.daily.values().copied().collect();
    let window_mass = annual_tonnes * weights.len() as f64 / 365.0;
    let values = distribute_annual_to_daily(window_mass, &weights)?;
    let start = *gen2019
        .daily
        .keys()
        .next()
        .ok_or_else(|| Error::domain(format!("{country}: empty 2019 generation")))?;
    DailyEmissionSeries::new(country, sector, start, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerEstimate {
    pub series_2020: DailyEmissionSeries,
    /// Σ2020 / Σ2019 − 1 over comparable, unflagged days.
    pub change: f64,
    /// Days where 2019 generation was zero but 2020 was not.
    pub flagged_days: Vec<NaiveDate>,
}

/// 2020 daily emissions: the 2019 baseline of the matching day scaled by the
/// ratio of generation.
pub fn power_emission_series(
    gen2020: &GenerationSeries,
    gen2019: &GenerationSeries,
    baseline_2019: &DailyEmissionSeries,
) -> Result<PowerEstimate> {
    let country = baseline_2019.country;
    let mut values = BTreeMap::new();
    let mut flagged = Vec::new();
    let (mut sum19, mut sum20) = (0.0, 0.0);
    for (date, g20) in &gen2020.daily {
        let r = reference_day(*date);
        let out_of_range = || Error::OutOfRange {
            date: r,
            start: baseline_2019.start_date(),
            end: baseline_2019.end_date(),
        };
        let base = baseline_2019.get(r).ok_or_else(out_of_range)?;
        let g19 = *gen2019.daily.get(&r).ok_or_else(out_of_range)?;
        let value = if g19 > 0.0 {
            base * g20 / g19
        } else {
            if *g20 > 0.0 {
                flagged.push(*date);
            }
            base
        };
        if align_dates(*date).is_some() && !(g19 == 0.0 && *g20 > 0.0) {
            sum19 += base;
            sum20 += value;
        }
        values.insert(*date, value);
    }
    let series_2020 = DailyEmissionSeries::from_map(country, baseline_2019.sector, &values)?;
    let change = if sum19 > 0.0 { sum20 / sum19 - 1.0 } else { 0.0 };
    Ok(PowerEstimate {
        series_2020,
        change,
        flagged_days: flagged,
    })
}

/// Multiplicative correction applied to 2020 power emissions inside a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureAdjustment {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub factor: f64,
}

impl TemperatureAdjustment {
    pub fn new(start: NaiveDate, end: NaiveDate, factor: f64) -> Result<Self> {
        if start > end {
            return Err(Error::config("temperature adjustment window ends before it starts"));
        }
        if !(factor.abs() < 0.1) {
            return Err(Error::config(format!(
                "temperature adjustment factor {factor} must be within ±0.1"
            )));
        }
        Ok(TemperatureAdjustment { start, end, factor })
    }

    /// The January–March winter correction of −0.8%.
    pub fn winter_2020() -> Self {
        TemperatureAdjustment {
            start: NaiveDate::from_ymd_opt(2020, 1, 1).expect("date"),
            end: NaiveDate::from_ymd_opt(2020, 3, 31).expect("date"),
            factor: -0.008,
        }
    }
}

pub fn apply_temperature_adjustment(
    series: &DailyEmissionSeries,
    adj: &TemperatureAdjustment,
) -> Result<DailyEmissionSeries> {
    if adj.start < series.start_date() || adj.end > series.end_date() {
        return Err(Error::OutOfRange {
            date: if adj.start < series.start_date() { adj.start } else { adj.end },
            start: series.start_date(),
            end: series.end_date(),
        });
    }
    series.map_values(|d, v| {
        if d >= adj.start && d <= adj.end {
            v * (1.0 + adj.factor)
        } else {
            v
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn c() -> CountryCode {
        CountryCode::new("IND").unwrap()
    }

    fn gen(start: NaiveDate, vals: &[f64]) -> GenerationSeries {
        GenerationSeries {
            country: c(),
            kind: GenerationKind::Thermal,
            daily: vals
                .iter()
                .enumerate()
                .map(|(i, v)| (start + chrono::Duration::days(i as i64), *v))
                .collect(),
        }
    }

    #[test]
    fn thermal_sum_over_configured_categories() {
        let mut per_type = DailyGeneration::new();
        per_type.insert(
            d(2020, 1, 1),
            [("Coal", 100.0), ("Lignite", 20.0), ("Gas", 30.0), ("Hydro", 500.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        );
        let cats: Vec<String> = ["Coal", "Lignite", "Gas"].iter().map(|s| s.to_string()).collect();
        let g = thermal_aggregate(c(), &per_type, &cats).unwrap();
        assert_eq!(g.daily[&d(2020, 1, 1)], 150.0);
        let g = thermal_aggregate(c(), &per_type, &cats[..1]).unwrap();
        assert_eq!(g.daily[&d(2020, 1, 1)], 100.0);
        assert!(thermal_aggregate(c(), &per_type, &["Nuclear".to_string()]).is_err());
        assert_eq!(total_generation(c(), &per_type).daily[&d(2020, 1, 1)], 650.0);
    }

    #[test]
    fn date_alignment() {
        assert_eq!(align_dates(d(2020, 3, 15)), Some(d(2019, 3, 15)));
        assert_eq!(align_dates(d(2020, 1, 1)), Some(d(2019, 1, 1)));
        assert_eq!(align_dates(d(2020, 2, 29)), None);
        assert_eq!(reference_day(d(2020, 2, 29)), d(2019, 2, 28));
    }

    fn baseline(vals: &[f64]) -> DailyEmissionSeries {
        DailyEmissionSeries::new(c(), Sector::Power, d(2019, 1, 1), vals.to_vec()).unwrap()
    }

    #[test]
    fn identical_generation_means_no_change() {
        let g = [10.0, 12.0, 9.0];
        let est = power_emission_series(&gen(d(2020, 1, 1), &g), &gen(d(2019, 1, 1), &g), &baseline(&[5.0, 6.0, 4.0])).unwrap();
        assert_eq!(est.change, 0.0);
        assert_eq!(est.series_2020.values(), &[5.0, 6.0, 4.0]);
    }

    #[test]
    fn halved_generation_halves_emissions() {
        let est = power_emission_series(
            &gen(d(2020, 1, 1), &[5.0, 6.0]),
            &gen(d(2019, 1, 1), &[10.0, 12.0]),
            &baseline(&[5.0, 6.0]),
        )
        .unwrap();
        assert_relative_eq!(est.change, -0.5, max_relative = 1e-12);
    }

    #[test]
    fn change_is_a_ratio_of_sums() {
        // day ratios 0.5 and 2.0 average to 1.25, but mass-weighted they give 0.6
        let est = power_emission_series(
            &gen(d(2020, 1, 1), &[50.0, 2.0]),
            &gen(d(2019, 1, 1), &[100.0, 1.0]),
            &baseline(&[100.0, 1.0]),
        )
        .unwrap();
        assert_relative_eq!(est.change, (50.0 + 2.0) / 101.0 - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_generation_day_is_flagged() {
        let est = power_emission_series(
            &gen(d(2020, 1, 1), &[10.0, 10.0]),
            &gen(d(2019, 1, 1), &[0.0, 10.0]),
            &baseline(&[3.0, 5.0]),
        )
        .unwrap();
        assert_eq!(est.flagged_days, vec![d(2020, 1, 1)]);
        assert_eq!(est.change, 0.0);
    }

    #[test]
    fn leap_day_is_kept_in_raw_series_only() {
        let start20 = d(2020, 2, 28);
        let est = power_emission_series(
            &gen(start20, &[10.0, 20.0, 10.0]),
            &gen(d(2019, 2, 28), &[10.0, 10.0]),
            &DailyEmissionSeries::new(c(), Sector::Power, d(2019, 2, 28), vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(est.series_2020.values(), &[1.0, 2.0, 1.0]);
        assert_eq!(est.change, 0.0);
    }

    #[test]
    fn temperature_adjustment_window() {
        let s = DailyEmissionSeries::new(c(), Sector::Power, d(2020, 1, 1), vec![100.0; 121]).unwrap();
        let adj = TemperatureAdjustment::winter_2020();
        let out = apply_temperature_adjustment(&s, &adj).unwrap();
        assert_relative_eq!(out.get(d(2020, 2, 1)).unwrap(), 99.2, max_relative = 1e-12);
        assert_eq!(out.get(d(2020, 4, 1)).unwrap(), 100.0);
        let zero = TemperatureAdjustment::new(d(2020, 1, 1), d(2020, 3, 31), 0.0).unwrap();
        assert_eq!(apply_temperature_adjustment(&s, &zero).unwrap(), s);
        let short = DailyEmissionSeries::new(c(), Sector::Power, d(2020, 1, 1), vec![1.0; 10]).unwrap();
        assert!(apply_temperature_adjustment(&short, &adj).is_err());
        assert!(TemperatureAdjustment::new(d(2020, 1, 1), d(2020, 3, 31), 0.2).is_err());
    }

    #[test]
    fn shaped_baseline_carries_window_share() {
        let g = gen(d(2019, 1, 1), &[1.0, 2.0, 1.0]);
        let b = shaped_baseline(c(), Sector::Power, 365.0, &g).unwrap();
        assert_relative_eq!(b.sum(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(b.values()[1], 1.5, max_relative = 1e-12);
    }
}
