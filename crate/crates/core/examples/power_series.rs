//! Scales a 2019 power baseline by the year-on-year change in thermal
//! generation and applies the winter temperature correction.

use std::collections::BTreeMap;

use carbon_pulse::model::{date_range, CountryCode, Sector};
use carbon_pulse::power::{
    apply_temperature_adjustment, power_emission_series, shaped_baseline, thermal_aggregate, TemperatureAdjustment,
};
use chrono::{Datelike, NaiveDate};

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn main() -> carbon_pulse::Result<()> {
    let deu = CountryCode::new("DEU")?;
    let categories: Vec<String> = ["Coal", "Lignite", "Gas", "Oil"].map(String::from).to_vec();

    let per_type = |year: i32| {
        let mut out = BTreeMap::new();
        for day in date_range(d(year, 1, 1), d(year, 4, 30)) {
            let weekday = if day.weekday().num_days_from_monday() < 5 { 1.0 } else { 0.85 };
            // generation falls away from mid-March in 2020
            let lockdown = if year == 2020 && day >= d(2020, 3, 16) { 0.8 } else { 1.0 };
            let mut cats = BTreeMap::new();
            for (cat, mwh) in [("Coal", 180_000.0), ("Lignite", 260_000.0), ("Gas", 150_000.0), ("Wind", 300_000.0)] {
                cats.insert(cat.to_string(), mwh * weekday * lockdown);
            }
            out.insert(day, cats);
        }
        out
    };
    let gen19 = thermal_aggregate(deu, &per_type(2019), &categories)?;
    let gen20 = thermal_aggregate(deu, &per_type(2020), &categories)?;

    // 2019 window share of a 230 Mt annual power baseline, shaped by generation
    let baseline = shaped_baseline(deu, Sector::Power, 230.0e6, &gen19)?;
    let est = power_emission_series(&gen20, &gen19, &baseline)?;
    let adj = TemperatureAdjustment::new(d(2020, 1, 1), d(2020, 3, 31), -0.008)?;
    let adjusted = apply_temperature_adjustment(&est.series_2020, &adj)?;

    println!("window change {:+.2}%", 100.0 * est.change);
    println!("2019 window {:.2} Mt, 2020 window {:.2} Mt", baseline.sum() / 1e6, adjusted.sum() / 1e6);
    for day in [d(2020, 1, 15), d(2020, 3, 2), d(2020, 4, 15)] {
        println!("  {day}  {:>8.0} t", adjusted.get(day).unwrap());
    }
    Ok(())
}
