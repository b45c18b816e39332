//! Population-weighted heating degree days driving a daily residential
//! series with a flat cooking floor.

use carbon_pulse::model::{date_range, CountryCode};
use carbon_pulse::residential::{heating_emission_series, population_weighted_hdd, PopulationGrid, TemperatureGrid};
use chrono::{Datelike, NaiveDate};

fn main() -> carbon_pulse::Result<()> {
    let deu = CountryCode::new("DEU")?;
    let mut pop = PopulationGrid::default();
    pop.push(52.5, 13.5, deu, 6.0e6)?;
    pop.push(48.0, 11.5, deu, 4.0e6)?;

    let (start, end) = (NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(), NaiveDate::from_ymd_opt(2019, 12, 31).unwrap());
    let mut temps = TemperatureGrid::default();
    for day in date_range(start, end) {
        let seasonal = 9.5 - 10.0 * (2.0 * std::f64::consts::PI * (day.ordinal() as f64 + 10.0) / 365.0).cos();
        temps.insert(day, 52.5, 13.5, seasonal)?;
        temps.insert(day, 48.0, 11.5, seasonal - 1.5)?;
    }
    let hdd = population_weighted_hdd(&temps, &pop, deu, 18.0)?;
    let year_total: f64 = hdd.values().sum();

    // 90 Mt a year, 60% of it heating
    let series = heating_emission_series(deu, 54.0e6, 36.0e6, &hdd, year_total, start, end)?;
    println!("HDD year total {year_total:.0}, series sums to {:.3} Mt", series.sum() / 1e6);
    for m in [1, 4, 7, 10] {
        let day = NaiveDate::from_ymd_opt(2019, m, 15).unwrap();
        println!("  {day}  HDD {:>5.1}  {:>8.0} t", hdd[&day], series.get(day).unwrap());
    }
    Ok(())
}
