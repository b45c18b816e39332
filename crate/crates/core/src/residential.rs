//! Residential and commercial emissions: heating follows population-weighted
//! heating degree days, cooking stays flat.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{date_range, CountryCode, DailyEmissionSeries, Sector, comparison_totals};

pub const DEFAULT_HDD_BASE_C: f64 = 18.0;

/// Grid cell key with coordinates rounded to 1e-6 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey(i64, i64);

impl CellKey {
    pub fn new(lat: f64, lon: f64) -> Self {
        CellKey((lat * 1e6).round() as i64, (lon * 1e6).round() as i64)
    }
}

/// 2 m air temperature (°C) per cell and day.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemperatureGrid {
    pub days: BTreeMap<NaiveDate, BTreeMap<CellKey, f64>>,
}

impl TemperatureGrid {
    pub fn insert(&mut self, date: NaiveDate, lat: f64, lon: f64, t2m: f64) -> Result<()> {
        if !t2m.is_finite() {
            return Err(Error::domain(format!("{date} ({lat}, {lon}): temperature {t2m}")));
        }
        if self.days.entry(date).or_default().insert(CellKey::new(lat, lon), t2m).is_some() {
            return Err(Error::domain(format!("{date} ({lat}, {lon}): duplicate temperature")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationCell {
    pub cell: CellKey,
    pub country: CountryCode,
    pub population: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopulationGrid {
    pub cells: Vec<PopulationCell>,
}

impl PopulationGrid {
    pub fn push(&mut self, lat: f64, lon: f64, country: CountryCode, population: f64) -> Result<()> {
        if !(population.is_finite() && population >= 0.0) {
            return Err(Error::domain(format!("({lat}, {lon}): population {population} must be ≥ 0")));
        }
        self.cells.push(PopulationCell {
            cell: CellKey::new(lat, lon),
            country,
            population,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidentialSplit {
    pub country: CountryCode,
    pub cooking_share: f64,
    pub heating_share: f64,
}

impl ResidentialSplit {
    pub fn new(country: CountryCode, cooking_share: f64, heating_share: f64) -> Result<Self> {
        if cooking_share < 0.0 || heating_share < 0.0 || (cooking_share + heating_share - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "{country}: cooking {cooking_share} and heating {heating_share} shares must be ≥ 0 and sum to 1"
            )));
        }
        Ok(ResidentialSplit {
            country,
            cooking_share,
            heating_share,
        })
    }
}

/// Σ pop·max(0, base − t) / Σ pop over the country's cells, per day.
pub fn population_weighted_hdd(
    temps: &TemperatureGrid,
    pop: &PopulationGrid,
    country: CountryCode,
    base_c: f64,
) -> Result<BTreeMap<NaiveDate, f64>> {
    let cells: Vec<&PopulationCell> = pop.cells.iter().filter(|c| c.country == country).collect();
    let total: f64 = cells.iter().map(|c| c.population).sum();
    if !(total > 0.0) {
        return Err(Error::domain(format!("{country}: zero total population")));
    }
    let mut out = BTreeMap::new();
    for (date, grid) in &temps.days {
        let mut acc = 0.0;
        for c in &cells {
            if c.population == 0.0 {
                continue;
            }
            let t = grid.get(&c.cell).ok_or_else(|| {
                Error::domain(format!("{country} {date}: no temperature for a populated cell"))
            })?;
            acc += c.population * (base_c - t).max(0.0);
        }
        out.insert(*date, acc / total);
    }
    Ok(out)
}

/// Residential emissions (tonnes/day) over `start..=end`: heating scaled by
/// `hdd(day)/hdd_year_total`, plus a flat cooking floor.
pub fn heating_emission_series(
    country: CountryCode,
    annual_heating: f64,
    annual_cooking: f64,
    hdd_daily: &BTreeMap<NaiveDate, f64>,
    hdd_year_total: f64,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<DailyEmissionSeries> {
    if annual_heating < 0.0 || annual_cooking < 0.0 {
        return Err(Error::domain(format!("{country}: negative residential baseline")));
    }
    if annual_heating > 0.0 && !(hdd_year_total > 0.0) {
        return Err(Error::config(format!(
            "{country}: reference year has no heating degree days; set its heating share to 0"
        )));
    }
    let cooking = annual_cooking / 365.0;
    let mut values = Vec::new();
    for day in date_range(start, end) {
        let heating = if annual_heating > 0.0 {
            let hdd = hdd_daily
                .get(&day)
                .ok_or_else(|| Error::domain(format!("{country}: no HDD for {day}")))?;
            annual_heating * hdd / hdd_year_total
        } else {
            0.0
        };
        values.push(heating + cooking);
    }
    DailyEmissionSeries::new(country, Sector::Residential, start, values)
}

/// Estimated residential change next to the change in delivered gas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GasComparison {
    pub country: CountryCode,
    pub emission_change: f64,
    pub gas_change: f64,
}

/// Verification against daily gas consumption; not an estimator input.
pub fn compare_with_gas(
    s2019: &DailyEmissionSeries,
    s2020: &DailyEmissionSeries,
    gas2019: &DailyEmissionSeries,
    gas2020: &DailyEmissionSeries,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<GasComparison> {
    let (e19, e20) = comparison_totals(s2019, s2020, start, end);
    let (g19, g20) = comparison_totals(gas2019, gas2020, start, end);
    if !(e19 > 0.0 && g19 > 0.0) {
        return Err(Error::domain(format!("{}: empty comparison window", s2019.country)));
    }
    Ok(GasComparison {
        country: s2019.country,
        emission_change: e20 / e19 - 1.0,
        gas_change: g20 / g19 - 1.0,
    })
}
