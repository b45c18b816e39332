//! Shared domain vocabulary: countries, sectors, fuels, inventories and
//! daily emission series.

mod baseline;
mod emission;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use baseline::{
    build_baseline_2019, distribute_annual_to_daily, map_edgar_sectors, DEFAULT_GROWTH_RATE,
};
pub use emission::{compute_emission, fuel_emission, inventory_emissions, EmissionFactor, FuelUse};

/// Tonnes per megatonne. Series are held in tonnes; tables print megatonnes.
pub const TONNES_PER_MT: f64 = 1.0e6;

/// ISO-3166 alpha-3 country code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    /// Placeholder used for emissions that belong to no single country
    /// (global bunkers, flights with an unknown endpoint).
    pub const WORLD: CountryCode = CountryCode(*b"WLD");

    pub fn new(code: &str) -> Result<Self> {
        let bytes = code.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_uppercase) {
            return Err(Error::domain(format!(
                "country code {code:?} is not three uppercase letters"
            )));
        }
        Ok(CountryCode([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn as_str(&self) -> &str {
        // constructed only from ASCII uppercase
        std::str::from_utf8(&self.0).expect("ascii country code")
    }

    pub fn region_group(&self) -> RegionGroup {
        CountryRegistry::builtin().region_of(*self)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CountryCode::new(s.trim())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CountryCode::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Reporting regions. Every country belongs to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionGroup {
    China,
    India,
    US,
    EU27UK,
    Russia,
    Japan,
    Brazil,
    ROW,
}

impl RegionGroup {
    pub const ALL: [RegionGroup; 8] = [
        RegionGroup::China,
        RegionGroup::India,
        RegionGroup::US,
        RegionGroup::EU27UK,
        RegionGroup::Russia,
        RegionGroup::Japan,
        RegionGroup::Brazil,
        RegionGroup::ROW,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionGroup::China => "China",
            RegionGroup::India => "India",
            RegionGroup::US => "US",
            RegionGroup::EU27UK => "EU27UK",
            RegionGroup::Russia => "Russia",
            RegionGroup::Japan => "Japan",
            RegionGroup::Brazil => "Brazil",
            RegionGroup::ROW => "ROW",
        }
    }

    /// Row label used in summary tables.
    pub fn table_label(&self) -> &'static str {
        match self {
            RegionGroup::EU27UK => "Europe (EU27 & UK)",
            RegionGroup::ROW => "ROW",
            other => other.as_str(),
        }
    }
}

impl FromStr for RegionGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        RegionGroup::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s) || g.table_label() == s)
            .or(match s {
                "Europe" | "EU" => Some(RegionGroup::EU27UK),
                "Row" | "Rest of world" => Some(RegionGroup::ROW),
                _ => None,
            })
            .ok_or_else(|| Error::domain(format!("unknown region group {s:?}")))
    }
}

/// Country → region lookup, loaded from the versioned `data/countries.csv`.
/// Codes not listed belong to the rest of the world.
#[derive(Debug, Clone)]
pub struct CountryRegistry {
    regions: BTreeMap<CountryCode, RegionGroup>,
}

impl CountryRegistry {
    pub fn builtin() -> &'static CountryRegistry {
        static REGISTRY: OnceLock<CountryRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            CountryRegistry::from_csv(include_str!("../../data/countries.csv"))
                .expect("bundled country registry is valid")
        })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            code: String,
            region_group: String,
        }
        let mut regions = BTreeMap::new();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row?;
            let code = CountryCode::new(&row.code)?;
            let group = row.region_group.parse()?;
            if regions.insert(code, group).is_some() {
                return Err(Error::parse("countries.csv", i + 2, format!("duplicate {code}")));
            }
        }
        Ok(CountryRegistry { regions })
    }

    pub fn region_of(&self, code: CountryCode) -> RegionGroup {
        self.regions.get(&code).copied().unwrap_or(RegionGroup::ROW)
    }

    pub fn members(&self, group: RegionGroup) -> impl Iterator<Item = CountryCode> + '_ {
        self.regions
            .iter()
            .filter(move |(_, g)| **g == group)
            .map(|(c, _)| *c)
    }
}

/// Emission sectors. The seven ids partition total emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    Power,
    Industry,
    GroundTransport,
    Residential,
    DomesticAviation,
    InternationalAviation,
    InternationalShipping,
}

impl Sector {
    pub const ALL: [Sector; 7] = [
        Sector::Power,
        Sector::Industry,
        Sector::GroundTransport,
        Sector::Residential,
        Sector::DomesticAviation,
        Sector::InternationalAviation,
        Sector::InternationalShipping,
    ];

    /// Sectors attributed to countries in regional tables.
    pub const NATIONAL: [Sector; 5] = [
        Sector::Power,
        Sector::GroundTransport,
        Sector::Industry,
        Sector::Residential,
        Sector::DomesticAviation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Sector::Power => "Power",
            Sector::Industry => "Industry",
            Sector::GroundTransport => "GroundTransport",
            Sector::Residential => "Residential",
            Sector::DomesticAviation => "DomesticAviation",
            Sector::InternationalAviation => "InternationalAviation",
            Sector::InternationalShipping => "InternationalShipping",
        }
    }

    pub fn is_bunker(&self) -> bool {
        matches!(
            self,
            Sector::InternationalAviation | Sector::InternationalShipping
        )
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sector::ALL
            .into_iter()
            .find(|sec| sec.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain(format!("unknown sector {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FuelType {
    Coal,
    Oil,
    NaturalGas,
}

/// Country × sector annual totals in Mt CO₂ per year.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnualInventory {
    pub year: i32,
    entries: BTreeMap<(CountryCode, Sector), f64>,
}

impl AnnualInventory {
    pub fn new(year: i32) -> Self {
        AnnualInventory {
            year,
            entries: BTreeMap::new(),
        }
    }

    /// Inserts a new entry; a key may appear only once.
    pub fn insert(&mut self, country: CountryCode, sector: Sector, mt: f64) -> Result<()> {
        check_mass(mt, "inventory entry")?;
        if self.entries.insert((country, sector), mt).is_some() {
            return Err(Error::domain(format!(
                "duplicate inventory entry for {country}/{sector}"
            )));
        }
        Ok(())
    }

    /// Adds to an entry, creating it when absent. Used when several source
    /// categories map onto the same sector.
    pub fn accumulate(&mut self, country: CountryCode, sector: Sector, mt: f64) -> Result<()> {
        check_mass(mt, "inventory entry")?;
        *self.entries.entry((country, sector)).or_insert(0.0) += mt;
        Ok(())
    }

    pub fn get(&self, country: CountryCode, sector: Sector) -> Option<f64> {
        self.entries.get(&(country, sector)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (CountryCode, Sector, f64)> + '_ {
        self.entries.iter().map(|((c, s), v)| (*c, *s, *v))
    }

    pub fn countries(&self) -> Vec<CountryCode> {
        let mut out: Vec<_> = self.entries.keys().map(|(c, _)| *c).collect();
        out.dedup();
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Year-over-year growth of a country's emissions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRate {
    pub country: CountryCode,
    pub rate: f64,
}

impl GrowthRate {
    pub fn new(country: CountryCode, rate: f64) -> Result<Self> {
        if !(rate > -1.0) || !rate.is_finite() {
            return Err(Error::domain(format!(
                "growth rate {rate} for {country} must exceed -1"
            )));
        }
        Ok(GrowthRate { country, rate })
    }
}

/// Contiguous daily emissions for one country and sector, in tonnes CO₂ per day.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyEmissionSeries {
    pub country: CountryCode,
    pub sector: Sector,
    start: NaiveDate,
    values: Vec<f64>,
}

impl DailyEmissionSeries {
    pub fn new(
        country: CountryCode,
        sector: Sector,
        start: NaiveDate,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("a daily series needs at least one day"));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::domain(format!(
                    "{country}/{sector}: day {} has invalid emission {v}",
                    start + Duration::days(i as i64)
                )));
            }
        }
        Ok(DailyEmissionSeries {
            country,
            sector,
            start,
            values,
        })
    }

    /// Builds a series from a date-keyed map, which must cover a contiguous range.
    pub fn from_map(
        country: CountryCode,
        sector: Sector,
        map: &BTreeMap<NaiveDate, f64>,
    ) -> Result<Self> {
        let start = *map
            .keys()
            .next()
            .ok_or_else(|| Error::domain("a daily series needs at least one day"))?;
        let mut expected = start;
        for date in map.keys() {
            if *date != expected {
                return Err(Error::domain(format!(
                    "{country}/{sector}: gap in daily series at {expected}"
                )));
            }
            expected = expected.succ_opt().expect("date in range");
        }
        DailyEmissionSeries::new(country, sector, start, map.values().copied().collect())
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start
    }

    pub fn end_date(&self) -> NaiveDate {
        self.start + Duration::days(self.values.len() as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        let offset = (date - self.start).num_days();
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start + Duration::days(i as i64), *v))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn map_values(&self, mut f: impl FnMut(NaiveDate, f64) -> f64) -> Result<Self> {
        let values = self.iter().map(|(d, v)| f(d, v)).collect();
        DailyEmissionSeries::new(self.country, self.sector, self.start, values)
    }
}

pub(crate) fn check_mass(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::domain(format!("{what} must be a nonnegative number, got {value}")));
    }
    Ok(())
}

/// Same calendar day one year earlier. February 29 has no counterpart and
/// is left out of year-over-year comparisons.
pub fn align_dates(date: NaiveDate) -> Option<NaiveDate> {
    if date.month() == 2 && date.day() == 29 {
        return None;
    }
    NaiveDate::from_ymd_opt(date.year() - 1, date.month(), date.day())
}

/// Day of the previous year whose activity stands in for `date` when building
/// a raw series; February 29 borrows February 28.
pub fn reference_day(date: NaiveDate) -> NaiveDate {
    align_dates(date)
        .unwrap_or_else(|| NaiveDate::from_ymd_opt(date.year() - 1, 2, 28).expect("valid date"))
}

/// Builds a series over `start..=end` as the baseline on the reference day
/// times `1 + change(day)`.
pub fn project_series(
    baseline: &DailyEmissionSeries,
    start: NaiveDate,
    end: NaiveDate,
    mut change: impl FnMut(NaiveDate) -> Result<f64>,
) -> Result<DailyEmissionSeries> {
    let mut values = Vec::new();
    for day in date_range(start, end) {
        let r = reference_day(day);
        let base = baseline.get(r).ok_or(Error::OutOfRange {
            date: r,
            start: baseline.start_date(),
            end: baseline.end_date(),
        })?;
        values.push(base * (1.0 + change(day)?));
    }
    DailyEmissionSeries::new(baseline.country, baseline.sector, start, values)
}

/// Sums of the comparable days in `start..=end` (2019 side, 2020 side).
/// Days without a counterpart or outside either series are skipped.
pub fn comparison_totals(
    s2019: &DailyEmissionSeries,
    s2020: &DailyEmissionSeries,
    start: NaiveDate,
    end: NaiveDate,
) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    for day in date_range(start, end) {
        if let Some(prev) = align_dates(day) {
            if let (Some(x), Some(y)) = (s2019.get(prev), s2020.get(day)) {
                a += x;
                b += y;
            }
        }
    }
    (a, b)
}

/// Inclusive iterator over calendar days.
pub fn date_range(start: NaiveDate, end: NaiveDate) -> impl Iterator<Item = NaiveDate> {
    start.iter_days().take_while(move |d| *d <= end)
}
