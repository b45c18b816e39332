//! Loaders for every fixture file. Each returns errors that name the file
//! and the 1-based line of the offending row.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::assembly::{ClosurePolicy, Holiday, HolidayCalendar};
use crate::bunkers::{FlightRecord, LatLon};
use crate::error::{Error, Result};
use crate::industry::{SubSector, SubSectorShare, YearMonth};
use crate::ingestion::{parse_power_feed, FeedSchemaRegistry, RawObservation};
use crate::model::{map_edgar_sectors, AnnualInventory, CountryCode, GrowthRate};
use crate::residential::{PopulationGrid, ResidentialSplit, TemperatureGrid};
use crate::transport::CityWeight;
use crate::uncertainty::UncertaintyLedger;

pub const EDGAR: &str = "baseline/edgar_2018.csv";
pub const GROWTH: &str = "baseline/growth_2019.csv";
pub const FEED_SCHEMAS: &str = "power/feed_schemas.toml";
pub const POWER_DIR: &str = "power";
pub const CALIBRATION: &str = "transport/calibration.csv";
pub const CONGESTION: &str = "transport/congestion.csv";
pub const CITY_WEIGHTS: &str = "transport/weights.csv";
pub const PRODUCTION: &str = "industry/production.csv";
pub const IPI: &str = "industry/ipi.csv";
pub const SHARES: &str = "industry/subsector_shares.csv";
pub const PROCESS: &str = "industry/process.csv";
pub const FLIGHTS: &str = "aviation/flights.csv";
pub const SHIPPING: &str = "shipping/volume.csv";
pub const TEMPERATURE: &str = "residential/temperature.csv";
pub const POPULATION: &str = "residential/population.csv";
pub const SPLIT: &str = "residential/split.csv";
pub const GAS: &str = "residential/gas.csv";
pub const POLICIES: &str = "assembly/policies.csv";
pub const HOLIDAYS: &str = "assembly/holidays.csv";
pub const LEDGER: &str = "uncertainty/ledger.csv";

fn open(dir: &Path, rel: &str) -> Result<(std::fs::File, String)> {
    let path = dir.join(rel);
    let f = std::fs::File::open(&path).map_err(|_| Error::MissingFixture(path.clone()))?;
    Ok((f, rel.to_string()))
}

/// Deserializes every row, handing each to `f` together with its line number.
fn for_rows<T: DeserializeOwned>(
    dir: &Path,
    rel: &str,
    mut f: impl FnMut(T, usize) -> Result<()>,
) -> Result<()> {
    let (file, label) = open(dir, rel)?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(&label, line, e.to_string()))?;
        let row: T = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(&label, line, e.to_string()))?;
        f(row, line).map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::parse(&label, line, other.to_string()),
        })?;
    }
    Ok(())
}

fn code(s: &str) -> Result<CountryCode> {
    CountryCode::new(s.trim())
}

pub fn load_edgar(dir: &Path) -> Result<AnnualInventory> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        sector: String,
        year: i32,
        mt_co2: f64,
    }
    let mut inv = AnnualInventory::new(2018);
    for_rows(dir, EDGAR, |r: Row, _| {
        if r.year != 2018 {
            return Err(Error::domain(format!("expected year 2018, got {}", r.year)));
        }
        inv.accumulate(code(&r.country)?, map_edgar_sectors(&r.sector)?, r.mt_co2)
    })?;
    Ok(inv)
}

pub fn load_growth(dir: &Path) -> Result<Vec<GrowthRate>> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        rate: f64,
    }
    let mut out = Vec::new();
    for_rows(dir, GROWTH, |r: Row, _| {
        out.push(GrowthRate::new(code(&r.country)?, r.rate)?);
        Ok(())
    })?;
    Ok(out)
}

pub fn load_feed_schemas(dir: &Path) -> Result<FeedSchemaRegistry> {
    let path = dir.join(FEED_SCHEMAS);
    if path.exists() {
        FeedSchemaRegistry::load(&path)
    } else {
        Ok(FeedSchemaRegistry::default())
    }
}

pub fn power_feed_path(dir: &Path, c: CountryCode, year: i32) -> PathBuf {
    dir.join(POWER_DIR).join(format!("{c}_{year}.csv"))
}

/// Countries that ship a feed for both years.
pub fn power_feed_countries(dir: &Path) -> Result<Vec<CountryCode>> {
    let mut out = Vec::new();
    let Ok(entries) = std::fs::read_dir(dir.join(POWER_DIR)) else {
        return Ok(out);
    };
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        if let Some(stem) = name.strip_suffix("_2020.csv") {
            if let Ok(c) = CountryCode::new(stem) {
                if power_feed_path(dir, c, 2019).exists() {
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

pub fn load_power_feed(
    dir: &Path,
    c: CountryCode,
    year: i32,
    schema_id: &str,
    registry: &FeedSchemaRegistry,
) -> Result<Vec<RawObservation>> {
    parse_power_feed(&power_feed_path(dir, c, year), schema_id, registry)
}

pub fn load_calibration(dir: &Path) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        congestion_pct: f64,
        car_count: f64,
    }
    let mut out = Vec::new();
    for_rows(dir, CALIBRATION, |r: Row, _| {
        out.push((r.congestion_pct, r.car_count));
        Ok(())
    })?;
    Ok(out)
}

/// One congestion sample; `date` may carry a time of day.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionSample {
    pub date: NaiveDate,
    pub city: String,
    pub country: CountryCode,
    pub congestion_pct: f64,
}

fn parse_day(s: &str) -> Result<NaiveDate> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%SZ", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.date());
        }
    }
    Err(Error::domain(format!("unparseable date {s:?}")))
}

pub fn load_congestion(dir: &Path) -> Result<Vec<CongestionSample>> {
    #[derive(Deserialize)]
    struct Row {
        date: String,
        city: String,
        country: String,
        congestion_pct: f64,
    }
    let mut out = Vec::new();
    for_rows(dir, CONGESTION, |r: Row, _| {
        if !(r.congestion_pct.is_finite() && r.congestion_pct >= 0.0) {
            return Err(Error::domain(format!("congestion {} must be ≥ 0", r.congestion_pct)));
        }
        out.push(CongestionSample {
            date: parse_day(&r.date)?,
            city: r.city,
            country: code(&r.country)?,
            congestion_pct: r.congestion_pct,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_city_weights(dir: &Path) -> Result<Vec<CityWeight>> {
    #[derive(Deserialize)]
    struct Row {
        city: String,
        country: String,
        edgar_road_mt: f64,
    }
    let mut out = Vec::new();
    for_rows(dir, CITY_WEIGHTS, |r: Row, _| {
        if !(r.edgar_road_mt.is_finite() && r.edgar_road_mt >= 0.0) {
            return Err(Error::domain(format!("city weight {} must be ≥ 0", r.edgar_road_mt)));
        }
        out.push(CityWeight {
            city: r.city,
            country: code(&r.country)?,
            weight: r.edgar_road_mt,
        });
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductionRow {
    pub country: CountryCode,
    pub subsector: SubSector,
    pub product: String,
    pub month: YearMonth,
    pub quantity: f64,
    pub weight: f64,
}

pub fn load_production(dir: &Path) -> Result<Vec<ProductionRow>> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        subsector: String,
        product: String,
        month: String,
        quantity: f64,
        weight: f64,
    }
    let mut out = Vec::new();
    for_rows(dir, PRODUCTION, |r: Row, _| {
        if !(r.quantity.is_finite() && r.quantity >= 0.0) {
            return Err(Error::domain(format!("{}: quantity {} must be ≥ 0", r.product, r.quantity)));
        }
        if !(r.weight.is_finite() && r.weight >= 0.0) {
            return Err(Error::domain(format!("{}: weight {} must be ≥ 0", r.product, r.weight)));
        }
        out.push(ProductionRow {
            country: code(&r.country)?,
            subsector: r.subsector.parse()?,
            product: r.product,
            month: r.month.parse()?,
            quantity: r.quantity,
            weight: r.weight,
        });
        Ok(())
    })?;
    Ok(out)
}

/// Cumulative indices keyed by series id (country code or region id), then
/// year, then month.
pub type IpiTable = BTreeMap<String, BTreeMap<i32, BTreeMap<u32, f64>>>;

pub fn load_ipi(dir: &Path) -> Result<IpiTable> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        month: String,
        cumulative_index: f64,
    }
    let mut out = IpiTable::new();
    for_rows(dir, IPI, |r: Row, _| {
        if !(r.cumulative_index > 0.0) {
            return Err(Error::domain(format!("index {} must be > 0", r.cumulative_index)));
        }
        let m: YearMonth = r.month.parse()?;
        let prev = out
            .entry(r.country.trim().to_string())
            .or_default()
            .entry(m.year)
            .or_default()
            .insert(m.month, r.cumulative_index);
        if prev.is_some() {
            return Err(Error::domain(format!("duplicate index for {} {m}", r.country)));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn load_shares(dir: &Path) -> Result<SubSectorShare> {
    #[derive(Deserialize)]
    struct Row {
        subsector: String,
        share: f64,
    }
    let mut shares = BTreeMap::new();
    for_rows(dir, SHARES, |r: Row, _| {
        shares.insert(r.subsector.parse()?, r.share);
        Ok(())
    })?;
    SubSectorShare::new(shares).map_err(|e| Error::config(format!("{SHARES}: {e}")))
}

pub fn load_process(dir: &Path) -> Result<BTreeMap<CountryCode, f64>> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        annual_mt_2019: f64,
    }
    let mut out = BTreeMap::new();
    for_rows(dir, PROCESS, |r: Row, _| {
        if !(r.annual_mt_2019.is_finite() && r.annual_mt_2019 >= 0.0) {
            return Err(Error::domain(format!("process baseline {} must be ≥ 0", r.annual_mt_2019)));
        }
        out.insert(code(&r.country)?, r.annual_mt_2019);
        Ok(())
    })?;
    Ok(out)
}

fn optional_code(s: &str) -> Result<Option<CountryCode>> {
    let s = s.trim();
    if s.is_empty() {
        Ok(None)
    } else {
        code(s).map(Some)
    }
}

pub fn parse_waypoints(s: &str) -> Result<Vec<LatLon>> {
    s.split(';')
        .map(|p| {
            let (lat, lon) = p
                .split_once(':')
                .ok_or_else(|| Error::domain(format!("waypoint {p:?} is not lat:lon")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::domain(format!("waypoint {p:?} is not numeric")))
            };
            LatLon::new(parse(lat)?, parse(lon)?)
        })
        .collect()
}

pub fn load_flights(dir: &Path) -> Result<Vec<FlightRecord>> {
    #[derive(Deserialize)]
    struct Row {
        date: NaiveDate,
        flight_id: String,
        origin_iso3: String,
        dest_iso3: String,
        waypoints: String,
    }
    let mut out = Vec::new();
    for_rows(dir, FLIGHTS, |r: Row, _| {
        let waypoints = parse_waypoints(&r.waypoints)?;
        if waypoints.len() < 2 {
            return Err(Error::domain(format!("flight {} has fewer than two waypoints", r.flight_id)));
        }
        out.push(FlightRecord {
            flight_id: r.flight_id,
            date: r.date,
            origin: optional_code(&r.origin_iso3)?,
            dest: optional_code(&r.dest_iso3)?,
            waypoints,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_shipping(dir: &Path) -> Result<BTreeMap<NaiveDate, f64>> {
    #[derive(Deserialize)]
    struct Row {
        date: NaiveDate,
        volume_change_fraction: f64,
    }
    let mut out = BTreeMap::new();
    for_rows(dir, SHIPPING, |r: Row, _| {
        if !(r.volume_change_fraction > -1.0) {
            return Err(Error::domain(format!("volume change {} must be > -1", r.volume_change_fraction)));
        }
        if out.insert(r.date, r.volume_change_fraction).is_some() {
            return Err(Error::domain(format!("duplicate date {}", r.date)));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn load_temperature(dir: &Path) -> Result<TemperatureGrid> {
    #[derive(Deserialize)]
    struct Row {
        date: NaiveDate,
        lat: f64,
        lon: f64,
        t2m_c: f64,
    }
    let mut grid = TemperatureGrid::default();
    for_rows(dir, TEMPERATURE, |r: Row, _| grid.insert(r.date, r.lat, r.lon, r.t2m_c))?;
    Ok(grid)
}

pub fn load_population(dir: &Path) -> Result<PopulationGrid> {
    #[derive(Deserialize)]
    struct Row {
        lat: f64,
        lon: f64,
        country_iso3: String,
        population: f64,
    }
    let mut grid = PopulationGrid::default();
    for_rows(dir, POPULATION, |r: Row, _| grid.push(r.lat, r.lon, code(&r.country_iso3)?, r.population))?;
    Ok(grid)
}

pub fn load_split(dir: &Path) -> Result<BTreeMap<CountryCode, ResidentialSplit>> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        cooking_share: f64,
        heating_share: f64,
    }
    let mut out = BTreeMap::new();
    for_rows(dir, SPLIT, |r: Row, _| {
        let c = code(&r.country)?;
        out.insert(c, ResidentialSplit::new(c, r.cooking_share, r.heating_share)?);
        Ok(())
    })?;
    Ok(out)
}

/// Optional daily gas deliveries per country, used only for verification.
pub fn load_gas(dir: &Path) -> Result<Option<BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>>>> {
    if !dir.join(GAS).exists() {
        return Ok(None);
    }
    #[derive(Deserialize)]
    struct Row {
        date: NaiveDate,
        country: String,
        gas_mwh: f64,
    }
    let mut out: BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for_rows(dir, GAS, |r: Row, _| {
        if !(r.gas_mwh.is_finite() && r.gas_mwh >= 0.0) {
            return Err(Error::domain(format!("gas {} must be ≥ 0", r.gas_mwh)));
        }
        out.entry(code(&r.country)?).or_default().insert(r.date, r.gas_mwh);
        Ok(())
    })?;
    Ok(Some(out))
}

fn optional_date(s: &str) -> Result<Option<NaiveDate>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(Some)
        .map_err(|_| Error::domain(format!("unparseable date {s:?}")))
}

pub fn load_policies(dir: &Path) -> Result<BTreeMap<CountryCode, ClosurePolicy>> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        has_closure: bool,
        start: String,
        end: String,
    }
    let mut out = BTreeMap::new();
    for_rows(dir, POLICIES, |r: Row, _| {
        let c = code(&r.country)?;
        let p = ClosurePolicy::new(c, r.has_closure, optional_date(&r.start)?, optional_date(&r.end)?)?;
        if out.insert(c, p).is_some() {
            return Err(Error::domain(format!("duplicate policy for {c}")));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn load_holidays(dir: &Path) -> Result<BTreeMap<CountryCode, HolidayCalendar>> {
    #[derive(Deserialize)]
    struct Row {
        country: String,
        start: NaiveDate,
        end: NaiveDate,
        label: String,
    }
    let mut by_country: BTreeMap<CountryCode, Vec<Holiday>> = BTreeMap::new();
    for_rows(dir, HOLIDAYS, |r: Row, _| {
        by_country.entry(code(&r.country)?).or_default().push(Holiday {
            start: r.start,
            end: r.end,
            label: r.label,
        });
        Ok(())
    })?;
    by_country
        .into_iter()
        .map(|(c, h)| Ok((c, HolidayCalendar::new(c, h).map_err(|e| Error::config(format!("{HOLIDAYS}: {e}")))?)))
        .collect()
}

pub fn load_ledger(dir: &Path) -> Result<UncertaintyLedger> {
    let path = dir.join(LEDGER);
    if path.exists() {
        let (f, label) = open(dir, LEDGER)?;
        UncertaintyLedger::from_reader(f, &label)
    } else {
        Ok(UncertaintyLedger::defaults())
    }
}

/// Every regular file under `dir`, as sorted relative paths.
pub fn list_files(dir: &Path) -> Result<Vec<String>> {
    fn walk(root: &Path, d: &Path, out: &mut Vec<String>) -> Result<()> {
        for e in std::fs::read_dir(d)? {
            let p = e?.path();
            if p.is_dir() {
                walk(root, &p, out)?;
            } else if let Ok(rel) = p.strip_prefix(root) {
                out.push(rel.to_string_lossy().replace('\\', "/"));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    if !dir.is_dir() {
        return Err(Error::MissingFixture(dir.to_path_buf()));
    }
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}
