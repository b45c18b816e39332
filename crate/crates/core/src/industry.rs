//! Industrial emissions from production statistics and industrial
//! production indices, plus cement process emissions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{date_range, distribute_annual_to_daily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::domain(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        YearMonth {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn first_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn last_day(&self) -> NaiveDate {
        let (y, m) = if self.month == 12 { (self.year + 1, 1) } else { (self.year, self.month + 1) };
        NaiveDate::from_ymd_opt(y, m, 1).expect("valid month").pred_opt().expect("date")
    }

    pub fn days(&self) -> u32 {
        self.last_day().day()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("expected YYYY-MM, got {s:?}"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        YearMonth::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
    }
}

/// Growth of one quantity against the same period of the previous year.
pub fn product_growth(q2020: f64, q2019: f64) -> Result<f64> {
    if !(q2019 > 0.0) || !q2020.is_finite() || q2020 < 0.0 {
        return Err(Error::domain(format!(
            "growth is undefined for {q2020} against {q2019}"
        )));
    }
    Ok(q2020 / q2019 - 1.0)
}

/// One product of a basket with its 2019 and 2020 quantities for a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPair {
    pub product: String,
    pub weight: f64,
    pub q2019: f64,
    pub q2020: f64,
}

const WEIGHT_TOL: f64 = 1e-9;

fn check_weights<'a>(what: &str, weights: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut sum = 0.0;
    for w in weights {
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::domain(format!("{what}: weight {w} must be ≥ 0")));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::domain(format!("{what}: weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Σ weightᵢ × growthᵢ over a product basket.
pub fn group_growth(products: &[ProductPair]) -> Result<f64> {
    if products.is_empty() {
        return Err(Error::domain("empty product basket"));
    }
    check_weights("product basket", products.iter().map(|p| &p.weight))?;
    let mut total = 0.0;
    for p in products {
        let g = product_growth(p.q2020, p.q2019)
            .map_err(|e| Error::domain(format!("product {}: {e}", p.product)))?;
        total += p.weight * g;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubSector {
    Steel,
    Cement,
    Chemicals,
    Other,
}

impl SubSector {
    pub const ALL: [SubSector; 4] = [SubSector::Steel, SubSector::Cement, SubSector::Chemicals, SubSector::Other];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubSector::Steel => "steel",
            SubSector::Cement => "cement",
            SubSector::Chemicals => "chemicals",
            SubSector::Other => "other",
        }
    }
}

impl FromStr for SubSector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SubSector::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain(format!("unknown industrial sub-sector {s:?}")))
    }
}

/// Shares of China's industrial fuel-combustion emissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSectorShare {
    shares: BTreeMap<SubSector, f64>,
}

impl SubSectorShare {
    pub fn new(shares: BTreeMap<SubSector, f64>) -> Result<Self> {
        for s in SubSector::ALL {
            if !shares.contains_key(&s) {
                return Err(Error::domain(format!("missing share for {}", s.as_str())));
            }
        }
        check_weights("sub-sector shares", shares.values())?;
        Ok(SubSectorShare { shares })
    }

    /// Steel 41.6% and cement 22.2%; chemicals and other complete the total.
    pub fn china_default() -> Self {
        SubSectorShare::new(
            [
                (SubSector::Steel, 0.416),
                (SubSector::Cement, 0.222),
                (SubSector::Chemicals, 0.212),
                (SubSector::Other, 0.150),
            ]
            .into_iter()
            .collect(),
        )
        .expect("shares sum to one")
    }

    pub fn get(&self, s: SubSector) -> f64 {
        self.shares[&s]
    }
}

/// Share-weighted sum of sub-sector growths.
pub fn china_industry_growth(growths: &BTreeMap<SubSector, f64>, shares: &SubSectorShare) -> Result<f64> {
    let mut total = 0.0;
    for s in SubSector::ALL {
        let g = growths
            .get(&s)
            .ok_or_else(|| Error::domain(format!("no growth for sub-sector {}", s.as_str())))?;
        total += shares.get(s) * g;
    }
    Ok(total)
}

/// Change in process emissions (Mt) assuming the same relative change as
/// cement fuel combustion.
pub fn cement_process_emissions(fuel_growth: f64, baseline_process_mt: f64) -> Result<f64> {
    if !(baseline_process_mt.is_finite() && baseline_process_mt >= 0.0) {
        return Err(Error::domain(format!(
            "process baseline {baseline_process_mt} must be ≥ 0"
        )));
    }
    Ok(baseline_process_mt * fuel_growth)
}

/// Month-specific index from a running-mean cumulative index:
/// I(m) = m·C(m) − (m−1)·C(m−1).
pub fn decumulate(cumulative: &BTreeMap<u32, f64>, country: &str, month: u32) -> Result<f64> {
    let at = |m: u32| -> Result<f64> {
        let v = *cumulative.get(&m).ok_or(Error::IpiGap {
            country: country.to_string(),
            month: m,
        })?;
        if !(v > 0.0) {
            return Err(Error::domain(format!("{country} month {m}: index {v} must be > 0")));
        }
        Ok(v)
    };
    let c = at(month)?;
    if month == 1 {
        return Ok(c);
    }
    Ok(month as f64 * c - (month - 1) as f64 * at(month - 1)?)
}

/// 2020-vs-2019 growth of a single month from cumulative indices.
pub fn ipi_monthly_growth(
    c2019: &BTreeMap<u32, f64>,
    c2020: &BTreeMap<u32, f64>,
    country: &str,
    month: u32,
) -> Result<f64> {
    let i19 = decumulate(c2019, country, month)?;
    let i20 = decumulate(c2020, country, month)?;
    if !(i19 > 0.0) {
        return Err(Error::domain(format!(
            "{country} month {month}: de-cumulated 2019 index {i19} is not positive"
        )));
    }
    Ok(i20 / i19 - 1.0)
}

/// Growth of the cumulative index itself through `month`.
pub fn ipi_growth(
    c2019: &BTreeMap<u32, f64>,
    c2020: &BTreeMap<u32, f64>,
    country: &str,
    month: u32,
) -> Result<f64> {
    let gap = |m| Error::IpiGap {
        country: country.to_string(),
        month: m,
    };
    let a = c2019.get(&month).ok_or_else(|| gap(month))?;
    let b = c2020.get(&month).ok_or_else(|| gap(month))?;
    product_growth(*b, *a)
}

/// Mean of donor growths, used for a month not yet published.
pub fn forecast_missing_month(donors: &[(&str, Option<f64>)]) -> Result<f64> {
    if donors.is_empty() {
        return Err(Error::config("no donor countries for the missing month"));
    }
    let mut sum = 0.0;
    for (name, g) in donors {
        sum += g.ok_or_else(|| Error::config(format!("donor {name} has no growth for the month")))?;
    }
    Ok(sum / donors.len() as f64)
}

/// Splits a monthly mass over its days in proportion to daily electricity.
/// Returns the daily values and whether the uniform fallback was used.
pub fn disaggregate_monthly_to_daily(
    monthly: f64,
    month: YearMonth,
    daily_electricity: &BTreeMap<NaiveDate, f64>,
) -> Result<(Vec<f64>, bool)> {
    let mut weights = Vec::with_capacity(month.days() as usize);
    for day in date_range(month.first_day(), month.last_day()) {
        let e = *daily_electricity
            .get(&day)
            .ok_or_else(|| Error::domain(format!("no electricity for {day}")))?;
        weights.push(e);
    }
    if weights.iter().sum::<f64>() > 0.0 {
        return Ok((distribute_annual_to_daily(monthly, &weights)?, false));
    }
    log::warn!("{month}: zero electricity; splitting industry emissions uniformly");
    let uniform = vec![1.0; weights.len()];
    Ok((distribute_annual_to_daily(monthly, &uniform)?, true))
}
