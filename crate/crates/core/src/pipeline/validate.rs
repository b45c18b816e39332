//! Schema and invariant checks over a fixture directory.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::industry::SubSector;
use crate::model::CountryCode;

use super::fixtures as fx;
use super::PowerConfig;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checked: Vec<String>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        let n = self.violations.len();
        format!("{n} violation{}", if n == 1 { "" } else { "s" })
    }

    fn check<T>(&mut self, file: &str, r: Result<T>) -> Option<T> {
        self.checked.push(file.to_string());
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                let msg = e.to_string();
                self.violations.push(if msg.contains(file) { msg } else { format!("{file}: {msg}") });
                None
            }
        }
    }
}

/// Checks every known fixture. Loading stops at the first bad row of a
/// file, so each file contributes at most one schema violation.
pub fn validate(dir: &Path, power: &PowerConfig) -> Result<ValidationReport> {
    if !dir.is_dir() {
        return Err(Error::MissingFixture(dir.to_path_buf()));
    }
    let mut r = ValidationReport::default();
    r.check(fx::EDGAR, fx::load_edgar(dir));
    r.check(fx::GROWTH, fx::load_growth(dir));
    if let Some(registry) = r.check(fx::FEED_SCHEMAS, fx::load_feed_schemas(dir)) {
        for c in fx::power_feed_countries(dir)? {
            for year in [2019, 2020] {
                let name = format!("{}/{c}_{year}.csv", fx::POWER_DIR);
                let parsed = fx::load_power_feed(dir, c, year, power.schema_for(c), &registry)
                    .and_then(crate::ingestion::daily_generation);
                r.check(&name, parsed);
            }
        }
    }
    r.check(fx::CALIBRATION, fx::load_calibration(dir));
    r.check(fx::CONGESTION, fx::load_congestion(dir));
    r.check(fx::CITY_WEIGHTS, fx::load_city_weights(dir));
    if let Some(rows) = r.check(fx::PRODUCTION, fx::load_production(dir)) {
        let mut sums: BTreeMap<(CountryCode, SubSector, String), f64> = BTreeMap::new();
        for row in &rows {
            *sums.entry((row.country, row.subsector, row.month.to_string())).or_default() += row.weight;
        }
        for ((c, sub, m), w) in sums {
            if (w - 1.0).abs() > 1e-9 {
                r.violations.push(format!(
                    "{}: {c} {} {m}: product weights sum to {w}, not 1",
                    fx::PRODUCTION,
                    sub.as_str()
                ));
            }
        }
    }
    r.check(fx::IPI, fx::load_ipi(dir));
    r.check(fx::SHARES, fx::load_shares(dir));
    r.check(fx::PROCESS, fx::load_process(dir));
    r.check(fx::FLIGHTS, fx::load_flights(dir));
    r.check(fx::SHIPPING, fx::load_shipping(dir));
    r.check(fx::TEMPERATURE, fx::load_temperature(dir));
    r.check(fx::POPULATION, fx::load_population(dir));
    r.check(fx::SPLIT, fx::load_split(dir));
    r.check(fx::GAS, fx::load_gas(dir));
    r.check(fx::POLICIES, fx::load_policies(dir));
    r.check(fx::HOLIDAYS, fx::load_holidays(dir));
    r.check(fx::LEDGER, fx::load_ledger(dir));
    Ok(r)
}
