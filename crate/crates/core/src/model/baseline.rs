use std::collections::BTreeMap;

use super::{AnnualInventory, CountryCode, GrowthRate, Sector};
use crate::error::{Error, Result};

/// Growth applied to countries without a published 2018→2019 estimate.
pub const DEFAULT_GROWTH_RATE: f64 = 0.005;

/// Scales a 2018 inventory to 2019 with per-country growth rates, falling
/// back to `default_rate` for countries without one.
pub fn build_baseline_2019(
    edgar2018: &AnnualInventory,
    rates: &[GrowthRate],
    default_rate: f64,
) -> Result<AnnualInventory> {
    if edgar2018.year != 2018 {
        return Err(Error::domain(format!(
            "baseline source must be the 2018 inventory, got {}",
            edgar2018.year
        )));
    }
    GrowthRate::new(CountryCode::WORLD, default_rate)?;
    let mut by_country: BTreeMap<CountryCode, f64> = BTreeMap::new();
    for r in rates {
        GrowthRate::new(r.country, r.rate)?;
        by_country.insert(r.country, r.rate);
    }
    let mut out = AnnualInventory::new(2019);
    for (country, sector, mt) in edgar2018.entries() {
        let rate = by_country.get(&country).copied().unwrap_or(default_rate);
        out.insert(country, sector, mt * (1.0 + rate))?;
    }
    Ok(out)
}

/// Maps an EDGAR source category onto the sector it feeds.
pub fn map_edgar_sectors(edgar_category: &str) -> Result<Sector> {
    match edgar_category.trim() {
        "Electricity and heat production" => Ok(Sector::Power),
        "Manufacturing industries and construction" | "Other energy industries" => {
            Ok(Sector::Industry)
        }
        "Road transportation"
        | "Rail transportation"
        | "Inland navigation"
        | "Other transportation" => Ok(Sector::GroundTransport),
        "Residential and other sectors" => Ok(Sector::Residential),
        other => Err(Error::UnknownCategory(other.to_string())),
    }
}

/// Splits an annual mass across days in proportion to `weights`.
pub fn distribute_annual_to_daily(annual: f64, weights: &[f64]) -> Result<Vec<f64>> {
    if !annual.is_finite() || annual < 0.0 {
        return Err(Error::domain(format!("annual mass {annual} must be nonnegative")));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::domain("weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::domain("weights sum to zero"));
    }
    Ok(weights.iter().map(|w| annual * w / total).collect())
}
