use serde::{Deserialize, Serialize};

use super::{CountryCode, FuelType, Sector};
use crate::error::{Error, Result};

/// Mass ratio of CO₂ to carbon.
const CO2_PER_C: f64 = 44.0 / 12.0;

/// Fuel-specific emission factor: net heating value `v` (TJ per tonne of
/// fuel), carbon content `c` (tonne C per TJ) and oxidation rate `o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactor {
    pub heating_value: f64,
    pub carbon_content: f64,
    pub oxidation_rate: f64,
}

impl EmissionFactor {
    pub fn new(heating_value: f64, carbon_content: f64, oxidation_rate: f64) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(heating_value) || !positive(carbon_content) || !positive(oxidation_rate) {
            return Err(Error::domain(
                "emission factor components must be strictly positive",
            ));
        }
        if oxidation_rate > 1.0 {
            return Err(Error::domain(format!(
                "oxidation rate {oxidation_rate} exceeds 1"
            )));
        }
        Ok(EmissionFactor {
            heating_value,
            carbon_content,
            oxidation_rate,
        })
    }
}

/// Tonnes of CO₂ released by burning `energy_tj` of fuel.
///
/// The factor's carbon content is expressed in carbon mass, so the 44/12
/// conversion to CO₂ happens here and nowhere else.
pub fn compute_emission(energy_tj: f64, factor: &EmissionFactor) -> Result<f64> {
    if !energy_tj.is_finite() || energy_tj < 0.0 {
        return Err(Error::domain(format!(
            "energy consumption must be nonnegative, got {energy_tj}"
        )));
    }
    Ok(energy_tj * factor.carbon_content * factor.oxidation_rate * CO2_PER_C)
}

/// Same as [`compute_emission`] for an activity given in tonnes of fuel.
pub fn fuel_emission(fuel_tonnes: f64, factor: &EmissionFactor) -> Result<f64> {
    if !fuel_tonnes.is_finite() || fuel_tonnes < 0.0 {
        return Err(Error::domain(format!(
            "fuel quantity must be nonnegative, got {fuel_tonnes}"
        )));
    }
    compute_emission(fuel_tonnes * factor.heating_value, factor)
}

/// One (country, sector, fuel) activity record of a bottom-up inventory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelUse {
    pub country: CountryCode,
    pub sector: Sector,
    pub fuel: FuelType,
    pub energy_tj: f64,
    pub factor: EmissionFactor,
}

/// Bottom-up inventory total over countries, sectors and fuels, in tonnes CO₂.
pub fn inventory_emissions(records: &[FuelUse]) -> Result<f64> {
    records
        .iter()
        .map(|r| compute_emission(r.energy_tj, &r.factor))
        .sum()
}
