use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::bunkers::AviationScale;
use crate::error::{Error, Result};
use crate::model::{CountryCode, DEFAULT_GROWTH_RATE};
use crate::power::TemperatureAdjustment;
use crate::residential::DEFAULT_HDD_BASE_C;

/// Overrides `fixture_dir` when set.
pub const FIXTURES_ENV: &str = "CARBON_PULSE_FIXTURES";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountrySelection {
    Keyword(String),
    List(Vec<CountryCode>),
}

impl Default for CountrySelection {
    fn default() -> Self {
        CountrySelection::Keyword("all".into())
    }
}

impl CountrySelection {
    pub fn includes(&self, c: CountryCode) -> bool {
        match self {
            CountrySelection::Keyword(_) => true,
            CountrySelection::List(list) => list.contains(&c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectorToggles {
    pub power: bool,
    pub ground_transport: bool,
    pub industry: bool,
    pub residential: bool,
    pub aviation: bool,
    pub shipping: bool,
    pub uncertainty: bool,
}

impl Default for SectorToggles {
    fn default() -> Self {
        SectorToggles {
            power: true,
            ground_transport: true,
            industry: true,
            residential: true,
            aviation: true,
            shipping: true,
            uncertainty: true,
        }
    }
}

impl SectorToggles {
    pub fn all_off() -> Self {
        SectorToggles {
            power: false,
            ground_transport: false,
            industry: false,
            residential: false,
            aviation: false,
            shipping: false,
            uncertainty: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    /// Thermal categories per country; `default` applies to unlisted ones.
    pub thermal_categories: BTreeMap<String, Vec<String>>,
    pub use_total_generation: Vec<CountryCode>,
    /// Countries whose feeds are not used.
    pub excluded: Vec<CountryCode>,
    pub feed_schema: String,
    /// Per-country schema ids.
    pub feed_schemas: BTreeMap<String, String>,
    pub temp_adjustment: Option<TemperatureAdjustment>,
}

impl Default for PowerConfig {
    fn default() -> Self {
        let mut thermal = BTreeMap::new();
        thermal.insert(
            "default".to_string(),
            ["Coal", "Lignite", "Gas", "Oil"].map(String::from).to_vec(),
        );
        thermal.insert(
            "IND".to_string(),
            ["Coal", "Lignite", "Gas, Naphtha & Diesel"].map(String::from).to_vec(),
        );
        PowerConfig {
            thermal_categories: thermal,
            use_total_generation: ["RUS", "JPN"].map(|c| CountryCode::new(c).expect("code")).to_vec(),
            excluded: ["HRV", "CYP", "IRL", "LUX", "MLT"].map(|c| CountryCode::new(c).expect("code")).to_vec(),
            feed_schema: "standard".into(),
            feed_schemas: BTreeMap::new(),
            temp_adjustment: Some(TemperatureAdjustment::winter_2020()),
        }
    }
}

impl PowerConfig {
    pub fn thermal_for(&self, c: CountryCode) -> Result<&[String]> {
        self.thermal_categories
            .get(c.as_str())
            .or_else(|| self.thermal_categories.get("default"))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::config(format!("no thermal categories for {c} and no default")))
    }

    pub fn schema_for(&self, c: CountryCode) -> &str {
        self.feed_schemas.get(c.as_str()).unwrap_or(&self.feed_schema)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndustryConfig {
    /// Countries whose April growth stands in for series that stop early.
    pub forecast_donors: Vec<String>,
    /// IPI series (country or region ids) allowed to borrow the donor mean.
    pub forecast_targets: Vec<String>,
}

impl Default for IndustryConfig {
    fn default() -> Self {
        IndustryConfig {
            forecast_donors: ["JPN", "RUS", "BRA"].map(String::from).to_vec(),
            forecast_targets: ["EU27UK", "IND"].map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShippingConfig {
    /// Global shipping emissions in 2019, Mt CO₂.
    pub annual_2019: f64,
    pub international_share: f64,
}

impl Default for ShippingConfig {
    fn default() -> Self {
        ShippingConfig {
            annual_2019: 700.0,
            international_share: 0.87,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidentialConfig {
    pub hdd_base_c: f64,
}

impl Default for ResidentialConfig {
    fn default() -> Self {
        ResidentialConfig {
            hdd_base_c: DEFAULT_HDD_BASE_C,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoxConfig {
    pub country: CountryCode,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Shares of power, transport and industry in national NOx emissions.
    pub shares: [f64; 3],
}

impl Default for NoxConfig {
    fn default() -> Self {
        NoxConfig {
            country: CountryCode::new("CHN").expect("code"),
            start: NaiveDate::from_ymd_opt(2020, 1, 1).expect("date"),
            end: NaiveDate::from_ymd_opt(2020, 3, 31).expect("date"),
            shares: [0.32, 0.32, 0.32],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub default_growth_rate: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            default_growth_rate: DEFAULT_GROWTH_RATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fixture_dir: PathBuf,
    pub output_dir: PathBuf,
    pub window: Window,
    #[serde(default)]
    pub countries: CountrySelection,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub mc_trials: usize,
    /// Worker threads; 0 lets the runtime decide.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub sectors: SectorToggles,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default)]
    pub industry: IndustryConfig,
    #[serde(default)]
    pub aviation: AviationScale,
    #[serde(default)]
    pub shipping: ShippingConfig,
    #[serde(default)]
    pub residential: ResidentialConfig,
    #[serde(default)]
    pub nox: NoxConfig,
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> usize {
    10_000
}

impl RunConfig {
    /// Parses a config; relative paths are taken relative to `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("invalid run config: {e}")))?;
        if cfg.fixture_dir.is_relative() {
            cfg.fixture_dir = base_dir.join(&cfg.fixture_dir);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base_dir.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Reads a config file and applies the fixture-directory override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFixture(path.to_path_buf()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = RunConfig::from_toml_str(&text, base)?;
        if let Ok(dir) = std::env::var(FIXTURES_ENV) {
            if !dir.is_empty() {
                cfg.fixture_dir = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window.start > self.window.end {
            return Err(Error::Usage(format!(
                "empty window: {} is after {}",
                self.window.start, self.window.end
            )));
        }
        if let CountrySelection::Keyword(k) = &self.countries {
            if k != "all" {
                return Err(Error::config(format!("countries must be \"all\" or a list, got {k:?}")));
            }
        }
        if self.sectors.uncertainty && self.mc_trials < 1000 {
            return Err(Error::config(format!(
                "mc_trials must be at least 1000 when uncertainty is enabled, got {}",
                self.mc_trials
            )));
        }
        if let Some(adj) = &self.power.temp_adjustment {
            TemperatureAdjustment::new(adj.start, adj.end, adj.factor)?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(e.to_string()))
    }
}
