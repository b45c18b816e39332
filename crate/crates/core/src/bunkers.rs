//! Aviation from flight tracks and international shipping from vessel volume.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{date_range, CountryCode, DailyEmissionSeries, Sector, TONNES_PER_MT};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::domain(format!("invalid coordinate ({lat}, {lon})")));
        }
        Ok(LatLon { lat, lon })
    }
}

/// Haversine distance on a sphere.
pub fn great_circle_km(p1: LatLon, p2: LatLon) -> Result<f64> {
    let p1 = LatLon::new(p1.lat, p1.lon)?;
    let p2 = LatLon::new(p2.lat, p2.lon)?;
    let (phi1, phi2) = (p1.lat.to_radians(), p2.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (p2.lon - p1.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    Ok(2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin())
}

/// Length of a track as the sum of its legs.
pub fn path_km(waypoints: &[LatLon]) -> Result<f64> {
    if waypoints.len() < 2 {
        return Err(Error::domain("a flight track needs at least two waypoints"));
    }
    waypoints
        .windows(2)
        .map(|w| great_circle_km(w[0], w[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AviationScale {
    /// Mt CO₂ in 2018.
    pub icct_2018: f64,
    pub growth_2019: f64,
    /// Tracked kilometres flown in 2019.
    pub km_2019: f64,
}

impl Default for AviationScale {
    fn default() -> Self {
        AviationScale {
            icct_2018: 918.0,
            growth_2019: 0.03,
            km_2019: 67.91e9,
        }
    }
}

/// kg CO₂ per tracked kilometre.
pub fn aviation_factor(scale: &AviationScale) -> Result<f64> {
    if !(scale.km_2019 > 0.0) || !(scale.icct_2018 >= 0.0) || !(scale.growth_2019 > -1.0) {
        return Err(Error::domain(format!("invalid aviation scale {scale:?}")));
    }
    // Mt → kg is 1e9
    Ok(scale.icct_2018 * 1e9 * (1.0 + scale.growth_2019) / scale.km_2019)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightRecord {
    pub flight_id: String,
    pub date: NaiveDate,
    pub origin: Option<CountryCode>,
    pub dest: Option<CountryCode>,
    pub waypoints: Vec<LatLon>,
}

impl FlightRecord {
    pub fn is_domestic(&self) -> bool {
        matches!((self.origin, self.dest), (Some(a), Some(b)) if a == b)
    }
}

/// Daily aviation emissions in tonnes CO₂.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AviationEmissions {
    pub global: BTreeMap<NaiveDate, f64>,
    pub domestic: BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>>,
    /// International flights keyed by origin country; untraceable ones under `WLD`.
    pub international: BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>>,
    pub unattributed: usize,
}

impl AviationEmissions {
    /// Sum of all international flights per day.
    pub fn international_total(&self) -> BTreeMap<NaiveDate, f64> {
        let mut out = BTreeMap::new();
        for series in self.international.values() {
            for (d, v) in series {
                *out.entry(*d).or_insert(0.0) += v;
            }
        }
        out
    }
}

pub fn daily_aviation_emissions(flights: &[FlightRecord], factor_kg_per_km: f64) -> Result<AviationEmissions> {
    if !(factor_kg_per_km > 0.0) {
        return Err(Error::domain(format!("aviation factor {factor_kg_per_km} must be > 0")));
    }
    let kms: Vec<f64> = flights
        .par_iter()
        .map(|f| {
            path_km(&f.waypoints).map_err(|e| Error::domain(format!("flight {}: {e}", f.flight_id)))
        })
        .collect::<Result<_>>()?;
    let mut out = AviationEmissions::default();
    for (f, km) in flights.iter().zip(kms) {
        let tonnes = km * factor_kg_per_km / 1000.0;
        *out.global.entry(f.date).or_insert(0.0) += tonnes;
        let (bucket, country) = match (f.origin, f.dest) {
            (Some(a), Some(b)) if a == b => (&mut out.domestic, a),
            (Some(a), Some(_)) => (&mut out.international, a),
            _ => {
                log::debug!("flight {} on {} has no country; counted as global international", f.flight_id, f.date);
                out.unattributed += 1;
                (&mut out.international, CountryCode::WORLD)
            }
        };
        *bucket.entry(country).or_default().entry(f.date).or_insert(0.0) += tonnes;
    }
    Ok(out)
}

/// Fills a sparse daily map into a contiguous series, with zeros on empty days.
pub fn densify(
    country: CountryCode,
    sector: Sector,
    sparse: &BTreeMap<NaiveDate, f64>,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<DailyEmissionSeries> {
    let values = date_range(start, end)
        .map(|d| sparse.get(&d).copied().unwrap_or(0.0))
        .collect();
    DailyEmissionSeries::new(country, sector, start, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShippingBaseline {
    /// Global shipping emissions in 2019, Mt CO₂.
    pub annual_2019: f64,
    pub international_share: f64,
}

impl ShippingBaseline {
    pub fn new(annual_2019: f64, international_share: f64) -> Result<Self> {
        if !(annual_2019 >= 0.0 && annual_2019.is_finite()) {
            return Err(Error::domain(format!("shipping baseline {annual_2019} must be ≥ 0")));
        }
        if !(international_share > 0.0 && international_share <= 1.0) {
            return Err(Error::domain(format!(
                "international share {international_share} must be in (0, 1]"
            )));
        }
        Ok(ShippingBaseline {
            annual_2019,
            international_share,
        })
    }

    /// Flat daily international shipping emissions for 2019, in tonnes.
    pub fn daily_2019(&self) -> f64 {
        self.annual_2019 * self.international_share * TONNES_PER_MT / 365.0
    }

    pub fn series_2019(&self, start: NaiveDate, end: NaiveDate) -> Result<DailyEmissionSeries> {
        let n = date_range(start, end).count();
        DailyEmissionSeries::new(CountryCode::WORLD, Sector::InternationalShipping, start, vec![self.daily_2019(); n])
    }
}

/// 2020 shipping emissions scaled by the change in vessel volume.
pub fn shipping_series(
    baseline: &ShippingBaseline,
    volume_change: &BTreeMap<NaiveDate, f64>,
) -> Result<DailyEmissionSeries> {
    let daily = baseline.daily_2019();
    let mut values = BTreeMap::new();
    for (d, c) in volume_change {
        if !(*c > -1.0) {
            return Err(Error::domain(format!("{d}: volume change {c} must be > -1")));
        }
        values.insert(*d, daily * (1.0 + c));
    }
    DailyEmissionSeries::from_map(CountryCode::WORLD, Sector::InternationalShipping, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(lat: f64, lon: f64) -> LatLon {
        LatLon::new(lat, lon).unwrap()
    }

    fn d(m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, m, day).unwrap()
    }

    #[test]
    fn haversine_landmarks() {
        assert_eq!(great_circle_km(p(10.0, 20.0), p(10.0, 20.0)).unwrap(), 0.0);
        assert!((great_circle_km(p(0.0, 0.0), p(0.0, 90.0)).unwrap() - 10007.5).abs() < 0.1);
        assert!((great_circle_km(p(0.0, 0.0), p(0.0, 180.0)).unwrap() - 20015.1).abs() < 0.1);
        assert!(great_circle_km(LatLon { lat: 91.0, lon: 0.0 }, p(0.0, 0.0)).is_err());
        assert!(path_km(&[p(0.0, 0.0)]).is_err());
    }

    #[test]
    fn factor_values() {
        let f = aviation_factor(&AviationScale::default()).unwrap();
        assert!((f - 13.92).abs() < 0.01, "{f}");
        let round = AviationScale { icct_2018: 918.0, growth_2019: 0.0, km_2019: 918e8 };
        assert_relative_eq!(aviation_factor(&round).unwrap(), 10.0, max_relative = 1e-12);
        let double = AviationScale { km_2019: 2.0 * 918e8, ..round };
        assert_relative_eq!(aviation_factor(&double).unwrap(), 5.0, max_relative = 1e-12);
        assert!(aviation_factor(&AviationScale { km_2019: 0.0, ..round }).is_err());
    }

    fn flight(id: &str, o: Option<&str>, t: Option<&str>, pts: Vec<LatLon>) -> FlightRecord {
        FlightRecord {
            flight_id: id.into(),
            date: d(1, 10),
            origin: o.map(|c| CountryCode::new(c).unwrap()),
            dest: t.map(|c| CountryCode::new(c).unwrap()),
            waypoints: pts,
        }
    }

    #[test]
    fn domestic_flight_attribution() {
        assert_eq!(daily_aviation_emissions(&[], 13.92).unwrap(), AviationEmissions::default());
        // one degree of longitude along the equator is R·π/180 km
        let one_deg = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
        let lon = 1000.0 / one_deg;
        let f = flight("CA1", Some("CHN"), Some("CHN"), vec![p(0.0, 0.0), p(0.0, lon)]);
        let out = daily_aviation_emissions(&[f], 13.92).unwrap();
        let chn = CountryCode::new("CHN").unwrap();
        assert_relative_eq!(out.domestic[&chn][&d(1, 10)], 13.92, max_relative = 1e-9);
        assert!(out.international.is_empty());
    }

    #[test]
    fn international_and_unattributed() {
        let pts = vec![p(0.0, 0.0), p(0.0, 1.0)];
        let flights = vec![
            flight("a", Some("FRA"), Some("DEU"), pts.clone()),
            flight("b", None, Some("DEU"), pts.clone()),
            flight("c", Some("FRA"), Some("FRA"), pts),
        ];
        let out = daily_aviation_emissions(&flights, 10.0).unwrap();
        assert_eq!(out.unattributed, 1);
        assert!(out.international.contains_key(&CountryCode::WORLD));
        let fra = CountryCode::new("FRA").unwrap();
        let leg = great_circle_km(p(0.0, 0.0), p(0.0, 1.0)).unwrap() * 10.0 / 1000.0;
        assert_relative_eq!(out.global[&d(1, 10)], 3.0 * leg, max_relative = 1e-12);
        assert_relative_eq!(out.international_total()[&d(1, 10)], 2.0 * leg, max_relative = 1e-12);
        assert_relative_eq!(out.domestic[&fra][&d(1, 10)], leg, max_relative = 1e-12);
    }

    #[test]
    fn shipping_scaling() {
        let base = ShippingBaseline::new(800.0, 0.87).unwrap();
        let s19 = base.series_2019(d(1, 1), d(4, 30)).unwrap();
        assert!(s19.values().windows(2).all(|w| w[0] == w[1]));
        let flat: BTreeMap<_, _> = date_range(d(1, 1), d(4, 30)).map(|x| (x, 0.0)).collect();
        assert_eq!(shipping_series(&base, &flat).unwrap().values(), s19.values());
        let down: BTreeMap<_, _> = flat.keys().map(|x| (*x, -0.15)).collect();
        let s20 = shipping_series(&base, &down).unwrap();
        assert_relative_eq!(s20.sum() / s19.sum() - 1.0, -0.15, max_relative = 1e-12);
        let crash: BTreeMap<_, _> = [(d(1, 1), -1.0)].into_iter().collect();
        assert!(shipping_series(&base, &crash).is_err());
        assert!(ShippingBaseline::new(1.0, 0.0).is_err());
    }
}
