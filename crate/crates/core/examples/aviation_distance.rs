//! Great-circle track lengths, the per-kilometre aviation factor, and the
//! domestic/international split of a day's flights.

use carbon_pulse::bunkers::{aviation_factor, daily_aviation_emissions, great_circle_km, AviationScale, FlightRecord, LatLon};
use carbon_pulse::model::CountryCode;
use chrono::NaiveDate;

fn main() -> carbon_pulse::Result<()> {
    let pek = LatLon::new(40.08, 116.58)?;
    let pvg = LatLon::new(31.14, 121.81)?;
    let cdg = LatLon::new(49.01, 2.55)?;
    println!("PEK-PVG {:.0} km, PEK-CDG {:.0} km", great_circle_km(pek, pvg)?, great_circle_km(pek, cdg)?);

    let factor = aviation_factor(&AviationScale::default())?;
    println!("factor {factor:.2} kg CO2 per tracked km");

    let day = NaiveDate::from_ymd_opt(2020, 1, 15).unwrap();
    let chn = CountryCode::new("CHN")?;
    let fra = CountryCode::new("FRA")?;
    let flight = |id: &str, origin, dest, track: Vec<LatLon>| FlightRecord {
        flight_id: id.into(),
        date: day,
        origin,
        dest,
        waypoints: track,
    };
    let flights = vec![
        flight("MU5100", Some(chn), Some(chn), vec![pek, LatLon::new(36.0, 119.0)?, pvg]),
        flight("AF129", Some(chn), Some(fra), vec![pek, LatLon::new(55.0, 60.0)?, cdg]),
        flight("X1", None, None, vec![LatLon::new(0.0, -30.0)?, LatLon::new(10.0, -30.0)?]),
    ];
    let em = daily_aviation_emissions(&flights, factor)?;
    println!("global      {:.1} t", em.global[&day]);
    for (c, s) in &em.domestic {
        println!("domestic    {c} {:.1} t", s[&day]);
    }
    for (c, s) in &em.international {
        println!("internat.   {c} {:.1} t", s[&day]);
    }
    println!("{} flight(s) without a country", em.unattributed);
    Ok(())
}
