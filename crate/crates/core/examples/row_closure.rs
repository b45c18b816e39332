//! Rest-of-world estimates: monthly change rates of countries with and
//! without closures, applied to uniform baselines of unobserved countries.

use std::collections::BTreeMap;

use carbon_pulse::assembly::{apply_row, closure_group_rates, ClosurePolicy, SeriesPair};
use carbon_pulse::model::{date_range, AnnualInventory, CountryCode, DailyEmissionSeries, Sector};
use chrono::NaiveDate;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn observed(code: &str, tonnes: f64, drop_from: NaiveDate, drop: f64) -> carbon_pulse::Result<SeriesPair> {
    let c = CountryCode::new(code)?;
    let s19 = DailyEmissionSeries::new(c, Sector::Power, d(2019, 1, 1), vec![tonnes; 120])?;
    let v20 = date_range(d(2020, 1, 1), d(2020, 4, 30))
        .map(|day| if day >= drop_from { tonnes * (1.0 - drop) } else { tonnes })
        .collect();
    SeriesPair::new(s19, DailyEmissionSeries::new(c, Sector::Power, d(2020, 1, 1), v20)?)
}

fn main() -> carbon_pulse::Result<()> {
    let (start, end) = (d(2020, 1, 1), d(2020, 4, 30));
    let estimated = vec![
        observed("FRA", 60_000.0, d(2020, 3, 17), 0.25)?,
        observed("ITA", 90_000.0, d(2020, 3, 9), 0.30)?,
        observed("SWE", 20_000.0, d(2020, 3, 1), 0.03)?,
    ];
    let policy = |code: &str, start: Option<NaiveDate>| {
        let c = CountryCode::new(code).unwrap();
        (c, ClosurePolicy::new(c, start.is_some(), start, None).unwrap())
    };
    let policies: BTreeMap<_, _> = [
        policy("FRA", Some(d(2020, 3, 17))),
        policy("ITA", Some(d(2020, 3, 9))),
        policy("SWE", None),
        policy("KOR", None),
        policy("ZAF", Some(d(2020, 3, 27))),
    ]
    .into_iter()
    .collect();

    let rates = closure_group_rates(&estimated, &[Sector::Power], &policies, start, end)?;
    for ((_, month), r) in &rates {
        println!("{month}: with closures {:+.2}%, without {:+.2}%", 100.0 * r.with_closure, 100.0 * r.without_closure);
    }

    let mut inventory = AnnualInventory::new(2019);
    inventory.insert(CountryCode::new("KOR")?, Sector::Power, 280.0)?;
    inventory.insert(CountryCode::new("ZAF")?, Sector::Power, 230.0)?;
    let targets: Vec<_> = inventory.entries().map(|(c, s, _)| (c, s)).collect();
    for pair in apply_row(&inventory, &targets, &rates, &policies, start, end)? {
        let w = pair.window_totals(start, end)?;
        println!("{}: {:.2} -> {:.2} Mt ({:+.2}%)", pair.country(), w.mt_2019, w.mt_2020, 100.0 * w.growth());
    }
    Ok(())
}
