//! Fits the congestion-to-traffic sigmoid to noisy samples and turns a
//! city's congestion drop into a daily emission change.

use std::collections::BTreeMap;

use carbon_pulse::model::{date_range, CountryCode};
use carbon_pulse::transport::{city_emission_change, fit_sigmoid, sigmoid_eval, CongestionSeries, SigmoidParams};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> carbon_pulse::Result<()> {
    let truth = SigmoidParams::new(48.0, 210.0, 2.2, 28.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(1.0, 0.03).unwrap();
    let samples: Vec<(f64, f64)> = (0..150)
        .map(|_| {
            let x = rng.gen_range(0.0..90.0);
            (x, sigmoid_eval(x, &truth) * noise.sample(&mut rng))
        })
        .collect();

    let fit = fit_sigmoid(&samples)?;
    let p = fit.params;
    println!("fitted a={:.1} b={:.1} c={:.2} d={:.1}  R²={:.3}  ({} iterations)", p.a, p.b, p.c, p.d, fit.r_squared, fit.iterations);

    let paris = CountryCode::new("FRA")?;
    let series = |year: i32, level: &dyn Fn(u32) -> f64| CongestionSeries {
        city: "Paris".into(),
        country: paris,
        daily: date_range(NaiveDate::from_ymd_opt(year, 3, 1).unwrap(), NaiveDate::from_ymd_opt(year, 3, 31).unwrap())
            .enumerate()
            .map(|(i, day)| (day, level(i as u32)))
            .collect::<BTreeMap<_, _>>(),
    };
    let x19 = series(2019, &|_| 35.0);
    let x20 = series(2020, &|i| if i < 16 { 33.0 } else { 6.0 });
    let change = city_emission_change(&x20, &x19, &fit.params)?;
    for (day, c) in change.daily.iter().step_by(5) {
        println!("  {day}  {:+.1}%", 100.0 * c);
    }
    Ok(())
}
