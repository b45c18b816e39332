use std::collections::BTreeMap;

use carbon_pulse::assembly::{
    aggregate, apply_row, nox_crosscheck, ClosurePolicy, GroupRate, GroupRates, Grouping, SeriesPair,
};
use carbon_pulse::bunkers::{daily_aviation_emissions, great_circle_km, FlightRecord, LatLon, ShippingBaseline};
use carbon_pulse::industry::{
    china_industry_growth, disaggregate_monthly_to_daily, group_growth, ipi_growth, ProductPair, SubSector,
    SubSectorShare, YearMonth,
};
use carbon_pulse::ingestion::{aggregate_daily, clean_column, modified_mad, DailyPowerMatrix, Reading};
use carbon_pulse::model::{
    build_baseline_2019, comparison_totals, compute_emission, date_range, distribute_annual_to_daily,
    AnnualInventory, CountryCode, CountryRegistry, DailyEmissionSeries, EmissionFactor, GrowthRate, Sector,
};
use carbon_pulse::power::{power_emission_series, GenerationKind, GenerationSeries};
use carbon_pulse::residential::{heating_emission_series, population_weighted_hdd, PopulationGrid, TemperatureGrid};
use carbon_pulse::transport::{
    aggregate_national, city_emission_change, sigmoid_eval, CityChange, CityWeight, CongestionSeries, SigmoidParams,
};
use carbon_pulse::uncertainty::{combine_mult, combine_sum};
use chrono::NaiveDate;
use proptest::prelude::*;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn cc(s: &str) -> CountryCode {
    CountryCode::new(s).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn series(country: &str, sector: Sector, start: NaiveDate, values: Vec<f64>) -> DailyEmissionSeries {
    DailyEmissionSeries::new(cc(country), sector, start, values).unwrap()
}

fn positive_vec(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..1e4, n)
}

proptest! {
    #[test]
    fn emission_is_linear_in_energy(e in 0.0f64..1e7, alpha in 0.0f64..100.0,
                                    h in 1.0f64..50.0, c in 1.0f64..30.0, o in 0.5f64..1.0) {
        let f = EmissionFactor::new(h, c, o).unwrap();
        let lhs = compute_emission(alpha * e, &f).unwrap();
        let rhs = alpha * compute_emission(e, &f).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn baseline_keeps_keys(entries in prop::collection::btree_map(0usize..20, 0.0f64..1e3, 0..20),
                           rate in -0.5f64..0.5) {
        let codes = ["AAA", "BBB", "CCC", "DDD", "EEE"];
        let mut inv = AnnualInventory::new(2018);
        for (k, mt) in &entries {
            inv.insert(cc(codes[k % 5]), Sector::NATIONAL[k / 5 % 5], *mt).unwrap();
        }
        let rates = [GrowthRate::new(cc("AAA"), rate).unwrap()];
        let out = build_baseline_2019(&inv, &rates, 0.01).unwrap();
        prop_assert_eq!(out.len(), inv.len());
        let before: Vec<_> = inv.entries().map(|(c, s, _)| (c, s)).collect();
        let after: Vec<_> = out.entries().map(|(c, s, _)| (c, s)).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn distribution_conserves_mass(annual in 0.0f64..1e9, w in positive_vec(1..400)) {
        let daily = distribute_annual_to_daily(annual, &w).unwrap();
        prop_assert_eq!(daily.len(), w.len());
        prop_assert!((daily.iter().sum::<f64>() - annual).abs() <= 1e-9 * annual.max(1e-300));
    }

    #[test]
    fn cleaning_leaves_unflagged_values(vals in prop::collection::vec(prop_oneof![
            8 => (0.0f64..1e3).prop_map(Reading::Value),
            1 => (1e4f64..1e6).prop_map(Reading::Value),
            1 => Just(Reading::Missing),
            1 => Just(Reading::NotANumber),
        ], 1..96)) {
        let nums: Vec<f64> = vals.iter().map(|r| match r { Reading::Value(v) => *v, _ => 0.0 }).collect();
        let present: Vec<f64> = vals.iter().filter(|r| !matches!(r, Reading::Missing)).map(|r| match r {
            Reading::Value(v) => *v, _ => 0.0 }).collect();
        prop_assume!(!present.is_empty());
        let mut sorted = present.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let med = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
        let mad = modified_mad(&present).unwrap();
        let (out, _) = clean_column(&vals).unwrap();
        for (i, (before, after)) in vals.iter().zip(&out).enumerate() {
            let flagged = matches!(before, Reading::Value(_)) && mad > 0.0 && (nums[i] - med).abs() > 3.0 * mad - 1e-6;
            if !flagged && !matches!(before, Reading::NotANumber) {
                prop_assert_eq!(before, after, "slot {} changed", i);
            }
        }
    }

    #[test]
    fn constant_column_aggregates_exactly(c in 0.0f64..1e5, interval in prop::sample::select(vec![15u32, 30, 60])) {
        let slots = (24 * 60 / interval) as usize;
        let mut columns = BTreeMap::new();
        columns.insert("Coal".to_string(), vec![Reading::Value(c); slots]);
        let m = DailyPowerMatrix { date: d(2020, 1, 1), interval_minutes: interval, columns };
        let (totals, omitted) = aggregate_daily(&m);
        prop_assert!(omitted.is_empty());
        prop_assert_eq!(totals["Coal"], c * slots as f64);
    }

    #[test]
    fn power_is_scale_invariant(g19 in positive_vec(10..11), g20 in positive_vec(10..11),
                                base in positive_vec(10..11), alpha in 1e-3f64..1e3) {
        let gen = |y: i32, v: &[f64]| GenerationSeries {
            country: cc("DEU"),
            kind: GenerationKind::Thermal,
            daily: v.iter().enumerate().map(|(i, x)| (d(y, 3, 1 + i as u32), *x)).collect(),
        };
        let (a19, a20) = (gen(2019, &g19), gen(2020, &g20));
        let b = series("DEU", Sector::Power, d(2019, 3, 1), base);
        let plain = power_emission_series(&a20, &a19, &b).unwrap();
        let scaled = power_emission_series(&a20.scaled(alpha), &a19.scaled(alpha), &b).unwrap();
        for (x, y) in plain.series_2020.values().iter().zip(scaled.series_2020.values()) {
            prop_assert!(rel_close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn feb29_only_moves_the_2020_side(v19 in positive_vec(31..32), v20 in positive_vec(31..32)) {
        let s19 = series("DEU", Sector::Power, d(2019, 2, 15), v19);
        let s20 = series("DEU", Sector::Power, d(2020, 2, 15), v20.clone());
        let (a, b) = comparison_totals(&s19, &s20, d(2020, 2, 15), d(2020, 3, 16));
        let feb29 = v20[14];
        let all_2020: f64 = v20.iter().sum();
        prop_assert!((all_2020 - b - feb29).abs() <= 1e-9 * all_2020);
        let matched_2019: f64 = s19.values()[..30].iter().sum();
        prop_assert!((a - matched_2019).abs() <= 1e-9 * a);
    }

    #[test]
    fn sigmoid_is_monotone(a in 0.0f64..100.0, b in 0.1f64..500.0, c in 0.1f64..8.0, dd in 0.5f64..100.0,
                           x1 in 0.0f64..200.0, x2 in 0.0f64..200.0) {
        let p = SigmoidParams::new(a, b, c, dd).unwrap();
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        prop_assert!(sigmoid_eval(lo, &p) <= sigmoid_eval(hi, &p));
    }

    #[test]
    fn relative_change_ignores_joint_scaling(a in 0.1f64..100.0, b in 0.1f64..500.0, c in 0.1f64..8.0,
                                             dd in 0.5f64..100.0, alpha in 0.01f64..100.0,
                                             x19 in 0.0f64..200.0, x20 in 0.0f64..200.0) {
        let cong = |y: i32, x: f64| CongestionSeries {
            city: "X".into(),
            country: cc("FRA"),
            daily: [(d(y, 4, 1), x)].into_iter().collect(),
        };
        let p = SigmoidParams::new(a, b, c, dd).unwrap();
        let q = SigmoidParams::new(alpha * a, alpha * b, c, dd).unwrap();
        let r1 = city_emission_change(&cong(2020, x20), &cong(2019, x19), &p).unwrap().daily[&d(2020, 4, 1)];
        let r2 = city_emission_change(&cong(2020, x20), &cong(2019, x19), &q).unwrap().daily[&d(2020, 4, 1)];
        prop_assert!((r1 - r2).abs() <= 1e-9 * (1.0 + r1.abs()));
    }

    #[test]
    fn national_change_within_city_range(cities in prop::collection::vec((-0.9f64..0.5, 0.0f64..10.0), 1..8)) {
        prop_assume!(cities.iter().any(|(_, w)| *w > 0.0));
        let day = d(2020, 3, 20);
        let changes: Vec<CityChange> = cities.iter().enumerate().map(|(i, (c, _))| CityChange {
            city: format!("c{i}"), country: cc("ITA"), daily: [(day, *c)].into_iter().collect(),
        }).collect();
        let weights: Vec<CityWeight> = cities.iter().enumerate().map(|(i, (_, w))| CityWeight {
            city: format!("c{i}"), country: cc("ITA"), weight: *w,
        }).collect();
        let national = aggregate_national(&changes, &weights).unwrap()[&day];
        let lo = cities.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = cities.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(national >= lo - 1e-12 && national <= hi + 1e-12);
    }

    #[test]
    fn basket_growth_is_bounded_and_linear(items in prop::collection::vec((0.1f64..10.0, 1.0f64..100.0, 0.0f64..200.0), 1..10),
                                           k in 0.0f64..3.0) {
        let total: f64 = items.iter().map(|i| i.0).sum();
        let basket: Vec<ProductPair> = items.iter().enumerate().map(|(i, (w, q19, q20))| ProductPair {
            product: format!("p{i}"), weight: w / total, q2019: *q19, q2020: *q20,
        }).collect();
        let g = group_growth(&basket).unwrap();
        let growths: Vec<f64> = items.iter().map(|(_, a, b)| b / a - 1.0).collect();
        let lo = growths.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = growths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(g >= lo - 1e-12 && g <= hi + 1e-12);
        // scaling every 2020 quantity by k maps each growth g to k(1+g) − 1
        let scaled: Vec<ProductPair> = basket.iter().map(|p| ProductPair { q2020: p.q2020 * k, ..p.clone() }).collect();
        let gk = group_growth(&scaled).unwrap();
        prop_assert!((gk - (k * (1.0 + g) - 1.0)).abs() <= 1e-9 * (1.0 + gk.abs()));
    }

    #[test]
    fn china_composite_is_linear(g1 in prop::array::uniform4(-0.5f64..0.5), g2 in prop::array::uniform4(-0.5f64..0.5),
                                 a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let shares = SubSectorShare::china_default();
        let map = |g: [f64; 4]| SubSector::ALL.iter().zip(g).map(|(s, v)| (*s, v)).collect::<BTreeMap<_, _>>();
        let mixed: [f64; 4] = std::array::from_fn(|i| a * g1[i] + b * g2[i]);
        let lhs = china_industry_growth(&map(mixed), &shares).unwrap();
        let rhs = a * china_industry_growth(&map(g1), &shares).unwrap() + b * china_industry_growth(&map(g2), &shares).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
        let single = china_industry_growth(&map(g1), &shares).unwrap();
        let lo = g1.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(single >= lo - 1e-12 && single <= hi + 1e-12);
    }

    #[test]
    fn monthly_disaggregation_conserves_mass(monthly in 0.0f64..1e8, elec in positive_vec(29..30)) {
        let month = YearMonth::new(2020, 2).unwrap();
        let daily: BTreeMap<_, _> = date_range(d(2020, 2, 1), d(2020, 2, 29)).zip(elec).collect();
        let (values, uniform) = disaggregate_monthly_to_daily(monthly, month, &daily).unwrap();
        prop_assert!(!uniform);
        prop_assert!((values.iter().sum::<f64>() - monthly).abs() <= 1e-9 * monthly.max(1e-300));
    }

    #[test]
    fn ipi_growth_matches_decumulated_oracle(m19 in prop::collection::vec(50.0f64..150.0, 4),
                                             m20 in prop::collection::vec(50.0f64..150.0, 4)) {
        // cumulative index = running mean of the monthly index
        let cumulate = |m: &[f64]| -> BTreeMap<u32, f64> {
            (1..=m.len()).map(|k| (k as u32, m[..k].iter().sum::<f64>() / k as f64)).collect()
        };
        let (c19, c20) = (cumulate(&m19), cumulate(&m20));
        for month in 1..=4u32 {
            let k = month as usize;
            let oracle = m20[..k].iter().sum::<f64>() / m19[..k].iter().sum::<f64>() - 1.0;
            let g = ipi_growth(&c19, &c20, "XYZ", month).unwrap();
            prop_assert!((g - oracle).abs() <= 1e-12);
        }
    }

    #[test]
    fn great_circle_is_a_metric(p in prop::array::uniform3((-90.0f64..90.0, -180.0f64..180.0))) {
        let [a, b, c] = p.map(|(lat, lon)| LatLon::new(lat, lon).unwrap());
        let ab = great_circle_km(a, b).unwrap();
        prop_assert!((ab - great_circle_km(b, a).unwrap()).abs() <= 1e-9);
        let ac = great_circle_km(a, c).unwrap();
        let cb = great_circle_km(c, b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-6);
        prop_assert!(great_circle_km(a, a).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn aviation_partition_and_linearity(flights in prop::collection::vec(
            (prop::option::of(0usize..3), prop::option::of(0usize..3), -60.0f64..60.0, -60.0f64..60.0, 0u32..3), 1..40),
            factor in 1.0f64..50.0, k in 0.5f64..4.0) {
        let codes = ["USA", "CHN", "BRA"];
        let build = |stretch: f64| -> Vec<FlightRecord> {
            flights.iter().enumerate().map(|(i, (o, de, lat, lon, day))| FlightRecord {
                flight_id: format!("F{i}"),
                date: d(2020, 1, 1 + day),
                origin: o.map(|j| cc(codes[j])),
                dest: de.map(|j| cc(codes[j])),
                // meridian tracks so that stretching latitude stretches km exactly
                waypoints: vec![LatLon::new(0.0, *lon).unwrap(), LatLon::new(lat * stretch / 4.0, *lon).unwrap()],
            }).collect()
        };
        let base = daily_aviation_emissions(&build(1.0), factor).unwrap();
        let total = |a: &carbon_pulse::bunkers::AviationEmissions| a.global.values().sum::<f64>();
        let parts = |a: &carbon_pulse::bunkers::AviationEmissions| -> f64 {
            a.domestic.values().chain(a.international.values()).flat_map(|m| m.values()).sum()
        };
        prop_assert!((total(&base) - parts(&base)).abs() <= 1e-9 * total(&base).max(1.0));
        let n_dom = flights.iter().filter(|(o, de, ..)| o.is_some() && o == de).count();
        prop_assert_eq!(base.unattributed, flights.iter().filter(|(o, de, ..)| o.is_none() || de.is_none()).count());
        prop_assert!(n_dom + base.unattributed <= flights.len());
        let heavier = daily_aviation_emissions(&build(1.0), factor * k).unwrap();
        prop_assert!(rel_close(total(&heavier), k * total(&base), 1e-9) || total(&base) == 0.0);
        let longer = daily_aviation_emissions(&build(k), factor).unwrap();
        prop_assert!(rel_close(total(&longer), k * total(&base), 1e-9) || total(&base) == 0.0);
    }

    #[test]
    fn shipping_baseline_is_flat(annual in 0.0f64..2000.0, share in 0.01f64..1.0) {
        let s = ShippingBaseline::new(annual, share).unwrap().series_2019(d(2019, 1, 1), d(2019, 4, 30)).unwrap();
        prop_assert!(s.values().iter().all(|v| *v == s.values()[0]));
    }

    #[test]
    fn hdd_is_nonnegative_and_antitone(temps in prop::collection::vec(-40.0f64..40.0, 3), warm in 0.0f64..20.0,
                                       pops in prop::collection::vec(0.0f64..1e6, 3), base in 10.0f64..20.0) {
        prop_assume!(pops.iter().sum::<f64>() > 0.0);
        let mut grid = TemperatureGrid::default();
        let mut pop = PopulationGrid::default();
        for (i, (t, p)) in temps.iter().zip(&pops).enumerate() {
            let lat = 40.0 + i as f64;
            grid.insert(d(2020, 1, 1), lat, 10.0, *t).unwrap();
            grid.insert(d(2020, 1, 2), lat, 10.0, t + warm).unwrap();
            pop.push(lat, 10.0, cc("FRA"), *p).unwrap();
        }
        let hdd = population_weighted_hdd(&grid, &pop, cc("FRA"), base).unwrap();
        prop_assert!(hdd.values().all(|h| *h >= 0.0));
        prop_assert!(hdd[&d(2020, 1, 2)] <= hdd[&d(2020, 1, 1)] + 1e-12);
    }

    #[test]
    fn heating_sums_to_annual_and_cooking_ignores_weather(hdd in prop::collection::vec(0.0f64..30.0, 365),
                                                          heating in 0.0f64..1e7, cooking in 0.0f64..1e7,
                                                          shift in 0.0f64..5.0) {
        let total: f64 = hdd.iter().sum();
        prop_assume!(total > 0.0);
        let start = d(2019, 1, 1);
        let map: BTreeMap<_, _> = date_range(start, d(2019, 12, 31)).zip(hdd.iter().copied()).collect();
        let s = heating_emission_series(cc("DEU"), heating, cooking, &map, total, start, d(2019, 12, 31)).unwrap();
        prop_assert!((s.sum() - heating - cooking).abs() <= 1e-9 * (heating + cooking).max(1e-300));
        let warmer: BTreeMap<_, _> = map.iter().map(|(k, v)| (*k, (v - shift).max(0.0))).collect();
        let warm_total: f64 = warmer.values().sum();
        prop_assume!(warm_total > 0.0);
        let cook_only = heating_emission_series(cc("DEU"), 0.0, cooking, &warmer, warm_total, start, d(2019, 12, 31)).unwrap();
        let cook_ref = heating_emission_series(cc("DEU"), 0.0, cooking, &map, total, start, d(2019, 12, 31)).unwrap();
        prop_assert_eq!(cook_only, cook_ref);
    }

    #[test]
    fn aggregate_sums_its_parts(vals in prop::collection::vec((0usize..4, 0usize..5, 1.0f64..1e6, 1.0f64..1e6), 1..20)) {
        let codes = ["CHN", "DEU", "KOR", "USA"];
        let mut seen = std::collections::BTreeSet::new();
        let pairs: Vec<SeriesPair> = vals.iter().filter(|(c, s, ..)| seen.insert((*c, *s))).map(|(c, s, a, b)| {
            let sector = Sector::NATIONAL[*s];
            SeriesPair::new(
                series(codes[*c], sector, d(2019, 1, 1), vec![*a; 120]),
                series(codes[*c], sector, d(2020, 1, 1), vec![*b; 121]),
            ).unwrap()
        }).collect();
        let reg = CountryRegistry::builtin();
        let (s, e) = (d(2020, 1, 1), d(2020, 4, 30));
        let parts: f64 = pairs.iter().map(|p| p.window_totals(s, e).unwrap().mt_2020).sum();
        for g in [Grouping::Country, Grouping::RegionGroup, Grouping::Sector, Grouping::Global] {
            let rows = aggregate(&pairs, g, s, e, reg).unwrap();
            let sum: f64 = rows.values().map(|w| w.mt_2020).sum();
            prop_assert!((sum - parts).abs() <= 1e-9 * parts);
            let rounded: f64 = rows.values().map(|w| (w.mt_2020 * 10.0).round() / 10.0).sum();
            prop_assert!((rounded - parts).abs() <= 0.3 + 0.05 * rows.len() as f64);
        }
    }

    #[test]
    fn row_keeps_baseline_outside_closure(annual in 1.0f64..500.0, closure_rate in -0.9f64..0.0,
                                          close_day in 1u32..28) {
        let mut inv = AnnualInventory::new(2019);
        inv.insert(cc("KOR"), Sector::Power, annual).unwrap();
        let start = d(2020, 3, 1);
        let end = d(2020, 3, 31);
        let rates: GroupRates = [((Sector::Power, YearMonth::new(2020, 3).unwrap()),
            GroupRate { with_closure: closure_rate, without_closure: 0.0 })].into_iter().collect();
        let closure = d(2020, 3, close_day);
        let policies: BTreeMap<_, _> = [(cc("KOR"), ClosurePolicy::new(cc("KOR"), true, Some(closure), None).unwrap())].into_iter().collect();
        let out = apply_row(&inv, &[(cc("KOR"), Sector::Power)], &rates, &policies, start, end).unwrap();
        for (day, v) in out[0].s2020.iter() {
            let base = annual * 1e6 / 366.0;
            if day < closure {
                prop_assert!((v - base).abs() <= 1e-9 * base);
            } else {
                prop_assert!((v - base * (1.0 + closure_rate)).abs() <= 1e-9 * base);
            }
        }
    }

    #[test]
    fn nox_within_sector_range(items in prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0), 1..6)) {
        let total: f64 = items.iter().map(|i| i.1).sum();
        prop_assume!(total > 0.0);
        let changes: Vec<f64> = items.iter().map(|i| i.0).collect();
        let shares: Vec<f64> = items.iter().map(|i| i.1 / total).collect();
        let x = nox_crosscheck(&changes, &shares).unwrap();
        let lo = changes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = changes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
    }

    #[test]
    fn combine_sum_ignores_common_scale(items in prop::collection::vec((0.0f64..50.0, 0.1f64..100.0), 1..8),
                                        alpha in 1e-3f64..1e3) {
        let u: Vec<f64> = items.iter().map(|i| i.0).collect();
        let mu: Vec<f64> = items.iter().map(|i| i.1).collect();
        let scaled: Vec<f64> = mu.iter().map(|m| m * alpha).collect();
        let a = combine_sum(&u, &mu).unwrap();
        let b = combine_sum(&u, &scaled).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn combine_mult_symmetric_and_monotone(u in prop::collection::vec(0.0f64..50.0, 1..8), bump in 0.0f64..10.0,
                                           i in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let base = combine_mult(&u).unwrap();
        let mut shuffled = u.clone();
        let n = shuffled.len();
        for k in 0..n {
            shuffled.swap(k, (seed as usize).wrapping_add(k * 7) % n);
        }
        prop_assert!((combine_mult(&shuffled).unwrap() - base).abs() <= 1e-9 * base.max(1.0));
        let mut bigger = u.clone();
        bigger[i.index(n)] += bump;
        prop_assert!(combine_mult(&bigger).unwrap() >= base - 1e-12);
    }
}

#[test]
fn window_change_is_a_ratio_of_sums() {
    let s19 = series("DEU", Sector::Power, d(2019, 3, 1), vec![100.0, 1.0]);
    let s20 = series("DEU", Sector::Power, d(2020, 3, 1), vec![50.0, 2.0]);
    let pair = SeriesPair::new(s19, s20).unwrap();
    let w = pair.window_totals(d(2020, 3, 1), d(2020, 3, 2)).unwrap();
    // Σ-ratio: 52/101 − 1; the mean of daily ratios would be (−0.5 + 1.0)/2 = +0.25
    assert!((w.growth() - (52.0 / 101.0 - 1.0)).abs() < 1e-12);
    assert!(w.growth() < 0.0);
}

#[test]
fn noiseless_sigmoid_fit_is_exact() {
    let truth = SigmoidParams::new(48.0, 210.0, 2.2, 28.0).unwrap();
    let pairs: Vec<(f64, f64)> = (0..60).map(|i| {
        let x = i as f64 * 1.5;
        (x, sigmoid_eval(x, &truth))
    }).collect();
    let fit = carbon_pulse::transport::fit_sigmoid(&pairs).unwrap();
    let rms = (pairs.iter().map(|(x, q)| (sigmoid_eval(*x, &fit.params) - q).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt();
    assert!(rms <= 1e-6, "rms {rms}");
}

#[test]
fn modified_mad_matches_brute_force() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let k = carbon_pulse::ingestion::mad_scale();
    for _ in 0..1000 {
        let n = rng.gen_range(1..60);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let med = |x: &[f64]| {
            let mut s = x.to_vec();
            s.sort_by(f64::total_cmp);
            let m = s.len();
            if m % 2 == 1 { s[m / 2] } else { (s[m / 2 - 1] + s[m / 2]) / 2.0 }
        };
        let m = med(&v);
        let dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
        let oracle = k * med(&dev);
        assert!((modified_mad(&v).unwrap() - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }
}
