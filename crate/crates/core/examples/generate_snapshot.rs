//! Writes the bundled synthetic snapshot under `fixtures/snapshot`, tunes one
//! additive knob per sector until the pipeline reproduces the target
//! Jan–Apr sector changes, then freezes the outputs under `fixtures/golden`.
//!
//! ```text
//! cargo run --release --example generate_snapshot
//! ```
//!
//! Regional and monthly targets are fixed constants below; the
//! knobs only absorb what the pipeline adds on top (temperature adjustment,
//! cleaning, rounding, closure rates for rest-of-world countries).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use carbon_pulse::assembly::TableS2;
use carbon_pulse::bunkers::{aviation_factor, AviationScale, EARTH_RADIUS_KM};
use carbon_pulse::model::{date_range, reference_day, CountryRegistry, RegionGroup, Sector, TONNES_PER_MT};
use carbon_pulse::pipeline::{estimate, run, RunConfig};
use carbon_pulse::transport::{fit_sigmoid, sigmoid_eval, SigmoidParams};
use carbon_pulse::uncertainty::UncertaintyLedger;
use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

/// Jan–Apr 2019 masses (Mt): power, transport, industry, residential, domestic aviation.
const BASE: [[f64; 5]; 8] = [
    [1518.3, 300.4, 1251.4, 277.8, 33.3],
    [256.4, 96.0, 279.7, 270.4, 3.0],
    [538.3, 563.3, 267.2, 311.4, 35.5],
    [364.4, 291.3, 206.8, 289.5, 5.1],
    [291.7, 76.6, 26.7, 163.3, 1.3],
    [182.2, 63.2, 91.7, 70.4, 1.0],
    [17.5, 18.6, 44.0, 60.0, 2.1],
    [1431.9, 779.8, 934.1, 188.9, 44.0],
];

/// Jan–Apr 2020 minus 2019 (Mt), same layout.
const DECLINE: [[f64; 5]; 8] = [
    [-91.1, -84.4, -43.8, -7.5, -7.8],
    [-39.7, -21.4, -22.1, 7.3, -0.7],
    [-43.8, -78.3, -17.1, -14.8, -8.3],
    [-82.0, -26.8, -15.1, -13.3, -1.2],
    [-7.0, -3.6, 0.2, -8.1, -0.3],
    [-5.5, -4.3, -5.5, -1.9, -0.2],
    [1.1, -8.3, -2.2, 0.0, -0.5],
    [-24.6, -113.1, -30.7, -5.1, -10.3],
];

const INTL_AVIATION: (f64, f64) = (196.1, -63.6);
const SHIPPING: (f64, f64) = (216.8, -32.6);

/// Monthly changes (%), Jan..Apr, per region.
const POWER_MONTHLY: [[f64; 4]; 8] = [
    [-3.6, -14.4, -8.0, 1.1],
    [-0.3, 9.0, -12.8, -29.9],
    [-10.6, -2.8, -8.6, -8.4],
    [-18.0, -26.6, -10.7, -36.6],
    [-3.4, 0.5, -2.9, -3.9],
    [-5.4, -0.1, -2.1, -3.8],
    [98.7, -10.0, -18.8, -24.3],
    [0.2, 0.2, -1.8, -7.3],
];
const TRANSPORT_MONTHLY: [[f64; 4]; 8] = [
    [-18.5, -53.4, -25.9, -16.3],
    [0.6, 1.9, -25.9, -65.6],
    [11.2, 9.9, -22.8, -50.0],
    [6.0, 7.0, -16.6, -32.1],
    [6.1, 6.0, -3.5, -26.1],
    [-3.0, 1.0, -7.2, -17.5],
    [3.0, -0.2, -15.1, -37.7],
    [3.8, 0.5, -22.0, -42.2],
];
const INDUSTRY_MONTHLY: [[f64; 4]; 8] = [
    [-7.5, -6.2, -5.0, 3.3],
    [1.6, 3.1, -20.6, -14.8],
    [-0.7, -0.1, -5.9, -18.8],
    [-1.2, -1.3, -12.0, -14.8],
    [3.9, 4.9, 2.6, -9.4],
    [-2.4, -5.6, -5.3, -10.6],
    [1.5, -0.4, -4.2, -16.0],
    [-2.0, -2.0, -3.1, -6.2],
];

/// China: crude steel and cement output growth (%), Jan..Apr.
const CHN_STEEL: [f64; 4] = [1.5, 5.0, -1.7, 0.0];
const CHN_CEMENT: [f64; 4] = [-29.5, -29.5, -18.3, 3.8];
/// China cement process emissions in the Jan–Apr window (Mt).
const CHN_PROCESS_WINDOW: f64 = 259.0;
const SUBSECTOR_SHARES: [(&str, f64); 4] = [("steel", 0.416), ("cement", 0.222), ("chemicals", 0.212), ("other", 0.150)];
const CHEMICALS: [(&str, f64); 8] = [
    ("sulfuric acid", 0.20),
    ("caustic soda", 0.15),
    ("soda ash", 0.10),
    ("ethylene", 0.20),
    ("chemical fertilizer", 0.10),
    ("chemical pesticide", 0.05),
    ("primary plastic", 0.12),
    ("synthetic rubber", 0.08),
];
const OTHER_PRODUCTS: [&str; 25] = [
    "crude iron ore",
    "phosphate ore",
    "salt",
    "feed",
    "refined edible vegetable oil",
    "fresh and frozen meat",
    "milk products",
    "liquor",
    "soft drinks",
    "wine",
    "beer",
    "tobaccos",
    "yarn",
    "cloth",
    "silk and woven fabric",
    "machine-made paper and paperboards",
    "plain glass",
    "ten kinds of nonferrous metals",
    "refined copper",
    "lead",
    "zinc",
    "electrolyzed aluminum",
    "industrial boilers",
    "metal smelting equipment",
    "cement equipment",
];

/// Fixture scale so that tracked kilometres come to a few flights per country-day.
const KM_2019: f64 = 8.0e7;

#[derive(Clone, Copy)]
enum Feed {
    /// Thermal categories and a steady non-thermal one.
    Mix(&'static [(&'static str, f64)], Option<&'static str>, u32),
    /// Total generation; every category follows demand.
    Total(&'static [(&'static str, f64)], u32),
}

struct Country {
    code: &'static str,
    region: RegionGroup,
    share: f64,
    lat: f64,
    lon: f64,
    climate: (f64, f64),
    heating: f64,
    growth: Option<f64>,
    closure: Option<&'static str>,
    closure_end: Option<&'static str>,
    intl: f64,
    cities: &'static [&'static str],
    feed: Option<Feed>,
}

const COAL_GAS: &[(&str, f64)] = &[("Coal", 0.7), ("Gas", 0.3)];
const INDIA: &[(&str, f64)] = &[("Coal", 0.75), ("Lignite", 0.05), ("Gas, Naphtha & Diesel", 0.2)];

#[allow(clippy::too_many_arguments)]
const fn c(
    code: &'static str,
    region: RegionGroup,
    share: f64,
    (lat, lon): (f64, f64),
    climate: (f64, f64),
    heating: f64,
    growth: Option<f64>,
    closure: Option<&'static str>,
    intl: f64,
    cities: &'static [&'static str],
    feed: Option<Feed>,
) -> Country {
    Country {
        code,
        region,
        share,
        lat,
        lon,
        climate,
        heating,
        growth,
        closure,
        closure_end: None,
        intl,
        cities,
        feed,
    }
}

fn countries() -> Vec<Country> {
    use RegionGroup::*;
    let mut v = vec![
        c("CHN", China, 1.0, (35.0, 110.0), (13.0, 14.0), 0.55, Some(0.026), Some("2020-01-23"), 0.12,
          &["Beijing", "Shanghai", "Wuhan", "Guangzhou"], Some(Feed::Mix(COAL_GAS, None, 60))),
        c("IND", India, 1.0, (22.0, 79.0), (25.0, 6.0), 0.25, Some(0.018), Some("2020-03-25"), 0.03,
          &["Delhi", "Mumbai", "Bengaluru"], Some(Feed::Mix(INDIA, Some("Hydro"), 60))),
        c("USA", US, 1.0, (39.0, -98.0), (12.0, 13.0), 0.6, Some(-0.026), Some("2020-03-19"), 0.18,
          &["New York", "Los Angeles", "Chicago", "Houston"], Some(Feed::Mix(COAL_GAS, Some("Nuclear"), 60))),
        c("DEU", EU27UK, 0.29, (51.0, 10.0), (9.0, 9.0), 0.65, Some(-0.07), Some("2020-03-16"), 0.30 * 0.29,
          &["Berlin", "Munich"], Some(Feed::Mix(COAL_GAS, Some("Nuclear"), 30))),
        c("FRA", EU27UK, 0.17, (47.0, 2.0), (11.5, 8.0), 0.6, Some(-0.02), Some("2020-03-17"), 0.30 * 0.17,
          &["Paris", "Lyon"], Some(Feed::Mix(COAL_GAS, Some("Nuclear"), 15))),
        c("ITA", EU27UK, 0.17, (42.0, 12.5), (14.0, 9.0), 0.55, Some(-0.02), Some("2020-03-09"), 0.30 * 0.17,
          &["Rome", "Milan"], Some(Feed::Mix(COAL_GAS, None, 60))),
        c("ESP", EU27UK, 0.13, (40.0, -4.0), (15.0, 9.0), 0.45, Some(-0.05), Some("2020-03-14"), 0.30 * 0.13,
          &["Madrid", "Barcelona"], Some(Feed::Mix(COAL_GAS, None, 60))),
        c("GBR", EU27UK, 0.22, (53.0, -1.5), (10.0, 7.0), 0.65, Some(-0.03), Some("2020-03-23"), 0.30 * 0.22,
          &["London", "Manchester"], Some(Feed::Mix(COAL_GAS, None, 30))),
        c("CYP", EU27UK, 0.02, (35.0, 33.0), (19.0, 9.0), 0.3, None, Some("2020-03-24"), 0.0,
          &[], Some(Feed::Mix(&[("Oil", 1.0)], None, 60))),
        c("RUS", Russia, 1.0, (56.0, 38.0), (5.0, 15.0), 0.7, None, Some("2020-03-30"), 0.03,
          &["Moscow", "Saint Petersburg"], Some(Feed::Total(&[("Thermal", 0.65), ("Hydro", 0.35)], 60))),
        c("JPN", Japan, 1.0, (36.0, 139.0), (15.0, 10.0), 0.5, Some(-0.02), None, 0.04,
          &["Tokyo", "Osaka"], Some(Feed::Total(&[("Thermal", 0.75), ("Nuclear", 0.25)], 60))),
        c("BRA", Brazil, 1.0, (-15.0, -47.0), (24.0, 3.0), 0.0, Some(0.01), None, 0.02,
          &["Sao Paulo", "Rio de Janeiro"], Some(Feed::Mix(COAL_GAS, Some("Hydro"), 60))),
        c("KOR", ROW, 0.14, (37.0, 127.0), (12.5, 13.0), 0.6, None, None, 0.26 * 0.14, &["Seoul", "Busan"], None),
        c("MEX", ROW, 0.10, (23.0, -102.0), (21.0, 5.0), 0.1, None, Some("2020-03-23"), 0.26 * 0.10,
          &["Mexico City", "Guadalajara"], None),
        c("ZAF", ROW, 0.10, (-29.0, 25.0), (17.0, 6.0), 0.25, None, Some("2020-03-27"), 0.26 * 0.10, &[], None),
        c("TUR", ROW, 0.09, (39.0, 35.0), (12.0, 11.0), 0.55, None, Some("2020-03-21"), 0.26 * 0.09, &[], None),
        c("IDN", ROW, 0.12, (-2.0, 118.0), (27.0, 1.0), 0.0, None, Some("2020-04-10"), 0.26 * 0.12, &[], None),
        c("SAU", ROW, 0.12, (24.0, 45.0), (26.0, 9.0), 0.0, None, Some("2020-03-23"), 0.26 * 0.12, &[], None),
        c("CAN", ROW, 0.11, (56.0, -100.0), (2.0, 18.0), 0.7, None, Some("2020-03-17"), 0.26 * 0.11, &[], None),
        c("AUS", ROW, 0.08, (-25.0, 134.0), (21.0, 6.0), 0.25, None, Some("2020-03-23"), 0.26 * 0.08, &[], None),
        c("EGY", ROW, 0.07, (27.0, 30.0), (22.0, 7.0), 0.0, None, Some("2020-03-25"), 0.26 * 0.07, &[], None),
        c("NGA", ROW, 0.07, (9.0, 8.0), (27.0, 2.0), 0.0, None, Some("2020-03-30"), 0.26 * 0.07, &[], None),
    ];
    v[0].closure_end = Some("2020-04-08");
    v
}

/// Additive shifts (fractions) applied to every country's target change.
#[derive(Debug, Clone, Copy, Default)]
struct Knobs {
    power: f64,
    transport: f64,
    industry: f64,
    residential: f64,
    aviation: f64,
}

fn ri(g: RegionGroup) -> usize {
    RegionGroup::ALL.iter().position(|x| *x == g).expect("region")
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("date")
}

fn day(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").expect("date")
}

fn window_2019() -> Vec<NaiveDate> {
    date_range(ymd(2019, 1, 1), ymd(2019, 4, 30)).collect()
}

fn window_2020() -> Vec<NaiveDate> {
    date_range(ymd(2020, 1, 1), ymd(2020, 4, 30)).collect()
}

fn comparable(d: NaiveDate) -> bool {
    !(d.month() == 2 && d.day() == 29)
}

fn seasonal(d: NaiveDate) -> f64 {
    (2.0 * std::f64::consts::PI * (d.ordinal0() as f64 - 15.0) / 365.0).cos()
}

/// Zero-sum wiggle over the comparable days of a month.
fn wiggle(d: NaiveDate, amp: f64) -> f64 {
    if !comparable(d) {
        return 0.0;
    }
    let n = if d.month() == 2 { 28 } else { d.with_day(1).map(days_in_month).unwrap_or(30) };
    amp * (2.0 * std::f64::consts::PI * (d.day0() as f64 + 0.5) / n as f64).sin()
}

fn days_in_month(first: NaiveDate) -> u32 {
    let next = if first.month() == 12 {
        ymd(first.year() + 1, 1, 1)
    } else {
        ymd(first.year(), first.month() + 1, 1)
    };
    (next - first).num_days() as u32
}

fn rng(tag: &str) -> ChaCha8Rng {
    let seed = tag.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
    ChaCha8Rng::seed_from_u64(seed)
}

struct Out {
    files: BTreeMap<String, String>,
}

impl Out {
    fn file(&mut self, rel: &str, header: &str) -> &mut String {
        self.files.entry(rel.to_string()).or_insert_with(|| format!("{header}\n"))
    }

    fn write(&self, dir: &Path) -> Res<()> {
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        for (rel, text) in &self.files {
            let path = dir.join(rel);
            fs::create_dir_all(path.parent().expect("parent"))?;
            fs::write(path, text)?;
        }
        Ok(())
    }
}

struct Climate {
    /// Per cell: (lat, lon, population, 2019 temperatures for every day of 2019).
    cells: Vec<(f64, f64, f64, BTreeMap<NaiveDate, f64>)>,
}

fn climate(ct: &Country) -> Climate {
    let mut r = rng(&format!("climate-{}", ct.code));
    let weather = Normal::new(0.0, 2.5).expect("normal");
    let local = Normal::new(0.0, 0.5).expect("normal");
    let hemi = if ct.lat < 0.0 { -1.0 } else { 1.0 };
    let days: Vec<NaiveDate> = date_range(ymd(2019, 1, 1), ymd(2019, 12, 31)).collect();
    let common: Vec<f64> = days.iter().map(|_| weather.sample(&mut r)).collect();
    let mut cells = Vec::new();
    for (k, (dlat, offset, pop)) in [(0.0, 0.0, 6.0e6), (1.5, -2.0, 4.0e6)].into_iter().enumerate() {
        let t: BTreeMap<NaiveDate, f64> = days
            .iter()
            .zip(&common)
            .map(|(d, w)| {
                let v = ct.climate.0 + offset - hemi * ct.climate.1 * seasonal(*d) + w + local.sample(&mut r);
                (*d, round2(v))
            })
            .collect();
        cells.push((ct.lat + dlat, ct.lon + 1.5 * k as f64, pop, t));
    }
    Climate { cells }
}

fn round2(v: f64) -> f64 {
    format!("{v:.2}").parse().expect("float")
}

fn hdd(temps: &[(f64, f64)]) -> f64 {
    let total: f64 = temps.iter().map(|(p, _)| p).sum();
    temps.iter().map(|(p, t)| p * (18.0 - t).max(0.0)).sum::<f64>() / total
}

/// 2020 temperatures for a uniform warming `delta`, plus fixed noise.
fn temps_2020(cl: &Climate, noise: &[Vec<f64>], delta: f64) -> Vec<BTreeMap<NaiveDate, f64>> {
    cl.cells
        .iter()
        .zip(noise)
        .map(|((_, _, _, t19), eps)| {
            window_2020()
                .into_iter()
                .zip(eps)
                .map(|(d, e)| (d, round2(t19[&reference_day(d)] + delta + e)))
                .collect()
        })
        .collect()
}

struct Residential {
    annual: f64,
    t2020: Vec<BTreeMap<NaiveDate, f64>>,
    hdd19: BTreeMap<NaiveDate, f64>,
    hdd20: BTreeMap<NaiveDate, f64>,
    year_total: f64,
}

fn residential(ct: &Country, cl: &Climate, base: f64, target: f64) -> Residential {
    let mut r = rng(&format!("climate2020-{}", ct.code));
    let n = Normal::new(0.0, 1.5).expect("normal");
    let noise: Vec<Vec<f64>> = cl.cells.iter().map(|_| window_2020().iter().map(|_| n.sample(&mut r)).collect()).collect();
    let daily = |cells: &[&BTreeMap<NaiveDate, f64>], d: NaiveDate| {
        let pairs: Vec<(f64, f64)> = cl.cells.iter().zip(cells).map(|(c, t)| (c.2, t[&d])).collect();
        hdd(&pairs)
    };
    let t19: Vec<&BTreeMap<NaiveDate, f64>> = cl.cells.iter().map(|c| &c.3).collect();
    let hdd19: BTreeMap<NaiveDate, f64> = date_range(ymd(2019, 1, 1), ymd(2019, 12, 31)).map(|d| (d, daily(&t19, d))).collect();
    let year_total: f64 = hdd19.values().sum();
    let w19: f64 = window_2019().iter().map(|d| hdd19[d]).sum();
    let (heat, cook) = (ct.heating, 1.0 - ct.heating);
    let unit = cook * 120.0 / 365.0 + if heat > 0.0 { heat * w19 / year_total } else { 0.0 };
    let change = |t20: &[BTreeMap<NaiveDate, f64>]| {
        let refs: Vec<&BTreeMap<NaiveDate, f64>> = t20.iter().collect();
        let w20: f64 = window_2020().into_iter().filter(|d| comparable(*d)).map(|d| daily(&refs, d)).sum();
        heat * (w20 - w19) / year_total / unit
    };
    let mut delta = 0.0;
    if heat > 0.0 {
        let (mut lo, mut hi) = (-15.0, 15.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if change(&temps_2020(cl, &noise, mid)) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        delta = 0.5 * (lo + hi);
    }
    let t2020 = temps_2020(cl, &noise, delta);
    let refs: Vec<&BTreeMap<NaiveDate, f64>> = t2020.iter().collect();
    let hdd20 = window_2020().into_iter().map(|d| (d, daily(&refs, d))).collect();
    Residential {
        annual: base / unit,
        t2020,
        hdd19,
        hdd20,
        year_total,
    }
}

fn month_rate(table: &[[f64; 4]; 8], g: RegionGroup, d: NaiveDate) -> f64 {
    table[ri(g)][d.month0() as usize] / 100.0
}

/// Baseline, growth, closures, holidays and the uncertainty ledger.
fn write_static(out: &mut Out, cs: &[Country], res: &BTreeMap<&str, Residential>) {
    let edgar = out.file("baseline/edgar_2018.csv", "country,sector,year,mt_co2");
    for ct in cs {
        let g = ri(ct.region);
        let to2018 = |annual: f64| annual / (1.0 + ct.growth.unwrap_or(0.005));
        let window = |k: usize| BASE[g][k] * ct.share * 365.0 / 120.0;
        let industry = if ct.code == "CHN" {
            (BASE[g][2] - CHN_PROCESS_WINDOW) * 365.0 / 120.0
        } else {
            window(2)
        };
        let rows = [
            ("Electricity and heat production", window(0)),
            ("Road transportation", 0.90 * window(1)),
            ("Rail transportation", 0.04 * window(1)),
            ("Inland navigation", 0.03 * window(1)),
            ("Other transportation", 0.03 * window(1)),
            ("Manufacturing industries and construction", 0.85 * industry),
            ("Other energy industries", 0.15 * industry),
            ("Residential and other sectors", res[ct.code].annual),
        ];
        for (label, annual) in rows {
            let _ = writeln!(edgar, "{},{label},2018,{:.9}", ct.code, to2018(annual));
        }
    }
    let growth = out.file("baseline/growth_2019.csv", "country,rate");
    for ct in cs {
        if let Some(r) = ct.growth {
            let _ = writeln!(growth, "{},{r}", ct.code);
        }
    }
    let policies = out.file("assembly/policies.csv", "country,has_closure,start,end");
    for ct in cs {
        let _ = writeln!(
            policies,
            "{},{},{},{}",
            ct.code,
            ct.closure.is_some(),
            ct.closure.unwrap_or(""),
            ct.closure_end.unwrap_or("")
        );
    }
    let holidays = out.file("assembly/holidays.csv", "country,start,end,label");
    for (s, e, label) in HOLIDAYS {
        let _ = writeln!(holidays, "CHN,{s},{e},{label}");
    }
    let ledger = UncertaintyLedger::defaults().to_csv().expect("ledger");
    out.files.insert("uncertainty/ledger.csv".into(), ledger);
}

const HOLIDAYS: [(&str, &str, &str); 6] = [
    ("2019-02-04", "2019-02-10", "Spring Festival"),
    ("2019-04-05", "2019-04-05", "Qingming"),
    ("2019-05-01", "2019-05-04", "Labor Day"),
    ("2020-01-24", "2020-01-30", "Spring Festival"),
    ("2020-04-05", "2020-04-05", "Qingming"),
    ("2020-05-01", "2020-05-05", "Labor Day"),
];

fn holiday_factor(d: NaiveDate, spring: f64) -> f64 {
    for (s, e, label) in HOLIDAYS {
        if d >= day(s) && d <= day(e) {
            return if label == "Spring Festival" { spring } else { 0.95 };
        }
    }
    1.0
}

/// Sub-daily generation feeds with a few injected defects.
fn write_power(out: &mut Out, cs: &[Country], knobs: &Knobs) {
    for ct in cs {
        let Some(feed) = ct.feed else { continue };
        let mut r = rng(&format!("power-{}", ct.code));
        let noise = Normal::new(0.0, 0.01).expect("normal");
        let level = BASE[ri(ct.region)][0].max(20.0) * ct.share * 1.0e4;
        let demand: BTreeMap<NaiveDate, f64> = window_2019()
            .into_iter()
            .map(|d| {
                let weekly = match d.weekday() {
                    Weekday::Sat => -0.04,
                    Weekday::Sun => -0.07,
                    _ => 0.0,
                };
                (d, 1.0 + 0.05 * seasonal(d) + weekly + noise.sample(&mut r))
            })
            .collect();
        let spring = if ct.code == "CHN" {
            let feb: Vec<NaiveDate> = date_range(ymd(2019, 2, 1), ymd(2019, 2, 28)).collect();
            let hol: f64 = feb.iter().filter(|d| holiday_factor(**d, 0.0) == 0.0).map(|d| demand[d]).sum();
            let rest: f64 = feb.iter().filter(|d| holiday_factor(**d, 0.0) != 0.0).map(|d| demand[d]).sum();
            0.9 * rest / (3.1 * hol)
        } else {
            1.0
        };
        let hol = |d: NaiveDate| if ct.code == "CHN" { holiday_factor(d, spring) } else { 1.0 };
        let g19: BTreeMap<NaiveDate, f64> = demand.iter().map(|(d, p)| (*d, level * p * hol(*d))).collect();
        let raw20: BTreeMap<NaiveDate, f64> =
            window_2020().into_iter().map(|d| (d, level * demand[&reference_day(d)] * hol(d))).collect();
        let mut g20 = BTreeMap::new();
        for m in 1..=4 {
            let days: Vec<NaiveDate> = raw20.keys().filter(|d| d.month() == m).copied().collect();
            let s19: f64 = days.iter().filter(|d| comparable(**d)).map(|d| g19[&reference_day(*d)]).sum();
            let s20: f64 = days.iter().filter(|d| comparable(**d)).map(|d| raw20[d]).sum();
            let rate = month_rate(&POWER_MONTHLY, ct.region, days[0]) + knobs.power;
            for d in days {
                g20.insert(d, raw20[&d] * (1.0 + rate) * s19 / s20);
            }
        }
        let steady = level * 0.35;
        for (year, series) in [(2019, &g19), (2020, &g20)] {
            let rel = format!("power/{}_{year}.csv", ct.code);
            let text = out.file(&rel, "timestamp_utc,interval_min,category,value");
            let (cats, other, interval): (Vec<(&str, f64)>, Option<&str>, u32) = match feed {
                Feed::Mix(cats, other, i) => (cats.to_vec(), other, i),
                Feed::Total(cats, i) => (cats.to_vec(), None, i),
            };
            let slots = 24 * 60 / interval;
            for (d, total) in series {
                let mut daily: Vec<(&str, f64)> = cats.iter().map(|(c, s)| (*c, total * s)).collect();
                if let Some(o) = other {
                    daily.push((o, steady * (1.0 + noise.sample(&mut r))));
                }
                for (cat, v) in daily {
                    for s in 0..slots {
                        let phase = 2.0 * std::f64::consts::PI * (s as f64 + 0.5) / slots as f64;
                        let value = v / slots as f64 * (1.0 + 0.15 * (phase - std::f64::consts::FRAC_PI_2).sin());
                        let ts = d.and_hms_opt(0, 0, 0).expect("time") + chrono::Duration::minutes((s * interval) as i64);
                        let stamp = ts.format("%Y-%m-%dT%H:%M:%SZ");
                        match defect(ct.code, *d, cat, s) {
                            Some(Defect::Spike(k)) => {
                                let _ = writeln!(text, "{stamp},{interval},\"{cat}\",{:.3}", value * k);
                            }
                            Some(Defect::Token(t)) => {
                                let _ = writeln!(text, "{stamp},{interval},\"{cat}\",{t}");
                            }
                            Some(Defect::Duplicate) => {
                                let _ = writeln!(text, "{stamp},{interval},\"{cat}\",{:.3}", value * 0.97);
                                let _ = writeln!(text, "{stamp},{interval},\"{cat}\",{:.3}", value * 1.03);
                            }
                            None => {
                                let _ = writeln!(text, "{stamp},{interval},\"{cat}\",{:.3}", value);
                            }
                        }
                    }
                }
            }
        }
    }
}

enum Defect {
    Spike(f64),
    Token(&'static str),
    Duplicate,
}

fn defect(code: &str, d: NaiveDate, cat: &str, slot: u32) -> Option<Defect> {
    let date = d.format("%Y-%m-%d").to_string();
    match (code, date.as_str(), cat, slot) {
        ("CHN", "2019-03-12", "Coal", 10) => Some(Defect::Spike(8.0)),
        ("USA", "2020-02-03", "Gas", 5) => Some(Defect::Spike(6.0)),
        ("DEU", "2020-03-02", "Coal", 20) => Some(Defect::Token("N/A")),
        ("GBR", "2019-01-21", "Gas", 33) => Some(Defect::Token("void")),
        ("USA", "2019-01-15", "Nuclear", 3 | 4) => Some(Defect::Token("n/e")),
        ("IND", "2020-04-01", "Coal", 7) => Some(Defect::Duplicate),
        _ => None,
    }
}

/// China production baskets, index series elsewhere, shares and process mass.
fn write_industry(out: &mut Out, knobs: &Knobs) {
    let china = ri(RegionGroup::China);
    let total = BASE[china][2];
    let fuel = total - CHN_PROCESS_WINDOW;
    let mut r = rng("industry");
    let text = out.file("industry/production.csv", "country,subsector,product,month,quantity,weight");
    for m in 0..4 {
        let target = INDUSTRY_MONTHLY[china][m] / 100.0 + knobs.industry;
        let cement = CHN_CEMENT[m] / 100.0;
        let composite = (target * total - CHN_PROCESS_WINDOW * cement) / fuel;
        let steel = CHN_STEEL[m] / 100.0;
        let rest = (composite - 0.416 * steel - 0.222 * cement) / (0.212 + 0.150);
        let other: Vec<(&str, f64)> = OTHER_PRODUCTS.iter().map(|p| (*p, 1.0 / 25.0)).collect();
        type Basket<'a> = (&'a str, f64, Vec<(&'a str, f64)>);
        let baskets: [Basket; 4] = [
            ("steel", steel, vec![("crude steel", 1.0)]),
            ("cement", cement, vec![("cement", 1.0)]),
            ("chemicals", rest, CHEMICALS.to_vec()),
            ("other", rest, other),
        ];
        for (sub, growth, products) in baskets {
            let z: Vec<f64> = products.iter().map(|_| r.gen_range(-1.0..1.0)).collect();
            let zbar: f64 = products.iter().zip(&z).map(|((_, w), z)| w * z).sum();
            for ((product, w), z) in products.iter().zip(&z) {
                let q19: f64 = r.gen_range(50.0..500.0);
                let eps = if products.len() > 1 { 0.03 * (z - zbar) } else { 0.0 };
                let q20 = q19 * (1.0 + growth + eps);
                let _ = writeln!(text, "CHN,{sub},{product},2019-{:02},{q19:.6},{w:.12}", m + 1);
                let _ = writeln!(text, "CHN,{sub},{product},2020-{:02},{q20:.6},{w:.12}", m + 1);
            }
        }
    }
    let ipi = out.file("industry/ipi.csv", "country,month,cumulative_index");
    let series = [
        ("IND", RegionGroup::India),
        ("USA", RegionGroup::US),
        ("EU27UK", RegionGroup::EU27UK),
        ("RUS", RegionGroup::Russia),
        ("JPN", RegionGroup::Japan),
        ("BRA", RegionGroup::Brazil),
    ];
    for (id, g) in series {
        let i19: Vec<f64> = (1..=4).map(|m| 100.0 * (1.0 + 0.03 * (m as f64).sin())).collect();
        let i20: Vec<f64> = (0..4).map(|m| i19[m] * (1.0 + INDUSTRY_MONTHLY[ri(g)][m] / 100.0 + knobs.industry)).collect();
        for (year, idx) in [(2019, &i19), (2020, &i20)] {
            let months = if year == 2020 && matches!(id, "IND" | "EU27UK") { 3 } else { 4 };
            let mut acc = 0.0;
            for (m, level) in idx.iter().take(months).enumerate() {
                acc += level;
                let _ = writeln!(ipi, "{id},{year}-{:02},{:.9}", m + 1, acc / (m + 1) as f64);
            }
        }
    }
    let shares = out.file("industry/subsector_shares.csv", "subsector,share");
    for (s, v) in SUBSECTOR_SHARES {
        let _ = writeln!(shares, "{s},{v}");
    }
    let process = out.file("industry/process.csv", "country,annual_mt_2019");
    let _ = writeln!(process, "CHN,{:.9}", CHN_PROCESS_WINDOW * 365.0 / 120.0);
}

const SIGMOID_TRUTH: (f64, f64, f64, f64) = (48.0, 210.0, 2.2, 28.0);

fn calibration() -> Vec<(f64, f64)> {
    let mut r = rng("calibration");
    let noise = Normal::new(0.0, 0.03).expect("normal");
    let (a, b, c, d) = SIGMOID_TRUTH;
    let p = SigmoidParams::new(a, b, c, d).expect("params");
    (0..120)
        .map(|_| {
            let x: f64 = r.gen_range(2.0..80.0);
            let q = sigmoid_eval(x, &p) * (1.0 + noise.sample(&mut r));
            (round4(x), round4(q))
        })
        .collect()
}

fn round4(v: f64) -> f64 {
    format!("{v:.4}").parse().expect("float")
}

fn invert(q: f64, p: &SigmoidParams) -> f64 {
    let s = ((q - p.a) / p.b).clamp(1e-9, 1.0 - 1e-9);
    p.d * (s / (1.0 - s)).powf(1.0 / p.c)
}

/// Calibration sample, congestion per city and city weights.
fn write_transport(out: &mut Out, cs: &[Country], knobs: &Knobs) {
    let pairs = calibration();
    let fit = fit_sigmoid(&pairs).expect("calibration fit").params;
    let text = out.file("transport/calibration.csv", "congestion_pct,car_count");
    for (x, q) in &pairs {
        let _ = writeln!(text, "{x:.4},{q:.4}");
    }
    let weights = out.file("transport/weights.csv", "city,country,edgar_road_mt");
    let mut rows = Vec::new();
    for ct in cs {
        let mut r = rng(&format!("cities-{}", ct.code));
        let n = ct.cities.len();
        for (k, city) in ct.cities.iter().enumerate() {
            // per-city offsets cancel in the weighted mean
            let w = 1.0 + k as f64;
            let wsum: f64 = (1..=n).map(|j| j as f64).sum();
            let off = if n > 1 { 0.02 * (k as f64 - (n - 1) as f64 / 2.0) } else { 0.0 };
            let obar: f64 = (0..n).map(|j| (1.0 + j as f64) / wsum * 0.02 * (j as f64 - (n - 1) as f64 / 2.0)).sum();
            let _ = writeln!(weights, "{city},{},{:.6}", ct.code, w);
            let level = r.gen_range(30.0..45.0);
            let x19: BTreeMap<NaiveDate, f64> = window_2019()
                .into_iter()
                .map(|d| {
                    let weekly = match d.weekday() {
                        Weekday::Sat => -0.25,
                        Weekday::Sun => -0.35,
                        _ => 0.0,
                    };
                    (d, level * (1.0 + weekly + 0.05 * seasonal(d)))
                })
                .collect();
            for d in window_2019() {
                rows.push((d, city.to_string(), ct.code, x19[&d]));
            }
            for d in window_2020() {
                let rate = month_rate(&TRANSPORT_MONTHLY, ct.region, d) + knobs.transport + off - obar + wiggle(d, 0.03);
                let q = sigmoid_eval(x19[&reference_day(d)], &fit) * (1.0 + rate);
                rows.push((d, city.to_string(), ct.code, invert(q, &fit)));
            }
        }
    }
    let text = out.file("transport/congestion.csv", "date,city,country,congestion_pct");
    for (d, city, code, x) in rows {
        for (k, off) in [-1.5f64, -0.5, 0.5, 1.5].iter().enumerate() {
            let stamp = d.and_hms_opt(6 * k as u32, 0, 0).expect("time").format("%Y-%m-%dT%H:%M");
            let _ = writeln!(text, "{stamp},{city},{code},{:.6}", (x + off * 1.2).max(0.0));
        }
    }
}

fn write_residential(out: &mut Out, cs: &[Country], cl: &BTreeMap<&str, Climate>, res: &BTreeMap<&str, Residential>) {
    let pop = out.file("residential/population.csv", "lat,lon,country_iso3,population");
    for ct in cs {
        for (lat, lon, p, _) in &cl[ct.code].cells {
            let _ = writeln!(pop, "{lat:.2},{lon:.2},{},{p:.0}", ct.code);
        }
    }
    let split = out.file("residential/split.csv", "country,cooking_share,heating_share");
    for ct in cs {
        let _ = writeln!(split, "{},{:.2},{:.2}", ct.code, 1.0 - ct.heating, ct.heating);
    }
    let mut rows: BTreeMap<NaiveDate, Vec<String>> = BTreeMap::new();
    for ct in cs {
        let c = &cl[ct.code];
        for (lat, lon, _, t19) in &c.cells {
            for (d, t) in t19 {
                rows.entry(*d).or_default().push(format!("{lat:.2},{lon:.2},{t:.2}"));
            }
        }
        for ((lat, lon, _, _), t20) in c.cells.iter().zip(&res[ct.code].t2020) {
            for (d, t) in t20 {
                rows.entry(*d).or_default().push(format!("{lat:.2},{lon:.2},{t:.2}"));
            }
        }
    }
    let temp = out.file("residential/temperature.csv", "date,lat,lon,t2m_c");
    for (d, cells) in rows {
        for c in cells {
            let _ = writeln!(temp, "{d},{c}");
        }
    }
    let mut r = rng("gas");
    let noise = Normal::new(0.0, 0.02).expect("normal");
    let gas = out.file("residential/gas.csv", "date,country,gas_mwh");
    for ct in cs.iter().filter(|c| ["DEU", "FRA", "ITA", "GBR"].contains(&c.code)) {
        let rs = &res[ct.code];
        let scale = 5.0e6 * ct.share;
        let daily = |h: f64| scale * (ct.heating * h / rs.year_total + (1.0 - ct.heating) / 365.0);
        for d in window_2019() {
            let _ = writeln!(gas, "{d},{},{:.3}", ct.code, daily(rs.hdd19[&d]) * (1.0 + noise.sample(&mut r)));
        }
        for d in window_2020() {
            let _ = writeln!(gas, "{d},{},{:.3}", ct.code, daily(rs.hdd20[&d]) * (1.0 + noise.sample(&mut r)));
        }
    }
}

/// Meridian flights from 30°S, so each track length is R·Δφ.
fn write_aviation(out: &mut Out, cs: &[Country], knobs: &Knobs) {
    let factor_t = aviation_factor(&AviationScale {
        km_2019: KM_2019,
        ..AviationScale::default()
    })
    .expect("factor")
        / 1000.0;
    let mut flows: Vec<(String, String, String, f64, f64, NaiveDate)> = Vec::new();
    let intl_rate = INTL_AVIATION.1 / INTL_AVIATION.0;
    for ct in cs {
        let g = ri(ct.region);
        let dom_rate = DECLINE[g][4] / BASE[g][4];
        let start = if ct.code == "CHN" { ymd(2020, 1, 23) } else { ymd(2020, 3, 1) };
        let dom = BASE[g][4] * ct.share;
        let other = if ct.code == "USA" { "GBR" } else { "USA" };
        flows.push((ct.code.into(), ct.code.into(), ct.code.into(), dom, dom_rate, start));
        if ct.intl > 0.0 {
            flows.push((ct.code.into(), ct.code.into(), other.into(), INTL_AVIATION.0 * ct.intl, intl_rate, start));
        }
    }
    flows.push(("WLD".into(), String::new(), String::new(), INTL_AVIATION.0 * 0.02, intl_rate, ymd(2020, 3, 1)));
    let lon_of = |code: &str| cs.iter().find(|c| c.code == code).map(|c| c.lon).unwrap_or(0.0);
    let text = out.file("aviation/flights.csv", "date,flight_id,origin_iso3,dest_iso3,waypoints");
    for (tag, origin, dest, window_mt, rate, start) in flows {
        if window_mt <= 0.0 {
            continue;
        }
        let per_day = window_mt * TONNES_PER_MT / 120.0;
        let after = window_2020().into_iter().filter(|d| comparable(*d) && *d >= start).count() as f64;
        let step = (rate + knobs.aviation) * 120.0 / after;
        let lon = lon_of(&tag);
        let kind = if origin == dest && !origin.is_empty() { "D" } else { "I" };
        for (d, t) in window_2019()
            .into_iter()
            .map(|d| (d, per_day))
            .chain(window_2020().into_iter().map(|d| (d, per_day * if d >= start { 1.0 + step } else { 1.0 })))
        {
            let km = t / factor_t;
            let n = (km / 4000.0).ceil().max(1.0) as usize;
            let deg = (km / n as f64 / EARTH_RADIUS_KM).to_degrees();
            for k in 0..n {
                let _ = writeln!(
                    text,
                    "{d},{tag}{kind}{}{k:02},{origin},{dest},-30:{lon:.6};{:.9}:{lon:.6};{:.9}:{lon:.6}",
                    d.format("%Y%m%d"),
                    -30.0 + deg / 2.0,
                    -30.0 + deg
                );
            }
        }
    }
    let ship = out.file("shipping/volume.csv", "date,volume_change_fraction");
    for d in window_2020() {
        let _ = writeln!(ship, "{d},{:.9}", SHIPPING.1 / SHIPPING.0);
    }
}

fn build(knobs: &Knobs, cs: &[Country], climates: &BTreeMap<&str, Climate>) -> Out {
    let mut out = Out { files: BTreeMap::new() };
    let mut res = BTreeMap::new();
    for ct in cs {
        let g = ri(ct.region);
        // heated countries carry their region's change
        let heated: f64 = cs.iter().filter(|x| x.region == ct.region && x.heating > 0.0).map(|x| x.share).sum();
        let target = if heated > 0.0 { DECLINE[g][3] / BASE[g][3] / heated + knobs.residential } else { 0.0 };
        res.insert(ct.code, residential(ct, &climates[ct.code], BASE[g][3] * ct.share, target));
    }
    write_static(&mut out, cs, &res);
    write_power(&mut out, cs, knobs);
    write_industry(&mut out, knobs);
    write_transport(&mut out, cs, knobs);
    write_residential(&mut out, cs, climates, &res);
    write_aviation(&mut out, cs, knobs);
    out
}

fn run_toml() -> String {
    let shipping_annual = SHIPPING.0 * 365.0 / 120.0 / 0.87;
    format!(
        "# Bundled synthetic snapshot run.\n\
         fixture_dir = \"snapshot\"\n\
         output_dir = \"../../../target/carbon-pulse-run\"\n\
         seed = 42\n\
         mc_trials = 10000\n\
         threads = 0\n\
         \n\
         [window]\n\
         start = \"2020-01-01\"\n\
         end = \"2020-04-30\"\n\
         \n\
         [aviation]\n\
         icct_2018 = 918.0\n\
         growth_2019 = 0.03\n\
         km_2019 = {KM_2019:.1}\n\
         \n\
         [shipping]\n\
         annual_2019 = {shipping_annual:.9}\n\
         international_share = 0.87\n"
    )
}

struct Measured {
    power: f64,
    transport: f64,
    industry: f64,
    residential: f64,
    aviation: f64,
    global: f64,
}

fn measure(cfg: &RunConfig) -> Res<Measured> {
    let est = estimate(cfg)?;
    let t = TableS2::from_pairs(&est.pairs, cfg.window.start, cfg.window.end, CountryRegistry::builtin())?;
    let mut aviation = t.sector(Sector::DomesticAviation);
    aviation += t.international_aviation;
    Ok(Measured {
        power: t.sector(Sector::Power).growth(),
        transport: t.sector(Sector::GroundTransport).growth(),
        industry: t.sector(Sector::Industry).growth(),
        residential: t.sector(Sector::Residential).growth(),
        aviation: aviation.growth(),
        global: t.global().growth(),
    })
}

fn column(k: usize) -> f64 {
    let (b, d): (f64, f64) = (0..8).map(|g| (BASE[g][k], DECLINE[g][k])).fold((0.0, 0.0), |a, x| (a.0 + x.0, a.1 + x.1));
    d / b
}

fn main() -> Res<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let snapshot = root.join("snapshot");
    fs::create_dir_all(&root)?;
    fs::write(root.join("run.toml"), run_toml())?;
    let cfg = RunConfig::load(&root.join("run.toml"))?;

    let cs = countries();
    let climates: BTreeMap<&str, Climate> = cs.iter().map(|c| (c.code, climate(c))).collect();
    let aviation_target = {
        let b: f64 = (0..8).map(|g| BASE[g][4]).sum();
        let d: f64 = (0..8).map(|g| DECLINE[g][4]).sum();
        (d + INTL_AVIATION.1) / (b + INTL_AVIATION.0)
    };
    let targets = [column(0), column(1), column(2), column(3), aviation_target];

    let mut knobs = Knobs::default();
    for iter in 0..20 {
        build(&knobs, &cs, &climates).write(&snapshot)?;
        let m = measure(&cfg)?;
        let got = [m.power, m.transport, m.industry, m.residential, m.aviation];
        let err: Vec<f64> = targets.iter().zip(&got).map(|(t, g)| t - g).collect();
        println!(
            "iter {iter}: power {:+.4}% transport {:+.4}% industry {:+.4}% residential {:+.4}% aviation {:+.4}% global {:+.4}%",
            100.0 * m.power,
            100.0 * m.transport,
            100.0 * m.industry,
            100.0 * m.residential,
            100.0 * m.aviation,
            100.0 * m.global
        );
        if err.iter().all(|e| e.abs() < 2e-5) {
            break;
        }
        knobs.power += err[0];
        knobs.transport += err[1];
        knobs.industry += err[2];
        knobs.residential += err[3];
        knobs.aviation += err[4];
    }
    println!("knobs: {knobs:?}");

    let golden = root.join("golden");
    let mut gcfg = cfg.clone();
    gcfg.output_dir = golden.clone();
    if golden.exists() {
        fs::remove_dir_all(&golden)?;
    }
    run(&gcfg)?;
    fs::remove_file(golden.join("manifest.json"))?;
    println!("wrote {} and {}", snapshot.display(), golden.display());
    Ok(())
}
