//! Rest-of-world estimation, aggregation into summary tables, holiday
//! annotation and the NOx cross-check.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::industry::YearMonth;
use crate::model::{
    comparison_totals, date_range, reference_day, AnnualInventory, CountryCode,
    CountryRegistry, DailyEmissionSeries, RegionGroup, Sector, TONNES_PER_MT,
};

/// A 2019 series and the matching 2020 series for one country and sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    pub s2019: DailyEmissionSeries,
    pub s2020: DailyEmissionSeries,
}

impl SeriesPair {
    pub fn new(s2019: DailyEmissionSeries, s2020: DailyEmissionSeries) -> Result<Self> {
        if s2019.country != s2020.country || s2019.sector != s2020.sector {
            return Err(Error::Internal(format!(
                "paired series disagree: {}/{} vs {}/{}",
                s2019.country, s2019.sector, s2020.country, s2020.sector
            )));
        }
        Ok(SeriesPair { s2019, s2020 })
    }

    pub fn country(&self) -> CountryCode {
        self.s2020.country
    }

    pub fn sector(&self) -> Sector {
        self.s2020.sector
    }

    /// Window totals in Mt, failing when either year does not cover the window.
    pub fn window_totals(&self, start: NaiveDate, end: NaiveDate) -> Result<WindowTotals> {
        check_cover(&self.s2020, start, end)?;
        check_cover(&self.s2019, reference_day(start), reference_day(end))?;
        let (a, b) = comparison_totals(&self.s2019, &self.s2020, start, end);
        Ok(WindowTotals {
            mt_2019: a / TONNES_PER_MT,
            mt_2020: b / TONNES_PER_MT,
        })
    }
}

fn check_cover(s: &DailyEmissionSeries, start: NaiveDate, end: NaiveDate) -> Result<()> {
    for d in [start, end] {
        if d < s.start_date() || d > s.end_date() {
            return Err(Error::OutOfRange {
                date: d,
                start: s.start_date(),
                end: s.end_date(),
            });
        }
    }
    Ok(())
}

/// Comparable-day sums for a window, in Mt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowTotals {
    pub mt_2019: f64,
    pub mt_2020: f64,
}

impl WindowTotals {
    pub fn diff(&self) -> f64 {
        self.mt_2020 - self.mt_2019
    }

    /// Fractional change; zero when there is no 2019 mass.
    pub fn growth(&self) -> f64 {
        if self.mt_2019 > 0.0 {
            self.mt_2020 / self.mt_2019 - 1.0
        } else {
            0.0
        }
    }
}

impl std::ops::AddAssign for WindowTotals {
    fn add_assign(&mut self, o: Self) {
        self.mt_2019 += o.mt_2019;
        self.mt_2020 += o.mt_2020;
    }
}

impl std::iter::Sum for WindowTotals {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = WindowTotals::default();
        for t in iter {
            acc += t;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Country,
    RegionGroup,
    Sector,
    Global,
}

/// Label used for bunker sectors when grouping by region.
pub const INTERNATIONAL: &str = "International";

/// Window totals keyed by group label, summed in the order given.
pub fn aggregate(
    pairs: &[SeriesPair],
    grouping: Grouping,
    start: NaiveDate,
    end: NaiveDate,
    registry: &CountryRegistry,
) -> Result<BTreeMap<String, WindowTotals>> {
    let mut out: BTreeMap<String, WindowTotals> = BTreeMap::new();
    for p in pairs {
        let key = match grouping {
            Grouping::Country => p.country().to_string(),
            Grouping::RegionGroup if p.sector().is_bunker() => INTERNATIONAL.to_string(),
            Grouping::RegionGroup => registry.region_of(p.country()).table_label().to_string(),
            Grouping::Sector => p.sector().to_string(),
            Grouping::Global => "Global".to_string(),
        };
        *out.entry(key).or_default() += p.window_totals(start, end)?;
    }
    Ok(out)
}

/// Region-by-sector window totals with the two bunker sectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableS2 {
    pub cells: BTreeMap<(RegionGroup, Sector), WindowTotals>,
    pub international_aviation: WindowTotals,
    pub international_shipping: WindowTotals,
}

impl TableS2 {
    pub fn from_pairs(
        pairs: &[SeriesPair],
        start: NaiveDate,
        end: NaiveDate,
        registry: &CountryRegistry,
    ) -> Result<Self> {
        let mut t = TableS2::default();
        for p in pairs {
            let w = p.window_totals(start, end)?;
            match p.sector() {
                Sector::InternationalAviation => t.international_aviation += w,
                Sector::InternationalShipping => t.international_shipping += w,
                s => *t.cells.entry((registry.region_of(p.country()), s)).or_default() += w,
            }
        }
        Ok(t)
    }

    pub fn cell(&self, g: RegionGroup, s: Sector) -> WindowTotals {
        self.cells.get(&(g, s)).copied().unwrap_or_default()
    }

    pub fn region(&self, g: RegionGroup) -> WindowTotals {
        Sector::NATIONAL.iter().map(|s| self.cell(g, *s)).sum()
    }

    pub fn sector(&self, s: Sector) -> WindowTotals {
        RegionGroup::ALL.iter().map(|g| self.cell(*g, s)).sum()
    }

    pub fn national(&self) -> WindowTotals {
        RegionGroup::ALL.iter().map(|g| self.region(*g)).sum()
    }

    pub fn global(&self) -> WindowTotals {
        let mut t = self.national();
        t += self.international_aviation;
        t += self.international_shipping;
        t
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(&[
            "region",
            "power",
            "transport",
            "industry_with_process",
            "residential",
            "domestic_aviation",
            "sum",
            "growth_pct",
        ]);
        let cols = [
            Sector::Power,
            Sector::GroundTransport,
            Sector::Industry,
            Sector::Residential,
            Sector::DomesticAviation,
        ];
        for g in RegionGroup::ALL {
            let mut row = vec![g.table_label().to_string()];
            row.extend(cols.iter().map(|s| fmt6(self.cell(g, *s).diff())));
            let r = self.region(g);
            row.push(fmt6(r.diff()));
            row.push(fmt6(100.0 * r.growth()));
            table.rows.push(row);
        }
        let nat = self.national();
        let mut sum = vec!["Sum".to_string()];
        sum.extend(cols.iter().map(|s| fmt6(self.sector(*s).diff())));
        sum.push(fmt6(nat.diff()));
        sum.push(fmt6(100.0 * nat.growth()));
        table.rows.push(sum);
        let mut rates = vec!["Growth Rates (%)".to_string()];
        rates.extend(cols.iter().map(|s| fmt6(100.0 * self.sector(*s).growth())));
        rates.push(fmt6(100.0 * nat.growth()));
        rates.push(String::new());
        table.rows.push(rates);
        for (label, w) in [
            ("International aviation", self.international_aviation),
            ("International shipping", self.international_shipping),
            ("Global", self.global()),
        ] {
            let mut row = vec![label.to_string()];
            row.extend(std::iter::repeat_n(String::new(), cols.len()));
            row.push(fmt6(w.diff()));
            row.push(fmt6(100.0 * w.growth()));
            table.rows.push(row);
        }
        table
    }
}

/// Month-by-region changes (percent) for one sector, plus a world row and a
/// whole-window column.
pub fn monthly_change_table(
    pairs: &[SeriesPair],
    sector: Sector,
    start: NaiveDate,
    end: NaiveDate,
    registry: &CountryRegistry,
) -> Result<Table> {
    let months = months_in(start, end);
    let mut header = vec!["region".to_string()];
    header.extend(months.iter().map(|m| m.to_string()));
    header.push("window".to_string());
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    let spans: Vec<(NaiveDate, NaiveDate)> = months
        .iter()
        .map(|m| (m.first_day().max(start), m.last_day().min(end)))
        .chain(std::iter::once((start, end)))
        .collect();
    let mut world = vec![WindowTotals::default(); spans.len()];
    let mut by_region: BTreeMap<RegionGroup, Vec<WindowTotals>> = BTreeMap::new();
    for p in pairs.iter().filter(|p| p.sector() == sector) {
        let g = registry.region_of(p.country());
        let acc = by_region.entry(g).or_insert_with(|| vec![WindowTotals::default(); spans.len()]);
        for (i, (a, b)) in spans.iter().enumerate() {
            let w = p.window_totals(*a, *b)?;
            acc[i] += w;
            world[i] += w;
        }
    }
    for g in RegionGroup::ALL {
        let mut row = vec![g.table_label().to_string()];
        match by_region.get(&g) {
            Some(cols) => row.extend(cols.iter().map(|w| fmt6(100.0 * w.growth()))),
            None => row.extend(std::iter::repeat_n(String::new(), spans.len())),
        }
        table.rows.push(row);
    }
    let mut row = vec!["World".to_string()];
    row.extend(world.iter().map(|w| fmt6(100.0 * w.growth())));
    table.rows.push(row);
    Ok(table)
}

pub fn months_in(start: NaiveDate, end: NaiveDate) -> Vec<YearMonth> {
    let mut out: Vec<YearMonth> = Vec::new();
    for d in date_range(start, end) {
        let m = YearMonth::of(d);
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    out
}

/// Header plus string rows, written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(|s| s.to_string()).collect());
        }
        Ok(Table { header, rows })
    }

    /// Aligned plain-text rendering for terminals.
    pub fn render(&self) -> String {
        let n = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate().take(n) {
                widths[i] = widths[i].max(c.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = widths[i])
                    } else {
                        format!("{c:>w$}", w = widths[i])
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

pub fn fmt6(x: f64) -> String {
    // avoid printing "-0.000000"
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Trailing running mean; the first days average whatever is available.
pub fn running_mean(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let n = (i + 1).min(window);
            values[i + 1 - n..=i].iter().sum::<f64>() / n as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosurePolicy {
    pub country: CountryCode,
    pub has_closure: bool,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

impl ClosurePolicy {
    pub fn new(country: CountryCode, has_closure: bool, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<Self> {
        if let (Some(a), Some(b)) = (start, end) {
            if a > b {
                return Err(Error::domain(format!("{country}: closure ends before it starts")));
            }
        }
        if has_closure && start.is_none() {
            return Err(Error::domain(format!("{country}: closure without a start date")));
        }
        Ok(ClosurePolicy {
            country,
            has_closure,
            start,
            end,
        })
    }

    pub fn in_closure(&self, d: NaiveDate) -> bool {
        self.has_closure
            && self.start.is_some_and(|s| d >= s)
            && self.end.is_none_or(|e| d <= e)
    }
}

/// Monthly change of the closure and no-closure groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRate {
    pub with_closure: f64,
    pub without_closure: f64,
}

pub type GroupRates = BTreeMap<(Sector, YearMonth), GroupRate>;

pub const ROW_SECTORS: [Sector; 2] = [Sector::Power, Sector::Industry];

/// Emission-weighted monthly change of estimated countries, split by
/// whether they adopted closures.
pub fn closure_group_rates(
    estimated: &[SeriesPair],
    sectors: &[Sector],
    policies: &BTreeMap<CountryCode, ClosurePolicy>,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<GroupRates> {
    let months = months_in(start, end);
    let mut out = GroupRates::new();
    for &sector in sectors {
        for m in &months {
            let (a, b) = (m.first_day().max(start), m.last_day().min(end));
            let mut with = WindowTotals::default();
            let mut without = WindowTotals::default();
            let (mut n_with, mut n_without) = (0, 0);
            for p in estimated.iter().filter(|p| p.sector() == sector) {
                let policy = policies
                    .get(&p.country())
                    .ok_or_else(|| Error::config(format!("no closure policy for {}", p.country())))?;
                let w = p.window_totals(a, b)?;
                if policy.has_closure {
                    with += w;
                    n_with += 1;
                } else {
                    without += w;
                    n_without += 1;
                }
            }
            for (n, name) in [(n_with, "with closures"), (n_without, "without closures")] {
                if n == 0 {
                    return Err(Error::config(format!(
                        "group of countries {name} is empty for {sector} in {m}"
                    )));
                }
            }
            out.insert(
                (sector, *m),
                GroupRate {
                    with_closure: with.growth(),
                    without_closure: without.growth(),
                },
            );
        }
    }
    Ok(out)
}

/// Series for countries without direct activity data: a uniform daily
/// baseline revised by the matching group rate, for each (country, sector).
pub fn apply_row(
    baseline: &AnnualInventory,
    targets: &[(CountryCode, Sector)],
    rates: &GroupRates,
    policies: &BTreeMap<CountryCode, ClosurePolicy>,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<SeriesPair>> {
    let (s19, e19) = (reference_day(start), reference_day(end));
    let n19 = date_range(s19, e19).count();
    let mut out = Vec::new();
    for &(c, sector) in targets {
        let policy = policies
            .get(&c)
            .ok_or_else(|| Error::config(format!("country {c} has no closure classification")))?;
        let Some(annual_mt) = baseline.get(c, sector) else {
            continue;
        };
        let annual = annual_mt * TONNES_PER_MT;
        let s2019 = DailyEmissionSeries::new(c, sector, s19, vec![annual / 365.0; n19])?;
        let mut values = Vec::new();
        for d in date_range(start, end) {
            let r = rates.get(&(sector, YearMonth::of(d))).ok_or_else(|| {
                Error::config(format!("no group rate for {sector} in {}", YearMonth::of(d)))
            })?;
            let rate = if policy.in_closure(d) { r.with_closure } else { r.without_closure };
            values.push(annual / 366.0 * (1.0 + rate));
        }
        let s2020 = DailyEmissionSeries::new(c, sector, start, values)?;
        out.push(SeriesPair::new(s2019, s2020)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Holiday {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolidayCalendar {
    pub country: CountryCode,
    holidays: Vec<Holiday>,
}

impl HolidayCalendar {
    pub fn new(country: CountryCode, mut holidays: Vec<Holiday>) -> Result<Self> {
        holidays.sort_by_key(|h| h.start);
        for h in &holidays {
            if h.start > h.end {
                return Err(Error::domain(format!("{country} {}: ends before it starts", h.label)));
            }
        }
        for w in holidays.windows(2) {
            if w[1].start <= w[0].end {
                return Err(Error::domain(format!(
                    "{country}: holidays {} and {} overlap",
                    w[0].label, w[1].label
                )));
            }
        }
        Ok(HolidayCalendar { country, holidays })
    }

    pub fn holidays(&self) -> &[Holiday] {
        &self.holidays
    }

    pub fn label_of(&self, d: NaiveDate) -> Option<&str> {
        self.holidays
            .iter()
            .find(|h| d >= h.start && d <= h.end)
            .map(|h| h.label.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolidayRow {
    pub date: NaiveDate,
    pub value: f64,
    pub label: Option<String>,
}

/// Holiday-window mean against the mean of the calendar month it starts in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolidayEffect {
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub window_mean: f64,
    pub month_mean: f64,
    pub change: f64,
}

pub fn annotate_holidays(series: &DailyEmissionSeries, calendar: &HolidayCalendar) -> (Vec<HolidayRow>, Vec<HolidayEffect>) {
    let rows = series
        .iter()
        .map(|(date, value)| HolidayRow {
            date,
            value,
            label: calendar.label_of(date).map(str::to_string),
        })
        .collect();
    let mut effects = Vec::new();
    for h in calendar.holidays() {
        let inside: Vec<f64> = date_range(h.start, h.end).filter_map(|d| series.get(d)).collect();
        let m = YearMonth::of(h.start);
        let month: Vec<f64> = date_range(m.first_day(), m.last_day()).filter_map(|d| series.get(d)).collect();
        if inside.is_empty() || month.is_empty() {
            continue;
        }
        let window_mean = inside.iter().sum::<f64>() / inside.len() as f64;
        let month_mean = month.iter().sum::<f64>() / month.len() as f64;
        effects.push(HolidayEffect {
            label: h.label.clone(),
            start: h.start,
            end: h.end,
            window_mean,
            month_mean,
            change: if month_mean > 0.0 { window_mean / month_mean - 1.0 } else { 0.0 },
        });
    }
    (rows, effects)
}

/// Σ shareᵢ·changeᵢ / Σ shareᵢ over the NOx-emitting sectors.
pub fn nox_crosscheck(changes: &[f64], shares: &[f64]) -> Result<f64> {
    if changes.len() != shares.len() || changes.is_empty() {
        return Err(Error::domain("NOx changes and shares must be nonempty and of equal length"));
    }
    if shares.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::domain("NOx shares must be ≥ 0"));
    }
    let total: f64 = shares.iter().sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::domain(format!("NOx shares sum to {total} > 1")));
    }
    if total <= 0.0 {
        return Err(Error::domain("NOx shares sum to zero"));
    }
    Ok(changes.iter().zip(shares).map(|(c, s)| c * s).sum::<f64>() / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn pair(c: &str, sector: Sector, v19: f64, v20: f64, start20: NaiveDate, end20: NaiveDate) -> SeriesPair {
        let n20 = date_range(start20, end20).count();
        let (s19, e19) = (reference_day(start20), reference_day(end20));
        let n19 = date_range(s19, e19).count();
        SeriesPair::new(
            DailyEmissionSeries::new(cc(c), sector, s19, vec![v19; n19]).unwrap(),
            DailyEmissionSeries::new(cc(c), sector, start20, vec![v20; n20]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_series_aggregate_is_its_sum() {
        let (a, b) = (d(2020, 1, 1), d(2020, 1, 10));
        let p = pair("CHN", Sector::Power, 2e6, 1e6, a, b);
        let out = aggregate(&[p], Grouping::Global, a, b, CountryRegistry::builtin()).unwrap();
        assert_relative_eq!(out["Global"].mt_2019, 20.0, max_relative = 1e-12);
        assert_relative_eq!(out["Global"].mt_2020, 10.0, max_relative = 1e-12);
        let p = pair("CHN", Sector::Power, 2e6, 1e6, a, b);
        assert!(aggregate(&[p], Grouping::Global, a, d(2020, 2, 1), CountryRegistry::builtin()).is_err());
    }

    #[test]
    fn leap_day_excluded_from_window() {
        let (a, b) = (d(2020, 2, 28), d(2020, 3, 1));
        let p = pair("USA", Sector::Power, 1e6, 1e6, a, b);
        let w = p.window_totals(a, b).unwrap();
        assert_relative_eq!(w.mt_2020, 2.0, max_relative = 1e-12);
        assert_eq!(w.growth(), 0.0);
    }

    #[test]
    fn s2_rows_sum_from_components() {
        let (a, b) = (d(2020, 1, 1), d(2020, 1, 2));
        let pairs = vec![
            pair("CHN", Sector::Power, 1e6, 0.5e6, a, b),
            pair("CHN", Sector::GroundTransport, 1e6, 0.9e6, a, b),
            pair("DEU", Sector::Power, 1e6, 0.8e6, a, b),
            pair("WLD", Sector::InternationalShipping, 1e6, 0.85e6, a, b),
        ];
        let t = TableS2::from_pairs(&pairs, a, b, CountryRegistry::builtin()).unwrap();
        assert_relative_eq!(t.region(RegionGroup::China).diff(), -1.2, max_relative = 1e-12);
        assert_relative_eq!(t.global().diff(), -1.2 - 0.4 - 0.3, max_relative = 1e-12);
        let csv = t.to_table().to_csv().unwrap();
        assert!(csv.starts_with("region,power,transport,industry_with_process,residential,domestic_aviation,sum,growth_pct\n"));
        assert!(csv.contains("Global,,,,,,-1.900000,-23.750000"));
    }

    #[test]
    fn group_rates_and_row() {
        let (a, b) = (d(2020, 1, 1), d(2020, 1, 31));
        let est = vec![
            pair("AAA", Sector::Power, 1e6, 0.9e6, a, b),
            pair("BBB", Sector::Power, 1e6, 0.8e6, a, b),
            pair("CCC", Sector::Power, 1e6, 1e6, a, b),
            pair("AAA", Sector::Industry, 1e6, 0.9e6, a, b),
            pair("CCC", Sector::Industry, 1e6, 1e6, a, b),
        ];
        let mut pol = BTreeMap::new();
        pol.insert(cc("AAA"), ClosurePolicy::new(cc("AAA"), true, Some(d(2020, 1, 10)), None).unwrap());
        pol.insert(cc("BBB"), ClosurePolicy::new(cc("BBB"), true, Some(d(2020, 1, 10)), None).unwrap());
        pol.insert(cc("CCC"), ClosurePolicy::new(cc("CCC"), false, None, None).unwrap());
        let rates = closure_group_rates(&est, &ROW_SECTORS, &pol, a, b).unwrap();
        let jan = YearMonth::new(2020, 1).unwrap();
        assert_relative_eq!(rates[&(Sector::Power, jan)].with_closure, -0.15, max_relative = 1e-12);
        assert_eq!(rates[&(Sector::Power, jan)].without_closure, 0.0);

        let mut inv = AnnualInventory::new(2019);
        inv.insert(cc("KOR"), Sector::Power, 366.0).unwrap();
        inv.insert(cc("MEX"), Sector::Power, 366.0).unwrap();
        pol.insert(cc("KOR"), ClosurePolicy::new(cc("KOR"), true, Some(d(2020, 1, 2)), Some(d(2020, 1, 31))).unwrap());
        pol.insert(cc("MEX"), ClosurePolicy::new(cc("MEX"), false, None, None).unwrap());
        let row = apply_row(&inv, &[(cc("KOR"), Sector::Power), (cc("MEX"), Sector::Power)], &rates, &pol, a, b).unwrap();
        let kor = &row[0].s2020;
        assert_relative_eq!(kor.get(d(2020, 1, 1)).unwrap(), 1e6, max_relative = 1e-12);
        assert_relative_eq!(kor.get(d(2020, 1, 2)).unwrap(), 0.85e6, max_relative = 1e-12);
        assert!(row[1].s2020.values().iter().all(|v| (v - 1e6).abs() < 1e-6));
        assert!(apply_row(&inv, &[(cc("ZZZ"), Sector::Power)], &rates, &pol, a, b).is_err());

        pol.remove(&cc("CCC"));
        assert!(closure_group_rates(&est[..2], &ROW_SECTORS, &pol, a, b).is_err());
    }

    #[test]
    fn holidays_are_tagged() {
        let cal = HolidayCalendar::new(
            cc("CHN"),
            vec![Holiday { start: d(2020, 4, 4), end: d(2020, 4, 6), label: "Qingming".into() }],
        )
        .unwrap();
        let s = DailyEmissionSeries::new(cc("CHN"), Sector::Power, d(2020, 4, 1), vec![1.0; 30]).unwrap();
        let (rows, effects) = annotate_holidays(&s, &cal);
        assert_eq!(rows[4].label.as_deref(), Some("Qingming"));
        assert_eq!(rows[0].label, None);
        assert_eq!(effects[0].change, 0.0);
        let empty = HolidayCalendar::new(cc("CHN"), vec![]).unwrap();
        assert!(annotate_holidays(&s, &empty).0.iter().all(|r| r.label.is_none()));
        let overlap = vec![
            Holiday { start: d(2020, 1, 1), end: d(2020, 1, 5), label: "a".into() },
            Holiday { start: d(2020, 1, 5), end: d(2020, 1, 6), label: "b".into() },
        ];
        assert!(HolidayCalendar::new(cc("CHN"), overlap).is_err());
    }

    #[test]
    fn nox_examples() {
        let ch = [-0.068, -0.372, -0.081];
        assert_relative_eq!(nox_crosscheck(&ch, &[1.0 / 3.0; 3]).unwrap(), -0.1737, epsilon = 1e-4);
        assert_relative_eq!(nox_crosscheck(&ch, &[0.3, 0.4, 0.3]).unwrap(), -0.1935, epsilon = 1e-12);
        assert_eq!(nox_crosscheck(&ch, &[0.0, 0.5, 0.0]).unwrap(), -0.372);
        assert!(nox_crosscheck(&ch, &[0.0; 3]).is_err());
    }

    #[test]
    fn running_mean_edges() {
        assert_eq!(running_mean(&[3.0; 10], 7), vec![3.0; 10]);
        let r = running_mean(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 7);
        assert_eq!(r[0], 1.0);
        assert_eq!(r[1], 1.5);
        assert_eq!(r[7], 5.0);
    }
}
