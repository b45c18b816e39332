//! Runs every enabled estimator over a fixture directory and gathers the
//! paired 2019/2020 series. Nothing here writes files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;

use crate::assembly::{
    annotate_holidays, apply_row, closure_group_rates, nox_crosscheck, HolidayEffect,
    SeriesPair, ROW_SECTORS,
};
use crate::bunkers::{aviation_factor, daily_aviation_emissions, densify, shipping_series, ShippingBaseline};
use crate::error::{Error, Result};
use crate::industry::{
    cement_process_emissions, china_industry_growth, disaggregate_monthly_to_daily, forecast_missing_month,
    group_growth, ipi_monthly_growth, ProductPair, SubSector, YearMonth,
};
use crate::ingestion::{daily_generation, CleanReportEntry, DailyGeneration};
use crate::model::{
    build_baseline_2019, date_range, project_series, reference_day, AnnualInventory, CountryCode,
    CountryRegistry, DailyEmissionSeries, RegionGroup, Sector, TONNES_PER_MT,
};
use crate::power::{
    apply_temperature_adjustment, power_emission_series, shaped_baseline, thermal_aggregate, total_generation,
    GenerationSeries,
};
use crate::residential::{compare_with_gas, heating_emission_series, population_weighted_hdd, GasComparison};
use crate::transport::{
    aggregate_national, city_emission_change, fallback_country_change, fit_sigmoid, CityChange, CongestionSeries,
    SigmoidFit,
};
use crate::uncertainty::{monte_carlo_ci, CiResult, InputDist, SigmaConvention, UncertaintyLedger};

use super::fixtures as fx;
use super::RunConfig;

/// Per-feed cleaning summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanRecord {
    pub country: CountryCode,
    pub year: i32,
    pub entry: CleanReportEntry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoxReport {
    pub country: CountryCode,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Power, transport and industry changes.
    pub changes: [f64; 3],
    pub shares: [f64; 3],
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    pub ledger: UncertaintyLedger,
    /// Combined uncertainty of the sector sum, percent.
    pub sector_sum_u: f64,
    /// Sector sum combined with the multiplicative items, percent.
    pub overall_u: f64,
    /// Monte Carlo interval of the 2020 window total, Mt.
    pub ci: CiResult,
}

#[derive(Debug, Clone, Default)]
pub struct Estimates {
    /// One merged pair per (country, sector), sorted, in whole tonnes.
    pub pairs: Vec<SeriesPair>,
    pub sigmoid: Option<SigmoidFit>,
    pub clean_report: Vec<CleanRecord>,
    pub holiday_effects: Vec<(CountryCode, HolidayEffect)>,
    pub nox: Option<NoxReport>,
    pub gas: Vec<GasComparison>,
    pub uncertainty: Option<UncertaintyReport>,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    start: NaiveDate,
    end: NaiveDate,
    ref_start: NaiveDate,
    ref_end: NaiveDate,
    registry: &'a CountryRegistry,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn warn(&mut self, msg: String) {
        if !self.warnings.contains(&msg) {
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
    }

    fn selected(&self, c: CountryCode) -> bool {
        self.cfg.countries.includes(c)
    }
}

/// Cleaned per-category generation for both years.
struct Feed {
    country: CountryCode,
    gen2019: DailyGeneration,
    gen2020: DailyGeneration,
}

pub fn estimate(cfg: &RunConfig) -> Result<Estimates> {
    cfg.validate()?;
    let registry = CountryRegistry::builtin();
    let mut ctx = Ctx {
        cfg,
        dir: &cfg.fixture_dir,
        start: cfg.window.start,
        end: cfg.window.end,
        ref_start: reference_day(cfg.window.start),
        ref_end: reference_day(cfg.window.end),
        registry,
        warnings: Vec::new(),
    };
    if !ctx.dir.is_dir() {
        return Err(Error::MissingFixture(ctx.dir.to_path_buf()));
    }
    let mut out = Estimates::default();
    let mut pairs: Vec<SeriesPair> = Vec::new();
    let s = &cfg.sectors;
    let national = s.power || s.industry || s.ground_transport || s.residential;

    let t = Instant::now();
    let baseline = if national {
        let edgar = fx::load_edgar(ctx.dir)?;
        let growth = fx::load_growth(ctx.dir)?;
        build_baseline_2019(&edgar, &growth, cfg.baseline.default_growth_rate)?
    } else {
        AnnualInventory::new(2019)
    };
    let policies = if s.power || s.industry {
        fx::load_policies(ctx.dir)?
    } else {
        BTreeMap::new()
    };
    out.timings_ms.insert("baseline".into(), t.elapsed().as_millis());

    let t = Instant::now();
    let feeds = if s.power || s.industry {
        let (feeds, report) = load_feeds(&ctx)?;
        out.clean_report = report;
        feeds
    } else {
        Vec::new()
    };
    out.timings_ms.insert("ingestion".into(), t.elapsed().as_millis());

    let mut direct: Vec<SeriesPair> = Vec::new();
    if s.power {
        let t = Instant::now();
        direct.extend(power_direct(&mut ctx, &baseline, &feeds)?);
        out.timings_ms.insert("power".into(), t.elapsed().as_millis());
    }
    if s.industry {
        let t = Instant::now();
        direct.extend(industry_direct(&mut ctx, &baseline, &feeds)?);
        out.timings_ms.insert("industry".into(), t.elapsed().as_millis());
    }
    if s.power || s.industry {
        let t = Instant::now();
        let merged = merge_pairs(direct)?;
        let sectors: Vec<Sector> = ROW_SECTORS
            .into_iter()
            .filter(|sec| match sec {
                Sector::Power => s.power,
                _ => s.industry,
            })
            .collect();
        let covered: BTreeSet<(CountryCode, Sector)> = merged.iter().map(|p| (p.country(), p.sector())).collect();
        let targets: Vec<(CountryCode, Sector)> = baseline
            .entries()
            .filter(|(c, sec, _)| sectors.contains(sec) && ctx.selected(*c) && !covered.contains(&(*c, *sec)))
            .map(|(c, sec, _)| (c, sec))
            .collect();
        if !targets.is_empty() {
            let rates = closure_group_rates(&merged, &sectors, &policies, ctx.start, ctx.end)?;
            pairs.extend(apply_row(&baseline, &targets, &rates, &policies, ctx.start, ctx.end)?);
        }
        pairs.extend(merged);
        if let (true, Some(adj)) = (s.power, &cfg.power.temp_adjustment) {
            for p in pairs.iter_mut().filter(|p| p.sector() == Sector::Power) {
                if adj.start <= p.s2020.end_date() && adj.end >= p.s2020.start_date() {
                    let mut clipped = *adj;
                    clipped.start = adj.start.max(p.s2020.start_date());
                    clipped.end = adj.end.min(p.s2020.end_date());
                    p.s2020 = apply_temperature_adjustment(&p.s2020, &clipped)?;
                }
            }
        }
        out.timings_ms.insert("rest_of_world".into(), t.elapsed().as_millis());
    }
    if s.ground_transport {
        let t = Instant::now();
        let (fit, tp) = transport(&mut ctx, &baseline)?;
        out.sigmoid = Some(fit);
        pairs.extend(tp);
        out.timings_ms.insert("transport".into(), t.elapsed().as_millis());
    }
    if s.residential {
        let t = Instant::now();
        let rp = residential(&mut ctx, &baseline)?;
        if let Some(gas) = fx::load_gas(ctx.dir)? {
            out.gas = gas_check(&ctx, &rp, &gas)?;
        }
        pairs.extend(rp);
        out.timings_ms.insert("residential".into(), t.elapsed().as_millis());
    }
    if s.aviation {
        let t = Instant::now();
        pairs.extend(aviation(&mut ctx)?);
        out.timings_ms.insert("aviation".into(), t.elapsed().as_millis());
    }
    if s.shipping {
        let t = Instant::now();
        pairs.push(shipping(&ctx)?);
        out.timings_ms.insert("shipping".into(), t.elapsed().as_millis());
    }

    let t = Instant::now();
    let pairs = merge_pairs(pairs)?;
    out.pairs = pairs
        .into_iter()
        .map(|p| SeriesPair::new(whole_tonnes(&p.s2019)?, whole_tonnes(&p.s2020)?))
        .collect::<Result<_>>()?;
    if s.power {
        out.holiday_effects = holidays(&ctx, &out.pairs)?;
    }
    out.nox = nox(&ctx, &out.pairs)?;
    out.timings_ms.insert("assembly".into(), t.elapsed().as_millis());

    if s.uncertainty && !out.pairs.is_empty() {
        let t = Instant::now();
        out.uncertainty = Some(uncertainty(&ctx, &out.pairs)?);
        out.timings_ms.insert("uncertainty".into(), t.elapsed().as_millis());
    }
    out.warnings = ctx.warnings;
    Ok(out)
}

fn whole_tonnes(s: &DailyEmissionSeries) -> Result<DailyEmissionSeries> {
    s.map_values(|_, v| v.round())
}

/// Sums pairs sharing a (country, sector) key; output is sorted by key.
pub fn merge_pairs(pairs: Vec<SeriesPair>) -> Result<Vec<SeriesPair>> {
    let mut by_key: BTreeMap<(CountryCode, Sector), SeriesPair> = BTreeMap::new();
    for p in pairs {
        match by_key.get_mut(&(p.country(), p.sector())) {
            None => {
                by_key.insert((p.country(), p.sector()), p);
            }
            Some(acc) => {
                acc.s2019 = add_series(&acc.s2019, &p.s2019)?;
                acc.s2020 = add_series(&acc.s2020, &p.s2020)?;
            }
        }
    }
    Ok(by_key.into_values().collect())
}

fn add_series(a: &DailyEmissionSeries, b: &DailyEmissionSeries) -> Result<DailyEmissionSeries> {
    if a.start_date() != b.start_date() || a.len() != b.len() {
        return Err(Error::Internal(format!(
            "{}/{}: cannot merge series over different ranges",
            a.country, a.sector
        )));
    }
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect();
    DailyEmissionSeries::new(a.country, a.sector, a.start_date(), values)
}

fn load_feeds(ctx: &Ctx) -> Result<(Vec<Feed>, Vec<CleanRecord>)> {
    let registry = fx::load_feed_schemas(ctx.dir)?;
    let countries: Vec<CountryCode> = fx::power_feed_countries(ctx.dir)?
        .into_iter()
        .filter(|c| ctx.selected(*c))
        .collect();
    let loaded: Vec<Result<(Feed, Vec<CleanRecord>)>> = countries
        .par_iter()
        .map(|&c| {
            let schema = ctx.cfg.power.schema_for(c);
            let mut records = Vec::new();
            let mut gens = Vec::new();
            for year in [2019, 2020] {
                let obs = fx::load_power_feed(ctx.dir, c, year, schema, &registry)?;
                let (gen, report) = daily_generation(obs)?;
                records.extend(report.into_iter().map(|entry| CleanRecord { country: c, year, entry }));
                gens.push(gen);
            }
            let gen2020 = gens.pop().expect("two years");
            let gen2019 = gens.pop().expect("two years");
            Ok((Feed { country: c, gen2019, gen2020 }, records))
        })
        .collect();
    let mut feeds = Vec::new();
    let mut report = Vec::new();
    for r in loaded {
        let (f, rec) = r?;
        feeds.push(f);
        report.extend(rec);
    }
    Ok((feeds, report))
}

/// Restricts a generation series to `a..=b`, which it must cover.
fn window_of(g: &GenerationSeries, a: NaiveDate, b: NaiveDate) -> Result<GenerationSeries> {
    let mut daily = BTreeMap::new();
    for d in date_range(a, b) {
        let v = g.daily.get(&d).ok_or_else(|| {
            Error::domain(format!("{}: generation feed has no data for {d}", g.country))
        })?;
        daily.insert(d, *v);
    }
    Ok(GenerationSeries { daily, ..g.clone() })
}

fn power_direct(ctx: &mut Ctx, baseline: &AnnualInventory, feeds: &[Feed]) -> Result<Vec<SeriesPair>> {
    let pc = &ctx.cfg.power;
    let mut out = Vec::new();
    for f in feeds {
        let c = f.country;
        if pc.excluded.contains(&c) {
            continue;
        }
        let Some(annual) = baseline.get(c, Sector::Power) else {
            ctx.warn(format!("{c}: power feed present but no power baseline; skipped"));
            continue;
        };
        let (g19, g20) = if pc.use_total_generation.contains(&c) {
            (total_generation(c, &f.gen2019), total_generation(c, &f.gen2020))
        } else {
            let cats = pc.thermal_for(c)?;
            (thermal_aggregate(c, &f.gen2019, cats)?, thermal_aggregate(c, &f.gen2020, cats)?)
        };
        let g19 = window_of(&g19, ctx.ref_start, ctx.ref_end)?;
        let g20 = window_of(&g20, ctx.start, ctx.end)?;
        let base = shaped_baseline(c, Sector::Power, annual * TONNES_PER_MT, &g19)?;
        let est = power_emission_series(&g20, &g19, &base)?;
        for d in &est.flagged_days {
            ctx.warn(format!("{c}: {d} has 2020 generation but none on the reference day; excluded"));
        }
        out.push(SeriesPair::new(base, est.series_2020)?);
    }
    Ok(out)
}

/// Total generation of a feed country, used to shape industry within months.
fn electricity(feeds: &[Feed], excluded: &[CountryCode]) -> BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>> {
    feeds
        .iter()
        .filter(|f| !excluded.contains(&f.country))
        .map(|f| {
            let mut all = total_generation(f.country, &f.gen2019).daily;
            all.extend(total_generation(f.country, &f.gen2020).daily);
            (f.country, all)
        })
        .collect()
}

fn industry_direct(ctx: &mut Ctx, baseline: &AnnualInventory, feeds: &[Feed]) -> Result<Vec<SeriesPair>> {
    let months: Vec<YearMonth> = crate::assembly::months_in(ctx.start, ctx.end);
    let production = fx::load_production(ctx.dir)?;
    let ipi = fx::load_ipi(ctx.dir)?;
    let shares = fx::load_shares(ctx.dir)?;
    let process = fx::load_process(ctx.dir)?;
    let elec = electricity(feeds, &ctx.cfg.power.excluded);
    let prod_countries: BTreeSet<CountryCode> = production.iter().map(|r| r.country).collect();

    let mut out = Vec::new();
    for (c, sector, annual) in baseline.entries().collect::<Vec<_>>() {
        if sector != Sector::Industry || !ctx.selected(c) {
            continue;
        }
        let (growth, cement) = if prod_countries.contains(&c) {
            let (g, cement) = production_growth(c, &production, &shares, &months)?;
            (g, Some(cement))
        } else if let Some(id) = ipi_series_id(c, &ipi, ctx.registry) {
            (ipi_growths(ctx, &id, &ipi, &months)?, None)
        } else {
            continue;
        };
        let shape = elec.get(&c);
        out.push(monthly_pair(ctx, c, annual, &growth, shape)?);
        if let Some(p) = process.get(&c) {
            let g = cement.as_ref().unwrap_or(&growth);
            out.push(process_pair(ctx, c, *p, g, shape)?);
        }
    }
    for c in process.keys() {
        if ctx.selected(*c) && !out.iter().any(|p| p.country() == *c) {
            ctx.warn(format!("{c}: process emissions listed but industry is not estimated directly; ignored"));
        }
    }
    Ok(out)
}

/// Monthly composite growth from production statistics, plus the cement
/// sub-sector growth that drives process emissions.
fn production_growth(
    c: CountryCode,
    rows: &[fx::ProductionRow],
    shares: &crate::industry::SubSectorShare,
    months: &[YearMonth],
) -> Result<(BTreeMap<YearMonth, f64>, BTreeMap<YearMonth, f64>)> {
    let mut composite = BTreeMap::new();
    let mut cement = BTreeMap::new();
    for m in months {
        let prev = YearMonth::new(m.year - 1, m.month)?;
        let mut by_sub = BTreeMap::new();
        for sub in SubSector::ALL {
            let mut basket: BTreeMap<&str, ProductPair> = BTreeMap::new();
            for r in rows.iter().filter(|r| r.country == c && r.subsector == sub) {
                if r.month != *m && r.month != prev {
                    continue;
                }
                let e = basket.entry(&r.product).or_insert_with(|| ProductPair {
                    product: r.product.clone(),
                    weight: r.weight,
                    q2019: f64::NAN,
                    q2020: f64::NAN,
                });
                if r.month == *m {
                    e.q2020 = r.quantity;
                } else {
                    e.q2019 = r.quantity;
                }
            }
            let basket: Vec<ProductPair> = basket.into_values().collect();
            if basket.is_empty() {
                return Err(Error::config(format!("{c}: no {} production for {m}", sub.as_str())));
            }
            if let Some(p) = basket.iter().find(|p| p.q2019.is_nan() || p.q2020.is_nan()) {
                return Err(Error::config(format!("{c}: {} lacks one year for {m}", p.product)));
            }
            by_sub.insert(sub, group_growth(&basket)?);
        }
        cement.insert(*m, by_sub[&SubSector::Cement]);
        composite.insert(*m, china_industry_growth(&by_sub, shares)?);
    }
    Ok((composite, cement))
}

fn ipi_series_id(c: CountryCode, ipi: &fx::IpiTable, registry: &CountryRegistry) -> Option<String> {
    if ipi.contains_key(c.as_str()) {
        return Some(c.as_str().to_string());
    }
    let group = registry.region_of(c);
    (group != RegionGroup::ROW && ipi.contains_key(group.as_str())).then(|| group.as_str().to_string())
}

fn ipi_month(ipi: &fx::IpiTable, id: &str, m: YearMonth) -> Result<f64> {
    let empty = BTreeMap::new();
    let years = ipi.get(id);
    let year = |y: i32| years.and_then(|t| t.get(&y)).unwrap_or(&empty);
    ipi_monthly_growth(year(m.year - 1), year(m.year), id, m.month)
}

fn ipi_growths(ctx: &mut Ctx, id: &str, ipi: &fx::IpiTable, months: &[YearMonth]) -> Result<BTreeMap<YearMonth, f64>> {
    let ic = &ctx.cfg.industry;
    let mut out = BTreeMap::new();
    for (i, m) in months.iter().enumerate() {
        let g = match ipi_month(ipi, id, *m) {
            Ok(g) => g,
            Err(Error::IpiGap { month, .. })
                if month == m.month && i + 1 == months.len() && ic.forecast_targets.iter().any(|t| t == id) =>
            {
                let donors: Vec<(&str, Option<f64>)> = ic
                    .forecast_donors
                    .iter()
                    .map(|d| (d.as_str(), ipi_month(ipi, d, *m).ok()))
                    .collect();
                let g = forecast_missing_month(&donors)?;
                ctx.warn(format!("{id}: {m} index not published; using donor mean {:.4}", g));
                g
            }
            Err(e) => return Err(e),
        };
        out.insert(*m, g);
    }
    Ok(out)
}

/// Daily values of one month, shaped by electricity when available.
fn month_days(
    ctx: &mut Ctx,
    c: CountryCode,
    mass: f64,
    m: YearMonth,
    shape: Option<&BTreeMap<NaiveDate, f64>>,
) -> Result<Vec<f64>> {
    let covered = shape.filter(|s| date_range(m.first_day(), m.last_day()).all(|d| s.contains_key(&d)));
    let uniform: BTreeMap<NaiveDate, f64> = date_range(m.first_day(), m.last_day()).map(|d| (d, 1.0)).collect();
    let (values, fallback) = disaggregate_monthly_to_daily(mass, m, covered.unwrap_or(&uniform))?;
    if fallback {
        ctx.warn(format!("{c}: {m} has zero electricity; industry split uniformly"));
    }
    Ok(values)
}

/// Builds a pair from monthly growth: 2019 months carry annual/365 per day,
/// 2020 months the same daily mean times 1 + growth.
fn monthly_pair(
    ctx: &mut Ctx,
    c: CountryCode,
    annual_mt: f64,
    growth: &BTreeMap<YearMonth, f64>,
    shape: Option<&BTreeMap<NaiveDate, f64>>,
) -> Result<SeriesPair> {
    let per_day = annual_mt * TONNES_PER_MT / 365.0;
    let (mut m19, mut m20) = (BTreeMap::new(), BTreeMap::new());
    for (m, g) in growth {
        let prev = YearMonth::new(m.year - 1, m.month)?;
        let v19 = month_days(ctx, c, per_day * prev.days() as f64, prev, shape)?;
        let v20 = month_days(ctx, c, per_day * m.days() as f64 * (1.0 + g), *m, shape)?;
        m19.extend(date_range(prev.first_day(), prev.last_day()).zip(v19));
        m20.extend(date_range(m.first_day(), m.last_day()).zip(v20));
    }
    clip_pair(ctx, c, Sector::Industry, &m19, &m20)
}

fn process_pair(
    ctx: &mut Ctx,
    c: CountryCode,
    annual_mt: f64,
    growth: &BTreeMap<YearMonth, f64>,
    shape: Option<&BTreeMap<NaiveDate, f64>>,
) -> Result<SeriesPair> {
    let per_day = annual_mt * TONNES_PER_MT / 365.0;
    let (mut m19, mut m20) = (BTreeMap::new(), BTreeMap::new());
    for (m, g) in growth {
        let prev = YearMonth::new(m.year - 1, m.month)?;
        let base19 = per_day * prev.days() as f64;
        let base20 = per_day * m.days() as f64;
        let v19 = month_days(ctx, c, base19, prev, shape)?;
        let v20 = month_days(ctx, c, base20 + cement_process_emissions(*g, base20)?, *m, shape)?;
        m19.extend(date_range(prev.first_day(), prev.last_day()).zip(v19));
        m20.extend(date_range(m.first_day(), m.last_day()).zip(v20));
    }
    clip_pair(ctx, c, Sector::Industry, &m19, &m20)
}

fn clip_pair(
    ctx: &Ctx,
    c: CountryCode,
    sector: Sector,
    m19: &BTreeMap<NaiveDate, f64>,
    m20: &BTreeMap<NaiveDate, f64>,
) -> Result<SeriesPair> {
    let s19: BTreeMap<_, _> = m19.range(ctx.ref_start..=ctx.ref_end).map(|(d, v)| (*d, *v)).collect();
    let s20: BTreeMap<_, _> = m20.range(ctx.start..=ctx.end).map(|(d, v)| (*d, *v)).collect();
    SeriesPair::new(
        DailyEmissionSeries::from_map(c, sector, &s19)?,
        DailyEmissionSeries::from_map(c, sector, &s20)?,
    )
}

fn uniform_2019(ctx: &Ctx, c: CountryCode, sector: Sector, annual_mt: f64) -> Result<DailyEmissionSeries> {
    let n = date_range(ctx.ref_start, ctx.ref_end).count();
    DailyEmissionSeries::new(c, sector, ctx.ref_start, vec![annual_mt * TONNES_PER_MT / 365.0; n])
}

fn transport(ctx: &mut Ctx, baseline: &AnnualInventory) -> Result<(SigmoidFit, Vec<SeriesPair>)> {
    let fit = fit_sigmoid(&fx::load_calibration(ctx.dir)?)?;
    let samples = fx::load_congestion(ctx.dir)?;
    let weights = fx::load_city_weights(ctx.dir)?;

    type Days = Vec<(NaiveDate, f64)>;
    let mut by_city: BTreeMap<(CountryCode, String), (Days, Days)> = BTreeMap::new();
    for s in &samples {
        let e = by_city.entry((s.country, s.city.clone())).or_default();
        if s.date >= ctx.ref_start && s.date <= ctx.ref_end {
            e.0.push((s.date, s.congestion_pct));
        } else if s.date >= ctx.start && s.date <= ctx.end {
            e.1.push((s.date, s.congestion_pct));
        }
    }
    let changes: Vec<CityChange> = by_city
        .par_iter()
        .map(|((country, city), (x19, x20))| {
            let x19 = CongestionSeries::from_samples(city, *country, x19.iter().copied())?;
            let x20 = CongestionSeries::from_samples(city, *country, x20.iter().copied())?;
            city_emission_change(&x20, &x19, &fit.params)
        })
        .collect::<Result<_>>()?;

    let mut national: BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut peer_weight: BTreeMap<CountryCode, f64> = BTreeMap::new();
    let countries: BTreeSet<CountryCode> = changes.iter().map(|c| c.country).collect();
    for c in countries {
        let members: Vec<CityChange> = changes.iter().filter(|x| x.country == c).cloned().collect();
        national.insert(c, aggregate_national(&members, &weights)?);
        let w: f64 = weights.iter().filter(|w| w.country == c).map(|w| w.weight).sum();
        peer_weight.insert(c, w);
    }
    let peers = |eu_only: bool| -> Vec<(f64, &BTreeMap<NaiveDate, f64>)> {
        national
            .iter()
            .filter(|(c, _)| !eu_only || ctx.registry.region_of(**c) == RegionGroup::EU27UK)
            .map(|(c, s)| (peer_weight[c], s))
            .collect()
    };
    let eu_fallback = fallback_country_change(&peers(true)).ok();
    let global_fallback = fallback_country_change(&peers(false)).ok();

    let mut out = Vec::new();
    for (c, sector, annual) in baseline.entries().collect::<Vec<_>>() {
        if sector != Sector::GroundTransport || !ctx.selected(c) {
            continue;
        }
        let change = match national.get(&c) {
            Some(s) => s,
            None => {
                let eu = ctx.registry.region_of(c) == RegionGroup::EU27UK;
                let fb = if eu { eu_fallback.as_ref() } else { global_fallback.as_ref() };
                fb.ok_or_else(|| {
                    Error::config(format!(
                        "{c}: no congestion data and the {} peer group is empty",
                        if eu { "EU" } else { "global" }
                    ))
                })?
            }
        };
        let base = uniform_2019(ctx, c, sector, annual)?;
        let s2020 = project_series(&base, ctx.start, ctx.end, |d| {
            change
                .get(&d)
                .copied()
                .ok_or_else(|| Error::domain(format!("{c}: no transport change for {d}")))
        })?;
        out.push(SeriesPair::new(base, s2020)?);
    }
    Ok((fit, out))
}

fn residential(ctx: &mut Ctx, baseline: &AnnualInventory) -> Result<Vec<SeriesPair>> {
    let temps = fx::load_temperature(ctx.dir)?;
    let pop = fx::load_population(ctx.dir)?;
    let split = fx::load_split(ctx.dir)?;
    let base_c = ctx.cfg.residential.hdd_base_c;
    let with_cells: BTreeSet<CountryCode> = pop.cells.iter().map(|c| c.country).collect();
    let targets: Vec<(CountryCode, f64)> = baseline
        .entries()
        .filter(|(c, s, _)| *s == Sector::Residential && ctx.selected(*c))
        .map(|(c, _, a)| (c, a))
        .collect();
    let hdd: Vec<Option<BTreeMap<NaiveDate, f64>>> = targets
        .par_iter()
        .map(|(c, _)| {
            with_cells
                .contains(c)
                .then(|| population_weighted_hdd(&temps, &pop, *c, base_c))
                .transpose()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for ((c, annual), hdd) in targets.into_iter().zip(hdd) {
        let sp = split
            .get(&c)
            .ok_or_else(|| Error::config(format!("{c}: no cooking/heating split")))?;
        let annual_t = annual * TONNES_PER_MT;
        let Some(hdd) = hdd else {
            ctx.warn(format!("{c}: no population cells; residential held flat"));
            let base = uniform_2019(ctx, c, Sector::Residential, annual)?;
            let s2020 = project_series(&base, ctx.start, ctx.end, |_| Ok(0.0))?;
            out.push(SeriesPair::new(base, s2020)?);
            continue;
        };
        let ref_year = ctx.ref_start.year();
        let year_days = hdd.keys().filter(|d| d.year() == ref_year).count();
        let days_in_year = date_range(
            NaiveDate::from_ymd_opt(ref_year, 1, 1).expect("date"),
            NaiveDate::from_ymd_opt(ref_year, 12, 31).expect("date"),
        )
        .count();
        if year_days != days_in_year {
            return Err(Error::config(format!(
                "temperature fixture covers {year_days} of {days_in_year} days of {ref_year}"
            )));
        }
        let total: f64 = hdd.iter().filter(|(d, _)| d.year() == ref_year).map(|(_, v)| v).sum();
        let (heat, cook) = (annual_t * sp.heating_share, annual_t * sp.cooking_share);
        let s2019 = heating_emission_series(c, heat, cook, &hdd, total, ctx.ref_start, ctx.ref_end)?;
        let s2020 = heating_emission_series(c, heat, cook, &hdd, total, ctx.start, ctx.end)?;
        out.push(SeriesPair::new(s2019, s2020)?);
    }
    Ok(out)
}

fn gas_check(
    ctx: &Ctx,
    pairs: &[SeriesPair],
    gas: &BTreeMap<CountryCode, BTreeMap<NaiveDate, f64>>,
) -> Result<Vec<GasComparison>> {
    let mut out = Vec::new();
    for (c, daily) in gas {
        let Some(p) = pairs.iter().find(|p| p.country() == *c) else {
            continue;
        };
        let part = |a: NaiveDate, b: NaiveDate| -> Result<DailyEmissionSeries> {
            let m: BTreeMap<_, _> = daily.range(a..=b).map(|(d, v)| (*d, *v)).collect();
            DailyEmissionSeries::from_map(*c, Sector::Residential, &m)
        };
        out.push(compare_with_gas(
            &p.s2019,
            &p.s2020,
            &part(ctx.ref_start, ctx.ref_end)?,
            &part(ctx.start, ctx.end)?,
            ctx.start,
            ctx.end,
        )?);
    }
    Ok(out)
}

fn aviation(ctx: &mut Ctx) -> Result<Vec<SeriesPair>> {
    let flights = fx::load_flights(ctx.dir)?;
    let factor = aviation_factor(&ctx.cfg.aviation)?;
    let em = daily_aviation_emissions(&flights, factor)?;
    if em.unattributed > 0 {
        ctx.warn(format!("{} flights without a country counted as global international", em.unattributed));
    }
    let mut out = Vec::new();
    for (sector, by_country) in [
        (Sector::DomesticAviation, &em.domestic),
        (Sector::InternationalAviation, &em.international),
    ] {
        for (c, daily) in by_country {
            if *c != CountryCode::WORLD && !ctx.selected(*c) {
                continue;
            }
            out.push(SeriesPair::new(
                densify(*c, sector, daily, ctx.ref_start, ctx.ref_end)?,
                densify(*c, sector, daily, ctx.start, ctx.end)?,
            )?);
        }
    }
    Ok(out)
}

fn shipping(ctx: &Ctx) -> Result<SeriesPair> {
    let sc = &ctx.cfg.shipping;
    let baseline = ShippingBaseline::new(sc.annual_2019, sc.international_share)?;
    let volume: BTreeMap<_, _> = fx::load_shipping(ctx.dir)?
        .range(ctx.start..=ctx.end)
        .map(|(d, v)| (*d, *v))
        .collect();
    if let Some(d) = date_range(ctx.start, ctx.end).find(|d| !volume.contains_key(d)) {
        return Err(Error::domain(format!("shipping volume has no data for {d}")));
    }
    SeriesPair::new(baseline.series_2019(ctx.ref_start, ctx.ref_end)?, shipping_series(&baseline, &volume)?)
}

fn holidays(ctx: &Ctx, pairs: &[SeriesPair]) -> Result<Vec<(CountryCode, HolidayEffect)>> {
    if !ctx.dir.join(fx::HOLIDAYS).exists() {
        return Ok(Vec::new());
    }
    let calendars = fx::load_holidays(ctx.dir)?;
    let mut out = Vec::new();
    for (c, cal) in &calendars {
        if let Some(p) = pairs.iter().find(|p| p.country() == *c && p.sector() == Sector::Power) {
            for s in [&p.s2019, &p.s2020] {
                let (_, effects) = annotate_holidays(s, cal);
                out.extend(effects.into_iter().map(|e| (*c, e)));
            }
        }
    }
    Ok(out)
}

fn nox(ctx: &Ctx, pairs: &[SeriesPair]) -> Result<Option<NoxReport>> {
    let n = &ctx.cfg.nox;
    let find = |s: Sector| pairs.iter().find(|p| p.country() == n.country && p.sector() == s);
    let (Some(pw), Some(tr), Some(ind)) = (find(Sector::Power), find(Sector::GroundTransport), find(Sector::Industry))
    else {
        return Ok(None);
    };
    let (a, b) = (n.start.max(ctx.start), n.end.min(ctx.end));
    if a > b {
        return Ok(None);
    }
    let changes = [
        pw.window_totals(a, b)?.growth(),
        tr.window_totals(a, b)?.growth(),
        ind.window_totals(a, b)?.growth(),
    ];
    Ok(Some(NoxReport {
        country: n.country,
        start: a,
        end: b,
        changes,
        shares: n.shares,
        weighted: nox_crosscheck(&changes, &n.shares)?,
    }))
}

/// Ledger item that a sector's uncertainty is booked under.
pub fn ledger_item(s: Sector) -> &'static str {
    match s {
        Sector::DomesticAviation | Sector::InternationalAviation => "Aviation",
        other => other.as_str(),
    }
}

fn uncertainty(ctx: &Ctx, pairs: &[SeriesPair]) -> Result<UncertaintyReport> {
    let mut ledger = fx::load_ledger(ctx.dir)?;
    let days = date_range(ctx.start, ctx.end).count() as f64;
    let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
    for p in pairs {
        *totals.entry(ledger_item(p.sector())).or_default() += p.window_totals(ctx.start, ctx.end)?.mt_2020;
    }
    for e in ledger.entries.iter_mut() {
        if e.mu_mt_per_day.is_some() {
            e.mu_mt_per_day = Some(totals.get(e.item.as_str()).copied().unwrap_or(0.0) / days);
        }
    }
    let (u, mu) = ledger.sector_terms();
    let sector_sum_u = crate::uncertainty::combine_sum(&u, &mu)?;
    let overall_u = ledger.overall()?;

    let sd_fraction = |e: &crate::uncertainty::LedgerEntry| {
        let k = match e.sigma_convention {
            SigmaConvention::OneSigma => 1.0,
            SigmaConvention::TwoSigma => 2.0,
        };
        e.u_percent / 100.0 / k
    };
    let mut inputs = Vec::new();
    let mut n_additive = 0;
    for e in ledger.entries.iter().filter(|e| e.mu_mt_per_day.is_some()) {
        let total = e.mu_mt_per_day.unwrap_or(0.0) * days;
        inputs.push(InputDist::nonnegative(total, (sd_fraction(e) * total).max(f64::MIN_POSITIVE)));
        n_additive += 1;
    }
    for e in ledger.entries.iter().filter(|e| e.mu_mt_per_day.is_none()) {
        inputs.push(InputDist::normal(1.0, sd_fraction(e).max(f64::MIN_POSITIVE)));
    }
    let ci = monte_carlo_ci(
        |x| {
            let sum: f64 = x[..n_additive].iter().sum();
            Some(sum * x[n_additive..].iter().product::<f64>())
        },
        &inputs,
        ctx.cfg.mc_trials,
        ctx.cfg.seed,
    )?;
    Ok(UncertaintyReport {
        ledger,
        sector_sum_u,
        overall_u,
        ci,
    })
}
