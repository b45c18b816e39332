//! Writes run outputs in a fixed order with fixed number formatting.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::assembly::{fmt6, monthly_change_table, running_mean, SeriesPair, Table, TableS2};
use crate::error::{Error, Result};
use crate::model::{align_dates, date_range, CountryRegistry, Sector, TONNES_PER_MT};

use super::estimate::{estimate, ledger_item, Estimates};
use super::fixtures::list_files;
use super::RunConfig;

pub const DAILY_SERIES: &str = "daily_series.csv";
pub const TABLE_S2: &str = "table_s2.csv";
pub const TABLE_S3: &str = "table_s3.csv";
pub const TABLE_S4: &str = "table_s4.csv";
pub const TABLE_S6: &str = "table_s6.csv";
pub const FIG1: &str = "fig1.csv";
pub const UNCERTAINTY: &str = "uncertainty.csv";
pub const UNCERTAINTY_LEDGER: &str = "uncertainty_ledger.csv";
pub const HOLIDAYS: &str = "holidays.csv";
pub const SIGMOID_FIT: &str = "sigmoid_fit.csv";
pub const NOX: &str = "nox_crosscheck.csv";
pub const CLEAN_REPORT: &str = "clean_report.csv";
pub const GAS_CHECK: &str = "gas_check.csv";
pub const MANIFEST: &str = "manifest.json";

pub const DAILY_HEADER: [&str; 6] = ["date", "country", "sector", "mt_co2_2019", "mt_co2_2020", "diff_mt"];
pub const FIG1_HEADER: [&str; 6] = ["date", "sector", "mt_co2_2019", "mt_co2_2020", "diff_mt", "diff_7day_mean_mt"];
const S2_HEADER: [&str; 8] = [
    "region",
    "power",
    "transport",
    "industry_with_process",
    "residential",
    "domestic_aviation",
    "sum",
    "growth_pct",
];

/// Provenance of one run. Timings vary between runs, so this file is not
/// part of the byte-identity contract.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub software_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub fixtures: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u128>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs all enabled estimators in a pool of `cfg.threads` workers and writes
/// every output plus the manifest.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let t = Instant::now();
    let mut est = pool.install(|| estimate(cfg))?;
    let files = pool.install(|| render_outputs(cfg, &est))?;
    est.timings_ms.insert("total".into(), t.elapsed().as_millis());

    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut outputs = BTreeMap::new();
    for (name, text) in &files {
        std::fs::write(cfg.output_dir.join(name), text)?;
        outputs.insert(name.clone(), sha256_hex(text.as_bytes()));
    }
    let mut fixtures = BTreeMap::new();
    for rel in list_files(&cfg.fixture_dir)? {
        let bytes = std::fs::read(cfg.fixture_dir.join(&rel))?;
        fixtures.insert(rel, sha256_hex(&bytes));
    }
    let manifest = RunManifest {
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(cfg.to_toml()?.as_bytes()),
        seed: cfg.seed,
        threads: cfg.threads,
        fixtures,
        outputs,
        timings_ms: est.timings_ms.clone(),
        warnings: est.warnings.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(cfg.output_dir.join(MANIFEST), json + "\n")?;
    let mut names: Vec<String> = files.into_iter().map(|(n, _)| n).collect();
    names.push(MANIFEST.to_string());
    Ok(RunSummary {
        output_dir: cfg.output_dir.clone(),
        files: names,
        warnings: est.warnings,
    })
}

/// Every output file except the manifest, as (name, contents).
pub fn render_outputs(cfg: &RunConfig, est: &Estimates) -> Result<Vec<(String, String)>> {
    let (start, end) = (cfg.window.start, cfg.window.end);
    let registry = CountryRegistry::builtin();
    let pairs = &est.pairs;
    let mut out = Vec::new();

    out.push((DAILY_SERIES.to_string(), daily_csv(pairs, start, end)?));

    let s2 = if pairs.is_empty() {
        Table::new(&S2_HEADER)
    } else {
        TableS2::from_pairs(pairs, start, end, registry)?.to_table()
    };
    out.push((TABLE_S2.to_string(), s2.to_csv()?));
    for (name, sector) in [(TABLE_S3, Sector::Power), (TABLE_S4, Sector::GroundTransport), (TABLE_S6, Sector::Industry)] {
        let t = monthly_change_table(pairs, sector, start, end, registry)?;
        let t = if pairs.iter().any(|p| p.sector() == sector) { t } else { Table { rows: Vec::new(), ..t } };
        out.push((name.to_string(), t.to_csv()?));
    }
    out.push((FIG1.to_string(), fig1(pairs, start, end)?.to_csv()?));

    let mut unc = Table::new(&["quantity", "value"]);
    let mut ledger_csv = "item,u_percent,sigma_convention,mu_mt_per_day\n".to_string();
    if let Some(u) = &est.uncertainty {
        let rows: [(&str, String); 10] = [
            ("sector_sum_u_percent", fmt6(u.sector_sum_u)),
            ("overall_u_percent", fmt6(u.overall_u)),
            ("mc_nominal_mt", fmt6(u.ci.nominal)),
            ("mc_point_mt", fmt6(u.ci.point)),
            ("mc_lower_mt", fmt6(u.ci.lower)),
            ("mc_upper_mt", fmt6(u.ci.upper)),
            ("mc_half_width_percent", fmt6(50.0 * (u.ci.upper - u.ci.lower) / u.ci.point)),
            ("mc_trials", u.ci.n_trials.to_string()),
            ("mc_rejected", u.ci.rejected.to_string()),
            ("seed", u.ci.seed.to_string()),
        ];
        for (k, v) in rows {
            unc.rows.push(vec![k.to_string(), v]);
        }
        ledger_csv = ledger_table(u)?.to_csv()?;
    }
    out.push((UNCERTAINTY.to_string(), unc.to_csv()?));
    out.push((UNCERTAINTY_LEDGER.to_string(), ledger_csv));

    let mut hol = Table::new(&["country", "label", "start", "end", "window_mean_t", "month_mean_t", "change_pct"]);
    for (c, e) in &est.holiday_effects {
        hol.rows.push(vec![
            c.to_string(),
            e.label.clone(),
            e.start.to_string(),
            e.end.to_string(),
            fmt6(e.window_mean),
            fmt6(e.month_mean),
            fmt6(100.0 * e.change),
        ]);
    }
    out.push((HOLIDAYS.to_string(), hol.to_csv()?));

    let mut sig = Table::new(&["parameter", "value"]);
    if let Some(f) = &est.sigmoid {
        for (k, v) in [
            ("a", fmt6(f.params.a)),
            ("b", fmt6(f.params.b)),
            ("c", fmt6(f.params.c)),
            ("d", fmt6(f.params.d)),
            ("r_squared", fmt6(f.r_squared)),
            ("residual_sd", fmt6(f.residual_sd)),
            ("n", f.n.to_string()),
            ("iterations", f.iterations.to_string()),
        ] {
            sig.rows.push(vec![k.to_string(), v]);
        }
    }
    out.push((SIGMOID_FIT.to_string(), sig.to_csv()?));

    let mut nox = Table::new(&["country", "start", "end", "sector", "change_pct", "share"]);
    if let Some(n) = &est.nox {
        let names = ["Power", "GroundTransport", "Industry"];
        for ((name, change), share) in names.iter().zip(&n.changes).zip(&n.shares) {
            nox.rows.push(vec![
                n.country.to_string(),
                n.start.to_string(),
                n.end.to_string(),
                name.to_string(),
                fmt6(100.0 * change),
                fmt6(*share),
            ]);
        }
        nox.rows.push(vec![
            n.country.to_string(),
            n.start.to_string(),
            n.end.to_string(),
            "weighted_mean".to_string(),
            fmt6(100.0 * n.weighted),
            fmt6(n.shares.iter().sum()),
        ]);
    }
    out.push((NOX.to_string(), nox.to_csv()?));

    let mut clean = Table::new(&[
        "country",
        "year",
        "date",
        "category",
        "duplicates_averaged",
        "anomalies_replaced",
        "missing_preserved",
        "not_a_number",
        "omitted",
    ]);
    for r in &est.clean_report {
        let e = &r.entry;
        if e.duplicates_averaged + e.cleaning.anomalies_replaced + e.cleaning.missing_preserved + e.cleaning.not_a_number
            == 0
            && !e.omitted
        {
            continue;
        }
        clean.rows.push(vec![
            r.country.to_string(),
            r.year.to_string(),
            e.date.to_string(),
            e.category.clone(),
            e.duplicates_averaged.to_string(),
            e.cleaning.anomalies_replaced.to_string(),
            e.cleaning.missing_preserved.to_string(),
            e.cleaning.not_a_number.to_string(),
            e.omitted.to_string(),
        ]);
    }
    out.push((CLEAN_REPORT.to_string(), clean.to_csv()?));

    if !est.gas.is_empty() {
        let mut gas = Table::new(&["country", "emission_change_pct", "gas_change_pct"]);
        for g in &est.gas {
            gas.rows.push(vec![g.country.to_string(), fmt6(100.0 * g.emission_change), fmt6(100.0 * g.gas_change)]);
        }
        out.push((GAS_CHECK.to_string(), gas.to_csv()?));
    }
    Ok(out)
}

fn mt(tonnes: f64) -> String {
    fmt6(tonnes / TONNES_PER_MT)
}

/// One row per pair and 2020 day. February 29 has no 2019 value or diff.
pub fn daily_csv(pairs: &[SeriesPair], start: chrono::NaiveDate, end: chrono::NaiveDate) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DAILY_HEADER)?;
    for p in pairs {
        for d in date_range(start, end) {
            let Some(v20) = p.s2020.get(d) else { continue };
            let v19 = align_dates(d).and_then(|r| p.s2019.get(r));
            w.write_record([
                d.to_string(),
                p.country().to_string(),
                p.sector().to_string(),
                v19.map(mt).unwrap_or_default(),
                mt(v20),
                v19.map(|a| mt(v20 - a)).unwrap_or_default(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Sector groups plotted in the daily figure.
const FIG1_GROUPS: [&str; 6] = ["Power", "GroundTransport", "Industry", "Residential", "Aviation", "InternationalShipping"];

/// Daily totals per sector group and overall over comparable days, with the
/// 7-day trailing mean of the difference.
pub fn fig1(pairs: &[SeriesPair], start: chrono::NaiveDate, end: chrono::NaiveDate) -> Result<Table> {
    let mut t = Table::new(&FIG1_HEADER);
    if pairs.is_empty() {
        return Ok(t);
    }
    let days: Vec<chrono::NaiveDate> = date_range(start, end).filter(|d| align_dates(*d).is_some()).collect();
    let mut groups: Vec<&str> = FIG1_GROUPS.to_vec();
    groups.push("Total");
    for g in groups {
        let members: Vec<&SeriesPair> = pairs
            .iter()
            .filter(|p| g == "Total" || ledger_item(p.sector()) == g)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut a = Vec::with_capacity(days.len());
        let mut b = Vec::with_capacity(days.len());
        for d in &days {
            let r = align_dates(*d).expect("comparable day");
            a.push(members.iter().map(|p| p.s2019.get(r).unwrap_or(0.0)).sum::<f64>());
            b.push(members.iter().map(|p| p.s2020.get(*d).unwrap_or(0.0)).sum::<f64>());
        }
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        let smooth = running_mean(&diff, 7);
        for i in 0..days.len() {
            t.rows.push(vec![
                days[i].to_string(),
                g.to_string(),
                mt(a[i]),
                mt(b[i]),
                mt(diff[i]),
                mt(smooth[i]),
            ]);
        }
    }
    Ok(t)
}

fn ledger_table(u: &super::estimate::UncertaintyReport) -> Result<Table> {
    let mut t = Table::new(&["item", "u_percent", "sigma_convention", "mu_mt_per_day"]);
    for e in &u.ledger.entries {
        let conv = match e.sigma_convention {
            crate::uncertainty::SigmaConvention::OneSigma => "1sigma",
            crate::uncertainty::SigmaConvention::TwoSigma => "2sigma",
        };
        t.rows.push(vec![
            e.item.clone(),
            fmt6(e.u_percent),
            conv.to_string(),
            e.mu_mt_per_day.map(fmt6).unwrap_or_default(),
        ]);
    }
    Ok(t)
}

/// Output files that take part in the byte-identity contract.
pub fn deterministic_outputs(dir: &Path) -> Result<Vec<String>> {
    Ok(list_files(dir)?.into_iter().filter(|n| n != MANIFEST).collect())
}
