mod common;

use std::collections::BTreeMap;

use carbon_pulse::pipeline::run;

fn run_snapshot() -> (tempfile::TempDir, BTreeMap<String, Vec<u8>>) {
    let dir = tempfile::tempdir().unwrap();
    run(&common::snapshot_config(dir.path())).unwrap();
    let out = common::read_outputs(dir.path());
    (dir, out)
}

#[test]
fn snapshot_matches_golden_outputs() {
    let (_dir, out) = run_snapshot();
    let golden = common::read_outputs(&common::crate_dir().join("fixtures/golden"));
    assert_eq!(out.keys().collect::<Vec<_>>(), golden.keys().collect::<Vec<_>>());
    for (name, bytes) in &golden {
        assert!(out[name] == *bytes, "{name} differs from the golden copy");
    }
}

#[test]
fn manifest_lists_every_output() {
    let (dir, out) = run_snapshot();
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    let text = manifest.to_string();
    for name in out.keys() {
        assert!(text.contains(name.as_str()), "manifest omits {name}");
    }
}

fn table_rows(bytes: &[u8]) -> BTreeMap<String, Vec<String>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r.iter().skip(1).map(str::to_string).collect())
        })
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

/// Totals summed straight from the daily CSV, independently of the library.
#[derive(Default)]
struct Sums {
    cells: BTreeMap<(String, String), (f64, f64)>,
}

impl Sums {
    fn add(&mut self, row: &str, sector: &str, a: f64, b: f64) {
        let e = self.cells.entry((row.to_string(), sector.to_string())).or_insert((0.0, 0.0));
        e.0 += a;
        e.1 += b;
    }

    fn total(&self, pred: impl Fn(&str, &str) -> bool) -> (f64, f64) {
        self.cells
            .iter()
            .filter(|((r, s), _)| pred(r, s))
            .fold((0.0, 0.0), |acc, (_, v)| (acc.0 + v.0, acc.1 + v.1))
    }
}

fn rederive(daily: &[u8]) -> Sums {
    let labels: BTreeMap<&str, &str> = [
        ("China", "China"),
        ("India", "India"),
        ("US", "US"),
        ("EU27UK", "Europe (EU27 & UK)"),
        ("Russia", "Russia"),
        ("Japan", "Japan"),
        ("Brazil", "Brazil"),
    ]
    .into_iter()
    .collect();
    let registry = std::fs::read_to_string(common::crate_dir().join("data/countries.csv")).unwrap();
    let region: BTreeMap<String, String> = registry
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), labels[f[1]].to_string())
        })
        .collect();
    let mut sums = Sums::default();
    let mut rdr = csv::Reader::from_reader(daily);
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if rec[3].is_empty() {
            continue; // no counterpart day
        }
        let sector = &rec[2];
        let row = if sector.starts_with("International") {
            sector.to_string()
        } else {
            region.get(&rec[1]).cloned().unwrap_or_else(|| "ROW".to_string())
        };
        sums.add(&row, sector, num(&rec[3]), num(&rec[4]));
    }
    sums
}

#[test]
fn table_totals_rederive_from_daily_series() {
    let (_dir, out) = run_snapshot();
    let sums = rederive(&out["daily_series.csv"]);
    let s2 = table_rows(&out["table_s2.csv"]);
    let columns = ["Power", "GroundTransport", "Industry", "Residential", "DomesticAviation"];
    let close = |x: f64, y: f64, what: &str| assert!((x - y).abs() <= 1e-6, "{what}: {x} vs {y}");

    let regions = ["China", "India", "US", "Europe (EU27 & UK)", "Russia", "Japan", "Brazil", "ROW"];
    for r in regions {
        for (i, s) in columns.iter().enumerate() {
            let (a, b) = sums.total(|row, sec| row == r && sec == *s);
            close(num(&s2[r][i]), b - a, &format!("{r}/{s}"));
        }
        let (a, b) = sums.total(|row, sec| row == r && columns.contains(&sec));
        close(num(&s2[r][5]), b - a, &format!("{r} sum"));
        close(num(&s2[r][6]), 100.0 * (b / a - 1.0), &format!("{r} growth"));
    }
    let national = sums.total(|row, _| !row.starts_with("International"));
    close(num(&s2["Sum"][5]), national.1 - national.0, "national sum");

    let aviation = sums.total(|row, _| row == "InternationalAviation");
    close(num(&s2["International aviation"][5]), aviation.1 - aviation.0, "international aviation");
    let shipping = sums.total(|row, _| row == "InternationalShipping");
    close(num(&s2["International shipping"][5]), shipping.1 - shipping.0, "international shipping");
    let global = sums.total(|_, _| true);
    close(num(&s2["Global"][5]), global.1 - global.0, "global");
    close(num(&s2["Global"][6]), 100.0 * (global.1 / global.0 - 1.0), "global growth");

    let s3 = table_rows(&out["table_s3.csv"]);
    let power = sums.total(|row, sec| !row.starts_with("International") && sec == "Power");
    close(num(&s3["World"][4]), 100.0 * (power.1 / power.0 - 1.0), "world power window");
}
