mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carbon-pulse"))
        .args(args)
        .env_remove("CARBON_PULSE_FIXTURES")
        .output()
        .expect("spawn carbon-pulse")
}

fn snapshot() -> PathBuf {
    common::crate_dir().join("fixtures/snapshot")
}

/// The bundled config rewritten with absolute paths plus `extra` TOML.
fn write_config(dir: &Path, window: (&str, &str), extra: &str) -> PathBuf {
    let text = format!(
        "fixture_dir = {:?}\noutput_dir = {:?}\nseed = 42\nmc_trials = 1000\n{extra}\n\
         [window]\nstart = \"{}\"\nend = \"{}\"\n",
        snapshot().display().to_string(),
        dir.join("out").display().to_string(),
        window.0,
        window.1,
    );
    let bundled = std::fs::read_to_string(common::crate_dir().join("fixtures/run.toml")).unwrap();
    let tables = &bundled[bundled.find("[aviation]").unwrap()..];
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{text}\n{tables}")).unwrap();
    path
}

fn copy_tree(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_tree(&e.path(), &target);
        } else {
            std::fs::copy(e.path(), target).unwrap();
        }
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn empty_window_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), ("2020-04-30", "2020-01-01"), "");
    let out = bin(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty window"));
}

#[test]
fn missing_config_is_a_data_error() {
    let out = bin(&["run", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(bin(&["run"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn all_sectors_off_writes_header_only_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let toggles = "[sectors]\npower = false\nground_transport = false\nindustry = false\n\
                   residential = false\naviation = false\nshipping = false\nuncertainty = false\n";
    let cfg = write_config(tmp.path(), ("2020-01-01", "2020-04-30"), toggles);
    let out = bin(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let daily = std::fs::read_to_string(tmp.path().join("out/daily_series.csv")).unwrap();
    assert_eq!(daily.lines().count(), 1, "{daily}");
    assert!(daily.starts_with("date,country,sector"));
}

#[test]
fn pristine_snapshot_validates() {
    let out = bin(&["validate", snapshot().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 violations"));
}

#[test]
fn negative_population_is_reported_with_its_row() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("snap");
    copy_tree(&snapshot(), &dir);
    let pop = dir.join("residential/population.csv");
    let text = std::fs::read_to_string(&pop).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<&str> = lines[3].split(',').collect();
    fields[3] = "-5";
    lines[3] = fields.join(",");
    std::fs::write(&pop, lines.join("\n") + "\n").unwrap();

    let out = bin(&["validate", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout(&out);
    let line = report
        .lines()
        .find(|l| l.contains("population.csv"))
        .unwrap_or_else(|| panic!("no population violation in:\n{report}"));
    // header is line 1, so the edited fourth line is reported as :4
    assert!(line.contains("residential/population.csv:4:"), "{line}");
    assert!(line.contains("population -5"), "{line}");
}

#[test]
fn production_weights_must_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("snap");
    copy_tree(&snapshot(), &dir);
    let prod = dir.join("industry/production.csv");
    let text = std::fs::read_to_string(&prod).unwrap();
    // the first data row is crude steel, the only steel product
    let edited = text.replacen("crude steel,2019-01,182.139157,1.000000000000", "crude steel,2019-01,182.139157,0.600000000000", 1);
    assert_ne!(edited, text);
    std::fs::write(&prod, edited).unwrap();

    let out = bin(&["validate", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("production.csv"), "{}", stdout(&out));
}

#[test]
fn report_styles() {
    let golden = common::crate_dir().join("fixtures/golden");
    let out = bin(&["report", "--style", "s2", golden.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Global") && text.contains("China"), "{text}");

    let bad = bin(&["report", "--style", "s9", golden.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown report style"));
}

#[test]
fn fixture_directory_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), ("2020-01-01", "2020-04-30"), "");
    let out = Command::new(env!("CARGO_BIN_EXE_carbon-pulse"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("CARBON_PULSE_FIXTURES", tmp.path().join("nowhere"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}
