//! Terminal rendering of run outputs.

use std::path::Path;
use std::str::FromStr;

use crate::assembly::Table;
use crate::error::{Error, Result};

use super::run::{FIG1, TABLE_S2, TABLE_S3, TABLE_S4, TABLE_S6};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    S2,
    S3,
    S4,
    S6,
    Fig1,
}

impl ReportStyle {
    pub const ALL: [ReportStyle; 5] = [ReportStyle::S2, ReportStyle::S3, ReportStyle::S4, ReportStyle::S6, ReportStyle::Fig1];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReportStyle::S2 => "s2",
            ReportStyle::S3 => "s3",
            ReportStyle::S4 => "s4",
            ReportStyle::S6 => "s6",
            ReportStyle::Fig1 => "fig1",
        }
    }

    pub fn file(&self) -> &'static str {
        match self {
            ReportStyle::S2 => TABLE_S2,
            ReportStyle::S3 => TABLE_S3,
            ReportStyle::S4 => TABLE_S4,
            ReportStyle::S6 => TABLE_S6,
            ReportStyle::Fig1 => FIG1,
        }
    }
}

impl FromStr for ReportStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportStyle::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown report style {s:?}; expected s2, s3, s4, s6 or fig1")))
    }
}

pub fn load_table(results_dir: &Path, style: ReportStyle) -> Result<Table> {
    let path = results_dir.join(style.file());
    let text = std::fs::read_to_string(&path).map_err(|_| Error::MissingFixture(path.clone()))?;
    Table::from_csv(&text)
}

pub fn report(results_dir: &Path, style: ReportStyle) -> Result<String> {
    Ok(load_table(results_dir, style)?.render())
}
