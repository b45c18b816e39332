//! Anomaly cleaning of one day of sub-daily generation per category.
//!
//! Each column is screened with a modified median absolute deviation;
//! values further than three scaled MADs from the median are replaced by the
//! mean of the remaining values.

use std::f64::consts::SQRT_2;

use statrs::function::erf::erfc_inv;

use super::feed::Reading;
use crate::error::{Error, Result};

/// Slack subtracted from the 3·MAD threshold to absorb float noise.
pub const THRESHOLD_SLACK: f64 = 1e-6;

/// `-1 / (√2 · erfcinv(3/2))`, the factor that turns a MAD into a Gaussian σ.
pub fn mad_scale() -> f64 {
    -1.0 / (SQRT_2 * erfc_inv(1.5))
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Scaled median absolute deviation. NaN entries count as zero.
pub fn modified_mad(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("modified MAD of an empty vector"));
    }
    let a: Vec<f64> = values.iter().map(|v| if v.is_nan() { 0.0 } else { *v }).collect();
    let m = median(&a);
    let dev: Vec<f64> = a.iter().map(|v| (v - m).abs()).collect();
    Ok(mad_scale() * median(&dev))
}

/// What cleaning did to one column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnCleaning {
    pub anomalies_replaced: usize,
    pub missing_preserved: usize,
    pub not_a_number: usize,
    pub replacement_value: Option<f64>,
}

/// Cleans one column of a daily power matrix.
///
/// Missing slots are kept as they are and take no part in detection.
/// NotANumber slots enter detection as 0; when flagged they are replaced like
/// any other anomaly. A column whose MAD is zero is returned unchanged.
pub fn clean_column(column: &[Reading]) -> Result<(Vec<Reading>, ColumnCleaning)> {
    if column.is_empty() {
        return Err(Error::domain("cannot clean an empty column"));
    }
    let mut report = ColumnCleaning::default();
    let mut slots = Vec::with_capacity(column.len());
    let mut a = Vec::with_capacity(column.len());
    for (i, r) in column.iter().enumerate() {
        match r {
            Reading::Value(v) => {
                slots.push(i);
                a.push(*v);
            }
            Reading::NotANumber => {
                report.not_a_number += 1;
                slots.push(i);
                a.push(0.0);
            }
            Reading::Missing => report.missing_preserved += 1,
        }
    }
    let mut out = column.to_vec();
    if a.is_empty() {
        return Ok((out, report));
    }

    let mmad = modified_mad(&a)?;
    if mmad == 0.0 {
        return Ok((out, report));
    }
    let m = median(&a);
    let threshold = 3.0 * mmad - THRESHOLD_SLACK;
    let flagged: Vec<bool> = a.iter().map(|v| (v - m).abs() > threshold).collect();
    let kept = flagged.iter().filter(|f| !**f).count();
    if kept == a.len() {
        return Ok((out, report));
    }
    if kept == 0 {
        return Err(Error::Internal(
            "every element of a column was flagged as anomalous".into(),
        ));
    }
    let mut sum = 0.0;
    for (v, f) in a.iter().zip(&flagged) {
        if !f {
            sum += v;
        }
    }
    let replacement = sum / kept as f64;
    for (slot, f) in slots.iter().zip(&flagged) {
        if *f {
            out[*slot] = Reading::Value(replacement);
        }
    }
    report.anomalies_replaced = a.len() - kept;
    report.replacement_value = Some(replacement);
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn values(v: &[f64]) -> Vec<Reading> {
        v.iter().map(|x| Reading::Value(*x)).collect()
    }

    #[test]
    fn mad_of_small_vectors() {
        assert_abs_diff_eq!(modified_mad(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), 1.482602, epsilon = 1e-6);
        assert_eq!(modified_mad(&[7.0; 9]).unwrap(), 0.0);
        let a = [10.0, 11.0, 9.0, 10.0, 50.0, 10.0, 11.0, 9.0];
        assert_abs_diff_eq!(modified_mad(&a).unwrap(), 1.482602, epsilon = 1e-6);
        assert!(modified_mad(&[]).is_err());
    }

    #[test]
    fn spike_is_replaced_by_mean_of_rest() {
        let (out, rep) = clean_column(&values(&[10.0, 11.0, 9.0, 10.0, 50.0, 10.0, 11.0, 9.0])).unwrap();
        assert_eq!(rep.anomalies_replaced, 1);
        assert_eq!(out[4], Reading::Value(10.0));
        assert_eq!(out[0], Reading::Value(10.0));
        assert_eq!(out[1], Reading::Value(11.0));
    }

    #[test]
    fn constant_and_tame_columns_untouched() {
        let c = values(&[5.0; 4]);
        let (out, rep) = clean_column(&c).unwrap();
        assert_eq!(out, c);
        assert_eq!(rep.anomalies_replaced, 0);

        let c = values(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(clean_column(&c).unwrap().0, c);
    }

    #[test]
    fn missing_preserved_and_nan_replaced() {
        let mut c = values(&[100.0, 101.0, 99.0, 100.0, 102.0, 98.0, 100.0, 101.0]);
        c[2] = Reading::NotANumber;
        c[5] = Reading::Missing;
        let (out, rep) = clean_column(&c).unwrap();
        assert_eq!(out[5], Reading::Missing);
        assert_eq!(rep.missing_preserved, 1);
        assert_eq!(rep.anomalies_replaced, 1);
        let mean = (100.0 + 101.0 + 100.0 + 102.0 + 100.0 + 101.0) / 6.0;
        assert_eq!(out[2], Reading::Value(mean));
    }

    #[test]
    fn all_missing_column_passes_through() {
        let c = vec![Reading::Missing; 24];
        let (out, rep) = clean_column(&c).unwrap();
        assert_eq!(out, c);
        assert_eq!(rep.missing_preserved, 24);
    }
}
