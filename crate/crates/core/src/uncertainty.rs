//! Error propagation for sums and products, the per-item uncertainty ledger,
//! and seeded Monte Carlo intervals.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaConvention {
    #[serde(rename = "1sigma")]
    OneSigma,
    #[serde(rename = "2sigma")]
    TwoSigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub item: String,
    pub u_percent: f64,
    pub sigma_convention: SigmaConvention,
    /// Mean daily emission, Mt/day; empty for multiplicative items.
    pub mu_mt_per_day: Option<f64>,
}

pub const PROJECTION_ITEM: &str = "projection";
pub const EDGAR_ITEM: &str = "edgar2018";

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyLedger {
    pub entries: Vec<LedgerEntry>,
}

impl UncertaintyLedger {
    /// Per-item percentages; sector means are filled in by the caller.
    pub fn defaults() -> Self {
        let sector = |item: &str, u: f64| LedgerEntry {
            item: item.into(),
            u_percent: u,
            sigma_convention: SigmaConvention::TwoSigma,
            mu_mt_per_day: Some(0.0),
        };
        let factor = |item: &str, u: f64| LedgerEntry {
            item: item.into(),
            u_percent: u,
            sigma_convention: SigmaConvention::TwoSigma,
            mu_mt_per_day: None,
        };
        UncertaintyLedger {
            entries: vec![
                sector("Power", 1.5),
                sector("GroundTransport", 9.3),
                sector("Industry", 36.0),
                sector("Residential", 40.0),
                sector("Aviation", 10.2),
                sector("InternationalShipping", 13.0),
                factor(PROJECTION_ITEM, 0.8),
                factor(EDGAR_ITEM, 5.0),
            ],
        }
    }

    pub fn from_reader<R: std::io::Read>(reader: R, label: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        for (i, row) in r.deserialize::<LedgerEntry>().enumerate() {
            let e = row.map_err(|e| Error::parse(label, i + 2, e.to_string()))?;
            if !(e.u_percent.is_finite() && e.u_percent >= 0.0) {
                return Err(Error::parse(label, i + 2, format!("{}: U must be ≥ 0", e.item)));
            }
            entries.push(e);
        }
        Ok(UncertaintyLedger { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|_| Error::MissingFixture(path.to_path_buf()))?;
        Self::from_reader(f, &path.display().to_string())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn get(&self, item: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.item == item)
    }

    pub fn set_mu(&mut self, item: &str, mu: f64) -> Result<()> {
        let e = self
            .entries
            .iter_mut()
            .find(|e| e.item == item)
            .ok_or_else(|| Error::config(format!("uncertainty ledger has no item {item}")))?;
        e.mu_mt_per_day = Some(mu);
        Ok(())
    }

    /// Items with a mean, combined as a sum.
    pub fn sector_terms(&self) -> (Vec<f64>, Vec<f64>) {
        self.entries
            .iter()
            .filter_map(|e| e.mu_mt_per_day.map(|m| (e.u_percent, m)))
            .unzip()
    }

    /// Sector sum combined with the multiplicative items.
    pub fn overall(&self) -> Result<f64> {
        let (u, mu) = self.sector_terms();
        let mut parts = vec![combine_sum(&u, &mu)?];
        parts.extend(self.entries.iter().filter(|e| e.mu_mt_per_day.is_none()).map(|e| e.u_percent));
        combine_mult(&parts)
    }
}

/// √Σ(Uₛ·μₛ)² / |Σμₛ|.
pub fn combine_sum(u: &[f64], mu: &[f64]) -> Result<f64> {
    if u.len() != mu.len() || u.is_empty() {
        return Err(Error::domain("uncertainties and means must be nonempty and of equal length"));
    }
    let total: f64 = mu.iter().sum();
    if total == 0.0 {
        return Err(Error::domain("means sum to zero"));
    }
    let sq: f64 = u.iter().zip(mu).map(|(u, m)| (u * m).powi(2)).sum();
    Ok(sq.sqrt() / total.abs())
}

/// √ΣUᵢ².
pub fn combine_mult(u: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::domain("no uncertainties to combine"));
    }
    Ok(u.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Gaussian input, optionally truncated from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputDist {
    pub mean: f64,
    pub sd: f64,
    pub lower: Option<f64>,
}

impl InputDist {
    pub fn normal(mean: f64, sd: f64) -> Self {
        InputDist { mean, sd, lower: None }
    }

    pub fn nonnegative(mean: f64, sd: f64) -> Self {
        InputDist {
            mean,
            sd,
            lower: Some(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    /// Median of the trial outputs.
    pub point: f64,
    /// Model evaluated at the input means.
    pub nominal: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_trials: usize,
    pub rejected: usize,
    pub seed: u64,
}

const MAX_REDRAWS: usize = 100;

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// 68% interval from `n` trials. Trial `i` draws from its own stream of the
/// seeded generator, so results do not depend on the thread count.
pub fn monte_carlo_ci<F>(model: F, inputs: &[InputDist], n: usize, seed: u64) -> Result<CiResult>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    if n < 1000 {
        return Err(Error::config(format!("Monte Carlo needs at least 1000 trials, got {n}")));
    }
    let dists: Vec<Normal<f64>> = inputs
        .iter()
        .map(|d| Normal::new(d.mean, d.sd).map_err(|e| Error::domain(format!("input {d:?}: {e}"))))
        .collect::<Result<_>>()?;
    let draws: Vec<Option<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut x = Vec::with_capacity(inputs.len());
            for (dist, spec) in dists.iter().zip(inputs) {
                let mut v = dist.sample(&mut rng);
                if let Some(lo) = spec.lower {
                    let mut tries = 0;
                    while v < lo {
                        tries += 1;
                        if tries > MAX_REDRAWS {
                            return None;
                        }
                        v = dist.sample(&mut rng);
                    }
                }
                x.push(v);
            }
            model(&x).filter(|y| y.is_finite())
        })
        .collect();
    let mut ys: Vec<f64> = draws.iter().flatten().copied().collect();
    let rejected = n - ys.len();
    if rejected > 0 {
        log::warn!("Monte Carlo rejected {rejected} of {n} trials");
    }
    if rejected * 100 > n {
        return Err(Error::domain(format!("{rejected} of {n} Monte Carlo trials failed")));
    }
    ys.sort_by(f64::total_cmp);
    let means: Vec<f64> = inputs.iter().map(|d| d.mean).collect();
    let nominal = model(&means).unwrap_or(f64::NAN);
    Ok(CiResult {
        point: percentile(&ys, 0.5),
        nominal,
        lower: percentile(&ys, 0.16),
        upper: percentile(&ys, 0.84),
        n_trials: n,
        rejected,
        seed,
    })
}
