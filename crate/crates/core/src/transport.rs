//! Ground transport: congestion to traffic through a sigmoid, then to
//! city and national emission changes.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::{reference_day, CountryCode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SigmoidParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let ok = [a, b, c, d].iter().all(|v| v.is_finite()) && a >= 0.0 && b > 0.0 && c > 0.0 && d > 0.0;
        if !ok {
            return Err(Error::domain(format!(
                "sigmoid parameters need a ≥ 0 and b, c, d > 0 (got {a}, {b}, {c}, {d})"
            )));
        }
        Ok(SigmoidParams { a, b, c, d })
    }
}

/// Saturating fraction X^c / (d^c + X^c), evaluated in log space.
fn saturation(x: f64, c: f64, d: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    1.0 / (1.0 + (c * (d.ln() - x.ln())).exp())
}

/// Q = a + b·X^c / (d^c + X^c).
pub fn sigmoid_eval(x: f64, p: &SigmoidParams) -> f64 {
    p.a + p.b * saturation(x, p.c, p.d)
}

/// Gradient of Q with respect to (a, ln b, ln c, ln d).
fn gradient(x: f64, a_lb_lc_ld: &Vector4<f64>) -> Vector4<f64> {
    let (b, c, d) = (a_lb_lc_ld[1].exp(), a_lb_lc_ld[2].exp(), a_lb_lc_ld[3].exp());
    let r = saturation(x, c, d);
    let w = r * (1.0 - r);
    let log_ratio = if x > 0.0 { (x / d).ln() } else { 0.0 };
    Vector4::new(1.0, b * r, b * c * w * log_ratio, -b * c * w)
}

fn params_from(theta: &Vector4<f64>) -> SigmoidParams {
    SigmoidParams {
        a: theta[0],
        b: theta[1].exp(),
        c: theta[2].exp(),
        d: theta[3].exp(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidFit {
    pub params: SigmoidParams,
    pub r_squared: f64,
    pub residual_sd: f64,
    pub n: usize,
    pub iterations: usize,
    /// Covariance of (a, ln b, ln c, ln d).
    pub covariance: Matrix4<f64>,
}

impl SigmoidFit {
    /// Prediction interval for a new observation at `x`.
    pub fn prediction_interval(&self, x: f64, level: f64) -> Result<(f64, f64)> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!("confidence level {level} must lie in (0, 1)")));
        }
        let p = &self.params;
        let theta = Vector4::new(p.a, p.b.ln(), p.c.ln(), p.d.ln());
        let g = gradient(x, &theta);
        let var = self.residual_sd.powi(2) + (g.transpose() * self.covariance * g)[0];
        let dof = (self.n - 4) as f64;
        let t = StudentsT::new(0.0, 1.0, dof)
            .map_err(|e| Error::Internal(e.to_string()))?
            .inverse_cdf(0.5 + level / 2.0);
        let q = sigmoid_eval(x, p);
        let half = t * var.sqrt();
        Ok((q - half, q + half))
    }
}

const MAX_ITER: usize = 500;

/// Least-squares fit by damped Gauss–Newton (Levenberg–Marquardt) on
/// (a, ln b, ln c, ln d).
pub fn fit_sigmoid(pairs: &[(f64, f64)]) -> Result<SigmoidFit> {
    let n = pairs.len();
    if n < 8 {
        return Err(Error::Fit(format!("need at least 8 observations, got {n}")));
    }
    if pairs.iter().any(|(x, q)| !x.is_finite() || !q.is_finite() || *x < 0.0) {
        return Err(Error::Fit("observations must be finite with X ≥ 0".into()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let qs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(x_max > 0.0 && x_max >= 2.0 * x_min) {
        return Err(Error::Fit(format!(
            "congestion spans {x_min}..{x_max}, less than a factor of two"
        )));
    }
    let q_min = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let q_max = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(q_max > q_min) {
        return Err(Error::Fit("car counts are constant; the sigmoid is unidentifiable".into()));
    }
    let positive: Vec<f64> = xs.iter().copied().filter(|x| *x > 0.0).collect();
    let d0 = crate::ingestion::median(&positive);

    let sse_of = |theta: &Vector4<f64>| -> f64 {
        let p = params_from(theta);
        pairs.iter().map(|(x, q)| (q - sigmoid_eval(*x, &p)).powi(2)).sum()
    };
    let jacobian = |theta: &Vector4<f64>| -> (DMatrix<f64>, DVector<f64>) {
        let p = params_from(theta);
        let mut j = DMatrix::zeros(n, 4);
        let mut r = DVector::zeros(n);
        for (i, (x, q)) in pairs.iter().enumerate() {
            j.row_mut(i).copy_from(&gradient(*x, theta).transpose());
            r[i] = q - sigmoid_eval(*x, &p);
        }
        (j, r)
    };

    let mut theta = Vector4::new(q_min, (q_max - q_min).ln(), 2f64.ln(), d0.ln());
    let mut sse = sse_of(&theta);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let (j, r) = jacobian(&theta);
        let jtj: Matrix4<f64> = (j.transpose() * &j).fixed_view::<4, 4>(0, 0).into_owned();
        let jtr: Vector4<f64> = (j.transpose() * &r).fixed_rows::<4>(0).into_owned();
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let candidate = theta + step;
            let cand_sse = sse_of(&candidate);
            if cand_sse.is_finite() && cand_sse <= sse {
                let rel_drop = (sse - cand_sse) / sse.max(f64::MIN_POSITIVE);
                let small_step = step.norm() <= 1e-12 * (1.0 + theta.norm());
                theta = candidate;
                sse = cand_sse;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if rel_drop < 1e-14 || small_step || sse == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: already at a stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence after {MAX_ITER} iterations (SSE {sse:.6e}, λ {lambda:.1e})"
        )));
    }
    let params = params_from(&theta);
    if params.a < 0.0 {
        return Err(Error::Fit(format!("fitted floor a = {} is negative", params.a)));
    }
    let mean_q = qs.iter().sum::<f64>() / n as f64;
    let sst: f64 = qs.iter().map(|q| (q - mean_q).powi(2)).sum();
    let dof = (n - 4) as f64;
    let s2 = sse / dof;
    let (j, _) = jacobian(&theta);
    let jtj: Matrix4<f64> = (j.transpose() * &j).fixed_view::<4, 4>(0, 0).into_owned();
    let covariance = jtj
        .try_inverse()
        .map(|inv| inv * s2)
        .ok_or_else(|| Error::Fit("singular information matrix at the optimum".into()))?;
    Ok(SigmoidFit {
        params,
        r_squared: 1.0 - sse / sst,
        residual_sd: s2.sqrt(),
        n,
        iterations,
        covariance,
    })
}

/// Daily mean congestion (percent extra travel time) of one city.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionSeries {
    pub city: String,
    pub country: CountryCode,
    pub daily: BTreeMap<NaiveDate, f64>,
}

impl CongestionSeries {
    /// Averages sub-daily samples into daily means.
    pub fn from_samples(
        city: &str,
        country: CountryCode,
        samples: impl IntoIterator<Item = (NaiveDate, f64)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
        for (day, x) in samples {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::domain(format!("{city} {day}: congestion {x} must be ≥ 0")));
            }
            let e = acc.entry(day).or_insert((0.0, 0));
            e.0 += x;
            e.1 += 1;
        }
        Ok(CongestionSeries {
            city: city.to_string(),
            country,
            daily: acc.into_iter().map(|(d, (s, k))| (d, s / k as f64)).collect(),
        })
    }
}

/// Daily relative change of emissions for one city, keyed by 2020 date.
#[derive(Debug, Clone, PartialEq)]
pub struct CityChange {
    pub city: String,
    pub country: CountryCode,
    pub daily: BTreeMap<NaiveDate, f64>,
}

pub fn city_emission_change(
    x2020: &CongestionSeries,
    x2019: &CongestionSeries,
    p: &SigmoidParams,
) -> Result<CityChange> {
    let mut daily = BTreeMap::new();
    for (day, x) in &x2020.daily {
        let r = reference_day(*day);
        let x_prev = x2019.daily.get(&r).ok_or_else(|| {
            Error::domain(format!("{}: no 2019 congestion for {r}", x2019.city))
        })?;
        let q_prev = sigmoid_eval(*x_prev, p);
        if q_prev <= 0.0 {
            return Err(Error::domain(format!(
                "{}: zero traffic on {r}; the sigmoid floor a must be positive",
                x2019.city
            )));
        }
        daily.insert(*day, sigmoid_eval(*x, p) / q_prev - 1.0);
    }
    Ok(CityChange {
        city: x2020.city.clone(),
        country: x2020.country,
        daily,
    })
}

/// EDGAR road-transport mass attributed to a city (Mt CO₂).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityWeight {
    pub city: String,
    pub country: CountryCode,
    pub weight: f64,
}

/// Weighted mean of daily series; each day uses the members present that day.
fn weighted_mean(members: &[(f64, &BTreeMap<NaiveDate, f64>)]) -> BTreeMap<NaiveDate, f64> {
    let mut acc: BTreeMap<NaiveDate, (f64, f64)> = BTreeMap::new();
    for (w, series) in members {
        for (day, v) in *series {
            let e = acc.entry(*day).or_insert((0.0, 0.0));
            e.0 += w * v;
            e.1 += w;
        }
    }
    acc.into_iter().map(|(d, (s, w))| (d, s / w)).collect()
}

/// City changes weighted by city emissions into a national daily change.
pub fn aggregate_national(
    city_changes: &[CityChange],
    weights: &[CityWeight],
) -> Result<BTreeMap<NaiveDate, f64>> {
    let mut members = Vec::new();
    for change in city_changes {
        let w = weights
            .iter()
            .find(|w| w.city == change.city && w.country == change.country)
            .map(|w| w.weight)
            .ok_or_else(|| Error::config(format!("no emission weight for city {}", change.city)))?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::domain(format!("{}: weight {w} must be ≥ 0", change.city)));
        }
        if w > 0.0 {
            members.push((w, &change.daily));
        }
    }
    if members.is_empty() {
        return Err(Error::domain("no city with a positive emission weight"));
    }
    Ok(weighted_mean(&members))
}

/// Emission-weighted mean change of a peer group, for countries without
/// congestion data.
pub fn fallback_country_change(
    peers: &[(f64, &BTreeMap<NaiveDate, f64>)],
) -> Result<BTreeMap<NaiveDate, f64>> {
    let members: Vec<_> = peers.iter().filter(|(w, _)| *w > 0.0).copied().collect();
    if members.is_empty() {
        return Err(Error::config("fallback peer group is empty"));
    }
    Ok(weighted_mean(&members))
}
