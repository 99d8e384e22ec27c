use std::fmt::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::stats::normal_cdf;

pub const MAX_ASSIGNMENTS: f64 = 1e7;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("enumeration needs {0} assignments, above the limit of 1e7")]
    TooLarge(f64),
    #[error("invalid mixture: {0}")]
    InvalidSpec(String),
}

/// Mixture with Normal(μ0, σ0) priors on the cluster means, fixed weights
/// `p0` and a known observation stddev per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmSpec {
    pub k: usize,
    pub mu0: f64,
    pub sigma0: f64,
    pub sigma_obs: Vec<f64>,
    pub p0: Vec<f64>,
    pub data: Vec<f64>,
}

impl Default for GmmSpec {
    /// Two clusters, μ0 = 0, σ0 = 2, unit noise, equal weights, ten points.
    fn default() -> Self {
        GmmSpec {
            k: 2,
            mu0: 0.0,
            sigma0: 2.0,
            sigma_obs: vec![1.0, 1.0],
            p0: vec![0.5, 0.5],
            data: vec![-2.0, -2.5, -1.7, -1.9, -2.2, 1.5, 2.2, 3.0, 1.2, 2.8],
        }
    }
}

impl GmmSpec {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::InvalidSpec(m.to_string()));
        if self.k == 0 {
            return bad("need at least one cluster");
        }
        if self.sigma_obs.len() != self.k || self.p0.len() != self.k {
            return bad("sigma_obs and p0 need one entry per cluster");
        }
        if !(self.sigma0 > 0.0) || self.sigma_obs.iter().any(|s| !(*s > 0.0)) {
            return bad("standard deviations must be positive");
        }
        if self.p0.iter().any(|p| !(*p > 0.0)) || (self.p0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("weights must be positive and sum to one");
        }
        Ok(())
    }
}

/// Exact posterior as a mixture over assignments. Weights are normalized and
/// kept in log space; each assignment carries the conjugate Normal posterior
/// of every cluster mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPosterior {
    pub k: usize,
    pub p0: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// `means[a * k + j]` is the posterior mean of cluster `j` under
    /// assignment `a`; `variances` likewise.
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Sum in a canonical order so results do not depend on enumeration order.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

fn log_sum_exp_sorted(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + sorted_sum(v.iter().map(|x| (x - m).exp()).collect()).ln()
}

/// E[max] of independent normals.
fn expected_max(means: &[f64], vars: &[f64]) -> f64 {
    match means.len() {
        1 => means[0],
        2 => {
            let theta = (vars[0] + vars[1]).sqrt();
            let a = (means[0] - means[1]) / theta;
            let pdf = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
            means[0] * normal_cdf(a) + means[1] * normal_cdf(-a) + theta * pdf
        }
        _ => {
            // E[M] = lo + ∫_lo^hi (1 - Π F_k) with lo, hi 12 sd outside.
            let sd: Vec<f64> = vars.iter().map(|v| v.sqrt()).collect();
            let lo = (0..means.len())
                .map(|i| means[i] - 12.0 * sd[i])
                .fold(f64::INFINITY, f64::min);
            let hi = (0..means.len())
                .map(|i| means[i] + 12.0 * sd[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let n = 4000;
            let h = (hi - lo) / n as f64;
            let g = |x: f64| {
                let mut fs: Vec<f64> = (0..means.len())
                    .map(|i| normal_cdf((x - means[i]) / sd[i]))
                    .collect();
                fs.sort_by(f64::total_cmp);
                1.0 - fs.into_iter().product::<f64>()
            };
            let mut s = g(lo) + g(hi);
            for i in 1..n {
                s += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            lo + s * h / 3.0
        }
    }
}

impl ExactPosterior {
    pub fn num_assignments(&self) -> usize {
        self.log_weights.len()
    }

    fn mix(&self, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        let k = self.k;
        sorted_sum(
            (0..self.num_assignments())
                .map(|a| {
                    let r = a * k..(a + 1) * k;
                    self.log_weights[a].exp() * f(&self.means[r.clone()], &self.variances[r])
                })
                .collect(),
        )
    }

    pub fn mean_of(&self, cluster: usize) -> f64 {
        self.mix(|m, _| m[cluster])
    }

    pub fn expected_max(&self) -> f64 {
        self.mix(expected_max)
    }

    pub fn expected_min(&self) -> f64 {
        self.mix(|m, v| -expected_max(&m.iter().map(|x| -x).collect::<Vec<_>>(), v))
    }

    /// Mean of the next observation.
    pub fn predictive_mean(&self) -> f64 {
        sorted_sum((0..self.k).map(|j| self.p0[j] * self.mean_of(j)).collect())
    }

    pub fn weight_sum(&self) -> f64 {
        self.log_weights.iter().map(|w| w.exp()).sum()
    }
}

/// Log marginal likelihood of `ys` under one cluster with a Normal(μ0, σ0)
/// prior on its mean and noise σ.
fn cluster_log_marginal(ys: &[f64], mu0: f64, sigma0: f64, sigma: f64) -> f64 {
    let n = ys.len() as f64;
    if ys.is_empty() {
        return 0.0;
    }
    let s02 = sigma0 * sigma0;
    let s2 = sigma * sigma;
    let sa: f64 = ys.iter().map(|y| y - mu0).sum();
    let saa: f64 = ys.iter().map(|y| (y - mu0).powi(2)).sum();
    -0.5 * n * LN_2PI
        - n * sigma.ln()
        - 0.5 * (1.0 + n * s02 / s2).ln()
        - 0.5 / s2 * (saa - s02 * sa * sa / (s2 + n * s02))
}

pub fn gmm_exact(spec: &GmmSpec) -> Result<ExactPosterior, OracleError> {
    spec.validate()?;
    let k = spec.k;
    let n = spec.data.len();
    let count = (k as f64).powi(n as i32);
    if count > MAX_ASSIGNMENTS {
        return Err(OracleError::TooLarge(count));
    }
    let count = count as usize;
    let log_p0: Vec<f64> = spec.p0.iter().map(|p| p.ln()).collect();

    let rows: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..count)
        .into_par_iter()
        .map(|a| {
            let mut z = Vec::with_capacity(n);
            let mut r = a;
            for _ in 0..n {
                z.push(r % k);
                r /= k;
            }
            let mut lw: f64 = z.iter().map(|&j| log_p0[j]).sum();
            let mut marg = Vec::with_capacity(k);
            let mut means = Vec::with_capacity(k);
            let mut vars = Vec::with_capacity(k);
            for j in 0..k {
                let ys: Vec<f64> = (0..n)
                    .filter(|&i| z[i] == j)
                    .map(|i| spec.data[i])
                    .collect();
                let s2 = spec.sigma_obs[j].powi(2);
                let prec = 1.0 / spec.sigma0.powi(2) + ys.len() as f64 / s2;
                let sum: f64 = ys.iter().sum();
                means.push((spec.mu0 / spec.sigma0.powi(2) + sum / s2) / prec);
                vars.push(1.0 / prec);
                marg.push(cluster_log_marginal(
                    &ys,
                    spec.mu0,
                    spec.sigma0,
                    spec.sigma_obs[j],
                ));
            }
            lw += sorted_sum(marg);
            (lw, means, vars)
        })
        .collect();

    let raw: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let norm = log_sum_exp_sorted(&raw);
    let mut post = ExactPosterior {
        k,
        p0: spec.p0.clone(),
        log_weights: raw.iter().map(|w| w - norm).collect(),
        means: Vec::with_capacity(count * k),
        variances: Vec::with_capacity(count * k),
    };
    for (_, m, v) in rows {
        post.means.extend(m);
        post.variances.extend(v);
    }
    Ok(post)
}

/// Program text for `spec`: the cluster means, then per data point a
/// uniform selector and a chain of `if`s picking the cluster by cumulative
/// weight.
pub fn gmm_source(spec: &GmmSpec) -> String {
    let mut s = String::new();
    let mut close = 0;
    for j in 0..spec.k {
        let _ = writeln!(
            s,
            "(let [mu{} (sample (normal {:?} {:?}))]",
            j + 1,
            spec.mu0,
            spec.sigma0
        );
        close += 1;
    }
    let mut cum = Vec::new();
    let mut acc = 0.0;
    for p in &spec.p0[..spec.k - 1] {
        acc += p;
        cum.push(acc);
    }
    for (i, y) in spec.data.iter().enumerate() {
        let u = format!("u{}", i + 1);
        let _ = writeln!(s, "(let [{u} (sample (uniform 0 1))]");
        let mut body = format!(
            "(observe (normal mu{} {:?}) {y:?})",
            spec.k,
            spec.sigma_obs[spec.k - 1]
        );
        for j in (0..spec.k - 1).rev() {
            body = format!(
                "(if (< {u} {:?}) (observe (normal mu{} {:?}) {y:?}) {body})",
                cum[j],
                j + 1,
                spec.sigma_obs[j]
            );
        }
        let _ = writeln!(s, "(let [_ {body}]");
        close += 2;
    }
    s.push('0');
    s.push_str(&")".repeat(close));
    s.push('\n');
    s
}
