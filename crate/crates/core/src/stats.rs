//! Monte Carlo moments against the fBm targets, and grid-refinement studies.

use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::grid::{bernoulli_stream, make_grid, GridSpec};
use crate::hurst::{HurstIndex, Regime};
use crate::oracle::fbm_covariance;
use crate::parallel::with_workers;
use crate::walk::{lemma2_variance_bounds, lemma3_for_signs, PathSample, WeightTable};
use rayon::prelude::*;

/// Acceptance band in standard errors.
pub const Z_BAND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Mean,
    Variance,
    Covariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub estimator: Estimator,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub target: f64,
    /// `(value - target) / std_error`; absent when the standard error is zero.
    pub z_score: Option<f64>,
    /// Every sample equal, so the estimate carries no spread information.
    pub degenerate: bool,
}

impl MomentReport {
    fn new(estimator: Estimator, value: f64, std_error: f64, n: usize, target: f64) -> Self {
        let degenerate = !(std_error > 0.0);
        Self {
            estimator,
            value,
            std_error,
            n_samples: n,
            target,
            z_score: (!degenerate).then(|| (value - target) / std_error),
            degenerate,
        }
    }

    pub fn within(&self, band: f64) -> bool {
        self.z_score.is_some_and(|z| z.abs() <= band)
    }
}

fn common_grid(paths: &[PathSample]) -> Result<GridSpec> {
    if paths.len() < 2 {
        return Err(FbmError::TooFewSamples {
            needed: 2,
            got: paths.len(),
        });
    }
    let grid = paths[0].grid;
    let same = |g: &GridSpec| {
        g.n_per_unit() == grid.n_per_unit() && g.horizon_steps() == grid.horizon_steps()
    };
    if paths.iter().any(|p| !same(&p.grid)) {
        return Err(FbmError::MismatchedGrids);
    }
    Ok(grid)
}

fn column(paths: &[PathSample], grid: &GridSpec, t: f64, scale: f64) -> Result<Vec<f64>> {
    let step = grid.step_of(t)?;
    if step < 0 || step > grid.end_step() {
        return Err(FbmError::OffGrid(t));
    }
    paths.iter().map(|p| Ok(scale * p.at_step(step)?)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample covariance, two-pass.
fn sample_covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() - 1) as f64
}

/// Sample variance of `scale * X(t)` against `t^(2H)`.
pub fn estimate_variance(
    paths: &[PathSample],
    t: f64,
    scale: f64,
    hurst: HurstIndex,
) -> Result<MomentReport> {
    let grid = common_grid(paths)?;
    let x = column(paths, &grid, t, scale)?;
    let n = x.len();
    let var = sample_covariance(&x, &x);
    let se = var * (2.0 / (n - 1) as f64).sqrt();
    Ok(MomentReport::new(
        Estimator::Variance,
        var,
        se,
        n,
        fbm_covariance(hurst, t, t)?,
    ))
}

/// Sample mean of `scale * X(t)` against zero.
pub fn estimate_mean(paths: &[PathSample], t: f64, scale: f64) -> Result<MomentReport> {
    let grid = common_grid(paths)?;
    let x = column(paths, &grid, t, scale)?;
    let n = x.len();
    let se = (sample_covariance(&x, &x) / n as f64).sqrt();
    Ok(MomentReport::new(Estimator::Mean, mean(&x), se, n, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEntry {
    pub s: f64,
    pub t: f64,
    pub report: MomentReport,
}

/// Empirical covariance at the probe times against the fBm covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceComparison {
    pub probe_times: Vec<f64>,
    /// Upper triangle including the diagonal, row by row.
    pub entries: Vec<CovarianceEntry>,
    pub max_abs_gap: f64,
    pub max_abs_z: f64,
}

impl CovarianceComparison {
    pub fn within(&self, band: f64) -> bool {
        self.entries.iter().all(|e| e.report.within(band))
    }
}

/// Entry standard errors use the Gaussian approximation
/// `Var(S_st) = (S_ss S_tt + S_st^2) / (n - 1)`.
pub fn compare_covariance(
    paths: &[PathSample],
    probe_times: &[f64],
    scale: f64,
    hurst: HurstIndex,
) -> Result<CovarianceComparison> {
    let grid = common_grid(paths)?;
    if probe_times.is_empty() {
        return Err(FbmError::InvalidArgument("no probe times".into()));
    }
    let columns = probe_times
        .iter()
        .map(|&t| column(paths, &grid, t, scale))
        .collect::<Result<Vec<_>>>()?;
    let n = paths.len();
    let variances: Vec<f64> = columns.iter().map(|c| sample_covariance(c, c)).collect();
    let mut entries = Vec::new();
    for i in 0..probe_times.len() {
        for j in i..probe_times.len() {
            let cov = if i == j {
                variances[i]
            } else {
                sample_covariance(&columns[i], &columns[j])
            };
            let se = ((variances[i] * variances[j] + cov * cov) / (n - 1) as f64).sqrt();
            let target = fbm_covariance(hurst, probe_times[i], probe_times[j])?;
            let estimator = if i == j {
                Estimator::Variance
            } else {
                Estimator::Covariance
            };
            entries.push(CovarianceEntry {
                s: probe_times[i],
                t: probe_times[j],
                report: MomentReport::new(estimator, cov, se, n, target),
            });
        }
    }
    let max_abs_gap = entries
        .iter()
        .map(|e| (e.report.value - e.report.target).abs())
        .fold(0.0, f64::max);
    let max_abs_z = entries
        .iter()
        .filter_map(|e| e.report.z_score)
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok(CovarianceComparison {
        probe_times: probe_times.to_vec(),
        entries,
        max_abs_gap,
        max_abs_z,
    })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// `ln y - fitted` at each point.
    pub residuals: Vec<f64>,
}

pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(FbmError::InvalidArgument(
            "log-log fit needs two or more paired points".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(FbmError::InvalidArgument(
            "log-log fit needs positive values".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| b - (intercept + slope * a))
        .collect();
    Ok(SlopeFit {
        slope,
        intercept,
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMetric {
    /// Mean over seeds of `sup_t |incremental - kernel|`.
    PathwiseDiscrepancy,
    /// `sum_r delta(r, t)^2 dt` at the end of the window.
    DeltaVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    /// Paths per grid for the pathwise metric.
    pub seeds: u64,
    pub base_seed: u64,
    pub horizon: f64,
    /// Truncated past in time units, the same at every `N`.
    pub past_horizon: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            seeds: 20,
            base_seed: 0,
            horizon: 1.0,
            past_horizon: 64.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u64,
    pub dt: f64,
    pub metric: f64,
    /// The lemma's bound at this grid.
    pub bound: f64,
    /// `bound - metric`; nonnegative when the lemma holds.
    pub slack: f64,
    /// Largest value over the seeds, pathwise metric only.
    pub worst: Option<f64>,
    /// Root mean square over the seeds, pathwise metric only.
    pub rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub hurst: HurstIndex,
    pub metric: ScalingMetric,
    pub rows: Vec<ScalingRow>,
    pub fit: SlopeFit,
    pub expected_slope: f64,
    pub tolerance: f64,
}

impl ScalingStudy {
    pub fn slope_within_tolerance(&self) -> bool {
        (self.fit.slope - self.expected_slope).abs() <= self.tolerance
    }
}

/// Rate of the lemma that governs `H`: the pathwise gap for `H < 1/2`
/// (slope `H`), the delta-variance for `H > 1/2` (slope `2H`).
pub fn scaling_study(hurst: HurstIndex, ns: &[u64], options: ScalingOptions) -> Result<ScalingStudy> {
    if ns.len() < 3 {
        return Err(FbmError::InvalidArgument(format!(
            "scaling study needs at least 3 grid sizes, got {}",
            ns.len()
        )));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FbmError::InvalidArgument(
            "grid sizes must be strictly increasing".into(),
        ));
    }
    let (metric, expected_slope, tolerance) = match hurst.regime() {
        Regime::SubDiffusive => (ScalingMetric::PathwiseDiscrepancy, hurst.value(), 0.05),
        Regime::SuperDiffusive => (ScalingMetric::DeltaVariance, 2.0 * hurst.value(), 0.1),
        Regime::Classical => {
            return Err(FbmError::Domain {
                function: "scaling_study",
                value: hurst.value(),
                constraint: "H != 1/2",
            })
        }
    };
    if metric == ScalingMetric::PathwiseDiscrepancy && options.seeds == 0 {
        return Err(FbmError::InvalidArgument("pathwise study needs seeds".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let past = (options.past_horizon * n as f64).ceil().max(1.0) as u64;
        let grid = make_grid(n, options.horizon, past)?;
        let table = WeightTable::new(hurst, grid);
        rows.push(match metric {
            ScalingMetric::PathwiseDiscrepancy => pathwise_row(&table, options)?,
            ScalingMetric::DeltaVariance => {
                let report = lemma2_variance_bounds(&table, grid.end_step())?;
                ScalingRow {
                    n,
                    dt: grid.dt(),
                    metric: report.delta_sum,
                    bound: report.delta_bound,
                    slack: report.delta_bound - report.delta_sum,
                    worst: None,
                    rms: None,
                }
            }
        });
    }
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.metric).collect();
    Ok(ScalingStudy {
        hurst,
        metric,
        fit: log_log_fit(&dts, &values)?,
        rows,
        expected_slope,
        tolerance,
    })
}

fn pathwise_row(table: &WeightTable, options: ScalingOptions) -> Result<ScalingRow> {
    let grid = *table.grid();
    let seeds: Vec<u64> = (0..options.seeds).map(|i| options.base_seed + i).collect();
    let reports = with_workers(|| {
        seeds
            .par_iter()
            .map(|&seed| lemma3_for_signs(table, &bernoulli_stream(seed, grid).signs()))
            .collect::<Result<Vec<_>>>()
    })?;
    let gaps: Vec<f64> = reports.iter().map(|r| r.max_discrepancy).collect();
    let metric = mean(&gaps);
    let bound = reports[0].bound;
    Ok(ScalingRow {
        n: grid.n_per_unit(),
        dt: grid.dt(),
        metric,
        bound,
        slack: bound - gaps.iter().copied().fold(0.0, f64::max),
        worst: Some(gaps.iter().copied().fold(0.0, f64::max)),
        rms: Some((gaps.iter().map(|g| g * g).sum::<f64>() / gaps.len() as f64).sqrt()),
    })
}

/// Moments of one batch of walk paths at the probe times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n: u64,
    pub past_steps: u64,
    pub paths: usize,
    pub variance: MomentReport,
    pub covariance: CovarianceComparison,
    /// Exact `Var(c_H X(t))` of the truncated walk at the last probe time.
    pub exact_walk_variance: f64,
}

/// Everything the convergence run measured, for one Hurst index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub hurst: HurstIndex,
    pub band: f64,
    pub probes: Vec<ProbeReport>,
    /// Exact fBm samples pushed through the same comparator.
    pub oracle_check: Option<CovarianceComparison>,
    pub scaling: Option<ScalingStudy>,
}

impl ConvergenceReport {
    pub fn z_scores_pass(&self) -> bool {
        self.probes
            .iter()
            .all(|p| p.variance.within(self.band) && p.covariance.within(self.band))
            && self
                .oracle_check
                .as_ref()
                .is_none_or(|c| c.within(self.band))
    }

    pub fn slopes_pass(&self) -> bool {
        self.scaling
            .as_ref()
            .is_none_or(ScalingStudy::slope_within_tolerance)
    }

    pub fn passes(&self) -> bool {
        self.z_scores_pass() && self.slopes_pass()
    }
}
