//! Exact fBm reference: covariance and dense Cholesky sampling.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::grid::GridSpec;
use crate::hurst::HurstIndex;
use crate::walk::PathSample;

/// Largest number of time points factorized densely.
pub const DEFAULT_MAX_POINTS: usize = 2048;

/// Diagonal shifts tried in turn when the plain factorization fails.
const JITTER_STEPS: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// ChaCha stream reserved for Gaussian draws; the coin tosses use stream 0.
const NORMAL_STREAM: u64 = 1;

/// `Cov(B_H(s), B_H(t)) = (s^2H + t^2H - |t - s|^2H) / 2`.
pub fn fbm_covariance(h: HurstIndex, s: f64, t: f64) -> Result<f64> {
    for v in [s, t] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(FbmError::Domain {
                function: "fbm_covariance",
                value: v,
                constraint: "time >= 0",
            });
        }
    }
    let p = 2.0 * h.value();
    Ok(0.5 * (s.powf(p) + t.powf(p) - (t - s).abs().powf(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub hurst: HurstIndex,
    pub times: Vec<f64>,
    pub entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Times must be strictly increasing and positive.
    pub fn new(hurst: HurstIndex, times: &[f64]) -> Result<Self> {
        Self::with_cap(hurst, times, DEFAULT_MAX_POINTS)
    }

    pub fn with_cap(hurst: HurstIndex, times: &[f64], cap: usize) -> Result<Self> {
        if times.is_empty() {
            return Err(FbmError::InvalidArgument("no time points".into()));
        }
        if times.len() > cap {
            return Err(FbmError::InvalidArgument(format!(
                "{} time points exceed the dense factorization cap of {cap}",
                times.len()
            )));
        }
        if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FbmError::InvalidArgument(
                "time points must be positive and strictly increasing".into(),
            ));
        }
        let n = times.len();
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let c = fbm_covariance(hurst, times[i], times[j])?;
                entries[(i, j)] = c;
                entries[(j, i)] = c;
            }
        }
        Ok(Self {
            hurst,
            times: times.to_vec(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Covariance with its lower Cholesky factor, ready to sample.
#[derive(Debug, Clone)]
pub struct FbmOracle {
    covariance: CovarianceMatrix,
    factor: DMatrix<f64>,
    jitter: f64,
}

impl FbmOracle {
    pub fn new(hurst: HurstIndex, times: &[f64]) -> Result<Self> {
        Self::from_covariance(CovarianceMatrix::new(hurst, times)?)
    }

    /// Oracle at every positive grid time `dt, ..., horizon`.
    pub fn on_grid(hurst: HurstIndex, grid: &GridSpec) -> Result<Self> {
        let times: Vec<f64> = (1..=grid.end_step()).map(|i| grid.time(i)).collect();
        Self::new(hurst, &times)
    }

    pub fn from_covariance(covariance: CovarianceMatrix) -> Result<Self> {
        let n = covariance.len();
        for &jitter in &JITTER_STEPS {
            let shifted = &covariance.entries + DMatrix::identity(n, n) * jitter;
            if let Some(chol) = Cholesky::new(shifted) {
                return Ok(Self {
                    factor: chol.l(),
                    covariance,
                    jitter,
                });
            }
        }
        Err(FbmError::Factorization {
            jitter: *JITTER_STEPS.last().unwrap(),
        })
    }

    pub fn covariance(&self) -> &CovarianceMatrix {
        &self.covariance
    }

    /// Lower-triangular `L` with `L L^T = covariance + jitter I`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Diagonal shift that was needed, zero when none.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn times(&self) -> &[f64] {
        &self.covariance.times
    }

    /// One draw at the oracle's times, a pure function of `seed`.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(NORMAL_STREAM);
        let z = DVector::from_iterator(self.len(), (0..self.len()).map(|_| rng.sample(StandardNormal)));
        (&self.factor * z).iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.covariance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariance.is_empty()
    }

    /// Largest entry of `|L L^T - covariance|`.
    pub fn reconstruction_error(&self) -> f64 {
        let product = &self.factor * self.factor.transpose();
        (product - &self.covariance.entries).abs().max()
    }
}

/// Exact fBm draw on every point of `grid`, with `X(0) = 0`.
pub fn exact_fbm_sample(oracle: &FbmOracle, grid: &GridSpec, seed: u64) -> Result<PathSample> {
    let expected: Vec<f64> = (1..=grid.end_step()).map(|i| grid.time(i)).collect();
    if expected.len() != oracle.len()
        || expected.iter().zip(oracle.times()).any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(FbmError::MismatchedGrids);
    }
    let mut values = Vec::with_capacity(expected.len() + 1);
    values.push(0.0);
    values.extend(oracle.sample(seed));
    PathSample::new(*grid, values, true)
}
