//! The weighted walk `X_{H,N}` and the algebra around it.

mod bounds;
mod error_terms;
mod fast;
mod horizon;
mod paths;
mod weights;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bounds::{
    lemma2_variance_bounds, lemma3_constant, lemma3_for_signs, lemma3_pathwise_bound, Lemma2Report,
    Lemma3Report,
};
pub use error_terms::{
    error_delta, error_delta_tilde, error_epsilon, error_epsilon_tilde, error_upper_bound,
    ErrorKind, ErrorTermEntry, ErrorTermReport, ErrorTermSummary,
};
pub use fast::FastIncremental;
pub use horizon::{
    past_horizon_for_tolerance, past_horizon_time, tail_variance, tail_variance_bound,
    MAX_PAST_STEPS,
};
pub use paths::{
    coefficient, coefficient_values, increment, incremental_values, kernel, kernel_values,
    path_coefficient, path_incremental, path_kernel, walk_covariance, CoefficientTable, PathSample,
};
pub use weights::{weight, WeightTable};

use crate::error::Result;
use crate::grid::{bernoulli_stream, GridSpec};
use crate::hurst::HurstIndex;
use crate::parallel::with_workers;
use crate::special::scaling_constant_c;

/// Which evaluation of the walk to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PathForm {
    /// Sum of increments, each over its full history.
    Incremental,
    /// Incremental form with far-past compression; same values to rounding.
    #[default]
    Fast,
    /// Reordered double sum `sum_r C(r, t) dB(r)`.
    Coefficient,
    /// Idealised kernel sum without the Riemann error terms.
    Kernel,
}

impl PathForm {
    pub fn name(self) -> &'static str {
        match self {
            PathForm::Incremental => "incremental",
            PathForm::Fast => "fast",
            PathForm::Coefficient => "coefficient",
            PathForm::Kernel => "kernel",
        }
    }
}

/// Shared tables for generating many paths of one `(H, grid)`.
#[derive(Debug, Clone)]
pub struct WalkGenerator {
    table: Arc<WeightTable>,
    fast: Arc<FastIncremental>,
}

impl WalkGenerator {
    pub fn new(hurst: HurstIndex, grid: GridSpec) -> Self {
        let table = WeightTable::new(hurst, grid);
        let fast = FastIncremental::new(&table);
        Self {
            table: Arc::new(table),
            fast: Arc::new(fast),
        }
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn grid(&self) -> &GridSpec {
        self.table.grid()
    }

    pub fn hurst(&self) -> HurstIndex {
        self.table.hurst()
    }

    /// Unscaled path values of one seed.
    pub fn values(&self, form: PathForm, seed: u64) -> Result<Vec<f64>> {
        let signs = bernoulli_stream(seed, *self.grid()).signs();
        match form {
            PathForm::Incremental => incremental_values(&self.table, &signs),
            PathForm::Fast => self.fast.values(&self.table, &signs),
            PathForm::Coefficient => coefficient_values(&self.table, &signs),
            PathForm::Kernel => kernel_values(&self.table, &signs),
        }
    }

    /// One path, multiplied by `c_H` when `scaled`.
    pub fn path(&self, form: PathForm, seed: u64, scaled: bool) -> Result<PathSample> {
        let raw = PathSample::new(*self.grid(), self.values(form, seed)?, false)?;
        Ok(if scaled {
            raw.scaled_by(scaling_constant_c(self.hurst()))
        } else {
            raw
        })
    }

    /// Paths for every seed, in seed order whatever the worker count.
    pub fn paths(&self, form: PathForm, seeds: &[u64], scaled: bool) -> Result<Vec<PathSample>> {
        with_workers(|| {
            seeds
                .par_iter()
                .map(|&seed| self.path(form, seed, scaled))
                .collect()
        })
    }
}
