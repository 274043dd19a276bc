//! Aggregate error bounds that drive convergence of the walk.

use serde::{Deserialize, Serialize};

use super::error_terms::{tabulated, ErrorKind};
use super::paths::{check_stream, incremental_values, kernel_values, sup_distance};
use super::weights::WeightTable;
use crate::error::{FbmError, Result};
use crate::grid::BernoulliStream;
use crate::hurst::Regime;
use crate::special::{tail_unchecked, uses_zeta_branch};

/// Squared error sums against their bounds for `H > 1/2` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub t: f64,
    /// `sum_{r=0}^{t-dt} eps(r, t)^2 dt`.
    pub epsilon_sum: f64,
    /// `(H - 1/2)^2 t dt^(2H - 1)`.
    pub epsilon_bound: f64,
    /// `sum_{r=-M dt}^{-dt} delta(r, t)^2 dt`.
    pub delta_sum: f64,
    /// `(H - 1/2)^2 zeta(3 - 2H) dt^(2H)`.
    pub delta_bound: f64,
}

impl Lemma2Report {
    pub fn epsilon_holds(&self) -> bool {
        self.epsilon_sum <= self.epsilon_bound
    }

    pub fn delta_holds(&self) -> bool {
        self.delta_sum <= self.delta_bound
    }

    pub fn holds(&self) -> bool {
        self.epsilon_holds() && self.delta_holds()
    }
}

/// Sums the squared eps and delta terms at grid step `t_step`.
pub fn lemma2_variance_bounds(table: &WeightTable, t_step: i64) -> Result<Lemma2Report> {
    let h = table.hurst();
    if h.regime() != Regime::SuperDiffusive {
        return Err(FbmError::Domain {
            function: "lemma2_variance_bounds",
            value: h.value(),
            constraint: "H > 1/2",
        });
    }
    let grid = table.grid();
    if t_step < 1 || t_step > grid.end_step() {
        return Err(FbmError::OutsideStream {
            index: t_step,
            first: 1,
            end: grid.end_step() + 1,
        });
    }
    let dt = grid.dt();
    let a = h.offset();
    let epsilon_sum: f64 = (0..t_step)
        .map(|r| tabulated(ErrorKind::Epsilon, table, r, t_step).0.powi(2))
        .sum::<f64>()
        * dt;
    let delta_sum: f64 = (grid.first_step()..0)
        .rev()
        .map(|r| tabulated(ErrorKind::Delta, table, r, t_step).0.powi(2))
        .sum::<f64>()
        * dt;
    let t = grid.time(t_step);
    Ok(Lemma2Report {
        t,
        epsilon_sum,
        epsilon_bound: a * a * t * dt.powf(2.0 * h.value() - 1.0),
        delta_sum,
        delta_bound: a * a * tail_unchecked(3.0 - 2.0 * h.value(), 1) * dt.powf(2.0 * h.value()),
    })
}

/// Largest gap between the incremental and kernel forms for one path, `H < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Report {
    pub max_discrepancy: f64,
    /// Grid time where the largest gap occurs.
    pub argmax: f64,
    /// `2 (1/2 - H) zeta(3/2 - H) dt^H`.
    pub bound: f64,
    pub holds: bool,
}

/// Constant in front of `dt^H` in the pathwise bound.
pub fn lemma3_constant(table: &WeightTable) -> f64 {
    2.0 * table.k()
}

pub fn lemma3_pathwise_bound(table: &WeightTable, stream: &BernoulliStream) -> Result<Lemma3Report> {
    check_stream(table, stream)?;
    lemma3_for_signs(table, &stream.signs())
}

pub fn lemma3_for_signs(table: &WeightTable, signs: &[f64]) -> Result<Lemma3Report> {
    let h = table.hurst();
    if h.regime() != Regime::SubDiffusive || !uses_zeta_branch(h) {
        return Err(FbmError::Domain {
            function: "lemma3_pathwise_bound",
            value: h.value(),
            constraint: "H < 1/2 - 1e-6",
        });
    }
    let walk = incremental_values(table, signs)?;
    let kernel = kernel_values(table, signs)?;
    let (argmax, max_discrepancy) = walk
        .iter()
        .zip(&kernel)
        .map(|(x, y)| (x - y).abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    debug_assert_eq!(max_discrepancy, sup_distance(&walk, &kernel));
    let grid = table.grid();
    let bound = lemma3_constant(table) * grid.dt().powf(h.value());
    Ok(Lemma3Report {
        max_discrepancy,
        argmax: grid.time(argmax as i64),
        bound,
        holds: max_discrepancy <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{bernoulli_stream, make_grid};
    use crate::hurst::HurstIndex;

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn lemma2_holds_with_room() {
        for hv in [0.55, 0.7, 0.9] {
            for n in [8u64, 64] {
                let table = WeightTable::new(h(hv), make_grid(n, 1.0, 40 * n).unwrap());
                for t in [1, n as i64 / 2, n as i64] {
                    let r = lemma2_variance_bounds(&table, t).unwrap();
                    assert!(r.holds(), "H={hv} N={n} t={t}: {r:?}");
                    assert!(r.epsilon_sum >= 0.0 && r.delta_sum > 0.0);
                }
            }
        }
    }

    #[test]
    fn lemma2_single_step_has_no_epsilon_mass() {
        let table = WeightTable::new(h(0.7), make_grid(16, 1.0, 16).unwrap());
        assert_eq!(lemma2_variance_bounds(&table, 1).unwrap().epsilon_sum, 0.0);
    }

    #[test]
    fn lemma2_rejects_other_regimes() {
        let table = WeightTable::new(h(0.3), make_grid(4, 1.0, 4).unwrap());
        assert!(lemma2_variance_bounds(&table, 2).is_err());
        let table = WeightTable::new(h(0.7), make_grid(4, 1.0, 4).unwrap());
        assert!(lemma2_variance_bounds(&table, 0).is_err());
        assert!(lemma2_variance_bounds(&table, 5).is_err());
    }

    #[test]
    fn lemma3_holds_on_random_paths() {
        for hv in [0.1, 0.25, 0.4] {
            let g = make_grid(64, 1.0, 768).unwrap();
            let table = WeightTable::new(h(hv), g);
            for seed in 0..5 {
                let r = lemma3_pathwise_bound(&table, &bernoulli_stream(seed, g)).unwrap();
                assert!(r.holds, "H={hv} seed={seed}: {r:?}");
            }
        }
    }

    #[test]
    fn lemma3_bound_tracks_the_constant() {
        let table = WeightTable::new(h(0.25), make_grid(16, 1.0, 16).unwrap());
        let r = lemma3_for_signs(&table, &vec![1.0; 32]).unwrap();
        let expected = 2.0 * 0.25 * crate::special::zeta(1.25).unwrap() * 0.0625f64.powf(0.25);
        assert!((r.bound - expected).abs() < 1e-12);
        assert!(lemma3_for_signs(&WeightTable::new(h(0.5), *table.grid()), &[1.0; 32]).is_err());
    }
}
