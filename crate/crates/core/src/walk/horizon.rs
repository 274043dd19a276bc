//! Choosing the truncated past.
//!
//! Dropping the tosses older than `-L` removes the variance
//!
//! ```text
//! tail(t, L) = sum_{k > M} (kern(-k, t))^2 dt
//!            ~ int_L^inf ((u + t)^a - u^a)^2 du
//!           <= a^2 t^2 L^(2H - 2) / (2 - 2H)        (a = H - 1/2)
//! ```
//!
//! using `(u + t)^a - u^a <= |a| t u^(a-1)` for every `H`. Relative to the
//! target variance `t^(2H)` the bound grows like `t^(2 - 2H)`, so the horizon
//! returned is the smallest `L` that keeps it below the tolerance at the end
//! of the window.

use crate::error::{FbmError, Result};
use crate::hurst::HurstIndex;

/// Past horizons longer than this many steps are refused: the weight tables
/// alone would take several hundred megabytes.
pub const MAX_PAST_STEPS: u64 = 1 << 24;

/// Upper bound on the variance dropped by truncating the past at `L`.
pub fn tail_variance_bound(h: HurstIndex, t: f64, past_horizon: f64) -> f64 {
    let a = h.offset();
    let q = 2.0 - 2.0 * h.value();
    a * a * t * t * past_horizon.powf(-q) / q
}

/// Smallest past horizon `L` (in time units) with
/// `tail_variance_bound(t, L) <= rel_var_tol * t^(2H)` for all `t <= horizon`.
pub fn past_horizon_time(h: HurstIndex, horizon: f64, rel_var_tol: f64) -> Result<f64> {
    if !(rel_var_tol.is_finite() && rel_var_tol > 0.0) {
        return Err(FbmError::Domain {
            function: "past_horizon_for_tolerance",
            value: rel_var_tol,
            constraint: "rel_var_tol > 0",
        });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(FbmError::Domain {
            function: "past_horizon_for_tolerance",
            value: horizon,
            constraint: "horizon > 0",
        });
    }
    let a = h.offset();
    if a == 0.0 {
        return Ok(0.0);
    }
    let q = 2.0 - 2.0 * h.value();
    Ok((a * a * horizon.powf(q) / (q * rel_var_tol)).powf(1.0 / q))
}

/// Past horizon in grid steps, at least one window long.
pub fn past_horizon_for_tolerance(
    h: HurstIndex,
    n_per_unit: u64,
    horizon: f64,
    rel_var_tol: f64,
) -> Result<u64> {
    if n_per_unit == 0 {
        return Err(FbmError::InvalidGrid("N must be at least 1".into()));
    }
    let length = past_horizon_time(h, horizon, rel_var_tol)?.max(horizon);
    let steps = (length * n_per_unit as f64).ceil();
    if !steps.is_finite() || steps > MAX_PAST_STEPS as f64 {
        return Err(FbmError::InvalidArgument(format!(
            "past horizon of {length:.3e} time units ({steps:.3e} steps) for H={h}, tol={rel_var_tol:e} \
             exceeds the {MAX_PAST_STEPS}-step cap; loosen the tolerance or pass a past horizon explicitly"
        )));
    }
    Ok(steps as u64)
}

/// Variance the truncation drops, in continuous time.
///
/// Sums `((u + t)^a - u^a)^2` on a geometric grid with Gauss-Legendre panels
/// and closes the far end with the leading-order asymptotic term.
pub fn tail_variance(h: HurstIndex, t: f64, past_horizon: f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let a = h.offset();
    if a == 0.0 {
        return 0.0;
    }
    let f = |u: f64| {
        let d = u.powf(a) * (a * (t / u).ln_1p()).exp_m1();
        d * d
    };
    let mut total = 0.0;
    let mut lo = past_horizon;
    let far = past_horizon.max(t) * 1e8;
    while lo < far {
        let hi = lo * 1.25;
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += half * X.iter().zip(&W).map(|(x, w)| w * f(mid + half * x)).sum::<f64>();
        lo = hi;
    }
    let q = 2.0 - 2.0 * h.value();
    total + a * a * t * t * lo.powf(-q) / q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn bound_dominates_the_true_tail() {
        for hv in [0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
            for l in [1.0, 10.0, 1000.0] {
                let exact = tail_variance(h(hv), 1.0, l);
                let bound = tail_variance_bound(h(hv), 1.0, l);
                assert!(exact <= bound, "H={hv} L={l}: {exact} > {bound}");
                assert!(exact > 0.0);
            }
        }
    }

    #[test]
    fn chosen_horizon_meets_tolerance() {
        for hv in [0.1, 0.3, 0.7, 0.75] {
            let steps = past_horizon_for_tolerance(h(hv), 64, 1.0, 1e-3).unwrap();
            let l = steps as f64 / 64.0;
            assert!(tail_variance(h(hv), 1.0, l) <= 1e-3);
            // and the bound is met with equality, up to the rounding to whole steps
            let shorter = (steps - 1) as f64 / 64.0;
            assert!(tail_variance_bound(h(hv), 1.0, shorter) > 1e-3 || shorter < 1.0);
        }
    }

    #[test]
    fn reference_horizons() {
        let l = past_horizon_time(h(0.7), 1.0, 1e-3).unwrap();
        assert!((l - 1096.6).abs() < 1.0, "{l}");
        let l = past_horizon_time(h(0.3), 1.0, 1e-3).unwrap();
        assert!((l - 10.9).abs() < 0.1, "{l}");
    }

    #[test]
    fn classical_case_needs_no_past() {
        assert_eq!(past_horizon_for_tolerance(h(0.5), 16, 2.0, 1e-6).unwrap(), 32);
    }

    #[test]
    fn relative_tolerance_holds_inside_the_window() {
        for hv in [0.3, 0.7] {
            let l = past_horizon_time(h(hv), 4.0, 1e-3).unwrap();
            for t in [0.5, 1.0, 2.0, 4.0] {
                assert!(tail_variance(h(hv), t, l) <= 1e-3 * t.powf(2.0 * hv));
            }
        }
    }

    #[test]
    fn exponent_2h_minus_3_is_not_a_bound() {
        // a^2 t^2 L^(2H-3) / (3-2H) doubled, solved for tol = 1e-3
        let a: f64 = 0.2;
        let l = (2.0 * a * a / (1.6 * 1e-3)).powf(1.0 / 1.6);
        assert!(tail_variance(h(0.7), 1.0, l) > 1e-3);
    }

    #[test]
    fn extreme_hurst_is_refused() {
        assert!(past_horizon_for_tolerance(h(0.9), 256, 1.0, 1e-3).is_err());
        assert!(past_horizon_for_tolerance(h(0.7), 256, 1.0, 0.0).is_err());
        assert!(past_horizon_for_tolerance(h(0.7), 0, 1.0, 1e-3).is_err());
    }
}
