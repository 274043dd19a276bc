//! Special functions: the Riemann zeta function and its tails, the gamma
//! function, and the two constants that pin down the walk.
//!
//! `zeta_tail` carries most of the load. The sub-diffusive coefficient form
//! needs a tail sum for every lag, and near `s = 1` direct summation would need
//! billions of terms, so all zeta values go through an Euler–Maclaurin
//! expansion with the remainder driven below the `f64` resolution of the
//! result.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::hurst::HurstIndex;

/// Smallest admissible distance of a zeta argument from the pole at `s = 1`.
///
/// Hurst indices within this distance of `1/2` take the `H >= 1/2` branch of
/// [`coefficient_k`].
pub const ZETA_POLE_GUARD: f64 = 1e-6;

/// `B_2, B_4, ..., B_30` divided by the matching factorial `(2j)!`.
const BERNOULLI_OVER_FACTORIAL: [f64; 15] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3_617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
    77_683.0 / 14_101_100_039_391_805_440_000.0,
    -236_364_091.0 / 1_693_824_136_731_743_669_452_800_000.0,
    657_931.0 / 186_134_520_519_971_831_808_000_000.0,
    -3_392_780_147.0 / 37_893_265_687_455_865_519_472_640_000_000.0,
    1_723_168_255_201.0 / 759_790_291_646_040_068_357_842_010_112_000_000.0,
];

fn check_zeta_argument(function: &'static str, s: f64) -> Result<()> {
    if s.is_finite() && s >= 1.0 + ZETA_POLE_GUARD {
        Ok(())
    } else {
        Err(FbmError::Domain {
            function,
            value: s,
            constraint: "s >= 1 + 1e-6",
        })
    }
}

/// Riemann zeta function `sum_{n>=1} n^-s` for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    check_zeta_argument("zeta", s)?;
    Ok(tail_unchecked(s, 1))
}

/// Tail of the zeta series, `sum_{n>=k0} n^-s`.
pub fn zeta_tail(s: f64, k0: u64) -> Result<f64> {
    check_zeta_argument("zeta_tail", s)?;
    if k0 == 0 {
        return Err(FbmError::Domain {
            function: "zeta_tail",
            value: 0.0,
            constraint: "k0 >= 1",
        });
    }
    Ok(tail_unchecked(s, k0))
}

/// Euler–Maclaurin evaluation of `sum_{n>=k0} n^-s`, caller guarantees `s > 1`.
pub(crate) fn tail_unchecked(s: f64, k0: u64) -> f64 {
    // The asymptotic series is summed from a cut-off where consecutive
    // correction terms shrink by at least (s + 2j)^2 / (2 pi m)^2.
    let cutoff = (16 + s.ceil() as u64).max(k0);

    // head terms, smallest first
    let mut head = 0.0;
    for n in (k0..cutoff).rev() {
        head += (n as f64).powf(-s);
    }

    let m = cutoff as f64;
    let m_pow = m.powf(-s);
    let mut tail = m * m_pow / (s - 1.0) + 0.5 * m_pow;

    // rising factorial s (s+1) ... (s + 2j - 2) times m^(-s-2j+1)
    let mut rising = s;
    let mut power = m_pow / m;
    let inv_m2 = 1.0 / (m * m);
    for (j, coefficient) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = coefficient * rising * power;
        tail += term;
        if term.abs() <= 1e-18 * (tail + head) {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k);
        power *= inv_m2;
    }
    head + tail
}

/// Lanczos coefficients for `g = 7`, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(FbmError::Domain {
            function: "gamma_fn",
            value: x,
            constraint: "x > 0",
        });
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let z = x - 1.0;
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * series
}

/// Weight-balancing constant of the walk: `-(H - 1/2) zeta(3/2 - H)` below
/// one half, `1` at and above it.
pub fn coefficient_k(h: HurstIndex) -> f64 {
    if uses_zeta_branch(h) {
        -h.offset() * tail_unchecked(1.5 - h.value(), 1)
    } else {
        1.0
    }
}

/// Whether `H` is far enough below `1/2` for the zeta form of `K_H`.
pub fn uses_zeta_branch(h: HurstIndex) -> bool {
    1.5 - h.value() >= 1.0 + ZETA_POLE_GUARD
}

/// Mandelbrot–Van Ness normalization `sqrt(Gamma(2H+1) sin(pi H)) / Gamma(H+1/2)`.
pub fn scaling_constant_c(h: HurstIndex) -> f64 {
    let h = h.value();
    (gamma_unchecked(2.0 * h + 1.0) * (PI * h).sin()).sqrt() / gamma_unchecked(h + 0.5)
}

/// The same constant from its integral definition,
/// `(int_0^inf ((1+u)^a - u^a)^2 du + 1/(2H))^(-1/2)` with `a = H - 1/2`.
///
/// Evaluated by double-exponential quadrature. This is a cross-check for
/// [`scaling_constant_c`], not a production path.
pub fn scaling_constant_c_by_quadrature(h: HurstIndex) -> f64 {
    let a = h.offset();
    // ((1+u)^a - u^a)^2 without cancellation for large u
    let integrand = |u: f64| -> f64 {
        if u == 0.0 {
            return if a < 0.0 { f64::INFINITY } else { 0.0 };
        }
        let d = if u > 1.0 {
            u.powf(a) * (a * (1.0 / u).ln_1p()).exp_m1()
        } else {
            (1.0 + u).powf(a) - u.powf(a)
        };
        d * d
    };
    // u = v^q on [0,1] flattens the u^(2a) singularity at the origin
    let q = if a < 0.0 { 1.0 / (2.0 * h.value()) } else { 1.0 };
    let near = quadrature::double_exponential::integrate(
        |v| q * v.powf(q - 1.0) * integrand(v.powf(q)),
        0.0,
        1.0,
        1e-14,
    );
    // u = v^-p on [1, inf) turns the u^(2a-2) decay into a linear factor
    let p = 2.0 / (1.0 - 2.0 * a);
    let far = quadrature::double_exponential::integrate(
        |v| p * v.powf(-p - 1.0) * integrand(v.powf(-p)),
        0.0,
        1.0,
        1e-14,
    );
    (near.integral + far.integral + 0.5 / h.value()).powf(-0.5)
}

/// The two constants of the walk for one Hurst index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmConstants {
    pub hurst: HurstIndex,
    /// Weight of the current coin toss, `K_H`.
    pub k: f64,
    /// Limit normalization, `c_H`.
    pub c: f64,
}

impl FbmConstants {
    pub fn new(hurst: HurstIndex) -> Self {
        Self {
            hurst,
            k: coefficient_k(hurst),
            c: scaling_constant_c(hurst),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn zeta_two_and_four() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_rejects_pole_and_below() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(zeta(1.0 + 5e-7).is_err());
        assert!(zeta(1.0 + 1e-6).is_ok());
        assert!(zeta(f64::NAN).is_err());
    }

    #[test]
    fn zeta_near_pole_follows_laurent_expansion() {
        // zeta(1+e) = 1/e + gamma_0 - gamma_1 e + gamma_2 e^2 / 2 + O(e^3)
        let euler = 0.577_215_664_901_532_9;
        let stieltjes1 = -0.072_815_845_483_676_72;
        let stieltjes2 = -0.009_690_363_192_872_32;
        for step in [1e-6, 1e-4, 1e-3] {
            let s = 1.0 + step;
            let e = s - 1.0;
            let expected = 1.0 / e + euler - stieltjes1 * e + 0.5 * stieltjes2 * e * e;
            let got = zeta(s).unwrap();
            assert!(((got - expected) / expected).abs() < 1e-12, "{e}: {got} {expected}");
        }
    }

    #[test]
    fn zeta_tail_edge_cases() {
        assert!(zeta_tail(2.0, 0).is_err());
        assert!(zeta_tail(0.9, 3).is_err());
        assert_eq!(zeta_tail(2.0, 1).unwrap(), zeta(2.0).unwrap());
        assert!((zeta_tail(2.0, 2).unwrap() - (PI * PI / 6.0 - 1.0)).abs() < 1e-14);
        // far tail against the integral asymptotics
        let k = 1_000_000u64;
        let expected = (k as f64).powf(-1.0) + 0.5 * (k as f64).powf(-2.0);
        assert!((zeta_tail(2.0, k).unwrap() - expected).abs() < 1e-18);
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma_fn(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_fn(5.0).unwrap() - 24.0).abs() < 1e-12);
        assert!((gamma_fn(0.1).unwrap() - 9.513_507_698_668_732).abs() < 1e-12);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_recurrence() {
        for x in [0.05, 0.3, 0.77, 1.4, 2.9, 7.25] {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn k_branches() {
        assert_eq!(coefficient_k(h(0.5)), 1.0);
        assert_eq!(coefficient_k(h(0.75)), 1.0);
        let k = coefficient_k(h(0.25));
        assert!((k - 0.25 * zeta(1.25).unwrap()).abs() < 1e-15);
        assert!(k > 0.0);
        // inside the guard band the unit branch is used
        assert_eq!(coefficient_k(h(0.5 - 5e-7)), 1.0);
    }

    #[test]
    fn k_is_continuous_at_one_half() {
        let mut last = f64::INFINITY;
        for k in 2..=6 {
            let gap = (coefficient_k(h(0.5 - 10f64.powi(-k))) - 1.0).abs();
            assert!(gap < last, "k={k}");
            last = gap;
        }
        assert!((coefficient_k(h(0.49)) - 1.0).abs() < 0.1);
    }

    #[test]
    fn c_at_one_half_and_positivity() {
        assert!((scaling_constant_c(h(0.5)) - 1.0).abs() < 1e-14);
        for i in 1..20 {
            assert!(scaling_constant_c(h(i as f64 * 0.05)) > 0.0);
        }
    }

    #[test]
    fn c_closed_form_matches_quadrature() {
        for i in 1..20 {
            let hh = h(i as f64 * 0.05);
            let closed = scaling_constant_c(hh);
            let integral = scaling_constant_c_by_quadrature(hh);
            assert!((closed - integral).abs() < 1e-6, "{hh}: {closed} {integral}");
        }
    }
}
