use approx::relative_eq;
use proptest::prelude::*;

use fbmwalk::walk::{coefficient_values, incremental_values, FastIncremental};
use fbmwalk::{
    bernoulli_stream, coefficient_k, coin, make_grid, zeta, zeta_tail, GridSpec, HurstIndex, PathForm,
    WalkGenerator, WeightTable,
};

fn hurst() -> impl Strategy<Value = f64> {
    prop_oneof![0.05..0.49f64, 0.51..0.95f64]
}

fn small_grid() -> impl Strategy<Value = GridSpec> {
    (1u64..6, 1u64..5, 1u64..40).prop_map(|(n, units, past)| GridSpec::from_steps(n, n * units, past).unwrap())
}

fn signs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1.0 } else { -1.0 }), len)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sums_split_at_any_interior_step(s in -50i64..50, len1 in 0i64..40, len2 in 0i64..40) {
        let grid = make_grid(8, 1.0, 64).unwrap();
        let f = |x: f64| x * x - 0.3 * x;
        let whole = grid.sum(s, s + len1 + len2, f).unwrap();
        let parts = grid.sum(s, s + len1, f).unwrap() + grid.sum(s + len1, s + len1 + len2, f).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * (1.0 + whole.abs()));
        prop_assert_eq!(grid.sum(s, s, f).unwrap(), 0.0);
    }

    #[test]
    fn zeta_is_head_plus_tail(s in 1.05..4.0f64, k0 in 1u64..200) {
        let head: f64 = (1..k0).map(|n| (n as f64).powf(-s)).sum();
        let total = zeta(s).unwrap();
        let split = head + zeta_tail(s, k0).unwrap();
        prop_assert!(relative_eq!(split, total, max_relative = 1e-11), "{split} vs {total}");
    }

    #[test]
    fn coins_are_signs_and_ignore_the_past_length(seed in any::<u64>(), past in 1u64..30, extra in 1u64..30) {
        let short = bernoulli_stream(seed, GridSpec::from_steps(4, 8, past).unwrap());
        let long = bernoulli_stream(seed, GridSpec::from_steps(4, 8, past + extra).unwrap());
        prop_assert_eq!(&long.draws()[extra as usize..], short.draws());
        for (i, &w) in short.draws().iter().enumerate() {
            prop_assert!(w == 1 || w == -1);
            prop_assert_eq!(w, coin(seed, i as i64 - past as i64));
        }
    }

    #[test]
    fn exact_forms_give_the_same_path(h in hurst(), grid in small_grid(), seed in any::<u64>()) {
        let table = WeightTable::new(HurstIndex::new(h).unwrap(), grid);
        let driving = bernoulli_stream(seed, grid).signs();
        let reference = incremental_values(&table, &driving).unwrap();
        prop_assert!(close(&coefficient_values(&table, &driving).unwrap(), &reference, 1e-10));
        let fast = FastIncremental::new(&table).values(&table, &driving).unwrap();
        prop_assert!(close(&fast, &reference, 1e-9));
    }

    #[test]
    fn paths_are_linear_in_the_driving_values(
        h in hurst(),
        x in signs(24),
        y in signs(24),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let grid = GridSpec::from_steps(4, 8, 16).unwrap();
        let table = WeightTable::new(HurstIndex::new(h).unwrap(), grid);
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = incremental_values(&table, &mixed).unwrap();
        let px = incremental_values(&table, &x).unwrap();
        let py = incremental_values(&table, &y).unwrap();
        let rhs: Vec<f64> = px.iter().zip(&py).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn scaled_paths_are_c_times_raw(h in hurst(), seed in any::<u64>()) {
        let hurst = HurstIndex::new(h).unwrap();
        let generator = WalkGenerator::new(hurst, GridSpec::from_steps(8, 8, 32).unwrap());
        let raw = generator.path(PathForm::Fast, seed, false).unwrap();
        let scaled = generator.path(PathForm::Fast, seed, true).unwrap();
        let c = fbmwalk::scaling_constant_c(hurst);
        prop_assert!(close(&scaled.values, &raw.scaled_by(c).values, 1e-15));
        prop_assert_eq!(raw.values[0], 0.0);
    }

    #[test]
    fn k_is_continuous_through_one_half(eps in 2e-6..1e-3f64) {
        let below = coefficient_k(HurstIndex::new(0.5 - eps).unwrap());
        prop_assert!((below - 1.0).abs() < 2.0 * eps, "K(1/2 - {eps}) = {below}");
        prop_assert_eq!(coefficient_k(HurstIndex::new(0.5 + eps).unwrap()), 1.0);
    }
}
