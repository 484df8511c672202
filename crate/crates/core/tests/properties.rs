use std::f64::consts::PI;

use desitter::background::log_tau_grid;
use desitter::second_order::asymptotics::fit_series;
use desitter::spectral::svt::{scalar_part, svt_decompose, svt_recompose, vector_part};
use desitter::spectral::{Grid3, SymTensorField};
use desitter::table::Table;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(n: usize, seed: u64) -> SymTensorField {
    let grid = Grid3::new(n, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = SymTensorField::zeros(&grid);
    for c in t.comps.iter_mut() {
        c.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn svt_round_trip(seed in any::<u64>()) {
        let t = random_tensor(8, seed);
        let parts = svt_decompose(&t).unwrap();
        let back = svt_recompose(&parts).unwrap();
        prop_assert!(back.sub(&t).max_abs() < 1e-12 * t.max_abs());
    }

    #[test]
    fn svt_parts_are_orthogonal(seed in any::<u64>()) {
        let t = random_tensor(8, seed);
        let parts = svt_decompose(&t).unwrap();
        let s = scalar_part(&parts.chi);
        let v = vector_part(&parts.z);
        let norm = t.inner(&t);
        for (x, y) in [(&s, &v), (&s, &parts.pi), (&v, &parts.pi)] {
            prop_assert!(x.inner(y).abs() < 1e-12 * norm);
        }
    }

    #[test]
    fn svt_projection_is_idempotent(seed in any::<u64>()) {
        let t = random_tensor(8, seed);
        let parts = svt_decompose(&t).unwrap();
        let again = svt_decompose(&parts.pi).unwrap();
        prop_assert!(again.pi.sub(&parts.pi).max_abs() < 1e-12 * t.max_abs());
        prop_assert!(again.z.max_abs() < 1e-12 * t.max_abs());
        prop_assert!(again.chi.max_abs() < 1e-12 * t.max_abs());
        let s = svt_decompose(&scalar_part(&parts.chi)).unwrap();
        prop_assert!(s.pi.max_abs() < 1e-12 * t.max_abs());
        prop_assert!(s.z.max_abs() < 1e-12 * t.max_abs());
    }

    #[test]
    fn quadratic_fit_recovers_constant(c in -1.0f64..1.0, b in -1e-2f64..1e-2) {
        let taus = log_tau_grid(-40.0, 3.0, 61);
        let v: Vec<f64> = taus.iter().map(|t| c + b * t * t).collect();
        let fit = fit_series(&taus, &v).unwrap();
        prop_assert!((fit.constant - c).abs() < 1e-12 * (1.0 + c.abs()));
        if b.abs() > 1e-6 {
            prop_assert!((fit.order - 2.0).abs() < 0.05, "{}", fit.order);
        }
    }

    #[test]
    fn csv_round_trip_is_exact(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..40)) {
        let mut t = Table::new(&["x"]);
        for v in &values {
            t.push(vec![*v]).unwrap();
        }
        let text = t.to_csv();
        prop_assert!(text.ends_with('\n') && !text.contains('\r'));
        let back = Table::parse(&text).unwrap();
        for (a, b) in back.column("x").unwrap().iter().zip(&values) {
            prop_assert_eq!(a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0), true);
        }
    }

    #[test]
    fn log_grid_is_monotone(decades in 0.5f64..5.0, n in 2usize..300) {
        let taus = log_tau_grid(-40.0, decades, n);
        prop_assert_eq!(taus.len(), n);
        prop_assert!(taus.windows(2).all(|w| w[1] > w[0] && w[1] < 0.0));
        prop_assert!((taus[n - 1] / taus[0] - 10f64.powf(-decades)).abs() < 1e-12);
    }
}
