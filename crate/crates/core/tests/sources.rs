use std::f64::consts::PI;

use desitter::first_order::GammaJet;
use desitter::second_order::sources::assemble_sources;
use desitter::spectral::{Grid3, ScalarField, SymTensorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random smooth symmetric tensor with modes up to `|m| <= 2`.
fn smooth(grid: &Grid3, rng: &mut ChaCha8Rng) -> SymTensorField {
    let waves: Vec<([f64; 3], f64, [f64; 6])> = (0..4)
        .map(|_| {
            let k = [0, 1, 2].map(|_| rng.gen_range(-2i32..=2) as f64);
            (
                k,
                rng.gen_range(0.0..2.0 * PI),
                std::array::from_fn(|_| rng.gen_range(-1e-3..1e-3)),
            )
        })
        .collect();
    let mut t = SymTensorField::zeros(grid);
    for i in 0..grid.len() {
        let x = grid.coords(i);
        for (k, ph, amp) in &waves {
            let c = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos();
            for (comp, a) in t.comps.iter_mut().zip(amp) {
                comp[i] += a * c;
            }
        }
    }
    t
}

struct Data {
    jet: GammaJet,
    g0: SymTensorField,
    d0: ScalarField,
}

fn data(seed: u64) -> Data {
    let grid = Grid3::new(16, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jet = GammaJet {
        tau: -3.0,
        g: smooth(&grid, &mut rng),
        p: smooth(&grid, &mut rng),
        pp: smooth(&grid, &mut rng),
    };
    let g0 = smooth(&grid, &mut rng);
    let d0 = ScalarField::from_fn(&grid, |x| 1e-3 * (x[0] + 0.3).sin());
    Data { jet, g0, d0 }
}

fn scale(t: &SymTensorField, s: f64) -> SymTensorField {
    let mut t = t.clone();
    t.scale(s);
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sources_are_quadratic(seed in any::<u64>(), lam in 0.1f64..5.0) {
        let d = data(seed);
        let base = assemble_sources(&d.jet, Some(&d.g0), Some(&d.d0), -0.4, 0.02).unwrap();
        let jet = GammaJet { tau: d.jet.tau, g: scale(&d.jet.g, lam), p: scale(&d.jet.p, lam), pp: scale(&d.jet.pp, lam) };
        let mut d0 = d.d0.clone();
        d0.scale(lam);
        let big = assemble_sources(&jet, Some(&scale(&d.g0, lam)), Some(&d0), -0.4, 0.02).unwrap();
        let m = base.max_abs();
        for (x, y) in base.components().iter().zip(big.components()) {
            for (u, v) in x.iter().zip(y) {
                prop_assert!((v / (lam * lam) - u).abs() <= 1e-10 * m);
            }
        }
    }

    #[test]
    fn sources_commute_with_grid_shifts(seed in any::<u64>(), shift in 1usize..16) {
        let d = data(seed);
        let grid = d.jet.g.grid.clone();
        let n = grid.n();
        let roll_index = |i: usize| {
            let [a, b, c] = grid.unindex(i);
            grid.index((a + shift) % n, b, c)
        };
        let roll_t = |t: &SymTensorField| {
            let mut out = t.clone();
            for s in 0..6 {
                for i in 0..grid.len() {
                    out.comps[s][roll_index(i)] = t.comps[s][i];
                }
            }
            out
        };
        let mut d0 = d.d0.clone();
        for i in 0..grid.len() {
            d0.data[roll_index(i)] = d.d0.data[i];
        }
        let base = assemble_sources(&d.jet, Some(&d.g0), Some(&d.d0), -0.4, 0.02).unwrap();
        let jet = GammaJet { tau: d.jet.tau, g: roll_t(&d.jet.g), p: roll_t(&d.jet.p), pp: roll_t(&d.jet.pp) };
        let rolled = assemble_sources(&jet, Some(&roll_t(&d.g0)), Some(&d0), -0.4, 0.02).unwrap();
        let m = base.max_abs();
        for (x, y) in base.components().iter().zip(rolled.components()) {
            for i in 0..grid.len() {
                prop_assert!((y[roll_index(i)] - x[i]).abs() <= 1e-12 * m);
            }
        }
    }
}
