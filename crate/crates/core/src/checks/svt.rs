use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Metric;
use crate::error::Result;
use crate::spectral::svt::{svt_decompose, svt_recompose};
use crate::spectral::{Grid3, SymTensorField};

const TRIALS: usize = 100;

pub fn run() -> Result<Vec<Metric>> {
    let grid = Grid3::new(32, 2.0 * PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (mut round, mut div_pi, mut tr_pi, mut div_z, mut idem) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..TRIALS {
        let mut t = SymTensorField::zeros(&grid);
        for c in t.comps.iter_mut() {
            c.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        }
        let scale = t.max_abs();
        let parts = svt_decompose(&t)?;
        round = round.max(svt_recompose(&parts)?.sub(&t).max_abs() / scale);
        div_pi = div_pi.max(parts.pi.divergence().max_abs() / scale);
        tr_pi = tr_pi.max(parts.pi.trace().max_abs() / scale);
        div_z = div_z.max(parts.z.divergence().max_abs() / scale);
        let again = svt_decompose(&parts.pi)?;
        idem = idem.max(again.pi.sub(&parts.pi).max_abs() / scale);
    }
    Ok(vec![
        Metric::at_most("round_trip", round, 1e-10),
        Metric::at_most("div_pi", div_pi, 1e-10),
        Metric::at_most("trace_pi", tr_pi, 1e-10),
        Metric::at_most("div_z", div_z, 1e-10),
        Metric::at_most("pi_idempotent", idem, 1e-10),
    ])
}
