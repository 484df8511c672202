//! Scalar-vector-tensor split of a random symmetric field on a periodic grid.

use desitter::spectral::svt::{scalar_part, svt_decompose, svt_recompose, vector_part};
use desitter::spectral::{Grid3, SymTensorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> desitter::Result<()> {
    let grid = Grid3::new(16, 2.0 * std::f64::consts::PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut t = SymTensorField::zeros(&grid);
    for c in t.comps.iter_mut() {
        c.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    }

    let parts = svt_decompose(&t)?;
    println!("max |T|            {:.3e}", t.max_abs());
    println!("max |trace/3|      {:.3e}", parts.trace.max_abs());
    println!("max |scalar part|  {:.3e}", scalar_part(&parts.chi).max_abs());
    println!("max |vector part|  {:.3e}", vector_part(&parts.z).max_abs());
    println!("max |pi|           {:.3e}", parts.pi.max_abs());
    println!("div z              {:.3e}", parts.z.divergence().max_abs());
    println!("div pi             {:.3e}", parts.pi.divergence().max_abs());
    println!("trace pi           {:.3e}", parts.pi.trace().max_abs());
    println!("round trip         {:.3e}", svt_recompose(&parts)?.sub(&t).max_abs());
    Ok(())
}
