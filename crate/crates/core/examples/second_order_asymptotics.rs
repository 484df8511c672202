//! Second-order evolution sourced by a scalar and a tensor wave, followed by
//! the late-time fit of the asymptotic coefficients.

use desitter::background::{log_tau_grid, Background, BackgroundParams};
use desitter::first_order::{init_first_order, FirstOrderConfig, ModeSpec, Polarization};
use desitter::numerics::IntegratorSpec;
use desitter::second_order::asymptotics::fit_asymptotics;
use desitter::second_order::bilinear::FirstOrderSources;
use desitter::second_order::evolve::{evolve_second_order, SecondOrderOptions};
use desitter::spectral::Grid3;

fn main() -> desitter::Result<()> {
    let (lambda, rho0) = (0.001, 0.01);
    let grid = Grid3::new(16, 2.0 * std::f64::consts::PI)?;
    let params = BackgroundParams::new(lambda, rho0, 1.0)?;
    let bg = Background::dust(params);
    let modes = vec![
        ModeSpec::scalar([1, 0, 0], 1e-3),
        ModeSpec::tensor([0, 1, 0], 1e-3, Polarization::Plus).with_phase(0.3),
    ];
    let fo = init_first_order(&FirstOrderConfig::new(modes), &grid, &bg)?;
    let taus = log_tau_grid(bg.tau0(), 3.0, 61);
    let ev = fo.evolve(*taus.last().unwrap(), &IntegratorSpec::adaptive(1e-14, 1e-12))?;
    let sources = FirstOrderSources::new(&ev);
    let traj = evolve_second_order(&sources, &bg, &taus, &SecondOrderOptions::default())?;

    let a2 = 0.5 * params.dust_mass() * (lambda / 3.0).sqrt();
    let fit = fit_asymptotics(&traj, a2)?;
    println!(
        "window s in [{:.3e}, {:.3e}], {} samples",
        -fit.window.1, -fit.window.0, fit.samples
    );
    println!("decay orders {:?}", fit.orders);
    println!("converged {}", fit.converged);
    for (j, m) in fit.support.iter().enumerate() {
        println!("  k = {m:?}  L/A^2 = {:+.6e}", fit.l_over_a2[j].re);
    }
    Ok(())
}
