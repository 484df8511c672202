//! Single Fourier modes at linear order: the scalar Bessel solution, the
//! decaying vector mode and an oscillating tensor mode that freezes out.

use desitter::background::{coefficient_a, log_tau_grid, Background, BackgroundParams};
use desitter::first_order::{analytic_scalar_1, evolve_mode_ode, scalar_constants_from_data, ModeFamily};
use desitter::numerics::IntegratorSpec;

fn main() -> desitter::Result<()> {
    let (lambda, rho0) = (0.001, 0.01);
    let spec = IntegratorSpec::adaptive(1e-14, 1e-12);

    let late = Background::asymptotic(lambda, rho0, -(3.0 / lambda).sqrt())?;
    let a_coef = coefficient_a(lambda, rho0)?;
    let taus = log_tau_grid(late.tau0(), 3.0, 7);
    let (c1, c2) = scalar_constants_from_data(a_coef, late.tau0(), 1.0, 0.0)?;
    let scalar = evolve_mode_ode(&late, ModeFamily::Scalar, 0.0, &[1.0, 0.0], &taus, &spec)?;
    println!("scalar mode, late background");
    for (t, y) in scalar.t.iter().zip(&scalar.y) {
        println!(
            "  tau {t:12.5e}  ode {:+.10e}  bessel {:+.10e}",
            y[0],
            analytic_scalar_1(c1, c2, a_coef, *t)?
        );
    }

    let bg = Background::dust(BackgroundParams::new(lambda, rho0, 1.0)?);
    let taus = log_tau_grid(bg.tau0(), 4.0, 9);
    let vector = evolve_mode_ode(&bg, ModeFamily::Vector, 0.0, &[1.0], &taus, &spec)?;
    let tensor = evolve_mode_ode(&bg, ModeFamily::Tensor, 1.0, &[1.0, 0.0], &taus, &spec)?;
    println!("vector and tensor (q = 1), dust background");
    for (i, tau) in taus.iter().enumerate() {
        println!(
            "  tau {:12.5e}  Z {:+.6e}  u {:+.6e}",
            tau, vector.y[i][0], tensor.y[i][0]
        );
    }
    Ok(())
}
