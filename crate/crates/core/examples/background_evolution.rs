//! Dust plus Λ background from τ0 toward the future boundary, compared with
//! the late-time de Sitter scale factor.

use desitter::background::{asymptotic_scale_factor, evolve_background, log_tau_grid, BackgroundParams};

fn main() -> desitter::Result<()> {
    let lambda = 0.001;
    let params = BackgroundParams::new(lambda, 0.01, 1.0)?;
    let taus = log_tau_grid(params.tau0(), 4.0, 9);
    let states = evolve_background(params, &taus)?;

    println!(
        "{:>14} {:>14} {:>14} {:>12} {:>12}",
        "s", "a", "a_dS", "H/H_dS", "rho a^3"
    );
    let h_ds = (lambda / 3.0).sqrt();
    for st in &states {
        let a_ds = asymptotic_scale_factor(lambda, st.tau)?;
        let h = st.conf_h / st.a;
        println!(
            "{:14.6e} {:14.6e} {:14.6e} {:12.8} {:12.8}",
            st.s(),
            st.a,
            a_ds,
            h / h_ds,
            st.rho_b * st.a.powi(3)
        );
    }
    Ok(())
}
