use std::f64::consts::PI;

use super::fd_oracle::{fd_sources, OracleInput};
use super::Metric;
use crate::background::{Background, BackgroundParams};
use crate::error::Result;
use crate::first_order::{init_first_order, FirstOrderConfig, GammaJet, ModeSpec, Polarization};
use crate::numerics::IntegratorSpec;
use crate::second_order::sources::{assemble_sources, SourceTerms};
use crate::spectral::{Grid3, ScalarField, SymTensorField};

type M3 = [[f64; 3]; 3];

fn bg() -> Result<Background> {
    Ok(Background::dust(BackgroundParams::new(0.001, 0.01, 1.0)?))
}

struct Data {
    jet: GammaJet,
    g0: SymTensorField,
    d0: ScalarField,
    conf_h: f64,
    rho_a2: f64,
}

fn evolved(n: usize, modes: Vec<ModeSpec>) -> Result<Data> {
    let bg = bg()?;
    let grid = Grid3::new(n, 2.0 * PI)?;
    let fo = init_first_order(&FirstOrderConfig::new(modes), &grid, &bg)?;
    let tau = bg.tau0() / 3.0;
    let ev = fo.evolve(tau, &IntegratorSpec::adaptive(1e-14, 1e-12))?;
    let jet = ev.gamma_jet(tau)?;
    let y = ev.time_jet(tau)?.y;
    Ok(Data {
        jet,
        g0: fo.gamma0(),
        d0: fo.delta0_field(),
        conf_h: bg.conf_h(y),
        rho_a2: bg.rho_a2(y),
    })
}

fn library(d: &Data) -> Result<SourceTerms> {
    assemble_sources(&d.jet, Some(&d.g0), Some(&d.d0), d.conf_h, d.rho_a2)
}

const GROUPS: [(&str, std::ops::Range<usize>); 4] = [("n1", 0..1), ("n2", 1..2), ("n3", 2..5), ("n4", 5..11)];

/// Relative discrepancy per source against the finite-difference oracle.
fn fd_discrepancy(d: &Data) -> Result<Vec<(&'static str, f64)>> {
    let lib = library(d)?;
    let lib = lib.components();
    let fd = fd_sources(&OracleInput {
        g: &d.jet.g,
        p: &d.jet.p,
        pp: &d.jet.pp,
        g0: &d.g0,
        d0: &d.d0,
        conf_h: d.conf_h,
        rho_a2: d.rho_a2,
    });
    let overall = lib.iter().flat_map(|c| c.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(GROUPS
        .iter()
        .map(|(name, r)| {
            let scale = r
                .clone()
                .flat_map(|c| lib[c].iter())
                .fold(0.0f64, |a, v| a.max(v.abs()));
            let diff = r
                .clone()
                .flat_map(|c| lib[c].iter().zip(&fd[c]).map(|(x, y)| (x - y).abs()))
                .fold(0.0f64, f64::max);
            (*name, diff / scale.max(1e-6 * overall))
        })
        .collect())
}

fn scaled(d: &Data, lam: f64) -> Data {
    let s = |t: &SymTensorField| {
        let mut t = t.clone();
        t.scale(lam);
        t
    };
    let mut d0 = d.d0.clone();
    d0.scale(lam);
    Data {
        jet: GammaJet {
            tau: d.jet.tau,
            g: s(&d.jet.g),
            p: s(&d.jet.p),
            pp: s(&d.jet.pp),
        },
        g0: s(&d.g0),
        d0,
        conf_h: d.conf_h,
        rho_a2: d.rho_a2,
    }
}

fn homogeneity(d: &Data) -> Result<f64> {
    let lam = 1.7;
    let base = library(d)?;
    let big = library(&scaled(d, lam))?;
    let scale = base.max_abs();
    let mut worst = 0.0f64;
    for (x, y) in base.components().iter().zip(big.components()) {
        for (u, v) in x.iter().zip(y) {
            worst = worst.max((v / (lam * lam) - u).abs() / scale);
        }
    }
    Ok(worst)
}

fn constant(grid: &Grid3, m: &M3) -> SymTensorField {
    SymTensorField::from_fn(grid, |_| *m)
}

fn dot(a: &M3, b: &M3) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| a[i][j] * b[i][j])).sum()
}

fn trace(a: &M3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

/// Spatially constant data against the sources with all gradient terms
/// removed, written in matrix form.
fn homogeneous_reduction() -> Result<f64> {
    let grid = Grid3::new(8, 2.0 * PI)?;
    let g: M3 = [[0.3, -0.1, 0.2], [-0.1, -0.4, 0.05], [0.2, 0.05, 0.25]];
    let p: M3 = [[-0.2, 0.15, 0.0], [0.15, 0.1, -0.3], [0.0, -0.3, 0.4]];
    let pp: M3 = [[0.05, 0.0, -0.12], [0.0, 0.33, 0.07], [-0.12, 0.07, -0.2]];
    let g0: M3 = [[0.1, 0.02, 0.0], [0.02, -0.2, 0.1], [0.0, 0.1, 0.3]];
    let (d0, h, rho) = (0.37, -0.8, 0.45);
    let jet = GammaJet {
        tau: -1.0,
        g: constant(&grid, &g),
        p: constant(&grid, &p),
        pp: constant(&grid, &pp),
    };
    let lib = assemble_sources(
        &jet,
        Some(&constant(&grid, &g0)),
        Some(&ScalarField::constant(&grid, d0)),
        h,
        rho,
    )?;

    let dtr = trace(&g) - trace(&g0);
    let bracket = -0.25 * dtr * dtr - 0.5 * (dot(&g, &g) - dot(&g0, &g0)) + d0 * dtr;
    let trp = trace(&p);
    let n1 = -(dot(&p, &p) + 2.0 * h * dot(&p, &g)) / 6.0 - dot(&g, &pp) / 3.0 - rho * bracket / 6.0;
    let n2 = -h * dot(&g, &p) / 3.0 - (dot(&p, &p) - trp * trp) / 24.0 + rho * bracket / 6.0;
    let mut expect = vec![n1, n2, 0.0, 0.0, 0.0];
    for a in 0..3 {
        for b in a..3 {
            let pp_ab: f64 = (0..3).map(|d| p[a][d] * p[d][b]).sum();
            let iso = if a == b { (trp * trp - dot(&p, &p)) / 8.0 } else { 0.0 };
            expect.push(pp_ab - 0.5 * trp * p[a][b] + iso);
        }
    }
    let scale = expect.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for (c, e) in lib.components().iter().zip(&expect) {
        for v in c.iter() {
            worst = worst.max((v - e).abs() / scale);
        }
    }
    Ok(worst)
}

pub fn run() -> Result<Vec<Metric>> {
    let mut out = Vec::new();
    let mixed = vec![
        ModeSpec::scalar([1, 0, 0], 1e-3),
        ModeSpec::scalar([0, 0, 2], 4e-4).with_phase(1.1),
        ModeSpec::vector([0, 1, 1], 7e-4, Polarization::Cross).with_phase(0.4),
        ModeSpec::tensor([1, 2, 0], 1e-3, Polarization::Plus).with_phase(0.3),
    ];
    let d = evolved(16, mixed.clone())?;
    out.push(Metric::at_most("homogeneity", homogeneity(&d)?, 1e-10));
    out.push(Metric::at_most(
        "homogeneous_closed_form",
        homogeneous_reduction()?,
        1e-10,
    ));
    let wave = evolved(64, vec![ModeSpec::tensor([1, 2, 0], 1e-3, Polarization::Plus)])?;
    for (name, v) in fd_discrepancy(&wave)? {
        out.push(Metric::at_most(format!("fd_tensor_wave_{name}"), v, 1e-5));
    }
    let mixed = evolved(64, mixed)?;
    for (name, v) in fd_discrepancy(&mixed)? {
        out.push(Metric::at_most(format!("fd_mixed_{name}"), v, 1e-5));
    }
    Ok(out)
}
