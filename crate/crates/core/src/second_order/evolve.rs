//! Per-Fourier-mode evolution of the second-order perturbations.

use num_complex::Complex64;

use super::bilinear::{SourceProvider, SparseSources};
use crate::background::Background;
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_checkpointed, CheckpointedSolution, IntegratorSpec, OdeSystem};
use crate::spectral::svt::split_mode;
use crate::spectral::{Grid3, ScalarField, SymTensorField, SYM_INDEX, SYM_PAIRS};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[inline]
fn get(y: &[f64], i: usize) -> C {
    C::new(y[2 * i], y[2 * i + 1])
}

#[inline]
fn put(y: &mut [f64], i: usize, v: C) {
    y[2 * i] = v.re;
    y[2 * i + 1] = v.im;
}

/// Source of the scalar equation of some order on a sparse support.
pub trait ScalarSource {
    fn grid(&self) -> &Grid3;
    fn support(&self) -> &[[i32; 3]];
    /// Coefficients of the scalar source per support mode.
    fn scalar_source(&self, tau: f64) -> Result<Vec<C>>;
}

/// Adapter exposing the Raychaudhuri source of a full provider.
pub struct RaychaudhuriSource<'a, P: ?Sized>(pub &'a P);

impl<P: SourceProvider + ?Sized> ScalarSource for RaychaudhuriSource<'_, P> {
    fn grid(&self) -> &Grid3 {
        self.0.grid()
    }

    fn support(&self) -> &[[i32; 3]] {
        self.0.support()
    }

    fn scalar_source(&self, tau: f64) -> Result<Vec<C>> {
        Ok(self.0.sources(tau)?.coeffs.iter().map(|c| c[0]).collect())
    }
}

/// Scalar source given by a closure; used for orders beyond two, where the
/// sources must be supplied by the caller.
pub struct FnScalarSource<F> {
    pub grid: Grid3,
    pub support: Vec<[i32; 3]>,
    pub f: F,
}

impl<F: Fn(f64) -> Result<Vec<C>>> ScalarSource for FnScalarSource<F> {
    fn grid(&self) -> &Grid3 {
        &self.grid
    }

    fn support(&self) -> &[[i32; 3]] {
        &self.support
    }

    fn scalar_source(&self, tau: f64) -> Result<Vec<C>> {
        (self.f)(tau)
    }
}

/// Full source set given by a closure.
pub struct FnSourceProvider<F> {
    pub grid: Grid3,
    pub support: Vec<[i32; 3]>,
    pub bg: Background,
    pub f: F,
}

impl<F: Fn(f64) -> Result<Vec<[C; 11]>>> SourceProvider for FnSourceProvider<F> {
    fn grid(&self) -> &Grid3 {
        &self.grid
    }

    fn support(&self) -> &[[i32; 3]] {
        &self.support
    }

    fn sources(&self, tau: f64) -> Result<SparseSources> {
        Ok(SparseSources {
            tau,
            conf_h: f64::NAN,
            rho_a2: f64::NAN,
            coeffs: (self.f)(tau)?,
        })
    }
}

/// `phi'' + (a'/a) phi' - (rho_B a^2 / 2) phi = N` per mode, together with
/// the background `y = 1/a`.
pub struct ScalarSystem<'a, S: ?Sized> {
    bg: Background,
    src: &'a S,
    modes: usize,
}

impl<S: ScalarSource + ?Sized> OdeSystem for ScalarSystem<'_, S> {
    fn dim(&self) -> usize {
        1 + 4 * self.modes
    }

    fn rhs(&self, tau: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let yb = y[0];
        dy[0] = self.bg.dy(yb);
        let h = self.bg.conf_h(yb);
        let ra2 = self.bg.rho_a2(yb);
        let n = self.src.scalar_source(tau)?;
        let (ys, ds) = (&y[1..], &mut dy[1..]);
        for j in 0..self.modes {
            let phi = get(ys, 2 * j);
            let dphi = get(ys, 2 * j + 1);
            put(ds, 2 * j, dphi);
            put(ds, 2 * j + 1, -h * dphi + 0.5 * ra2 * phi + n[j]);
        }
        Ok(())
    }
}

/// Modal trajectory of a scalar perturbation.
#[derive(Debug, Clone)]
pub struct ScalarTrajectory {
    pub order: usize,
    pub support: Vec<[i32; 3]>,
    pub taus: Vec<f64>,
    /// `(phi, phi')` per sample and mode.
    pub values: Vec<Vec<(C, C)>>,
}

fn map_divergence(e: Error) -> Error {
    match e {
        Error::NonFiniteRhs { t } => Error::Divergence {
            last_tau: t,
            reason: "second-order amplitude diverged".into(),
        },
        other => other,
    }
}

fn check_taus(bg: &Background, taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::input("empty sampling grid"));
    }
    for w in taus.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::input("sampling grid must be strictly increasing"));
        }
    }
    for &t in taus {
        bg.check_tau(t)?;
    }
    Ok(())
}

fn scalar_state(bg: &Background, init: &[(C, C)]) -> Vec<f64> {
    let mut y0 = vec![0.0; 1 + 4 * init.len()];
    y0[0] = bg.y0();
    for (j, (p, dp)) in init.iter().enumerate() {
        put(&mut y0[1..], 2 * j, *p);
        put(&mut y0[1..], 2 * j + 1, *dp);
    }
    y0
}

/// Evolves the scalar perturbation of order `order` (the operator is the same
/// at every order) with initial `(phi, phi')` per support mode at `tau0`.
pub fn evolve_scalar_n<S: ScalarSource + ?Sized>(
    order: usize,
    src: &S,
    bg: &Background,
    init: &[(C, C)],
    taus: &[f64],
    spec: &IntegratorSpec,
) -> Result<ScalarTrajectory> {
    let sol = scalar_solution(order, src, bg, init, *taus.last().unwrap_or(&bg.tau0()), spec)?;
    check_taus(bg, taus)?;
    let values = taus
        .iter()
        .map(|&t| {
            let y = sol.eval(t)?;
            Ok((0..init.len())
                .map(|j| (get(&y[1..], 2 * j), get(&y[1..], 2 * j + 1)))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ScalarTrajectory {
        order,
        support: src.support().to_vec(),
        taus: taus.to_vec(),
        values,
    })
}

fn scalar_solution<'a, S: ScalarSource + ?Sized>(
    order: usize,
    src: &'a S,
    bg: &Background,
    init: &[(C, C)],
    tau_end: f64,
    spec: &IntegratorSpec,
) -> Result<CheckpointedSolution<ScalarSystem<'a, S>>> {
    if order == 0 {
        return Err(Error::input("perturbation order must be positive"));
    }
    if init.len() != src.support().len() {
        return Err(Error::input("initial data must have one entry per support mode"));
    }
    bg.check_tau(tau_end)?;
    let sys = ScalarSystem {
        bg: *bg,
        src,
        modes: init.len(),
    };
    let y0 = scalar_state(bg, init);
    if tau_end <= bg.tau0() {
        return Err(Error::range("second-order evolution needs tau_end > tau0"));
    }
    integrate_checkpointed(sys, bg.tau0(), &y0, tau_end, *spec).map_err(map_divergence)
}

/// Second-order variables per support mode at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub phi: Vec<C>,
    pub dphi: Vec<C>,
    pub chi: Vec<[C; 6]>,
    pub dchi: Vec<[C; 6]>,
}

impl ModalState {
    pub fn zeros(n: usize) -> Self {
        Self {
            phi: vec![ZERO; n],
            dphi: vec![ZERO; n],
            chi: vec![[ZERO; 6]; n],
            dchi: vec![[ZERO; 6]; n],
        }
    }
}

/// How second-order data at `tau0` are chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SecondOrderInit {
    /// All second-order fields and rates zero.
    Zero,
    /// `phi = 0`, `phi' = 0` (except the mean, whose rate solves the energy
    /// constraint), vanishing tensor part and vector amplitude, with the
    /// scalar potential, its rate and the vector rate solving both
    /// constraints.
    #[default]
    Constrained,
    Explicit(ModalState),
}

pub(crate) fn wavevectors(grid: &Grid3, support: &[[i32; 3]]) -> Vec<[f64; 3]> {
    let kf = grid.k_fundamental();
    support.iter().map(|m| m.map(|c| kf * c as f64)).collect()
}

pub(crate) fn mat(v: &[C; 6]) -> [[C; 3]; 3] {
    std::array::from_fn(|a| std::array::from_fn(|b| v[SYM_INDEX[a][b]]))
}

/// Scalar potential `c` of the scalar part `-(k_a k_b - d_ab k^2/3) c`.
fn scalar_potential(k: &[f64; 3], v: &[C; 6]) -> C {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return ZERO;
    }
    let m = mat(v);
    let mut kmk = ZERO;
    for a in 0..3 {
        for b in 0..3 {
            kmk += k[a] * m[a][b] * k[b];
        }
    }
    let tr = m[0][0] + m[1][1] + m[2][2];
    -1.5 * (kmk - tr * k2 / 3.0) / (k2 * k2)
}

/// Data satisfying both constraints at `tau0` given the sources there.
pub fn constrained_initial_state(grid: &Grid3, support: &[[i32; 3]], src: &SparseSources, conf_h: f64) -> ModalState {
    let ks = wavevectors(grid, support);
    let mut st = ModalState::zeros(support.len());
    for (j, k) in ks.iter().enumerate() {
        let c = &src.coeffs[j];
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            if conf_h != 0.0 {
                st.dphi[j] = c[1] / conf_h;
            }
            continue;
        }
        let kn = k2.sqrt();
        // phi = phi' = 0 leaves N2 for the scalar potential.
        let chi_s = -18.0 * c[1] / (k2 * k2);
        let r = [c[2], c[3], c[4]];
        let kr: C = (0..3).map(|b| r[b] * (k[b] / kn)).sum();
        let dchi_s = 3.0 * I * kr / (k2 * kn);
        let mut dz = [ZERO; 3];
        for a in 0..3 {
            dz[a] = -2.0 * (r[a] - kr * (k[a] / kn)) / k2;
        }
        for (slot, &(a, b)) in SYM_PAIRS.iter().enumerate() {
            let d = if a == b { 1.0 } else { 0.0 };
            let shear = -(k[a] * k[b] - d * k2 / 3.0);
            st.chi[j][slot] = shear * chi_s;
            st.dchi[j][slot] = shear * dchi_s + I * (k[a] * dz[b] + k[b] * dz[a]);
        }
    }
    st
}

/// Energy and momentum constraint residuals per support mode.
#[derive(Debug, Clone)]
pub struct ConstraintResidual {
    pub tau: f64,
    pub energy: Vec<C>,
    pub momentum: Vec<[C; 3]>,
    /// Largest energy residual over the largest single term of that equation.
    pub energy_normalized: f64,
    /// Same for the momentum constraint.
    pub momentum_normalized: f64,
}

/// Residuals of the energy and momentum constraints, LHS minus RHS.
pub fn constraint_residuals_2(
    grid: &Grid3,
    support: &[[i32; 3]],
    state: &ModalState,
    src: &SparseSources,
    conf_h: f64,
    rho_a2: f64,
) -> ConstraintResidual {
    let ks = wavevectors(grid, support);
    let mut energy = Vec::with_capacity(ks.len());
    let mut momentum = Vec::with_capacity(ks.len());
    let (mut e_res, mut e_scale, mut m_res, mut m_scale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (j, k) in ks.iter().enumerate() {
        let c = &src.coeffs[j];
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let chi = mat(&state.chi[j]);
        let dchi = mat(&state.dchi[j]);
        let mut kck = ZERO;
        for a in 0..3 {
            for b in 0..3 {
                kck += k[a] * chi[a][b] * k[b];
            }
        }
        let terms = [
            conf_h * state.dphi[j],
            k2 / 3.0 * state.phi[j],
            0.5 * rho_a2 * state.phi[j],
            kck / 12.0,
            -c[1],
        ];
        let r: C = terms.iter().sum();
        e_res = e_res.max(r.norm());
        e_scale = terms.iter().fold(e_scale, |m, t| m.max(t.norm()));
        energy.push(r);
        let mut mom = [ZERO; 3];
        for b in 0..3 {
            let t1 = 2.0 * I * k[b] * state.dphi[j];
            let t2: C = (0..3).map(|a| 0.5 * I * k[a] * dchi[a][b]).sum();
            let t3 = -c[2 + b];
            mom[b] = t1 + t2 + t3;
            m_res = m_res.max(mom[b].norm());
            m_scale = m_scale.max(t1.norm()).max(t2.norm()).max(t3.norm());
        }
        momentum.push(mom);
    }
    let norm = |r: f64, s: f64| if s > 0.0 { r / s } else { 0.0 };
    ConstraintResidual {
        tau: src.tau,
        energy,
        momentum,
        energy_normalized: norm(e_res, e_scale),
        momentum_normalized: norm(m_res, m_scale),
    }
}

/// Tensor `-(k_a k_b - d_ab k^2/3) c` built from a scalar potential.
fn scalar_tensor(k: &[f64; 3], c: C) -> [C; 6] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    std::array::from_fn(|s| {
        let (a, b) = SYM_PAIRS[s];
        let d = if a == b { 1.0 } else { 0.0 };
        -(k[a] * k[b] - d * k2 / 3.0) * c
    })
}

/// Vector plus tensor part of a symmetric amplitude, and its tensor part.
fn vector_tensor(k: &[f64; 3], v: &[C; 6]) -> ([C; 6], [C; 6]) {
    let mut m = mat(v);
    let third = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    for a in 0..3 {
        m[a][a] -= third;
    }
    let (_, z, pi) = split_mode(*k, &m);
    let vt = std::array::from_fn(|s| {
        let (a, b) = SYM_PAIRS[s];
        pi[a][b] + I * (k[a] * z[b] + k[b] * z[a])
    });
    (vt, std::array::from_fn(|s| pi[SYM_PAIRS[s].0][SYM_PAIRS[s].1]))
}

/// Rate of the scalar potential implied by the momentum constraint.
fn scalar_rate(k: &[f64; 3], n3: &[C], dphi: C) -> C {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return ZERO;
    }
    let kn3: C = (0..3).map(|b| n3[b] * k[b]).sum();
    3.0 * I * kn3 / (k2 * k2) + 6.0 / k2 * dphi
}

/// Per mode: scalar potential (one amplitude), vector-plus-tensor part of
/// the tensor potential and its rate.
struct ChiSystem<'a, P: ?Sized, S: OdeSystem> {
    provider: &'a P,
    phi: &'a CheckpointedSolution<S>,
    ks: Vec<[f64; 3]>,
}

const CHI_STRIDE: usize = 13;

impl<P: SourceProvider + ?Sized, S: OdeSystem> OdeSystem for ChiSystem<'_, P, S> {
    fn dim(&self) -> usize {
        2 * CHI_STRIDE * self.ks.len()
    }

    fn rhs(&self, tau: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let (py, pdy) = self.phi.eval_with_rhs(tau)?;
        let h = -pdy[0] / py[0];
        let src = self.provider.sources(tau)?;
        for (j, k) in self.ks.iter().enumerate() {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let dphi = get(&py[1..], 2 * j + 1);
            let base = CHI_STRIDE * j;
            let c = &src.coeffs[j];
            put(dy, base, scalar_rate(k, &c[2..5], dphi));
            let vt: [C; 6] = std::array::from_fn(|s| get(y, base + 1 + s));
            let dvt: [C; 6] = std::array::from_fn(|s| get(y, base + 7 + s));
            let n4: [C; 6] = std::array::from_fn(|s| c[5 + s]);
            let (n4_vt, _) = vector_tensor(k, &n4);
            let (_, pi) = vector_tensor(k, &vt);
            for s in 0..6 {
                put(dy, base + 1 + s, dvt[s]);
                put(dy, base + 7 + s, -2.0 * h * dvt[s] + 2.0 * n4_vt[s] - k2 * pi[s]);
            }
        }
        Ok(())
    }
}

/// Options for [`evolve_second_order`].
#[derive(Debug, Clone)]
pub struct SecondOrderOptions {
    pub init: SecondOrderInit,
    pub spec: IntegratorSpec,
    /// Abort when a normalized constraint residual exceeds this value.
    pub abort_residual: Option<f64>,
}

impl Default for SecondOrderOptions {
    fn default() -> Self {
        Self {
            init: SecondOrderInit::default(),
            spec: IntegratorSpec::adaptive(1e-13, 1e-11),
            abort_residual: None,
        }
    }
}

/// Sampled second-order solution.
#[derive(Debug, Clone)]
pub struct SecondOrderTrajectory {
    pub grid: Grid3,
    pub support: Vec<[i32; 3]>,
    pub taus: Vec<f64>,
    pub states: Vec<ModalState>,
    pub residuals: Vec<ConstraintResidual>,
    pub conf_h: Vec<f64>,
    pub rho_a2: Vec<f64>,
}

/// Second-order fields on the grid.
#[derive(Debug, Clone)]
pub struct SecondOrderState {
    pub tau: f64,
    pub phi2: ScalarField,
    pub phi2_prime: ScalarField,
    pub chi2: SymTensorField,
    pub chi2_prime: SymTensorField,
}

/// Real field with the given coefficients on canonical modes.
pub fn modal_to_grid(grid: &Grid3, support: &[[i32; 3]], coef: impl Fn(usize) -> C) -> Vec<f64> {
    let mut spec = vec![ZERO; grid.len()];
    for (j, m) in support.iter().enumerate() {
        let v = coef(j);
        spec[grid.flat_mode_index(*m).expect("support inside grid")] += v;
        if *m != [0, 0, 0] {
            spec[grid.flat_mode_index(m.map(|x| -x)).expect("support inside grid")] += v.conj();
        }
    }
    grid.inverse(&spec)
}

impl SecondOrderTrajectory {
    pub fn state_on_grid(&self, i: usize) -> SecondOrderState {
        let (g, sup, st) = (&self.grid, &self.support, &self.states[i]);
        let tensor = |f: &Vec<[C; 6]>| SymTensorField {
            grid: g.clone(),
            comps: std::array::from_fn(|s| modal_to_grid(g, sup, |j| f[j][s])),
        };
        SecondOrderState {
            tau: self.taus[i],
            phi2: ScalarField {
                grid: g.clone(),
                data: modal_to_grid(g, sup, |j| st.phi[j]),
            },
            phi2_prime: ScalarField {
                grid: g.clone(),
                data: modal_to_grid(g, sup, |j| st.dphi[j]),
            },
            chi2: tensor(&st.chi),
            chi2_prime: tensor(&st.dchi),
        }
    }

    pub fn mode_index(&self, m: [i32; 3]) -> Option<usize> {
        self.support.iter().position(|x| *x == m)
    }

    /// Largest normalized constraint residual over the run.
    pub fn max_residual(&self) -> (f64, f64) {
        self.residuals.iter().fold((0.0, 0.0), |(e, m), r| {
            (f64::max(e, r.energy_normalized), f64::max(m, r.momentum_normalized))
        })
    }
}

/// Evolves the second-order scalar with the Raychaudhuri equation and the
/// tensor potential with the evolution equation, sampling at `taus`.
pub fn evolve_second_order<P: SourceProvider + ?Sized>(
    provider: &P,
    bg: &Background,
    taus: &[f64],
    opts: &SecondOrderOptions,
) -> Result<SecondOrderTrajectory> {
    check_taus(bg, taus)?;
    let grid = provider.grid().clone();
    let support = provider.support().to_vec();
    let n = support.len();
    let y0 = bg.y0();
    let init = match &opts.init {
        SecondOrderInit::Zero => ModalState::zeros(n),
        SecondOrderInit::Constrained => {
            let s0 = provider.sources(bg.tau0())?;
            constrained_initial_state(&grid, &support, &s0, bg.conf_h(y0))
        }
        SecondOrderInit::Explicit(st) => {
            if st.phi.len() != n || st.dphi.len() != n || st.chi.len() != n || st.dchi.len() != n {
                return Err(Error::input(
                    "explicit second-order data must have one entry per support mode",
                ));
            }
            st.clone()
        }
    };
    let tau_end = *taus.last().unwrap();
    let raych = RaychaudhuriSource(provider);
    let phi_init: Vec<(C, C)> = init.phi.iter().zip(&init.dphi).map(|(a, b)| (*a, *b)).collect();
    let phi_sol = scalar_solution(2, &raych, bg, &phi_init, tau_end, &opts.spec)?;
    let ks = wavevectors(&grid, &support);
    let sys = ChiSystem {
        provider,
        phi: &phi_sol,
        ks,
    };
    let mut c0 = vec![0.0; sys.dim()];
    for (j, k) in sys.ks.iter().enumerate() {
        let base = CHI_STRIDE * j;
        put(&mut c0, base, scalar_potential(k, &init.chi[j]));
        let (vt, _) = vector_tensor(k, &init.chi[j]);
        let (dvt, _) = vector_tensor(k, &init.dchi[j]);
        for s in 0..6 {
            put(&mut c0, base + 1 + s, vt[s]);
            put(&mut c0, base + 7 + s, dvt[s]);
        }
    }
    let traj = integrate(&sys, bg.tau0(), &c0, taus, &opts.spec).map_err(map_divergence)?;
    let mut out = SecondOrderTrajectory {
        grid: grid.clone(),
        support: support.clone(),
        taus: taus.to_vec(),
        states: Vec::with_capacity(taus.len()),
        residuals: Vec::with_capacity(taus.len()),
        conf_h: Vec::with_capacity(taus.len()),
        rho_a2: Vec::with_capacity(taus.len()),
    };
    for (tau, cy) in traj.t.iter().zip(&traj.y) {
        let py = phi_sol.eval(*tau)?;
        let src = provider.sources(*tau)?;
        let dphi: Vec<C> = (0..n).map(|j| get(&py[1..], 2 * j + 1)).collect();
        let mut chi = Vec::with_capacity(n);
        let mut dchi = Vec::with_capacity(n);
        for (j, k) in sys.ks.iter().enumerate() {
            let base = CHI_STRIDE * j;
            let s0 = scalar_tensor(k, get(cy, base));
            let s1 = scalar_tensor(k, scalar_rate(k, &src.coeffs[j][2..5], dphi[j]));
            chi.push(std::array::from_fn(|s| s0[s] + get(cy, base + 1 + s)));
            dchi.push(std::array::from_fn(|s| s1[s] + get(cy, base + 7 + s)));
        }
        let st = ModalState {
            phi: (0..n).map(|j| get(&py[1..], 2 * j)).collect(),
            dphi,
            chi,
            dchi,
        };
        let (h, ra2) = (bg.conf_h(py[0]), bg.rho_a2(py[0]));
        let res = constraint_residuals_2(&grid, &support, &st, &src, h, ra2);
        if let Some(limit) = opts.abort_residual {
            let worst = res.energy_normalized.max(res.momentum_normalized);
            if worst > limit {
                return Err(Error::ConstraintBlowup {
                    tau: *tau,
                    residual: worst,
                });
            }
        }
        out.states.push(st);
        out.residuals.push(res);
        out.conf_h.push(h);
        out.rho_a2.push(ra2);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{coefficient_a, log_tau_grid, BackgroundParams};
    use crate::first_order::analytic::{analytic_scalar_1_jet, scalar_constants_from_data};
    use crate::first_order::{init_first_order, FirstOrderConfig, ModeSpec, Polarization};
    use crate::second_order::bilinear::FirstOrderSources;
    use std::f64::consts::PI;

    fn late() -> Background {
        Background::asymptotic(0.001, 0.01, -(3.0f64 / 0.001).sqrt()).unwrap()
    }

    fn grid() -> Grid3 {
        Grid3::new(8, 2.0 * PI).unwrap()
    }

    fn quiet(support: Vec<[i32; 3]>, bg: Background) -> FnSourceProvider<impl Fn(f64) -> Result<Vec<[C; 11]>>> {
        let n = support.len();
        FnSourceProvider {
            grid: grid(),
            support,
            bg,
            f: move |_| Ok(vec![[ZERO; 11]; n]),
        }
    }

    #[test]
    fn zero_sources_and_data_stay_zero() {
        let bg = late();
        let p = quiet(vec![[0, 0, 0], [1, 0, 0], [0, 1, 2]], bg);
        let taus = log_tau_grid(bg.tau0(), 2.0, 10);
        let opts = SecondOrderOptions {
            init: SecondOrderInit::Zero,
            ..Default::default()
        };
        let tr = evolve_second_order(&p, &bg, &taus, &opts).unwrap();
        for st in &tr.states {
            assert!(st.phi.iter().chain(&st.dphi).all(|c| *c == ZERO));
            assert!(st.chi.iter().chain(&st.dchi).flatten().all(|c| *c == ZERO));
        }
    }

    #[test]
    fn free_scalar_follows_bessel_solution() {
        let bg = late();
        let a_coef = coefficient_a(0.001, 0.01).unwrap();
        let p = quiet(vec![[0, 0, 0], [1, 0, 0]], bg);
        let mut st = ModalState::zeros(2);
        st.phi = vec![C::new(1e-4, 0.0), C::new(0.0, -2e-5)];
        st.dphi = vec![C::new(3e-6, 0.0), C::new(0.0, 1e-6)];
        let taus = log_tau_grid(bg.tau0(), 2.0, 15);
        let opts = SecondOrderOptions {
            init: SecondOrderInit::Explicit(st.clone()),
            ..Default::default()
        };
        let tr = evolve_second_order(&p, &bg, &taus, &opts).unwrap();
        let consts = [
            scalar_constants_from_data(a_coef, bg.tau0(), 1e-4, 3e-6).unwrap(),
            scalar_constants_from_data(a_coef, bg.tau0(), -2e-5, 1e-6).unwrap(),
        ];
        for (tau, s) in taus.iter().zip(&tr.states) {
            for (j, (c1, c2)) in consts.iter().enumerate() {
                let (v, _) = analytic_scalar_1_jet(*c1, *c2, a_coef, *tau).unwrap();
                let got = if j == 0 { s.phi[j].re } else { s.phi[j].im };
                assert!((got - v).abs() < 1e-6 * v.abs(), "{tau} {got} {v}");
            }
        }
    }

    #[test]
    fn manufactured_tensor_vector_scalar_solution() {
        // tensor f(t)=t^2+1, vector z(t)=t^2 along x, scalar potential t^2 on
        // the late background where H = -1/tau; k along z.
        let bg = late();
        let kz = 1.0;
        let k = [0.0, 0.0, kz];
        let e_t = {
            let mut e = [ZERO; 6];
            e[SYM_INDEX[0][0]] = C::new(1.0, 0.0);
            e[SYM_INDEX[1][1]] = C::new(-1.0, 0.0);
            e
        };
        let e_v = {
            let mut e = [ZERO; 6];
            e[SYM_INDEX[0][2]] = I * kz;
            e
        };
        let exact = move |t: f64| -> ([C; 6], [C; 6]) {
            let s = scalar_tensor(&k, C::new(t * t, 0.0));
            let ds = scalar_tensor(&k, C::new(2.0 * t, 0.0));
            let v = std::array::from_fn(|i| s[i] + e_t[i] * (t * t + 1.0) + e_v[i] * (t * t));
            let dv = std::array::from_fn(|i| ds[i] + (e_t[i] + e_v[i]) * (2.0 * t));
            (v, dv)
        };
        let f = move |t: f64| -> Result<Vec<[C; 11]>> {
            let mut c = [ZERO; 11];
            // chi_s' = 3i k.N3/k^4 = 2t
            c[4] = C::new(0.0, -2.0 * t * kz.powi(3) / 3.0);
            // N4 = (f'' + 2H f' + k^2 f)/2 on the tensor part, (z'' + 2H z')/2 on the vector part
            for i in 0..6 {
                c[5 + i] = 0.5 * (e_t[i] * (-2.0 + kz * kz * (t * t + 1.0)) + e_v[i] * -2.0);
            }
            Ok(vec![c])
        };
        let p = FnSourceProvider {
            grid: grid(),
            support: vec![[0, 0, 1]],
            bg,
            f,
        };
        let (c0, dc0) = exact(bg.tau0());
        let st = ModalState {
            phi: vec![ZERO],
            dphi: vec![ZERO],
            chi: vec![c0],
            dchi: vec![dc0],
        };
        let taus = log_tau_grid(bg.tau0(), 2.0, 12);
        let opts = SecondOrderOptions {
            init: SecondOrderInit::Explicit(st),
            ..Default::default()
        };
        let tr = evolve_second_order(&p, &bg, &taus, &opts).unwrap();
        for (tau, s) in taus.iter().zip(&tr.states) {
            let (v, dv) = exact(*tau);
            let scale = (tau * tau + 1.0).max(1.0);
            for i in 0..6 {
                assert!(
                    (s.chi[0][i] - v[i]).norm() < 1e-7 * scale,
                    "{tau} {i} {} {}",
                    s.chi[0][i],
                    v[i]
                );
                assert!((s.dchi[0][i] - dv[i]).norm() < 1e-7 * scale, "{tau} {i}");
            }
        }
    }

    fn scenario() -> (Background, Vec<f64>, crate::first_order::FirstOrderEvolution) {
        let bg = Background::dust(BackgroundParams::new(0.001, 0.01, 1.0).unwrap());
        let modes = vec![
            ModeSpec::scalar([1, 0, 0], 1e-3),
            ModeSpec::scalar([0, 1, 1], 5e-4).with_phase(0.7),
            ModeSpec::tensor([0, 1, 0], 1e-3, Polarization::Plus).with_phase(0.3),
        ];
        let fo = init_first_order(&FirstOrderConfig::new(modes), &Grid3::new(16, 2.0 * PI).unwrap(), &bg).unwrap();
        let taus = log_tau_grid(bg.tau0(), 2.0, 21);
        let ev = fo
            .evolve(*taus.last().unwrap(), &IntegratorSpec::adaptive(1e-15, 1e-13))
            .unwrap();
        (bg, taus, ev)
    }

    #[test]
    fn constrained_data_keep_constraints() {
        let (bg, taus, ev) = scenario();
        let p = FirstOrderSources::new(&ev);
        let tr = evolve_second_order(&p, &bg, &taus, &SecondOrderOptions::default()).unwrap();
        assert!(tr.residuals[0].energy_normalized < 1e-12);
        let (e, m) = tr.max_residual();
        assert!(e < 1e-4 && m < 1e-4, "{e} {m}");
    }

    #[test]
    fn scalar_route_matches_full_evolution() {
        let (bg, taus, ev) = scenario();
        let p = FirstOrderSources::new(&ev);
        let opts = SecondOrderOptions {
            init: SecondOrderInit::Zero,
            ..Default::default()
        };
        let tr = evolve_second_order(&p, &bg, &taus, &opts).unwrap();
        let init = vec![(ZERO, ZERO); p.support().len()];
        let sc = evolve_scalar_n(2, &RaychaudhuriSource(&p), &bg, &init, &taus, &opts.spec).unwrap();
        for (st, vals) in tr.states.iter().zip(&sc.values) {
            for (a, (b, _)) in st.phi.iter().zip(vals) {
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn order_zero_is_rejected() {
        let bg = late();
        let p = quiet(vec![[0, 0, 0]], bg);
        let taus = [bg.tau0(), bg.tau0() / 2.0];
        let spec = IntegratorSpec::adaptive(1e-12, 1e-10);
        assert!(evolve_scalar_n(0, &RaychaudhuriSource(&p), &bg, &[(ZERO, ZERO)], &taus, &spec).is_err());
        assert!(evolve_scalar_n(3, &RaychaudhuriSource(&p), &bg, &[(ZERO, ZERO)], &taus, &spec).is_ok());
    }
}
