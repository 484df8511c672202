//! Linear perturbations of the dust + Lambda background in synchronous gauge.

pub mod analytic;
pub mod modes;

use serde::{Deserialize, Serialize};

use crate::background::Background;
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_checkpointed, CheckpointedSolution, IntegratorSpec, OdeSystem, Trajectory};
use crate::spectral::{Grid3, ScalarField, SymTensorField, VectorField, SYM_PAIRS};

pub use analytic::{
    analytic_scalar_1, analytic_scalar_1_jet, analytic_tensor_mode, analytic_vector_1, scalar_constants_from_data,
    Mat3, TensorModeAmplitudes,
};
pub use modes::{
    scalar_offset, tensor_polarization, transverse_basis, vector_polarization, EvolvedAmplitude, EvolvedKind,
    GammaTerm, ModeFamily, ModeSpec, Polarization, ScalarTerm, TimeFn,
};

pub const DEFAULT_EPS_MAX: f64 = 1e-2;

fn default_eps_max() -> f64 {
    DEFAULT_EPS_MAX
}

/// A single Fourier mode of the initial density contrast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityMode {
    pub k: [i32; 3],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// How the initial density contrast is chosen.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Delta0Spec {
    /// Solve the linear energy constraint at `tau0`.
    #[default]
    Constraint,
    Zero,
    Modes {
        modes: Vec<DensityMode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderConfig {
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub delta0: Delta0Spec,
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
}

impl Default for FirstOrderConfig {
    fn default() -> Self {
        Self {
            modes: Vec::new(),
            delta0: Delta0Spec::Constraint,
            eps_max: DEFAULT_EPS_MAX,
        }
    }
}

impl FirstOrderConfig {
    pub fn new(modes: Vec<ModeSpec>) -> Self {
        Self {
            modes,
            ..Self::default()
        }
    }
}

/// Background scale `y = 1/a` together with the evolved amplitudes.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    bg: Background,
    kinds: Vec<EvolvedKind>,
}

impl ModeSystem {
    pub fn new(bg: Background, kinds: Vec<EvolvedKind>) -> Self {
        Self { bg, kinds }
    }

    pub fn background(&self) -> &Background {
        &self.bg
    }
}

impl OdeSystem for ModeSystem {
    fn dim(&self) -> usize {
        1 + 2 * self.kinds.len()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let yb = y[0];
        dy[0] = self.bg.dy(yb);
        let h = self.bg.conf_h(yb);
        let ra2 = self.bg.rho_a2(yb);
        for (i, kind) in self.kinds.iter().enumerate() {
            let (u, v) = (y[1 + 2 * i], y[2 + 2 * i]);
            dy[1 + 2 * i] = v;
            dy[2 + 2 * i] = match *kind {
                EvolvedKind::Scalar => -h * v + 0.5 * ra2 * u,
                EvolvedKind::Tensor { q } => -2.0 * h * v - q * q * u,
            };
        }
        Ok(())
    }
}

fn map_divergence(e: Error) -> Error {
    match e {
        Error::NonFiniteRhs { t } => Error::Divergence {
            last_tau: t,
            reason: "perturbation amplitude diverged".into(),
        },
        other => other,
    }
}

/// Integrates one linear mode equation on the background.
///
/// `init` holds `[u, u']` for scalar and tensor kinds and `[u]` for vectors;
/// the returned trajectory has the same layout. The scalar equation carries
/// no gradient term, so `q` is ignored there.
pub fn evolve_mode_ode(
    bg: &Background,
    family: ModeFamily,
    q: f64,
    init: &[f64],
    taus: &[f64],
    spec: &IntegratorSpec,
) -> Result<Trajectory> {
    for &t in taus {
        bg.check_tau(t)?;
    }
    let y0 = bg.y0();
    let tau0 = bg.tau0();
    let strip = |traj: Trajectory| Trajectory {
        t: traj.t,
        y: traj.y.into_iter().map(|v| v[1..].to_vec()).collect(),
    };
    match family {
        ModeFamily::Vector => {
            if init.len() != 1 {
                return Err(Error::input("vector mode takes one initial value"));
            }
            let sys = crate::numerics::FnSystem::new(2, |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = bg.dy(y[0]);
                dy[1] = -bg.conf_h(y[0]) * y[1];
            });
            Ok(strip(
                integrate(&sys, tau0, &[y0, init[0]], taus, spec).map_err(map_divergence)?,
            ))
        }
        ModeFamily::Scalar | ModeFamily::Tensor => {
            if init.len() != 2 {
                return Err(Error::input("scalar and tensor modes take value and derivative"));
            }
            let kind = if family == ModeFamily::Scalar {
                EvolvedKind::Scalar
            } else {
                EvolvedKind::Tensor { q }
            };
            let sys = ModeSystem::new(*bg, vec![kind]);
            Ok(strip(
                integrate(&sys, tau0, &[y0, init[0], init[1]], taus, spec).map_err(map_divergence)?,
            ))
        }
    }
}

/// Time functions and their first two derivatives at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeJet {
    pub tau: f64,
    pub y: f64,
    pub y0: f64,
    pub dy: f64,
    pub d2y: f64,
    pub amps: Vec<[f64; 3]>,
}

impl TimeJet {
    pub fn eval(&self, t: TimeFn) -> [f64; 3] {
        match t {
            TimeFn::Const => [1.0, 0.0, 0.0],
            TimeFn::InverseScale => [self.y / self.y0, self.dy / self.y0, self.d2y / self.y0],
            TimeFn::Evolved(i) => self.amps[i],
        }
    }
}

/// First-order metric perturbation with its first two time derivatives.
#[derive(Debug, Clone)]
pub struct GammaJet {
    pub tau: f64,
    pub g: SymTensorField,
    pub p: SymTensorField,
    pub pp: SymTensorField,
}

/// Scalar, vector and tensor first-order variables at one instant.
#[derive(Debug, Clone)]
pub struct FirstOrderFields {
    pub tau: f64,
    pub phi1: ScalarField,
    pub chi1: ScalarField,
    pub z1: VectorField,
    pub pi1: SymTensorField,
    pub pi1_modes: Vec<TensorModeAmplitudes>,
    pub snapshot0: SymTensorField,
    pub delta0: ScalarField,
}

/// Perturbed metric variables of a given order; the lapse and shift parts
/// are held at zero in synchronous gauge.
#[derive(Debug, Clone)]
pub struct PerturbedMetric {
    pub order: usize,
    pub psi: ScalarField,
    pub big_phi: ScalarField,
    pub w: VectorField,
    pub phi: ScalarField,
    pub chi: SymTensorField,
}

impl PerturbedMetric {
    pub fn synchronous(order: usize, phi: ScalarField, chi: SymTensorField) -> Result<Self> {
        if order == 0 {
            return Err(Error::input("perturbation order must be positive"));
        }
        phi.grid.ensure_same(&chi.grid)?;
        let g = phi.grid.clone();
        Ok(Self {
            order,
            psi: ScalarField::zeros(&g),
            big_phi: ScalarField::zeros(&g),
            w: VectorField::zeros(&g),
            phi,
            chi,
        })
    }

    pub fn is_synchronous(&self) -> bool {
        self.psi.max_abs() == 0.0 && self.big_phi.max_abs() == 0.0 && self.w.max_abs() == 0.0
    }

    /// `-2 phi delta_ab + chi_ab`.
    pub fn spatial_perturbation(&self) -> SymTensorField {
        let mut out = self.chi.clone();
        out.add_isotropic(-2.0, &self.phi);
        out
    }
}

pub(crate) fn add_cos_term(out: &mut [f64], grid: &Grid3, k: [f64; 3], phase: f64, amp: f64) {
    if amp == 0.0 {
        return;
    }
    for (i, o) in out.iter_mut().enumerate() {
        let x = grid.coords(i);
        *o += amp * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase).cos();
    }
}

/// Validated first-order setup: metric terms, evolved amplitudes and the
/// initial density contrast.
#[derive(Debug, Clone)]
pub struct FirstOrder {
    pub grid: Grid3,
    pub bg: Background,
    pub config: FirstOrderConfig,
    pub terms: Vec<GammaTerm>,
    pub evolved: Vec<EvolvedAmplitude>,
    pub delta0: Vec<ScalarTerm>,
    mode_amp: Vec<Option<usize>>,
}

/// Builds the first-order setup at `tau0` and checks smallness.
pub fn init_first_order(config: &FirstOrderConfig, grid: &Grid3, bg: &Background) -> Result<FirstOrder> {
    if !(config.eps_max > 0.0) {
        return Err(Error::input("eps_max must be positive"));
    }
    let y0 = bg.y0();
    let (terms, evolved) = modes::build_terms(grid, &config.modes, bg.conf_h(y0), bg.rho_a2(y0))?;
    let mut mode_amp = Vec::with_capacity(config.modes.len());
    let mut next = 0;
    for m in &config.modes {
        if m.family == ModeFamily::Vector {
            mode_amp.push(None);
        } else {
            mode_amp.push(Some(next));
            next += 1;
        }
    }
    let mut fo = FirstOrder {
        grid: grid.clone(),
        bg: *bg,
        config: config.clone(),
        terms,
        evolved,
        delta0: Vec::new(),
        mode_amp,
    };
    fo.delta0 = match &config.delta0 {
        Delta0Spec::Zero => Vec::new(),
        Delta0Spec::Modes { modes } => modes
            .iter()
            .map(|d| {
                if d.k != [0, 0, 0] && !grid.in_dealiased_band(d.k) {
                    return Err(Error::Aliasing(format!(
                        "density mode {:?} outside the dealiased band",
                        d.k
                    )));
                }
                let kf = grid.k_fundamental();
                Ok(ScalarTerm {
                    m: d.k,
                    k: d.k.map(|m| kf * m as f64),
                    phase: d.phase,
                    amp: d.amplitude,
                })
            })
            .collect::<Result<_>>()?,
        Delta0Spec::Constraint => fo.constraint_delta0(),
    };
    let gamma0 = fo.gamma0();
    let biggest = config
        .modes
        .iter()
        .map(|m| m.amplitude.abs())
        .fold(gamma0.max_abs(), f64::max);
    if biggest > config.eps_max {
        return Err(Error::AlmostRw {
            amplitude: biggest,
            eps_max: config.eps_max,
        });
    }
    Ok(fo)
}

impl FirstOrder {
    pub fn initial_jet(&self) -> TimeJet {
        let y0 = self.bg.y0();
        let amps = self
            .evolved
            .iter()
            .map(|e| {
                let acc = match e.kind {
                    EvolvedKind::Scalar => -self.bg.conf_h(y0) * e.rate0 + 0.5 * self.bg.rho_a2(y0) * e.value0,
                    EvolvedKind::Tensor { q } => -2.0 * self.bg.conf_h(y0) * e.rate0 - q * q * e.value0,
                };
                [e.value0, e.rate0, acc]
            })
            .collect();
        TimeJet {
            tau: self.bg.tau0(),
            y: y0,
            y0,
            dy: self.bg.dy(y0),
            d2y: self.bg.d2y(y0),
            amps,
        }
    }

    /// Density contrast solving the linearized energy constraint at `tau0`:
    /// `2 rho a^2 delta = 2 H tr(gamma') + d_a d_b gamma_ab - Lap tr(gamma)`.
    fn constraint_delta0(&self) -> Vec<ScalarTerm> {
        let jet = self.initial_jet();
        let y0 = self.bg.y0();
        let h = self.bg.conf_h(y0);
        let ra2 = self.bg.rho_a2(y0);
        if ra2 == 0.0 {
            return Vec::new();
        }
        self.terms
            .iter()
            .map(|t| {
                let [g, gp, _] = jet.eval(t.time);
                let p = &t.pattern;
                let k = t.k;
                let tr = p[0][0] + p[1][1] + p[2][2];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let kpk: f64 = (0..3)
                    .flat_map(|a| (0..3).map(move |b| (a, b)))
                    .map(|(a, b)| k[a] * p[a][b] * k[b])
                    .sum();
                let amp = (2.0 * h * tr * gp + (k2 * tr - kpk) * g) / (2.0 * ra2);
                ScalarTerm {
                    m: t.m,
                    k,
                    phase: t.phase,
                    amp,
                }
            })
            .collect()
    }

    pub fn delta0_field(&self) -> ScalarField {
        let mut f = ScalarField::zeros(&self.grid);
        for t in &self.delta0 {
            add_cos_term(&mut f.data, &self.grid, t.k, t.phase, t.amp);
        }
        f
    }

    pub fn gamma_jet_from(&self, jet: &TimeJet) -> GammaJet {
        let mut out = [
            SymTensorField::zeros(&self.grid),
            SymTensorField::zeros(&self.grid),
            SymTensorField::zeros(&self.grid),
        ];
        let mut profile = vec![0.0; self.grid.len()];
        for t in &self.terms {
            profile.iter_mut().for_each(|v| *v = 0.0);
            add_cos_term(&mut profile, &self.grid, t.k, t.phase, 1.0);
            let gs = jet.eval(t.time);
            for (field, g) in out.iter_mut().zip(gs) {
                if g == 0.0 {
                    continue;
                }
                for (slot, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                    let c = t.pattern[a][b] * g;
                    if c != 0.0 {
                        for (o, p) in field.comps[slot].iter_mut().zip(&profile) {
                            *o += c * p;
                        }
                    }
                }
            }
        }
        let [g, p, pp] = out;
        GammaJet { tau: jet.tau, g, p, pp }
    }

    /// First-order perturbation at `tau0`.
    pub fn gamma0(&self) -> SymTensorField {
        self.gamma_jet_from(&self.initial_jet()).g
    }

    pub fn fields_from(&self, jet: &TimeJet) -> Result<FirstOrderFields> {
        let grid = &self.grid;
        let mut phi1 = ScalarField::zeros(grid);
        let mut chi1 = ScalarField::zeros(grid);
        let mut z1 = VectorField::zeros(grid);
        let mut pi1 = SymTensorField::zeros(grid);
        let mut pi1_modes = Vec::new();
        for (mode, amp_id) in self.config.modes.iter().zip(&self.mode_amp) {
            let k = mode.wavevector(grid);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let amp = mode.amplitude;
            match mode.family {
                ModeFamily::Scalar => {
                    let [t, _, _] = jet.amps[amp_id.unwrap()];
                    add_cos_term(&mut phi1.data, grid, k, mode.phase, amp * t);
                    let y0 = self.bg.y0();
                    let off = modes::scalar_offset(mode, k2, self.bg.conf_h(y0), self.bg.rho_a2(y0));
                    add_cos_term(&mut chi1.data, grid, k, mode.phase, amp * (6.0 / k2 * t + off));
                }
                ModeFamily::Vector => {
                    let e = vector_polarization(k, mode.polarization);
                    let f = jet.y / jet.y0;
                    for a in 0..3 {
                        add_cos_term(&mut z1.comps[a], grid, k, mode.phase, amp * f * e[a]);
                    }
                }
                ModeFamily::Tensor => {
                    let [t, tp, _] = jet.amps[amp_id.unwrap()];
                    let e = tensor_polarization(k, mode.polarization);
                    for (slot, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                        add_cos_term(&mut pi1.comps[slot], grid, k, mode.phase, amp * t * e[a][b]);
                    }
                    let ea = e.map(|r| r.map(|v| amp * v));
                    pi1_modes.push(TensorModeAmplitudes::from_data(k2.sqrt(), k, ea, jet.tau, t, tp)?);
                }
            }
        }
        Ok(FirstOrderFields {
            tau: jet.tau,
            phi1,
            chi1,
            z1,
            pi1,
            pi1_modes,
            snapshot0: self.gamma0(),
            delta0: self.delta0_field(),
        })
    }

    /// Integrates the amplitudes from `tau0` to `tau_end`, keeping every step.
    pub fn evolve(&self, tau_end: f64, spec: &IntegratorSpec) -> Result<FirstOrderEvolution> {
        if !(tau_end < 0.0) {
            return Err(Error::range(format!("tau_end = {tau_end} must be negative")));
        }
        let sys = ModeSystem::new(self.bg, self.evolved.iter().map(|e| e.kind).collect());
        let mut y0 = vec![self.bg.y0()];
        for e in &self.evolved {
            y0.push(e.value0);
            y0.push(e.rate0);
        }
        let solution = integrate_checkpointed(sys, self.bg.tau0(), &y0, tau_end, *spec).map_err(map_divergence)?;
        Ok(FirstOrderEvolution {
            setup: self.clone(),
            solution,
        })
    }
}

/// Evolved first-order solution; evaluation at any covered time re-takes one
/// integrator step from the preceding checkpoint.
pub struct FirstOrderEvolution {
    pub setup: FirstOrder,
    solution: CheckpointedSolution<ModeSystem>,
}

impl FirstOrderEvolution {
    pub fn tau_end(&self) -> f64 {
        self.solution.t_end()
    }

    pub fn time_jet(&self, tau: f64) -> Result<TimeJet> {
        let (y, dy) = self.solution.eval_with_rhs(tau)?;
        let n = self.setup.evolved.len();
        let amps = (0..n).map(|i| [y[1 + 2 * i], dy[1 + 2 * i], dy[2 + 2 * i]]).collect();
        let bg = &self.setup.bg;
        Ok(TimeJet {
            tau,
            y: y[0],
            y0: bg.y0(),
            dy: dy[0],
            d2y: bg.d2y(y[0]),
            amps,
        })
    }

    pub fn gamma_jet(&self, tau: f64) -> Result<GammaJet> {
        Ok(self.setup.gamma_jet_from(&self.time_jet(tau)?))
    }

    pub fn fields_at(&self, tau: f64) -> Result<FirstOrderFields> {
        self.setup.fields_from(&self.time_jet(tau)?)
    }
}

/// First-order momentum constraint `d_a gamma'_ab - d_b tr(gamma')`.
pub fn momentum_constraint_residual_1(gamma_prime: &SymTensorField) -> VectorField {
    let mut div = gamma_prime.divergence();
    let tr = gamma_prime.trace();
    for b in 0..3 {
        let d = crate::spectral::spectral_derivative(&tr, &[b]).expect("first derivative");
        for (o, v) in div.comps[b].iter_mut().zip(&d.data) {
            *o -= v;
        }
    }
    div
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{coefficient_a, BackgroundParams};
    use crate::spectral::svt_decompose;
    use std::f64::consts::PI;

    fn dust() -> Background {
        Background::dust(BackgroundParams::new(0.001, 0.01, 1.0).unwrap())
    }

    fn late() -> Background {
        Background::asymptotic(0.001, 0.01, -(3.0f64 / 0.001).sqrt()).unwrap()
    }

    fn spec() -> IntegratorSpec {
        IntegratorSpec::adaptive(1e-14, 1e-12)
    }

    fn samples(bg: &Background, decades: f64) -> Vec<f64> {
        crate::background::log_tau_grid(bg.tau0(), decades, 20)
    }

    #[test]
    fn zero_data_stays_zero() {
        let bg = dust();
        for (fam, init) in [
            (ModeFamily::Scalar, vec![0.0, 0.0]),
            (ModeFamily::Tensor, vec![0.0, 0.0]),
            (ModeFamily::Vector, vec![0.0]),
        ] {
            let tr = evolve_mode_ode(&bg, fam, 1.0, &init, &samples(&bg, 2.0), &spec()).unwrap();
            assert!(tr.y.iter().flatten().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn vector_times_scale_factor_is_constant() {
        let bg = dust();
        let taus = samples(&bg, 3.0);
        let tr = evolve_mode_ode(&bg, ModeFamily::Vector, 0.0, &[0.7], &taus, &spec()).unwrap();
        let states = bg.evolve(&taus, &crate::background::background_spec()).unwrap();
        let first = tr.y[0][0] * states[0].a;
        for (y, s) in tr.y.iter().zip(&states) {
            assert!((y[0] * s.a / first - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn scalar_matches_bessel_solution_on_late_background() {
        let bg = late();
        let a_coef = coefficient_a(0.001, 0.01).unwrap();
        let tau0 = bg.tau0();
        let (c1, c2) = scalar_constants_from_data(a_coef, tau0, 1.0, 0.02).unwrap();
        let taus = samples(&bg, 2.0);
        let tr = evolve_mode_ode(&bg, ModeFamily::Scalar, 0.0, &[1.0, 0.02], &taus, &spec()).unwrap();
        for (t, y) in tr.t.iter().zip(&tr.y) {
            let exact = analytic_scalar_1(c1, c2, a_coef, *t).unwrap();
            assert!((y[0] - exact).abs() < 1e-6 * exact.abs(), "{t} {} {exact}", y[0]);
        }
    }

    #[test]
    fn tensor_matches_closed_form_on_late_background() {
        let bg = late();
        let tau0 = bg.tau0();
        let e = tensor_polarization([1.0, 0.0, 0.0], Polarization::Plus);
        let m = TensorModeAmplitudes::from_data(1.0, [1.0, 0.0, 0.0], e, tau0, 1.0, 0.0).unwrap();
        let taus = samples(&bg, 3.0);
        let tr = evolve_mode_ode(&bg, ModeFamily::Tensor, 1.0, &[1.0, 0.0], &taus, &spec()).unwrap();
        let scale = m.k[1][1].abs().max(m.f[1][1].abs()) * 3.0;
        for (t, y) in tr.t.iter().zip(&tr.y) {
            let exact = analytic_tensor_mode(&m, *t)[1][1] / e[1][1];
            assert!((y[0] - exact).abs() < 1e-8 * scale.max(1.0), "{t}");
        }
    }

    #[test]
    fn rejects_times_outside_coverage() {
        let bg = dust();
        assert!(evolve_mode_ode(&bg, ModeFamily::Scalar, 0.0, &[1.0, 0.0], &[bg.tau0() * 2.0], &spec()).is_err());
    }

    fn grid() -> Grid3 {
        Grid3::new(8, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_amplitude_gives_zero_fields() {
        let modes = vec![
            ModeSpec::scalar([1, 0, 0], 0.0),
            ModeSpec::tensor([0, 1, 0], 0.0, Polarization::Cross),
        ];
        let fo = init_first_order(&FirstOrderConfig::new(modes), &grid(), &dust()).unwrap();
        let f = fo.fields_from(&fo.initial_jet()).unwrap();
        assert_eq!(f.snapshot0.max_abs(), 0.0);
        assert_eq!(f.phi1.max_abs() + f.chi1.max_abs() + f.delta0.max_abs(), 0.0);
    }

    #[test]
    fn scalar_sector_obeys_momentum_relation() {
        let g = grid();
        let modes = vec![ModeSpec::scalar([1, 2, 0], 1e-3).with_rate(0.05).with_phase(0.3)];
        let fo = init_first_order(&FirstOrderConfig::new(modes), &g, &dust()).unwrap();
        let ev = fo.evolve(fo.bg.tau0() / 10.0, &spec()).unwrap();
        let tau = fo.bg.tau0() / 2.0;
        let jet = ev.time_jet(tau).unwrap();
        let gj = fo.gamma_jet_from(&jet);
        let res = momentum_constraint_residual_1(&gj.p);
        assert!(res.max_abs() < 1e-12 * gj.p.max_abs(), "{}", res.max_abs());
        let k2 = 5.0;
        let [_, tp, _] = jet.amps[0];
        let fields = fo.fields_from(&jet).unwrap();
        let dchi = 6.0 / k2 * tp;
        assert!((dchi / tp - 6.0 / k2).abs() < 1e-12);
        let trace = gj.g.trace();
        for i in 0..g.len() {
            assert!((trace.data[i] + 6.0 * fields.phi1.data[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn mixed_gamma_splits_into_its_parts() {
        let g = grid();
        let modes = vec![
            ModeSpec::scalar([1, 0, 1], 1e-3),
            ModeSpec::vector([0, 1, 0], 2e-4, Polarization::Cross),
            ModeSpec::tensor([1, 1, 0], 5e-4, Polarization::Plus).with_phase(1.0),
        ];
        let fo = init_first_order(&FirstOrderConfig::new(modes), &g, &dust()).unwrap();
        let f = fo.fields_from(&fo.initial_jet()).unwrap();
        let parts = svt_decompose(&f.snapshot0).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        let phi_from_trace: Vec<f64> = parts.trace.data.iter().map(|t| -t / 2.0).collect();
        assert!(close(&phi_from_trace, &f.phi1.data));
        assert!(close(&parts.chi.data, &f.chi1.data));
        for a in 0..3 {
            assert!(close(&parts.z.comps[a], &f.z1.comps[a]));
        }
        assert!(parts.pi.sub(&f.pi1).max_abs() < 1e-15);
        assert!(f.z1.divergence().max_abs() < 1e-15);
    }

    #[test]
    fn constraint_density_satisfies_energy_constraint() {
        let g = grid();
        let modes = vec![
            ModeSpec::scalar([1, 1, 0], 1e-3).with_rate(0.01),
            ModeSpec::tensor([0, 0, 1], 1e-3, Polarization::Plus),
        ];
        let bg = dust();
        let fo = init_first_order(&FirstOrderConfig::new(modes), &g, &bg).unwrap();
        let jet = fo.gamma_jet_from(&fo.initial_jet());
        let y0 = bg.y0();
        let tr_p = jet.p.trace();
        let tr_g = jet.g.trace();
        let ddg = jet.g.divergence().divergence();
        let lap = crate::spectral::laplacian(&tr_g);
        let delta = fo.delta0_field();
        for i in 0..g.len() {
            let rhs = 2.0 * bg.conf_h(y0) * tr_p.data[i] + ddg.data[i] - lap.data[i];
            assert!((2.0 * bg.rho_a2(y0) * delta.data[i] - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_constraint_propagates_with_conserved_dust() {
        let g = grid();
        let modes = vec![
            ModeSpec::scalar([1, 1, 0], 1e-3).with_rate(0.02),
            ModeSpec::scalar([0, 0, 2], 5e-4).with_phase(0.4),
        ];
        let bg = dust();
        let fo = init_first_order(&FirstOrderConfig::new(modes), &g, &bg).unwrap();
        let ev = fo.evolve(bg.tau0() / 100.0, &spec()).unwrap();
        let tr0 = fo.gamma0().trace();
        let d0 = fo.delta0_field();
        for tau in [bg.tau0() / 3.0, bg.tau0() / 50.0] {
            let jet = ev.time_jet(tau).unwrap();
            let gj = fo.gamma_jet_from(&jet);
            let tr = gj.g.trace();
            let ddg = gj.g.divergence().divergence();
            let lap = crate::spectral::laplacian(&tr);
            let tr_p = gj.p.trace();
            let (h, ra2) = (bg.conf_h(jet.y), bg.rho_a2(jet.y));
            let mut worst: f64 = 0.0;
            for i in 0..g.len() {
                let delta = d0.data[i] - 0.5 * (tr.data[i] - tr0.data[i]);
                let rhs = 2.0 * h * tr_p.data[i] + ddg.data[i] - lap.data[i];
                worst = worst.max((2.0 * ra2 * delta - rhs).abs() / (2.0 * ra2 * delta.abs() + rhs.abs()).max(1e-30));
            }
            assert!(worst < 1e-8, "{tau}: {worst}");
        }
    }

    #[test]
    fn large_amplitude_is_rejected() {
        let cfg = FirstOrderConfig::new(vec![ModeSpec::scalar([1, 0, 0], 0.5)]);
        assert!(matches!(
            init_first_order(&cfg, &grid(), &dust()),
            Err(Error::AlmostRw { .. })
        ));
    }

    #[test]
    fn pi_modes_tend_to_constant() {
        let g = grid();
        let fo = init_first_order(
            &FirstOrderConfig::new(vec![ModeSpec::tensor([1, 0, 0], 1e-3, Polarization::Plus)]),
            &g,
            &dust(),
        )
        .unwrap();
        let ev = fo.evolve(fo.bg.tau0() / 1000.0, &spec()).unwrap();
        let ta = fo.bg.tau0() / 500.0;
        let a = ev.time_jet(ta).unwrap().amps[0][0];
        let b = ev.time_jet(fo.bg.tau0() / 1000.0).unwrap().amps[0][0];
        assert!((a - b).abs() < ta * ta * a.abs());
    }
}
