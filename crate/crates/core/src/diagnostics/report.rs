//! Time series of De Sitter indicators and their pass/fail verdicts.

use serde::{Deserialize, Serialize};

use super::{diagnose_at, MetricSource, SliceDiagnostics};
use crate::background::Background;
use crate::error::{Error, Result};
use crate::second_order::asymptotics::asymptotic_window;
use crate::table::Table;

/// Limit the squared expansion is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta2Target {
    /// `3 Lambda`, the value for a De Sitter expansion rate.
    #[default]
    ThreeLambda,
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub theta2_target: Theta2Target,
    /// Smallest accepted decay order of the vanishing indicators.
    pub min_order: f64,
    /// Relative tolerance of the limits of `theta^2` and `R` at `tau0/100`.
    pub limit_rel_tol: f64,
    /// Stencil spacing relative to `|tau|`.
    pub rel_step: f64,
    /// Indicators whose final-decade maximum is below `floor * Lambda`
    /// pass without a decay order.
    pub floor: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            theta2_target: Theta2Target::ThreeLambda,
            min_order: 1.5,
            limit_rel_tol: 0.01,
            rel_step: 1e-3,
            floor: 1e-10,
        }
    }
}

/// Grid maxima at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub tau: f64,
    pub s: f64,
    /// Grid mean of `theta^2`.
    pub theta2_mean: f64,
    pub theta2_minus_3lambda: f64,
    pub theta2_minus_lambda: f64,
    pub sigma2: f64,
    pub omega2: f64,
    pub r4_minus_4lambda: f64,
    pub rstar: f64,
    pub e_norm: f64,
    pub h_norm: f64,
    /// Difference of the two electric-part routes over `a^2`.
    pub e_route_gap: f64,
    /// Energy constraint residual over its largest term.
    pub energy_constraint: f64,
}

const COLUMNS: [&str; 13] = [
    "tau",
    "s",
    "theta2_mean",
    "theta2_minus_3lambda",
    "theta2_minus_lambda",
    "sigma2",
    "omega2",
    "r4_minus_4lambda",
    "rstar",
    "e_norm",
    "h_norm",
    "e_route_gap",
    "energy_constraint",
];

impl ReportRow {
    fn values(&self) -> [f64; 13] {
        [
            self.tau,
            self.s,
            self.theta2_mean,
            self.theta2_minus_3lambda,
            self.theta2_minus_lambda,
            self.sigma2,
            self.omega2,
            self.r4_minus_4lambda,
            self.rstar,
            self.e_norm,
            self.h_norm,
            self.e_route_gap,
            self.energy_constraint,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Indicator {
    pub name: String,
    /// Decay order over the final decade; NaN when the series vanishes.
    pub order: f64,
    /// Value entering the verdict.
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub lambda: f64,
    pub theta2_target: Theta2Target,
    pub rows: Vec<ReportRow>,
    pub indicators: Vec<Indicator>,
    pub pass: bool,
}

/// Slope of `log v` against `log |tau|` by least squares; NaN with fewer
/// than two positive values.
pub fn power_law_order(taus: &[f64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (t.abs().ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn row(d: &SliceDiagnostics, lambda: f64, rho_sqrt_det: &[f64]) -> ReportRow {
    let k = &d.kinematics;
    let th2 = || k.theta.data.iter().map(|t| t * t);
    let a2 = d.sqrt_det.data.iter().map(|s| s.powf(2.0 / 3.0)).fold(0.0, f64::max);
    let mut gap = d.weyl.e.clone();
    gap.axpy(-1.0, &d.e_gauss);
    let energy = (0..d.sqrt_det.data.len())
        .map(|i| {
            let rho = rho_sqrt_det[i] / d.sqrt_det.data[i];
            let t = k.theta.data[i];
            let terms = [
                k.rstar.data[i],
                2.0 / 3.0 * t * t,
                -2.0 * k.sigma2.data[i],
                -2.0 * rho,
                -2.0 * lambda,
            ];
            terms.iter().sum::<f64>().abs() / terms.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        })
        .fold(0.0, f64::max);
    ReportRow {
        tau: d.tau,
        s: -d.tau,
        theta2_mean: th2().sum::<f64>() / k.theta.data.len() as f64,
        theta2_minus_3lambda: max_abs(th2().map(|v| v - 3.0 * lambda)),
        theta2_minus_lambda: max_abs(th2().map(|v| v - lambda)),
        sigma2: max_abs(k.sigma2.data.iter().copied()),
        omega2: max_abs(k.omega2.data.iter().copied()),
        r4_minus_4lambda: max_abs(k.r4.data.iter().map(|r| r - 4.0 * lambda)),
        rstar: max_abs(k.rstar.data.iter().copied()),
        e_norm: max_abs(d.e_norm.data.iter().copied()),
        h_norm: max_abs(d.h_norm.data.iter().copied()),
        e_route_gap: gap.max_abs() / a2,
        energy_constraint: energy,
    }
}

/// Evaluates the indicators at `taus` (increasing, strictly after `tau0`,
/// spanning at least two decades and reaching `tau0/100`), fits decay
/// orders over the final decade and applies the thresholds of `cfg`.
pub fn convergence_report(
    source: &dyn MetricSource,
    bg: &Background,
    taus: &[f64],
    cfg: &ReportConfig,
) -> Result<ConvergenceReport> {
    let (first, last) = match (taus.first(), taus.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::range("no report times")),
    };
    let tau0 = bg.tau0();
    if last.abs() > tau0.abs() / 100.0 {
        return Err(Error::range(format!(
            "run ends at tau = {last}, needs |tau| <= {}",
            tau0.abs() / 100.0
        )));
    }
    if first.abs() < 100.0 * last.abs() {
        return Err(Error::range("report must cover at least two decades of |tau|"));
    }
    let lambda = bg.params.lambda();
    let mut rows = Vec::with_capacity(taus.len());
    let mut rho_sqrt_det: Vec<f64> = Vec::new();
    for &tau in taus {
        let d = diagnose_at(source, tau, cfg.rel_step)?;
        if rho_sqrt_det.is_empty() {
            let k = &d.kinematics;
            rho_sqrt_det = (0..d.sqrt_det.data.len())
                .map(|i| {
                    let t = k.theta.data[i];
                    let rho = 0.5 * (k.rstar.data[i] + 2.0 / 3.0 * t * t - 2.0 * k.sigma2.data[i]) - lambda;
                    rho * d.sqrt_det.data[i]
                })
                .collect();
        }
        rows.push(row(&d, lambda, &rho_sqrt_det));
    }
    let w = asymptotic_window(taus)?;
    let wt = &taus[w.clone()];
    let check = (0..taus.len())
        .min_by(|&i, &j| {
            let f = |t: f64| (t.abs().ln() - (tau0.abs() / 100.0).ln()).abs();
            f(taus[i]).total_cmp(&f(taus[j]))
        })
        .expect("non-empty");
    let mut indicators = Vec::new();
    let decay = |name: &str, f: &dyn Fn(&ReportRow) -> f64| {
        let vals: Vec<f64> = rows[w.clone()].iter().map(f).collect();
        let order = power_law_order(wt, &vals);
        let worst = max_abs(vals.iter().copied());
        let pass = worst <= cfg.floor * lambda || order >= cfg.min_order;
        Indicator {
            name: name.into(),
            order,
            value: worst,
            threshold: cfg.min_order,
            pass,
        }
    };
    indicators.push(decay("sigma2", &|r| r.sigma2));
    indicators.push(decay("rstar", &|r| r.rstar));
    indicators.push(decay("e_norm", &|r| r.e_norm));
    indicators.push(decay("h_norm", &|r| r.h_norm));
    let omega = max_abs(rows.iter().map(|r| r.omega2));
    indicators.push(Indicator {
        name: "omega2".into(),
        order: f64::NAN,
        value: omega,
        threshold: 0.0,
        pass: omega == 0.0,
    });
    let (target, dev) = match cfg.theta2_target {
        Theta2Target::ThreeLambda => (3.0 * lambda, rows[check].theta2_minus_3lambda),
        Theta2Target::Lambda => (lambda, rows[check].theta2_minus_lambda),
    };
    let rel = dev / target;
    indicators.push(Indicator {
        name: "theta2_limit".into(),
        order: f64::NAN,
        value: rel,
        threshold: cfg.limit_rel_tol,
        pass: rel <= cfg.limit_rel_tol,
    });
    let r4 = rows[check].r4_minus_4lambda / (4.0 * lambda);
    indicators.push(Indicator {
        name: "r4_limit".into(),
        order: f64::NAN,
        value: r4,
        threshold: cfg.limit_rel_tol,
        pass: r4 <= cfg.limit_rel_tol,
    });
    let pass = indicators.iter().all(|i| i.pass);
    Ok(ConvergenceReport {
        lambda,
        theta2_target: cfg.theta2_target,
        rows,
        indicators,
        pass,
    })
}

impl ConvergenceReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&COLUMNS);
        for r in &self.rows {
            t.push(r.values().to_vec()).expect("row matches header");
        }
        t
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}
