//! Acceptance checks, each a self-contained run against an independent
//! oracle with a fixed tolerance.

use std::fmt;
use std::time::Instant;

use crate::error::Result;

mod asymptotics;
mod background;
mod convergence;
mod determinism;
mod fd_oracle;
mod first_order;
mod order_n;
mod second_order;
mod sources;
mod svt;

/// One measured quantity and its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
    /// Informational.
    None,
}

impl Metric {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtMost(limit),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtLeast(limit),
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::Within(lo, hi),
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::None,
        }
    }

    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::AtMost(l) => self.value <= l,
            Bound::AtLeast(l) => self.value >= l,
            Bound::Within(lo, hi) => self.value >= lo && self.value <= hi,
            Bound::None => true,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::AtMost(l) => write!(f, "{}={:.3e} (<= {l:.0e})", self.name, self.value),
            Bound::AtLeast(l) => write!(f, "{}={:.3} (>= {l})", self.name, self.value),
            Bound::Within(lo, hi) => write!(f, "{}={:.3} (in [{lo}, {hi}])", self.name, self.value),
            Bound::None => write!(f, "{}={:.3e}", self.name, self.value),
        }
    }
}

/// Result of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.metrics.iter().all(Metric::pass) && self.seconds <= self.budget_seconds
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .metrics
            .iter()
            .filter(|m| !m.pass())
            .map(|m| m.to_string())
            .collect();
        if let Some(e) = &self.error {
            out.push(format!("error: {e}"));
        }
        if self.seconds > self.budget_seconds {
            out.push(format!(
                "runtime {:.2}s over budget {:.0}s",
                self.seconds, self.budget_seconds
            ));
        }
        out
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} [{verdict}] {} ({:.2}s)",
            self.id, self.title, self.seconds
        )?;
        for m in &self.metrics {
            let mark = if m.pass() { "" } else { " !" };
            write!(f, "\n    {m}{mark}")?;
        }
        if let Some(e) = &self.error {
            write!(f, "\n    error: {e}")?;
        }
        Ok(())
    }
}

pub struct Check {
    pub id: usize,
    pub title: &'static str,
    pub budget_seconds: f64,
    run: fn() -> Result<Vec<Metric>>,
}

/// All criteria in order.
pub const CHECKS: [Check; 9] = [
    Check {
        id: 1,
        title: "background",
        budget_seconds: 1.0,
        run: background::run,
    },
    Check {
        id: 2,
        title: "first-order oracles",
        budget_seconds: 10.0,
        run: first_order::run,
    },
    Check {
        id: 3,
        title: "SVT decomposition",
        budget_seconds: 10.0,
        run: svt::run,
    },
    Check {
        id: 4,
        title: "source correctness",
        budget_seconds: 60.0,
        run: sources::run,
    },
    Check {
        id: 5,
        title: "second-order evolution",
        budget_seconds: 300.0,
        run: second_order::run,
    },
    Check {
        id: 6,
        title: "asymptotics",
        budget_seconds: 300.0,
        run: asymptotics::run,
    },
    Check {
        id: 7,
        title: "de Sitter convergence",
        budget_seconds: 300.0,
        run: convergence::run,
    },
    Check {
        id: 8,
        title: "order-n driver",
        budget_seconds: 300.0,
        run: order_n::run,
    },
    Check {
        id: 9,
        title: "determinism",
        budget_seconds: 300.0,
        run: determinism::run,
    },
];

impl Check {
    pub fn run(&self) -> Outcome {
        let t = Instant::now();
        let (metrics, error) = match (self.run)() {
            Ok(m) => (m, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        Outcome {
            id: self.id,
            title: self.title,
            metrics,
            error,
            seconds: t.elapsed().as_secs_f64(),
            budget_seconds: self.budget_seconds,
        }
    }
}

/// Runs the selected criteria (all when `ids` is empty).
pub fn run_checks(ids: &[usize]) -> Vec<Outcome> {
    CHECKS
        .iter()
        .filter(|c| ids.is_empty() || ids.contains(&c.id))
        .map(Check::run)
        .collect()
}

/// Largest `|a - b| / scale` over paired samples.
pub(crate) fn max_rel(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>, scale: f64) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}
