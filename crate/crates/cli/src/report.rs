//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One verified quantity inside an experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub computed: f64,
    pub target: f64,
    /// absolute | relative | ci-overlap | upper-bound
    pub policy: String,
    pub tolerance: f64,
    pub gap: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn absolute(name: impl Into<String>, computed: f64, target: f64, tol: f64) -> Self {
        let gap = (computed - target).abs();
        CheckRow {
            name: name.into(),
            computed,
            target,
            policy: "absolute".into(),
            tolerance: tol,
            gap,
            pass: gap <= tol,
        }
    }

    pub fn relative(name: impl Into<String>, computed: f64, target: f64, tol: f64) -> Self {
        let gap = (computed - target).abs() / target.abs().max(1e-12);
        CheckRow {
            name: name.into(),
            computed,
            target,
            policy: "relative".into(),
            tolerance: tol,
            gap,
            pass: gap <= tol && computed.is_finite(),
        }
    }

    /// Statistical agreement: |computed - target| within the supplied
    /// confidence half-width.
    pub fn ci_overlap(name: impl Into<String>, computed: f64, target: f64, ci: f64) -> Self {
        let gap = (computed - target).abs();
        CheckRow {
            name: name.into(),
            computed,
            target,
            policy: "ci-overlap".into(),
            tolerance: ci,
            gap,
            pass: gap <= ci,
        }
    }

    /// One-sided bound: computed must not exceed the target.
    pub fn upper_bound(name: impl Into<String>, computed: f64, bound: f64) -> Self {
        CheckRow {
            name: name.into(),
            computed,
            target: bound,
            policy: "upper-bound".into(),
            tolerance: 0.0,
            gap: computed - bound,
            pass: computed <= bound,
        }
    }
}

/// Self-contained record of one experiment run: every check with its policy,
/// plot-ready curves, and the effective configuration needed to re-run it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    /// The identity this experiment verifies, in plain words.
    pub identity: String,
    pub geometry: String,
    pub route: String,
    pub seed: u64,
    pub pass: bool,
    pub runtime_seconds: f64,
    pub checks: Vec<CheckRow>,
    /// Named columnar data: rows of [x, y, ...] ready for plotting.
    pub curves: BTreeMap<String, Vec<Vec<f64>>>,
    /// Effective configuration (defaults merged with overrides).
    pub config_echo: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn finalize(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One human line per check, for console output.
    pub fn console_lines(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.checks.len() + 1);
        for c in &self.checks {
            out.push(format!(
                "  [{}] {} : computed {:.6e} vs {:.6e} ({} {:.2e}, gap {:.2e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.computed,
                c.target,
                c.policy,
                c.tolerance,
                c.gap,
            ));
        }
        out.push(format!(
            "{} {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.experiment,
            self.runtime_seconds
        ));
        out
    }
}
