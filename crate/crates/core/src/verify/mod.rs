//! Randomized checks of the inequalities and identities satisfied by the
//! metrics, embeddings and discrete energies, with measured constants.

mod checks;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};

pub use checks::{
    check_metric_equivalence, check_metric_equivalence_with, check_poincare, check_splitting_lemma, check_sqrt_q_bound,
    check_xi, check_zeta_bounds, discrete_differential, random_grid_function, run_all, DiscreteDifferential,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive ranges.
    #[serde(rename = "Q_range")]
    pub q_range: [usize; 2],
    pub n_range: [usize; 2],
    pub m_range: [usize; 2],
    /// Overrides for [`CheckConfig::tolerance`].
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            q_range: [1, 4],
            n_range: [1, 3],
            m_range: [1, 2],
            tolerances: BTreeMap::new(),
        }
    }
}

const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("metric_equivalence", 1e-12),
    ("splitting_lemma", 1e-12),
    ("xi_upper", 1e-12),
    ("xi_isometry", 1e-9),
    ("xi_norm", 1e-12),
    ("sqrt_q_bound", 1e-6),
    ("poincare_constant", 10.0),
    ("zeta", 1e-12),
];

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("Q_range", self.q_range),
            ("n_range", self.n_range),
            ("m_range", self.m_range),
        ] {
            if r[0] == 0 || r[0] > r[1] {
                return invalid(format!(
                    "field '{name}' must be a nonempty range of positive integers, got {r:?}"
                ));
            }
        }
        if self.m_range[1] > 3 {
            return invalid("field 'm_range' is limited to m <= 3");
        }
        if self.trials == 0 {
            return invalid("field 'trials' must be at least 1");
        }
        Ok(())
    }

    /// Tolerance for a named check: the override if present, else the default.
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .unwrap_or(1e-12)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// The check's worst observed ratio; see each check for its meaning.
    pub worst_ratio: f64,
    /// Up to five failing instances.
    pub witnesses: Vec<Value>,
    /// Further measured constants.
    #[serde(default)]
    pub measured: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const MAX_WITNESSES: usize = 5;

/// Accumulates trial outcomes into a report.
pub(crate) struct Tally {
    report: CheckReport,
    minimize: bool,
}

impl Tally {
    /// `minimize` selects whether the worst ratio is the smallest or the
    /// largest one seen.
    pub(crate) fn new(name: &str, minimize: bool) -> Self {
        Self {
            report: CheckReport {
                name: name.to_string(),
                trials: 0,
                failures: 0,
                worst_ratio: if minimize { f64::INFINITY } else { 0.0 },
                witnesses: Vec::new(),
                measured: BTreeMap::new(),
            },
            minimize,
        }
    }

    pub(crate) fn record(&mut self, ratio: f64, ok: bool, witness: impl FnOnce() -> Value) {
        let r = &mut self.report;
        r.trials += 1;
        if ratio.is_finite() {
            r.worst_ratio = if self.minimize {
                r.worst_ratio.min(ratio)
            } else {
                r.worst_ratio.max(ratio)
            };
        }
        if !ok {
            r.failures += 1;
            if r.witnesses.len() < MAX_WITNESSES {
                r.witnesses.push(witness());
            }
        }
    }

    pub(crate) fn measure(&mut self, key: &str, value: f64) {
        self.report.measured.insert(key.to_string(), value);
    }

    pub(crate) fn finish(mut self) -> CheckReport {
        if !self.report.worst_ratio.is_finite() {
            self.report.worst_ratio = 0.0;
        }
        self.report
    }
}
