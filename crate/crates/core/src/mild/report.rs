use serde::{Deserialize, Serialize};

use crate::paths::csv_fmt as fmt_f64;

/// Diagnostics of one Picard run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// ℍ_T norms of `u^{k+1} − u^k`.
    pub increments: Vec<f64>,
    /// `increments[k+1] / increments[k]`.
    pub ratios: Vec<f64>,
    /// `‖𝕃u − u‖_{ℍ_T}` at the returned iterate.
    pub residual: f64,
    pub horizon: f64,
    /// Largest ℍ_T norm over all iterates.
    pub beta: f64,
    pub halvings: usize,
    pub converged: bool,
}

impl SolverReport {
    pub(crate) fn push_increment(&mut self, inc: f64) {
        if let Some(&prev) = self.increments.last() {
            self.ratios.push(if prev > 0.0 { inc / prev } else { f64::NAN });
        }
        self.increments.push(inc);
        self.iterations = self.increments.len();
    }

    /// Number of trailing ratios that are `>= 1` (or undefined).
    pub(crate) fn trailing_expansions(&self) -> usize {
        self.ratios.iter().rev().take_while(|r| !(**r < 1.0)).count()
    }

    pub fn last_ratio(&self) -> Option<f64> {
        self.ratios.last().copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `key = value` line per metric.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        s.push_str(&format!("converged = {}\n", self.converged));
        s.push_str(&format!("iterations = {}\n", self.iterations));
        s.push_str(&format!("increments = {}\n", list(&self.increments)));
        s.push_str(&format!("ratios = {}\n", list(&self.ratios)));
        s.push_str(&format!("residual = {}\n", fmt_f64(self.residual)));
        s.push_str(&format!("horizon = {}\n", fmt_f64(self.horizon)));
        s.push_str(&format!("beta = {}\n", fmt_f64(self.beta)));
        s.push_str(&format!("halvings = {}\n", self.halvings));
        s
    }
}
