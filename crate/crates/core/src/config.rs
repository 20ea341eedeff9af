use serde::{Deserialize, Serialize};

use crate::assignment::DEFAULT_ENUMERATION_CAP;
use crate::error::{Error, Result};

/// How the inner-loop stopping threshold `epsilon` is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// Stop when `|dT| <= epsilon * max(1, T)`.
    Relative,
    /// Stop when `|dT| <= epsilon` (m*bps).
    Absolute,
}

/// Iteration controls for the variable-distance solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Exponential smoothing factor applied to the distance update, in [0, 1).
    pub alpha: f64,
    pub epsilon: f64,
    pub tolerance: Tolerance,
    /// Outer (assignment) iterations.
    pub m_out: usize,
    /// Initial distance for every device, m.
    pub d_init: f64,
    /// Smallest admissible distance, m.
    pub d_min: f64,
    pub max_inner_iterations: usize,
    /// Largest number of assignments an exhaustive search may enumerate.
    pub enumeration_cap: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            epsilon: 1e-6,
            tolerance: Tolerance::Relative,
            m_out: 5,
            d_init: 10.0,
            d_min: 1e-3,
            max_inner_iterations: 500,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.m_out == 0 {
            return bad("m_out must be at least 1".into());
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return bad(format!("d_min must be positive, got {}", self.d_min));
        }
        if !(self.d_init >= self.d_min && self.d_init.is_finite()) {
            return bad(format!(
                "d_init must be at least d_min, got {}",
                self.d_init
            ));
        }
        if self.max_inner_iterations == 0 {
            return bad("max_inner_iterations must be at least 1".into());
        }
        if !(self.enumeration_cap >= 1.0) {
            return bad(format!(
                "enumeration_cap must be >= 1, got {}",
                self.enumeration_cap
            ));
        }
        Ok(())
    }

    /// `step_scale` shrinks the threshold when the loop takes shorter steps
    /// than configured, so heavier damping cannot fake convergence.
    pub(crate) fn converged(&self, previous: f64, current: f64, step_scale: f64) -> bool {
        let delta = (current - previous).abs();
        let eps = self.epsilon * step_scale;
        match self.tolerance {
            Tolerance::Relative => delta <= eps * current.abs().max(1.0),
            Tolerance::Absolute => delta <= eps,
        }
    }
}
