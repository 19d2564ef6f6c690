use crate::error::{Error, Result};
use crate::poiseuille::Friction;

/// Parameters of a stationary solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Flux through every cross-section.
    pub phi: f64,
    pub alpha: Friction<f64>,
    /// Truncation length beyond each end of the distorted part.
    pub zeta: f64,
    pub h: f64,
    /// Picard steps before switching to Newton.
    pub picard_iters: usize,
    /// Target for the Euclidean norm of the discrete residual.
    pub newton_tol: f64,
    /// Newton steps allowed per flux level.
    pub newton_max_iters: usize,
    /// Number of flux halvings tried when the direct solve stalls.
    pub continuation_steps: usize,
    /// Relative residual of each linear solve.
    pub linear_tol: f64,
    /// Level of `alpha phi / (1 + alpha)` above which the smallness warning is raised.
    pub smallness_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            phi: 0.1,
            alpha: Friction::Finite(1.0),
            zeta: 6.0,
            h: 0.1,
            picard_iters: 3,
            newton_tol: 1e-10,
            newton_max_iters: 12,
            continuation_steps: 4,
            linear_tol: 1e-10,
            smallness_threshold: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.phi >= 0.0 && self.phi.is_finite()) {
            return bad(format!("phi must be finite and >= 0, got {}", self.phi));
        }
        if let Friction::Finite(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("alpha must be >= 0, got {a}"));
            }
        }
        if !(self.zeta > 1.0 && self.zeta.is_finite()) {
            return bad(format!("zeta must exceed 1, got {}", self.zeta));
        }
        if !(self.h > 0.0) {
            return bad(format!("h must be > 0, got {}", self.h));
        }
        if !(self.newton_tol >= 1e-13) {
            return bad(format!("newton_tol must be >= 1e-13, got {:e}", self.newton_tol));
        }
        if self.continuation_steps < 1 {
            return bad("continuation_steps must be >= 1".into());
        }
        if self.newton_max_iters < 1 {
            return bad("newton_max_iters must be >= 1".into());
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1e-2) {
            return bad(format!("linear_tol must lie in (0, 1e-2), got {:e}", self.linear_tol));
        }
        if !(self.smallness_threshold > 0.0) {
            return bad(format!("smallness_threshold must be > 0, got {}", self.smallness_threshold));
        }
        Ok(())
    }

    /// `alpha phi / (1 + alpha)`.
    pub fn smallness(&self) -> f64 {
        self.alpha.smallness(self.phi)
    }

    pub fn smallness_warning(&self) -> bool {
        self.smallness() > self.smallness_threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_and_warning() {
        let c = SolverConfig::default();
        c.validate().unwrap();
        assert!(!c.smallness_warning());
        let big = SolverConfig { phi: 5.0, alpha: Friction::Finite(0.01), ..c.clone() };
        assert!((big.smallness() - 0.05 / 1.01).abs() < 1e-15);
        assert!(!big.smallness_warning());
        assert!(SolverConfig { phi: 2.0, alpha: Friction::Finite(1.0), ..c.clone() }.smallness_warning());
        assert!(SolverConfig { phi: 1.0, alpha: Friction::NoSlip, ..c.clone() }.smallness_warning());
        for bad in [
            SolverConfig { newton_tol: 1e-14, ..c.clone() },
            SolverConfig { continuation_steps: 0, ..c.clone() },
            SolverConfig { phi: -1.0, ..c.clone() },
            SolverConfig { zeta: 0.5, ..c.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }
}
