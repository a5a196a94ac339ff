use thiserror::Error;

/// Errors raised by the quench, overlap and root-finding routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LezError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate two-level kernel: gap {gap:e} below tolerance")]
    DegenerateKernel { gap: f64 },

    #[error("integrator step underflow at t = {t} (step {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("phase of A/B undefined: |A| = {abs_a:e}, |B| = {abs_b:e}")]
    PhaseUndefined { abs_a: f64, abs_b: f64 },

    #[error("mode is not at a critical rate: relative mismatch {mismatch:e}")]
    NotAtCriticalRate { mismatch: f64 },

    #[error("no root of the LEZ residual for tau in [{lo}, {hi}]")]
    NoRootInRange { lo: f64, hi: f64 },

    #[error("no real sudden-quench momentum for h_i = {h_i}, h_f = {h_f} (same phase)")]
    NoRealSolution { h_i: f64, h_f: f64 },

    #[error("geometric phase undefined: mode factor vanishes at t_f = {t_f}")]
    UndefinedAtZero { t_f: f64 },

    #[error("time step not converged: halving changed |G|^2 by {deviation:e}")]
    StepNotConverged { deviation: f64 },

    #[error("mode {index}: {source}")]
    Mode {
        index: usize,
        #[source]
        source: Box<LezError>,
    },
}

impl LezError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LezError::InvalidParameter(msg.into())
    }

    pub(crate) fn at_mode(self, index: usize) -> Self {
        LezError::Mode {
            index,
            source: Box::new(self),
        }
    }

    /// The innermost error, with any mode wrappers removed.
    pub fn root_cause(&self) -> &LezError {
        match self {
            LezError::Mode { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, LezError>;
