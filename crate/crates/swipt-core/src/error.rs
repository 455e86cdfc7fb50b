use thiserror::Error;

/// Errors produced by the analysis engine and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("argument outside the domain of {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{function} did not converge after {iterations} iterations")]
    NonConvergence {
        function: &'static str,
        iterations: usize,
    },

    #[error("quadrature tolerance not met: estimate {value:e}, error bound {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("inverse Laplace transform did not settle at t = {t:e}: {a:e} vs {b:e}")]
    Inversion { t: f64, a: f64, b: f64 },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("optimizer premise violated: grid point ({rho:.4}, {beta:.4}) reaches {grid:e} > {found:e}")]
    GridVerification {
        rho: f64,
        beta: f64,
        grid: f64,
        found: f64,
    },

    #[error("simulation error: {0}")]
    Simulation(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
