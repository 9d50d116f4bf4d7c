use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("detector frequency undefined: cos(pi * phi_ex) = 0 at phi_ex = {phi_ex}")]
    DegenerateFlux { phi_ex: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("eigensolver failed on a {dim}x{dim} {context} matrix (max |entry| = {max_abs:e}, hermiticity error = {hermiticity:e})")]
    Eigensolver {
        dim: usize,
        context: &'static str,
        max_abs: f64,
        hermiticity: f64,
    },

    #[error("trace preservation violated: column ({alpha}, {beta}) sums to {violation:e}")]
    TraceViolation {
        alpha: usize,
        beta: usize,
        violation: f64,
    },

    #[error("Liouvillian is numerically defective (biorthogonality residual {residual:e}); perturb the parameters slightly")]
    Defective { residual: f64 },

    #[error("degenerate steady state; specify qubit sector (null space dimension >= {null_dim})")]
    DegenerateSteadyState { null_dim: usize },

    #[error("qubit sector requested, but the Hilbert space has no qubit")]
    NoQubit,

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error("undamped mode; spectrum singular (mode {mode}, Re = {re:e})")]
    UndampedMode { mode: usize, re: f64 },

    #[error("Fourier components of {0} are not available")]
    MissingComponents(&'static str),

    #[error("Fock truncation not converged at n_fock = {cap} (relative change {rel_change:e})")]
    NotConverged { cap: usize, rel_change: f64 },

    #[error("time propagation did not converge: {0}")]
    Propagation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidParameter { .. }
                | Error::DegenerateFlux { .. }
                | Error::Io(_)
        )
    }
}
