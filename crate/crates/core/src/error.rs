use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("range error: photon number {n} exceeds table limit {limit}; increase n_max")]
    Range { n: f64, limit: f64 },

    #[error("step size underflow at t = {t:e} s (alpha = {re} + {im}i)")]
    Stiffness { t: f64, re: f64, im: f64 },

    #[error("degenerate fixed point at n = {n_star} (jacobian det {det:e}); parameter point is a bifurcation boundary")]
    DegenerateRoot { n_star: f64, det: f64 },

    #[error("unexpected fixed-point count {0} (expected 1 or 3)")]
    RootCount(usize),

    #[error("eigen-solver failed to converge on excitation block {block}")]
    Eigen { block: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the category of this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Config { .. } => 2,
            Error::Range { .. } => 3,
            Error::Stiffness { .. } => 4,
            Error::DegenerateRoot { .. } | Error::RootCount(_) => 5,
            Error::Eigen { .. } => 6,
            Error::Io(_) => 7,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
