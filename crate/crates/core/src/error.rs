use thiserror::Error;

/// Errors raised anywhere in the solver, grouped by the exit code the CLI maps them to.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("Neumann series diverges: {0}")]
    Convergence(String),

    #[error("frame undefined on the axis: r = {r:e} <= r_min = {r_min:e}")]
    AxisDegeneracy { r: f64, r_min: f64 },

    #[error("invalid initial data: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("state error: {0}")]
    State(String),

    #[error("hyperbolicity guard violated at t = {t}, point {index} (x = {x:?}): -g^00 = {value}")]
    Guard {
        t: f64,
        index: usize,
        x: [f64; 3],
        value: f64,
    },

    #[error("non-finite value at t = {t}, point {index} (x = {x:?}), field {field}")]
    BlowUp {
        t: f64,
        index: usize,
        x: [f64; 3],
        field: usize,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) => 2,
            Error::Io { .. } | Error::Snapshot(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
