use std::path::PathBuf;

/// Unified error type for the glider library.
///
/// Variants are grouped by how a caller should react: `Validation` problems
/// are recoverable by fixing inputs, `Diverged`/`DepthExcursion` indicate a
/// numerically or physically broken run, and `Io`/`Parse` are file-level
/// failures.
#[derive(thiserror::Error, Debug)]
pub enum GliderError {
    /// Pitch angle reached the representation singularity of the Euler-angle
    /// rate map; the attitude kinematics are undefined there.
    #[error("pitch angle {theta:.6} rad is within {margin:.0e} rad of the +/-pi/2 gimbal singularity")]
    GimbalLock { theta: f64, margin: f64 },

    /// The generalized inertia matrix could not be used (not symmetric
    /// positive definite, or not invertible).
    #[error("invalid inertia matrix: {reason}")]
    BadInertia { reason: String },

    /// One or more configuration fields failed validation. All problems are
    /// collected so a user can fix them in one pass.
    #[error("configuration invalid:\n{}", .problems.join("\n"))]
    Validation { problems: Vec<String> },

    /// A state or derivative stopped being finite during integration.
    #[error("simulation diverged at t = {t:.3} s: {detail}")]
    Diverged { t: f64, detail: String },

    /// A maneuver left the configured depth envelope.
    #[error("depth {z:.3} m left the allowed band [{min:.2}, {max:.2}] m at t = {t:.3} s")]
    DepthExcursion { t: f64, z: f64, min: f64, max: f64 },

    /// An input-gain term of a linearized channel is too small to invert.
    #[error("channel input gain {gain:.3e} is below the invertibility floor {floor:.1e}")]
    DegenerateGain { gain: f64, floor: f64 },

    /// Structured-text (CSV) input failed to parse.
    #[error("{file}:{row}: {msg}")]
    Parse { file: PathBuf, row: usize, msg: String },

    /// Dataset is unusable for derivative extraction.
    #[error("dataset rejected: {reason}")]
    BadDataset { reason: String },

    /// Underlying I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GliderError {
    pub fn validation(problems: Vec<String>) -> Self {
        GliderError::Validation { problems }
    }

    pub fn one_problem(problem: impl Into<String>) -> Self {
        GliderError::Validation { problems: vec![problem.into()] }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GliderError::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    /// 0 = success, 1 = validation, 2 = divergence, 3 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            GliderError::Diverged { .. } | GliderError::DepthExcursion { .. } => 2,
            GliderError::Io { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, GliderError>;
