use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: successive refinements gave {coarse} and {fine}")]
    QuadratureNonconvergence { coarse: f64, fine: f64 },

    #[error("one-dimensional search failed: {0}")]
    SearchNonconvergence(String),

    #[error("field has zero norm")]
    ZeroField,

    #[error("field is not normalized (L2 norm {norm})")]
    Unnormalized { norm: f64 },

    #[error("lattice spacing {spacing} leaves no admissible lattice point")]
    DegenerateLattice { spacing: f64 },

    #[error("phase factor is singular at lattice site ({x}, {y})")]
    SingularPoint { x: f64, y: f64 },

    #[error("winding {winding} cannot be represented with {n_theta} angular nodes")]
    WindingAliasing { winding: i64, n_theta: usize },

    #[error("backtracking step fell below 1e-14 after {iterations} iterations (energy {energy})")]
    StepUnderflow { iterations: usize, energy: f64 },

    #[error("no Thomas-Fermi hole for omega0 = {omega0} (needs omega0 > 4/sqrt(pi))")]
    NoHole { omega0: f64 },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
