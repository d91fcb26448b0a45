use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix size below the supported minimum, or above a cost cap.
    InvalidSize {
        n: usize,
        reason: &'static str,
    },
    SizeMismatch {
        expected: usize,
        found: usize,
    },
    /// A matrix failed a membership test (traceless, anti-Hermitian, ...).
    NotInSpace {
        space: &'static str,
        defect: f64,
    },
    EmptyInput(&'static str),
    Singular(&'static str),
    NonCommuting {
        defect: f64,
    },
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    /// A logarithm could not be placed on a branch without a reference.
    BranchAmbiguity(&'static str),
    /// Consecutive path samples moved a logarithm by more than `π`.
    BranchJump {
        sample: usize,
        jump: f64,
    },
    DegenerateShape {
        z_im: f64,
        w_im: f64,
    },
    InvalidArgument(&'static str),
    /// A failure at a specific sample of a path.
    AtSample {
        index: usize,
        source: alloc::boxed::Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSize { n, reason } => write!(f, "invalid size {n}: {reason}"),
            Error::SizeMismatch { expected, found } => {
                write!(f, "size mismatch: expected {expected}, found {found}")
            }
            Error::NotInSpace { space, defect } => {
                write!(f, "element not in {space} (defect {defect:e})")
            }
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::Singular(what) => write!(f, "singular input: {what}"),
            Error::NonCommuting { defect } => {
                write!(f, "inputs do not commute (defect {defect:e})")
            }
            Error::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge in {iterations} iterations")
            }
            Error::BranchAmbiguity(what) => write!(f, "branch ambiguity: {what}"),
            Error::BranchJump { sample, jump } => {
                write!(f, "logarithm jumped by {jump:.3} at sample {sample}; sampling too coarse")
            }
            Error::DegenerateShape { z_im, w_im } => {
                write!(f, "degenerate shapes (Im z = {z_im:e}, Im w = {w_im:e})")
            }
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::AtSample { index, source } => write!(f, "sample {index}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
