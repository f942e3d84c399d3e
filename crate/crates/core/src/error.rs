use ssg_perm::PermError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error("{location}: unknown generator `{name}`")]
    UnknownGenerator { name: String, location: String },
    #[error("{location}: permutation is not a bijection")]
    NonBijective { location: String },
    #[error("letter {letter} out of range for alphabet of size {degree}")]
    LetterOutOfRange { letter: u32, degree: usize },
    #[error("elements belong to different recursion systems")]
    MixedSystems,
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("not in the Sylow subgroup: generator {generator} has a non-cyclic-power label at vertex {vertex}")]
    NotSylow { generator: String, vertex: String },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

impl Error {
    pub fn is_inconclusive(&self) -> bool {
        matches!(
            self,
            Error::Inconclusive(_) | Error::Perm(PermError::Inconclusive { .. })
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
