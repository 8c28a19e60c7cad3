use thiserror::Error;

use crate::brandt::BrandtError;
use crate::lattice::LatticeError;
use crate::lift::LiftError;
use crate::numth::NumthError;
use crate::quat::QuatError;
use crate::theta::ThetaError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ZERO_FORM: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_COMPUTATION: i32 = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse selector {0:?}")]
    BadSelector(String),
    #[error("newform file: {0}")]
    NewformParse(String),
    #[error("prescribed Atkin-Lehner signs multiply to +1: the root number is even")]
    EvenRootNumber,
    #[error("eigenvalue prefix matches {0} eigenspaces")]
    AmbiguousSelector(usize),
    #[error("no rational newform eigenspace matches the selector")]
    NotFound,
    #[error("newform eigenvalues conflict with every Brandt eigenspace")]
    NewformConflict,
    #[error("selected newform lies in an eigenspace with irrational eigenvalues")]
    IrrationalEigenspace,
    #[error("g vanishes identically, so L(F, 1/2) = 0")]
    ZeroForm,
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numth(#[from] NumthError),
    #[error(transparent)]
    Quat(#[from] QuatError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Brandt(#[from] BrandtError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ZeroForm => EXIT_ZERO_FORM,
            Error::InvalidConfig(_)
            | Error::BadSelector(_)
            | Error::NewformParse(_)
            | Error::EvenRootNumber
            | Error::AmbiguousSelector(_)
            | Error::NotFound
            | Error::NewformConflict
            | Error::Quat(QuatError::EvenRootNumber | QuatError::BadLevel(_))
            | Error::Lift(LiftError::EvenRootNumber) => EXIT_CONFIG,
            _ => EXIT_COMPUTATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
