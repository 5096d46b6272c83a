//! Classical emulation of the Schrödingerized momentum-accelerated gradient
//! (MAG) linear solver: dense linear algebra, the MAG iteration and its
//! continuous baselines, Schrödingerization, block-encoding verification,
//! PDE test problems and complexity estimators.

pub mod baselines;
pub mod blockenc;
pub mod complexity;
pub mod pde;


pub mod mag;
pub mod numkit;

mod scalar;
pub mod schrodingerize;

pub use scalar::{Real, C};

/// Complex matrix over `f64`.
pub type CMatrix = numkit::Matrix<f64>;
/// Complex vector over `f64`.
pub type CVector = numkit::Vector<f64>;
pub type Complex64 = C<f64>;
pub type MagParams = mag::MagParams<f64>;
pub type TransformedSystem = mag::TransformedSystem<f64>;
pub type LinearSystem = numkit::LinearSystem<f64>;
pub type PGrid = schrodingerize::PGrid<f64>;

pub type BlockEncoding = blockenc::BlockEncoding<f64>;
