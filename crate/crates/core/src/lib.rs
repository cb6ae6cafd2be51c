//! Numerical laboratory for the circular law of random matrices.
//!
//! Dense and sparse i.i.d. ensembles, their eigenvalues and singular values,
//! the hermitization and its Stieltjes transform, the limiting law of the
//! shifted singular values, logarithmic potentials, smallest-singular-value
//! tails and convergence sweeps. Numerical code is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix `f64`.

pub mod convergence;
pub mod ensemble;
pub mod error;
pub mod hermitization;
pub mod limit_law;
pub mod linalg;
pub mod matrix;
pub mod potential;
pub mod rng;
pub mod scalar;
pub mod spectra;
pub mod sv_tail;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type Complex = Cx<f64>;
pub type RealMatrix = matrix::MatrixReal<f64>;
pub type ComplexMatrix = matrix::MatrixComplex<f64>;
pub type Spectrum = spectra::ComplexSpectrum<f64>;
pub type Cdf = spectra::EmpiricalCdf<f64>;
pub type LimitSolution = limit_law::LimitSolution<f64>;
pub type TailReport = sv_tail::TailReport<f64>;
pub type PotentialGrid = potential::PotentialGrid<f64>;
pub type PotentialEstimate = potential::PotentialEstimate<f64>;
