//! Zero sets of harmonic polynomials: exact polynomial algebra, frequency and
//! growth functionals, sampled zero sets, approximation numbers, degree
//! detection, stratification, dimension and topology estimators.

pub mod battery;
pub mod calibration;
pub mod catalog;
pub mod cloud;
pub mod detect;
pub mod dimension;
pub mod distance;
pub mod error;
pub mod frequency;
pub mod harmonic;
pub mod optimize;
pub mod poly;
pub mod spatial;
pub mod strata;
pub mod supnorm;
pub mod symmetry;
pub mod theta;
pub mod topology;
pub mod tube;
pub mod util;

pub use error::{Error, Result};
pub use poly::MultiPoly;
