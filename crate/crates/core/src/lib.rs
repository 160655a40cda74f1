//! Finite-field projection experiments: subspaces of F_p^n, projection
//! images of point sets, exceptional sets, Fourier checks, extremal
//! constructions and parameter sweeps.

pub mod bounds;
pub mod constructions;
pub mod error;
pub mod field;
pub mod fourier;
pub mod grassmann;
pub mod guard;
pub mod pointset;
pub mod projection;
pub mod sweep;
pub mod verify;

pub use constructions::{ConstructionResult, ConstructionSpec, SplitMix64};
pub use error::{Error, Result};
pub use field::{FpMatrix, PointIndex, PrimeModulus};
pub use fourier::GridFunction;
pub use grassmann::{dual, enumerate_subspaces, AffinePlane, Subspace};
pub use guard::SizeGuard;
pub use pointset::PointSet;
pub use projection::{exceptional_set, project, projection_count, ExceptionalReport, ScanOptions};
pub use verify::SweepRecord;
