//! Fixtures shared by the benchmarks.

use ffproj_core::constructions::random_set;
use ffproj_core::{GridFunction, PointSet, PrimeModulus, SizeGuard};

pub fn prime(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).expect("benchmark prime")
}

/// Random set of size about `p^a` in F_p^n, fixed seed.
pub fn random_points(p: u64, n: usize, a: f64) -> PointSet {
    random_set(prime(p), n, a, 7, &SizeGuard::default()).expect("benchmark set")
}

pub fn random_grid(p: u64, n: usize) -> GridFunction {
    GridFunction::random(prime(p), n, 7).expect("benchmark grid")
}
