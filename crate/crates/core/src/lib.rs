//! Conjugate Cauchy and Beurling transforms of patch-supported densities, and
//! the time-analytic flow series of vortex and aggregation patches built on
//! them.
//!
//! The crate is organized bottom-up: [`quadrature`] and [`geometry`] supply
//! integration and metric primitives, [`fields`] represents piecewise
//! densities, [`transforms`] evaluates C̄ and B̄, [`series`] runs the
//! coefficient recursion, [`majorant`] certifies a radius of analyticity and
//! [`flow`] assembles and validates the truncated flow map.

pub mod geometry;
pub mod quadrature;

pub type C64 = num_complex::Complex64;
pub mod fields;
pub mod transforms;
pub mod majorant;
pub mod series;
pub mod flow;
pub mod io;
pub mod acceptance;
pub mod cli;

/// Execution policy for batch evaluation over independent points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

/// `(0..n).map(f)` in index order, on the rayon pool when the policy and the
/// `parallel` feature allow it.
pub fn par_map<T, F>(n: usize, policy: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy == Parallelism::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = policy;
    (0..n).map(f).collect()
}
