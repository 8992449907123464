//! Grids, quadrature, norms, linear-algebra helpers and rate fitting.

pub mod fit;
pub mod gauss;
pub mod grid;
pub mod quad;
pub mod sem;

pub use fit::{loglog_rate_fit, RateFit, LOG_FACTOR_SLOPE_TOL};
pub use grid::{Cluster, End, GridSpec, RadialGrid};
pub use quad::{quad, radial_disk, radial_plane, Domain, QuadOptions, QuadResult};
pub use sem::{Discretization, PoissonSolver};

/// log(a^alpha + b^alpha) without overflow or underflow.
pub fn ln_sum_pow(a: f64, b: f64, alpha: f64) -> f64 {
    let la = alpha * a.ln();
    let lb = alpha * b.ln();
    let (hi, lo) = if la > lb { (la, lb) } else { (lb, la) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
