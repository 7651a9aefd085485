//! Log-minor distributions of positive-definite matrices, and sampled
//! estimates of mean subsystem entropy with a priori error guarantees.
//!
//! For an `n`-variate Gaussian with covariance `M`, every `k`-variable
//! subsystem has covariance equal to a principal `k × k` submatrix `M_I` and
//! differential entropy `½ log det M_I + (k/2)(1 + log 2π)`. Averaging over
//! all `C(n, k)` subsystems is out of reach for all but small systems, so this
//! crate
//!
//! * samples principal submatrices uniformly ([`sampling`]),
//! * bounds the tail and variance of `Y = log det M_I` using only a bound
//!   `κ̂ >= κ(M)` on the condition number ([`bounds`]), and turns those into
//!   standard-error and coefficient-of-variation guarantees and a sample-size
//!   planner,
//! * enumerates every minor exactly at desk scale, as an oracle for all of the
//!   above ([`exact`]).
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which everything in [`reproduce`] uses.
//!
//! ```
//! use logminor::{gen_e1, estimate_mean_entropy, SamplePlan};
//!
//! let m = gen_e1::<f64>(20, 3.0).unwrap();
//! let report = estimate_mean_entropy(&m, &SamplePlan::new(5, 2_000, 7), None).unwrap();
//! assert!((report.mean_logminor - 2.747).abs() < 0.1);
//! assert!(report.se_bounds.se2_logminor < 0.03);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod entropy;
pub mod error;
pub mod exact;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod reproduce;
pub mod rng;
pub mod sampling;
pub mod scalar;

pub use bounds::{
    concentration_sequence, cv_bounds, plan_sample_size, se_bounds, support_width_bound,
    tail_bound_exponential, tail_chebyshev, var_bound_diagonal, var_bound_exponential,
    var_bound_support, BoundChoice, BoundContext, BoundSet, CvBounds, PlanMetric, SeBounds,
    SupportVariant, TailBound,
};
pub use entropy::{entropy_from_log_det, gaussian_entropy, LogBase};
pub use error::{Error, Result};
pub use exact::{
    binomial, conjecture_search, enumerate_exact, max_two_level_variance, two_level_moments,
    ConjectureReport, ExactSummary, SearchModel,
};
pub use generators::{
    gen_e1, gen_e2, gen_e3, gen_e4, gen_haar_orthogonal, gen_two_level_diagonal,
    gen_uniform_spectrum, gen_wishart, GeneratorKind, GeneratorSpec,
};
pub use linalg::{
    eigenvalues_sym, log_det, make_spd, make_spd_with, principal_submatrix, IndexSet, SpdMatrix,
    SpdOptions, Spectrum, SquareMatrix,
};
pub use pipeline::{run_pipeline, PipelineReport};
pub use rng::DEFAULT_SEED;
pub use sampling::{
    empirical_tail, estimate_mean_entropy, histogram, sample_index_set, sample_logminors,
    EstimateReport, KappaHat, LogMinorDistribution, SamplePlan,
};
pub use scalar::Scalar;

pub type SpdMatrix64 = SpdMatrix<f64>;
pub type SpdMatrix32 = SpdMatrix<f32>;
pub type SquareMatrix64 = SquareMatrix<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type LogMinorDistribution64 = LogMinorDistribution<f64>;
pub type EstimateReport64 = EstimateReport<f64>;
pub type ExactSummary64 = ExactSummary<f64>;
pub type BoundContext64 = BoundContext<f64>;
pub type BoundSet64 = BoundSet<f64>;
