//! Makespan minimization on identical parallel machines.
//!
//! The crate implements an efficient approximation scheme for `P||Cmax`
//! (LRTP: rounding, a compressed configuration IP and a convolution-based
//! IP solver inside a dual-approximation binary search), the classical
//! heuristics LPT, FFD, MULTIFIT and DJMS, an exact branch-and-bound oracle,
//! random instance families and a benchmark harness.
//!
//! Generic code is written against [`Scalar`]; the aliases below fix the
//! common instantiations.

pub mod baselines;
pub mod configip;
pub mod convolution;
pub mod driver;
pub mod instance;
pub mod lp;
pub mod preprocess;
pub mod rounding;
pub mod scalar;
pub mod jrsolver;

pub use scalar::Scalar;

/// Exact rational used for processing times and rounding boundaries.
pub type Rational = num_rational::BigRational;

pub type ExactInstance = instance::Instance<Rational>;
pub type ExactSchedule = instance::Schedule<Rational>;
pub type FloatInstance = instance::Instance<f64>;
pub type FloatSchedule = instance::Schedule<f64>;
pub type MultiArray64 = convolution::MultiArray<f64>;
pub type MultiArray32 = convolution::MultiArray<f32>;

pub use driver::{exact_opt, lrtp_solve, LrtpConfig};
pub use instance::{lower_bound, parse_instance, write_instance, Instance, Schedule};
