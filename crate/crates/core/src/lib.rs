//! Analytical and Monte Carlo models of downlink RF wireless power transfer
//! from aerial base stations to clustered ground users.
//!
//! The network model: transmitters hover at fixed heights — one directly above
//! the cluster center of the user's own cluster (tier 0), the rest forming one
//! or more independent Poisson point processes in the plane (tiers 1..=M). The
//! user's position is a Gaussian (Thomas-cluster) offset from its cluster
//! center. Links are LOS or NLOS according to a selectable elevation-dependent
//! probability model, attenuate as `r^alpha` with per-state exponents, and are
//! weighted by dipole antenna gains that depend only on the elevation angle.
//! The user associates with the strongest long-term (fading-averaged) power
//! and harvests energy from serving signal plus interference through a linear
//! rectifier.
//!
//! Two independent engines compute the same quantities:
//!
//! * [`analysis`] — closed-form/quadrature evaluation of association
//!   probabilities, mean harvested power, and the energy-coverage curve via an
//!   N-term exponential-step (Alzer-type) expansion of the coverage indicator,
//!   built on the path-loss distributions in [`pathloss_stats`] and the
//!   adaptive integrator in [`quadrature`].
//! * [`montecarlo`] — a reproducible, parallel network simulator sampling the
//!   same model directly.
//!
//! [`config`] owns parameter validation and unit conversions (dBm at the
//! boundary, watts and meters inside); [`channel`] holds the pointwise LOS /
//! path-loss / antenna-gain primitives shared by both engines.
//!
//! All numerics are generic over the floating-point scalar through [`Scalar`];
//! [`Real`] fixes the recommended default of `f64`.

pub mod analysis;
pub mod channel;
pub mod config;
pub mod montecarlo;
pub mod pathloss_stats;
pub mod quadrature;

use core::fmt;
use core::iter::Sum;
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every numerical routine in this crate.
///
/// Implemented for `f32` and `f64`. The `f32` instantiation exists for
/// memory-bound experimentation; the shipped tolerances assume `f64`
/// ([`Real`]), and several default relative tolerances are unreachable in
/// single precision.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Default scalar type: the whole published parameter space is tuned for
/// double precision.
pub type Real = f64;

/// [`config::ScenarioConfig`] at the default scalar.
pub type ScenarioConfig = config::ScenarioConfig<Real>;
/// [`analysis::CoverageResult`] at the default scalar.
pub type CoverageResult = analysis::CoverageResult<Real>;
/// [`analysis::AssociationReport`] at the default scalar.
pub type AssociationReport = analysis::AssociationReport<Real>;
/// [`pathloss_stats::TierStatistics`] at the default scalar.
pub type TierStatistics = pathloss_stats::TierStatistics<Real>;

pub use analysis::Engine;
pub use channel::{LinkState, LosModel, Orientation};
pub use config::{dbm_to_watts, watts_to_dbm};

/// Convert an `f64` literal into the working scalar.
///
/// Infallible for the provided `f32`/`f64` impls (conversion is a plain
/// truncating cast), hence the unconditional unwrap.
pub(crate) fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal must convert into the working scalar")
}
