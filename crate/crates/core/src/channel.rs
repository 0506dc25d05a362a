//! Pointwise channel primitives: LOS-probability models, LOS/NLOS power-law
//! path loss, and elevation-dependent dipole antenna gains in both the angle
//! and the path-loss parameterization.
//!
//! Everything here is a pure function of link geometry; the statistical
//! machinery lives in [`crate::pathloss_stats`] and the engines.

use crate::{cast, Scalar};

/// Default environment steepness parameter `b` of the high-altitude LOS model
/// (suburban fit).
pub const HIGH_ALTITUDE_B: f64 = 11.95;
/// Default environment scale parameter `c` of the high-altitude LOS model
/// (suburban fit).
pub const HIGH_ALTITUDE_C: f64 = 0.136;
/// 3D range (meters) at which the low-altitude LOS model's `min(1, 18/r)`
/// factor switches branches. Integrals crossing this radius should register
/// it as a kink with [`crate::quadrature`].
pub const LOW_ALTITUDE_KINK_RADIUS_M: f64 = 18.0;

/// Propagation state of one air-to-ground link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinkState {
    /// Line-of-sight.
    Los,
    /// Non-line-of-sight.
    Nlos,
}

impl LinkState {
    /// Both states, in the canonical iteration order used across the crate.
    pub const ALL: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    /// Lower-case label used in CSV output and error messages.
    pub fn as_str(self) -> &'static str {
        match self {
            LinkState::Los => "los",
            LinkState::Nlos => "nlos",
        }
    }
}

impl core::fmt::Display for LinkState {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Transmit/receive dipole orientation pair.
///
/// Gains depend only on the link elevation angle θ (no azimuth dependence):
/// `HH → sin²θ`, `HV → sinθ·cosθ`, `VV → cos²θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Horizontal transmit, horizontal receive.
    Hh,
    /// Horizontal transmit, vertical receive (or vice versa).
    Hv,
    /// Vertical transmit, vertical receive.
    Vv,
}

impl Orientation {
    /// All orientations, in canonical order.
    pub const ALL: [Orientation; 3] = [Orientation::Hh, Orientation::Hv, Orientation::Vv];

    /// Lower-case label used in config files and CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Hh => "hh",
            Orientation::Hv => "hv",
            Orientation::Vv => "vv",
        }
    }

    /// Combined gain as a function of link geometry: ground distance `d` and
    /// height `h` (so `sinθ = h/r`, `cosθ = d/r` with `r = √(d²+h²)`).
    pub fn gain_from_geometry<T: Scalar>(self, ground_distance: T, height: T) -> T {
        debug_assert!(ground_distance >= T::zero() && height > T::zero());
        let r2 = ground_distance * ground_distance + height * height;
        match self {
            Orientation::Hh => height * height / r2,
            Orientation::Vv => ground_distance * ground_distance / r2,
            Orientation::Hv => height * ground_distance / r2,
        }
    }
}

impl core::fmt::Display for Orientation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Selectable LOS-probability model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LosModel<T> {
    /// Elevation-angle logistic fit, appropriate for higher platforms:
    /// `P_LOS = 1 / (1 + b·exp(−c·(θ_deg − b)))`.
    HighAltitude {
        /// Environment steepness parameter, `> 0`.
        b: T,
        /// Environment scale parameter, `> 0`.
        c: T,
    },
    /// Street-canyon fit for low platforms:
    /// `P_LOS = min(1, 18/r)·(1 − e^{−r/63}) + e^{−r/63}`.
    LowAltitude,
    /// Every link LOS — the regime in which the association probabilities
    /// collapse to a closed form.
    AlwaysLos,
}

impl<T: Scalar> LosModel<T> {
    /// High-altitude model with the default suburban parameters.
    pub fn high_altitude_default() -> Self {
        LosModel::HighAltitude {
            b: cast(HIGH_ALTITUDE_B),
            c: cast(HIGH_ALTITUDE_C),
        }
    }

    /// Lower-case label used in CSV output (`high` / `low` / `always`).
    pub fn as_str(&self) -> &'static str {
        match self {
            LosModel::HighAltitude { .. } => "high",
            LosModel::LowAltitude => "low",
            LosModel::AlwaysLos => "always",
        }
    }

    /// Check the model's own parameter invariants.
    pub fn validate(&self) -> Result<(), ChannelError<T>> {
        if let LosModel::HighAltitude { b, c } = *self {
            if !(b > T::zero() && c > T::zero() && b.is_finite() && c.is_finite()) {
                return Err(ChannelError::BadModelParameters { b, c });
            }
        }
        Ok(())
    }

    /// LOS probability of a link with 3D range `r` to a platform at height
    /// `h`, both in meters.
    ///
    /// Errors if `r < h` or `h ≤ 0` (the elevation angle would be
    /// undefined). The high-altitude model clamps `h/r` to `[0, 1]` against
    /// floating-point overshoot when `r ≈ h`.
    pub fn los_probability(&self, r: T, h: T) -> Result<T, ChannelError<T>> {
        if !(h > T::zero()) || r < h {
            return Err(ChannelError::ElevationDomain { r, h });
        }
        Ok(match *self {
            LosModel::HighAltitude { b, c } => {
                let sin_theta = (h / r).min(T::one()).max(T::zero());
                let theta_deg = sin_theta.asin() * cast::<T>(180.0) / T::PI();
                T::one() / (T::one() + b * (-c * (theta_deg - b)).exp())
            }
            LosModel::LowAltitude => {
                let decay = (-r / cast::<T>(63.0)).exp();
                let street = (cast::<T>(LOW_ALTITUDE_KINK_RADIUS_M) / r).min(T::one());
                street * (T::one() - decay) + decay
            }
            LosModel::AlwaysLos => T::one(),
        })
    }

    /// Probability of the link being in `state` (LOS probability or its
    /// complement).
    pub fn state_probability(&self, state: LinkState, r: T, h: T) -> Result<T, ChannelError<T>> {
        let p_los = self.los_probability(r, h)?;
        Ok(match state {
            LinkState::Los => p_los,
            LinkState::Nlos => T::one() - p_los,
        })
    }

    /// 3D range at which the high-altitude logistic crosses 1/2 (elevation
    /// equal to the midpoint parameter `b`), the sharpest feature of the
    /// state probabilities; `None` for models without one. Integrators use
    /// this as a subdivision hint.
    pub fn transition_distance(&self, h: T) -> Option<T> {
        match *self {
            LosModel::HighAltitude { b, .. } => Some(h / (b * T::PI() / cast(180.0)).sin()),
            LosModel::LowAltitude | LosModel::AlwaysLos => None,
        }
    }
}

/// One air-to-ground link: 3D range, platform height, propagation state.
#[derive(Clone, Copy, Debug)]
pub struct Link<T> {
    /// 3D UE–platform distance, meters.
    pub r: T,
    /// Platform height, meters.
    pub h: T,
    /// Propagation state.
    pub state: LinkState,
}

impl<T: Scalar> Link<T> {
    /// Build a link, enforcing `r ≥ h > 0`.
    pub fn new(r: T, h: T, state: LinkState) -> Result<Self, ChannelError<T>> {
        if !(h > T::zero()) || r < h {
            return Err(ChannelError::ElevationDomain { r, h });
        }
        Ok(Link { r, h, state })
    }

    /// Ground (2D) distance `√(r² − h²)`.
    pub fn ground_distance(&self) -> T {
        ((self.r * self.r - self.h * self.h).max(T::zero())).sqrt()
    }
}

/// Power-law path loss `r^alpha` (dimensionless by convention: no
/// carrier-frequency or reference-distance constant).
pub fn path_loss<T: Scalar>(r: T, alpha: T) -> T {
    debug_assert!(r > T::zero() && alpha >= cast(2.0));
    r.powf(alpha)
}

/// Combined antenna gain at elevation angle `theta` (radians, in `[0, π/2]`).
pub fn antenna_gain_angle<T: Scalar>(orientation: Orientation, theta: T) -> T {
    debug_assert!(theta >= T::zero() && theta <= T::FRAC_PI_2());
    let (s, c) = (theta.sin(), theta.cos());
    match orientation {
        Orientation::Hh => s * s,
        Orientation::Hv => s * c,
        Orientation::Vv => c * c,
    }
}

/// Horizontal–horizontal gain as a function of the path-loss value:
/// `h²·L^{−2/α}`, which equals `sin²θ` at the range `r = L^{1/α}`.
///
/// Errors if `path_loss_value < h^alpha` (the range would be below the
/// platform height).
pub fn effective_gain_hh<T: Scalar>(
    path_loss_value: T,
    alpha: T,
    h: T,
) -> Result<T, ChannelError<T>> {
    let min_loss = h.powf(alpha);
    if path_loss_value < min_loss {
        return Err(ChannelError::GainDomain {
            path_loss: path_loss_value,
            min_path_loss: min_loss,
        });
    }
    Ok(h * h * path_loss_value.powf(-cast::<T>(2.0) / alpha))
}

/// Domain violations in channel primitives.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ChannelError<T: Scalar> {
    /// 3D range below platform height (or non-positive height).
    #[error("invalid link geometry: 3D range {r} must be >= height {h} > 0")]
    ElevationDomain {
        /// Offending 3D range, meters.
        r: T,
        /// Offending height, meters.
        h: T,
    },
    /// Path-loss argument below the physical minimum `h^alpha`.
    #[error("path-loss value {path_loss} below physical minimum {min_path_loss}")]
    GainDomain {
        /// Offending path-loss value.
        path_loss: T,
        /// Minimum admissible path loss `h^alpha`.
        min_path_loss: T,
    },
    /// Non-positive or non-finite high-altitude model parameters.
    #[error("high-altitude LOS parameters must be positive and finite, got b={b}, c={c}")]
    BadModelParameters {
        /// Offending steepness parameter.
        b: T,
        /// Offending scale parameter.
        c: T,
    },
}
