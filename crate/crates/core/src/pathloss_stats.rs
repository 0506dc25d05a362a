//! Analytical path-loss distributions for both kinds of transmitter.
//!
//! The *cluster-center* (tier-0) platform sits directly above the user's
//! cluster center, so its path loss inherits the Rayleigh distribution of the
//! user's planar offset, thinned by the per-state LOS probability. The
//! remaining platforms form planar Poisson processes; mapping each through
//! the state-dependent power law gives an inhomogeneous Poisson process of
//! path-loss values on the line whose intensity measure, CCDF and defective
//! per-state PDF are evaluated here.
//!
//! Per-state tier-0 quantities are *defective*: `ccdf_tier0(x, s)` at and
//! below the minimum path loss equals the total probability of the link
//! being in state `s` (the masses over states sum to one). This is the
//! convention under which association-style integrals reproduce total
//! probability exactly; the joint PPP-tier CCDF is 1 below the minimum path
//! loss as usual.

use crate::channel::{ChannelError, LinkState, LosModel, LOW_ALTITUDE_KINK_RADIUS_M};
use crate::quadrature::{integrate, IntegrationRequest, QuadratureError};
use crate::{cast, Scalar};

/// Which transmitter population an evaluator describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TierKind {
    /// The single platform above the user's own cluster center.
    ClusterCenter,
    /// A planar Poisson tier, carrying its 1-based tier index.
    PppTier(usize),
}

/// Path-loss distribution evaluator for one tier.
///
/// Immutable after construction; evaluating from many threads concurrently
/// is supported and required behavior.
#[derive(Clone, Debug)]
pub struct TierStatistics<T> {
    /// Population kind (cluster-center vs. PPP tier).
    pub kind: TierKind,
    /// Platform height, meters.
    pub height: T,
    /// Tier density, per m²; unused for the cluster center.
    pub density: T,
    /// User-offset standard deviation, meters; used only by the cluster
    /// center.
    pub sigma_c: T,
    /// LOS path-loss exponent.
    pub alpha_los: T,
    /// NLOS path-loss exponent.
    pub alpha_nlos: T,
    /// LOS probability model.
    pub los_model: LosModel<T>,
    /// Relative tolerance for internal quadrature.
    pub rel_tol: T,
}

/// Failures when evaluating path-loss statistics.
#[derive(Debug, thiserror::Error)]
pub enum StatsError<T: Scalar> {
    /// Operation called on the wrong [`TierKind`].
    #[error("operation requires a {expected} evaluator")]
    WrongKind {
        /// Human-readable expected kind.
        expected: &'static str,
    },
    /// Density argument below the physical minimum path loss.
    #[error("path-loss argument {x:e} is below the physical minimum {min:e}")]
    BelowMinimum {
        /// Offending argument.
        x: T,
        /// Minimum admissible path loss `H^alpha`.
        min: T,
    },
    /// Internal quadrature failure.
    #[error(transparent)]
    Quadrature(#[from] QuadratureError<T>),
    /// Channel-primitive domain violation (indicates an internal bug).
    #[error(transparent)]
    Channel(#[from] ChannelError<T>),
}

impl<T: Scalar> TierStatistics<T> {
    /// Evaluator for the cluster-center platform at `height`, with user
    /// offsets of spread `sigma_c`.
    pub fn cluster_center(
        height: T,
        sigma_c: T,
        alpha_los: T,
        alpha_nlos: T,
        los_model: LosModel<T>,
        rel_tol: T,
    ) -> Self {
        TierStatistics {
            kind: TierKind::ClusterCenter,
            height,
            density: T::zero(),
            sigma_c,
            alpha_los,
            alpha_nlos,
            los_model,
            rel_tol,
        }
    }

    /// Evaluator for PPP tier `index` (1-based) of the given height and
    /// density.
    pub fn ppp_tier(
        index: usize,
        height: T,
        density: T,
        alpha_los: T,
        alpha_nlos: T,
        los_model: LosModel<T>,
        rel_tol: T,
    ) -> Self {
        TierStatistics {
            kind: TierKind::PppTier(index),
            height,
            density,
            sigma_c: T::zero(),
            alpha_los,
            alpha_nlos,
            los_model,
            rel_tol,
        }
    }

    /// Path-loss exponent of `state`.
    pub fn alpha(&self, state: LinkState) -> T {
        match state {
            LinkState::Los => self.alpha_los,
            LinkState::Nlos => self.alpha_nlos,
        }
    }

    /// Minimum physical path loss `H^alpha_s` of `state`.
    pub fn min_path_loss(&self, state: LinkState) -> T {
        self.height.powf(self.alpha(state))
    }

    /// Probability that a link of 3D range `r` is in `state`. `r ≥ H` is a
    /// structural invariant here (ranges come from `√(d² + H²)`).
    fn state_probability(&self, state: LinkState, r: T) -> T {
        self.los_model
            .state_probability(state, r, self.height)
            .expect("3D range is >= height by construction")
    }

    /// Ground distance at which the path loss of `state` reaches `x`
    /// (0 below the minimum).
    pub fn ground_distance_at(&self, x: T, state: LinkState) -> T {
        let two = cast::<T>(2.0);
        let d2 = x.powf(two / self.alpha(state)) - self.height * self.height;
        d2.max(T::zero()).sqrt()
    }

    /// Certified Rayleigh tail cut for cluster-center integrals: beyond
    /// `√(d₀² + d_tail²)` less than `rel_tol/100` of the remaining mass is
    /// discarded.
    pub(crate) fn rayleigh_tail(&self) -> T {
        let eps = self.rel_tol * cast::<T>(1e-2);
        self.sigma_c * (cast::<T>(2.0) * eps.recip().ln()).sqrt()
    }

    /// Ground-distance image of the low-altitude model's 18 m kink, when the
    /// platform is below it.
    pub(crate) fn kink_ground_distance(&self) -> Option<T> {
        let kr = cast::<T>(LOW_ALTITUDE_KINK_RADIUS_M);
        match self.los_model {
            LosModel::LowAltitude if self.height < kr => {
                Some((kr * kr - self.height * self.height).sqrt())
            }
            _ => None,
        }
    }

    /// Path-loss image of the low-altitude model's 18 m kink for links in
    /// `state`, when the platform is below it.
    pub(crate) fn kink_path_loss(&self, state: LinkState) -> Option<T> {
        let kr = cast::<T>(LOW_ALTITUDE_KINK_RADIUS_M);
        match self.los_model {
            LosModel::LowAltitude if self.height < kr => Some(kr.powf(self.alpha(state))),
            _ => None,
        }
    }

    /// Ground-distance image of the LOS model's logistic transition (see
    /// [`LosModel::transition_distance`]), when it lies outward of the
    /// platform's nadir.
    pub(crate) fn feature_ground_distance(&self) -> Option<T> {
        let r = self.los_model.transition_distance(self.height)?;
        let d2 = r * r - self.height * self.height;
        if d2 > T::zero() {
            Some(d2.sqrt())
        } else {
            None
        }
    }

    /// Path-loss image of the LOS model's logistic transition for links in
    /// `state`.
    pub(crate) fn feature_path_loss(&self, state: LinkState) -> Option<T> {
        let r = self.los_model.transition_distance(self.height)?;
        if r > self.height {
            Some(r.powf(self.alpha(state)))
        } else {
            None
        }
    }

    fn require_cluster(&self) -> Result<(), StatsError<T>> {
        match self.kind {
            TierKind::ClusterCenter => Ok(()),
            TierKind::PppTier(_) => Err(StatsError::WrongKind {
                expected: "cluster-center",
            }),
        }
    }

    fn require_ppp(&self) -> Result<(), StatsError<T>> {
        match self.kind {
            TierKind::PppTier(_) => Ok(()),
            TierKind::ClusterCenter => Err(StatsError::WrongKind {
                expected: "PPP-tier",
            }),
        }
    }

    /// Cluster-center CCDF of the per-state path loss:
    /// `P(L_{0,s} > x, link in state s)`.
    ///
    /// At and below the minimum path loss this is the total state-`s` mass.
    pub fn ccdf_tier0(&self, x: T, state: LinkState) -> Result<T, StatsError<T>> {
        self.require_cluster()?;
        let d0 = self.ground_distance_at(x, state);
        let sigma2 = self.sigma_c * self.sigma_c;
        let d_max = (d0 * d0 + self.rayleigh_tail().powi(2)).sqrt();

        let mut kinks: Vec<T> = Vec::with_capacity(2);
        if let Some(dk) = self.kink_ground_distance() {
            kinks.push(dk);
        }
        if let Some(df) = self.feature_ground_distance() {
            kinks.push(df);
        }
        let req = IntegrationRequest::finite(d0, d_max, self.rel_tol).with_kinks(&kinks);
        let q = integrate(
            |d: T| {
                let r = (d * d + self.height * self.height).sqrt();
                let rayleigh = d / sigma2 * (-(d * d) / (cast::<T>(2.0) * sigma2)).exp();
                self.state_probability(state, r) * rayleigh
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()).min(T::one()))
    }

    /// Cluster-center defective PDF of the per-state path loss (closed
    /// form). Errors below the minimum path loss.
    pub fn pdf_tier0(&self, x: T, state: LinkState) -> Result<T, StatsError<T>> {
        self.require_cluster()?;
        let min = self.min_path_loss(state);
        if x < min {
            return Err(StatsError::BelowMinimum { x, min });
        }
        let alpha = self.alpha(state);
        let two = cast::<T>(2.0);
        let sigma2 = self.sigma_c * self.sigma_c;
        let r2 = x.powf(two / alpha);
        let density = x.powf(two / alpha - T::one()) / alpha;
        let p_state = self.state_probability(state, r2.sqrt());
        Ok(density / sigma2 * p_state * (-(r2 - self.height * self.height) / (two * sigma2)).exp())
    }

    /// PPP-tier intensity measure `Λ_s([0, x))`: mean number of tier
    /// platforms whose state-`s` path loss falls below `x`. Zero at and
    /// below the minimum path loss.
    pub fn intensity_tier_k(&self, x: T, state: LinkState) -> Result<T, StatsError<T>> {
        self.require_ppp()?;
        if x <= self.min_path_loss(state) {
            return Ok(T::zero());
        }
        let r_max = x.powf(cast::<T>(2.0) / self.alpha(state)).sqrt();
        let mut kinks: Vec<T> = Vec::with_capacity(2);
        if matches!(self.los_model, LosModel::LowAltitude) {
            let kr = cast::<T>(LOW_ALTITUDE_KINK_RADIUS_M);
            if self.height < kr && kr < r_max {
                kinks.push(kr);
            }
        }
        if let Some(rf) = self.los_model.transition_distance(self.height) {
            if rf < r_max {
                kinks.push(rf);
            }
        }
        let mut req =
            IntegrationRequest::finite(self.height, r_max, self.rel_tol).with_kinks(&kinks);
        // The integrand rises like r over ranges spanning many decades, so
        // refine toward the lower edge where the LOS/NLOS split varies.
        req = req.with_initial_splits(12);
        let q = integrate(|r: T| self.state_probability(state, r) * r, &req)?;
        Ok(cast::<T>(2.0) * T::PI() * self.density * q.value.max(T::zero()))
    }

    /// Derivative of the intensity measure in `x` (closed form); zero below
    /// the minimum path loss.
    pub fn intensity_derivative_tier_k(&self, x: T, state: LinkState) -> Result<T, StatsError<T>> {
        self.require_ppp()?;
        if x < self.min_path_loss(state) {
            return Ok(T::zero());
        }
        let alpha = self.alpha(state);
        let two = cast::<T>(2.0);
        let r = x.powf(two / alpha).sqrt();
        let density = x.powf(two / alpha - T::one()) / alpha;
        Ok(two * T::PI() * self.density * density * self.state_probability(state, r))
    }

    /// PPP-tier per-state CCDF `exp(−Λ_s([0, x)))`: probability that no tier
    /// platform has state-`s` path loss below `x`.
    pub fn ccdf_tier_k(&self, x: T, state: LinkState) -> Result<T, StatsError<T>> {
        Ok((-self.intensity_tier_k(x, state)?).exp())
    }

    /// Joint PPP-tier CCDF: probability that no tier platform of *either*
    /// state has path loss below `x` (product of per-state CCDFs).
    pub fn ccdf_tier_k_joint(&self, x: T) -> Result<T, StatsError<T>> {
        let l = self.intensity_tier_k(x, LinkState::Los)?;
        let n = self.intensity_tier_k(x, LinkState::Nlos)?;
        Ok((-(l + n)).exp())
    }

    /// PPP-tier defective per-state PDF
    /// `Λ'_s([0, x))·exp(−Λ_s([0, x)))`; zero below the minimum path loss.
    pub fn pdf_tier_k(&self, x: T, state: LinkState) -> Result<T, StatsError<T>> {
        let dens = self.intensity_derivative_tier_k(x, state)?;
        if dens == T::zero() {
            return Ok(T::zero());
        }
        Ok(dens * self.ccdf_tier_k(x, state)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    type R = f64;

    fn cluster(model: LosModel<R>) -> TierStatistics<R> {
        TierStatistics::cluster_center(50.0, 10.0, 2.0, 4.0, model, 1e-10)
    }

    fn ppp(model: LosModel<R>) -> TierStatistics<R> {
        TierStatistics::ppp_tier(1, 50.0, 1e-4, 2.0, 4.0, model, 1e-10)
    }

    fn models() -> [LosModel<R>; 3] {
        [
            LosModel::high_altitude_default(),
            LosModel::LowAltitude,
            LosModel::AlwaysLos,
        ]
    }

    #[test]
    fn tier0_ccdf_matches_rayleigh_closed_form_when_always_los() {
        let stats = cluster(LosModel::AlwaysLos);
        // With every link LOS the quadrature must reproduce the Rayleigh
        // offset CCDF exactly: e^{-(x - H²)/(2σ²)} for α = 2.
        let got = stats.ccdf_tier0(2600.0, LinkState::Los).unwrap();
        assert_relative_eq!(got, (-0.5f64).exp(), max_relative = 1e-9);
        assert_abs_diff_eq!(got, 0.60653, epsilon = 1e-5);
        for x in [2500.0f64, 2600.0, 5000.0, 1e4, 1e6] {
            let closed = (-(x - 2500.0) / 200.0).exp();
            assert_relative_eq!(
                stats.ccdf_tier0(x, LinkState::Los).unwrap(),
                closed,
                max_relative = 1e-9,
                epsilon = 1e-300
            );
            assert_eq!(stats.ccdf_tier0(x, LinkState::Nlos).unwrap(), 0.0);
        }
    }

    #[test]
    fn tier0_state_masses_sum_to_one_at_the_minimum() {
        for model in models() {
            let stats = cluster(model);
            let total: f64 = LinkState::ALL
                .iter()
                .map(|&s| stats.ccdf_tier0(stats.min_path_loss(s), s).unwrap())
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn tier0_pdf_reference_value_and_domain() {
        let stats = cluster(LosModel::AlwaysLos);
        let f = stats.pdf_tier0(2500.0, LinkState::Los).unwrap();
        assert_abs_diff_eq!(f, 0.005, epsilon = 1e-12);
        assert_eq!(stats.pdf_tier0(1e7, LinkState::Nlos).unwrap(), 0.0);
        assert!(matches!(
            stats.pdf_tier0(2499.0, LinkState::Los),
            Err(StatsError::BelowMinimum { .. })
        ));
    }

    #[test]
    fn tier0_pdf_is_minus_ccdf_derivative() {
        let stats = cluster(LosModel::high_altitude_default());
        let x = 3000.0;
        let h = x * 5e-5;
        let fd = (stats.ccdf_tier0(x - h, LinkState::Los).unwrap()
            - stats.ccdf_tier0(x + h, LinkState::Los).unwrap())
            / (2.0 * h);
        let pdf = stats.pdf_tier0(x, LinkState::Los).unwrap();
        assert_relative_eq!(pdf, fd, max_relative = 1e-4);
    }

    #[test]
    fn ppp_intensity_closed_form_when_always_los() {
        let stats = ppp(LosModel::AlwaysLos);
        let got = stats.intensity_tier_k(10_000.0, LinkState::Los).unwrap();
        let exact = core::f64::consts::PI * 1e-4 * 7500.0;
        assert_relative_eq!(got, exact, max_relative = 1e-9);
        assert_abs_diff_eq!(got, 2.35619, epsilon = 1e-5);
        assert_eq!(stats.intensity_tier_k(2500.0, LinkState::Los).unwrap(), 0.0);
        assert_eq!(stats.intensity_tier_k(1e8, LinkState::Nlos).unwrap(), 0.0);
    }

    #[test]
    fn ppp_intensity_derivative_closed_form_and_fd() {
        let stats = ppp(LosModel::AlwaysLos);
        let got = stats
            .intensity_derivative_tier_k(10_000.0, LinkState::Los)
            .unwrap();
        assert_relative_eq!(got, core::f64::consts::PI * 1e-4, max_relative = 1e-12);
        assert_eq!(
            stats
                .intensity_derivative_tier_k(2000.0, LinkState::Los)
                .unwrap(),
            0.0
        );

        let stats = ppp(LosModel::high_altitude_default());
        let x = 8000.0;
        let h = x * 1e-5;
        for s in LinkState::ALL {
            let fd = (stats.intensity_tier_k(x + h, s).unwrap()
                - stats.intensity_tier_k(x - h, s).unwrap())
                / (2.0 * h);
            let d = stats.intensity_derivative_tier_k(x, s).unwrap();
            assert_relative_eq!(d, fd, max_relative = 1e-4);
        }
    }

    #[test]
    fn ppp_ccdf_examples() {
        let stats = ppp(LosModel::AlwaysLos);
        assert_eq!(stats.ccdf_tier_k(2500.0, LinkState::Los).unwrap(), 1.0);
        let expected = (-core::f64::consts::PI * 1e-4 * 7500.0f64).exp();
        assert_abs_diff_eq!(expected, 0.0947802, epsilon = 1e-7);
        assert_relative_eq!(
            stats.ccdf_tier_k(10_000.0, LinkState::Los).unwrap(),
            expected,
            max_relative = 1e-9
        );
        for model in models() {
            let stats = ppp(model);
            for x in [3000.0, 1e4, 1e7] {
                let joint = stats.ccdf_tier_k_joint(x).unwrap();
                let product = stats.ccdf_tier_k(x, LinkState::Los).unwrap()
                    * stats.ccdf_tier_k(x, LinkState::Nlos).unwrap();
                assert_relative_eq!(joint, product, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn ppp_pdf_example_and_fd() {
        let stats = ppp(LosModel::AlwaysLos);
        let f = stats.pdf_tier_k(10_000.0, LinkState::Los).unwrap();
        assert_abs_diff_eq!(f, 2.9773e-5, epsilon = 1e-8);
        assert_eq!(stats.pdf_tier_k(2000.0, LinkState::Los).unwrap(), 0.0);

        let stats = ppp(LosModel::high_altitude_default());
        let x = 8000.0;
        let h = x * 1e-5;
        for s in LinkState::ALL {
            let fd = (stats.ccdf_tier_k(x - h, s).unwrap() - stats.ccdf_tier_k(x + h, s).unwrap())
                / (2.0 * h);
            assert_relative_eq!(stats.pdf_tier_k(x, s).unwrap(), fd, max_relative = 1e-4);
        }
    }

    #[test]
    fn ccdfs_are_monotone_on_log_grid() {
        for model in models() {
            let c = cluster(model);
            let p = ppp(model);
            for s in LinkState::ALL {
                let lo = c.min_path_loss(s);
                let mut prev_c = f64::INFINITY;
                let mut prev_p = f64::INFINITY;
                for i in 0..20 {
                    let x = lo * (1e12f64 / lo).powf(i as f64 / 19.0);
                    let vc = c.ccdf_tier0(x, s).unwrap();
                    let vp = p.ccdf_tier_k(x, s).unwrap();
                    assert!(vc <= prev_c + 1e-9 && (0.0..=1.0).contains(&vc));
                    assert!(vp <= prev_p + 1e-9 && (0.0..=1.0).contains(&vp));
                    prev_c = vc;
                    prev_p = vp;
                }
            }
        }
    }

    #[test]
    fn tier0_pdf_normalizes_across_states() {
        for model in models() {
            let stats = TierStatistics::cluster_center(50.0, 10.0, 2.0, 4.0, model, 1e-8);
            let mut total = 0.0;
            for s in LinkState::ALL {
                let req = IntegrationRequest::semi_infinite(stats.min_path_loss(s), 1e-9)
                    .with_initial_splits(20);
                total += integrate(|x| stats.pdf_tier0(x, s).unwrap(), &req)
                    .unwrap()
                    .value;
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn kind_checks_reject_mismatched_calls() {
        let c = cluster(LosModel::AlwaysLos);
        let p = ppp(LosModel::AlwaysLos);
        assert!(matches!(
            p.ccdf_tier0(3000.0, LinkState::Los),
            Err(StatsError::WrongKind { .. })
        ));
        assert!(matches!(
            c.intensity_tier_k(3000.0, LinkState::Los),
            Err(StatsError::WrongKind { .. })
        ));
    }

    #[test]
    fn low_altitude_kink_images_exist_only_below_18m() {
        let low =
            TierStatistics::<R>::cluster_center(10.0, 10.0, 2.0, 4.0, LosModel::LowAltitude, 1e-8);
        let dk = low.kink_ground_distance().unwrap();
        assert_abs_diff_eq!(dk * dk + 100.0, 324.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            low.kink_path_loss(LinkState::Los).unwrap(),
            324.0,
            epsilon = 1e-9
        );
        assert!(cluster(LosModel::LowAltitude)
            .kink_ground_distance()
            .is_none());
        assert!(cluster(LosModel::high_altitude_default())
            .kink_path_loss(LinkState::Los)
            .is_none());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn outputs_stay_in_range(x in 2500.0f64..1e9, idx in 0usize..3) {
                let model = models()[idx];
                let c = cluster(model);
                let p = ppp(model);
                for s in LinkState::ALL {
                    if x >= c.min_path_loss(s) {
                        prop_assert!(c.pdf_tier0(x, s).unwrap() >= 0.0);
                    }
                    let cc = c.ccdf_tier0(x, s).unwrap();
                    prop_assert!((0.0..=1.0).contains(&cc));
                    let pk = p.ccdf_tier_k(x, s).unwrap();
                    prop_assert!((0.0..=1.0).contains(&pk));
                    prop_assert!(p.pdf_tier_k(x, s).unwrap() >= 0.0);
                }
            }
        }
    }
}
