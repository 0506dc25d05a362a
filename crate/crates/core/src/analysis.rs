//! Top-level analytical quantities: association probabilities, mean
//! harvested power, interference Laplace functionals, and the energy-coverage
//! curve, for single- and multi-height networks.
//!
//! The association rule is strongest fading-averaged received power, so every
//! quantity reduces to integrals of the path-loss densities from
//! [`crate::pathloss_stats`] against *exclusion-thinned* interference
//! factors: given a serving link of state `s` and path loss `l`, an
//! interferer of tier `j` and state `s'` offers less power exactly when its
//! path loss exceeds the boundary returned by [`exclusion_radius`]. Poisson
//! tiers then contribute products of void/Laplace functionals of the thinned
//! process; the single cluster-center platform contributes a plain
//! probability-mass/Laplace integral.
//!
//! The coverage indicator `1{ξ(S+I) > Γ}` has no closed Laplace form, so the
//! engine expands it with the N-term exponential-step (Alzer-type)
//! approximation `(1 − e^{−ηξz/Γ})^N`, giving an alternating binomial sum of
//! Laplace-functional evaluations at `â = nηξ/Γ`. The `n = 0` term carries
//! the exact association weights; the approximation's residual threshold-
//! dependent bias is documented in the project README and observable through
//! the `alzer_diag` CLI preset.
//!
//! Only the `hh` orientation is supported analytically; `hv`/`vv` are served
//! by [`crate::montecarlo`].

use rayon::prelude::*;

use crate::channel::{LinkState, Orientation};
use crate::config::{watts_to_dbm, ConfigError, ScenarioConfig};
use crate::pathloss_stats::{StatsError, TierStatistics};
use crate::quadrature::{integrate, IntegrationRequest, QuadratureError};
use crate::{cast, Scalar};

/// Which engine produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Quadrature evaluation of the analytical expressions.
    Analytic,
    /// Empirical estimation by network simulation.
    MonteCarlo,
}

impl Engine {
    /// Label used in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "monte_carlo",
        }
    }
}

/// Parameters of the N-term exponential-step approximation of the coverage
/// indicator.
#[derive(Clone, Copy, Debug)]
pub struct AlzerParams<T> {
    /// Term count 𝒩 ≥ 1.
    pub n_terms: usize,
    /// Shape constant η = 𝒩·(𝒩!)^{−1/𝒩}.
    pub eta: T,
}

impl<T: Scalar> AlzerParams<T> {
    /// Build parameters for an `n_terms`-term expansion.
    pub fn new(n_terms: usize) -> Self {
        assert!(n_terms >= 1, "the expansion needs at least one term");
        AlzerParams {
            n_terms,
            eta: alzer_eta(n_terms),
        }
    }

    /// Exponential rate `â = n·η·ξ/Γ` of expansion term `n` at threshold
    /// `gamma_w` (watts) and rectifier efficiency `xi`.
    pub fn a_hat(&self, n: usize, gamma_w: T, xi: T) -> T {
        cast::<T>(n as f64) * self.eta * xi / gamma_w
    }
}

/// Shape constant `η = n·(n!)^{−1/n}` of the n-term exponential-step
/// approximation (computed in log space to stay exact for large n).
pub fn alzer_eta<T: Scalar>(n_terms: usize) -> T {
    assert!(n_terms >= 1, "the expansion needs at least one term");
    let ln_factorial: f64 = (2..=n_terms).map(|k| (k as f64).ln()).sum();
    cast(n_terms as f64 * (-ln_factorial / n_terms as f64).exp())
}

/// Path-loss-domain boundary beyond which an interferer of path-loss
/// exponent `alpha_sprime` and power `p_interferer` offers less power than a
/// serving link of exponent `alpha_s`, power `p_serving` and path loss
/// `l_serving`:
///
/// `ℰ = ((P_j/P_k) · l^{1+2/α_s})^{α_{s'}/(α_{s'}+2)}`.
pub fn exclusion_radius<T: Scalar>(
    p_interferer: T,
    p_serving: T,
    l_serving: T,
    alpha_s: T,
    alpha_sprime: T,
) -> T {
    let two = cast::<T>(2.0);
    let base = p_interferer / p_serving * l_serving.powf(T::one() + two / alpha_s);
    base.powf(alpha_sprime / (alpha_sprime + two))
}

/// Closed-form association probabilities `(a0, a1)` for the always-LOS,
/// equal-power, single-tier network: `a0 = 1/(1 + 2πλσ²)`, `a1 = 1 − a0`.
pub fn closed_form_association<T: Scalar>(lambda_u: T, sigma_c: T) -> (T, T) {
    let a0 = (T::one() + cast::<T>(2.0) * T::PI() * lambda_u * sigma_c * sigma_c).recip();
    (a0, T::one() - a0)
}

/// Association probability of one (tier, state) pair.
#[derive(Clone, Copy, Debug)]
pub struct AssociationEntry<T> {
    /// Serving tier: 0 is the cluster-center platform, then 1..=M.
    pub tier: usize,
    /// Serving link state.
    pub state: LinkState,
    /// Probability of associating with this pair.
    pub probability: T,
}

/// Association probabilities over every (tier, state) pair.
#[derive(Clone, Debug)]
pub struct AssociationReport<T> {
    /// Entries in canonical order (tier-major, LOS before NLOS).
    pub entries: Vec<AssociationEntry<T>>,
}

impl<T: Scalar> AssociationReport<T> {
    /// Probability of one (tier, state) pair.
    pub fn get(&self, tier: usize, state: LinkState) -> T {
        self.entries
            .iter()
            .find(|e| e.tier == tier && e.state == state)
            .map(|e| e.probability)
            .unwrap_or_else(T::zero)
    }

    /// Total probability of serving from `tier` (summed over states).
    pub fn tier_total(&self, tier: usize) -> T {
        self.entries
            .iter()
            .filter(|e| e.tier == tier)
            .map(|e| e.probability)
            .sum()
    }

    /// Grand total (should be 1 within quadrature tolerance).
    pub fn total(&self) -> T {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

/// Energy-coverage contribution of one (tier, state) pair.
#[derive(Clone, Debug)]
pub struct TierEc<T> {
    /// Serving tier (0 = cluster-center platform).
    pub tier: usize,
    /// Serving link state.
    pub state: LinkState,
    /// Association weight of the pair.
    pub weight: T,
    /// Conditional coverage per threshold, clamped to [0, 1].
    pub conditional_ec: Vec<T>,
    /// 95% confidence half-widths (Monte Carlo results only).
    pub ci_halfwidth: Option<Vec<T>>,
}

/// Mean harvested power, per serving tier and total, in watts.
#[derive(Clone, Debug)]
pub struct AvgPowerReport<T> {
    /// Contribution of each serving tier (index 0 = cluster-center
    /// platform); sums to `total_w`.
    pub per_tier_w: Vec<T>,
    /// Total mean harvested power.
    pub total_w: T,
    /// 95% confidence half-width on the total (Monte Carlo only).
    pub total_ci_w: Option<T>,
}

/// Result bundle shared by the analytic and Monte Carlo engines.
#[derive(Clone, Debug)]
pub struct CoverageResult<T> {
    /// Which engine produced this result.
    pub engine: Engine,
    /// Threshold grid in dBm (empty when only association/power were
    /// requested).
    pub thresholds_dbm: Vec<T>,
    /// Total energy coverage per threshold, clamped to [0, 1].
    pub total_ec: Vec<T>,
    /// Pre-clamp totals: the alternating expansion can overshoot [0, 1] by
    /// small amounts, and this diagnostic field preserves that.
    pub total_ec_raw: Vec<T>,
    /// Per (tier, state) conditional coverages and weights.
    pub per_tier_state: Vec<TierEc<T>>,
    /// Association probabilities, when computed.
    pub association: Option<AssociationReport<T>>,
    /// Mean harvested power, when computed.
    pub avg_power: Option<AvgPowerReport<T>>,
    /// 95% confidence half-widths on `total_ec` (Monte Carlo only).
    pub total_ec_ci: Option<Vec<T>>,
}

impl<T: Scalar> CoverageResult<T> {
    pub(crate) fn empty(engine: Engine) -> Self {
        CoverageResult {
            engine,
            thresholds_dbm: Vec::new(),
            total_ec: Vec::new(),
            total_ec_raw: Vec::new(),
            per_tier_state: Vec::new(),
            association: None,
            avg_power: None,
            total_ec_ci: None,
        }
    }
}

/// Failures of the analytic engine.
#[derive(Debug, thiserror::Error)]
pub enum AnalysisError<T: Scalar> {
    /// Analytic expressions exist only for the `hh` orientation.
    #[error(
        "the analytic engine supports only the hh orientation (got {0}); \
         use the Monte Carlo engine for hv/vv"
    )]
    UnsupportedOrientation(Orientation),
    /// Cluster-parent tier index outside 1..=M.
    #[error("invalid cluster-parent tier {mu}: config has {tiers} tier(s)")]
    BadTierIndex {
        /// Requested index.
        mu: usize,
        /// Number of configured tiers.
        tiers: usize,
    },
    /// Invalid interferer tier index.
    #[error("invalid interferer tier {j}: config has {tiers} tier(s)")]
    BadInterfererIndex {
        /// Requested index.
        j: usize,
        /// Number of configured tiers.
        tiers: usize,
    },
    /// Configuration failed validation.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Path-loss statistics failure.
    #[error(transparent)]
    Stats(#[from] StatsError<T>),
    /// Quadrature failure in a top-level integral.
    #[error(transparent)]
    Quadrature(#[from] QuadratureError<T>),
}

/// What an association-style outer integral should weigh.
#[derive(Clone, Copy, Debug)]
enum TermKind<T> {
    /// Plain association probability.
    Association,
    /// Mean received power (serving plus mean interference).
    MeanPower,
    /// One exponential-step coverage term at rate `a_hat`.
    Coverage { a_hat: T },
}

/// Prepared evaluators and unit-converted parameters for one scenario.
struct Model<'a, T: Scalar> {
    cfg: &'a ScenarioConfig<T>,
    /// Cluster-center statistics (height of the parent tier μ).
    tier0: TierStatistics<T>,
    /// PPP tier statistics, index 0 ↔ tier 1.
    tiers: Vec<TierStatistics<T>>,
    /// Transmit powers in watts, index 0 = cluster-center platform.
    powers: Vec<T>,
    outer_tol: T,
    inner_tol: T,
}

impl<'a, T: Scalar> Model<'a, T> {
    fn new(cfg: &'a ScenarioConfig<T>, mu: usize) -> Result<Self, AnalysisError<T>> {
        cfg.validate()?;
        if cfg.orientation != Orientation::Hh {
            return Err(AnalysisError::UnsupportedOrientation(cfg.orientation));
        }
        let tiers_n = cfg.tier_count();
        if mu < 1 || mu > tiers_n {
            return Err(AnalysisError::BadTierIndex { mu, tiers: tiers_n });
        }
        let outer_tol = cfg.quadrature_rel_tol;
        let inner_tol = (outer_tol / cast(10.0)).max(cast(2e-12));
        let tier0 = TierStatistics::cluster_center(
            cfg.heights[mu - 1],
            cfg.cluster_sigma,
            cfg.alpha_los,
            cfg.alpha_nlos,
            cfg.los_model,
            inner_tol,
        );
        let tiers = (1..=tiers_n)
            .map(|j| {
                TierStatistics::ppp_tier(
                    j,
                    cfg.heights[j - 1],
                    cfg.tier_densities[j - 1],
                    cfg.alpha_los,
                    cfg.alpha_nlos,
                    cfg.los_model,
                    inner_tol,
                )
            })
            .collect();
        Ok(Model {
            cfg,
            tier0,
            tiers,
            powers: cfg.tx_powers_w(),
            outer_tol,
            inner_tol,
        })
    }

    /// Received power of a (power, height) platform at path loss `l` with
    /// exponent `alpha`: `P·H²·l^{−(1+2/α)}` — the hh effective gain folded
    /// into the power law.
    fn received_power(p: T, height: T, l: T, alpha: T) -> T {
        p * height * height * l.powf(-(T::one() + cast::<T>(2.0) / alpha))
    }

    /// Exclusion boundary for interferers of platform index `j` (0 =
    /// cluster-center) in state `s_i`, given serving index `k` at path loss
    /// `l` in state-exponent `alpha_s`.
    fn excl(&self, j: usize, k: usize, l: T, alpha_s: T, s_i: LinkState) -> T {
        let alpha_i = match s_i {
            LinkState::Los => self.cfg.alpha_los,
            LinkState::Nlos => self.cfg.alpha_nlos,
        };
        exclusion_radius(self.powers[j], self.powers[k], l, alpha_s, alpha_i)
    }

    /// Serving path loss at which the exclusion of interferer `j` in state
    /// `s_i` crosses `target` (inverse of [`Model::excl`] in `l`).
    fn excl_inverse(&self, j: usize, k: usize, target: T, alpha_s: T, s_i: LinkState) -> T {
        let two = cast::<T>(2.0);
        let alpha_i = match s_i {
            LinkState::Los => self.cfg.alpha_los,
            LinkState::Nlos => self.cfg.alpha_nlos,
        };
        let rho = self.powers[j] / self.powers[k];
        (target.powf((alpha_i + two) / alpha_i) / rho).powf((T::one() + two / alpha_s).recip())
    }

    /// Void + (for coverage) Laplace exponent of PPP tier `j` (1-based) in
    /// interferer state `s_i` beyond `exclusion`: the tier's factor in any
    /// association-style integrand is `exp(−exponent)`.
    fn ppp_exponent(
        &self,
        j: usize,
        s_i: LinkState,
        a_hat: T,
        exclusion: T,
    ) -> Result<T, StatsError<T>> {
        let stats = &self.tiers[j - 1];
        let lo = exclusion.max(stats.min_path_loss(s_i));
        let mut exponent = stats.intensity_tier_k(lo, s_i)?;
        if a_hat > T::zero() {
            exponent += self.ppp_laplace_exponent(j, s_i, a_hat, lo)?;
        }
        Ok(exponent)
    }

    /// Laplace exponent `∫_{lo}^∞ (1 − 1/(1+â·P_j·H_j²·x^{−(1+2/α)}))·Λ'_j dx`
    /// of tier `j`'s interference beyond `lo` under exponential fading.
    fn ppp_laplace_exponent(
        &self,
        j: usize,
        s_i: LinkState,
        a_hat: T,
        lo: T,
    ) -> Result<T, StatsError<T>> {
        let stats = &self.tiers[j - 1];
        let p = self.powers[j];
        let height = stats.height;
        let alpha = stats.alpha(s_i);
        let expnt = T::one() + cast::<T>(2.0) / alpha;

        let mut kinks: Vec<T> = Vec::with_capacity(3);
        // Crossover where the interference weight reaches 1/2 — the one scale
        // the u-map cannot see on its own.
        let half_point = (a_hat * p * height * height).powf(alpha / (alpha + cast(2.0)));
        if half_point > lo {
            kinks.push(half_point);
        }
        if let Some(k18) = stats.kink_path_loss(s_i) {
            if k18 > lo {
                kinks.push(k18);
            }
        }
        if let Some(kf) = stats.feature_path_loss(s_i) {
            if kf > lo {
                kinks.push(kf);
            }
        }
        let req = IntegrationRequest::semi_infinite(lo, self.inner_tol).with_kinks(&kinks);
        let q = integrate(
            |x: T| {
                // 1 − 1/(1+q) written as q/(1+q): the subtraction would
                // cancel catastrophically once q is small.
                let q = a_hat * p * height * height * x.powf(-expnt);
                let dens = stats
                    .intensity_derivative_tier_k(x, s_i)
                    .unwrap_or_else(|_| T::nan());
                q / (T::one() + q) * dens
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()))
    }

    /// Mean interference power from PPP tier `j` (1-based) in state `s_i`
    /// beyond `exclusion` (Campbell's formula against `Λ'`).
    fn ppp_psi(&self, j: usize, s_i: LinkState, exclusion: T) -> Result<T, StatsError<T>> {
        let stats = &self.tiers[j - 1];
        let p = self.powers[j];
        let height = stats.height;
        let alpha = stats.alpha(s_i);
        let expnt = T::one() + cast::<T>(2.0) / alpha;
        let lo = exclusion.max(stats.min_path_loss(s_i));

        let mut kinks: Vec<T> = Vec::with_capacity(2);
        if let Some(k18) = stats.kink_path_loss(s_i) {
            if k18 > lo {
                kinks.push(k18);
            }
        }
        if let Some(kf) = stats.feature_path_loss(s_i) {
            if kf > lo {
                kinks.push(kf);
            }
        }
        let req = IntegrationRequest::semi_infinite(lo, self.inner_tol).with_kinks(&kinks);
        let q = integrate(
            |x: T| {
                let dens = stats
                    .intensity_derivative_tier_k(x, s_i)
                    .unwrap_or_else(|_| T::nan());
                p * height * height * x.powf(-expnt) * dens
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()))
    }

    /// Cluster-center tail mass beyond `exclusion` in state `m`, optionally
    /// Laplace-weighted: `∫_ℰ (1+â·P_0·H²·x^{−(1+2/α_m)})^{−1} f_{L0,m} dx`.
    ///
    /// At `â = 0` this is the tier-0 CCDF factor of association integrals;
    /// fused with the weight it is the (unnormalized) tier-0 Laplace factor
    /// of coverage integrals.
    fn tier0_tail_mass(&self, m: LinkState, a_hat: T, exclusion: T) -> Result<T, StatsError<T>> {
        let stats = &self.tier0;
        let p0 = self.powers[0];
        let height = stats.height;
        let h2 = height * height;
        let alpha = stats.alpha(m);
        let sigma2 = stats.sigma_c * stats.sigma_c;
        let two = cast::<T>(2.0);

        let d0 = stats.ground_distance_at(exclusion, m);
        let d_hi = (d0 * d0 + stats.rayleigh_tail().powi(2)).sqrt();
        let mut kinks: Vec<T> = Vec::with_capacity(3);
        if let Some(dk) = stats.kink_ground_distance() {
            kinks.push(dk);
        }
        if let Some(df) = stats.feature_ground_distance() {
            kinks.push(df);
        }
        if a_hat > T::zero() {
            let half_point = (a_hat * p0 * h2).powf(alpha / (alpha + two));
            let d_half = stats.ground_distance_at(half_point, m);
            if d_half > T::zero() {
                kinks.push(d_half);
            }
        }
        let req = IntegrationRequest::finite(d0, d_hi, self.inner_tol).with_kinks(&kinks);
        let q = integrate(
            |d: T| {
                let r = (d * d + h2).sqrt();
                let ray = d / sigma2 * (-(d * d) / (two * sigma2)).exp();
                let mass = self.state_prob(&self.tier0, m, r) * ray;
                if a_hat > T::zero() {
                    let x = r.powf(alpha);
                    mass / (T::one() + a_hat * p0 * h2 * x.powf(-(T::one() + two / alpha)))
                } else {
                    mass
                }
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()).min(T::one()))
    }

    /// Mean interference power from the cluster-center platform in state `m`
    /// beyond `exclusion`.
    fn tier0_psi(&self, m: LinkState, exclusion: T) -> Result<T, StatsError<T>> {
        let stats = &self.tier0;
        let p0 = self.powers[0];
        let height = stats.height;
        let h2 = height * height;
        let alpha = stats.alpha(m);
        let sigma2 = stats.sigma_c * stats.sigma_c;
        let two = cast::<T>(2.0);
        let expnt = T::one() + two / alpha;

        let d0 = stats.ground_distance_at(exclusion, m);
        let d_hi = (d0 * d0 + stats.rayleigh_tail().powi(2)).sqrt();
        let mut kinks: Vec<T> = Vec::with_capacity(2);
        if let Some(dk) = stats.kink_ground_distance() {
            kinks.push(dk);
        }
        if let Some(df) = stats.feature_ground_distance() {
            kinks.push(df);
        }
        let req = IntegrationRequest::finite(d0, d_hi, self.inner_tol).with_kinks(&kinks);
        let q = integrate(
            |d: T| {
                let r = (d * d + h2).sqrt();
                let ray = d / sigma2 * (-(d * d) / (two * sigma2)).exp();
                let x = r.powf(alpha);
                self.state_prob(&self.tier0, m, r) * ray * p0 * h2 * x.powf(-expnt)
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()))
    }

    fn state_prob(&self, stats: &TierStatistics<T>, s: LinkState, r: T) -> T {
        self.cfg
            .los_model
            .state_probability(s, r, stats.height)
            .expect("3D range is >= height by construction")
    }

    /// One association-style outer integral for serving pair `(k, s)`.
    fn term(&self, k: usize, s: LinkState, kind: TermKind<T>) -> Result<T, AnalysisError<T>> {
        if k == 0 {
            self.tier0_term(s, kind)
        } else {
            self.ppp_term(k, s, kind)
        }
    }

    /// Outer integral when the cluster-center platform serves in state `s`.
    /// Integration runs over the user's planar offset `d` (the natural
    /// Rayleigh variable), with the serving path loss `l = (d²+H²)^{α_s/2}`.
    fn tier0_term(&self, s: LinkState, kind: TermKind<T>) -> Result<T, AnalysisError<T>> {
        let stats = &self.tier0;
        let alpha_s = stats.alpha(s);
        let p0 = self.powers[0];
        let height = stats.height;
        let h2 = height * height;
        let sigma2 = stats.sigma_c * stats.sigma_c;
        let two = cast::<T>(2.0);
        let d_hi = stats.rayleigh_tail();
        let l_hi = (d_hi * d_hi + h2).powf(alpha_s / two);
        let a_hat = match kind {
            TermKind::Coverage { a_hat } => a_hat,
            _ => T::zero(),
        };

        // Kinks: the LOS-model switch plus every interferer's wall (where its
        // exclusion meets its minimum path loss — the factor's slope jumps).
        let mut kinks: Vec<T> = Vec::new();
        if let Some(dk) = stats.kink_ground_distance() {
            kinks.push(dk);
        }
        if let Some(df) = stats.feature_ground_distance() {
            kinks.push(df);
        }
        for j in 1..=self.tiers.len() {
            for s_i in LinkState::ALL {
                let wall =
                    self.excl_inverse(j, 0, self.tiers[j - 1].min_path_loss(s_i), alpha_s, s_i);
                if wall > stats.min_path_loss(s) && wall < l_hi {
                    let d_img = stats.ground_distance_at(wall, s);
                    if d_img > T::zero() {
                        kinks.push(d_img);
                    }
                }
            }
        }

        let req = IntegrationRequest::finite(T::zero(), d_hi, self.outer_tol)
            .with_kinks(&kinks)
            .with_initial_splits(4);
        let q = integrate(
            |d: T| {
                let r = (d * d + h2).sqrt();
                let ray = d / sigma2 * (-(d * d) / (two * sigma2)).exp();
                let mass = self.state_prob(stats, s, r) * ray;
                if mass == T::zero() {
                    return T::zero();
                }
                let l = r.powf(alpha_s);
                let mut exponent = T::zero();
                for j in 1..=self.tiers.len() {
                    for s_i in LinkState::ALL {
                        let e = self.excl(j, 0, l, alpha_s, s_i);
                        exponent += self
                            .ppp_exponent(j, s_i, a_hat, e)
                            .unwrap_or_else(|_| T::nan());
                    }
                }
                let weight = match kind {
                    TermKind::Association => T::one(),
                    TermKind::Coverage { a_hat } => {
                        T::one() / (T::one() + a_hat * Self::received_power(p0, height, l, alpha_s))
                    }
                    TermKind::MeanPower => {
                        let mut w = Self::received_power(p0, height, l, alpha_s);
                        for j in 1..=self.tiers.len() {
                            for s_i in LinkState::ALL {
                                let e = self.excl(j, 0, l, alpha_s, s_i);
                                w += self.ppp_psi(j, s_i, e).unwrap_or_else(|_| T::nan());
                            }
                        }
                        w
                    }
                };
                mass * weight * (-exponent).exp()
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()))
    }

    /// Upper truncation of a PPP-tier serving integral: the integrand is
    /// bounded by `Λ'·e^{−Λ}`, whose tail beyond `x` is `e^{−Λ(x)}`, so
    /// double until the intensity certifies the discarded mass.
    fn ppp_outer_upper(&self, k: usize, s: LinkState) -> Result<Option<T>, StatsError<T>> {
        let stats = &self.tiers[k - 1];
        let target = (self.outer_tol * cast(1e-4)).recip().ln();
        let mut x = stats.min_path_loss(s) * cast(2.0);
        for _ in 0..60 {
            if stats.intensity_tier_k(x, s)? >= target {
                return Ok(Some(x));
            }
            x = x * cast(2.0);
        }
        // Intensity never reached the target: the state's total mass is
        // either exactly zero (e.g. NLOS under always-LOS) or negligible.
        if stats.intensity_tier_k(x, s)? == T::zero() {
            Ok(None)
        } else {
            Ok(Some(x))
        }
    }

    /// Outer integral when PPP tier `k` (1-based) serves in state `s`,
    /// integrating over the serving path loss `l`.
    ///
    /// The bare density `Λ'_{k,s}(l)` is weighed by `exp(−exponent)` factors
    /// over *every* (tier, state) interferer population — the serving tier's
    /// own-state void factor arises from the general exclusion, which equals
    /// `l` for the serving pair — and by the cluster-center tail mass.
    fn ppp_term(&self, k: usize, s: LinkState, kind: TermKind<T>) -> Result<T, AnalysisError<T>> {
        let stats_k = &self.tiers[k - 1];
        let alpha_s = stats_k.alpha(s);
        let p_k = self.powers[k];
        let height_k = stats_k.height;
        let lo = stats_k.min_path_loss(s);
        let Some(hi) = self.ppp_outer_upper(k, s)? else {
            return Ok(T::zero());
        };
        let a_hat = match kind {
            TermKind::Coverage { a_hat } => a_hat,
            _ => T::zero(),
        };

        let mut kinks: Vec<T> = Vec::new();
        if let Some(k18) = stats_k.kink_path_loss(s) {
            kinks.push(k18);
        }
        if let Some(kf) = stats_k.feature_path_loss(s) {
            kinks.push(kf);
        }
        // Interferer walls (PPP tiers and the cluster-center platform).
        for j in 1..=self.tiers.len() {
            for s_i in LinkState::ALL {
                let wall =
                    self.excl_inverse(j, k, self.tiers[j - 1].min_path_loss(s_i), alpha_s, s_i);
                if wall > lo && wall < hi {
                    kinks.push(wall);
                }
            }
        }
        for m in LinkState::ALL {
            let wall = self.excl_inverse(0, k, self.tier0.min_path_loss(m), alpha_s, m);
            if wall > lo && wall < hi {
                kinks.push(wall);
            }
        }

        let req = IntegrationRequest::finite(lo, hi, self.outer_tol)
            .with_kinks(&kinks)
            .with_initial_splits(24);
        let q = integrate(
            |l: T| {
                let dens = stats_k
                    .intensity_derivative_tier_k(l, s)
                    .unwrap_or_else(|_| T::nan());
                if dens == T::zero() {
                    return T::zero();
                }
                let mut exponent = T::zero();
                for j in 1..=self.tiers.len() {
                    for s_i in LinkState::ALL {
                        let e = self.excl(j, k, l, alpha_s, s_i);
                        exponent += self
                            .ppp_exponent(j, s_i, a_hat, e)
                            .unwrap_or_else(|_| T::nan());
                    }
                }
                let mut tier0_mass = T::zero();
                for m in LinkState::ALL {
                    let e = self.excl(0, k, l, alpha_s, m);
                    tier0_mass += self
                        .tier0_tail_mass(m, a_hat, e)
                        .unwrap_or_else(|_| T::nan());
                }
                let weighted = match kind {
                    TermKind::Association => tier0_mass,
                    TermKind::Coverage { a_hat } => {
                        tier0_mass
                            / (T::one() + a_hat * Self::received_power(p_k, height_k, l, alpha_s))
                    }
                    TermKind::MeanPower => {
                        let mut received = Self::received_power(p_k, height_k, l, alpha_s);
                        for j in 1..=self.tiers.len() {
                            for s_i in LinkState::ALL {
                                let e = self.excl(j, k, l, alpha_s, s_i);
                                received += self.ppp_psi(j, s_i, e).unwrap_or_else(|_| T::nan());
                            }
                        }
                        let mut tier0_mean = T::zero();
                        for m in LinkState::ALL {
                            let e = self.excl(0, k, l, alpha_s, m);
                            tier0_mean += self.tier0_psi(m, e).unwrap_or_else(|_| T::nan());
                        }
                        // The cluster-center platform's own interference mean
                        // already integrates over the beyond-exclusion event,
                        // so it adds outside the tier-0 mass factor.
                        received * tier0_mass + tier0_mean
                    }
                };
                dens * (-exponent).exp() * weighted
            },
            &req,
        )?;
        Ok(q.value.max(T::zero()))
    }

    /// Every (tier, state) serving pair in canonical order.
    fn combos(&self) -> Vec<(usize, LinkState)> {
        (0..=self.tiers.len())
            .flat_map(|k| LinkState::ALL.into_iter().map(move |s| (k, s)))
            .collect()
    }

    /// Association weights for all serving pairs, in [`Model::combos`]
    /// order, evaluated in parallel.
    fn association_weights(&self) -> Result<Vec<T>, AnalysisError<T>> {
        self.combos()
            .into_par_iter()
            .map(|(k, s)| self.term(k, s, TermKind::Association))
            .collect()
    }
}

/// Association probabilities for every (tier, state) pair, with the
/// cluster-center platform belonging to tier 1 (see
/// [`association_probabilities_at`] for other parents).
pub fn association_probabilities<T: Scalar>(
    cfg: &ScenarioConfig<T>,
) -> Result<AssociationReport<T>, AnalysisError<T>> {
    association_probabilities_at(cfg, 1)
}

/// Association probabilities when the user's cluster parent belongs to tier
/// `mu` (1-based).
pub fn association_probabilities_at<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    mu: usize,
) -> Result<AssociationReport<T>, AnalysisError<T>> {
    let model = Model::new(cfg, mu)?;
    let weights = model.association_weights()?;
    Ok(AssociationReport {
        entries: model
            .combos()
            .into_iter()
            .zip(weights)
            .map(|((tier, state), probability)| AssociationEntry {
                tier,
                state,
                probability,
            })
            .collect(),
    })
}

/// Mean interference power (watts) received from platform population `j`
/// (0 = cluster-center platform, 1..=M = PPP tiers) beyond a common
/// path-loss `exclusion` applied to both link states.
pub fn psi_interference_mean<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    j: usize,
    exclusion: T,
) -> Result<T, AnalysisError<T>> {
    let model = Model::new(cfg, 1)?;
    if j > model.tiers.len() {
        return Err(AnalysisError::BadInterfererIndex {
            j,
            tiers: model.tiers.len(),
        });
    }
    let mut total = T::zero();
    for s_i in LinkState::ALL {
        total += if j == 0 {
            model.tier0_psi(s_i, exclusion)?
        } else {
            model.ppp_psi(j, s_i, exclusion)?
        };
    }
    Ok(total)
}

/// Normalized Laplace transform of the interference from population `j`
/// beyond `exclusion`, under serving tier `k`: lies in (0, 1], equals 1 at
/// `a_hat = 0`, and equals 1 identically for `j = k = 0` (the single
/// cluster-center platform cannot interfere with itself).
pub fn laplace_interference<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    j: usize,
    k: usize,
    a_hat: T,
    exclusion: T,
) -> Result<T, AnalysisError<T>> {
    let model = Model::new(cfg, 1)?;
    if j > model.tiers.len() {
        return Err(AnalysisError::BadInterfererIndex {
            j,
            tiers: model.tiers.len(),
        });
    }
    if j == 0 && k == 0 {
        return Ok(T::one());
    }
    if a_hat <= T::zero() {
        return Ok(T::one());
    }
    if j == 0 {
        // Conditional on the platform lying beyond the exclusion.
        let mut num = T::zero();
        let mut den = T::zero();
        for m in LinkState::ALL {
            num += model.tier0_tail_mass(m, a_hat, exclusion)?;
            den += model.tier0_tail_mass(m, T::zero(), exclusion)?;
        }
        if den <= cast(1e-300) {
            return Ok(T::one());
        }
        Ok((num / den).min(T::one()))
    } else {
        let mut exponent = T::zero();
        for s_i in LinkState::ALL {
            exponent += model.ppp_exponent(j, s_i, a_hat, exclusion)?
                - model.ppp_exponent(j, s_i, T::zero(), exclusion)?;
        }
        Ok((-exponent).exp().min(T::one()))
    }
}

/// Mean harvested power (rectifier efficiency applied), per serving tier and
/// total.
pub fn avg_harvested_power<T: Scalar>(
    cfg: &ScenarioConfig<T>,
) -> Result<CoverageResult<T>, AnalysisError<T>> {
    let model = Model::new(cfg, 1)?;
    let combos = model.combos();
    let values: Vec<T> = combos
        .par_iter()
        .map(|&(k, s)| model.term(k, s, TermKind::MeanPower))
        .collect::<Result<_, _>>()?;

    let tiers = cfg.tier_count();
    let xi = cfg.rectifier_efficiency;
    let mut per_tier_w = vec![T::zero(); tiers + 1];
    for (&(k, _), &v) in combos.iter().zip(values.iter()) {
        per_tier_w[k] += xi * v;
    }
    let total_w = per_tier_w.iter().copied().sum();

    let mut result = CoverageResult::empty(Engine::Analytic);
    result.avg_power = Some(AvgPowerReport {
        per_tier_w,
        total_w,
        total_ci_w: None,
    });
    Ok(result)
}

/// Energy-coverage curve over `thresholds_w` (watts), single-parent form:
/// the user's cluster parent belongs to tier 1.
pub fn energy_coverage<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    thresholds_w: &[T],
) -> Result<CoverageResult<T>, AnalysisError<T>> {
    energy_coverage_multiheight(cfg, 1, thresholds_w)
}

/// Energy-coverage curve when the user's cluster parent belongs to tier `mu`
/// (1-based). With one tier this is the plain single-height curve.
pub fn energy_coverage_multiheight<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    mu: usize,
    thresholds_w: &[T],
) -> Result<CoverageResult<T>, AnalysisError<T>> {
    let model = Model::new(cfg, mu)?;
    let combos = model.combos();
    let n_terms = cfg.alzer_terms;
    let alzer = AlzerParams::<T>::new(n_terms);
    let xi = cfg.rectifier_efficiency;

    // n = 0 terms are exactly the association weights — no Laplace factors.
    let weights = model.association_weights()?;

    // Remaining (threshold, n, combo) terms are independent work units.
    let n_combos = combos.len();
    let jobs: Vec<(usize, usize, usize)> = (0..thresholds_w.len())
        .flat_map(|gi| (1..=n_terms).flat_map(move |n| (0..n_combos).map(move |ci| (gi, n, ci))))
        .collect();
    let values: Vec<T> = jobs
        .par_iter()
        .map(|&(gi, n, ci)| {
            let (k, s) = combos[ci];
            let a_hat = alzer.a_hat(n, thresholds_w[gi], xi);
            model.term(k, s, TermKind::Coverage { a_hat })
        })
        .collect::<Result<_, _>>()?;

    let binom: Vec<T> = (0..=n_terms).map(|n| binomial(n_terms, n)).collect();
    let mut per_pair_raw = vec![vec![T::zero(); thresholds_w.len()]; combos.len()];
    for (ci, row) in per_pair_raw.iter_mut().enumerate() {
        row.fill(weights[ci]);
    }
    for (&(gi, n, ci), &v) in jobs.iter().zip(values.iter()) {
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        per_pair_raw[ci][gi] += sign * binom[n] * v;
    }

    let mut total_ec_raw = vec![T::zero(); thresholds_w.len()];
    for row in &per_pair_raw {
        for (gi, &v) in row.iter().enumerate() {
            total_ec_raw[gi] += v;
        }
    }
    let clamp01 = |v: T| v.max(T::zero()).min(T::one());
    let total_ec: Vec<T> = total_ec_raw.iter().map(|&v| clamp01(v)).collect();

    let per_tier_state = combos
        .iter()
        .zip(per_pair_raw.iter().zip(weights.iter()))
        .map(|(&(tier, state), (row, &weight))| TierEc {
            tier,
            state,
            weight,
            conditional_ec: row
                .iter()
                .map(|&v| {
                    if weight > cast(1e-300) {
                        clamp01(v / weight)
                    } else {
                        T::zero()
                    }
                })
                .collect(),
            ci_halfwidth: None,
        })
        .collect();

    Ok(CoverageResult {
        engine: Engine::Analytic,
        thresholds_dbm: thresholds_w.iter().map(|&g| watts_to_dbm(g)).collect(),
        total_ec,
        total_ec_raw,
        per_tier_state,
        association: Some(AssociationReport {
            entries: combos
                .into_iter()
                .zip(weights)
                .map(|((tier, state), probability)| AssociationEntry {
                    tier,
                    state,
                    probability,
                })
                .collect(),
        }),
        avg_power: None,
        total_ec_ci: None,
    })
}

/// Binomial coefficient C(n, k) as a scalar.
fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    let k = k.min(n - k);
    let mut result = 1.0f64;
    for i in 1..=k {
        result = result * (n - k + i) as f64 / i as f64;
    }
    cast(result)
}
