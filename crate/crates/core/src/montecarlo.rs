//! Ground-truth network simulator: samples platform layouts, applies the
//! strongest-mean-power association rule and the received-power equations
//! directly, and estimates association probabilities, mean harvested power,
//! and empirical energy coverage with confidence intervals.
//!
//! Unlike [`crate::analysis`], the simulator supports all three antenna
//! orientations; it is the reference the analytic engine is validated
//! against, and the only engine for `hv`/`vv`.
//!
//! Reproducibility contract: every trial draws from its own counter-based
//! ChaCha12 substream keyed by `(rng_seed, trial index)`, and estimates
//! reduce trial outcomes in trial order. Results are therefore bit-identical
//! for a given configuration regardless of how many threads run the trials.

use rand::distr::Open01;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::analysis::{
    AssociationEntry, AssociationReport, AvgPowerReport, CoverageResult, Engine, TierEc,
};
use crate::channel::{LinkState, Orientation};
use crate::config::{watts_to_dbm, ConfigError, ScenarioConfig};
use crate::{cast, Scalar};

/// One platform–UE link in a sampled realization.
#[derive(Clone, Copy, Debug)]
pub struct UavLink<T> {
    /// Owning tier: 0 is the cluster-center platform, 1..=M the PPP tiers.
    pub tier: usize,
    /// Platform height, meters.
    pub height_m: T,
    /// Planar (ground) distance from the UE, meters.
    pub ground_distance_m: T,
    /// Frozen propagation state of the link.
    pub state: LinkState,
    /// Unit-mean exponential fading gain, strictly positive.
    pub fading: T,
}

impl<T: Scalar> UavLink<T> {
    /// 3D UE–platform distance, meters (always ≥ the height).
    pub fn range_m(&self) -> T {
        self.ground_distance_m.hypot(self.height_m)
    }

    /// Fading-free received power under `orientation`:
    /// `P · G(d, h) · r^{−α_state}`.
    fn mean_rx_w(&self, p_w: T, orientation: Orientation, alpha: T) -> T {
        let r2 = self.ground_distance_m * self.ground_distance_m + self.height_m * self.height_m;
        let gain = orientation.gain_from_geometry(self.ground_distance_m, self.height_m);
        p_w * gain * r2.sqrt().powf(-alpha)
    }
}

/// One sampled network layout around a typical UE at the origin.
#[derive(Clone, Debug)]
pub struct NetworkRealization<T> {
    /// Rayleigh-distributed planar distance to the UE's cluster parent,
    /// meters.
    pub cluster_offset_d: T,
    /// The cluster-center platform's link (tier 0, at the parent tier's
    /// height, directly above the cluster center).
    pub tier0_uav: UavLink<T>,
    /// Links to every PPP platform inside the simulation window.
    pub other_uavs: Vec<UavLink<T>>,
}

impl<T: Scalar> NetworkRealization<T> {
    /// All links, cluster-center platform first.
    pub fn links(&self) -> impl Iterator<Item = &UavLink<T>> {
        std::iter::once(&self.tier0_uav).chain(self.other_uavs.iter())
    }
}

/// Result of one simulated trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome<T> {
    /// Tier of the serving platform (0 = cluster-center platform).
    pub associated_tier: usize,
    /// Frozen state of the serving link.
    pub associated_state: LinkState,
    /// Faded received power from the serving platform, watts.
    pub received_serving_w: T,
    /// Total faded received power from every non-serving platform, watts.
    pub interference_w: T,
    /// Harvested power `ξ·(S + ΣI)`, watts.
    pub harvested_w: T,
}

/// Failures of the Monte Carlo engine.
#[derive(Debug, thiserror::Error)]
pub enum McError {
    /// Normal-approximation confidence intervals need a minimum sample.
    #[error("mc_trials must be at least 100 for interval estimates, got {got}")]
    TooFewTrials {
        /// Configured trial count.
        got: u64,
    },
    /// Cluster-parent tier index outside 1..=M.
    #[error("invalid cluster-parent tier {mu}: config has {tiers} tier(s)")]
    BadTierIndex {
        /// Requested index.
        mu: usize,
        /// Number of configured tiers.
        tiers: usize,
    },
    /// Configuration failed validation.
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// The ChaCha12 substream for one trial: keyed by `(seed, trial)` so that
/// trials are independent and order-free.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws one network realization with the cluster parent in tier 1.
pub fn sample_realization<T: Scalar, R: Rng>(
    cfg: &ScenarioConfig<T>,
    rng: &mut R,
) -> Result<NetworkRealization<T>, McError> {
    sample_realization_at(cfg, 1, rng)
}

/// Draws one network realization with the cluster parent in tier `mu`
/// (1-based): Rayleigh cluster offset, per-tier Poisson platform counts
/// uniform in the window disc, one frozen propagation state and one
/// exponential fading gain per link.
pub fn sample_realization_at<T: Scalar, R: Rng>(
    cfg: &ScenarioConfig<T>,
    mu: usize,
    rng: &mut R,
) -> Result<NetworkRealization<T>, McError> {
    cfg.validate()?;
    let tiers = cfg.tier_count();
    if mu < 1 || mu > tiers {
        return Err(McError::BadTierIndex { mu, tiers });
    }
    let window = cfg
        .mc_window_radius_m
        .to_f64()
        .expect("window radius fits in f64");
    let area = std::f64::consts::PI * window * window;
    let counts: Vec<Poisson<f64>> = cfg
        .tier_densities
        .iter()
        .map(|d| {
            Poisson::new(d.to_f64().expect("density fits in f64") * area)
                .expect("validated density gives a positive Poisson mean")
        })
        .collect();
    Ok(sample_with(cfg, mu, &counts, window, rng))
}

/// Sampling core; `counts` are the per-tier Poisson laws for the window of
/// radius `window` (precomputed once per estimate, not per trial).
fn sample_with<T: Scalar, R: Rng>(
    cfg: &ScenarioConfig<T>,
    mu: usize,
    counts: &[Poisson<f64>],
    window: f64,
    rng: &mut R,
) -> NetworkRealization<T> {
    let draw_open = |rng: &mut R| -> f64 { rng.sample(Open01) };
    let draw_link = |rng: &mut R, tier: usize, height: f64, d: f64| -> UavLink<T> {
        let r = d.hypot(height);
        let p_los = cfg
            .los_model
            .los_probability(cast::<T>(r), cast::<T>(height))
            .expect("3D range is >= height by construction")
            .to_f64()
            .expect("probability fits in f64");
        let state = if draw_open(rng) < p_los {
            LinkState::Los
        } else {
            LinkState::Nlos
        };
        let fading = -draw_open(rng).ln();
        UavLink {
            tier,
            height_m: cast(height),
            ground_distance_m: cast(d),
            state,
            fading: cast(fading),
        }
    };

    // Canonical draw order: cluster offset, cluster-center link, then each
    // tier's count and its platforms (position, state, fading).
    let sigma = cfg.cluster_sigma.to_f64().expect("sigma fits in f64");
    let offset = sigma * (-2.0 * draw_open(rng).ln()).sqrt();
    let h_mu = cfg.heights[mu - 1].to_f64().expect("height fits in f64");
    let tier0_uav = draw_link(rng, 0, h_mu, offset);

    let mut other_uavs = Vec::new();
    for (j, poisson) in counts.iter().enumerate() {
        let n = poisson.sample(rng) as u64;
        let height = cfg.heights[j].to_f64().expect("height fits in f64");
        other_uavs.reserve(n as usize);
        for _ in 0..n {
            // Radial inversion of the uniform disc law; the angle never
            // enters any observable (the UE sits at the origin of an
            // isotropic layout), so it is not drawn.
            let d = window * rng.random::<f64>().sqrt();
            other_uavs.push(draw_link(rng, j + 1, height, d));
        }
    }
    NetworkRealization {
        cluster_offset_d: cast(offset),
        tier0_uav,
        other_uavs,
    }
}

/// Applies the association rule and power equations to one realization:
/// serving platform is the fading-free argmax (ties go to the cluster-center
/// platform), fading then applies to the realized serving and interference
/// powers, and `harvested = ξ·(S + ΣI)`.
pub fn run_trial<T: Scalar>(
    realization: &NetworkRealization<T>,
    cfg: &ScenarioConfig<T>,
) -> TrialOutcome<T> {
    let powers = cfg.tx_powers_w();
    let orientation = cfg.orientation;
    let faded = |link: &UavLink<T>, mean: T| link.fading * mean;

    let mut best_other_mean = T::neg_infinity();
    let mut best_other: Option<(&UavLink<T>, T)> = None;
    let mut total_faded = T::zero();
    for link in &realization.other_uavs {
        let mean = link.mean_rx_w(powers[link.tier], orientation, cfg.alpha(link.state));
        total_faded += faded(link, mean);
        if mean > best_other_mean {
            best_other_mean = mean;
            best_other = Some((link, mean));
        }
    }
    let tier0 = &realization.tier0_uav;
    let tier0_mean = tier0.mean_rx_w(powers[0], orientation, cfg.alpha(tier0.state));
    total_faded += faded(tier0, tier0_mean);

    let (serving, serving_mean) = match best_other {
        Some((link, mean)) if tier0_mean < mean => (link, mean),
        _ => (tier0, tier0_mean),
    };
    let received_serving_w = faded(serving, serving_mean);
    let interference_w = (total_faded - received_serving_w).max(T::zero());
    TrialOutcome {
        associated_tier: serving.tier,
        associated_state: serving.state,
        received_serving_w,
        interference_w,
        harvested_w: cfg.rectifier_efficiency * (received_serving_w + interference_w),
    }
}

/// Simulates `cfg.mc_trials` independent trials (cluster parent in tier
/// `mu`) and returns the outcomes in trial order — bit-identical for a given
/// configuration regardless of thread count.
pub fn simulate_trials<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    mu: usize,
) -> Result<Vec<TrialOutcome<T>>, McError> {
    cfg.validate()?;
    let tiers = cfg.tier_count();
    if mu < 1 || mu > tiers {
        return Err(McError::BadTierIndex { mu, tiers });
    }
    let window = cfg
        .mc_window_radius_m
        .to_f64()
        .expect("window radius fits in f64");
    let area = std::f64::consts::PI * window * window;
    let counts: Vec<Poisson<f64>> = cfg
        .tier_densities
        .iter()
        .map(|d| {
            Poisson::new(d.to_f64().expect("density fits in f64") * area)
                .expect("validated density gives a positive Poisson mean")
        })
        .collect();
    Ok((0..cfg.mc_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.rng_seed, trial);
            let realization = sample_with(cfg, mu, &counts, window, &mut rng);
            run_trial(&realization, cfg)
        })
        .collect())
}

/// Monte Carlo estimate of association probabilities, mean harvested power,
/// and energy coverage over `thresholds_w` (watts), with the cluster parent
/// in tier 1.
///
/// Association and power estimates cost nothing beyond the trials already
/// run for coverage, so all quantities are always populated; pass an empty
/// threshold slice when only association or power is wanted.
pub fn estimate<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    thresholds_w: &[T],
) -> Result<CoverageResult<T>, McError> {
    estimate_multiheight(cfg, 1, thresholds_w)
}

/// Monte Carlo estimate with the cluster parent in tier `mu` (1-based).
pub fn estimate_multiheight<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    mu: usize,
    thresholds_w: &[T],
) -> Result<CoverageResult<T>, McError> {
    if cfg.mc_trials < 100 {
        return Err(McError::TooFewTrials { got: cfg.mc_trials });
    }
    let outcomes = simulate_trials(cfg, mu)?;
    let n = outcomes.len();
    let n_t = cast::<T>(n as f64);
    let z = cast::<T>(1.96);
    let tiers = cfg.tier_count();

    let combos: Vec<(usize, LinkState)> = (0..=tiers)
        .flat_map(|k| LinkState::ALL.into_iter().map(move |s| (k, s)))
        .collect();
    let combo_index =
        |k: usize, s: LinkState| -> usize { 2 * k + usize::from(s == LinkState::Nlos) };

    // Single ordered pass: association counts, per-pair coverage counts,
    // power sums.
    let mut pair_count = vec![0u64; combos.len()];
    let mut pair_covered = vec![vec![0u64; thresholds_w.len()]; combos.len()];
    let mut power_sum_per_tier = vec![T::zero(); tiers + 1];
    let mut power_sum = T::zero();
    let mut power_sum_sq = T::zero();
    for o in &outcomes {
        let ci = combo_index(o.associated_tier, o.associated_state);
        pair_count[ci] += 1;
        for (gi, &g) in thresholds_w.iter().enumerate() {
            if o.harvested_w > g {
                pair_covered[ci][gi] += 1;
            }
        }
        power_sum_per_tier[o.associated_tier] += o.harvested_w;
        power_sum += o.harvested_w;
        power_sum_sq += o.harvested_w * o.harvested_w;
    }

    let proportion_ci = |p: T, m: T| -> T {
        if m > T::zero() {
            z * (p * (T::one() - p) / m).sqrt()
        } else {
            T::zero()
        }
    };

    let mut total_ec = vec![T::zero(); thresholds_w.len()];
    for (gi, cell) in total_ec.iter_mut().enumerate() {
        let covered: u64 = pair_covered.iter().map(|row| row[gi]).sum();
        *cell = cast::<T>(covered as f64) / n_t;
    }
    let total_ec_ci: Vec<T> = total_ec.iter().map(|&p| proportion_ci(p, n_t)).collect();

    let per_tier_state: Vec<TierEc<T>> = combos
        .iter()
        .enumerate()
        .map(|(ci, &(tier, state))| {
            let m = pair_count[ci];
            let m_t = cast::<T>(m as f64);
            let conditional: Vec<T> = pair_covered[ci]
                .iter()
                .map(|&c| {
                    if m > 0 {
                        cast::<T>(c as f64) / m_t
                    } else {
                        T::zero()
                    }
                })
                .collect();
            let halfwidths = conditional.iter().map(|&p| proportion_ci(p, m_t)).collect();
            TierEc {
                tier,
                state,
                weight: m_t / n_t,
                conditional_ec: conditional,
                ci_halfwidth: Some(halfwidths),
            }
        })
        .collect();

    let association = AssociationReport {
        entries: combos
            .iter()
            .enumerate()
            .map(|(ci, &(tier, state))| AssociationEntry {
                tier,
                state,
                probability: cast::<T>(pair_count[ci] as f64) / n_t,
            })
            .collect(),
    };

    let mean_power = power_sum / n_t;
    let variance = (power_sum_sq / n_t - mean_power * mean_power).max(T::zero());
    let avg_power = AvgPowerReport {
        per_tier_w: power_sum_per_tier.iter().map(|&s| s / n_t).collect(),
        total_w: mean_power,
        total_ci_w: Some(z * (variance / n_t).sqrt()),
    };

    Ok(CoverageResult {
        engine: Engine::MonteCarlo,
        thresholds_dbm: thresholds_w.iter().map(|&g| watts_to_dbm(g)).collect(),
        total_ec: total_ec.clone(),
        total_ec_raw: total_ec,
        per_tier_state,
        association: Some(association),
        avg_power: Some(avg_power),
        total_ec_ci: Some(total_ec_ci),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::closed_form_association;
    use crate::channel::LosModel;
    use approx::assert_abs_diff_eq;

    type R = f64;
    type Config = ScenarioConfig<R>;

    /// Configuration whose PPP tier is so sparse the window is almost surely
    /// empty — isolates cluster-center behavior.
    fn lone_platform_config() -> Config {
        Config {
            tier_densities: vec![1e-12],
            uav_density: 1e-12,
            ..Config::default()
        }
    }

    #[test]
    fn cluster_offset_matches_rayleigh_mean() {
        let cfg = lone_platform_config();
        let n = 1_000_000u64;
        let sum: f64 = (0..n)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(7, t);
                sample_realization(&cfg, &mut rng).unwrap().cluster_offset_d
            })
            .sum();
        let mean = sum / n as f64;
        assert_abs_diff_eq!(
            mean,
            10.0 * (std::f64::consts::PI / 2.0).sqrt(),
            epsilon = 0.05
        );
        assert_abs_diff_eq!(mean, 12.533, epsilon = 0.05);

        let cfg90 = Config {
            cluster_sigma: 90.0,
            ..lone_platform_config()
        };
        let n90 = 200_000u64;
        let sum90: f64 = (0..n90)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(7, t);
                sample_realization(&cfg90, &mut rng)
                    .unwrap()
                    .cluster_offset_d
            })
            .sum();
        assert_abs_diff_eq!(sum90 / n90 as f64, 112.80, epsilon = 0.5);
    }

    #[test]
    fn window_platform_count_matches_poisson_mean() {
        let cfg = Config::default();
        let n = 100_000u64;
        let total: u64 = (0..n)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(11, t);
                sample_realization(&cfg, &mut rng).unwrap().other_uavs.len() as u64
            })
            .sum();
        let mean = total as f64 / n as f64;
        let expected = 1e-4 * std::f64::consts::PI * 2000.0f64.powi(2);
        assert_abs_diff_eq!(mean, expected, epsilon = 2.0);
        assert_abs_diff_eq!(expected, 1256.6, epsilon = 0.1);
    }

    #[test]
    fn offset_distribution_passes_ks_test() {
        let cfg = lone_platform_config();
        let n = 100_000usize;
        let mut draws: Vec<f64> = (0..n as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(23, t);
                sample_realization(&cfg, &mut rng).unwrap().cluster_offset_d
            })
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sigma2 = 100.0;
        let mut ks: f64 = 0.0;
        for (i, d) in draws.iter().enumerate() {
            let cdf = 1.0 - (-d * d / (2.0 * sigma2)).exp();
            let hi = (i + 1) as f64 / n as f64;
            let lo = i as f64 / n as f64;
            ks = ks.max((cdf - lo).abs()).max((hi - cdf).abs());
        }
        // 1% critical value of the one-sample KS statistic.
        assert!(
            ks < 1.628 / (n as f64).sqrt(),
            "KS statistic {ks} too large"
        );
    }

    #[test]
    fn fading_is_positive_with_unit_mean() {
        let cfg = lone_platform_config();
        let n = 100_000u64;
        let sum: f64 = (0..n)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(31, t);
                let f = sample_realization(&cfg, &mut rng).unwrap().tier0_uav.fading;
                assert!(f > 0.0);
                f
            })
            .sum();
        assert_abs_diff_eq!(sum / n as f64, 1.0, epsilon = 0.01);
    }

    #[test]
    fn empty_window_serves_cluster_center_without_interference() {
        let cfg = lone_platform_config();
        let mut rng = trial_rng(cfg.rng_seed, 0);
        let realization = sample_realization(&cfg, &mut rng).unwrap();
        assert!(realization.other_uavs.is_empty());
        let outcome = run_trial(&realization, &cfg);
        assert_eq!(outcome.associated_tier, 0);
        assert_eq!(outcome.interference_w, 0.0);
        assert!(outcome.harvested_w > 0.0);
        assert_abs_diff_eq!(
            outcome.harvested_w,
            cfg.rectifier_efficiency * outcome.received_serving_w,
            epsilon = 1e-18
        );
    }

    #[test]
    fn vv_orientation_under_platform_receives_nothing_from_server() {
        let cfg = Config {
            orientation: Orientation::Vv,
            ..Config::default()
        };
        let nadir = UavLink {
            tier: 0,
            height_m: 50.0,
            ground_distance_m: 0.0,
            state: LinkState::Los,
            fading: 1.3,
        };
        let off_axis = UavLink {
            tier: 1,
            height_m: 50.0,
            ground_distance_m: 40.0,
            state: LinkState::Los,
            fading: 0.7,
        };
        let realization = NetworkRealization {
            cluster_offset_d: 0.0,
            tier0_uav: nadir,
            other_uavs: vec![off_axis],
        };
        let outcome = run_trial(&realization, &cfg);
        // The nadir platform has zero vertical-to-vertical gain: the
        // off-axis platform serves and the nadir one contributes nothing.
        assert_eq!(outcome.associated_tier, 1);
        assert_eq!(outcome.interference_w, 0.0);
        assert!(outcome.received_serving_w > 0.0);
    }

    #[test]
    fn association_ties_go_to_the_cluster_center() {
        let cfg = Config {
            los_model: LosModel::AlwaysLos,
            ..Config::default()
        };
        let mirror = |tier: usize| UavLink {
            tier,
            height_m: 50.0,
            ground_distance_m: 30.0,
            state: LinkState::Los,
            fading: 1.0,
        };
        let realization = NetworkRealization {
            cluster_offset_d: 30.0,
            tier0_uav: mirror(0),
            other_uavs: vec![mirror(1)],
        };
        let outcome = run_trial(&realization, &cfg);
        assert_eq!(outcome.associated_tier, 0);
    }

    #[test]
    fn always_los_association_matches_closed_form() {
        let cfg = Config {
            los_model: LosModel::AlwaysLos,
            mc_trials: 100_000,
            ..Config::default()
        };
        let result = estimate(&cfg, &[]).unwrap();
        let assoc = result.association.unwrap();
        let (a0, _) = closed_form_association::<R>(cfg.uav_density, cfg.cluster_sigma);
        assert_abs_diff_eq!(a0, 0.9409, epsilon = 1e-4);
        assert_abs_diff_eq!(assoc.get(0, LinkState::Los), a0, epsilon = 0.005);
        assert_eq!(assoc.get(0, LinkState::Nlos), 0.0);
        assert_eq!(assoc.get(1, LinkState::Nlos), 0.0);
    }

    #[test]
    fn degenerate_threshold_is_always_covered() {
        let cfg = Config {
            mc_trials: 2000,
            ..Config::default()
        };
        let result = estimate(&cfg, &[1e-15]).unwrap();
        assert_eq!(result.total_ec[0], 1.0);
    }

    #[test]
    fn association_estimates_partition_the_trials() {
        let cfg = Config {
            mc_trials: 5000,
            ..Config::default()
        };
        let result = estimate(&cfg, &[]).unwrap();
        let assoc = result.association.unwrap();
        // Counts partition the trials exactly; the float sum of the four
        // shares can differ from 1 only by rounding of each share.
        assert_abs_diff_eq!(assoc.total(), 1.0, epsilon = 1e-12);
        let weight_sum: f64 = result.per_tier_state.iter().map(|p| p.weight).sum();
        assert_abs_diff_eq!(weight_sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trials_are_bit_identical_across_thread_counts() {
        let cfg = Config {
            mc_trials: 400,
            ..Config::default()
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_trials(&cfg, 1).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| simulate_trials(&cfg, 1).unwrap());
        assert_eq!(single, many);
    }

    #[test]
    fn doubling_the_window_changes_coverage_within_one_standard_error() {
        let threshold = crate::config::dbm_to_watts(0.0);
        let cfg = Config {
            mc_trials: 10_000,
            ..Config::default()
        };
        let base = estimate(&cfg, &[threshold]).unwrap();
        let wide_cfg = Config {
            mc_window_radius_m: 4000.0,
            ..cfg
        };
        let wide = estimate(&wide_cfg, &[threshold]).unwrap();
        let se = base.total_ec_ci.as_ref().unwrap()[0] / 1.96;
        assert!(
            (base.total_ec[0] - wide.total_ec[0]).abs() < se,
            "window-doubling shift {} exceeds one standard error {}",
            (base.total_ec[0] - wide.total_ec[0]).abs(),
            se
        );
    }

    #[test]
    fn too_few_trials_is_rejected() {
        let cfg = Config {
            mc_trials: 99,
            ..Config::default()
        };
        assert!(matches!(
            estimate(&cfg, &[]),
            Err(McError::TooFewTrials { got: 99 })
        ));
    }

    #[test]
    fn invalid_parent_tier_is_rejected() {
        let cfg = Config::default();
        assert!(matches!(
            estimate_multiheight(&cfg, 2, &[]),
            Err(McError::BadTierIndex { .. })
        ));
    }

    #[test]
    fn avg_power_report_is_consistent() {
        let cfg = Config {
            mc_trials: 5000,
            ..Config::default()
        };
        let result = estimate(&cfg, &[]).unwrap();
        let power = result.avg_power.unwrap();
        assert!(power.total_w > 0.0);
        assert!(power.total_ci_w.unwrap() > 0.0);
        let per_tier_sum: f64 = power.per_tier_w.iter().sum();
        assert_abs_diff_eq!(per_tier_sum, power.total_w, epsilon = 1e-12);
    }
}
