//! Large-scale attenuation along a user path.
//!
//! Total loss in dB is `lambda0 + lambda_ex + xi`: free-space loss at the
//! ABS altitude, an elevation-dependent excess loss that differs between
//! LOS and NLOS, and a zero-mean shadow fading term with exponential
//! spatial autocorrelation `exp(-dd / d_decorr)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};
use crate::geometry::{link_angles, AbsPlacement, UePath};
use crate::segmenter::{pointwise_states, LinkState, LosTrace};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_FREQUENCY_HZ: f64 = 2.5e9;

/// Shadow fading fit constants and decorrelation distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowParams {
    pub rho_los: f64,
    pub mu_los: f64,
    pub rho_nlos: f64,
    pub mu_nlos: f64,
    /// Distance at which the correlation drops to `1/e` (m).
    pub decorrelation_distance: f64,
}

impl Default for ShadowParams {
    fn default() -> Self {
        Self {
            rho_los: 0.0272,
            mu_los: 0.7475,
            rho_nlos: 2.3197,
            mu_nlos: 0.2361,
            decorrelation_distance: 11.0,
        }
    }
}

/// What happens to the shadowing process when the link changes state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowContinuity {
    /// The normalized field carries over; only its scale jumps.
    #[default]
    CarryOver,
    /// A fresh independent value is drawn at each LOS/NLOS transition.
    Restart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    /// Distance along the path (m).
    pub y: f64,
    pub state: LinkState,
    /// Elevation angle (degrees).
    pub theta: f64,
    pub lambda0: f64,
    pub lambda_ex: f64,
    pub xi: f64,
    pub lambda_total: f64,
}

/// Free-space loss at the ABS altitude: `20 log10(4 pi h f / c)`.
pub fn reference_path_loss(h_abs: f64, frequency_hz: f64) -> Result<f64> {
    check_domain("ABS altitude", h_abs, h_abs > 0.0, "h > 0")?;
    check_domain("frequency", frequency_hz, frequency_hz > 0.0, "f > 0")?;
    Ok(20.0 * (4.0 * std::f64::consts::PI * h_abs * frequency_hz / SPEED_OF_LIGHT).log10())
}

/// Elevation-dependent excess loss.
///
/// LOS: `-20 log10(sin theta)`. NLOS: `-16.16 + 12.0436 exp(-(90 - theta) / 7.52)`.
pub fn excess_path_loss(theta_deg: f64, state: LinkState) -> Result<f64> {
    check_domain("theta", theta_deg, theta_deg > 0.0 && theta_deg <= 90.0, "0 < theta <= 90 degrees")?;
    Ok(match state {
        LinkState::Los => -20.0 * theta_deg.to_radians().sin().log10(),
        LinkState::Nlos => -16.16 + 12.0436 * (-(90.0 - theta_deg) / 7.52).exp(),
    })
}

/// Shadow fading standard deviation `rho (90 - theta)^mu` (dB).
pub fn shadow_sigma(theta_deg: f64, state: LinkState, params: &ShadowParams) -> Result<f64> {
    check_domain("theta", theta_deg, (0.0..=90.0).contains(&theta_deg), "0 <= theta <= 90 degrees")?;
    let (rho, mu) = match state {
        LinkState::Los => (params.rho_los, params.mu_los),
        LinkState::Nlos => (params.rho_nlos, params.mu_nlos),
    };
    Ok(rho * (90.0 - theta_deg).powf(mu))
}

/// Unit-variance AR(1) process indexed by distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArShadowState {
    pub normalized_value: f64,
    /// Length of the last step taken (m).
    pub step: f64,
}

impl ArShadowState {
    /// Starts from a stationary draw.
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            normalized_value: rng.sample(StandardNormal),
            step: 0.0,
        }
    }

    /// `n <- a n + sqrt(1 - a^2) e` with `a = exp(-step / d_decorr)`.
    pub fn advance<R: Rng + ?Sized>(&mut self, step: f64, decorrelation_distance: f64, rng: &mut R) -> f64 {
        let a = (-step / decorrelation_distance).exp();
        let innovation: f64 = rng.sample(StandardNormal);
        self.normalized_value = a * self.normalized_value + (1.0 - a * a).sqrt() * innovation;
        self.step = step;
        self.normalized_value
    }
}

/// Normalized shadowing field sampled at `offsets` (unit variance).
pub fn normalized_shadow_field<R: Rng + ?Sized>(
    offsets: &[f64],
    states: &[LinkState],
    params: &ShadowParams,
    continuity: ShadowContinuity,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(offsets.len());
    let mut ar = ArShadowState::new(rng);
    for k in 0..offsets.len() {
        if k > 0 {
            if continuity == ShadowContinuity::Restart && states[k] != states[k - 1] {
                ar = ArShadowState::new(rng);
            } else {
                ar.advance(offsets[k] - offsets[k - 1], params.decorrelation_distance, rng);
            }
        }
        out.push(ar.normalized_value);
    }
    out
}

/// Shadow fading `xi_k = sigma(theta_k, state_k) n_k` along the path.
pub fn generate_shadow_trace<R: Rng + ?Sized>(
    path: &UePath,
    states: &[LinkState],
    thetas: &[f64],
    params: &ShadowParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    generate_shadow_trace_with(path, states, thetas, params, ShadowContinuity::CarryOver, rng)
}

pub fn generate_shadow_trace_with<R: Rng + ?Sized>(
    path: &UePath,
    states: &[LinkState],
    thetas: &[f64],
    params: &ShadowParams,
    continuity: ShadowContinuity,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if states.len() != path.len() || thetas.len() != path.len() {
        return Err(Error::InvalidArgument(format!(
            "{} states and {} elevations for {} path samples",
            states.len(),
            thetas.len(),
            path.len()
        )));
    }
    let field = normalized_shadow_field(path.offsets(), states, params, continuity, rng);
    field
        .iter()
        .zip(states.iter().zip(thetas))
        .map(|(n, (&state, &theta))| Ok(shadow_sigma(theta, state, params)? * n))
        .collect()
}

/// Per-sample attenuation decomposition for one realization.
pub fn channel_trace<R: Rng + ?Sized>(
    path: &UePath,
    trace: &LosTrace,
    abs: &AbsPlacement,
    frequency_hz: f64,
    params: &ShadowParams,
    rng: &mut R,
) -> Result<Vec<ChannelSample>> {
    channel_trace_with(path, trace, abs, frequency_hz, params, ShadowContinuity::CarryOver, rng)
}

pub fn channel_trace_with<R: Rng + ?Sized>(
    path: &UePath,
    trace: &LosTrace,
    abs: &AbsPlacement,
    frequency_hz: f64,
    params: &ShadowParams,
    continuity: ShadowContinuity,
    rng: &mut R,
) -> Result<Vec<ChannelSample>> {
    if (trace.path_length() - path.length()).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "LOS trace covers {} m but the path is {} m long",
            trace.path_length(),
            path.length()
        )));
    }
    let axis = path.street_axis();
    let states = pointwise_states(trace, path);
    let thetas: Vec<f64> = path.points().map(|p| link_angles(p, abs, axis).theta).collect();
    let xi = generate_shadow_trace_with(path, &states, &thetas, params, continuity, rng)?;
    let lambda0 = reference_path_loss(abs.h, frequency_hz)?;

    path.offsets()
        .iter()
        .zip(states.iter().zip(thetas.iter().zip(xi)))
        .map(|(&y, (&state, (&theta, xi)))| {
            let lambda_ex = excess_path_loss(theta, state)?;
            Ok(ChannelSample {
                y,
                state,
                theta,
                lambda0,
                lambda_ex,
                xi,
                lambda_total: lambda0 + lambda_ex + xi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_path, Point2};
    use crate::stats::{autocorrelation, mean_std};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_loss_values() {
        let unit = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * 2.5e9);
        assert_abs_diff_eq!(reference_path_loss(unit, 2.5e9).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(reference_path_loss(100.0, 2.5e9).unwrap(), 80.406_583_395_324_13, epsilon = 1e-9);
        let gain = reference_path_loss(300.0, 2.5e9).unwrap() - reference_path_loss(100.0, 2.5e9).unwrap();
        assert_abs_diff_eq!(gain, 9.542_425_094_393_249, epsilon = 1e-9);
        assert!(reference_path_loss(0.0, 2.5e9).is_err());
    }

    #[test]
    fn excess_loss_values() {
        assert_abs_diff_eq!(excess_path_loss(90.0, LinkState::Los).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(excess_path_loss(30.0, LinkState::Los).unwrap(), 6.020_599_913_279_624, epsilon = 1e-9);
        assert_abs_diff_eq!(excess_path_loss(90.0, LinkState::Nlos).unwrap(), -4.1164, epsilon = 1e-12);
        assert!(excess_path_loss(0.0, LinkState::Los).is_err());
        assert!(excess_path_loss(-5.0, LinkState::Nlos).is_err());
    }

    #[test]
    fn shadow_sigma_values() {
        let p = ShadowParams::default();
        assert_eq!(shadow_sigma(90.0, LinkState::Los, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(shadow_sigma(0.0, LinkState::Los, &p).unwrap(), 0.785_896_183_680_198_7, epsilon = 1e-9);
        assert_abs_diff_eq!(shadow_sigma(0.0, LinkState::Nlos, &p).unwrap(), 6.711_637_299_845_196, epsilon = 1e-9);
    }

    #[test]
    fn infinite_decorrelation_freezes_the_field() {
        let path = UePath::new(Point2::new(0.0, 0.0), Point2::new(0.0, 30.0), 0.3).unwrap();
        let params = ShadowParams { decorrelation_distance: f64::INFINITY, ..Default::default() };
        let states = vec![LinkState::Nlos; path.len()];
        let thetas = vec![30.0; path.len()];
        let xi = generate_shadow_trace(&path, &states, &thetas, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(xi.iter().all(|v| *v == xi[0]));
    }

    #[test]
    fn vanishing_decorrelation_gives_white_noise() {
        let offsets: Vec<f64> = (0..200_000).map(|k| k as f64 * 0.3).collect();
        let states = vec![LinkState::Los; offsets.len()];
        let params = ShadowParams { decorrelation_distance: 1e-9, ..Default::default() };
        let n = normalized_shadow_field(&offsets, &states, &params, ShadowContinuity::CarryOver, &mut ChaCha8Rng::seed_from_u64(6));
        let acf = autocorrelation(&n, 1);
        assert!(acf[1].abs() < 0.01, "lag-1 correlation {}", acf[1]);
    }

    #[test]
    fn restart_redraws_at_transitions() {
        let offsets: Vec<f64> = (0..4).map(f64::from).collect();
        let states = [LinkState::Los, LinkState::Los, LinkState::Nlos, LinkState::Nlos];
        let params = ShadowParams { decorrelation_distance: f64::INFINITY, ..Default::default() };
        let carry = normalized_shadow_field(&offsets, &states, &params, ShadowContinuity::CarryOver, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(carry.iter().all(|v| *v == carry[0]));
        let restart = normalized_shadow_field(&offsets, &states, &params, ShadowContinuity::Restart, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(restart[0], restart[1]);
        assert_ne!(restart[1], restart[2]);
        assert_eq!(restart[2], restart[3]);
    }

    #[test]
    fn overhead_los_link_is_pure_free_space() {
        let path = build_path(0.6, 0.3, 20.0, 24.5).unwrap();
        let abs = AbsPlacement::new(10.0, 0.0, 120.0).unwrap();
        let trace = LosTrace::uniform(LinkState::Los, path.length());
        let samples = channel_trace(&path, &trace, &abs, 2.5e9, &ShadowParams::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let first = samples[0];
        assert_eq!(first.theta, 90.0);
        assert_eq!(first.xi, 0.0);
        assert_eq!(first.lambda_total, reference_path_loss(120.0, 2.5e9).unwrap());
    }

    #[test]
    fn seeds_change_only_shadowing() {
        let path = build_path(200.0, 0.3, 20.0, 24.5).unwrap();
        let abs = AbsPlacement::new(300.0, 100.0, 80.0).unwrap();
        let trace = LosTrace::from_boundaries(vec![(LinkState::Los, 0.0), (LinkState::Nlos, 70.0)], 200.0);
        let p = ShadowParams::default();
        let a = channel_trace(&path, &trace, &abs, 2.5e9, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = channel_trace(&path, &trace, &abs, 2.5e9, &p, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.lambda0 + x.lambda_ex, y.lambda0 + y.lambda_ex);
        }
        assert!(a.iter().zip(&b).any(|(x, y)| x.xi != y.xi));
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let path = build_path(10.0, 1.0, 20.0, 24.5).unwrap();
        let p = ShadowParams::default();
        let r = generate_shadow_trace(&path, &[LinkState::Los], &[45.0], &p, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(r.is_err());
        let abs = AbsPlacement::new(0.0, 0.0, 50.0).unwrap();
        let short = LosTrace::uniform(LinkState::Los, 5.0);
        assert!(channel_trace(&path, &short, &abs, 2.5e9, &p, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn stationary_marginal_has_unit_variance() {
        let offsets: Vec<f64> = (0..400_000).map(|k| k as f64 * 0.3).collect();
        let states = vec![LinkState::Los; offsets.len()];
        let n = normalized_shadow_field(&offsets, &states, &ShadowParams::default(), ShadowContinuity::CarryOver, &mut ChaCha8Rng::seed_from_u64(8));
        let (_, sd) = mean_std(&n).unwrap();
        assert!((sd - 1.0).abs() < 0.03, "{sd}");
    }

    proptest! {
        #[test]
        fn los_excess_is_positive_and_decreasing(t1 in 0.01f64..=90.0, t2 in 0.01f64..=90.0) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = excess_path_loss(lo, LinkState::Los).unwrap();
            let b = excess_path_loss(hi, LinkState::Los).unwrap();
            prop_assert!(a >= -1e-12 && b >= -1e-12);
            if hi > lo {
                prop_assert!(b < a);
            }
        }

        #[test]
        fn decomposition_identity(seed in any::<u64>(), x in 0.0f64..1000.0, y in 0.0f64..1000.0, h in 30.0f64..300.0) {
            let path = build_path(60.0, 0.3, 20.0, 24.5).unwrap();
            let abs = AbsPlacement::new(x, y, h).unwrap();
            let trace = LosTrace::from_boundaries(vec![(LinkState::Nlos, 0.0), (LinkState::Los, 25.0)], 60.0);
            let samples = channel_trace(&path, &trace, &abs, 2.5e9, &ShadowParams::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for s in samples {
                prop_assert!((s.lambda_total - (s.lambda0 + s.lambda_ex + s.xi)).abs() <= 1e-9);
            }
        }
    }
}
