//! Monte Carlo campaigns over random ABS placements.
//!
//! Each realization draws its randomness from independent substreams keyed
//! by the master seed and the realization index, so results do not depend
//! on how realizations are scheduled across worker threads.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_trace_with, ChannelSample, ShadowContinuity, ShadowParams, DEFAULT_FREQUENCY_HZ};
use crate::error::{Error, Result};
use crate::geometry::{build_path, generate_layout, AbsPlacement, EnvironmentParams, GridLayout, UePath};
use crate::oracle::{trace_path_los, LosMethod};
use crate::outage::{detect_outage, LinkBudget, OutageReport, DEFAULT_SENSITIVITY_DBM};
use crate::rng::{substream, StreamRole};
use crate::segmenter::{generate_segments, LinkState, LosTrace};
use crate::stats::{ks_critical_value, ks_distance, mean_std, Ecdf};

/// Reference built-up environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Suburban,
    Urban,
    DenseUrban,
    HighRise,
}

impl Environment {
    pub const ALL: [Environment; 4] = [
        Environment::Suburban,
        Environment::Urban,
        Environment::DenseUrban,
        Environment::HighRise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Environment::Suburban => "suburban",
            Environment::Urban => "urban",
            Environment::DenseUrban => "dense_urban",
            Environment::HighRise => "high_rise",
        }
    }

    /// `(alpha, beta, gamma)`.
    pub fn built_up_parameters(self) -> (f64, f64, f64) {
        match self {
            Environment::Suburban => (0.1, 750.0, 8.0),
            Environment::Urban => (0.3, 500.0, 15.0),
            Environment::DenseUrban => (0.5, 300.0, 20.0),
            Environment::HighRise => (0.5, 300.0, 50.0),
        }
    }

    pub fn params(self) -> EnvironmentParams {
        let (alpha, beta, gamma) = self.built_up_parameters();
        EnvironmentParams::new(alpha, beta, gamma).expect("reference environments are valid")
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Environment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_owned()))
    }
}

/// Environment parameters of a named preset.
pub fn preset(name: &str) -> Result<EnvironmentParams> {
    Ok(name.parse::<Environment>()?.params())
}

/// Where per-realization LOS states come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosSource {
    #[default]
    Probabilistic,
    OracleFull,
    OracleWall,
}

impl FromStr for LosSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probabilistic" => Ok(LosSource::Probabilistic),
            "oracle_full" => Ok(LosSource::OracleFull),
            "oracle_wall" => Ok(LosSource::OracleWall),
            other => Err(Error::InvalidArgument(format!(
                "unknown LOS source `{other}` (expected probabilistic, oracle_full or oracle_wall)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub environment: Environment,
    pub n_realizations: usize,
    /// ABS ground coordinates are drawn from `U(0, abs_xy_max_m)`.
    pub abs_xy_max_m: f64,
    pub abs_height_min_m: f64,
    pub abs_height_max_m: f64,
    pub path_length_m: f64,
    pub resolution_m: f64,
    pub frequency_hz: f64,
    pub eirp_dbm: Vec<f64>,
    pub sensitivity_dbm: f64,
    pub seed: u64,
    pub los_source: LosSource,
    pub shadow: ShadowParams,
    pub shadow_continuity: ShadowContinuity,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            environment: Environment::Urban,
            n_realizations: 1000,
            abs_xy_max_m: 1000.0,
            abs_height_min_m: 30.0,
            abs_height_max_m: 300.0,
            path_length_m: 1000.0,
            resolution_m: 0.3,
            frequency_hz: DEFAULT_FREQUENCY_HZ,
            eirp_dbm: vec![13.0, 18.0, 23.0],
            sensitivity_dbm: DEFAULT_SENSITIVITY_DBM,
            seed: 0,
            los_source: LosSource::Probabilistic,
            shadow: ShadowParams::default(),
            shadow_continuity: ShadowContinuity::CarryOver,
        }
    }
}

impl ScenarioConfig {
    pub fn for_environment(environment: Environment) -> Self {
        Self {
            environment,
            ..Self::default()
        }
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        if !(self.abs_xy_max_m > 0.0) {
            return bad(format!("abs_xy_max_m must be positive, got {}", self.abs_xy_max_m));
        }
        if !(self.abs_height_min_m > 0.0 && self.abs_height_min_m <= self.abs_height_max_m) {
            return bad(format!(
                "ABS altitude range [{}, {}] must be positive and ordered",
                self.abs_height_min_m, self.abs_height_max_m
            ));
        }
        if !(self.path_length_m > 0.0 && self.resolution_m > 0.0) {
            return bad("path_length_m and resolution_m must be positive".into());
        }
        if !(self.frequency_hz > 0.0) {
            return bad(format!("frequency_hz must be positive, got {}", self.frequency_hz));
        }
        if self.eirp_dbm.is_empty() {
            return bad("at least one EIRP value is required".into());
        }
        let s = &self.shadow;
        if ![s.rho_los, s.mu_los, s.rho_nlos, s.mu_nlos, s.decorrelation_distance]
            .iter()
            .all(|v| *v > 0.0)
        {
            return bad("shadow fading parameters must be positive".into());
        }
        Ok(())
    }

    pub fn params(&self) -> EnvironmentParams {
        self.environment.params()
    }

    pub fn path(&self) -> Result<UePath> {
        let p = self.params();
        build_path(self.path_length_m, self.resolution_m, p.street_width, p.building_width)
    }

    pub fn budgets(&self) -> Vec<LinkBudget> {
        self.eirp_dbm
            .iter()
            .map(|&e| LinkBudget::new(e, self.sensitivity_dbm))
            .collect()
    }
}

/// Everything produced by one realization.
#[derive(Debug, Clone)]
pub struct Realization {
    pub index: usize,
    pub abs: AbsPlacement,
    /// Present for oracle LOS sources.
    pub layout: Option<GridLayout>,
    /// Unmerged LOS/NLOS segments.
    pub los_trace: LosTrace,
    pub channel: Vec<ChannelSample>,
    /// One report per configured EIRP, in configuration order.
    pub outage: Vec<OutageReport>,
}

fn sample_abs(config: &ScenarioConfig, index: usize) -> Result<AbsPlacement> {
    let mut rng = substream(config.seed, index as u64, StreamRole::AbsPlacement);
    let x = rng.random_range(0.0..config.abs_xy_max_m);
    let y = rng.random_range(0.0..config.abs_xy_max_m);
    let h = if config.abs_height_max_m > config.abs_height_min_m {
        rng.random_range(config.abs_height_min_m..config.abs_height_max_m)
    } else {
        config.abs_height_min_m
    };
    AbsPlacement::new(x, y, h)
}

fn check_index(config: &ScenarioConfig, index: usize) -> Result<()> {
    if index >= config.n_realizations {
        return Err(Error::IndexOutOfRange {
            index,
            count: config.n_realizations,
        });
    }
    Ok(())
}

/// City layout of one realization, drawn from its own substream.
///
/// The oracle LOS sources trace against this layout; the probabilistic
/// source never looks at it.
pub fn realization_layout(config: &ScenarioConfig, index: usize) -> Result<GridLayout> {
    check_index(config, index)?;
    let params = config.params();
    let extent = params.default_grid_extent();
    let mut rng = substream(config.seed, index as u64, StreamRole::Layout);
    generate_layout(params, extent, extent, &mut rng)
}

/// ABS placement, optional layout and raw LOS trace of one realization.
pub fn realization_los(
    config: &ScenarioConfig,
    path: &UePath,
    index: usize,
) -> Result<(AbsPlacement, Option<GridLayout>, LosTrace)> {
    check_index(config, index)?;
    let params = config.params();
    let abs = sample_abs(config, index)?;
    let method = match config.los_source {
        LosSource::Probabilistic => {
            let mut rng = substream(config.seed, index as u64, StreamRole::Segments);
            let trace = generate_segments(&params, &abs, path, &mut rng)?;
            return Ok((abs, None, trace));
        }
        LosSource::OracleFull => LosMethod::Full,
        LosSource::OracleWall => LosMethod::Wall,
    };
    let layout = realization_layout(config, index)?;
    let trace = trace_path_los(path, &abs, &layout, method)?;
    Ok((abs, Some(layout), trace))
}

pub fn run_realization(config: &ScenarioConfig, index: usize) -> Result<Realization> {
    config.validate()?;
    let path = config.path()?;
    run_realization_on(config, &path, index)
}

fn run_realization_on(config: &ScenarioConfig, path: &UePath, index: usize) -> Result<Realization> {
    let (abs, layout, los_trace) = realization_los(config, path, index)?;
    let mut rng = substream(config.seed, index as u64, StreamRole::Shadowing);
    let channel = channel_trace_with(
        path,
        &los_trace,
        &abs,
        config.frequency_hz,
        &config.shadow,
        config.shadow_continuity,
        &mut rng,
    )?;
    let outage = config
        .budgets()
        .iter()
        .map(|b| detect_outage(&channel, b))
        .collect::<Result<_>>()?;
    Ok(Realization {
        index,
        abs,
        layout,
        los_trace,
        channel,
        outage,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunLengthPercentiles {
    #[serde(rename = "50")]
    pub p50: f64,
    #[serde(rename = "90")]
    pub p90: f64,
    #[serde(rename = "95")]
    pub p95: f64,
    #[serde(rename = "99")]
    pub p99: f64,
}

impl RunLengthPercentiles {
    fn of(cdf: &Ecdf) -> Option<Self> {
        Some(Self {
            p50: cdf.quantile(0.50)?,
            p90: cdf.quantile(0.90)?,
            p95: cdf.quantile(0.95)?,
            p99: cdf.quantile(0.99)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageSummary {
    pub eirp_dbm: f64,
    pub lambda_outage_db: f64,
    /// Outage samples over all samples, pooled across realizations.
    pub outage_probability_mean: f64,
    pub outage_probability_ci95: [f64; 2],
    /// `None` when no realization had any outage.
    pub run_length_percentiles: Option<RunLengthPercentiles>,
    #[serde(skip)]
    pub run_lengths: Ecdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuntimeMetadata {
    pub elapsed_seconds: f64,
    pub worker_threads: usize,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub config: ScenarioConfig,
    /// Merged NLOS run lengths (m).
    pub nlos_length_cdf: Ecdf,
    /// Total attenuation of every path sample (dB).
    pub attenuation_cdf: Ecdf,
    /// One entry per configured EIRP.
    pub outage: Vec<OutageSummary>,
    pub mean_nlos_fraction: f64,
    pub ks_model_vs_oracle: Option<f64>,
    pub runtime: RuntimeMetadata,
}

struct RealizationSummary {
    nlos_lengths: Vec<f64>,
    nlos_fraction: f64,
    attenuation: Vec<f64>,
    outage: Vec<OutageReport>,
}

pub fn run_campaign(config: &ScenarioConfig) -> Result<CampaignResult> {
    config.validate()?;
    let started = Instant::now();
    let path = config.path()?;
    let summaries: Vec<RealizationSummary> = (0..config.n_realizations)
        .into_par_iter()
        .map(|index| {
            let r = run_realization_on(config, &path, index)?;
            let merged = r.los_trace.merged();
            Ok(RealizationSummary {
                nlos_lengths: merged.lengths_of(LinkState::Nlos).collect(),
                nlos_fraction: merged.nlos_fraction(),
                attenuation: r.channel.iter().map(|s| s.lambda_total).collect(),
                outage: r.outage,
            })
        })
        .collect::<Result<_>>()?;

    let nlos_length_cdf = Ecdf::new(summaries.iter().flat_map(|s| s.nlos_lengths.iter().copied()).collect());
    let attenuation_cdf = Ecdf::new(summaries.iter().flat_map(|s| s.attenuation.iter().copied()).collect());
    let mean_nlos_fraction = summaries.iter().map(|s| s.nlos_fraction).sum::<f64>() / summaries.len() as f64;

    let outage = config
        .budgets()
        .iter()
        .enumerate()
        .map(|(k, budget)| {
            let reports: Vec<&OutageReport> = summaries.iter().map(|s| &s.outage[k]).collect();
            summarize_outage(budget, &reports)
        })
        .collect();

    Ok(CampaignResult {
        config: config.clone(),
        nlos_length_cdf,
        attenuation_cdf,
        outage,
        mean_nlos_fraction,
        ks_model_vs_oracle: None,
        runtime: RuntimeMetadata {
            elapsed_seconds: started.elapsed().as_secs_f64(),
            worker_threads: rayon::current_num_threads(),
        },
    })
}

fn summarize_outage(budget: &LinkBudget, reports: &[&OutageReport]) -> OutageSummary {
    let points: usize = reports.iter().map(|r| r.outage_points).sum();
    let total: usize = reports.iter().map(|r| r.total_points).sum();
    let mean = points as f64 / total as f64;
    let per_realization: Vec<f64> = reports.iter().map(|r| r.outage_probability).collect();
    let half_width = mean_std(&per_realization)
        .map(|(_, sd)| 1.96 * sd / (per_realization.len() as f64).sqrt())
        .unwrap_or(0.0);
    let run_lengths = Ecdf::new(reports.iter().flat_map(|r| r.outage_runs.iter().copied()).collect());
    OutageSummary {
        eirp_dbm: budget.eirp_dbm,
        lambda_outage_db: budget.lambda_outage,
        outage_probability_mean: mean,
        outage_probability_ci95: [(mean - half_width).max(0.0), (mean + half_width).min(1.0)],
        run_length_percentiles: RunLengthPercentiles::of(&run_lengths),
        run_lengths,
    }
}

/// Merged NLOS run lengths pooled over all realizations of `config`, and
/// the mean NLOS fraction. Only the LOS stage is run.
pub fn nlos_pool(config: &ScenarioConfig) -> Result<(Ecdf, f64)> {
    config.validate()?;
    let path = config.path()?;
    let per_realization: Vec<(Vec<f64>, f64)> = (0..config.n_realizations)
        .into_par_iter()
        .map(|index| {
            let (_, _, trace) = realization_los(config, &path, index)?;
            let merged = trace.merged();
            Ok((merged.lengths_of(LinkState::Nlos).collect(), merged.nlos_fraction()))
        })
        .collect::<Result<_>>()?;
    let mean_fraction = per_realization.iter().map(|r| r.1).sum::<f64>() / per_realization.len() as f64;
    let pool = Ecdf::new(per_realization.into_iter().flat_map(|r| r.0).collect());
    Ok((pool, mean_fraction))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub environment: Environment,
    pub ks_distance: Option<f64>,
    /// Two-sample KS critical value at the 1 % level for these pool sizes.
    pub ks_critical_1pct: Option<f64>,
    pub model_runs: usize,
    pub oracle_runs: usize,
    pub model_mean_nlos_fraction: f64,
    pub oracle_mean_nlos_fraction: f64,
    #[serde(skip)]
    pub model_pool: Ecdf,
    #[serde(skip)]
    pub oracle_pool: Ecdf,
}

/// Compares merged NLOS run lengths of the probabilistic model with the
/// single-wall geometric oracle under the same ABS placements.
pub fn validate_model_vs_oracle(config: &ScenarioConfig) -> Result<ValidationRow> {
    let model = ScenarioConfig {
        los_source: LosSource::Probabilistic,
        ..config.clone()
    };
    let oracle = ScenarioConfig {
        los_source: LosSource::OracleWall,
        ..config.clone()
    };
    let (model_pool, model_fraction) = nlos_pool(&model)?;
    let (oracle_pool, oracle_fraction) = nlos_pool(&oracle)?;
    let ks = ks_distance(&model_pool, &oracle_pool);
    let critical = (!model_pool.is_empty() && !oracle_pool.is_empty())
        .then(|| ks_critical_value(model_pool.len(), oracle_pool.len(), 0.01));
    Ok(ValidationRow {
        environment: config.environment,
        ks_distance: ks,
        ks_critical_1pct: critical,
        model_runs: model_pool.len(),
        oracle_runs: oracle_pool.len(),
        model_mean_nlos_fraction: model_fraction,
        oracle_mean_nlos_fraction: oracle_fraction,
        model_pool,
        oracle_pool,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn presets() {
        let s = preset("suburban").unwrap();
        assert_eq!(s.gamma, 8.0);
        assert_abs_diff_eq!(s.street_width, 25.0, epsilon = 0.1);
        assert_abs_diff_eq!(s.building_width, 11.5, epsilon = 0.1);
        let d = preset("dense_urban").unwrap();
        let h = preset("high_rise").unwrap();
        assert_eq!((d.street_width, d.building_width), (h.street_width, h.building_width));
        assert_eq!(h.gamma, 50.0);
        let u = preset("urban").unwrap();
        assert_eq!((u.alpha, u.beta, u.gamma), (0.3, 500.0, 15.0));
        assert!(matches!(preset("rural"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn realization_is_reproducible() {
        let config = ScenarioConfig { n_realizations: 3, path_length_m: 200.0, ..Default::default() };
        let a = run_realization(&config, 1).unwrap();
        let b = run_realization(&config, 1).unwrap();
        assert_eq!(a.abs, b.abs);
        assert_eq!(a.los_trace, b.los_trace);
        assert_eq!(a.channel, b.channel);
        assert_eq!(a.outage, b.outage);
        assert!(matches!(run_realization(&config, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn abs_placements_are_uniform() {
        let config = ScenarioConfig::default();
        // chi-square over a 5 x 5 grid of the placement square, 1000 draws
        let mut counts = [0usize; 25];
        for index in 0..1000 {
            let abs = sample_abs(&config, index).unwrap();
            assert!((30.0..300.0).contains(&abs.h));
            let cx = (abs.x / 200.0) as usize;
            let cy = (abs.y / 200.0) as usize;
            counts[cx * 5 + cy] += 1;
        }
        let expected = 40.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square 99th percentile, 24 degrees of freedom
        assert!(chi2 < 42.98, "chi2 = {chi2}");
    }

    #[test]
    fn single_realization_campaign() {
        let config = ScenarioConfig { n_realizations: 1, path_length_m: 300.0, ..Default::default() };
        let result = run_campaign(&config).unwrap();
        assert_eq!(result.attenuation_cdf.len(), config.path().unwrap().len());
        assert_eq!(result.outage.len(), 3);
        for o in &result.outage {
            assert_eq!(o.outage_probability_ci95, [o.outage_probability_mean; 2]);
        }
    }

    #[test]
    fn oracle_realization_carries_layout() {
        let config = ScenarioConfig {
            n_realizations: 2,
            path_length_m: 100.0,
            los_source: LosSource::OracleWall,
            ..Default::default()
        };
        let r = run_realization(&config, 0).unwrap();
        let layout = r.layout.expect("oracle sources sample a layout");
        assert_eq!(layout.rows(), config.params().default_grid_extent());
    }

    #[test]
    fn invalid_configs() {
        let mut c = ScenarioConfig { n_realizations: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c.n_realizations = 1;
        c.eirp_dbm.clear();
        assert!(c.validate().is_err());
        assert!("mystery".parse::<LosSource>().is_err());
    }
}
