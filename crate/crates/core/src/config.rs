//! TOML scenario files.
//!
//! Every key is optional; omitted keys take the reference defaults of
//! [`ScenarioConfig`]. Unknown keys are rejected.
//!
//! ```toml
//! preset = "dense_urban"
//! n_realizations = 200
//! seed = 7
//! eirp_dbm = [13, 23]
//! ```

use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::campaign::{Environment, LosSource, ScenarioConfig};
use crate::channel::ShadowContinuity;
use crate::error::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<Spanned<String>>,
    n_realizations: Option<usize>,
    seed: Option<u64>,
    los_source: Option<Spanned<String>>,
    path_length_m: Option<f64>,
    resolution_m: Option<f64>,
    frequency_hz: Option<f64>,
    eirp_dbm: Option<Vec<f64>>,
    sensitivity_dbm: Option<f64>,
    abs_xy_max_m: Option<f64>,
    abs_height_min_m: Option<f64>,
    abs_height_max_m: Option<f64>,
    decorrelation_distance_m: Option<f64>,
    shadow_continuity: Option<ShadowContinuity>,
}

fn line_of(text: &str, span: Option<Range<usize>>) -> usize {
    span.map_or(0, |r| text[..r.start.min(text.len())].matches('\n').count() + 1)
}

fn spanned_error(text: &str, value: &Spanned<String>, err: Error) -> Error {
    Error::Config {
        line: line_of(text, Some(value.span())),
        message: err.to_string(),
    }
}

/// Parses a scenario file into a fully resolved configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config {
        line: line_of(text, e.span()),
        message: e.message().to_owned(),
    })?;

    let mut config = ScenarioConfig::default();
    if let Some(p) = &file.preset {
        config.environment = p
            .get_ref()
            .parse::<Environment>()
            .map_err(|e| spanned_error(text, p, e))?;
    }
    if let Some(s) = &file.los_source {
        config.los_source = s
            .get_ref()
            .parse::<LosSource>()
            .map_err(|e| spanned_error(text, s, e))?;
    }
    macro_rules! set {
        ($($key:ident => $field:expr),* $(,)?) => {
            $(if let Some(v) = file.$key { $field = v; })*
        };
    }
    set! {
        n_realizations => config.n_realizations,
        seed => config.seed,
        path_length_m => config.path_length_m,
        resolution_m => config.resolution_m,
        frequency_hz => config.frequency_hz,
        eirp_dbm => config.eirp_dbm,
        sensitivity_dbm => config.sensitivity_dbm,
        abs_xy_max_m => config.abs_xy_max_m,
        abs_height_min_m => config.abs_height_min_m,
        abs_height_max_m => config.abs_height_max_m,
        decorrelation_distance_m => config.shadow.decorrelation_distance,
        shadow_continuity => config.shadow_continuity,
    }
    config.validate().map_err(|e| Error::Config {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
