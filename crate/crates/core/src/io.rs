//! CSV and JSON emitters.
//!
//! Numbers in CSV output are written in fixed notation with six significant
//! digits so that files diff cleanly between runs.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::campaign::{CampaignResult, OutageSummary, ScenarioConfig, ValidationRow};
use crate::channel::ChannelSample;
use crate::error::Result;
use crate::geometry::{GridLayout, LayoutExport};
use crate::outage::OutageReport;
use crate::segmenter::LosTrace;
use crate::stats::Ecdf;

/// Largest number of points written per CDF curve.
pub const MAX_CDF_POINTS: usize = 1000;

pub const SEGMENTS_HEADER: &str = "realization_id,segment_index,state,start_m,length_m";
pub const CHANNEL_HEADER: &str =
    "realization_id,y_m,state,theta_deg,lambda0_db,lambda_ex_db,xi_db,lambda_total_db";

/// Fixed-point rendering with six significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0.00000".to_owned() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new digit (9.999995 -> 10.00000)
    let rounded: f64 = s.parse().unwrap_or(v);
    if rounded != 0.0 && rounded.abs().log10().floor() as i32 > magnitude && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn config_comment<W: Write>(out: &mut W, config: &ScenarioConfig) -> Result<()> {
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

pub fn write_segments_csv<W: Write>(out: &mut W, config: Option<&ScenarioConfig>, traces: &[(usize, &LosTrace)]) -> Result<()> {
    if let Some(c) = config {
        config_comment(out, c)?;
    }
    writeln!(out, "{SEGMENTS_HEADER}")?;
    for (id, trace) in traces {
        for (k, seg) in trace.segments().iter().enumerate() {
            writeln!(out, "{id},{k},{},{},{}", seg.state, fmt_sig(seg.start), fmt_sig(seg.length))?;
        }
    }
    Ok(())
}

pub fn write_channel_csv<W: Write>(
    out: &mut W,
    config: Option<&ScenarioConfig>,
    traces: &[(usize, &[ChannelSample])],
) -> Result<()> {
    if let Some(c) = config {
        config_comment(out, c)?;
    }
    writeln!(out, "{CHANNEL_HEADER}")?;
    for (id, samples) in traces {
        for s in *samples {
            writeln!(
                out,
                "{id},{},{},{},{},{},{},{}",
                fmt_sig(s.y),
                s.state,
                fmt_sig(s.theta),
                fmt_sig(s.lambda0),
                fmt_sig(s.lambda_ex),
                fmt_sig(s.xi),
                fmt_sig(s.lambda_total)
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct LayoutDocument<'a> {
    #[serde(flatten)]
    layout: LayoutExport,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a ScenarioConfig>,
}

pub fn write_layout_json<W: Write>(out: &mut W, layout: &GridLayout, config: Option<&ScenarioConfig>) -> Result<()> {
    let doc = LayoutDocument {
        layout: layout.export(),
        config,
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct OutageEntry<'a> {
    realization_id: usize,
    eirp_dbm: f64,
    lambda_outage_db: f64,
    #[serde(flatten)]
    report: &'a OutageReport,
}

#[derive(Serialize)]
struct OutageDocument<'a> {
    config: &'a ScenarioConfig,
    reports: Vec<OutageEntry<'a>>,
}

/// `reports[r][e]` is realization `r` evaluated at EIRP `config.eirp_dbm[e]`.
pub fn write_outage_json<W: Write>(out: &mut W, config: &ScenarioConfig, reports: &[(usize, Vec<OutageReport>)]) -> Result<()> {
    let budgets = config.budgets();
    let entries = reports
        .iter()
        .flat_map(|(id, per_eirp)| {
            per_eirp.iter().zip(&budgets).map(move |(report, b)| OutageEntry {
                realization_id: *id,
                eirp_dbm: b.eirp_dbm,
                lambda_outage_db: b.lambda_outage,
                report,
            })
        })
        .collect();
    serde_json::to_writer_pretty(&mut *out, &OutageDocument { config, reports: entries })?;
    writeln!(out)?;
    Ok(())
}

fn write_cdf_rows<W: Write>(out: &mut W, prefix: &str, cdf: &Ecdf) -> Result<()> {
    for (x, y) in cdf.plot_points(MAX_CDF_POINTS) {
        writeln!(out, "{prefix}{},{}", fmt_sig(x), fmt_sig(y))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    environment: &'a str,
    #[serde(flatten)]
    outage: &'a OutageSummary,
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    environment: &'a str,
    n_realizations: usize,
    mean_nlos_fraction: f64,
    nlos_runs: usize,
    ks_model_vs_oracle: Option<f64>,
    outage: Vec<SummaryEntry<'a>>,
}

/// Writes `config.json`, `nlos_cdf.csv`, `attenuation_cdf.csv`,
/// `outage_distance_cdf.csv` and `summary.json` into `dir`.
///
/// Runtime metadata is deliberately left out so that the directory
/// contents depend only on the configuration.
pub fn write_campaign_dir(dir: &Path, result: &CampaignResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let env = result.config.environment.name();

    let mut f = fs::File::create(dir.join("config.json"))?;
    serde_json::to_writer_pretty(&mut f, &result.config)?;
    writeln!(f)?;

    let mut f = fs::File::create(dir.join("nlos_cdf.csv"))?;
    writeln!(f, "environment,x_m,cdf")?;
    write_cdf_rows(&mut f, &format!("{env},"), &result.nlos_length_cdf)?;

    let mut f = fs::File::create(dir.join("attenuation_cdf.csv"))?;
    writeln!(f, "environment,x_db,cdf")?;
    write_cdf_rows(&mut f, &format!("{env},"), &result.attenuation_cdf)?;

    let mut f = fs::File::create(dir.join("outage_distance_cdf.csv"))?;
    writeln!(f, "environment,eirp_dbm,x_m,cdf")?;
    for o in &result.outage {
        write_cdf_rows(&mut f, &format!("{env},{},", fmt_sig(o.eirp_dbm)), &o.run_lengths)?;
    }

    let summary = SummaryDocument {
        environment: env,
        n_realizations: result.config.n_realizations,
        mean_nlos_fraction: result.mean_nlos_fraction,
        nlos_runs: result.nlos_length_cdf.len(),
        ks_model_vs_oracle: result.ks_model_vs_oracle,
        outage: result
            .outage
            .iter()
            .map(|o| SummaryEntry { environment: env, outage: o })
            .collect(),
    };
    let mut f = fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    Ok(())
}

/// Plain-text KS table, one row per environment.
pub fn write_validation_table<W: Write>(out: &mut W, rows: &[ValidationRow]) -> Result<()> {
    writeln!(
        out,
        "{:<12} {:>10} {:>12} {:>11} {:>11} {:>12} {:>12}",
        "environment", "ks", "ks_crit_1%", "model_runs", "oracle_runs", "model_nlos", "oracle_nlos"
    )?;
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), fmt_sig);
    for r in rows {
        writeln!(
            out,
            "{:<12} {:>10} {:>12} {:>11} {:>11} {:>12} {:>12}",
            r.environment.name(),
            opt(r.ks_distance),
            opt(r.ks_critical_1pct),
            r.model_runs,
            r.oracle_runs,
            fmt_sig(r.model_mean_nlos_fraction),
            fmt_sig(r.oracle_mean_nlos_fraction)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::LinkState;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(1000.0), "1000.00");
        assert_eq!(fmt_sig(12.5), "12.5000");
        assert_eq!(fmt_sig(0.3), "0.300000");
        assert_eq!(fmt_sig(-4.1164), "-4.11640");
        assert_eq!(fmt_sig(0.0), "0.00000");
        assert_eq!(fmt_sig(123456789.0), "123456789");
        assert_eq!(fmt_sig(9.999996), "10.0000");
        assert_eq!(fmt_sig(0.000123456789), "0.000123457");
    }

    #[test]
    fn segments_csv_layout() {
        let trace = LosTrace::from_boundaries(vec![(LinkState::Los, 0.0), (LinkState::Nlos, 12.5)], 40.0);
        let mut buf = Vec::new();
        write_segments_csv(&mut buf, None, &[(3, &trace)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "realization_id,segment_index,state,start_m,length_m\n3,0,LOS,0.00000,12.5000\n3,1,NLOS,12.5000,27.5000\n"
        );
    }

    #[test]
    fn config_is_echoed() {
        let trace = LosTrace::uniform(LinkState::Los, 1.0);
        let mut buf = Vec::new();
        write_segments_csv(&mut buf, Some(&ScenarioConfig::default()), &[(0, &trace)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("# config: {"));
        assert!(first.contains("\"environment\":\"urban\""));
    }
}
