use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use a2g_channel::campaign::{
    realization_layout, run_campaign, run_realization, validate_model_vs_oracle, Environment, LosSource, Realization,
    ScenarioConfig,
};
use a2g_channel::channel::ShadowContinuity;
use a2g_channel::config::load_config;
use a2g_channel::io::{
    write_campaign_dir, write_channel_csv, write_layout_json, write_outage_json, write_segments_csv,
    write_validation_table,
};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "a2g-sim", version, about = "Spatially consistent air-to-ground channel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the city layout of one realization as JSON.
    Layout(ScenarioArgs),
    /// Emit merged LOS/NLOS segments as CSV.
    Segments(ScenarioArgs),
    /// Emit per-sample attenuation traces as CSV.
    Channel(ScenarioArgs),
    /// Emit per-realization outage reports as JSON.
    Outage(ScenarioArgs),
    /// Run a full campaign and write its result directory.
    Campaign(ScenarioArgs),
    /// Compare model and wall-oracle NLOS lengths for every environment.
    Validate(ScenarioArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (directory for `campaign`). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// suburban, urban, dense_urban or high_rise.
    #[arg(long)]
    preset: Option<Environment>,
    /// Number of realizations.
    #[arg(long = "n")]
    n_realizations: Option<usize>,
    /// Worker threads for campaign and validate (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Realization index for `layout`.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// probabilistic, oracle_full or oracle_wall.
    #[arg(long)]
    los_source: Option<LosSource>,
    #[arg(long)]
    path_length_m: Option<f64>,
    #[arg(long)]
    resolution_m: Option<f64>,
    #[arg(long)]
    frequency_hz: Option<f64>,
    /// Comma-separated list, e.g. 13,18,23.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eirp_dbm: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    sensitivity_dbm: Option<f64>,
    #[arg(long)]
    abs_xy_max_m: Option<f64>,
    #[arg(long)]
    abs_height_min_m: Option<f64>,
    #[arg(long)]
    abs_height_max_m: Option<f64>,
    #[arg(long)]
    decorrelation_distance_m: Option<f64>,
    /// carry_over or restart.
    #[arg(long, value_parser = parse_continuity)]
    shadow_continuity: Option<ShadowContinuity>,
}

fn parse_continuity(s: &str) -> Result<ShadowContinuity, String> {
    match s {
        "carry_over" => Ok(ShadowContinuity::CarryOver),
        "restart" => Ok(ShadowContinuity::Restart),
        other => Err(format!("unknown shadow continuity `{other}` (expected carry_over or restart)")),
    }
}

impl ScenarioArgs {
    fn resolve(&self) -> anyhow::Result<ScenarioConfig> {
        let mut c = match &self.config {
            Some(path) => load_config(path).with_context(|| format!("reading {}", path.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(v) = self.preset {
            c.environment = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.n_realizations {
            c.n_realizations = v;
        }
        if let Some(v) = self.los_source {
            c.los_source = v;
        }
        if let Some(v) = self.path_length_m {
            c.path_length_m = v;
        }
        if let Some(v) = self.resolution_m {
            c.resolution_m = v;
        }
        if let Some(v) = self.frequency_hz {
            c.frequency_hz = v;
        }
        if let Some(v) = &self.eirp_dbm {
            c.eirp_dbm = v.clone();
        }
        if let Some(v) = self.sensitivity_dbm {
            c.sensitivity_dbm = v;
        }
        if let Some(v) = self.abs_xy_max_m {
            c.abs_xy_max_m = v;
        }
        if let Some(v) = self.abs_height_min_m {
            c.abs_height_min_m = v;
        }
        if let Some(v) = self.abs_height_max_m {
            c.abs_height_max_m = v;
        }
        if let Some(v) = self.decorrelation_distance_m {
            c.shadow.decorrelation_distance = v;
        }
        if let Some(v) = self.shadow_continuity {
            c.shadow_continuity = v;
        }
        c.validate()?;
        Ok(c)
    }

    fn output(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => {
                Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn init_threads(&self) -> anyhow::Result<()> {
        if let Some(n) = self.threads {
            if n == 0 {
                bail!("--threads must be at least 1");
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        Ok(())
    }
}

fn realizations(config: &ScenarioConfig) -> anyhow::Result<Vec<Realization>> {
    (0..config.n_realizations)
        .map(|i| run_realization(config, i).with_context(|| format!("realization {i}")))
        .collect()
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Layout(args) => {
            let config = args.resolve()?;
            let layout = realization_layout(&config, args.index)?;
            let mut out = args.output()?;
            write_layout_json(&mut out, &layout, Some(&config))?;
            out.flush()?;
        }
        Command::Segments(args) => {
            let config = args.resolve()?;
            let runs = realizations(&config)?;
            let merged: Vec<_> = runs.iter().map(|r| r.los_trace.merged()).collect();
            let rows: Vec<_> = runs.iter().zip(&merged).map(|(r, t)| (r.index, t)).collect();
            let mut out = args.output()?;
            write_segments_csv(&mut out, Some(&config), &rows)?;
            out.flush()?;
        }
        Command::Channel(args) => {
            let config = args.resolve()?;
            let runs = realizations(&config)?;
            let rows: Vec<_> = runs.iter().map(|r| (r.index, r.channel.as_slice())).collect();
            let mut out = args.output()?;
            write_channel_csv(&mut out, Some(&config), &rows)?;
            out.flush()?;
        }
        Command::Outage(args) => {
            let config = args.resolve()?;
            let runs = realizations(&config)?;
            let rows: Vec<_> = runs.into_iter().map(|r| (r.index, r.outage)).collect();
            let mut out = args.output()?;
            write_outage_json(&mut out, &config, &rows)?;
            out.flush()?;
        }
        Command::Campaign(args) => {
            let Some(dir) = args.out.clone() else {
                bail!("campaign needs --out <DIR>");
            };
            let config = args.resolve()?;
            args.init_threads()?;
            let result = run_campaign(&config)?;
            write_campaign_dir(&dir, &result).with_context(|| format!("writing {}", dir.display()))?;
            eprintln!(
                "{} realizations in {:.1} s on {} threads -> {}",
                config.n_realizations,
                result.runtime.elapsed_seconds,
                result.runtime.worker_threads,
                dir.display()
            );
        }
        Command::Validate(args) => {
            let config = args.resolve()?;
            args.init_threads()?;
            let rows = Environment::ALL
                .into_iter()
                .map(|environment| validate_model_vs_oracle(&ScenarioConfig { environment, ..config.clone() }))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = args.output()?;
            writeln!(out, "# config: {}", serde_json::to_string(&config)?)?;
            write_validation_table(&mut out, &rows)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("a2g-sim: error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
