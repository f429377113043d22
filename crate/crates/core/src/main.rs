use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use celltriage::classifier::StrategicRule;
use celltriage::figures::{cluster_geojson, emit_figure_data, zones_geojson, FigureData};
use celltriage::planning::ZoneAggregation;
use celltriage::report::{
    baseline_section, classify_section, cluster_section, run_analysis, stats_section,
    temporal_section, to_canonical_json, zones_section, AnalysisConfig, Dataset,
};
use celltriage::temporal::MonthRange;
use celltriage::thresholds::{QuantileConfig, ThresholdOverrides};
use celltriage::{ColumnMapping, Error, Gazetteer};

#[derive(Parser)]
#[command(name = "celltriage", version, about = "Cell-tower snapshot analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the input and list quarantined rows.
    Validate(RunArgs),
    /// Label every accepted tower.
    Classify(RunArgs),
    /// Cluster towers spatially and label the clusters.
    Cluster(RunArgs),
    /// Group comparisons by radio and by label.
    Stats(RunArgs),
    /// Monthly update series, phase comparison and freshness.
    Temporal(RunArgs),
    /// Demand zones, LTE gaps and high-range/low-usage towers.
    Zones(RunArgs),
    /// Top cells inside the busiest area code.
    Baseline(RunArgs),
    /// Full analysis report, or one figure's data with --figure.
    Report(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Geojson,
}

#[derive(Args)]
struct RunArgs {
    /// Tower CSV (OpenCelliD layout unless remapped with --column).
    #[arg(long)]
    input: PathBuf,
    /// Gazetteer CSV with name, admin, lat, lon columns.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Remap a logical field to an input header, e.g. `range_m=range`.
    #[arg(long = "column", value_name = "FIELD=HEADER")]
    columns: Vec<String>,

    #[arg(long, default_value_t = 0.9)]
    q_high: f64,
    #[arg(long, default_value_t = 0.1)]
    q_low: f64,
    #[arg(long, default_value_t = 0.75)]
    q_long: f64,

    #[arg(long)]
    t_high_samples: Option<f64>,
    #[arg(long)]
    t_low_samples: Option<f64>,
    #[arg(long)]
    t_high_density: Option<f64>,
    #[arg(long)]
    t_low_density: Option<f64>,
    #[arg(long)]
    t_long_days: Option<f64>,

    /// Number of spatial clusters.
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, env = "CELLTRIAGE_SEED", default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1000.0)]
    strategic_range_m: f64,
    #[arg(long, default_value_t = 1.0)]
    strategic_max_samples: f64,

    #[arg(long, default_value = "2023-12..2024-05")]
    phase_a: MonthRange,
    #[arg(long, default_value = "2024-12..2025-05")]
    phase_b: MonthRange,
    /// Freshness window in days.
    #[arg(long, default_value_t = 365)]
    window_days: u32,
    /// Cells kept by the baseline.
    #[arg(long, default_value_t = 10)]
    n_c: usize,
    /// Clusters listed in the priority ranking.
    #[arg(long, default_value_t = 3)]
    priority_n: usize,
    #[arg(long, value_enum, default_value_t = ZoneAggregation::Max)]
    zone_agg: ZoneAggregation,
    /// Use Welch's t-test for the cluster contrasts.
    #[arg(long)]
    welch: bool,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Emit the data behind one figure (report only).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    figure: Option<u8>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::UnknownFigure(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

impl RunArgs {
    fn config(&self) -> CliResult<AnalysisConfig> {
        let cfg = AnalysisConfig {
            quantiles: QuantileConfig {
                q_high: self.q_high,
                q_low: self.q_low,
                q_long: self.q_long,
            },
            overrides: ThresholdOverrides {
                high_samples: self.t_high_samples,
                low_samples: self.t_low_samples,
                high_density: self.t_high_density,
                low_density: self.t_low_density,
                long_active: self.t_long_days,
            },
            strategic: StrategicRule {
                min_range_m: self.strategic_range_m,
                max_samples: self.strategic_max_samples,
            },
            clusters: self.k,
            seed: self.seed,
            phase_a: self.phase_a,
            phase_b: self.phase_b,
            freshness_window_days: self.window_days,
            top_cells: self.n_c,
            priority_top_n: self.priority_n,
            zone_aggregation: self.zone_agg,
            welch: self.welch,
        };
        cfg.quantiles.validate()?;
        Ok(cfg)
    }

    fn mapping(&self) -> CliResult<ColumnMapping> {
        let mut mapping = ColumnMapping::default();
        for spec in &self.columns {
            let (field, header) = spec.split_once('=').ok_or_else(|| {
                Failure::usage(format!("--column expects FIELD=HEADER, got '{spec}'"))
            })?;
            mapping.set(field.trim(), header.trim())?;
        }
        Ok(mapping)
    }

    fn dataset(&self) -> CliResult<Dataset> {
        let file = open(&self.input, "input")?;
        let ds = Dataset::from_reader(BufReader::new(file), &self.mapping()?)?;
        eprintln!(
            "celltriage: {} of {} rows accepted, {} quarantined",
            ds.validation.accepted_count,
            ds.validation.total_rows,
            ds.validation.quarantined.len()
        );
        Ok(ds)
    }

    fn gazetteer(&self, command: &str) -> CliResult<Gazetteer> {
        let path = self
            .gazetteer
            .as_ref()
            .ok_or_else(|| Failure::usage(format!("'{command}' requires --gazetteer")))?;
        Ok(Gazetteer::from_csv(BufReader::new(open(
            path,
            "gazetteer",
        )?))?)
    }

    fn formats(&self, allowed: &[Format], command: &str) -> CliResult<()> {
        if !allowed.contains(&self.format) {
            let name = self
                .format
                .to_possible_value()
                .expect("no skipped variants");
            return Err(Failure::usage(format!(
                "'{command}' does not support --format {}",
                name.get_name()
            )));
        }
        if self.figure.is_some() && command != "report" {
            return Err(Failure::usage("--figure is only valid with 'report'"));
        }
        Ok(())
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
            }
        }
        Ok(())
    }
}

fn open(path: &Path, what: &str) -> CliResult<File> {
    File::open(path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot open {what} '{}': {e}", path.display()),
    })
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct ClusterCsvRow<'a> {
    cluster_id: &'a str,
    classification: &'a str,
    member_count: usize,
    total_samples: u64,
    mean_range_m: f64,
    cluster_density: f64,
    median_active_days: f64,
    centroid_lat: f64,
    centroid_lon: f64,
}

fn run(command: Command) -> CliResult<()> {
    use Format::*;
    match command {
        Command::Validate(a) => {
            a.formats(&[Json, Csv], "validate")?;
            let ds = a.dataset()?;
            let text = match a.format {
                Csv => to_csv(
                    ds.validation
                        .quarantined
                        .iter()
                        .map(|q| (q.row, q.reason.to_string())),
                )
                .map(|body| format!("row,reason\n{body}"))?,
                _ => to_canonical_json(&ds.validation)?,
            };
            a.emit(&text)
        }
        Command::Classify(a) => {
            a.formats(&[Json, Csv], "classify")?;
            let section = classify_section(&a.dataset()?, &a.config()?)?;
            let text = match a.format {
                Csv => to_csv(&section.towers)?,
                _ => to_canonical_json(&section)?,
            };
            a.emit(&text)
        }
        Command::Cluster(a) => {
            a.formats(&[Json, Csv, Geojson], "cluster")?;
            let (ds, cfg) = (a.dataset()?, a.config()?);
            let section = cluster_section(&ds, &cfg)?;
            let text = match a.format {
                Json => to_canonical_json(&section)?,
                Csv => to_csv(section.clusters.iter().map(|c| {
                    let p = &c.profile;
                    ClusterCsvRow {
                        cluster_id: &p.cluster_id,
                        classification: c.classification.as_str(),
                        member_count: p.member_count,
                        total_samples: p.total_samples,
                        mean_range_m: p.mean_range_m,
                        cluster_density: p.cluster_density,
                        median_active_days: p.median_active_days,
                        centroid_lat: p.centroid_lat,
                        centroid_lon: p.centroid_lon,
                    }
                }))?,
                Geojson => {
                    let towers = classify_section(&ds, &cfg)?.towers;
                    to_canonical_json(&cluster_geojson(&section, &towers)?)?
                }
            };
            a.emit(&text)
        }
        Command::Stats(a) => {
            a.formats(&[Json], "stats")?;
            let (ds, cfg) = (a.dataset()?, a.config()?);
            let labels = classify_section(&ds, &cfg)?.labels();
            a.emit(&to_canonical_json(&stats_section(&ds, &labels)?)?)
        }
        Command::Temporal(a) => {
            a.formats(&[Json, Csv], "temporal")?;
            let section = temporal_section(&a.dataset()?, &a.config()?)?;
            let text = match a.format {
                Csv => to_csv(&section.series.buckets)?,
                _ => to_canonical_json(&section)?,
            };
            a.emit(&text)
        }
        Command::Zones(a) => {
            a.formats(&[Json, Geojson], "zones")?;
            let g = a.gazetteer("zones")?;
            let (ds, cfg) = (a.dataset()?, a.config()?);
            let thresholds = classify_section(&ds, &cfg)?.thresholds;
            let section = zones_section(&ds, &thresholds, &g, &cfg)?;
            let text = match a.format {
                Geojson => to_canonical_json(&zones_geojson(&section))?,
                _ => to_canonical_json(&section)?,
            };
            a.emit(&text)
        }
        Command::Baseline(a) => {
            a.formats(&[Json, Csv], "baseline")?;
            let result = baseline_section(&a.dataset()?, &a.config()?)?;
            let text = match a.format {
                Csv => to_csv(&result.top_cells)?,
                _ => to_canonical_json(&result)?,
            };
            a.emit(&text)
        }
        Command::Report(a) => {
            if a.figure.is_none() {
                a.formats(&[Json], "report")?;
            }
            let g = a.gazetteer("report")?;
            let (ds, cfg) = (a.dataset()?, a.config()?);
            let report = run_analysis(&ds, &g, &cfg)?;
            let text = match a.figure {
                None => to_canonical_json(&report)?,
                Some(id) => {
                    let data = emit_figure_data(&report, id)?;
                    match (a.format, &data) {
                        (Csv, _) => data.to_csv()?,
                        (Geojson, FigureData::ClusterMap(_)) | (Json, _) => {
                            to_canonical_json(&data.to_json()?)?
                        }
                        (Geojson, _) => {
                            return Err(Failure::usage(format!("figure {id} has no GeoJSON form")))
                        }
                    }
                }
            };
            a.emit(&text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("celltriage: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
