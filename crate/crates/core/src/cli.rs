//! Command-line front end: `estimate`, `synth` and `regress`.
//!
//! Every command writes a JSON [`RunReport`] that echoes its full
//! configuration, so a run can be repeated from the report and the original
//! inputs alone.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{self, FitMode, GroupBy};
use crate::estimator::{self, EstimatorOptions};
use crate::ingest::{
    self, ChannelPolicy, LabeledCollection, LabeledItem, PreprocessSpec, SourceRef,
};
use crate::knn::KnnConfig;
use crate::synthetic::{self, ManifoldKind, ManifoldSpec};
use crate::{Error, Result};

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "MANIFOLD_ID_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "manifold-id",
    version,
    about = "Intrinsic dimension estimation and GA-vs-ID regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the intrinsic dimension of an image collection or matrix.
    Estimate(EstimateArgs),
    /// Sample a manifold of known dimension into a raw matrix file.
    Synth(SynthArgs),
    /// Fit generalization ability against intrinsic dimension.
    Regress(RegressArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    /// CSV manifest with header `path,label`.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    pub manifest: Option<PathBuf>,
    /// Raw MPRB matrix file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// `row,label` CSV naming labeled rows of `--matrix`.
    #[arg(long, requires = "matrix")]
    pub labels: Option<PathBuf>,
    #[arg(long = "k", default_value_t = estimator::DEFAULT_K)]
    pub k: usize,
    /// Estimate on a random subset of this many items.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Draw the subset with an exact 50/50 class split.
    #[arg(long, requires = "sample")]
    pub balanced: bool,
    /// Required whenever `--sample` is given.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 224)]
    pub height: u32,
    #[arg(long, default_value_t = 224)]
    pub width: u32,
    /// grayscale_average | first_channel | keep_all_flattened
    #[arg(long, default_value = "grayscale_average", value_parser = parse_channels)]
    pub channels: ChannelPolicy,
    /// Normalize by k-2 instead of k-1.
    #[arg(long)]
    pub bias_corrected: bool,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV of per-point estimates.
    #[arg(long)]
    pub per_point: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// cube | sphere | gaussian | swiss_roll
    #[arg(long, value_parser = parse_kind)]
    pub kind: ManifoldKind,
    /// Intrinsic dimension (2 for swiss_roll).
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Ambient dimension.
    #[arg(long = "d")]
    pub d: usize,
    /// Number of points.
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RegressArgs {
    /// CSV with header `dataset,domain,intrinsic_dim,generalization_ability,n_train,model`.
    #[arg(long)]
    pub results: PathBuf,
    /// simple | multi
    #[arg(long, default_value = "simple", value_parser = parse_mode)]
    pub mode: FitMode,
    /// domain | model-ntrain
    #[arg(long, value_parser = parse_group_by)]
    pub group_by: Option<GroupBy>,
    /// Fits JSON (stdout when omitted).
    #[arg(long)]
    pub fits: Option<PathBuf>,
    /// Plot-ready CSV `x,y,group,fitted_y`.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_channels(s: &str) -> std::result::Result<ChannelPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<ManifoldKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<FitMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_group_by(s: &str) -> std::result::Result<GroupBy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub timing_seconds: f64,
    pub input_digest: String,
}

/// Applies the worker-count override, if set, to the global thread pool.
pub fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Usage(format!(
            "{WORKERS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // A pool that already exists keeps its size; only the first call matters.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Estimate(args) => run_estimate(&args),
        Command::Synth(args) => run_synth(&args),
        Command::Regress(args) => run_regress(&args),
    }
}

fn config_echo<A: Serialize>(args: &A) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(map) = &mut v {
        map.insert(
            "version".into(),
            Value::String(env!("CARGO_PKG_VERSION").into()),
        );
    }
    v
}

struct Hasher(Sha256);

impl Hasher {
    fn new() -> Self {
        Hasher(Sha256::new())
    }

    fn file(&mut self, path: &Path) -> Result<()> {
        let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut buf = vec![0u8; 1 << 16];
        loop {
            let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
            if n == 0 {
                break;
            }
            self.0.update(&buf[..n]);
        }
        Ok(())
    }

    fn bytes(&mut self, b: &[u8]) {
        self.0.update(b);
    }

    fn finish(self) -> String {
        self.0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn run_estimate(args: &EstimateArgs) -> Result<()> {
    let started = Instant::now();
    if args.k < 2 {
        return Err(Error::InvalidK {
            k: args.k,
            min: 2,
            max: usize::MAX,
        });
    }
    if args.sample.is_some() && args.seed.is_none() {
        return Err(Error::Usage("--sample requires an explicit --seed".into()));
    }
    if args.balanced && args.manifest.is_none() && args.labels.is_none() {
        return Err(Error::Usage(
            "--balanced needs labels (--manifest, or --labels with --matrix)".into(),
        ));
    }

    let mut digest = Hasher::new();
    let mut labeled = true;
    let mut matrix = None;
    let collection: LabeledCollection = if let Some(manifest) = &args.manifest {
        digest.file(manifest)?;
        ingest::load_labels(manifest)?
    } else {
        let path = args
            .matrix
            .as_ref()
            .expect("clap enforces --manifest or --matrix");
        digest.file(path)?;
        let m = ingest::read_matrix(path)?;
        let coll = match &args.labels {
            Some(labels) => {
                digest.file(labels)?;
                ingest::load_row_labels(labels)?
            }
            None => {
                labeled = false;
                LabeledCollection {
                    name: path.display().to_string(),
                    origin: "unlabeled matrix".into(),
                    items: (0..m.n_points())
                        .map(|r| LabeledItem {
                            source: SourceRef::Row(r),
                            label: 0,
                        })
                        .collect(),
                }
            }
        };
        matrix = Some(m);
        coll
    };

    let collection = match (args.sample, args.seed) {
        (Some(total), Some(seed)) if args.balanced => {
            ingest::stratified_sample(&collection, total, seed)?
        }
        (Some(total), Some(seed)) => ingest::uniform_sample(&collection, total, seed)?,
        _ => collection,
    };

    let spec = PreprocessSpec {
        height: args.height,
        width: args.width,
        channels: args.channels,
    };
    let data = match &matrix {
        Some(m) => ingest::vectorize_rows(&collection, m)?,
        None => {
            for item in &collection.items {
                if let SourceRef::Path(p) = &item.source {
                    digest.bytes(p.display().to_string().as_bytes());
                    digest.file(p).map_err(|_| Error::UnreadableImage {
                        path: p.clone(),
                        reason: "cannot open file".into(),
                    })?;
                }
            }
            ingest::vectorize(&collection, &spec)?
        }
    };
    drop(matrix);

    let options = EstimatorOptions {
        bias_corrected: args.bias_corrected,
    };
    let estimate =
        estimator::estimate_dataset_with(&data, args.k, &options, &KnnConfig::default())?;

    if let Some(path) = &args.per_point {
        let mut w = csv::Writer::from_writer(create(path)?);
        let wrap = |e: csv::Error| Error::io(path, std::io::Error::other(e));
        w.write_record(["index", "source", "label", "local_id"])
            .map_err(wrap)?;
        for (i, (item, m)) in collection
            .items
            .iter()
            .zip(&estimate.per_point_ids)
            .enumerate()
        {
            let label = if labeled {
                item.label.to_string()
            } else {
                String::new()
            };
            w.write_record([
                i.to_string(),
                item.source.to_string(),
                label,
                format!("{m:?}"),
            ])
            .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }

    let report = RunReport {
        command: "estimate".into(),
        config: config_echo(args),
        results: json!({
            "global_id": estimate.global_id,
            "k": estimate.k,
            "n_points": estimate.n_points,
            "n_dims": data.n_dims(),
            "label_counts": labeled.then(|| collection.label_counts()),
            "per_point_ids": estimate.per_point_ids,
        }),
        timing_seconds: started.elapsed().as_secs_f64(),
        input_digest: digest.finish(),
    };
    write_json(args.report.as_deref(), &report)
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let started = Instant::now();
    let m = match (args.kind, args.m) {
        (ManifoldKind::SwissRoll, None) => 2,
        (_, Some(m)) => m,
        (kind, None) => return Err(Error::Usage(format!("--m is required for {kind}"))),
    };
    let spec = ManifoldSpec::new(args.kind, m, args.d, args.n, args.seed);
    let data = synthetic::generate::<f64>(&spec)?;
    ingest::write_matrix(&args.out, &data)?;

    let config = config_echo(args);
    let mut digest = Hasher::new();
    digest.bytes(
        serde_json::to_string(&spec)
            .expect("spec serializes")
            .as_bytes(),
    );
    let mut out_digest = Hasher::new();
    out_digest.file(&args.out)?;

    let report = RunReport {
        command: "synth".into(),
        config,
        results: json!({
            "spec": spec,
            "n_points": data.n_points(),
            "n_dims": data.n_dims(),
            "output": args.out,
            "output_digest": out_digest.finish(),
        }),
        timing_seconds: started.elapsed().as_secs_f64(),
        input_digest: digest.finish(),
    };
    write_json(args.report.as_deref(), &report)
}

fn run_regress(args: &RegressArgs) -> Result<()> {
    let started = Instant::now();
    let mut digest = Hasher::new();
    digest.file(&args.results)?;
    let records = analysis::load_records(&args.results)?;

    let (payload, fits) = match args.group_by {
        Some(g) => {
            let grouped = analysis::group_fits(&records, g, args.mode)?;
            let fits = grouped.fits.clone();
            (
                serde_json::to_value(&grouped).expect("fits serialize"),
                fits,
            )
        }
        None => {
            let fit = analysis::fit(&records, args.mode)?;
            let payload = json!({ "mode": args.mode, "fit": fit });
            (payload, [("all".to_string(), fit)].into())
        }
    };

    if let Some(path) = &args.plot {
        let rows = analysis::plot_rows(&records, args.group_by, &fits);
        let mut w = create(path)?;
        analysis::write_plot_csv(&mut w, &rows)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_json(args.fits.as_deref(), &payload)?;

    if let Some(path) = &args.report {
        let report = RunReport {
            command: "regress".into(),
            config: config_echo(args),
            results: payload,
            timing_seconds: started.elapsed().as_secs_f64(),
            input_digest: digest.finish(),
        };
        write_json(Some(path), &report)?;
    }
    Ok(())
}
