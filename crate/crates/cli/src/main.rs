//! `uranus`: synthesize scenarios, train, predict, report, analyze RF
//! signatures and serve predictions to the console.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 model error.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use uranus_console::{Store, UiAssets};
use uranus_core::ingest::{load_drone_log, write_drone_log, DatasetLayout};
use uranus_core::pipeline::{
    analyze_rf, predict, read_predictions, report, train_to, write_predictions, ModelBundle, PipelineConfig,
};
use uranus_core::prep::{kmeans, silhouette};
use uranus_core::synth::{emit_dataset, emit_scenario, scenario_seed, NoiseModel, PatternId};
use uranus_core::Error;

#[derive(Parser)]
#[command(name = "uranus", version, about = "Multi-sensor drone tracking and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenarios in the dataset layout.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Write only these patterns (e.g. S1.1), each to OUT/<scenario>.
        /// Without it a full train/ and test/ split is written.
        #[arg(long = "pattern")]
        patterns: Vec<PatternId>,
        /// Write all nine patterns, with logs, under OUT/train.
        #[arg(long, conflicts_with = "patterns")]
        all_train: bool,
        /// Omit the drone log from --pattern scenarios.
        #[arg(long)]
        no_log: bool,
        /// Noise model as JSON; defaults to the built-in model.
        #[arg(long, conflicts_with = "noiseless")]
        noise: Option<PathBuf>,
        #[arg(long)]
        noiseless: bool,
    },
    /// Train the five models and save a bundle.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Bundle directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the cross-validation report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Predict one scenario directory with a saved bundle.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against a drone log, or describe them without one.
    Report {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit RCS and frequency signatures and export sensor distance series.
    AnalyzeRf {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a directory of prediction files over HTTP.
    Serve {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Built console assets, served under /ui/.
        #[arg(long)]
        ui: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// k-means and silhouette scores for a numeric CSV.
    Silhouette {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Score this column's labels instead of running k-means.
        #[arg(long)]
        labels: Option<String>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn model(e: Error) -> Self {
        Failure {
            code: 4,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if let Error::Stage { stage: "config", .. } = e {
        return 2;
    }
    match e.root() {
        Error::Config(_) => 2,
        Error::NotAModel | Error::VersionMismatch { .. } | Error::CorruptModel(_) | Error::FeatureMismatch(_) => 4,
        _ => 3,
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Synth {
            out,
            seed,
            patterns,
            all_train,
            no_log,
            noise,
            noiseless,
        } => synth(&out, seed, &patterns, all_train, !no_log, noise_model(noise.as_deref(), noiseless)?),
        Command::Train { config, out, report } => train(&config, out, report.as_deref()),
        Command::Predict { model, scenario, out } => predict_cmd(&model, &scenario, &out),
        Command::Report { pred, truth, json } => report_cmd(&pred, truth.as_deref(), json.as_deref()),
        Command::AnalyzeRf { config, out } => analyze(&config, &out),
        Command::Serve {
            predictions,
            model,
            ui,
            addr,
        } => serve(&predictions, model.as_deref(), ui, addr),
        Command::Silhouette { input, k, seed, labels } => silhouette_cmd(&input, k, seed, labels.as_deref()),
    }
}

fn noise_model(path: Option<&Path>, noiseless: bool) -> Result<NoiseModel, Failure> {
    let noise = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?
        }
        None if noiseless => NoiseModel::noiseless(),
        None => NoiseModel::default(),
    };
    noise.validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok(noise)
}

fn synth(out: &Path, seed: u64, patterns: &[PatternId], all_train: bool, with_log: bool, noise: NoiseModel) -> Outcome {
    if all_train {
        for p in PatternId::ALL {
            let dir = out.join(DatasetLayout::TRAIN_DIR).join(p.scenario_dir());
            emit_scenario(&dir, p, &noise, scenario_seed(seed, p, false), true)?;
        }
    } else if patterns.is_empty() {
        emit_dataset(out, &noise, seed)?;
    } else {
        for &p in patterns {
            emit_scenario(&out.join(p.scenario_dir()), p, &noise, scenario_seed(seed, p, false), with_log)?;
        }
    }
    info!("wrote synthetic data to {}", out.display());
    Ok(())
}

/// Print to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn train(config: &Path, out: Option<PathBuf>, report_path: Option<&Path>) -> Outcome {
    let cfg = PipelineConfig::load(config)?;
    let out = out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Failure::config("no output directory: pass --out or set \"output\" in the config"))?;
    let trained = train_to(&cfg, &out)?;
    emit(&trained.report().summary());
    if let Some(p) = report_path {
        write_json(p, trained.report())?;
    }
    info!("saved bundle to {}", out.display());
    Ok(())
}

/// `<name>.csv` becomes `<name>.truth.csv`.
fn truth_path(out: &Path) -> PathBuf {
    out.with_extension("truth.csv")
}

fn predict_cmd(model: &Path, scenario: &Path, out: &Path) -> Outcome {
    let bundle = ModelBundle::load(model).map_err(Failure::model)?;
    let set = predict(&bundle, scenario)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    if set.rows.is_empty() {
        warn!("{}: no fused rows, writing an empty prediction file", set.scenario);
    }
    write_predictions(out, &set.rows)?;
    if let Some(truth) = &set.truth {
        write_drone_log(&truth_path(out), truth)?;
    }
    info!("{}: {} estimates written to {}", set.scenario, set.rows.len(), out.display());
    Ok(())
}

fn report_cmd(pred: &Path, truth: Option<&Path>, json: Option<&Path>) -> Outcome {
    let rows = read_predictions(pred)?;
    let truth = truth.map(load_drone_log).transpose()?;
    let r = report(&rows, truth.as_deref())?;
    emit(&r.summary());
    if let Some(p) = json {
        write_json(p, &r)?;
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn analyze(config: &Path, out: &Path) -> Outcome {
    let cfg = PipelineConfig::load(config)?;
    let analysis = analyze_rf(&cfg)?;
    create_dir(out)?;
    write_json(&out.join("signatures.json"), &analysis.signatures)?;
    for m in &analysis.signatures.rcs {
        let name = m.drone_type.map(|d| d.model_name()).unwrap_or("?");
        emit(&format!("rcs  {name:<18} mean {:>8.3} dBsm  sigma {:.3}  n={}", m.mean_dbsm, m.sigma_dbsm, m.count));
    }
    for f in &analysis.signatures.frequency {
        let name = f.drone_type.map(|d| d.model_name()).unwrap_or("?");
        emit(&format!("freq {name:<18} mode {:>8.1} MHz  p {:.3}  n={}", f.mode_mhz, f.mode_probability, f.count));
    }
    for d in &analysis.distances {
        let dir = out.join("distances").join(&d.scenario);
        create_dir(&dir)?;
        for s in &d.series {
            let path = dir.join(format!("{:?}_{}.csv", d.drone_type, s.sensor.key()));
            let file = fs::File::create(&path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            s.write_csv(std::io::BufWriter::new(file))?;
        }
    }
    info!("wrote RF analysis to {}", out.display());
    Ok(())
}

fn serve(predictions: &Path, model: Option<&Path>, ui: Option<PathBuf>, addr: SocketAddr) -> Outcome {
    if let Some(m) = model {
        ModelBundle::load(m).map_err(Failure::model)?;
    }
    let store = Store::load(predictions, model)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    rt.block_on(uranus_console::serve(addr, store, UiAssets(ui)))
        .map_err(|e| Failure {
            code: 3,
            message: format!("server: {e}"),
        })
}

fn silhouette_cmd(input: &Path, k: usize, seed: u64, labels: Option<&str>) -> Outcome {
    let data_err = |m: String| Failure { code: 3, message: m };
    let mut rdr = csv::Reader::from_path(input).map_err(Error::from)?;
    let headers = rdr.headers().map_err(Error::from)?.clone();
    let label_col = match labels {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| data_err(format!("no column {name:?} in {}", input.display())))?,
        ),
        None => None,
    };
    let mut points = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let mut p = Vec::new();
        for (j, v) in rec.iter().enumerate() {
            if Some(j) == label_col {
                raw_labels.push(v.to_string());
            } else {
                p.push(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| data_err(format!("row {}: {v:?} is not a number", i + 1)))?,
                );
            }
        }
        points.push(p);
    }
    let (assignments, centroids) = if label_col.is_some() {
        let mut vocab: Vec<&String> = raw_labels.iter().collect();
        vocab.sort();
        vocab.dedup();
        let a = raw_labels
            .iter()
            .map(|l| vocab.binary_search(&l).expect("label in vocabulary"))
            .collect();
        (a, None)
    } else {
        let km = kmeans(&points, k, seed)?;
        (km.assignments, Some(km.centroids))
    };
    let s = silhouette(&points, &assignments)?;
    let out = serde_json::json!({
        "mean": s.mean,
        "silhouette": s.s,
        "assignments": assignments,
        "centroids": centroids,
    });
    emit(&serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(())
}
