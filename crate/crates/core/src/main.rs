use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flood_detect::balance::{rebalance, RebalanceMode, DEFAULT_K};
use flood_detect::config::{validate_config, Preset, RunConfig};
use flood_detect::corpus::{load_dataset, Dataset, DatasetFormat, Label};
use flood_detect::eval::score_binary;
use flood_detect::features::{
    align_features, bow_vectorize, build_vocabulary, hash_embed, load_feature_file, FeatureMatrix, Vocabulary,
};
use flood_detect::models::{
    lr_train, nb_train, save_model, svm_train, Classifier, LrParams, Standardizer, SvmParams, TrainedModel,
    DEFAULT_ALPHA,
};
use flood_detect::pipeline::{execute_run, load_predictions, predictions_text};
use flood_detect::textprep::{preprocess, StopWords};
use flood_detect::{Error, Result};

#[derive(Parser)]
#[command(
    name = "flood-detect",
    version,
    about = "Flood-relevance classification for social-media posts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DatasetFormat::Csv,
            FormatArg::Jsonl => DatasetFormat::JsonLines,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoder {
    Bow,
    Hash,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Nb,
    Lr,
    Svm,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset and print its class counts
    Ingest {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Build a feature file from dataset text
    Featurize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "bow")]
        encoder: Encoder,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        /// Reuse an existing vocabulary instead of building one
        #[arg(long)]
        vocab_in: Option<PathBuf>,
        #[arg(long)]
        vocab_out: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train one classifier on a feature file and save it
    Train {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: PathBuf,
        /// equalize, factor:<f> or none
        #[arg(long, default_value = "equalize")]
        smote: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        smote_k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = LrParams::default().learning_rate)]
        learning_rate: f64,
        #[arg(long, default_value_t = LrParams::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = LrParams::default().l2)]
        l2: f64,
        #[arg(long, default_value_t = SvmParams::default().lambda)]
        lambda: f64,
        #[arg(long, default_value_t = SvmParams::default().epochs)]
        svm_epochs: usize,
        #[arg(long)]
        standardize: bool,
    },
    /// Score a feature file with a saved model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Restrict and order rows by this dataset
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a prediction file against dataset labels
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        macro_f1: bool,
    },
    /// Run a full preset from a config file
    Run {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        config: PathBuf,
    },
}

fn open(path: &Path, format: Option<FormatArg>) -> Result<Dataset> {
    let format = format.map_or_else(|| DatasetFormat::from_path(path), Into::into);
    load_dataset(path, format)
}

fn write(path: &Path, content: String) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { path, format } => {
            let ds = open(&path, format)?;
            println!(
                "records={} positive={} negative={} unlabeled={}",
                ds.len(),
                ds.positive_count(),
                ds.negative_count(),
                ds.unlabeled_count()
            );
        }
        Command::Featurize {
            input,
            format,
            out,
            encoder,
            stopwords,
            min_count,
            vocab_in,
            vocab_out,
            dim,
            seed,
        } => {
            let ds = open(&input, format)?;
            let stopwords = match stopwords {
                Some(p) => StopWords::load(p)?,
                None => StopWords::italian(),
            };
            let docs: Vec<_> = ds.records().iter().map(|r| preprocess(&r.text, &stopwords)).collect();
            let ids: Vec<String> = ds.ids().map(str::to_owned).collect();
            let fm = match encoder {
                Encoder::Bow => {
                    let vocab = match vocab_in {
                        Some(p) => Vocabulary::parse(&std::fs::read_to_string(&p).map_err(|e| Error::Io {
                            path: p.clone(),
                            source: e,
                        })?)?,
                        None => build_vocabulary(&docs, min_count)?,
                    };
                    if let Some(p) = vocab_out {
                        write(&p, vocab.to_text())?;
                    }
                    let rows = docs.iter().map(|d| bow_vectorize(d, &vocab)).collect();
                    FeatureMatrix::new(ids, rows, vocab.len())?
                }
                Encoder::Hash => {
                    if dim == 0 {
                        return Err(Error::InvalidArgument("--dim must be positive".into()));
                    }
                    let rows = docs.iter().map(|d| hash_embed(d, dim, seed)).collect();
                    FeatureMatrix::new(ids, rows, dim)?
                }
            };
            fm.save(&out)?;
            println!("rows={} dim={} out={}", fm.len(), fm.dim(), out.display());
        }
        Command::Train {
            kind,
            features,
            dataset,
            format,
            out,
            smote,
            smote_k,
            seed,
            alpha,
            learning_rate,
            epochs,
            l2,
            lambda,
            svm_epochs,
            standardize,
        } => {
            let ds = open(&dataset, format)?;
            let labels = ds.labels()?;
            let x = align_features(&ds, &load_feature_file(&features)?)?;
            let (x, scaler) = if standardize && !matches!(kind, Kind::Nb) {
                let s = Standardizer::fit(&x)?;
                (s.transform_matrix(&x)?, Some(s))
            } else {
                (x, None)
            };
            let (x, y) = if smote.eq_ignore_ascii_case("none") {
                (x, labels)
            } else {
                rebalance(&x, &labels, smote.parse::<RebalanceMode>()?, smote_k, seed)?
            };
            let classifier = match kind {
                Kind::Nb => Classifier::NaiveBayes(nb_train(&x, &y, alpha)?),
                Kind::Lr => Classifier::Logistic(lr_train(
                    &x,
                    &y,
                    LrParams {
                        learning_rate,
                        epochs,
                        l2,
                        seed,
                    },
                )?),
                Kind::Svm => Classifier::Svm(svm_train(
                    &x,
                    &y,
                    SvmParams {
                        lambda,
                        epochs: svm_epochs,
                        seed,
                    },
                )?),
            };
            let model = TrainedModel { classifier, scaler };
            save_model(&model, &out)?;
            println!(
                "kind={} dim={} rows={} out={}",
                model.classifier.kind(),
                model.dim(),
                x.len(),
                out.display()
            );
        }
        Command::Predict {
            model,
            features,
            dataset,
            format,
            out,
        } => {
            let model = flood_detect::models::load_model(&model)?;
            let fm = load_feature_file(&features)?;
            let fm = match dataset {
                Some(p) => align_features(&open(&p, format)?, &fm)?,
                None => fm,
            };
            let posts = fm.rows().iter().map(|r| model.predict(r)).collect::<Result<Vec<_>>>()?;
            let header = format!("model={}", model.classifier.kind());
            write(&out, predictions_text(&header, fm.ids(), &posts))?;
            println!("rows={} out={}", posts.len(), out.display());
        }
        Command::Evaluate {
            dataset,
            format,
            predictions,
            macro_f1,
        } => {
            let ds = open(&dataset, format)?;
            let rows = load_predictions(&predictions)?;
            let by_id: std::collections::HashMap<&str, Label> = rows.iter().map(|r| (r.id.as_str(), r.label)).collect();
            let mut labels = Vec::with_capacity(ds.len());
            let mut preds = Vec::with_capacity(ds.len());
            let mut missing = Vec::new();
            for r in ds.records() {
                let Some(label) = r.label else { continue };
                match by_id.get(r.id.as_str()) {
                    Some(&p) => {
                        labels.push(label);
                        preds.push(p);
                    }
                    None => missing.push(r.id.clone()),
                }
            }
            if !missing.is_empty() {
                return Err(Error::MissingInput(format!(
                    "no prediction for ids: {}",
                    missing.join(",")
                )));
            }
            let report = score_binary(&labels, &preds)?;
            print!("{}", report.to_table("evaluate", macro_f1));
            println!("{}", report.to_kv("evaluate", macro_f1));
        }
        Command::Run { preset, config } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(p) = preset {
                cfg.preset = p.parse::<Preset>()?;
            }
            let cfg = validate_config(cfg)?;
            let out = execute_run(&cfg)?;
            print!("{}", out.report.to_table(cfg.preset.name(), cfg.macro_f1));
            println!("{}", out.report.to_kv(cfg.preset.name(), cfg.macro_f1));
            println!("predictions={}", out.predictions.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = serde_json::to_string(&e.to_string()).unwrap_or_default();
            eprintln!("error kind={} message={message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
