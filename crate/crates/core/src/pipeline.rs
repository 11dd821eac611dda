//! End-to-end runs: train every member of a preset, fuse their posteriors
//! per record, score, and write prediction files and reports.
//!
//! Output directory layout:
//!
//! - `predictions.tsv`: evaluation records (dev split, or out-of-fold under
//!   cross-validation), `<id>\t<p_pos>\t<label>` after a `#config_hash=` header
//! - `predictions.test.tsv`: test records, when a test set is configured
//! - `report.txt`, `report.kv`: fused and per-member scores

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::balance::rebalance;
use crate::config::{validate_config, EvalProtocol, Member, RunConfig, TextEncoder};
use crate::corpus::{load_dataset, stratified_folds, stratified_split, Dataset, DatasetFormat, Label};
use crate::error::{Error, Result};
use crate::eval::{score_binary, EvalReport};
use crate::features::{
    align_features, align_partial, bow_vectorize, build_vocabulary, hash_embed, load_feature_file, FeatureMatrix,
    Vocabulary,
};
use crate::fusion::{decide, fuse, fuse_multimodal, FusionSpec, Modality};
use crate::models::{lr_train, nb_train, svm_train, Classifier, NbModel, PosteriorPair, Standardizer, TrainedModel};
use crate::textprep::{preprocess, StopWords, TokenSequence};

pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const TEST_PREDICTIONS_FILE: &str = "predictions.test.tsv";
pub const REPORT_TABLE_FILE: &str = "report.txt";
pub const REPORT_KV_FILE: &str = "report.kv";

/// Inputs shared by every member, loaded once per run.
pub struct RunInputs {
    pub stopwords: StopWords,
    pub text_features: Option<FeatureMatrix>,
    pub image_features: Vec<FeatureMatrix>,
}

impl RunInputs {
    pub fn load(cfg: &RunConfig) -> Result<RunInputs> {
        let members = cfg.active_members();
        let stopwords = match &cfg.stopwords {
            Some(p) => StopWords::load(p)?,
            None => StopWords::italian(),
        };
        let text_features = match (&cfg.text_features, cfg.text_encoder) {
            (Some(p), TextEncoder::File) if members.contains(&Member::EmbedLr) => Some(load_feature_file(p)?),
            _ => None,
        };
        let image_features = if members.contains(&Member::ImageSvm) {
            cfg.image_features
                .iter()
                .map(load_feature_file)
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(RunInputs {
            stopwords,
            text_features,
            image_features,
        })
    }
}

enum TrainedMember {
    BowNb { vocab: Vocabulary, model: NbModel },
    EmbedLr(TrainedModel),
    ImageSvm(Vec<TrainedModel>),
}

/// A set of trained members plus the training prior used when no member
/// has input for a record.
pub struct Ensemble {
    members: Vec<(Member, TrainedMember)>,
    spec: FusionSpec,
    prior: PosteriorPair,
}

/// Posteriors for one scored dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub ids: Vec<String>,
    pub fused: Vec<PosteriorPair>,
    /// Per member (in fusion order), per record; `None` where the member had no input.
    pub members: Vec<(Member, Vec<Option<PosteriorPair>>)>,
}

impl Scored {
    pub fn decisions(&self) -> Vec<Label> {
        self.fused.iter().map(|&p| decide(p)).collect()
    }
}

fn tokenize(ds: &Dataset, stopwords: &StopWords) -> Vec<TokenSequence> {
    ds.records().iter().map(|r| preprocess(&r.text, stopwords)).collect()
}

fn text_embeddings(
    cfg: &RunConfig,
    inputs: &RunInputs,
    ds: &Dataset,
    tokens: &[TokenSequence],
) -> Result<FeatureMatrix> {
    match cfg.text_encoder {
        TextEncoder::Hash => FeatureMatrix::new(
            ds.ids().map(str::to_owned).collect(),
            tokens
                .iter()
                .map(|t| hash_embed(t, cfg.hash_dim, cfg.hash_seed))
                .collect(),
            cfg.hash_dim,
        ),
        TextEncoder::File => {
            let fm = inputs
                .text_features
                .as_ref()
                .ok_or_else(|| Error::MissingInput("text_features not loaded".into()))?;
            align_features(ds, fm)
        }
    }
}

fn balanced(cfg: &RunConfig, x: FeatureMatrix, y: Vec<Label>, salt: u64) -> Result<(FeatureMatrix, Vec<Label>)> {
    match cfg.smote {
        Some(mode) => rebalance(
            &x,
            &y,
            mode,
            cfg.smote_k,
            cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ),
        None => Ok((x, y)),
    }
}

fn scaled(cfg: &RunConfig, x: FeatureMatrix) -> Result<(FeatureMatrix, Option<Standardizer>)> {
    if cfg.standardize {
        let s = Standardizer::fit(&x)?;
        Ok((s.transform_matrix(&x)?, Some(s)))
    } else {
        Ok((x, None))
    }
}

fn train_member(
    cfg: &RunConfig,
    inputs: &RunInputs,
    member: Member,
    ds: &Dataset,
    labels: &[Label],
) -> Result<TrainedMember> {
    match member {
        Member::BowNb => {
            let tokens = tokenize(ds, &inputs.stopwords);
            let vocab = build_vocabulary(&tokens, cfg.min_count)?;
            let rows = tokens.iter().map(|t| bow_vectorize(t, &vocab)).collect();
            let x = FeatureMatrix::new(ds.ids().map(str::to_owned).collect(), rows, vocab.len())?;
            let (x, y) = balanced(cfg, x, labels.to_vec(), 1)?;
            let model = nb_train(&x, &y, cfg.alpha)?;
            Ok(TrainedMember::BowNb { vocab, model })
        }
        Member::EmbedLr => {
            let tokens = tokenize(ds, &inputs.stopwords);
            let x = text_embeddings(cfg, inputs, ds, &tokens)?;
            let (x, scaler) = scaled(cfg, x)?;
            let (x, y) = balanced(cfg, x, labels.to_vec(), 2)?;
            let model = lr_train(&x, &y, cfg.lr)?;
            Ok(TrainedMember::EmbedLr(TrainedModel {
                classifier: Classifier::Logistic(model),
                scaler,
            }))
        }
        Member::ImageSvm => {
            let mut models = Vec::with_capacity(inputs.image_features.len());
            for (i, fm) in inputs.image_features.iter().enumerate() {
                let (positions, _) = align_partial(ds, fm);
                let (rows, y): (Vec<usize>, Vec<Label>) = positions
                    .iter()
                    .zip(labels)
                    .filter_map(|(p, &l)| p.map(|p| (p, l)))
                    .unzip();
                let (x, scaler) = scaled(cfg, fm.select(&rows))?;
                let (x, y) = balanced(cfg, x, y, 16 + i as u64)?;
                let mut params = cfg.svm;
                params.seed = params.seed.wrapping_add(i as u64);
                let model = svm_train(&x, &y, params)?;
                models.push(TrainedModel {
                    classifier: Classifier::Svm(model),
                    scaler,
                });
            }
            Ok(TrainedMember::ImageSvm(models))
        }
    }
}

fn predict_member(
    cfg: &RunConfig,
    inputs: &RunInputs,
    trained: &TrainedMember,
    ds: &Dataset,
) -> Result<Vec<Option<PosteriorPair>>> {
    match trained {
        TrainedMember::BowNb { vocab, model } => tokenize(ds, &inputs.stopwords)
            .iter()
            .map(|t| crate::models::nb_predict(model, &bow_vectorize(t, vocab)).map(Some))
            .collect(),
        TrainedMember::EmbedLr(model) => {
            let tokens = tokenize(ds, &inputs.stopwords);
            let x = text_embeddings(cfg, inputs, ds, &tokens)?;
            x.rows().iter().map(|r| model.predict(r).map(Some)).collect()
        }
        TrainedMember::ImageSvm(models) => {
            let mut per_model = Vec::with_capacity(models.len());
            for (model, fm) in models.iter().zip(&inputs.image_features) {
                let (positions, _) = align_partial(ds, fm);
                per_model.push(
                    positions
                        .iter()
                        .map(|p| p.map(|p| model.predict(fm.row(p))).transpose())
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            (0..ds.len())
                .map(|r| {
                    let available: Vec<PosteriorPair> = per_model.iter().filter_map(|m| m[r]).collect();
                    if available.is_empty() {
                        Ok(None)
                    } else {
                        fuse(&available, &vec![1.0; available.len()]).map(Some)
                    }
                })
                .collect()
        }
    }
}

fn modality(member: Member) -> Modality {
    match member {
        Member::BowNb | Member::EmbedLr => Modality::Text,
        Member::ImageSvm => Modality::Image,
    }
}

impl Ensemble {
    /// Trains every active member on a fully labeled dataset.
    pub fn train(cfg: &RunConfig, inputs: &RunInputs, ds: &Dataset) -> Result<Ensemble> {
        let labels = ds.labels()?;
        let members = cfg.active_members();
        let weights = cfg.fusion_weights();
        let spec = FusionSpec::new(
            members
                .iter()
                .zip(&weights)
                .map(|(&m, &w)| (m.name().to_owned(), modality(m), w))
                .collect(),
        )?;
        let trained = members
            .iter()
            .map(|&m| train_member(cfg, inputs, m, ds, &labels).map(|t| (m, t)))
            .collect::<Result<Vec<_>>>()?;
        let pos = labels.iter().filter(|&&l| l == Label::Relevant).count();
        Ok(Ensemble {
            members: trained,
            spec,
            prior: PosteriorPair::from_positive(pos as f64 / labels.len() as f64),
        })
    }

    pub fn prior(&self) -> PosteriorPair {
        self.prior
    }

    pub fn score(&self, cfg: &RunConfig, inputs: &RunInputs, ds: &Dataset) -> Result<Scored> {
        let members = self
            .members
            .iter()
            .map(|(m, t)| predict_member(cfg, inputs, t, ds).map(|p| (*m, p)))
            .collect::<Result<Vec<_>>>()?;
        let mut fused = Vec::with_capacity(ds.len());
        for r in 0..ds.len() {
            let text: Vec<Option<PosteriorPair>> = members
                .iter()
                .filter(|(m, _)| modality(*m) == Modality::Text)
                .map(|(_, p)| p[r])
                .collect();
            let image = members
                .iter()
                .find(|(m, _)| modality(*m) == Modality::Image)
                .and_then(|(_, p)| p[r]);
            fused.push(match fuse_multimodal(&text, image, &self.spec) {
                Ok(p) => p,
                Err(Error::MissingInput(_)) => self.prior,
                Err(e) => return Err(e),
            });
        }
        Ok(Scored {
            ids: ds.ids().map(str::to_owned).collect(),
            fused,
            members,
        })
    }
}

/// Out-of-fold posteriors for every record of `ds`, in record order.
fn cross_validate(cfg: &RunConfig, inputs: &RunInputs, ds: &Dataset, folds: usize) -> Result<Scored> {
    let fold_of = stratified_folds(ds, folds, cfg.seed)?;
    let mut by_fold: Vec<Option<Scored>> = vec![None; folds];
    for (f, slot) in by_fold.iter_mut().enumerate() {
        let held: Vec<usize> = (0..ds.len()).filter(|&i| fold_of[i] == f).collect();
        if held.is_empty() {
            continue;
        }
        let rest: Vec<usize> = (0..ds.len()).filter(|&i| fold_of[i] != f).collect();
        let ensemble = Ensemble::train(cfg, inputs, &ds.select(&rest))?;
        *slot = Some(ensemble.score(cfg, inputs, &ds.select(&held))?);
    }
    // reassemble in record order; each fold's rows are in record order too
    let mut cursor = vec![0usize; folds];
    let mut ids = Vec::with_capacity(ds.len());
    let mut fused = Vec::with_capacity(ds.len());
    let mut members: Vec<(Member, Vec<Option<PosteriorPair>>)> =
        cfg.active_members().into_iter().map(|m| (m, Vec::new())).collect();
    for &f in &fold_of {
        let s = by_fold[f].as_ref().expect("every nonempty fold was scored");
        let j = cursor[f];
        cursor[f] += 1;
        ids.push(s.ids[j].clone());
        fused.push(s.fused[j]);
        for (out, (_, posts)) in members.iter_mut().zip(&s.members) {
            out.1.push(posts[j]);
        }
    }
    Ok(Scored { ids, fused, members })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: EvalReport,
    pub member_reports: Vec<(Member, EvalReport)>,
    pub predictions: PathBuf,
    pub test_report: Option<EvalReport>,
    pub test_predictions: Option<PathBuf>,
}

fn load(cfg: &RunConfig, path: &Path) -> Result<Dataset> {
    let format = cfg.dataset_format.unwrap_or_else(|| DatasetFormat::from_path(path));
    load_dataset(path, format)
}

fn member_reports(scored: &Scored, labels: &[Label], prior: PosteriorPair) -> Result<Vec<(Member, EvalReport)>> {
    scored
        .members
        .iter()
        .map(|(m, posts)| {
            let preds: Vec<Label> = posts.iter().map(|p| decide(p.unwrap_or(prior))).collect();
            score_binary(labels, &preds).map(|r| (*m, r))
        })
        .collect()
}

pub fn predictions_text(header: &str, ids: &[String], posteriors: &[PosteriorPair]) -> String {
    let mut out = String::new();
    writeln!(out, "#{header}").expect("writing to a String cannot fail");
    for (id, p) in ids.iter().zip(posteriors) {
        writeln!(out, "{id}\t{}\t{}", p.p_pos, decide(*p)).expect("writing to a String cannot fail");
    }
    out
}

/// One parsed prediction line.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub p_pos: f64,
    pub label: Label,
}

pub fn parse_predictions(content: &str) -> Result<Vec<PredictionRow>> {
    let mut rows = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse { line: idx + 1, message };
        let mut cols = line.split('\t');
        let (Some(id), Some(p), Some(label), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected <id>\\t<p_pos>\\t<label>".into()));
        };
        let p_pos: f64 = p.parse().map_err(|_| bad(format!("bad probability {p:?}")))?;
        let label = match label {
            "0" => Label::NotRelevant,
            "1" => Label::Relevant,
            other => return Err(bad(format!("bad label {other:?}"))),
        };
        rows.push(PredictionRow {
            id: id.to_owned(),
            p_pos,
            label,
        });
    }
    Ok(rows)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRow>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&content)
}

/// Writes every file under a temporary name first, then renames; on any
/// failure the temporaries are removed and no output is left behind.
fn write_all(files: &[(PathBuf, String)]) -> Result<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    let tmp_of = |p: &Path| {
        let mut name = p.file_name().unwrap_or_default().to_os_string();
        name.push(".tmp");
        p.with_file_name(name)
    };
    let result = files.iter().try_for_each(|(path, content)| {
        let tmp = tmp_of(path);
        fs::write(&tmp, content).map_err(|e| Error::io(&tmp, e))?;
        written.push(tmp);
        Ok(())
    });
    let result = result.and_then(|_| {
        files
            .iter()
            .try_for_each(|(path, _)| fs::rename(tmp_of(path), path).map_err(|e| Error::io(path, e)))
    });
    if result.is_err() {
        for tmp in &written {
            let _ = fs::remove_file(tmp);
        }
        for (path, _) in files {
            let _ = fs::remove_file(path);
        }
    }
    result
}

pub fn execute_run(cfg: &RunConfig) -> Result<RunOutput> {
    let cfg = validate_config(cfg.clone())?;
    let inputs = RunInputs::load(&cfg)?;
    let train = load(&cfg, &cfg.train)?;
    train.labels()?;

    let (scored, eval_labels, prior, final_ensemble) = match cfg.protocol {
        EvalProtocol::Holdout => {
            let (fit, eval) = match &cfg.dev {
                Some(dev) => (train.clone(), load(&cfg, dev)?),
                None => stratified_split(&train, cfg.dev_fraction, cfg.seed)?,
            };
            let labels = eval.labels()?;
            let ensemble = Ensemble::train(&cfg, &inputs, &fit)?;
            let scored = ensemble.score(&cfg, &inputs, &eval)?;
            (scored, labels, ensemble.prior(), Some(ensemble))
        }
        EvalProtocol::CrossValidation { folds } => {
            let labels = train.labels()?;
            let pos = labels.iter().filter(|&&l| l == Label::Relevant).count();
            let prior = PosteriorPair::from_positive(pos as f64 / labels.len() as f64);
            (cross_validate(&cfg, &inputs, &train, folds)?, labels, prior, None)
        }
    };
    let report = score_binary(&eval_labels, &scored.decisions())?;
    let member_reports = member_reports(&scored, &eval_labels, prior)?;

    let header = format!("config_hash={} preset={}", cfg.hash(), cfg.preset);
    let predictions = cfg.output_dir.join(PREDICTIONS_FILE);
    let mut files = vec![(
        predictions.clone(),
        predictions_text(&header, &scored.ids, &scored.fused),
    )];

    let mut test_report = None;
    let mut test_predictions = None;
    if let Some(test_path) = &cfg.test {
        let test = load(&cfg, test_path)?;
        let ensemble = match final_ensemble {
            Some(e) => e,
            None => Ensemble::train(&cfg, &inputs, &train)?,
        };
        let s = ensemble.score(&cfg, &inputs, &test)?;
        if test.is_fully_labeled() && !test.is_empty() {
            test_report = Some(score_binary(&test.labels()?, &s.decisions())?);
        }
        let path = cfg.output_dir.join(TEST_PREDICTIONS_FILE);
        files.push((path.clone(), predictions_text(&header, &s.ids, &s.fused)));
        test_predictions = Some(path);
    }

    let run = cfg.preset.name();
    let mut table = report.to_table(run, cfg.macro_f1);
    let mut kv = report.to_kv(run, cfg.macro_f1);
    kv.push('\n');
    for (m, r) in &member_reports {
        let tag = format!("{run}/{}", m.name());
        table.push('\n');
        table.push_str(&r.to_table(&tag, cfg.macro_f1));
        kv.push_str(&r.to_kv(&tag, cfg.macro_f1));
        kv.push('\n');
    }
    if let Some(r) = &test_report {
        let tag = format!("{run}/test");
        table.push('\n');
        table.push_str(&r.to_table(&tag, cfg.macro_f1));
        kv.push_str(&r.to_kv(&tag, cfg.macro_f1));
        kv.push('\n');
    }
    files.push((cfg.output_dir.join(REPORT_TABLE_FILE), table));
    files.push((cfg.output_dir.join(REPORT_KV_FILE), kv));

    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    write_all(&files)?;

    Ok(RunOutput {
        report,
        member_reports,
        predictions,
        test_report,
        test_predictions,
    })
}
