//! Run configuration: a flat `key=value` text file, one entry per line,
//! `#` comments. Unknown keys are rejected. Relative paths resolve against
//! the config file's directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::balance::{RebalanceMode, DEFAULT_K};
use crate::corpus::DatasetFormat;
use crate::error::{Error, Result};
use crate::models::{LrParams, SvmParams, DEFAULT_ALPHA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Run1,
    Run2,
    Run3,
    Run4,
    Run5,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Run1,
        Preset::Run2,
        Preset::Run3,
        Preset::Run4,
        Preset::Run5,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Run1 => "run1",
            Preset::Run2 => "run2",
            Preset::Run3 => "run3",
            Preset::Run4 => "run4",
            Preset::Run5 => "run5",
            Preset::Custom => "custom",
        }
    }

    /// Members a preset fuses, in fusion order. `Custom` reads them from config.
    pub fn members(self) -> Option<&'static [Member]> {
        use Member::*;
        match self {
            Preset::Run1 => Some(&[BowNb]),
            Preset::Run2 => Some(&[EmbedLr]),
            Preset::Run3 => Some(&[BowNb, EmbedLr]),
            Preset::Run4 => Some(&[ImageSvm]),
            Preset::Run5 => Some(&[BowNb, ImageSvm]),
            Preset::Custom => None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}, expected run1..run5 or custom")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fusion member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Member {
    /// Bag-of-words counts into multinomial naive Bayes.
    BowNb,
    /// Dense text embeddings into logistic regression.
    EmbedLr,
    /// One linear SVM per image feature file, fused with equal weights.
    ImageSvm,
}

impl Member {
    pub fn name(self) -> &'static str {
        match self {
            Member::BowNb => "bow_nb",
            Member::EmbedLr => "embed_lr",
            Member::ImageSvm => "image_svm",
        }
    }
}

impl FromStr for Member {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bow_nb" => Ok(Member::BowNb),
            "embed_lr" => Ok(Member::EmbedLr),
            "image_svm" | "image" => Ok(Member::ImageSvm),
            other => Err(Error::Config(format!(
                "unknown member {other:?}, expected bow_nb, embed_lr or image_svm"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextEncoder {
    /// Rows come from `text_features`.
    File,
    /// Seeded feature hashing of the cleaned tokens.
    Hash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalProtocol {
    Holdout,
    CrossValidation { folds: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub train: PathBuf,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub dataset_format: Option<DatasetFormat>,
    pub stopwords: Option<PathBuf>,
    pub text_encoder: TextEncoder,
    pub text_features: Option<PathBuf>,
    pub hash_dim: usize,
    pub hash_seed: u64,
    pub image_features: Vec<PathBuf>,
    pub members: Vec<Member>,
    pub weights: Option<Vec<f64>>,
    pub seed: u64,
    pub smote: Option<RebalanceMode>,
    pub smote_k: usize,
    pub min_count: usize,
    pub alpha: f64,
    pub lr: LrParams,
    pub svm: SvmParams,
    pub standardize: bool,
    pub dev_fraction: f64,
    pub protocol: EvalProtocol,
    pub macro_f1: bool,
    pub output_dir: PathBuf,
}

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "preset",
    "train",
    "dev",
    "test",
    "dataset_format",
    "stopwords",
    "text_encoder",
    "text_features",
    "hash_dim",
    "hash_seed",
    "image_features",
    "members",
    "weights",
    "seed",
    "smote",
    "smote_k",
    "min_count",
    "alpha",
    "learning_rate",
    "epochs",
    "l2",
    "lambda",
    "svm_epochs",
    "standardize",
    "dev_fraction",
    "eval_protocol",
    "cv_folds",
    "macro_f1",
    "output_dir",
];

fn suggest(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(key, k), *k))
        .filter(|&(d, _)| d <= 3)
        .min()
        .map(|(_, k)| k.to_owned())
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {raw:?}")))
}

fn boolean(key: &str, raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "bad value for {key}: {raw:?}, expected true/false"
        ))),
    }
}

fn list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split([';', ',']).map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    /// Defaults for everything but the training set.
    pub fn new(train: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            preset: Preset::Run1,
            train: train.into(),
            dev: None,
            test: None,
            dataset_format: None,
            stopwords: None,
            text_encoder: TextEncoder::File,
            text_features: None,
            hash_dim: 64,
            hash_seed: 0,
            image_features: Vec::new(),
            members: Vec::new(),
            weights: None,
            seed: 0,
            smote: Some(RebalanceMode::Equalize),
            smote_k: DEFAULT_K,
            min_count: 1,
            alpha: DEFAULT_ALPHA,
            lr: LrParams::default(),
            svm: SvmParams::default(),
            standardize: false,
            dev_fraction: 0.2,
            protocol: EvalProtocol::Holdout,
            macro_f1: false,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Parses config text; relative paths are joined onto `base_dir`.
    pub fn parse(content: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (idx, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            let key = k.trim().to_owned();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey {
                    suggestion: suggest(&key),
                    key,
                });
            }
            if entries.iter().any(|(existing, _)| *existing == key) {
                return Err(Error::Config(format!("key {key:?} given twice")));
            }
            entries.push((key, v.trim().to_owned()));
        }

        let path = |raw: &str| -> PathBuf {
            let p = PathBuf::from(raw);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let train = entries
            .iter()
            .find(|(k, _)| k == "train")
            .map(|(_, v)| path(v))
            .ok_or_else(|| Error::MissingInput("config must set train".into()))?;
        let mut cfg = RunConfig::new(train);
        cfg.output_dir = path("out");
        let mut cv_folds = 5;
        let mut cross_validate = false;

        for (key, raw) in &entries {
            let raw = raw.as_str();
            match key.as_str() {
                "train" => {}
                "preset" => cfg.preset = raw.parse()?,
                "dev" => cfg.dev = Some(path(raw)),
                "test" => cfg.test = Some(path(raw)),
                "dataset_format" => cfg.dataset_format = Some(raw.parse()?),
                "stopwords" => cfg.stopwords = Some(path(raw)),
                "text_encoder" => {
                    cfg.text_encoder = match raw {
                        "file" => TextEncoder::File,
                        "hash" => TextEncoder::Hash,
                        _ => return Err(Error::Config(format!("text_encoder must be file or hash, got {raw:?}"))),
                    }
                }
                "text_features" => cfg.text_features = Some(path(raw)),
                "hash_dim" => cfg.hash_dim = value(key, raw)?,
                "hash_seed" => cfg.hash_seed = value(key, raw)?,
                "image_features" => cfg.image_features = list(raw).map(path).collect(),
                "members" => cfg.members = list(raw).map(str::parse).collect::<Result<_>>()?,
                "weights" => cfg.weights = Some(list(raw).map(|w| value(key, w)).collect::<Result<_>>()?),
                "seed" => cfg.seed = value(key, raw)?,
                "smote" => {
                    cfg.smote = if raw.eq_ignore_ascii_case("none") {
                        None
                    } else {
                        Some(raw.parse().map_err(|e: Error| Error::Config(e.to_string()))?)
                    }
                }
                "smote_k" => cfg.smote_k = value(key, raw)?,
                "min_count" => cfg.min_count = value(key, raw)?,
                "alpha" => cfg.alpha = value(key, raw)?,
                "learning_rate" => cfg.lr.learning_rate = value(key, raw)?,
                "epochs" => cfg.lr.epochs = value(key, raw)?,
                "l2" => cfg.lr.l2 = value(key, raw)?,
                "lambda" => cfg.svm.lambda = value(key, raw)?,
                "svm_epochs" => cfg.svm.epochs = value(key, raw)?,
                "standardize" => cfg.standardize = boolean(key, raw)?,
                "dev_fraction" => cfg.dev_fraction = value(key, raw)?,
                "eval_protocol" => {
                    cross_validate = match raw {
                        "holdout" => false,
                        "cv" => true,
                        _ => {
                            return Err(Error::Config(format!(
                                "eval_protocol must be holdout or cv, got {raw:?}"
                            )))
                        }
                    }
                }
                "cv_folds" => cv_folds = value(key, raw)?,
                "macro_f1" => cfg.macro_f1 = boolean(key, raw)?,
                "output_dir" => cfg.output_dir = path(raw),
                _ => unreachable!("key list checked above"),
            }
        }
        if cross_validate {
            cfg.protocol = EvalProtocol::CrossValidation { folds: cv_folds };
        }
        cfg.lr.seed = cfg.seed;
        cfg.svm.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&content, path.parent().unwrap_or(Path::new(".")))
    }

    /// Members fused by this run.
    pub fn active_members(&self) -> Vec<Member> {
        match self.preset.members() {
            Some(m) => m.to_vec(),
            None => self.members.clone(),
        }
    }

    pub fn fusion_weights(&self) -> Vec<f64> {
        self.weights
            .clone()
            .unwrap_or_else(|| vec![1.0; self.active_members().len()])
    }

    /// Canonical `key=value` rendering, stable across runs; hashed into
    /// prediction-file headers.
    pub fn canonical_text(&self) -> String {
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let joined = |v: Vec<String>| v.join(";");
        let protocol = match self.protocol {
            EvalProtocol::Holdout => "holdout".to_owned(),
            EvalProtocol::CrossValidation { folds } => format!("cv:{folds}"),
        };
        let lines = [
            ("preset", self.preset.to_string()),
            ("train", self.train.display().to_string()),
            ("dev", opt(&self.dev)),
            ("test", opt(&self.test)),
            ("stopwords", opt(&self.stopwords)),
            ("text_encoder", format!("{:?}", self.text_encoder)),
            ("text_features", opt(&self.text_features)),
            ("hash_dim", self.hash_dim.to_string()),
            ("hash_seed", self.hash_seed.to_string()),
            (
                "image_features",
                joined(self.image_features.iter().map(|p| p.display().to_string()).collect()),
            ),
            (
                "members",
                joined(self.active_members().iter().map(|m| m.name().to_owned()).collect()),
            ),
            (
                "weights",
                joined(self.fusion_weights().iter().map(f64::to_string).collect()),
            ),
            ("seed", self.seed.to_string()),
            (
                "smote",
                self.smote.map(|m| m.to_string()).unwrap_or_else(|| "none".into()),
            ),
            ("smote_k", self.smote_k.to_string()),
            ("min_count", self.min_count.to_string()),
            ("alpha", self.alpha.to_string()),
            ("learning_rate", self.lr.learning_rate.to_string()),
            ("epochs", self.lr.epochs.to_string()),
            ("l2", self.lr.l2.to_string()),
            ("lambda", self.svm.lambda.to_string()),
            ("svm_epochs", self.svm.epochs.to_string()),
            ("standardize", self.standardize.to_string()),
            ("dev_fraction", self.dev_fraction.to_string()),
            ("eval_protocol", protocol),
        ];
        lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

fn require_file(what: &str, path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingInput(format!("{what} {} does not exist", path.display())))
    }
}

/// Checks preset/member consistency, value ranges, and that every
/// referenced input file exists.
pub fn validate_config(mut cfg: RunConfig) -> Result<RunConfig> {
    let members = cfg.active_members();
    if members.is_empty() {
        return Err(Error::Config("custom preset needs members=<list>".into()));
    }
    if cfg.preset != Preset::Custom && !cfg.members.is_empty() && cfg.members != members {
        return Err(Error::Config(format!(
            "members conflicts with preset {}; use preset=custom",
            cfg.preset
        )));
    }
    if members.iter().enumerate().any(|(i, m)| members[..i].contains(m)) {
        return Err(Error::Config("members must not repeat".into()));
    }
    if let Some(w) = &cfg.weights {
        if w.len() != members.len() {
            return Err(Error::Config(format!(
                "{} weights for {} members",
                w.len(),
                members.len()
            )));
        }
        if w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Config("weights must be positive".into()));
        }
    }

    require_file("train dataset", &cfg.train)?;
    for (what, p) in [
        ("dev dataset", &cfg.dev),
        ("test dataset", &cfg.test),
        ("stop-word file", &cfg.stopwords),
    ] {
        if let Some(p) = p {
            require_file(what, p)?;
        }
    }

    if members.contains(&Member::EmbedLr) {
        match (cfg.text_encoder, &cfg.text_features) {
            (TextEncoder::File, None) => {
                return Err(Error::MissingInput(format!(
                    "preset {} needs text_features (or text_encoder=hash)",
                    cfg.preset
                )))
            }
            (TextEncoder::File, Some(p)) => require_file("text feature file", p)?,
            (TextEncoder::Hash, _) => {
                if cfg.hash_dim == 0 {
                    return Err(Error::Config("hash_dim must be positive".into()));
                }
            }
        }
    }
    if members.contains(&Member::ImageSvm) {
        if cfg.image_features.is_empty() {
            return Err(Error::MissingInput(format!(
                "preset {} needs image_features",
                cfg.preset
            )));
        }
        for p in &cfg.image_features {
            require_file("image feature file", p)?;
        }
    }

    if cfg.min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    if cfg.smote_k == 0 {
        return Err(Error::Config("smote_k must be at least 1".into()));
    }
    if !(cfg.alpha > 0.0) {
        return Err(Error::Config("alpha must be positive".into()));
    }
    if !(cfg.lr.learning_rate > 0.0) {
        return Err(Error::Config("learning_rate must be positive".into()));
    }
    if !(cfg.lr.l2 >= 0.0) {
        return Err(Error::Config("l2 must be nonnegative".into()));
    }
    if !(cfg.svm.lambda > 0.0) {
        return Err(Error::Config("lambda must be positive".into()));
    }
    if !(cfg.dev_fraction > 0.0 && cfg.dev_fraction < 1.0) {
        return Err(Error::Config("dev_fraction must lie in (0,1)".into()));
    }
    if let EvalProtocol::CrossValidation { folds } = cfg.protocol {
        if folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
    }
    cfg.members = members;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, "").unwrap();
        p
    }

    #[test]
    fn run1_needs_only_dataset_and_stopwords() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "train.jsonl");
        touch(dir.path(), "stop.txt");
        let cfg = RunConfig::parse("preset=run1\ntrain=train.jsonl\nstopwords=stop.txt\n", dir.path()).unwrap();
        let cfg = validate_config(cfg).unwrap();
        assert_eq!(cfg.members, [Member::BowNb]);
        assert_eq!(cfg.train, dir.path().join("train.jsonl"));
        assert_eq!(cfg.lr, LrParams::default());
    }

    #[test]
    fn run4_without_image_features() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "train.jsonl");
        let cfg = RunConfig::parse("preset=run4\ntrain=train.jsonl\n", dir.path()).unwrap();
        assert!(matches!(validate_config(cfg), Err(Error::MissingInput(_))));
    }

    #[test]
    fn run2_needs_an_encoder() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "train.jsonl");
        let cfg = RunConfig::parse("preset=run2\ntrain=train.jsonl\n", dir.path()).unwrap();
        assert!(matches!(validate_config(cfg), Err(Error::MissingInput(_))));
        let cfg = RunConfig::parse("preset=run2\ntrain=train.jsonl\ntext_encoder=hash\n", dir.path()).unwrap();
        assert!(validate_config(cfg).is_ok());
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = RunConfig::parse("train=x\nlearning_rt=0.1\n", Path::new(".")).unwrap_err();
        match &err {
            Error::UnknownKey { key, suggestion } => {
                assert_eq!(key, "learning_rt");
                assert_eq!(suggestion.as_deref(), Some("learning_rate"));
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("learning_rate"));
    }

    #[test]
    fn parses_overrides() {
        let cfg = RunConfig::parse(
            "# comment\ntrain=/data/t.csv\npreset=custom\nmembers=bow_nb,image\nweights=2;1\n\
             smote=factor:3\neval_protocol=cv\ncv_folds=4\nstandardize=yes\nseed=9\nlambda=0.01\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(cfg.train, PathBuf::from("/data/t.csv"));
        assert_eq!(cfg.members, [Member::BowNb, Member::ImageSvm]);
        assert_eq!(cfg.weights, Some(vec![2.0, 1.0]));
        assert_eq!(cfg.smote, Some(RebalanceMode::Factor(3.0)));
        assert_eq!(cfg.protocol, EvalProtocol::CrossValidation { folds: 4 });
        assert!(cfg.standardize);
        assert_eq!((cfg.svm.seed, cfg.svm.lambda), (9, 0.01));
        assert_eq!(cfg.output_dir, PathBuf::from("/cfg/out"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(RunConfig::parse("train=a\ntrain=b\n", Path::new(".")).is_err());
        assert!(RunConfig::parse("train\n", Path::new(".")).is_err());
        assert!(RunConfig::parse("preset=run1\n", Path::new(".")).is_err());
        assert!(RunConfig::parse("train=a\nepochs=-3\n", Path::new(".")).is_err());
    }

    #[test]
    fn weight_count_must_match() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "t.jsonl");
        let cfg = RunConfig::parse("train=t.jsonl\npreset=run1\nweights=1,1\n", dir.path()).unwrap();
        assert!(validate_config(cfg).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::parse("train=t\nseed=1\n", Path::new("/x")).unwrap();
        let b = RunConfig::parse("seed=1\ntrain=t\n", Path::new("/x")).unwrap();
        let c = RunConfig::parse("train=t\nseed=2\n", Path::new("/x")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
