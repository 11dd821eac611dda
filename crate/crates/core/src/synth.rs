//! Synthetic multimodal corpus for end-to-end checks: keyword-pool tweets
//! with token-level crossover noise, plus Gaussian-blob "image" features
//! standing in for several deep networks.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{save_dataset, Dataset, Label, TweetRecord};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

const FLOOD_WORDS: &[&str] = &[
    "alluvione",
    "esondazione",
    "allagamento",
    "fiume",
    "pioggia",
    "acqua",
    "fango",
    "frana",
    "maltempo",
    "allerta",
    "argine",
    "piena",
    "nubifragio",
    "evacuati",
    "soccorsi",
    "idrovore",
    "sottopasso",
    "torrente",
    "inondazione",
    "temporale",
];

const OTHER_WORDS: &[&str] = &[
    "calcio", "partita", "concerto", "musica", "cinema", "pizza", "vacanza", "spiaggia", "sole", "moda", "politica",
    "elezioni", "serie", "film", "ricetta", "gol", "squadra", "festival", "libro", "viaggio",
];

const FILLER: &[&str] = &["il", "la", "di", "che", "a", "per", "con", "una", "oggi", "ora"];
const DECORATIONS: &[&str] = &["https://t.co/x1y2", "@amici", "😱", "🌧️", "!!!", "#news", "…"];

/// Network names used for the generated image-feature files.
pub const IMAGE_MODELS: [&str; 3] = ["densenet", "vgg19", "resnet"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_records: usize,
    /// Negatives per positive.
    pub imbalance: usize,
    /// Probability that a content token comes from the other class's pool.
    pub crossover: f64,
    pub image_dim: usize,
    /// Per-dimension offset between the two class means, in noise standard deviations.
    pub separation: f64,
    pub image_models: usize,
    /// Share of records that carry no image.
    pub missing_image_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_records: 400,
            imbalance: 3,
            crossover: 0.1,
            image_dim: 8,
            separation: 1.0,
            image_models: 3,
            missing_image_fraction: 0.0,
            seed: 7,
        }
    }
}

pub struct SyntheticCorpus {
    pub dataset: Dataset,
    pub image_features: Vec<FeatureMatrix>,
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if cfg.image_dim == 0 || cfg.image_models == 0 {
        return Err(Error::invalid("image_dim and image_models must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_pos = cfg.n_records / (cfg.imbalance + 1);
    let mut records = Vec::with_capacity(cfg.n_records);
    let mut image_rows: Vec<(Vec<String>, Vec<Vec<f64>>)> = vec![(Vec::new(), Vec::new()); cfg.image_models];

    for i in 0..cfg.n_records {
        // interleave positives through the file
        let label = if i % (cfg.imbalance + 1) == 0 && i / (cfg.imbalance + 1) < n_pos {
            Label::Relevant
        } else {
            Label::NotRelevant
        };
        let (own, other) = match label {
            Label::Relevant => (FLOOD_WORDS, OTHER_WORDS),
            Label::NotRelevant => (OTHER_WORDS, FLOOD_WORDS),
        };
        let n_tokens = rng.random_range(6..=12);
        let mut words: Vec<&str> = Vec::with_capacity(n_tokens + 4);
        for _ in 0..n_tokens {
            let pool = if rng.random::<f64>() < cfg.crossover {
                other
            } else {
                own
            };
            let w = *pool.choose(&mut rng).expect("nonempty pool");
            words.push(w);
            if rng.random::<f64>() < 0.3 {
                words.push(FILLER.choose(&mut rng).expect("nonempty"));
            }
        }
        if rng.random::<f64>() < 0.5 {
            words.push(DECORATIONS.choose(&mut rng).expect("nonempty"));
        }
        let mut text = words.join(" ");
        if let Some(first) = text.get(..1) {
            text = first.to_uppercase() + &text[1..];
        }

        let id = format!("t{i:04}");
        let has_image = rng.random::<f64>() >= cfg.missing_image_fraction;
        let center = match label {
            Label::Relevant => cfg.separation / 2.0,
            Label::NotRelevant => -cfg.separation / 2.0,
        };
        if has_image {
            for (ids, rows) in image_rows.iter_mut() {
                ids.push(id.clone());
                rows.push(
                    (0..cfg.image_dim)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            center + z
                        })
                        .collect(),
                );
            }
        }
        records.push(TweetRecord {
            image_refs: if has_image {
                vec![format!("img/{id}.jpg")]
            } else {
                vec![]
            },
            id,
            text,
            label: Some(label),
        });
    }

    Ok(SyntheticCorpus {
        dataset: Dataset::new(records)?,
        image_features: image_rows
            .into_iter()
            .map(|(ids, rows)| FeatureMatrix::new(ids, rows, cfg.image_dim))
            .collect::<Result<_>>()?,
    })
}

/// Paths of a fixture written by [`write_fixture`].
#[derive(Debug, Clone)]
pub struct FixtureFiles {
    pub dataset: PathBuf,
    pub image_features: Vec<PathBuf>,
    pub config: PathBuf,
}

/// Writes the corpus, one feature file per image model, and a run config
/// (hash text encoder, so no external features are needed).
pub fn write_fixture(dir: &Path, cfg: &SyntheticConfig) -> Result<FixtureFiles> {
    let corpus = generate(cfg)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let dataset = dir.join("tweets.jsonl");
    save_dataset(&corpus.dataset, &dataset)?;
    let mut image_features = Vec::new();
    for (i, fm) in corpus.image_features.iter().enumerate() {
        let name = IMAGE_MODELS
            .get(i)
            .map_or_else(|| format!("image{i}"), |s| s.to_string());
        let path = dir.join(format!("{name}.feat"));
        fm.save(&path)?;
        image_features.push(path);
    }
    let image_list: Vec<String> = image_features
        .iter()
        .map(|p| p.file_name().expect("file path").to_string_lossy().into_owned())
        .collect();
    let config = dir.join("run.conf");
    let text = format!(
        "# synthetic multimodal fixture\npreset=run5\ntrain=tweets.jsonl\ntext_encoder=hash\nhash_dim=64\n\
         image_features={}\nseed={}\ndev_fraction=0.25\noutput_dir=out\n",
        image_list.join(";"),
        cfg.seed
    );
    fs::write(&config, text).map_err(|e| Error::io(&config, e))?;
    Ok(FixtureFiles {
        dataset,
        image_features,
        config,
    })
}
