use std::path::Path;

use flood_detect::config::{EvalProtocol, Preset, RunConfig};
use flood_detect::corpus::{load_dataset, save_dataset, stratified_split, DatasetFormat};
use flood_detect::fusion::{decide, fuse};
use flood_detect::models::PosteriorPair;
use flood_detect::pipeline::{execute_run, load_predictions, RunOutput};
use flood_detect::synth::{write_fixture, SyntheticConfig};

fn fixture(dir: &Path, cfg: &SyntheticConfig) -> RunConfig {
    let files = write_fixture(dir, cfg).unwrap();
    RunConfig::load(files.config).unwrap()
}

fn run(base: &RunConfig, preset: Preset, out: &Path) -> RunOutput {
    let mut cfg = base.clone();
    cfg.preset = preset;
    cfg.members = Vec::new();
    cfg.output_dir = out.to_path_buf();
    execute_run(&cfg).unwrap()
}

#[test]
fn run3_is_the_mean_of_run1_and_run2() {
    let dir = tempfile::tempdir().unwrap();
    let base = fixture(
        dir.path(),
        &SyntheticConfig {
            n_records: 200,
            crossover: 0.3,
            ..Default::default()
        },
    );
    let p1 = load_predictions(run(&base, Preset::Run1, &dir.path().join("r1")).predictions).unwrap();
    let p2 = load_predictions(run(&base, Preset::Run2, &dir.path().join("r2")).predictions).unwrap();
    let p3 = load_predictions(run(&base, Preset::Run3, &dir.path().join("r3")).predictions).unwrap();
    assert_eq!(p1.len(), p3.len());
    for ((a, b), c) in p1.iter().zip(&p2).zip(&p3) {
        assert_eq!((&a.id, &b.id), (&c.id, &c.id));
        let pair = [
            PosteriorPair::from_positive(a.p_pos),
            PosteriorPair::from_positive(b.p_pos),
        ];
        let manual = fuse(&pair, &[1.0, 1.0]).unwrap();
        assert!(
            (manual.p_pos - c.p_pos).abs() < 1e-12,
            "{}: {} vs {}",
            c.id,
            manual.p_pos,
            c.p_pos
        );
        assert_eq!(decide(manual), c.label);
    }
}

#[test]
fn run5_survives_missing_images() {
    let dir = tempfile::tempdir().unwrap();
    let base = fixture(
        dir.path(),
        &SyntheticConfig {
            missing_image_fraction: 0.25,
            ..Default::default()
        },
    );
    let out = run(&base, Preset::Run5, &dir.path().join("r5"));
    let preds = load_predictions(&out.predictions).unwrap();
    assert_eq!(preds.len(), out.report.total());
    assert!(out.report.f1 > 0.9, "{:?}", out.report);

    // run4 alone falls back to the training prior for records without images
    let out4 = run(&base, Preset::Run4, &dir.path().join("r4"));
    assert_eq!(load_predictions(&out4.predictions).unwrap().len(), preds.len());
}

#[test]
fn prediction_header_carries_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let base = fixture(
        dir.path(),
        &SyntheticConfig {
            n_records: 120,
            ..Default::default()
        },
    );
    let out = run(&base, Preset::Run1, &dir.path().join("r1"));
    let text = std::fs::read_to_string(&out.predictions).unwrap();
    let mut cfg = base.clone();
    cfg.preset = Preset::Run1;
    cfg.members = Vec::new();
    cfg.output_dir = dir.path().join("r1");
    let first = text.lines().next().unwrap();
    assert!(first.starts_with(&format!("#config_hash={} ", cfg.hash())), "{first}");
    assert_eq!(cfg.hash().len(), 64);

    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(other.hash(), cfg.hash());
}

#[test]
fn cross_validation_scores_every_record_once() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = fixture(
        dir.path(),
        &SyntheticConfig {
            n_records: 160,
            ..Default::default()
        },
    );
    base.protocol = EvalProtocol::CrossValidation { folds: 4 };
    let out = run(&base, Preset::Run5, &dir.path().join("cv"));
    let preds = load_predictions(&out.predictions).unwrap();
    assert_eq!(preds.len(), 160);
    assert_eq!(out.report.total(), 160);
    let mut ids: Vec<_> = preds.iter().map(|p| p.id.clone()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 160);
    assert_eq!(out.member_reports.len(), 2);
}

#[test]
fn explicit_dev_and_test_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut base = fixture(
        d,
        &SyntheticConfig {
            n_records: 200,
            ..Default::default()
        },
    );
    let all = load_dataset(d.join("tweets.jsonl"), DatasetFormat::JsonLines).unwrap();
    let (rest, test) = stratified_split(&all, 0.2, 3).unwrap();
    let (train, dev) = stratified_split(&rest, 0.25, 3).unwrap();
    save_dataset(&train, d.join("train.jsonl")).unwrap();
    save_dataset(&dev, d.join("dev.jsonl")).unwrap();
    save_dataset(&test, d.join("test.jsonl")).unwrap();
    base.train = d.join("train.jsonl");
    base.dev = Some(d.join("dev.jsonl"));
    base.test = Some(d.join("test.jsonl"));

    let out = run(&base, Preset::Run3, &d.join("split"));
    assert_eq!(out.report.total(), dev.len());
    let test_report = out.test_report.expect("labeled test set is scored");
    assert_eq!(test_report.total(), test.len());
    let test_preds = load_predictions(out.test_predictions.unwrap()).unwrap();
    assert_eq!(test_preds.len(), test.len());
}
