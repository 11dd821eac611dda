use std::path::Path;
use std::process::{Command, Output};

use flood_detect::synth::{write_fixture, SyntheticConfig};

fn flood_detect(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flood-detect"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_fixture(dir: &Path) {
    let cfg = SyntheticConfig {
        n_records: 120,
        ..Default::default()
    };
    write_fixture(dir, &cfg).unwrap();
}

#[test]
fn step_by_step_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_fixture(d);

    let o = flood_detect(&["ingest", "tweets.jsonl"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "records=120 positive=30 negative=90 unlabeled=0");

    let o = flood_detect(
        &[
            "featurize",
            "--input",
            "tweets.jsonl",
            "--out",
            "bow.feat",
            "--vocab-out",
            "vocab.txt",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let feat = std::fs::read_to_string(d.join("bow.feat")).unwrap();
    assert!(feat.starts_with("#dim="));

    let o = flood_detect(
        &[
            "train",
            "--kind",
            "nb",
            "--features",
            "bow.feat",
            "--dataset",
            "tweets.jsonl",
            "--out",
            "nb.model",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("kind=nb"));

    let o = flood_detect(
        &[
            "predict",
            "--model",
            "nb.model",
            "--features",
            "bow.feat",
            "--dataset",
            "tweets.jsonl",
            "--out",
            "p.tsv",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("rows=120"));

    let o = flood_detect(&["evaluate", "--dataset", "tweets.jsonl", "--predictions", "p.tsv"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let kv = stdout(&o);
    let line = kv.lines().find(|l| l.starts_with("run=evaluate")).expect("kv line");
    assert!(line.contains(" n=120 "), "{line}");

    for kind in ["lr", "svm"] {
        let model = format!("{kind}.model");
        let o = flood_detect(
            &[
                "train",
                "--kind",
                kind,
                "--features",
                "bow.feat",
                "--dataset",
                "tweets.jsonl",
                "--out",
                &model,
                "--standardize",
                "--smote",
                "factor:2",
            ],
            d,
        );
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
    }
}

#[test]
fn run_subcommand_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_fixture(d);
    let o = flood_detect(&["run", "--preset", "run3", "--config", "run.conf"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("run=run3 "));
    for f in ["predictions.tsv", "report.txt", "report.kv"] {
        assert!(d.join("out").join(f).is_file(), "missing {f}");
    }
    let kv = std::fs::read_to_string(d.join("out/report.kv")).unwrap();
    assert!(kv.lines().any(|l| l.starts_with("run=run3/bow_nb ")));
    assert!(kv.lines().any(|l| l.starts_with("run=run3/embed_lr ")));
}

fn assert_one_line_error(o: &Output, kind: &str) -> String {
    assert!(!o.status.success());
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error kind={kind} message=\"")), "{err}");
    err
}

#[test]
fn unknown_config_key_suggests_fix() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_fixture(d);
    let conf = std::fs::read_to_string(d.join("run.conf")).unwrap();
    std::fs::write(d.join("bad.conf"), conf.replace("dev_fraction", "dev_fractoin")).unwrap();
    let o = flood_detect(&["run", "--config", "bad.conf"], d);
    let err = assert_one_line_error(&o, "config");
    assert!(err.contains("dev_fraction"), "{err}");
    assert!(!d.join("out").exists());
}

#[test]
fn missing_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_fixture(d);

    let o = flood_detect(&["ingest", "nope.jsonl"], d);
    assert_one_line_error(&o, "io");

    std::fs::write(d.join("dup.csv"), "id,text,label\na,x,1\na,y,0\n").unwrap();
    let o = flood_detect(&["ingest", "dup.csv"], d);
    assert_one_line_error(&o, "validation");

    let conf = std::fs::read_to_string(d.join("run.conf")).unwrap();
    std::fs::write(
        d.join("noimg.conf"),
        conf.replace("image_features=", "#image_features="),
    )
    .unwrap();
    let o = flood_detect(&["run", "--config", "noimg.conf"], d);
    assert_one_line_error(&o, "missing_input");
    assert!(!d.join("out").exists());
}
