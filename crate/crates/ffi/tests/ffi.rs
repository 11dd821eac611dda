use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use flood_detect::synth::{write_fixture, SyntheticConfig};
use flood_detect_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn c_path(p: &Path) -> CString {
    c(p.to_str().unwrap())
}

fn last_error() -> String {
    let p = fd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn dataset_handle_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(
        dir.path(),
        &SyntheticConfig {
            n_records: 80,
            ..Default::default()
        },
    )
    .unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(
            fd_dataset_load(c_path(&files.dataset).as_ptr(), ptr::null(), &mut ds),
            FdStatus::Ok
        );
        assert_eq!(fd_dataset_len(ds), 80);
        let (mut pos, mut neg, mut unl) = (0, 0, 7);
        assert_eq!(fd_dataset_counts(ds, &mut pos, &mut neg, &mut unl), FdStatus::Ok);
        assert_eq!((pos, neg, unl), (20, 60, 0));
        assert_eq!(
            fd_dataset_counts(ds, ptr::null_mut(), &mut neg, ptr::null_mut()),
            FdStatus::Ok
        );
        fd_dataset_free(ds);
        fd_dataset_free(ptr::null_mut());
        assert_eq!(fd_dataset_len(ptr::null()), 0);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut ds = ptr::null_mut();
    unsafe {
        let status = fd_dataset_load(c("/nonexistent/x.jsonl").as_ptr(), ptr::null(), &mut ds);
        assert_eq!(status, FdStatus::Io);
        assert!(ds.is_null());
        assert!(last_error().contains("/nonexistent/x.jsonl"));

        assert_eq!(
            fd_dataset_load(ptr::null(), ptr::null(), &mut ds),
            FdStatus::NullArgument
        );
        assert_eq!(
            fd_dataset_load(c("a.csv").as_ptr(), c("xml").as_ptr(), &mut ds),
            FdStatus::InvalidArgument
        );
        assert_eq!(
            fd_dataset_counts(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()),
            FdStatus::NullArgument
        );

        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(
            fd_dataset_load(bad.as_ptr().cast(), ptr::null(), &mut ds),
            FdStatus::InvalidUtf8
        );
    }
}

#[test]
fn model_predicts_through_handle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nb.model");
    // two tokens, Laplace smoothing: hand-checkable posterior
    let x = flood_detect::features::FeatureMatrix::from_rows(vec![vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
    let y = [
        flood_detect::corpus::Label::Relevant,
        flood_detect::corpus::Label::NotRelevant,
    ];
    let nb = flood_detect::models::nb_train(&x, &y, 1.0).unwrap();
    let model = flood_detect::models::TrainedModel::new(flood_detect::models::Classifier::NaiveBayes(nb));
    flood_detect::models::save_model(&model, &path).unwrap();

    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(fd_model_load(c_path(&path).as_ptr(), &mut m), FdStatus::Ok);
        assert_eq!(fd_model_dim(m), 2);
        let mut out = FdPosterior { p_neg: 0.0, p_pos: 0.0 };
        assert_eq!(fd_model_predict(m, [1.0, 0.0].as_ptr(), 2, &mut out), FdStatus::Ok);
        // likelihoods 3/4 vs 1/4
        assert!((out.p_pos - 0.75).abs() < 1e-12, "{out:?}");
        assert_eq!(fd_decide(out), 1);

        assert_eq!(fd_model_predict(m, [1.0].as_ptr(), 1, &mut out), FdStatus::Dimension);
        assert!(last_error().contains('2'));
        assert_eq!(fd_model_predict(m, ptr::null(), 2, &mut out), FdStatus::NullArgument);
        fd_model_free(m);
    }
}

#[test]
fn fuse_decide_and_score() {
    let posts = [
        FdPosterior { p_neg: 0.6, p_pos: 0.4 },
        FdPosterior { p_neg: 0.8, p_pos: 0.2 },
    ];
    let mut out = FdPosterior { p_neg: 0.0, p_pos: 0.0 };
    unsafe {
        assert_eq!(fd_fuse(posts.as_ptr(), [1.0, 1.0].as_ptr(), 2, &mut out), FdStatus::Ok);
        assert!((out.p_neg - 0.7).abs() < 1e-15);
        assert_eq!(fd_decide(out), 0);
        assert_eq!(fd_decide(FdPosterior { p_neg: 0.5, p_pos: 0.5 }), 1);
        assert_eq!(
            fd_fuse(posts.as_ptr(), [1.0, -1.0].as_ptr(), 2, &mut out),
            FdStatus::InvalidArgument
        );
        assert_eq!(
            fd_fuse(ptr::null(), ptr::null(), 0, &mut out),
            FdStatus::InvalidArgument
        );
        let bad = [FdPosterior { p_neg: 0.9, p_pos: 0.9 }];
        assert_eq!(
            fd_fuse(bad.as_ptr(), [1.0].as_ptr(), 1, &mut out),
            FdStatus::InvalidArgument
        );

        let mut report = FdEvalReport::default();
        let labels = [1u8, 1, 1, 0, 0];
        let preds = [1u8, 1, 0, 1, 0];
        assert_eq!(
            fd_score_binary(labels.as_ptr(), preds.as_ptr(), 5, &mut report),
            FdStatus::Ok
        );
        assert_eq!((report.tp, report.fp, report.fn_, report.tn), (2, 1, 1, 1));
        assert_eq!(report.f1, 2.0 / 3.0);
        assert_eq!(
            fd_score_binary([2u8].as_ptr(), [0u8].as_ptr(), 1, &mut report),
            FdStatus::InvalidArgument
        );
    }
}

#[test]
fn preprocess_returns_owned_string() {
    let mut out = ptr::null_mut();
    unsafe {
        let text = c("RT @meteo: Alluvione a #Genova 😱 https://t.co/xyz");
        assert_eq!(fd_preprocess(text.as_ptr(), ptr::null(), &mut out), FdStatus::Ok);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "alluvione genova");
        fd_string_free(out);
        fd_string_free(ptr::null_mut());
    }
}

#[test]
fn run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_fixture(
        dir.path(),
        &SyntheticConfig {
            n_records: 120,
            ..Default::default()
        },
    )
    .unwrap();
    let mut report = FdEvalReport::default();
    unsafe {
        let conf = c_path(&files.config);
        assert_eq!(fd_run(conf.as_ptr(), c("run1").as_ptr(), &mut report), FdStatus::Ok);
        assert_eq!(report.tp + report.fp + report.fn_ + report.tn, 31);
        assert!(dir.path().join("out/predictions.tsv").is_file());
        assert_eq!(fd_run(conf.as_ptr(), c("run9").as_ptr(), &mut report), FdStatus::Config);
        assert!(last_error().contains("run9"));
    }
}
