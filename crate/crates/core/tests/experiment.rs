use std::fs;
use std::path::Path;

use figphm_core::corpus::{Label, Usage};
use figphm_core::harness::{
    load_report, planted_corpus, prepare_inputs, run_cross_validation, run_experiment, write_outputs, Approach, ExperimentConfig,
    SyntheticOptions, ALL_SCOPE, REPORT_FILE, TABLES_FILE,
};
use figphm_core::phm::DropoutLayout;
use figphm_core::ErrorKind;

fn setup(dir: &Path, docs: usize, extra_model: &str, flip: f64) -> ExperimentConfig {
    planted_corpus(&SyntheticOptions {
        docs,
        seed: 3,
        ..SyntheticOptions::default()
    })
    .unwrap()
    .write_files(dir)
    .unwrap();
    let text = format!(
        "[experiment]\ndataset = dataset.tsv\nfolds = 2\nseed = 5\n\n\
         [figurative]\ntable = similarity.txt\ntable_format = glove_text\nkeywords = keywords.txt\nk = 5\npipeline_flip_rate = {flip}\n\n\
         [model]\nmax_len = 10\nfilters = 4\nepochs = 2\nbatch_size = 4\n{extra_model}\n\n\
         [embedding.rand]\nsource = random\ndim = 6\n\n\
         [embedding.sim]\nsource = file\npath = similarity.txt\nformat = glove_text\n"
    );
    let path = dir.join("experiment.ini");
    fs::write(&path, text).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

#[test]
fn two_fold_smoke_on_ten_documents() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path(), 10, "", 0.0);
    let report = run_experiment(&config, 2).unwrap();

    assert_eq!(report.embeddings.len(), 2);
    assert_eq!(report.disease_embedding, "sim");
    for e in &report.embeddings {
        for a in Approach::ALL {
            let m = report.row(a, &e.name, ALL_SCOPE).unwrap();
            assert_eq!(m.total(), 10);
            let by_disease: usize = report
                .rows
                .iter()
                .filter(|r| r.approach == a && r.embedding == e.name && r.scope != ALL_SCOPE)
                .map(|r| r.metrics.total())
                .sum();
            assert_eq!(by_disease, 10);
        }
    }
    for a in &report.averages {
        let mean = report
            .embeddings
            .iter()
            .map(|e| report.row(a.approach, &e.name, ALL_SCOPE).unwrap().f_score)
            .sum::<f64>()
            / 2.0;
        assert!((a.f_score - mean).abs() < 1e-15);
    }
    assert_eq!(report.average(Approach::Phmd).unwrap().delta_f, 0.0);
}

#[test]
fn pipeline_dump_marks_figurative_documents_nonphm() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path(), 30, "", 0.25);
    let (_, inputs) = prepare_inputs(&config).unwrap();
    let report = run_cross_validation(&config, &inputs, 1).unwrap();
    let out = dir.path().join("out");
    write_outputs(&report, &inputs.docs, &inputs.verdicts, &out).unwrap();

    let dump = fs::read_to_string(out.join("predictions/pipeline_rand.tsv")).unwrap();
    let mut figurative = 0;
    for line in dump.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 4);
        if f[3] == Usage::Figurative.as_str() {
            figurative += 1;
            assert_eq!(f[2], Label::NonPhm.as_str());
            assert_eq!(f[1], "0.000000");
        }
    }
    assert!(figurative > 0);
    assert_eq!(dump.lines().count(), inputs.docs.len());
    for name in ["phmd_sim.tsv", "feataug_rand.tsv"] {
        assert!(out.join("predictions").join(name).exists(), "{name}");
    }
    assert_eq!(fs::read_to_string(out.join("verdicts.tsv")).unwrap().lines().count(), 30);
    assert!(fs::read_to_string(out.join(TABLES_FILE)).unwrap().contains("Averages over embeddings"));

    let parsed = load_report(out.join(REPORT_FILE)).unwrap();
    assert_eq!(parsed.rows, report.rows);
    assert_eq!(parsed.averages, report.averages);
    let base = parsed.average(Approach::Phmd).unwrap().f_score;
    for a in &parsed.averages {
        assert_eq!(a.delta_f, a.f_score - base);
    }
}

#[test]
fn restricted_approaches_and_stacked_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = setup(dir.path(), 12, "dropout_layout = stacked", 0.0);
    config.feataug_model.max_len = 40;
    config.approaches = vec![Approach::FeatAug];
    assert_eq!(config.feataug_model.layout, DropoutLayout::Stacked);
    let report = run_experiment(&config, 1).unwrap();
    assert!(report.rows.iter().all(|r| r.approach == Approach::FeatAug));
    assert_eq!(report.averages.len(), 1);
    assert!(report.averages[0].delta_f.is_nan());
}

#[test]
fn job_failures_name_embedding_and_fold() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = setup(dir.path(), 10, "", 0.0);
    config.train.epochs = 0;
    let err = run_experiment(&config, 1).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("embedding rand, fold 1"), "{msg}");
    assert_eq!(err.kind(), ErrorKind::Runtime);
}

#[test]
fn missing_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path(), 10, "", 0.0);
    fs::remove_file(dir.path().join("keywords.txt")).unwrap();
    let err = ExperimentConfig::load(dir.path().join("experiment.ini")).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Config);
    assert!(err.to_string().contains("keywords.txt"), "{err}");
}
