//! Experiment harness: configuration, stratified folds, metrics, the
//! cross-validation runner and report files.

mod config;
mod experiment;
mod figeval;
mod folds;
mod metrics;
mod report;
mod synthetic;

pub use config::{Approach, EmbeddingSource, EmbeddingSpec, ExperimentConfig, FigurativeSettings};
pub use experiment::{
    averages, build_detector, corpus_words, derive_seed, figurative_verdicts, load_corpus, load_embedding, load_health_lexicon,
    load_keywords, noisy_verdicts, prepare_inputs, run_cross_validation, run_experiment, training_examples, verdict_labels,
    AverageRow, EmbeddingInfo, ExperimentInputs, ExperimentReport, MetricsRow, PredictionSet, ALL_SCOPE,
};
pub use figeval::{evaluate_figurative, load_usage_gold, parse_usage_gold, FigurativeEvaluation, UsageExample};
pub use folds::{stratified_kfold, train_indices};
pub use metrics::{compute_metrics, Metrics};
pub use report::{load_report, parse_report, render_tables, write_outputs, write_report, REPORT_FILE, REPORT_HEADER, TABLES_FILE};
pub use synthetic::{planted_corpus, Planted, SyntheticCorpus, SyntheticOptions, SYNTHETIC_DIM};
