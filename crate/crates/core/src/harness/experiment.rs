use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{discard_garbled, load_dataset, load_word_list, pad, parse_word_list, Disease, Document, Label, Usage, Vocabulary};
use crate::embeddings::{load_ontology, load_table, random_table, retrofit, EmbeddingTable};
use crate::error::{Error, Result};
use crate::figurative::{FigurativeDetector, FigurativeVerdict, LdaConfig, DEFAULT_HEALTH_LEXICON, DEFAULT_SYMPTOM_KEYWORDS};
use crate::harness::{
    compute_metrics, stratified_kfold, train_indices, Approach, EmbeddingSource, EmbeddingSpec, ExperimentConfig,
    FigurativeSettings, Metrics,
};
use crate::phm::{
    build_feataug, build_phmd, feataug_predict, pipeline_predict, predict_phmd, train, Prediction, TrainConfig, TrainExample,
};

/// Scope name of the whole-corpus metrics rows.
pub const ALL_SCOPE: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingInfo {
    pub name: String,
    /// `random`, `file` or `retrofit`.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub approach: Approach,
    pub embedding: String,
    /// `all` or a disease name.
    pub scope: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageRow {
    pub approach: Approach,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    /// F minus the PHMD average F; NaN when PHMD was not run.
    pub delta_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub approach: Approach,
    pub embedding: String,
    /// One prediction per document, in corpus order.
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub embeddings: Vec<EmbeddingInfo>,
    pub disease_embedding: String,
    pub rows: Vec<MetricsRow>,
    pub averages: Vec<AverageRow>,
    pub predictions: Vec<PredictionSet>,
}

impl ExperimentReport {
    pub fn row(&self, approach: Approach, embedding: &str, scope: &str) -> Option<&Metrics> {
        self.rows
            .iter()
            .find(|r| r.approach == approach && r.embedding == embedding && r.scope == scope)
            .map(|r| &r.metrics)
    }

    pub fn average(&self, approach: Approach) -> Option<&AverageRow> {
        self.averages.iter().find(|a| a.approach == approach)
    }
}

/// Job seed from the run seed, a name and an index (FNV-1a, then a
/// splitmix64 finalizer).
pub fn derive_seed(seed: u64, name: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(name.as_bytes()).chain(&index.to_le_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

pub fn load_keywords(settings: &FigurativeSettings) -> Result<Vec<String>> {
    match &settings.keywords {
        Some(p) => load_word_list(p),
        None => Ok(parse_word_list(DEFAULT_SYMPTOM_KEYWORDS)),
    }
}

pub fn load_health_lexicon(settings: &FigurativeSettings) -> Result<HashSet<String>> {
    let words = match &settings.health_lexicon {
        Some(p) => load_word_list(p)?,
        None => parse_word_list(DEFAULT_HEALTH_LEXICON),
    };
    Ok(words.into_iter().collect())
}

/// Detector over the configured similarity table. Keywords missing from
/// the table are skipped with a warning.
pub fn build_detector(settings: &FigurativeSettings) -> Result<FigurativeDetector<f64>> {
    let loaded = load_table::<f64>(&settings.table, &settings.table_options)?;
    if loaded.duplicates > 0 {
        log::warn!("{}: {} duplicate words ignored", settings.table.display(), loaded.duplicates);
    }
    let table = loaded.table;
    let (known, missing): (Vec<String>, Vec<String>) =
        load_keywords(settings)?.into_iter().partition(|k| table.vocab().contains(k));
    if !missing.is_empty() {
        log::warn!("symptom keywords not in the similarity table: {}", missing.join(", "));
    }
    if known.is_empty() {
        return Err(Error::Config("none of the symptom keywords appear in the similarity table".into()));
    }
    FigurativeDetector::new(table, &known, load_health_lexicon(settings)?, settings.detector.clone())
}

/// Loads the dataset, drops documents that tokenize to nothing and marks
/// symptom positions.
pub fn load_corpus(config: &ExperimentConfig, keywords: &HashSet<String>) -> Result<Vec<Document>> {
    let docs = load_dataset(&config.dataset)?;
    let before = docs.len();
    let mut docs = discard_garbled(docs);
    if docs.len() < before {
        log::warn!("discarded {} empty documents", before - docs.len());
    }
    if docs.is_empty() {
        return Err(Error::invalid("dataset has no usable documents"));
    }
    let mut ids = HashSet::new();
    for d in &mut docs {
        if !ids.insert(d.id.clone()) {
            return Err(Error::invalid(format!("duplicate document id {}", d.id)));
        }
        d.mark_symptoms(keywords);
    }
    Ok(docs)
}

/// Verdicts for every document, re-labelled by the LDA estimator when
/// `use_lda` is set.
pub fn figurative_verdicts(
    detector: &FigurativeDetector<f64>,
    docs: &[Document],
    settings: &FigurativeSettings,
    seed: u64,
) -> Result<Vec<FigurativeVerdict<f64>>> {
    let verdicts: Vec<_> = docs.iter().map(|d| detector.verdict_for(d)).collect::<Result<_>>()?;
    if !settings.use_lda {
        return Ok(verdicts);
    }
    let lda = LdaConfig {
        iterations: settings.lda_iterations,
        seed: derive_seed(seed, "lda", 0),
        ..LdaConfig::default()
    };
    let labels = detector.lda_labels(docs, &verdicts, &lda)?;
    Ok(verdicts.iter().zip(labels).map(|(v, l)| v.with_label(l)).collect())
}

/// Copy of `verdicts` with each label flipped with probability `rate`.
pub fn noisy_verdicts(verdicts: &[FigurativeVerdict<f64>], rate: f64, seed: u64) -> Vec<FigurativeVerdict<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    verdicts
        .iter()
        .map(|v| {
            if rng.gen::<f64>() < rate {
                v.with_label(v.label.flipped())
            } else {
                v.clone()
            }
        })
        .collect()
}

/// Sorted distinct tokens of the corpus.
pub fn corpus_words(docs: &[Document]) -> Vec<String> {
    docs.iter()
        .flat_map(|d| d.tokens.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn load_embedding(spec: &EmbeddingSpec, words: &[String], seed: u64) -> Result<EmbeddingTable<f64>> {
    let ctx = |e: Error| e.context(format!("embedding {}", spec.name));
    match &spec.source {
        EmbeddingSource::Random { dim } => random_table(words, *dim, derive_seed(seed, &spec.name, u64::MAX)).map_err(ctx),
        EmbeddingSource::File { path, options } => {
            let loaded = load_table(path, options).map_err(ctx)?;
            if loaded.duplicates > 0 {
                log::warn!("{}: {} duplicate words ignored", path.display(), loaded.duplicates);
            }
            Ok(loaded.table)
        }
        EmbeddingSource::Retrofit {
            path,
            options,
            ontology,
            retrofit: rc,
        } => {
            let table = load_table(path, options).map_err(ctx)?.table;
            let graph = load_ontology(ontology).map_err(ctx)?;
            retrofit(&table, &graph, rc).map_err(ctx)
        }
    }
}

/// Everything a cross-validation run needs once files are loaded.
pub struct ExperimentInputs {
    pub docs: Vec<Document>,
    pub verdicts: Vec<FigurativeVerdict<f64>>,
    /// Verdicts seen by +Pipeline (possibly noised).
    pub pipeline_verdicts: Vec<FigurativeVerdict<f64>>,
    pub tables: Vec<(EmbeddingInfo, EmbeddingTable<f64>)>,
}

pub fn prepare_inputs(config: &ExperimentConfig) -> Result<(FigurativeDetector<f64>, ExperimentInputs)> {
    let detector = build_detector(&config.figurative)?;
    let docs = load_corpus(config, &detector.keywords())?;
    let verdicts = figurative_verdicts(&detector, &docs, &config.figurative, config.seed)?;
    let pipeline_verdicts = noisy_verdicts(
        &verdicts,
        config.figurative.pipeline_flip_rate,
        derive_seed(config.seed, "pipeline-noise", 0),
    );
    let words = corpus_words(&docs);
    let tables = config
        .embeddings
        .iter()
        .map(|spec| {
            let table = load_embedding(spec, &words, config.seed)?;
            let info = EmbeddingInfo {
                name: spec.name.clone(),
                kind: spec.source.kind().to_string(),
            };
            Ok((info, table))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        detector,
        ExperimentInputs {
            docs,
            verdicts,
            pipeline_verdicts,
            tables,
        },
    ))
}

/// Loads every input named by `config` and runs the cross-validation.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport> {
    let (_, inputs) = prepare_inputs(config)?;
    run_cross_validation(config, &inputs, jobs)
}

pub fn training_examples(
    docs: &[Document],
    verdicts: &[FigurativeVerdict<f64>],
    indices: &[usize],
    vocab: &Vocabulary,
    max_len: usize,
    include_raw_score: bool,
) -> Vec<TrainExample<f64>> {
    indices
        .iter()
        .map(|&i| TrainExample {
            id: docs[i].id.clone(),
            seq: pad(&docs[i].tokens, vocab, max_len),
            label: docs[i].label,
            features: Some(verdicts[i].feature_vector(include_raw_score)),
        })
        .collect()
}

type FoldPredictions = Vec<(Approach, Vec<(usize, Prediction)>)>;

fn run_job(config: &ExperimentConfig, inputs: &ExperimentInputs, table: &EmbeddingTable<f64>, name: &str, folds: &[Vec<usize>], fold: usize) -> Result<FoldPredictions> {
    let docs = &inputs.docs;
    let train_idx = train_indices(folds, fold);
    let test_idx = &folds[fold];
    let vocab = Vocabulary::from_tokens(train_idx.iter().flat_map(|&i| docs[i].tokens.iter()));
    let seed = derive_seed(config.seed, name, fold as u64);
    let train_cfg = TrainConfig {
        seed: seed.wrapping_add(1),
        ..config.train
    };
    let wants = |a: Approach| config.approaches.contains(&a);
    let mut out = Vec::new();

    let phmd = if wants(Approach::Phmd) || wants(Approach::Pipeline) {
        let mc = &config.phmd_model;
        let mut model = build_phmd(table, &vocab, mc, seed)?;
        let examples = training_examples(docs, &inputs.verdicts, &train_idx, &vocab, mc.max_len, mc.include_raw_score);
        let trace = train(&mut model, &examples, &train_cfg)?;
        log::info!("{name} fold {fold}: PHMD final loss {:.4}", trace.last().copied().unwrap_or(f64::NAN));
        Some(model)
    } else {
        None
    };
    if let Some(model) = &phmd {
        let encode = |i: usize| pad(&docs[i].tokens, &vocab, config.phmd_model.max_len);
        if wants(Approach::Phmd) {
            let preds = test_idx
                .iter()
                .map(|&i| Ok((i, predict_phmd(model, &docs[i].id, &encode(i))?)))
                .collect::<Result<Vec<_>>>()?;
            out.push((Approach::Phmd, preds));
        }
        if wants(Approach::Pipeline) {
            let preds = test_idx
                .iter()
                .map(|&i| Ok((i, pipeline_predict(&docs[i].id, &inputs.pipeline_verdicts[i], model, &encode(i))?)))
                .collect::<Result<Vec<_>>>()?;
            out.push((Approach::Pipeline, preds));
        }
    }
    if wants(Approach::FeatAug) {
        let mc = &config.feataug_model;
        let mut model = build_feataug(table, &vocab, mc, seed)?;
        let examples = training_examples(docs, &inputs.verdicts, &train_idx, &vocab, mc.max_len, mc.include_raw_score);
        let trace = train(&mut model, &examples, &train_cfg)?;
        log::info!("{name} fold {fold}: +FeatAug final loss {:.4}", trace.last().copied().unwrap_or(f64::NAN));
        let preds = test_idx
            .iter()
            .map(|&i| {
                let seq = pad(&docs[i].tokens, &vocab, mc.max_len);
                Ok((i, feataug_predict(&model, &docs[i].id, &seq, &inputs.verdicts[i])?))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((Approach::FeatAug, preds));
    }
    Ok(out)
}

/// Trains and evaluates every (embedding, fold) cell on up to `jobs`
/// threads, then assembles the report. The result does not depend on
/// `jobs`.
pub fn run_cross_validation(config: &ExperimentConfig, inputs: &ExperimentInputs, jobs: usize) -> Result<ExperimentReport> {
    let docs = &inputs.docs;
    if inputs.verdicts.len() != docs.len() || inputs.pipeline_verdicts.len() != docs.len() {
        return Err(Error::invalid("one verdict per document is required"));
    }
    let folds = stratified_kfold(docs, config.folds, config.seed)?;
    let cells: Vec<(usize, usize)> = (0..inputs.tables.len()).flat_map(|e| (0..folds.len()).map(move |f| (e, f))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<FoldPredictions>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(e, f)| {
                let (info, table) = &inputs.tables[e];
                run_job(config, inputs, table, &info.name, &folds, f)
                    .map_err(|err| err.context(format!("embedding {}, fold {}", info.name, f + 1)))
            })
            .collect()
    });

    let approaches: Vec<Approach> = Approach::ALL.iter().copied().filter(|a| config.approaches.contains(a)).collect();
    let mut per_embedding: Vec<Vec<Vec<Option<Prediction>>>> =
        vec![vec![vec![None; docs.len()]; approaches.len()]; inputs.tables.len()];
    for (&(e, _), result) in cells.iter().zip(results) {
        for (approach, preds) in result? {
            let a = approaches.iter().position(|&x| x == approach).expect("selected approach");
            for (i, p) in preds {
                per_embedding[e][a][i] = Some(p);
            }
        }
    }

    let diseases: Vec<Disease> = Disease::ALL.iter().copied().filter(|d| docs.iter().any(|x| x.disease == *d)).collect();
    let golds: Vec<Label> = docs.iter().map(|d| d.label).collect();
    let mut report = ExperimentReport {
        embeddings: inputs.tables.iter().map(|(i, _)| i.clone()).collect(),
        disease_embedding: config.disease_table_embedding().to_string(),
        ..Default::default()
    };
    for (e, (info, _)) in inputs.tables.iter().enumerate() {
        for (a, &approach) in approaches.iter().enumerate() {
            let preds: Vec<Prediction> = per_embedding[e][a]
                .iter_mut()
                .map(|p| p.take().ok_or_else(|| Error::invalid("a document received no prediction")))
                .collect::<Result<_>>()?;
            let labels: Vec<Label> = preds.iter().map(|p| p.label).collect();
            report.rows.push(MetricsRow {
                approach,
                embedding: info.name.clone(),
                scope: ALL_SCOPE.into(),
                metrics: compute_metrics(&labels, &golds, Label::Phm)?,
            });
            for &d in &diseases {
                let idx: Vec<usize> = (0..docs.len()).filter(|&i| docs[i].disease == d).collect();
                let p: Vec<Label> = idx.iter().map(|&i| labels[i]).collect();
                let g: Vec<Label> = idx.iter().map(|&i| golds[i]).collect();
                report.rows.push(MetricsRow {
                    approach,
                    embedding: info.name.clone(),
                    scope: d.as_str().into(),
                    metrics: compute_metrics(&p, &g, Label::Phm)?,
                });
            }
            report.predictions.push(PredictionSet {
                approach,
                embedding: info.name.clone(),
                predictions: preds,
            });
        }
    }
    report.averages = averages(&report, &approaches);
    Ok(report)
}

/// Arithmetic means of the whole-corpus rows across embeddings.
pub fn averages(report: &ExperimentReport, approaches: &[Approach]) -> Vec<AverageRow> {
    let n = report.embeddings.len() as f64;
    let mut rows: Vec<AverageRow> = approaches
        .iter()
        .map(|&approach| {
            let ms: Vec<&Metrics> = report
                .embeddings
                .iter()
                .filter_map(|e| report.row(approach, &e.name, ALL_SCOPE))
                .collect();
            let mean = |f: fn(&Metrics) -> f64| ms.iter().map(|m| f(m)).sum::<f64>() / n;
            AverageRow {
                approach,
                precision: mean(|m| m.precision),
                recall: mean(|m| m.recall),
                f_score: mean(|m| m.f_score),
                delta_f: f64::NAN,
            }
        })
        .collect();
    if let Some(base) = rows.iter().find(|r| r.approach == Approach::Phmd).map(|r| r.f_score) {
        for r in &mut rows {
            r.delta_f = r.f_score - base;
        }
    }
    rows
}

/// Figurative usage labels of the documents, for the verdict dump.
pub fn verdict_labels(verdicts: &[FigurativeVerdict<f64>]) -> Vec<Usage> {
    verdicts.iter().map(|v| v.label).collect()
}
