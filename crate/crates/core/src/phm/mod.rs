//! PHM classifiers: the sentence CNN (PHMD), the pipeline combiner that
//! short-circuits figurative usages, and the feature-augmented CNN.

mod model;
mod train;

use std::io::Write;

pub use model::{Architecture, CnnModel, DropoutLayout, ModelConfig, ModelInput};
pub use train::{train, TrainConfig, TrainExample};

use crate::corpus::{Label, PaddedSequence, Usage, Vocabulary};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::figurative::FigurativeVerdict;
use crate::scalar::Scalar;

/// Probabilities at or above this are PHM.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub doc_id: String,
    pub probability: f64,
    pub label: Label,
    pub figurative_label: Option<Usage>,
}

pub fn label_for(probability: f64) -> Label {
    if probability >= DECISION_THRESHOLD {
        Label::Phm
    } else {
        Label::NonPhm
    }
}

/// Model over `vocab`, initialized from `table` (rows missing from the
/// table, and UNK, are drawn at random from `seed`).
pub fn build_model<T: Scalar>(
    arch: Architecture,
    table: &EmbeddingTable<T>,
    vocab: &Vocabulary,
    config: &ModelConfig,
    seed: u64,
) -> Result<CnnModel<T>> {
    CnnModel::new(arch, &table.aligned_to(vocab, seed), config, seed)
}

pub fn build_phmd<T: Scalar>(table: &EmbeddingTable<T>, vocab: &Vocabulary, config: &ModelConfig, seed: u64) -> Result<CnnModel<T>> {
    build_model(Architecture::Phmd, table, vocab, config, seed)
}

pub fn build_feataug<T: Scalar>(table: &EmbeddingTable<T>, vocab: &Vocabulary, config: &ModelConfig, seed: u64) -> Result<CnnModel<T>> {
    build_model(Architecture::FeatAug, table, vocab, config, seed)
}

pub fn predict_phmd<T: Scalar>(model: &CnnModel<T>, doc_id: &str, seq: &PaddedSequence) -> Result<Prediction> {
    let p = model.probability(&ModelInput { seq, features: None })?.as_f64();
    Ok(Prediction {
        doc_id: doc_id.to_string(),
        probability: p,
        label: label_for(p),
        figurative_label: None,
    })
}

/// Figurative verdicts are NonPHM without consulting the model; literal
/// ones are delegated to it.
pub fn pipeline_predict<T: Scalar>(
    doc_id: &str,
    verdict: &FigurativeVerdict<T>,
    model: &CnnModel<T>,
    seq: &PaddedSequence,
) -> Result<Prediction> {
    if verdict.label == Usage::Figurative {
        return Ok(Prediction {
            doc_id: doc_id.to_string(),
            probability: 0.0,
            label: Label::NonPhm,
            figurative_label: Some(Usage::Figurative),
        });
    }
    let mut p = predict_phmd(model, doc_id, seq)?;
    p.figurative_label = Some(verdict.label);
    Ok(p)
}

pub fn feataug_predict<T: Scalar>(
    model: &CnnModel<T>,
    doc_id: &str,
    seq: &PaddedSequence,
    verdict: &FigurativeVerdict<T>,
) -> Result<Prediction> {
    if model.architecture() != Architecture::FeatAug {
        return Err(Error::invalid("feataug_predict needs a FeatAug model"));
    }
    let features = verdict.feature_vector(model.config().include_raw_score);
    let p = model
        .probability(&ModelInput {
            seq,
            features: Some(&features),
        })?
        .as_f64();
    Ok(Prediction {
        doc_id: doc_id.to_string(),
        probability: p,
        label: label_for(p),
        figurative_label: Some(verdict.label),
    })
}

/// `doc_id TAB probability TAB label TAB figurative_label` (`-` if none).
pub fn write_predictions<W: Write>(predictions: &[Prediction], mut out: W) -> Result<()> {
    for p in predictions {
        let fig = p.figurative_label.map_or("-", Usage::as_str);
        writeln!(out, "{}\t{:.6}\t{}\t{}", p.doc_id, p.probability, p.label, fig).map_err(|e| Error::io("<predictions>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::random_table;
    use crate::figurative::LinguisticFeatures;

    fn verdict(label: Usage) -> FigurativeVerdict<f64> {
        FigurativeVerdict {
            literal_score: if label == Usage::Figurative { 0.1 } else { 0.6 },
            label,
            features: LinguisticFeatures {
                has_subordinate_clause: true,
                left_pos: None,
                right_pos: None,
                health_word_presence: false,
                health_word_count_norm: 0.0,
            },
            target: Some(0),
        }
    }

    fn setup(arch: Architecture) -> (CnnModel<f64>, PaddedSequence) {
        let words: Vec<String> = ["i", "have", "a", "cough"].iter().map(|s| s.to_string()).collect();
        let table = random_table(&words, 5, 3).unwrap();
        let cfg = ModelConfig {
            max_len: 10,
            filters: 6,
            ..ModelConfig::for_architecture(arch)
        };
        let model = build_model(arch, &table, table.vocab(), &cfg, 7).unwrap();
        let seq = model.encode(&["i", "have", "a", "cough"]);
        (model, seq)
    }

    #[test]
    fn threshold_contract() {
        assert_eq!(label_for(0.49), Label::NonPhm);
        assert_eq!(label_for(0.5), Label::Phm);
    }

    #[test]
    fn phmd_prediction_in_open_interval() {
        let (model, seq) = setup(Architecture::Phmd);
        let p = predict_phmd(&model, "d1", &seq).unwrap();
        assert!(p.probability > 0.0 && p.probability < 1.0);
        assert_eq!(p.label, label_for(p.probability));
        assert_eq!(predict_phmd(&model, "d1", &seq).unwrap(), p);
    }

    #[test]
    fn pipeline_bypasses_model_on_figurative() {
        let (model, seq) = setup(Architecture::Phmd);
        let p = pipeline_predict("d", &verdict(Usage::Figurative), &model, &seq).unwrap();
        assert_eq!(model.invocations(), 0);
        assert_eq!(p.label, Label::NonPhm);
        assert_eq!(p.probability, 0.0);
        assert_eq!(p.figurative_label, Some(Usage::Figurative));

        let lit = pipeline_predict("d", &verdict(Usage::Literal), &model, &seq).unwrap();
        assert_eq!(model.invocations(), 1);
        let direct = predict_phmd(&model, "d", &seq).unwrap();
        assert_eq!(lit.label, direct.label);
        assert_eq!(lit.probability, direct.probability);
    }

    #[test]
    fn pipeline_delegates_by_bias() {
        let (mut model, seq) = setup(Architecture::Phmd);
        model.param_mut("head.bias").unwrap().data_mut()[0] = 10.0;
        assert_eq!(pipeline_predict("d", &verdict(Usage::Literal), &model, &seq).unwrap().label, Label::Phm);
        model.param_mut("head.bias").unwrap().data_mut()[0] = -10.0;
        assert_eq!(pipeline_predict("d", &verdict(Usage::Literal), &model, &seq).unwrap().label, Label::NonPhm);
    }

    #[test]
    fn feataug_records_label_and_is_deterministic() {
        let (model, seq) = setup(Architecture::FeatAug);
        let a = feataug_predict(&model, "d", &seq, &verdict(Usage::Figurative)).unwrap();
        let b = feataug_predict(&model, "d", &seq, &verdict(Usage::Figurative)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.figurative_label, Some(Usage::Figurative));
        let short = [0.5];
        assert!(model.probability(&ModelInput { seq: &seq, features: Some(&short) }).is_err());
        let (phmd, _) = setup(Architecture::Phmd);
        assert!(feataug_predict(&phmd, "d", &seq, &verdict(Usage::Literal)).is_err());
    }

    #[test]
    fn feataug_with_silent_right_branch_equals_phmd() {
        let (mut aug, seq) = setup(Architecture::FeatAug);
        let (mut phmd, _) = setup(Architecture::Phmd);
        let (_, feat_offset) = aug.hidden_layout();
        let feat_offset = feat_offset.unwrap();
        for name in aug.param_names().to_vec() {
            if name.starts_with("features.") {
                aug.param_mut(&name).unwrap().data_mut().iter_mut().for_each(|x| *x = 0.0);
            }
        }
        aug.param_mut("head.weight").unwrap().data_mut()[feat_offset..].iter_mut().for_each(|x| *x = 0.0);
        for name in phmd.param_names().to_vec() {
            let src = aug.param(&name).unwrap().data().to_vec();
            let dst = phmd.param_mut(&name).unwrap().data_mut();
            let n = dst.len();
            dst.copy_from_slice(&src[..n]);
        }
        for label in [Usage::Figurative, Usage::Literal] {
            let a = feataug_predict(&aug, "d", &seq, &verdict(label)).unwrap();
            let p = predict_phmd(&phmd, "d", &seq).unwrap();
            assert!((a.probability - p.probability).abs() <= 1e-12);
        }
    }

    #[test]
    fn prediction_dump_format() {
        let preds = vec![
            Prediction {
                doc_id: "a".into(),
                probability: 0.25,
                label: Label::NonPhm,
                figurative_label: None,
            },
            Prediction {
                doc_id: "b".into(),
                probability: 0.0,
                label: Label::NonPhm,
                figurative_label: Some(Usage::Figurative),
            },
        ];
        let mut out = Vec::new();
        write_predictions(&preds, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "a\t0.250000\tNonPHM\t-\nb\t0.000000\tNonPHM\tfigurative\n"
        );
    }
}
