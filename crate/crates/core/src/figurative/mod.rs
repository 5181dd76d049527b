//! Figurative-usage detection for symptom words.
//!
//! A keyword's *literal representation* is its `k` nearest neighbors in
//! embedding space. The literal usage score of a sentence is the mean
//! clamped cosine between the sentence's content words and that
//! representation; scores below the threshold are figurative.

mod features;
mod lda;
mod tagger;

use std::collections::{HashMap, HashSet};
use std::io::Write;

use crate::corpus::{is_sentinel, Document, Usage, Vocabulary};
use crate::embeddings::{cosine, nearest_neighbors, EmbeddingTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use features::{extract_features, LinguisticFeatures, FEATURE_LEN, SUBORDINATORS};
pub use lda::{lda_estimate, LdaConfig, LdaEstimate, FIGURATIVE_TOPIC, LITERAL_TOPIC};
pub use tagger::{PosTagger, RuleTagger, Tag};

pub const DEFAULT_THRESHOLD: f64 = 0.2;
pub const DEFAULT_K: usize = 10;
/// Score reported when no content word can be compared.
pub const UNINFORMATIVE_SCORE: f64 = 0.5;

/// Starter health lexicon shipped with the crate.
pub const DEFAULT_HEALTH_LEXICON: &str = include_str!("../../data/health_lexicon.txt");
/// Starter symptom keyword list shipped with the crate.
pub const DEFAULT_SYMPTOM_KEYWORDS: &str = include_str!("../../data/symptom_keywords.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralRepresentation {
    pub keyword: String,
    pub related_words: Vec<String>,
}

pub fn build_literal_representation<T: Scalar>(
    table: &EmbeddingTable<T>,
    keyword: &str,
    k: usize,
) -> Result<LiteralRepresentation> {
    if table.vocab().get(keyword).is_none_or(Vocabulary::is_reserved) {
        return Err(Error::invalid(format!("keyword `{keyword}` is not in the embedding vocabulary")));
    }
    let related_words = nearest_neighbors(table, keyword, k)?.into_iter().map(|(w, _)| w).collect();
    Ok(LiteralRepresentation {
        keyword: keyword.to_string(),
        related_words,
    })
}

fn is_content_token(token: &str) -> bool {
    !is_sentinel(token) && token.chars().any(char::is_alphanumeric)
}

/// Mean of `max(0, cos(w, r))` over sentence content words `w` and
/// representation words `r`. The keyword itself, sentinels,
/// punctuation and out-of-vocabulary tokens are skipped; with nothing
/// left the score is 0.5.
pub fn literal_usage_score<T: Scalar, S: AsRef<str>>(tokens: &[S], rep: &LiteralRepresentation, table: &EmbeddingTable<T>) -> T {
    score_tokens(tokens, rep, table, false)
}

/// [`literal_usage_score`] with the option of letting the keyword's own
/// occurrences count as content words.
pub fn score_tokens<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    rep: &LiteralRepresentation,
    table: &EmbeddingTable<T>,
    include_keyword: bool,
) -> T {
    let rep_vectors: Vec<&[T]> = rep.related_words.iter().filter_map(|w| table.vector(w)).collect();
    let mut total = T::zero();
    let mut pairs = 0usize;
    for token in tokens.iter().map(AsRef::as_ref) {
        if !is_content_token(token) || (!include_keyword && token == rep.keyword) {
            continue;
        }
        let Some(v) = table.vocab().get(token).filter(|&id| !Vocabulary::is_reserved(id)).map(|id| table.row(id))
        else {
            continue;
        };
        for r in &rep_vectors {
            // dimensions always agree within one table
            total += cosine(v, r).unwrap_or_else(|_| T::zero()).max(T::zero());
            pairs += 1;
        }
    }
    if pairs == 0 {
        T::of(UNINFORMATIVE_SCORE)
    } else {
        total / T::of(pairs as f64)
    }
}

/// Figurative iff `score < threshold`.
pub fn classify(score: f64, threshold: f64) -> Usage {
    if score < threshold {
        Usage::Figurative
    } else {
        Usage::Literal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurativeVerdict<T> {
    pub literal_score: T,
    pub label: Usage,
    pub features: LinguisticFeatures<T>,
    /// Token position the verdict was computed for.
    pub target: Option<usize>,
}

impl<T: Scalar> FigurativeVerdict<T> {
    /// Feature vector fed to the augmented classifier:
    /// `[figurative bit, linguistic features.., (literal score)]`.
    pub fn feature_vector(&self, include_raw_score: bool) -> Vec<T> {
        let mut v = Vec::with_capacity(FEATURE_LEN + 2);
        v.push(if self.label == Usage::Figurative { T::one() } else { T::zero() });
        v.extend(self.features.to_vec());
        if include_raw_score {
            v.push(self.literal_score);
        }
        v
    }

    /// Copy carrying `label`; the score is kept, so the threshold
    /// invariant no longer holds. Used to model a noisy verdict channel.
    pub fn with_label(&self, label: Usage) -> Self {
        FigurativeVerdict {
            label,
            ..self.clone()
        }
    }
}

/// Length of [`FigurativeVerdict::feature_vector`].
pub fn verdict_feature_len(include_raw_score: bool) -> usize {
    1 + FEATURE_LEN + usize::from(include_raw_score)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurativeConfig {
    pub k: usize,
    pub threshold: f64,
    pub include_keyword: bool,
}

impl Default for FigurativeConfig {
    fn default() -> Self {
        FigurativeConfig {
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
            include_keyword: false,
        }
    }
}

/// Scores symptom-word usage in documents against a similarity table.
pub struct FigurativeDetector<T> {
    table: EmbeddingTable<T>,
    representations: HashMap<String, LiteralRepresentation>,
    tagger: Box<dyn PosTagger>,
    health_lexicon: HashSet<String>,
    config: FigurativeConfig,
}

impl<T: Scalar> FigurativeDetector<T> {
    pub fn new<S: AsRef<str>>(
        table: EmbeddingTable<T>,
        keywords: &[S],
        health_lexicon: HashSet<String>,
        config: FigurativeConfig,
    ) -> Result<Self> {
        if !(config.threshold > 0.0 && config.threshold < 1.0) {
            return Err(Error::Config(format!("threshold {} outside (0, 1)", config.threshold)));
        }
        let mut representations = HashMap::new();
        for kw in keywords {
            let rep = build_literal_representation(&table, kw.as_ref(), config.k)?;
            representations.insert(kw.as_ref().to_string(), rep);
        }
        Ok(FigurativeDetector {
            table,
            representations,
            tagger: Box::new(RuleTagger::default()),
            health_lexicon,
            config,
        })
    }

    pub fn with_tagger(mut self, tagger: Box<dyn PosTagger>) -> Self {
        self.tagger = tagger;
        self
    }

    pub fn config(&self) -> &FigurativeConfig {
        &self.config
    }

    pub fn table(&self) -> &EmbeddingTable<T> {
        &self.table
    }

    pub fn keywords(&self) -> HashSet<String> {
        self.representations.keys().cloned().collect()
    }

    pub fn representation(&self, keyword: &str) -> Option<&LiteralRepresentation> {
        self.representations.get(keyword)
    }

    /// Verdict for a token sequence with symptom positions. Each
    /// occurrence is scored and the most literal one decides; with no
    /// occurrence the score is 0.5.
    pub fn verdict<S: AsRef<str>>(&self, tokens: &[S], symptom_indices: &[usize]) -> Result<FigurativeVerdict<T>> {
        let owned: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
        let tags = self.tagger.tag(&owned);
        let mut best: Option<(T, usize)> = None;
        for &i in symptom_indices {
            let token = owned
                .get(i)
                .ok_or_else(|| Error::invalid(format!("symptom index {i} out of range")))?;
            let Some(rep) = self.representations.get(token) else {
                continue;
            };
            let score = score_tokens(&owned, rep, &self.table, self.config.include_keyword);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, i));
            }
        }
        let (literal_score, target) = match best {
            Some((s, i)) => (s, Some(i)),
            None => (T::of(UNINFORMATIVE_SCORE), None),
        };
        let features = features::features_around(&owned, target, &tags, &self.health_lexicon)?;
        Ok(FigurativeVerdict {
            literal_score,
            label: classify(literal_score.as_f64(), self.config.threshold),
            features,
            target,
        })
    }

    pub fn verdict_for(&self, doc: &Document) -> Result<FigurativeVerdict<T>> {
        self.verdict(&doc.tokens, &doc.symptom_indices)
            .map_err(|e| e.context(format!("document {}", doc.id)))
    }

    /// Re-labels documents from a fitted LDA estimate, seeding it with
    /// the literal usage scores. Literal iff `p_literal >= 0.5`.
    pub fn lda_labels(&self, docs: &[Document], verdicts: &[FigurativeVerdict<T>], config: &LdaConfig) -> Result<Vec<Usage>> {
        let tokens: Vec<Vec<&str>> = docs
            .iter()
            .map(|d| {
                d.tokens
                    .iter()
                    .map(String::as_str)
                    .filter(|t| is_content_token(t) && !self.representations.contains_key(*t))
                    .collect()
            })
            .collect();
        let seeds: Vec<f64> = verdicts.iter().map(|v| v.literal_score.as_f64()).collect();
        let est = lda_estimate(&tokens, &seeds, config)?;
        Ok(est
            .doc_dist
            .iter()
            .map(|&(lit, _)| if lit >= 0.5 { Usage::Literal } else { Usage::Figurative })
            .collect())
    }
}

/// Audit dump: `doc_id TAB literal_score TAB label`.
pub fn write_verdicts<T: Scalar, W: Write>(docs: &[Document], verdicts: &[FigurativeVerdict<T>], mut out: W) -> Result<()> {
    for (doc, v) in docs.iter().zip(verdicts) {
        writeln!(out, "{}\t{:.6}\t{}", doc.id, v.literal_score.as_f64(), v.label).map_err(|e| Error::io("<verdicts>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Disease, Label};
    use proptest::prelude::*;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable<f64> {
        let dim = entries[0].1.len();
        let vocab = Vocabulary::from_tokens(entries.iter().map(|e| e.0));
        let mut m = vec![0.0; 2 * dim];
        for (_, v) in entries {
            m.extend_from_slice(v);
        }
        EmbeddingTable::new(vocab, m, dim).unwrap()
    }

    fn rep(keyword: &str, words: &[&str]) -> LiteralRepresentation {
        LiteralRepresentation {
            keyword: keyword.into(),
            related_words: words.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn representation_is_nearest_neighbors() {
        let t = table(&[("a", &[1.0]), ("b", &[2.0]), ("c", &[-1.0])]);
        assert_eq!(build_literal_representation(&t, "a", 1).unwrap().related_words, ["b"]);
        let r = build_literal_representation(&t, "a", 3).unwrap();
        assert_eq!(r.related_words.len(), 2);
        assert!(!r.related_words.contains(&"a".to_string()));
        let err = build_literal_representation(&t, "zzz", 1).unwrap_err();
        assert!(err.to_string().contains("zzz"));
    }

    #[test]
    fn score_examples() {
        let t = table(&[("u", &[1.0, 0.0]), ("r1", &[1.0, 0.0]), ("r2", &[0.0, 1.0]), ("neg", &[-1.0, 0.0])]);
        let r = rep("kw", &["r1", "r2"]);
        assert!((literal_usage_score(&["u"], &r, &t) - 0.5).abs() < 1e-12);
        let same = rep("kw", &["r1"]);
        assert!((literal_usage_score(&["u", "u"], &same, &t) - 1.0).abs() < 1e-12);
        assert_eq!(literal_usage_score(&["neg"], &same, &t), 0.0);
    }

    #[test]
    fn score_skips_keyword_sentinels_and_oov() {
        let t = table(&[("kw", &[1.0, 0.0]), ("r1", &[1.0, 0.0]), ("x", &[0.0, 1.0])]);
        let r = rep("kw", &["r1"]);
        assert_eq!(literal_usage_score(&["kw", "<user>", "!", "oov", "x"], &r, &t), 0.0);
        assert_eq!(literal_usage_score(&["kw", "oov"], &r, &t), 0.5);
        assert_eq!(score_tokens(&["kw", "oov"], &r, &t, true), 1.0);
    }

    #[test]
    fn classify_threshold() {
        assert_eq!(classify(0.19, 0.2), Usage::Figurative);
        assert_eq!(classify(0.20, 0.2), Usage::Literal);
        assert_eq!(classify(1.0, 0.2), Usage::Literal);
    }

    fn detector() -> FigurativeDetector<f64> {
        let t = table(&[
            ("cough", &[1.0, 0.0]),
            ("sick", &[0.9, 0.1]),
            ("throat", &[0.8, 0.2]),
            ("money", &[0.0, 1.0]),
            ("market", &[0.0, 1.0]),
        ]);
        let health: HashSet<String> = ["sick", "throat"].iter().map(|s| s.to_string()).collect();
        let cfg = FigurativeConfig {
            k: 2,
            ..Default::default()
        };
        FigurativeDetector::new(t, &["cough"], health, cfg).unwrap()
    }

    #[test]
    fn detector_verdicts() {
        let d = detector();
        let lit = d.verdict(&["sick", "cough", "throat"], &[1]).unwrap();
        assert_eq!(lit.label, Usage::Literal);
        assert!(lit.features.health_word_presence);
        assert_eq!(lit.target, Some(1));
        let fig = d.verdict(&["market", "cough", "money"], &[1]).unwrap();
        assert_eq!(fig.label, Usage::Figurative);
        let none = d.verdict(&["market"], &[]).unwrap();
        assert_eq!(none.literal_score, 0.5);
        assert_eq!(none.target, None);
        assert_eq!(lit.feature_vector(true).len(), verdict_feature_len(true));
        assert_eq!(fig.feature_vector(false)[0], 1.0);
    }

    #[test]
    fn detector_rejects_bad_threshold() {
        let t = table(&[("cough", &[1.0]), ("x", &[1.0])]);
        let cfg = FigurativeConfig {
            threshold: 1.0,
            ..Default::default()
        };
        assert!(FigurativeDetector::new(t, &["cough"], HashSet::new(), cfg).is_err());
    }

    #[test]
    fn verdict_dump_format() {
        let d = detector();
        let mut doc = Document::new("t9", Disease::Other, "market cough money", Label::NonPhm);
        doc.mark_symptoms(&d.keywords());
        let v = d.verdict_for(&doc).unwrap();
        let mut buf = Vec::new();
        write_verdicts(&[doc], &[v], &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with("t9\t0.1"), "{line}");
        assert!(line.ends_with("\tfigurative\n"));
    }

    #[test]
    fn shipped_word_lists_parse() {
        let health = crate::corpus::parse_word_list(DEFAULT_HEALTH_LEXICON);
        assert!(health.len() >= 100);
        assert!(health.contains(&"cough".to_string()));
        assert!(!crate::corpus::parse_word_list(DEFAULT_SYMPTOM_KEYWORDS).is_empty());
    }

    proptest! {
        #[test]
        fn classify_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if classify(lo, 0.2) == Usage::Literal {
                prop_assert_eq!(classify(hi, 0.2), Usage::Literal);
            }
        }

        #[test]
        fn score_invariant_to_scaling_and_order(
            rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 6),
            scale in 0.1f64..10.0,
            row in 0usize..6,
        ) {
            let names = ["kw", "r1", "r2", "s1", "s2", "s3"];
            let entries: Vec<(&str, &[f64])> = names.iter().zip(&rows).map(|(n, r)| (*n, r.as_slice())).collect();
            let t = table(&entries);
            let mut scaled_rows = rows.clone();
            for x in &mut scaled_rows[row] { *x *= scale; }
            let scaled: Vec<(&str, &[f64])> = names.iter().zip(&scaled_rows).map(|(n, r)| (*n, r.as_slice())).collect();
            let t2 = table(&scaled);
            let r = rep("kw", &["r1", "r2"]);
            let tokens = ["s1", "kw", "s2", "s3"];
            let reversed = ["s3", "s2", "kw", "s1"];
            let a = literal_usage_score(&tokens, &r, &t);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - literal_usage_score(&tokens, &r, &t2)).abs() < 1e-9);
            prop_assert!((a - literal_usage_score(&reversed, &r, &t)).abs() < 1e-12);
        }
    }
}
