use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::corpus::{Disease, Document, Label, Usage};
use crate::error::{Error, Result};
use crate::figurative::{FigurativeDetector, FigurativeVerdict, LdaConfig};
use crate::harness::{compute_metrics, Metrics};

/// A document with a gold literal/figurative annotation.
#[derive(Debug, Clone)]
pub struct UsageExample {
    pub doc: Document,
    pub gold: Usage,
}

/// Parses `id TAB text TAB literal|figurative` lines; `#` lines and blank
/// lines are skipped.
pub fn parse_usage_gold(text: &str) -> Result<Vec<UsageExample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::parse(i + 1, format!("expected 3 fields, found {}", f.len())));
        }
        let gold = f[2].trim().parse::<Usage>().map_err(|e| Error::parse(i + 1, e.to_string()))?;
        out.push(UsageExample {
            doc: Document::new(f[0], Disease::Other, f[1], Label::NonPhm),
            gold,
        });
    }
    Ok(out)
}

pub fn load_usage_gold(path: impl AsRef<Path>) -> Result<Vec<UsageExample>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_usage_gold(&text).map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone)]
pub struct FigurativeEvaluation {
    /// Scores with figurative as the positive class.
    pub score_only: Metrics,
    pub with_lda: Option<Metrics>,
    pub verdicts: Vec<FigurativeVerdict<f64>>,
    pub lda_labels: Option<Vec<Usage>>,
}

/// Scores the detector's labels, and optionally the LDA re-labelling,
/// against gold usages.
pub fn evaluate_figurative(
    examples: &[UsageExample],
    detector: &FigurativeDetector<f64>,
    lda: Option<&LdaConfig>,
) -> Result<FigurativeEvaluation> {
    let keywords: HashSet<String> = detector.keywords();
    let docs: Vec<Document> = examples
        .iter()
        .map(|e| {
            let mut d = e.doc.clone();
            d.mark_symptoms(&keywords);
            d
        })
        .collect();
    let verdicts: Vec<_> = docs.iter().map(|d| detector.verdict_for(d)).collect::<Result<_>>()?;
    let golds: Vec<Usage> = examples.iter().map(|e| e.gold).collect();
    let labels: Vec<Usage> = verdicts.iter().map(|v| v.label).collect();
    let score_only = compute_metrics(&labels, &golds, Usage::Figurative)?;
    let lda_labels = lda.map(|cfg| detector.lda_labels(&docs, &verdicts, cfg)).transpose()?;
    let with_lda = lda_labels
        .as_ref()
        .map(|l| compute_metrics(l, &golds, Usage::Figurative))
        .transpose()?;
    Ok(FigurativeEvaluation {
        score_only,
        with_lda,
        verdicts,
        lda_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::embeddings::EmbeddingTable;
    use crate::figurative::FigurativeConfig;

    fn detector() -> FigurativeDetector<f64> {
        let rows: &[(&str, [f64; 2])] = &[
            ("cough", [1.0, 0.0]),
            ("coughing", [0.98, 0.2]),
            ("fever", [0.95, 0.3]),
            ("throat", [0.9, 0.4]),
            ("sick", [0.88, 0.45]),
            ("laugh", [-1.0, 0.1]),
            ("joke", [-0.9, 0.2]),
            ("funny", [-0.95, -0.1]),
            ("lol", [-1.0, 0.05]),
        ];
        let vocab = Vocabulary::from_tokens(rows.iter().map(|r| r.0));
        let mut m = vec![0.0; 4];
        for (_, v) in rows {
            m.extend_from_slice(v);
        }
        let table = EmbeddingTable::new(vocab, m, 2).unwrap();
        let cfg = FigurativeConfig {
            k: 3,
            ..FigurativeConfig::default()
        };
        FigurativeDetector::new(table, &["cough"], HashSet::new(), cfg).unwrap()
    }

    const GOLD: &str = "\
a\tbad cough and fever\tliteral
b\tmy throat hurts from the cough\tliteral
c\tsick cough all night\tliteral
d\tthat joke made me cough lol\tfigurative
e\tcough laugh funny\tfigurative
f\tlol cough\tfigurative
";

    #[test]
    fn parses_gold_file() {
        let ex = parse_usage_gold(GOLD).unwrap();
        assert_eq!(ex.len(), 6);
        assert_eq!(ex[3].gold, Usage::Figurative);
        assert!(parse_usage_gold("a\tb\n").is_err());
        assert!(parse_usage_gold("a\tb\tmaybe\n").is_err());
    }

    #[test]
    fn separates_the_fixture() {
        let ex = parse_usage_gold(GOLD).unwrap();
        let eval = evaluate_figurative(&ex, &detector(), None).unwrap();
        assert_eq!(eval.score_only.total(), 6);
        assert_eq!((eval.score_only.tp, eval.score_only.tn), (3, 3), "{:?}", eval.verdicts);
        assert!(eval.with_lda.is_none());
        let lda = LdaConfig {
            iterations: 50,
            seed: 1,
            ..LdaConfig::default()
        };
        let eval = evaluate_figurative(&ex, &detector(), Some(&lda)).unwrap();
        assert_eq!(eval.with_lda.unwrap().total(), 6);
        assert_eq!(eval.lda_labels.unwrap().len(), 6);
    }
}
