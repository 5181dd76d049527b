use std::path::Path;

use crate::corpus::Usage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationPair {
    pub item_id: String,
    pub label_a: Usage,
    pub label_b: Usage,
}

impl AnnotationPair {
    pub fn new(item_id: impl Into<String>, label_a: Usage, label_b: Usage) -> Self {
        AnnotationPair {
            item_id: item_id.into(),
            label_a,
            label_b,
        }
    }
}

/// Agreement statistics for two raters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub observed: f64,
    pub chance: f64,
    pub kappa: f64,
}

/// Cohen's kappa for two raters over the binary figurative/literal set.
pub fn cohen_kappa(pairs: &[AnnotationPair]) -> Result<Agreement> {
    if pairs.is_empty() {
        return Err(Error::invalid("cohen_kappa needs at least one annotation pair"));
    }
    let n = pairs.len() as f64;
    let agree = pairs.iter().filter(|p| p.label_a == p.label_b).count() as f64;
    let fig_a = pairs.iter().filter(|p| p.label_a == Usage::Figurative).count() as f64 / n;
    let fig_b = pairs.iter().filter(|p| p.label_b == Usage::Figurative).count() as f64 / n;
    let observed = agree / n;
    let chance = fig_a * fig_b + (1.0 - fig_a) * (1.0 - fig_b);
    if agree == n {
        return Ok(Agreement {
            observed,
            chance,
            kappa: 1.0,
        });
    }
    if chance >= 1.0 {
        return Err(Error::invalid("degenerate marginals"));
    }
    Ok(Agreement {
        observed,
        chance,
        kappa: (observed - chance) / (1.0 - chance),
    })
}

/// Parses `item_id TAB label_a TAB label_b` lines.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationPair>> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(n + 1, format!("expected 3 fields, found {}", fields.len())));
        }
        let a = fields[1].parse().map_err(|e: String| Error::parse(n + 1, e))?;
        let b = fields[2].parse().map_err(|e: String| Error::parse(n + 1, e))?;
        pairs.push(AnnotationPair::new(fields[0], a, b));
    }
    Ok(pairs)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationPair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Usage::{Figurative as F, Literal as L};

    fn pairs(a: &[Usage], b: &[Usage]) -> Vec<AnnotationPair> {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (&x, &y))| AnnotationPair::new(i.to_string(), x, y))
            .collect()
    }

    #[test]
    fn perfect_agreement_is_one() {
        let k = cohen_kappa(&pairs(&[L, F, F], &[L, F, F])).unwrap();
        assert_eq!(k.kappa, 1.0);
        // constant raters that agree
        let k = cohen_kappa(&pairs(&[L, L], &[L, L])).unwrap();
        assert_eq!(k.kappa, 1.0);
    }

    #[test]
    fn partial_agreement() {
        let k = cohen_kappa(&pairs(&[L, L, F, F], &[L, F, F, F])).unwrap();
        assert!((k.observed - 0.75).abs() < 1e-12);
        assert!((k.chance - 0.5).abs() < 1e-12);
        assert!((k.kappa - 0.5).abs() < 1e-9);
    }

    #[test]
    fn total_disagreement_is_minus_one() {
        let k = cohen_kappa(&pairs(&[L, F], &[F, L])).unwrap();
        assert!((k.kappa + 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_input_errors() {
        assert!(cohen_kappa(&[]).is_err());
    }

    #[test]
    fn annotation_file_format() {
        let p = parse_annotations("t1\tliteral\tfigurative\nt2\tfigurative\tfigurative\n").unwrap();
        assert_eq!(p[0], AnnotationPair::new("t1", L, F));
        assert!(parse_annotations("t1\tliteral\n").is_err());
        assert!(parse_annotations("t1\tliteral\tmaybe\n").is_err());
    }

    fn arb_pairs() -> impl Strategy<Value = Vec<(bool, bool)>> {
        proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40)
    }

    fn to_pairs(raw: &[(bool, bool)], swap: bool) -> Vec<AnnotationPair> {
        let u = |b: bool| if b { F } else { L };
        raw.iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let (a, b) = if swap { (b, a) } else { (a, b) };
                AnnotationPair::new(i.to_string(), u(a), u(b))
            })
            .collect()
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(raw in arb_pairs()) {
            let ab = cohen_kappa(&to_pairs(&raw, false));
            let ba = cohen_kappa(&to_pairs(&raw, true));
            match (ab, ba) {
                (Ok(x), Ok(y)) => {
                    prop_assert!((x.kappa - y.kappa).abs() < 1e-12);
                    prop_assert!(x.kappa <= 1.0 && x.kappa >= -1.0 - 1e-12);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric error"),
            }
        }

        #[test]
        fn order_invariant(raw in arb_pairs()) {
            let mut rev = raw.clone();
            rev.reverse();
            let a = cohen_kappa(&to_pairs(&raw, false)).ok().map(|k| k.kappa);
            let b = cohen_kappa(&to_pairs(&rev, false)).ok().map(|k| k.kappa);
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
            }
        }
    }
}
