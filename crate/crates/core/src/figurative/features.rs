use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::figurative::Tag;
use crate::scalar::Scalar;

/// Words that open a subordinate clause.
pub const SUBORDINATORS: [&str; 19] = [
    "because", "although", "since", "while", "if", "that", "which", "who", "whom", "whose", "when", "where", "unless",
    "until", "though", "whereas", "after", "before", "as",
];

/// Length of [`LinguisticFeatures::to_vec`].
pub const FEATURE_LEN: usize = 1 + 2 * Tag::COUNT + 2;

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticFeatures<T> {
    pub has_subordinate_clause: bool,
    /// Tag of the token before the target, if any.
    pub left_pos: Option<Tag>,
    /// Tag of the token after the target, if any.
    pub right_pos: Option<Tag>,
    pub health_word_presence: bool,
    pub health_word_count_norm: T,
}

impl<T: Scalar> LinguisticFeatures<T> {
    /// `[subordinate, left one-hot (12), right one-hot (12), presence, count_norm]`.
    pub fn to_vec(&self) -> Vec<T> {
        let flag = |b: bool| if b { T::one() } else { T::zero() };
        let mut v = Vec::with_capacity(FEATURE_LEN);
        v.push(flag(self.has_subordinate_clause));
        for side in [self.left_pos, self.right_pos] {
            v.extend(Tag::ALL.iter().map(|&t| flag(side == Some(t))));
        }
        v.push(flag(self.health_word_presence));
        v.push(self.health_word_count_norm);
        v
    }
}

pub fn extract_features<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    target_index: usize,
    tags: &[Tag],
    health_lexicon: &HashSet<String>,
) -> Result<LinguisticFeatures<T>> {
    if target_index >= tokens.len() {
        return Err(Error::invalid(format!(
            "target index {target_index} out of range for {} tokens",
            tokens.len()
        )));
    }
    features_around(tokens, Some(target_index), tags, health_lexicon)
}

/// Feature extraction with an optional target; without one there are no
/// neighbor tags and every token counts toward health-word presence.
pub(crate) fn features_around<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    target: Option<usize>,
    tags: &[Tag],
    health_lexicon: &HashSet<String>,
) -> Result<LinguisticFeatures<T>> {
    if tags.len() != tokens.len() {
        return Err(Error::Shape(format!("{} tags for {} tokens", tags.len(), tokens.len())));
    }
    let has_subordinate_clause = tokens.iter().any(|t| SUBORDINATORS.contains(&t.as_ref()));
    let (left_pos, right_pos) = match target {
        Some(i) => (i.checked_sub(1).map(|j| tags[j]), tags.get(i + 1).copied()),
        None => (None, None),
    };
    let health_count = tokens
        .iter()
        .enumerate()
        .filter(|&(i, t)| Some(i) != target && health_lexicon.contains(t.as_ref()))
        .count();
    let health_word_count_norm = if tokens.is_empty() {
        T::zero()
    } else {
        T::of(health_count as f64 / tokens.len() as f64)
    };
    Ok(LinguisticFeatures {
        has_subordinate_clause,
        left_pos,
        right_pos,
        health_word_presence: health_count > 0,
        health_word_count_norm,
    })
}
