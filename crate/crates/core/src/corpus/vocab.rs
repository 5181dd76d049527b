use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;

/// Word ↔ index map with `<pad>` at 0 and `<unk>` at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let mut vocab = Vocabulary {
            words: Vec::new(),
            index: HashMap::new(),
        };
        vocab.push(PAD);
        vocab.push(UNK);
        vocab
    }

    /// Builds a vocabulary in first-seen order.
    pub fn from_tokens<'a, I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<str> + 'a + ?Sized,
    {
        let mut vocab = Self::new();
        for t in tokens {
            vocab.insert(t.as_ref());
        }
        vocab
    }

    fn push(&mut self, word: &str) -> usize {
        let id = self.words.len();
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    /// Returns the existing index or appends the word.
    pub fn insert(&mut self, word: &str) -> usize {
        match self.index.get(word) {
            Some(&id) => id,
            None => self.push(word),
        }
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn id_or_unk(&self, word: &str) -> usize {
        self.get(word).unwrap_or(UNK_INDEX)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    /// True when only the reserved entries are present.
    pub fn is_empty(&self) -> bool {
        self.words.len() <= 2
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn is_reserved(id: usize) -> bool {
        id == PAD_INDEX || id == UNK_INDEX
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        let mut vocab = Vocabulary::new();
        for w in words.iter().skip(2) {
            vocab.insert(w);
        }
        vocab
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(vocab: Vocabulary) -> Self {
        vocab.words
    }
}

/// Token ids padded or truncated to a fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedSequence {
    pub token_ids: Vec<usize>,
    pub true_length: usize,
}

impl PaddedSequence {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

/// Maps tokens to ids, truncating at `max_len` and filling with PAD.
///
/// An empty token list yields a single UNK followed by padding so that
/// `true_length >= 1` always holds.
pub fn pad<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, max_len: usize) -> PaddedSequence {
    assert!(max_len >= 1, "max_len must be at least 1");
    let mut token_ids: Vec<usize> = tokens
        .iter()
        .take(max_len)
        .map(|t| vocab.id_or_unk(t.as_ref()))
        .collect();
    if token_ids.is_empty() {
        token_ids.push(UNK_INDEX);
    }
    let true_length = token_ids.len();
    token_ids.resize(max_len, PAD_INDEX);
    PaddedSequence {
        token_ids,
        true_length,
    }
}
