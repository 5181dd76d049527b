//! Dense word-embedding tables: loading, random initialization,
//! similarity queries and ontology retrofitting.

mod io;
mod ontology;
mod retrofit;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Vocabulary, PAD_INDEX};
use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Scalar};

pub use io::{load_table, parse_table, write_table, LoadOptions, LoadedTable, TableFormat};
pub use ontology::{load_ontology, parse_ontology, OntologyGraph};
pub use retrofit::{retrofit, retrofit_objective, retrofit_traced, BetaMode, RetrofitConfig};

/// Half-width of the uniform range used for random rows.
pub const RANDOM_INIT_RANGE: f64 = 0.25;

/// Vocabulary-indexed matrix of word vectors. Row 0 (`<pad>`) is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    vocab: Vocabulary,
    matrix: Vec<T>,
    dim: usize,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(vocab: Vocabulary, matrix: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if matrix.len() != vocab.len() * dim {
            return Err(Error::Shape(format!(
                "matrix has {} entries, expected {} x {}",
                matrix.len(),
                vocab.len(),
                dim
            )));
        }
        if matrix[..dim].iter().any(|x| !x.is_zero()) {
            return Err(Error::invalid("PAD row must be all zeros"));
        }
        Ok(EmbeddingTable { vocab, matrix, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows, reserved rows included.
    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &[T] {
        &self.matrix
    }

    pub fn row(&self, id: usize) -> &[T] {
        &self.matrix[id * self.dim..(id + 1) * self.dim]
    }

    pub(crate) fn row_mut(&mut self, id: usize) -> &mut [T] {
        &mut self.matrix[id * self.dim..(id + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[T]> {
        self.vocab.get(word).map(|id| self.row(id))
    }

    /// Re-indexes this table onto `vocab`. Words missing here (and UNK)
    /// get uniform random rows drawn from `seed`; PAD stays zero.
    pub fn aligned_to(&self, vocab: &Vocabulary, seed: u64) -> EmbeddingTable<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrix = vec![T::zero(); vocab.len() * self.dim];
        for (id, word) in vocab.words().iter().enumerate().skip(1) {
            let row = &mut matrix[id * self.dim..(id + 1) * self.dim];
            match self.vocab.get(word).filter(|&i| !Vocabulary::is_reserved(i)) {
                Some(src) => row.copy_from_slice(self.row(src)),
                None => fill_uniform(row, &mut rng),
            }
        }
        EmbeddingTable {
            vocab: vocab.clone(),
            matrix,
            dim: self.dim,
        }
    }
}

fn fill_uniform<T: Scalar, R: Rng>(row: &mut [T], rng: &mut R) {
    for x in row {
        *x = T::of(rng.gen_range(-RANDOM_INIT_RANGE..=RANDOM_INIT_RANGE));
    }
}

/// Table over `vocab` (reserved entries added) with i.i.d. entries
/// uniform on [-0.25, 0.25]. PAD stays zero.
pub fn random_table<T: Scalar, S: AsRef<str>>(vocab: &[S], dim: usize, seed: u64) -> Result<EmbeddingTable<T>> {
    if dim == 0 {
        return Err(Error::invalid("embedding dimension must be at least 1"));
    }
    let vocab = Vocabulary::from_tokens(vocab.iter().map(AsRef::as_ref));
    if vocab.is_empty() {
        return Err(Error::invalid("random_table needs a non-empty vocabulary"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = vec![T::zero(); vocab.len() * dim];
    fill_uniform(&mut matrix[dim..], &mut rng);
    debug_assert!(matrix[PAD_INDEX * dim..dim].iter().all(|x| x.is_zero()));
    EmbeddingTable::new(vocab, matrix, dim)
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!("cosine of {}-d and {}-d vectors", u.len(), v.len())));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu.is_zero() || nv.is_zero() {
        return Ok(T::zero());
    }
    let c = dot(u, v) / (nu * nv);
    Ok(c.max(-T::one()).min(T::one()))
}

/// The `k` most cosine-similar words to `word`, excluding the query and
/// the reserved rows. Ties break by ascending word.
pub fn nearest_neighbors<T: Scalar>(table: &EmbeddingTable<T>, word: &str, k: usize) -> Result<Vec<(String, T)>> {
    let query_id = table
        .vocab
        .get(word)
        .filter(|&i| !Vocabulary::is_reserved(i))
        .ok_or_else(|| Error::invalid(format!("`{word}` is not in the embedding vocabulary")))?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let query = table.row(query_id);
    let mut scored: Vec<(&str, T)> = table
        .vocab
        .words()
        .iter()
        .enumerate()
        .filter(|&(id, _)| id != query_id && !Vocabulary::is_reserved(id))
        .map(|(id, w)| Ok((w.as_str(), cosine(query, table.row(id))?)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    scored.truncate(k);
    Ok(scored.into_iter().map(|(w, s)| (w.to_string(), s)).collect())
}
