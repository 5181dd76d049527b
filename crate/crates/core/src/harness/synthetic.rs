//! Planted corpora for end-to-end checks. A document is PHM exactly when
//! it mentions a symptom word in a literal context. Literal and figurative
//! context words are drawn from large pools of made-up words, so a text
//! classifier sees each one only a handful of times, while the bundled
//! similarity table places literal context words next to the symptom
//! words and figurative ones away from them.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_dataset, Disease, Document, Label, Usage, Vocabulary};
use crate::embeddings::{write_table, EmbeddingTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOptions {
    pub docs: usize,
    /// Size of each of the literal and figurative context pools.
    pub context_pool: usize,
    pub filler_pool: usize,
    pub seed: u64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        SyntheticOptions {
            docs: 300,
            context_pool: 150,
            filler_pool: 20,
            seed: 0,
        }
    }
}

/// What was planted in one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planted {
    /// Symptom word used literally: PHM.
    Literal,
    /// Symptom word in a figurative context: NonPHM.
    Figurative,
    /// Literal health context without a symptom word: NonPHM.
    NoSymptom,
}

impl Planted {
    pub fn usage(self) -> Option<Usage> {
        match self {
            Planted::Literal => Some(Usage::Literal),
            Planted::Figurative => Some(Usage::Figurative),
            Planted::NoSymptom => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub docs: Vec<Document>,
    pub planted: Vec<Planted>,
    pub keywords: Vec<String>,
    pub table: EmbeddingTable<f64>,
}

pub const SYNTHETIC_DIM: usize = 8;

const DISEASES: [(Disease, &str); 3] = [
    (Disease::Cancer, "cancer"),
    (Disease::Stroke, "stroke"),
    (Disease::Depression, "depression"),
];

fn pseudo_words(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    const SYL: [&str; 16] = ["ba", "ke", "lo", "mu", "ri", "sa", "to", "vi", "ne", "du", "fa", "go", "pi", "ze", "hu", "jo"];
    let mut words: Vec<String> = (0..SYL.len().pow(3))
        .map(|i| format!("{}{}{}", SYL[i % 16], SYL[(i / 16) % 16], SYL[i / 256]))
        .collect();
    words.shuffle(rng);
    words.truncate(n);
    words
}

fn noisy(base: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    base.iter().map(|b| b + scale * (rng.gen::<f64>() * 2.0 - 1.0)).collect()
}

pub fn planted_corpus(opts: &SyntheticOptions) -> Result<SyntheticCorpus> {
    let pool = opts.context_pool;
    if opts.docs == 0 || pool == 0 || opts.filler_pool == 0 {
        return Err(Error::invalid("synthetic corpus needs documents and non-empty word pools"));
    }
    if 2 * pool + opts.filler_pool > 4096 {
        return Err(Error::invalid("synthetic word pools too large"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let words = pseudo_words(2 * pool + opts.filler_pool, &mut rng);
    let (literal, rest) = words.split_at(pool);
    let (figurative, filler) = rest.split_at(pool);

    let axis = |i: usize| -> Vec<f64> { (0..SYNTHETIC_DIM).map(|j| if j == i { 1.0 } else { 0.0 }).collect() };
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    for (_, k) in DISEASES {
        entries.push((k.to_string(), noisy(&axis(0), 0.1, &mut rng)));
    }
    for w in literal {
        entries.push((w.clone(), noisy(&axis(0), 0.3, &mut rng)));
    }
    let mut fig_base = axis(1);
    fig_base[0] = -0.3;
    for w in figurative {
        entries.push((w.clone(), noisy(&fig_base, 0.3, &mut rng)));
    }
    for w in filler {
        let mut v: Vec<f64> = (0..SYNTHETIC_DIM).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        v[0] = 0.0;
        v[1] = 0.0;
        entries.push((w.clone(), v));
    }
    let vocab = Vocabulary::from_tokens(entries.iter().map(|e| e.0.as_str()));
    let mut matrix = vec![0.0; 2 * SYNTHETIC_DIM];
    for (_, v) in &entries {
        matrix.extend_from_slice(v);
    }
    let table = EmbeddingTable::new(vocab, matrix, SYNTHETIC_DIM)?;

    let mut docs = Vec::with_capacity(opts.docs);
    let mut planted = Vec::with_capacity(opts.docs);
    for i in 0..opts.docs {
        let (disease, keyword) = DISEASES[i % DISEASES.len()];
        let kind = match rng.gen_range(0..10) {
            0..=3 => Planted::Literal,
            4..=7 => Planted::Figurative,
            _ => Planted::NoSymptom,
        };
        let context = if kind == Planted::Figurative { figurative } else { literal };
        let mut tokens: Vec<&str> = (0..2).map(|_| context[rng.gen_range(0..pool)].as_str()).collect();
        tokens.extend((0..3).map(|_| filler[rng.gen_range(0..filler.len())].as_str()));
        if kind != Planted::NoSymptom {
            tokens.push(keyword);
        }
        tokens.shuffle(&mut rng);
        let label = if kind == Planted::Literal { Label::Phm } else { Label::NonPhm };
        docs.push(Document::new(format!("s{i:04}"), disease, tokens.join(" "), label));
        planted.push(kind);
    }
    Ok(SyntheticCorpus {
        docs,
        planted,
        keywords: DISEASES.iter().map(|d| d.1.to_string()).collect(),
        table,
    })
}

impl SyntheticCorpus {
    /// Writes `dataset.tsv`, `similarity.txt` (word2vec text) and
    /// `keywords.txt` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("dataset.tsv");
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_dataset(&self.docs, f)?;
        let path = dir.join("similarity.txt");
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_table(&self.table, std::io::BufWriter::new(f))?;
        let path = dir.join("keywords.txt");
        fs::write(&path, self.keywords.join("\n") + "\n").map_err(|e| Error::io(&path, e))
    }
}
