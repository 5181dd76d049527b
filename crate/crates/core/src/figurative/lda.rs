//! Two-topic LDA (literal / figurative) fitted by collapsed Gibbs
//! sampling, with topic assignments seeded from literal usage scores.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const LITERAL_TOPIC: usize = 0;
pub const FIGURATIVE_TOPIC: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub doc_prior: f64,
    pub word_prior: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            doc_prior: 0.5,
            word_prior: 0.1,
            iterations: 200,
            seed: 0,
        }
    }
}

/// Posterior mean distributions; every pair is `(p_literal, p_figurative)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaEstimate {
    pub word_dist: BTreeMap<String, (f64, f64)>,
    pub doc_dist: Vec<(f64, f64)>,
}

impl LdaEstimate {
    pub fn doc_literal(&self, doc: usize) -> f64 {
        self.doc_dist[doc].0
    }
}

struct Sampler {
    docs: Vec<Vec<usize>>,
    topics: Vec<Vec<usize>>,
    doc_topic: Vec<[usize; 2]>,
    word_topic: Vec<[usize; 2]>,
    topic_total: [usize; 2],
    vocab_size: usize,
}

impl Sampler {
    fn sweep<R: Rng>(&mut self, rng: &mut R, alpha: f64, beta: f64) {
        let vbeta = self.vocab_size as f64 * beta;
        for d in 0..self.docs.len() {
            for n in 0..self.docs[d].len() {
                let w = self.docs[d][n];
                let old = self.topics[d][n];
                self.doc_topic[d][old] -= 1;
                self.word_topic[w][old] -= 1;
                self.topic_total[old] -= 1;

                let weight = |k: usize| {
                    (self.doc_topic[d][k] as f64 + alpha) * (self.word_topic[w][k] as f64 + beta)
                        / (self.topic_total[k] as f64 + vbeta)
                };
                let (p0, p1) = (weight(0), weight(1));
                let new = if rng.gen::<f64>() * (p0 + p1) < p0 { 0 } else { 1 };

                self.topics[d][n] = new;
                self.doc_topic[d][new] += 1;
                self.word_topic[w][new] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    fn doc_theta(&self, d: usize, alpha: f64) -> (f64, f64) {
        let c = self.doc_topic[d];
        let total = (c[0] + c[1]) as f64 + 2.0 * alpha;
        ((c[0] as f64 + alpha) / total, (c[1] as f64 + alpha) / total)
    }

    /// Per-word topic preference from the topic-word distributions.
    fn word_pair(&self, w: usize, beta: f64) -> (f64, f64) {
        let vbeta = self.vocab_size as f64 * beta;
        let phi = |k: usize| (self.word_topic[w][k] as f64 + beta) / (self.topic_total[k] as f64 + vbeta);
        let (a, b) = (phi(0), phi(1));
        (a / (a + b), b / (a + b))
    }

    #[cfg(test)]
    fn counts_consistent(&self) -> bool {
        let mut dt = vec![[0usize; 2]; self.docs.len()];
        let mut wt = vec![[0usize; 2]; self.vocab_size];
        for (d, topics) in self.topics.iter().enumerate() {
            for (n, &k) in topics.iter().enumerate() {
                dt[d][k] += 1;
                wt[self.docs[d][n]][k] += 1;
            }
        }
        dt == self.doc_topic
            && wt == self.word_topic
            && self.topic_total[0] + self.topic_total[1] == self.docs.iter().map(Vec::len).sum::<usize>()
    }
}

/// Fits the two-topic model. Token topics start as literal with
/// probability `seed_scores[d]`; the first half of the sweeps is burn-in
/// and the rest are averaged.
pub fn lda_estimate<S: AsRef<str>>(documents: &[Vec<S>], seed_scores: &[f64], config: &LdaConfig) -> Result<LdaEstimate> {
    if documents.is_empty() {
        return Err(Error::invalid("LDA needs a non-empty corpus"));
    }
    if seed_scores.len() != documents.len() {
        return Err(Error::invalid(format!(
            "{} seed scores for {} documents",
            seed_scores.len(),
            documents.len()
        )));
    }
    if config.iterations == 0 {
        return Err(Error::invalid("LDA needs at least one iteration"));
    }
    if seed_scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("seed scores must be finite"));
    }

    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut words: Vec<&str> = Vec::new();
    let docs: Vec<Vec<usize>> = documents
        .iter()
        .map(|doc| {
            doc.iter()
                .map(|w| {
                    let w = w.as_ref();
                    *ids.entry(w).or_insert_with(|| {
                        words.push(w);
                        words.len() - 1
                    })
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sampler = Sampler {
        topics: Vec::with_capacity(docs.len()),
        doc_topic: vec![[0; 2]; docs.len()],
        word_topic: vec![[0; 2]; words.len()],
        topic_total: [0; 2],
        vocab_size: words.len().max(1),
        docs,
    };
    for (d, doc) in sampler.docs.iter().enumerate() {
        let p_literal = seed_scores[d].clamp(0.0, 1.0);
        let topics: Vec<usize> = doc
            .iter()
            .map(|&w| {
                let k = if rng.gen::<f64>() < p_literal { LITERAL_TOPIC } else { FIGURATIVE_TOPIC };
                sampler.doc_topic[d][k] += 1;
                sampler.word_topic[w][k] += 1;
                sampler.topic_total[k] += 1;
                k
            })
            .collect();
        sampler.topics.push(topics);
    }

    let (alpha, beta) = (config.doc_prior, config.word_prior);
    let burn_in = config.iterations / 2;
    let mut doc_acc = vec![(0.0, 0.0); sampler.docs.len()];
    let mut word_acc = vec![(0.0, 0.0); words.len()];
    for it in 0..config.iterations {
        sampler.sweep(&mut rng, alpha, beta);
        #[cfg(test)]
        debug_assert!(sampler.counts_consistent());
        if it < burn_in {
            continue;
        }
        for (d, acc) in doc_acc.iter_mut().enumerate() {
            let (a, b) = sampler.doc_theta(d, alpha);
            acc.0 += a;
            acc.1 += b;
        }
        for (w, acc) in word_acc.iter_mut().enumerate() {
            let (a, b) = sampler.word_pair(w, beta);
            acc.0 += a;
            acc.1 += b;
        }
    }

    let normalize = |(a, b): (f64, f64)| (a / (a + b), b / (a + b));
    Ok(LdaEstimate {
        doc_dist: doc_acc.into_iter().map(normalize).collect(),
        word_dist: words
            .iter()
            .zip(word_acc)
            .map(|(w, acc)| (w.to_string(), normalize(acc)))
            .collect(),
    })
}
