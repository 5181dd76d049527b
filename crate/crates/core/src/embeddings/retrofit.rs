//! Retrofitting: pull each vector toward its ontology neighbors while
//! keeping it close to its original value.
//!
//! One sweep visits rows in ascending index order and sets
//! `q_i = (alpha * q̂_i + Σ_j beta_ij * q_j) / (alpha + Σ_j beta_ij)`
//! in place (Gauss–Seidel), where `j` ranges over in-vocabulary
//! neighbors of `i`.

use crate::corpus::Vocabulary;
use crate::embeddings::{EmbeddingTable, OntologyGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    /// beta_ij = 1 / |N(i)|.
    InverseDegree,
    /// beta_ij = constant.
    Uniform(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrofitConfig {
    pub iterations: usize,
    pub alpha: f64,
    pub beta_mode: BetaMode,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            iterations: 10,
            alpha: 1.0,
            beta_mode: BetaMode::InverseDegree,
        }
    }
}

struct Neighborhoods {
    /// In-vocabulary neighbor ids per row, ascending.
    ids: Vec<Vec<usize>>,
}

impl Neighborhoods {
    fn new<T: Scalar>(table: &EmbeddingTable<T>, graph: &OntologyGraph) -> Self {
        let vocab = table.vocab();
        let ids = vocab
            .words()
            .iter()
            .enumerate()
            .map(|(id, word)| {
                if Vocabulary::is_reserved(id) {
                    return Vec::new();
                }
                let mut n: Vec<usize> = graph
                    .neighbors(word)
                    .filter_map(|w| vocab.get(w))
                    .filter(|&j| !Vocabulary::is_reserved(j) && j != id)
                    .collect();
                n.sort_unstable();
                n.dedup();
                n
            })
            .collect();
        Neighborhoods { ids }
    }

    fn beta(&self, i: usize, mode: BetaMode) -> f64 {
        match mode {
            BetaMode::InverseDegree => 1.0 / self.ids[i].len() as f64,
            BetaMode::Uniform(b) => b,
        }
    }

    /// Row weight that makes `weight_i * beta_ij` symmetric.
    fn weight(&self, i: usize, mode: BetaMode) -> f64 {
        match mode {
            BetaMode::InverseDegree => self.ids[i].len() as f64,
            BetaMode::Uniform(_) => 1.0,
        }
    }
}

fn validate(cfg: &RetrofitConfig) -> Result<()> {
    if !(cfg.alpha > 0.0) || !cfg.alpha.is_finite() {
        return Err(Error::invalid("retrofit alpha must be positive"));
    }
    if let BetaMode::Uniform(b) = cfg.beta_mode {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid("retrofit beta must be positive"));
        }
    }
    Ok(())
}

fn sweep<T: Scalar>(current: &mut EmbeddingTable<T>, original: &EmbeddingTable<T>, hoods: &Neighborhoods, cfg: &RetrofitConfig) {
    let dim = current.dim();
    let alpha = T::of(cfg.alpha);
    let mut acc = vec![T::zero(); dim];
    for i in 0..hoods.ids.len() {
        let nbrs = &hoods.ids[i];
        if nbrs.is_empty() {
            continue;
        }
        let beta = T::of(hoods.beta(i, cfg.beta_mode));
        for (a, &x) in acc.iter_mut().zip(original.row(i)) {
            *a = alpha * x;
        }
        for &j in nbrs {
            for (a, &x) in acc.iter_mut().zip(current.row(j)) {
                *a += beta * x;
            }
        }
        let denom = alpha + beta * T::of(nbrs.len() as f64);
        for (q, &a) in current.row_mut(i).iter_mut().zip(&acc) {
            *q = a / denom;
        }
    }
}

/// Returns a retrofitted copy; `table` is left untouched. Words without
/// in-vocabulary neighbors keep their vectors.
pub fn retrofit<T: Scalar>(table: &EmbeddingTable<T>, graph: &OntologyGraph, cfg: &RetrofitConfig) -> Result<EmbeddingTable<T>> {
    validate(cfg)?;
    let hoods = Neighborhoods::new(table, graph);
    let mut current = table.clone();
    for _ in 0..cfg.iterations {
        sweep(&mut current, table, &hoods, cfg);
    }
    Ok(current)
}

/// Like [`retrofit`], also returning the objective before the first
/// sweep and after each one.
pub fn retrofit_traced<T: Scalar>(
    table: &EmbeddingTable<T>,
    graph: &OntologyGraph,
    cfg: &RetrofitConfig,
) -> Result<(EmbeddingTable<T>, Vec<f64>)> {
    validate(cfg)?;
    let hoods = Neighborhoods::new(table, graph);
    let mut current = table.clone();
    let mut trace = vec![objective(&current, table, &hoods, cfg)];
    for _ in 0..cfg.iterations {
        sweep(&mut current, table, &hoods, cfg);
        trace.push(objective(&current, table, &hoods, cfg));
    }
    Ok((current, trace))
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y).as_f64().powi(2)).sum()
}

fn objective<T: Scalar>(current: &EmbeddingTable<T>, original: &EmbeddingTable<T>, hoods: &Neighborhoods, cfg: &RetrofitConfig) -> f64 {
    let mut total = 0.0;
    for (i, nbrs) in hoods.ids.iter().enumerate() {
        if nbrs.is_empty() {
            continue;
        }
        let w = hoods.weight(i, cfg.beta_mode);
        total += w * cfg.alpha * sq_dist(current.row(i), original.row(i));
        let beta = hoods.beta(i, cfg.beta_mode);
        for &j in nbrs.iter().filter(|&&j| j > i) {
            total += w * beta * sq_dist(current.row(i), current.row(j));
        }
    }
    total
}

/// Objective minimized coordinate-wise by each row update:
/// `Σ_i w_i alpha ‖q_i − q̂_i‖² + Σ_{i<j, edge} w_i beta_ij ‖q_i − q_j‖²`,
/// with `w_i = |N(i)|` under inverse-degree weighting (so `w_i beta_ij`
/// is symmetric) and `w_i = 1` under uniform weighting.
pub fn retrofit_objective<T: Scalar>(
    current: &EmbeddingTable<T>,
    original: &EmbeddingTable<T>,
    graph: &OntologyGraph,
    cfg: &RetrofitConfig,
) -> f64 {
    let hoods = Neighborhoods::new(original, graph);
    objective(current, original, &hoods, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::parse_ontology;

    fn chain_table() -> EmbeddingTable<f64> {
        let vocab = Vocabulary::from_tokens(["a", "b", "c"].iter());
        EmbeddingTable::new(vocab, vec![0.0, 0.5, 1.0, 3.0, -2.0], 1).unwrap()
    }

    #[test]
    fn empty_graph_is_identity() {
        let t = chain_table();
        let out = retrofit(&t, &OntologyGraph::new(), &RetrofitConfig::default()).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let t = chain_table();
        let cfg = RetrofitConfig {
            iterations: 0,
            ..Default::default()
        };
        assert_eq!(retrofit(&t, &parse_ontology("a b\n"), &cfg).unwrap(), t);
    }

    #[test]
    fn two_node_chain_matches_direct_solve() {
        // 2 q_a - q_b = 1, 2 q_b - q_a = 3  =>  q_a = 5/3, q_b = 7/3
        let t = chain_table();
        let cfg = RetrofitConfig {
            iterations: 100,
            alpha: 1.0,
            beta_mode: BetaMode::Uniform(1.0),
        };
        let out = retrofit(&t, &parse_ontology("a b\n"), &cfg).unwrap();
        assert!((out.vector("a").unwrap()[0] - 5.0 / 3.0).abs() < 1e-6);
        assert!((out.vector("b").unwrap()[0] - 7.0 / 3.0).abs() < 1e-6);
        assert_eq!(out.vector("c").unwrap(), &[-2.0]);
        assert_eq!(t.vector("a").unwrap(), &[1.0], "input must not be mutated");
    }

    #[test]
    fn out_of_vocabulary_neighbors_are_ignored() {
        let t = chain_table();
        let out = retrofit(&t, &parse_ontology("c ghost phantom\n"), &RetrofitConfig::default()).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn objective_does_not_increase() {
        let vocab = Vocabulary::from_tokens(["a", "b", "c", "d"].iter());
        let m = vec![0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.3, 2.0, -4.0, 0.5, 2.5, 1.5];
        let t = EmbeddingTable::new(vocab, m, 2).unwrap();
        let g = parse_ontology("a b c d\nb c\n");
        let cfg = RetrofitConfig {
            iterations: 20,
            ..Default::default()
        };
        let (out, trace) = retrofit_traced(&t, &g, &cfg).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{trace:?}");
        }
        assert!((retrofit_objective(&out, &t, &g, &cfg) - trace[20]).abs() < 1e-12);
    }

    #[test]
    fn bad_alpha_is_rejected() {
        let cfg = RetrofitConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(retrofit(&chain_table(), &OntologyGraph::new(), &cfg).is_err());
    }
}
