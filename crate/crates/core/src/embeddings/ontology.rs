use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected word graph read from a lexicon file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OntologyGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl OntologyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, word: &str) {
        self.adjacency.entry(word.to_string()).or_default();
    }

    /// Adds `a`–`b`; self-loops are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str) {
        self.add_node(a);
        self.add_node(b);
        if a == b {
            return;
        }
        self.adjacency.get_mut(a).unwrap().insert(b.to_string());
        self.adjacency.get_mut(b).unwrap().insert(a.to_string());
    }

    pub fn neighbors(&self, word: &str) -> impl Iterator<Item = &str> {
        self.adjacency.get(word).into_iter().flatten().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.adjacency.contains_key(word)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }
}

/// Lexicon lines: `head neighbor1 neighbor2 ...`.
pub fn parse_ontology(text: &str) -> OntologyGraph {
    let mut graph = OntologyGraph::new();
    for line in text.lines() {
        let mut words = line.split_whitespace();
        let Some(head) = words.next() else { continue };
        graph.add_node(head);
        for w in words {
            graph.add_edge(head, w);
        }
    }
    graph
}

pub fn load_ontology(path: impl AsRef<Path>) -> Result<OntologyGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_ontology(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_links_to_each_neighbor() {
        let g = parse_ontology("cough hack whoop\n");
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors("hack").collect::<Vec<_>>(), ["cough"]);
        assert_eq!(g.neighbors("cough").collect::<Vec<_>>(), ["hack", "whoop"]);
    }

    #[test]
    fn duplicates_and_reverses_collapse() {
        assert_eq!(parse_ontology("a b b\n").edge_count(), 1);
        assert_eq!(parse_ontology("a b\nb a\n").edge_count(), 1);
    }

    #[test]
    fn blank_lines_singletons_and_self_loops() {
        let g = parse_ontology("\nlonely\nx x\nheart_attack stroke\n");
        assert!(g.contains("lonely"));
        assert_eq!(g.neighbors("lonely").count(), 0);
        assert_eq!(g.neighbors("x").count(), 0);
        assert!(g.contains("heart_attack"));
        assert_eq!(g.edge_count(), 1);
    }
}
