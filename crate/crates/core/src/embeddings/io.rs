use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::Vocabulary;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    /// `count dim` header, then `word v1 .. vd`.
    Word2VecText,
    /// `word v1 .. vd`, no header.
    GloveText,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "word2vec_text" => Ok(TableFormat::Word2VecText),
            "glove_text" => Ok(TableFormat::GloveText),
            _ => Err(format!("unknown embedding format `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub format: TableFormat,
    /// Keep only words starting with this prefix, and strip it
    /// (e.g. `/c/en/` for Numberbatch).
    pub prefix: Option<String>,
}

impl LoadOptions {
    pub fn new(format: TableFormat) -> Self {
        LoadOptions { format, prefix: None }
    }

    pub fn with_prefix(mut self, prefix: impl Into<String>) -> Self {
        self.prefix = Some(prefix.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct LoadedTable<T> {
    pub table: EmbeddingTable<T>,
    /// Rows skipped because the word was already present.
    pub duplicates: usize,
}

pub fn parse_table<T: Scalar>(text: &str, opts: &LoadOptions) -> Result<LoadedTable<T>> {
    let mut lines = text.lines().enumerate().peekable();
    let mut dim: Option<usize> = None;
    if opts.format == TableFormat::Word2VecText {
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `count dim` header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let d = match fields.as_slice() {
            [_, d] => d.parse::<usize>().ok(),
            _ => None,
        };
        match d {
            Some(d) if d >= 1 => dim = Some(d),
            _ => return Err(Error::parse(1, "malformed `count dim` header")),
        }
    }

    let mut vocab = Vocabulary::new();
    let mut rows: Vec<T> = Vec::new();
    let mut duplicates = 0;
    for (n, line) in lines {
        let line_no = n + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        let d = *dim.get_or_insert(values.len());
        if d == 0 {
            return Err(Error::parse(line_no, "row has no vector components"));
        }
        if values.len() != d {
            return Err(Error::parse(line_no, format!("expected {d} dims, found {}", values.len())));
        }
        let word = match &opts.prefix {
            Some(p) => match word.strip_prefix(p.as_str()) {
                Some(w) if !w.is_empty() => w,
                _ => continue,
            },
            None => word,
        };
        let mut parsed = Vec::with_capacity(d);
        for v in values {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(line_no, format!("non-numeric value `{v}`")))?;
            if !x.is_finite() {
                return Err(Error::parse(line_no, format!("non-finite value `{v}`")));
            }
            parsed.push(T::of(x));
        }
        if vocab.contains(word) {
            duplicates += 1;
            continue;
        }
        vocab.insert(word);
        rows.extend(parsed);
    }
    let dim = dim.filter(|&d| d > 0).ok_or_else(|| Error::parse(1, "empty embedding file"))?;
    if duplicates > 0 {
        log::warn!("embedding table: skipped {duplicates} duplicate rows");
    }
    let mut matrix = vec![T::zero(); 2 * dim];
    matrix.extend(rows);
    Ok(LoadedTable {
        table: EmbeddingTable::new(vocab, matrix, dim)?,
        duplicates,
    })
}

pub fn load_table<T: Scalar>(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LoadedTable<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, opts).map_err(|e| e.in_file(path))
}

/// Writes non-reserved rows in glove_text format with 6 decimals.
pub fn write_table<T: Scalar, W: Write>(table: &EmbeddingTable<T>, mut out: W) -> Result<()> {
    for (id, word) in table.vocab().words().iter().enumerate().skip(2) {
        let mut line = word.clone();
        for x in table.row(id) {
            line.push_str(&format!(" {:.6}", x.as_f64()));
        }
        writeln!(out, "{line}").map_err(|e| Error::io("<table>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn glove() -> LoadOptions {
        LoadOptions::new(TableFormat::GloveText)
    }

    #[test]
    fn glove_text_loads() {
        let t: LoadedTable<f64> = parse_table("cat 1.0 0.0\ndog 0.0 1.0\n", &glove()).unwrap();
        assert_eq!(t.table.dim(), 2);
        assert_eq!(t.table.len(), 4);
        assert_eq!(t.table.vector("dog").unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn word2vec_header_is_equivalent() {
        let a: LoadedTable<f64> = parse_table("cat 1.0 0.0\ndog 0.0 1.0\n", &glove()).unwrap();
        let b: LoadedTable<f64> =
            parse_table("2 2\ncat 1.0 0.0\ndog 0.0 1.0\n", &LoadOptions::new(TableFormat::Word2VecText)).unwrap();
        assert_eq!(a.table, b.table);
    }

    #[test]
    fn dimension_mismatch_names_line() {
        let err = parse_table::<f64>("cat 1.0 0.0\ndog 0.0 1.0 2.0\n", &glove()).unwrap_err();
        assert_eq!(err.to_string(), "line 2: expected 2 dims, found 3");
        let err =
            parse_table::<f64>("2 2\ncat 1 0\ndog 1\n", &LoadOptions::new(TableFormat::Word2VecText)).unwrap_err();
        assert!(err.to_string().starts_with("line 3: expected 2 dims"));
    }

    #[test]
    fn non_numeric_field_errors() {
        let err = parse_table::<f64>("cat 1.0 x\n", &glove()).unwrap_err();
        assert!(err.to_string().contains("non-numeric"));
    }

    #[test]
    fn duplicates_keep_first() {
        let t: LoadedTable<f64> = parse_table("cat 1 0\ncat 5 5\n", &glove()).unwrap();
        assert_eq!(t.duplicates, 1);
        assert_eq!(t.table.vector("cat").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn prefix_filter_strips_language_tag() {
        let opts = glove().with_prefix("/c/en/");
        let t: LoadedTable<f64> = parse_table("/c/en/cough 1 0\n/c/fr/toux 0 1\n", &opts).unwrap();
        assert_eq!(t.table.len(), 3);
        assert!(t.table.vector("cough").is_some());
    }

    proptest! {
        #[test]
        fn write_then_load_round_trips(rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 1..10)) {
            let mut text = String::new();
            for (i, r) in rows.iter().enumerate() {
                text.push_str(&format!("w{i} {} {} {}\n", r[0], r[1], r[2]));
            }
            let t: LoadedTable<f64> = parse_table(&text, &glove()).unwrap();
            let mut buf = Vec::new();
            write_table(&t.table, &mut buf).unwrap();
            let back: LoadedTable<f64> = parse_table(std::str::from_utf8(&buf).unwrap(), &glove()).unwrap();
            for (a, b) in t.table.matrix().iter().zip(back.table.matrix()) {
                prop_assert!((a - b).abs() <= 5e-7);
            }
            let mut buf2 = Vec::new();
            write_table(&back.table, &mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
