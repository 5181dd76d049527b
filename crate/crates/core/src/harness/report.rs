//! Report files. `report.tsv` is the machine-readable record of a run:
//!
//! ```text
//! # figphm-report-1
//! embedding   NAME   KIND
//! disease_embedding   NAME
//! metrics   APPROACH   EMBEDDING   SCOPE   P   R   F   TP   FP   FN   TN   FLAGS
//! average   APPROACH   P   R   F   DELTA_F
//! ```
//!
//! Fields are tab-separated and scores are written with full precision,
//! so parsing a report gives back the exact values.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::corpus::{Disease, Document};
use crate::error::{Error, Result};
use crate::figurative::{write_verdicts, FigurativeVerdict};
use crate::harness::{Approach, AverageRow, EmbeddingInfo, ExperimentReport, Metrics, MetricsRow, ALL_SCOPE};
use crate::phm::write_predictions;

pub const REPORT_HEADER: &str = "# figphm-report-1";
pub const REPORT_FILE: &str = "report.tsv";
pub const TABLES_FILE: &str = "tables.txt";

pub fn write_report<W: Write>(report: &ExperimentReport, mut out: W) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{REPORT_HEADER}").unwrap();
    for e in &report.embeddings {
        writeln!(s, "embedding\t{}\t{}", e.name, e.kind).unwrap();
    }
    writeln!(s, "disease_embedding\t{}", report.disease_embedding).unwrap();
    for r in &report.rows {
        let m = &r.metrics;
        writeln!(
            s,
            "metrics\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.approach.as_str(),
            r.embedding,
            r.scope,
            m.precision,
            m.recall,
            m.f_score,
            m.tp,
            m.fp,
            m.fn_,
            m.tn,
            m.flags()
        )
        .unwrap();
    }
    for a in &report.averages {
        writeln!(
            s,
            "average\t{}\t{}\t{}\t{}\t{}",
            a.approach.as_str(),
            a.precision,
            a.recall,
            a.f_score,
            a.delta_f
        )
        .unwrap();
    }
    out.write_all(s.as_bytes()).map_err(|e| Error::io("<report>", e))
}

/// Parses `report.tsv`. Predictions are not part of the file.
pub fn parse_report(text: &str) -> Result<ExperimentReport> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == REPORT_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header {REPORT_HEADER:?}"))),
    }
    let mut report = ExperimentReport::default();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let bad = |msg: &str| Error::parse(n, msg.to_string());
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")));
        let count = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad count {s:?}")));
        let approach = |s: &str| s.parse::<Approach>().map_err(|e| Error::parse(n, e.to_string()));
        match (f[0], f.len()) {
            ("embedding", 3) => report.embeddings.push(EmbeddingInfo {
                name: f[1].into(),
                kind: f[2].into(),
            }),
            ("disease_embedding", 2) => report.disease_embedding = f[1].into(),
            ("metrics", 12) => {
                let metrics = Metrics {
                    precision: num(f[4])?,
                    recall: num(f[5])?,
                    f_score: num(f[6])?,
                    tp: count(f[7])?,
                    fp: count(f[8])?,
                    fn_: count(f[9])?,
                    tn: count(f[10])?,
                };
                if metrics.flags() != f[11] {
                    return Err(bad("flags do not match counts"));
                }
                report.rows.push(MetricsRow {
                    approach: approach(f[1])?,
                    embedding: f[2].into(),
                    scope: f[3].into(),
                    metrics,
                });
            }
            ("average", 6) => report.averages.push(AverageRow {
                approach: approach(f[1])?,
                precision: num(f[2])?,
                recall: num(f[3])?,
                f_score: num(f[4])?,
                delta_f: num(f[5])?,
            }),
            _ => return Err(bad("unrecognized report line")),
        }
    }
    Ok(report)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report(&text).map_err(|e| e.in_file(path))
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn signed_pct(x: f64) -> String {
    format!("{:+.2}", 100.0 * x)
}

fn cell(m: &Metrics) -> String {
    let mark = if m.precision_undefined() || m.recall_undefined() { "*" } else { "" };
    format!("{} {} {}{}", pct(m.precision), pct(m.recall), pct(m.f_score), mark)
}

fn approaches(report: &ExperimentReport) -> Vec<Approach> {
    Approach::ALL
        .iter()
        .copied()
        .filter(|a| report.rows.iter().any(|r| r.approach == *a))
        .collect()
}

fn grid(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(header)).unwrap();
    writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")).unwrap();
    for r in rows {
        writeln!(out, "{}", line(r)).unwrap();
    }
}

fn embedding_table(out: &mut String, title: &str, report: &ExperimentReport, embeddings: &[&EmbeddingInfo]) {
    writeln!(out, "{title}").unwrap();
    if embeddings.is_empty() {
        writeln!(out, "(none)\n").unwrap();
        return;
    }
    let header: Vec<String> = std::iter::once("approach (P R F %)".to_string())
        .chain(embeddings.iter().map(|e| e.name.clone()))
        .collect();
    let rows: Vec<Vec<String>> = approaches(report)
        .into_iter()
        .map(|a| {
            std::iter::once(a.as_str().to_string())
                .chain(embeddings.iter().map(|e| report.row(a, &e.name, ALL_SCOPE).map_or("-".into(), cell)))
                .collect()
        })
        .collect();
    grid(out, &header, &rows);
    out.push('\n');
}

/// Human-readable tables: per-embedding scores (plain, then retrofitted),
/// averages with the F gain over PHMD, and per-disease F of PHMD against
/// +FeatAug.
pub fn render_tables(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let (retro, plain): (Vec<&EmbeddingInfo>, Vec<&EmbeddingInfo>) =
        report.embeddings.iter().partition(|e| e.kind == "retrofit");
    embedding_table(&mut out, "Scores by embedding", report, &plain);
    embedding_table(&mut out, "Scores by retrofitted embedding", report, &retro);

    writeln!(out, "Averages over embeddings").unwrap();
    let header: Vec<String> = ["approach", "P", "R", "F", "dF"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = report
        .averages
        .iter()
        .map(|a| {
            let delta = if a.approach == Approach::Phmd || a.delta_f.is_nan() {
                "-".into()
            } else {
                signed_pct(a.delta_f)
            };
            vec![a.approach.as_str().into(), pct(a.precision), pct(a.recall), pct(a.f_score), delta]
        })
        .collect();
    grid(&mut out, &header, &rows);
    out.push('\n');

    writeln!(out, "F by disease ({})", report.disease_embedding).unwrap();
    let shown: Vec<Approach> = approaches(report)
        .into_iter()
        .filter(|a| matches!(a, Approach::Phmd | Approach::FeatAug))
        .collect();
    let header: Vec<String> = std::iter::once("disease".to_string())
        .chain(shown.iter().map(|a| a.as_str().to_string()))
        .collect();
    let rows: Vec<Vec<String>> = Disease::ALL
        .iter()
        .filter(|d| report.rows.iter().any(|r| r.scope == d.as_str()))
        .map(|d| {
            std::iter::once(d.as_str().to_string())
                .chain(shown.iter().map(|&a| {
                    report
                        .row(a, &report.disease_embedding, d.as_str())
                        .map_or("-".into(), |m| pct(m.f_score))
                }))
                .collect()
        })
        .collect();
    grid(&mut out, &header, &rows);

    if report.rows.iter().any(|r| r.metrics.precision_undefined() || r.metrics.recall_undefined()) {
        out.push_str("\n* precision or recall undefined, reported as 0\n");
    }
    out
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes `report.tsv`, `tables.txt`, `verdicts.tsv` and one
/// `predictions/APPROACH_EMBEDDING.tsv` per prediction set.
pub fn write_outputs(
    report: &ExperimentReport,
    docs: &[Document],
    verdicts: &[FigurativeVerdict<f64>],
    out_dir: &Path,
) -> Result<()> {
    let pred_dir = out_dir.join("predictions");
    fs::create_dir_all(&pred_dir).map_err(|e| Error::io(&pred_dir, e))?;
    let path = out_dir.join(REPORT_FILE);
    write_report(report, create(&path)?).map_err(|e| e.in_file(&path))?;
    let path = out_dir.join(TABLES_FILE);
    fs::write(&path, render_tables(report)).map_err(|e| Error::io(&path, e))?;
    let path = out_dir.join("verdicts.tsv");
    write_verdicts(docs, verdicts, create(&path)?).map_err(|e| e.in_file(&path))?;
    for set in &report.predictions {
        let name = format!("{}_{}.tsv", set.approach.as_str().trim_start_matches('+').to_lowercase(), set.embedding);
        let path = pred_dir.join(name);
        write_predictions(&set.predictions, create(&path)?).map_err(|e| e.in_file(&path))?;
    }
    Ok(())
}
