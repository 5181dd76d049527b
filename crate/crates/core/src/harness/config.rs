//! Experiment configuration: `key = value` lines grouped in `[sections]`.
//!
//! ```text
//! [experiment]
//! dataset = phm.tsv
//! folds = 10
//! seed = 13
//!
//! [figurative]
//! table = sentiment_w2v.txt
//! table_format = word2vec_text
//!
//! [model]
//! epochs = 35
//!
//! [embedding.random]
//! source = random
//! dim = 50
//!
//! [embedding.glove_wordnet]
//! source = retrofit
//! path = glove.txt
//! ontology = wordnet.txt
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::embeddings::{BetaMode, LoadOptions, RetrofitConfig, TableFormat};
use crate::error::{Error, Result};
use crate::figurative::{FigurativeConfig, LdaConfig, DEFAULT_K, DEFAULT_THRESHOLD};
use crate::neuralnet::AdamConfig;
use crate::phm::{DropoutLayout, ModelConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Approach {
    Phmd,
    Pipeline,
    FeatAug,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Phmd, Approach::Pipeline, Approach::FeatAug];

    /// Name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Phmd => "PHMD",
            Approach::Pipeline => "+Pipeline",
            Approach::FeatAug => "+FeatAug",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().trim_start_matches('+') {
            "phmd" => Ok(Approach::Phmd),
            "pipeline" => Ok(Approach::Pipeline),
            "feataug" => Ok(Approach::FeatAug),
            other => Err(format!("unknown approach `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSource {
    Random {
        dim: usize,
    },
    File {
        path: PathBuf,
        options: LoadOptions,
    },
    Retrofit {
        path: PathBuf,
        options: LoadOptions,
        ontology: PathBuf,
        retrofit: RetrofitConfig,
    },
}

impl EmbeddingSource {
    pub fn kind(&self) -> &'static str {
        match self {
            EmbeddingSource::Random { .. } => "random",
            EmbeddingSource::File { .. } => "file",
            EmbeddingSource::Retrofit { .. } => "retrofit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpec {
    pub name: String,
    pub source: EmbeddingSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurativeSettings {
    pub table: PathBuf,
    pub table_options: LoadOptions,
    /// Symptom keyword list; the bundled list when absent.
    pub keywords: Option<PathBuf>,
    /// Health lexicon; the bundled lexicon when absent.
    pub health_lexicon: Option<PathBuf>,
    pub detector: FigurativeConfig,
    pub use_lda: bool,
    pub lda_iterations: usize,
    /// Probability of flipping each verdict seen by +Pipeline.
    pub pipeline_flip_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub folds: usize,
    pub seed: u64,
    pub approaches: Vec<Approach>,
    /// Embedding whose per-disease scores fill the disease table.
    pub disease_embedding: Option<String>,
    pub figurative: FigurativeSettings,
    pub phmd_model: ModelConfig,
    pub feataug_model: ModelConfig,
    pub train: TrainConfig,
    pub embeddings: Vec<EmbeddingSpec>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut embedding_order = Vec::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::Config(format!("key `{k}` outside any section")));
                }
                continue;
            };
            if sections.contains_key(name) {
                return Err(Error::Config(format!("section [{name}] appears twice")));
            }
            if name.starts_with("embedding.") {
                embedding_order.push(name.to_string());
            } else if !["experiment", "figurative", "model"].contains(&name) {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
            let mut sec = Section::new(name);
            for (k, v) in props.iter() {
                if sec.values.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(Error::Config(format!("[{name}] sets `{k}` twice")));
                }
            }
            sections.insert(name.to_string(), sec);
        }
        let resolve = |p: String| -> PathBuf {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };

        let mut exp = sections.remove("experiment").ok_or_else(|| Error::Config("missing [experiment] section".into()))?;
        let dataset = resolve(exp.required("dataset")?);
        let folds = exp.parse_or("folds", 10usize)?;
        let seed = exp.parse_or("seed", 0u64)?;
        let approaches = match exp.take("approaches") {
            Some(list) => parse_list::<Approach>(&list).map_err(|e| Error::Config(format!("[experiment] approaches: {e}")))?,
            None => Approach::ALL.to_vec(),
        };
        let disease_embedding = exp.take("disease_embedding");
        exp.finish()?;

        let mut fig = sections.remove("figurative").ok_or_else(|| Error::Config("missing [figurative] section".into()))?;
        let table = resolve(fig.required("table")?);
        let table_options = load_options(&mut fig, "table_format", "table_prefix")?;
        let keywords = fig.take("keywords").map(&resolve);
        let health_lexicon = fig.take("health_lexicon").map(&resolve);
        let detector = FigurativeConfig {
            k: fig.parse_or("k", DEFAULT_K)?,
            threshold: fig.parse_or("threshold", DEFAULT_THRESHOLD)?,
            include_keyword: fig.parse_or("include_keyword", false)?,
        };
        let use_lda = fig.parse_or("use_lda", false)?;
        let lda_iterations = fig.parse_or("lda_iterations", LdaConfig::default().iterations)?;
        let pipeline_flip_rate = fig.parse_or("pipeline_flip_rate", 0.0f64)?;
        fig.finish()?;

        let mut model = sections.remove("model").unwrap_or_else(|| Section::new("model"));
        let mut phmd_model = ModelConfig::phmd();
        {
            let m = &mut phmd_model;
            m.max_len = model.parse_or("max_len", m.max_len)?;
            m.filters = model.parse_or("filters", m.filters)?;
            if let Some(k) = model.take("kernels") {
                m.kernels = parse_list(&k).map_err(|e| Error::Config(format!("[model] kernels: {e}")))?;
            }
            m.pool = model.parse_or("pool", m.pool)?;
            m.feature_kernel = model.parse_or("feature_kernel", m.feature_kernel)?;
            m.include_raw_score = model.parse_or("include_raw_score", m.include_raw_score)?;
            m.train_embeddings = model.parse_or("train_embeddings", m.train_embeddings)?;
            m.init_range = model.parse_or("init_range", m.init_range)?;
            if let Some(l) = model.take("dropout_layout") {
                m.layout = match l.as_str() {
                    "positional" => DropoutLayout::Positional,
                    "stacked" => DropoutLayout::Stacked,
                    other => return Err(Error::Config(format!("[model] dropout_layout: unknown layout `{other}`"))),
                };
            }
        }
        let mut feataug_model = ModelConfig {
            dropout: ModelConfig::feataug().dropout,
            ..phmd_model.clone()
        };
        if let Some(d) = model.take("phmd_dropout") {
            phmd_model.dropout = parse_list(&d).map_err(|e| Error::Config(format!("[model] phmd_dropout: {e}")))?;
        }
        if let Some(d) = model.take("feataug_dropout") {
            feataug_model.dropout = parse_list(&d).map_err(|e| Error::Config(format!("[model] feataug_dropout: {e}")))?;
        }
        let defaults = TrainConfig::default();
        let train = TrainConfig {
            epochs: model.parse_or("epochs", defaults.epochs)?,
            batch_size: model.parse_or("batch_size", defaults.batch_size)?,
            adam: AdamConfig {
                lr: model.parse_or("learning_rate", defaults.adam.lr)?,
                ..AdamConfig::default()
            },
            seed,
        };
        model.finish()?;

        let mut embeddings = Vec::new();
        for section in embedding_order {
            let mut sec = sections.remove(&section).expect("collected above");
            let name = section["embedding.".len()..].to_string();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Config(format!("bad embedding name in [{section}]")));
            }
            let source = match sec.required("source")?.as_str() {
                "random" => EmbeddingSource::Random {
                    dim: sec.parse_or("dim", 50usize)?,
                },
                "file" => EmbeddingSource::File {
                    path: resolve(sec.required("path")?),
                    options: load_options(&mut sec, "format", "prefix")?,
                },
                "retrofit" => {
                    let path = resolve(sec.required("path")?);
                    let options = load_options(&mut sec, "format", "prefix")?;
                    let ontology = resolve(sec.required("ontology")?);
                    let d = RetrofitConfig::default();
                    let beta_mode = match sec.take("beta") {
                        None => d.beta_mode,
                        Some(b) if b == "inverse_degree" => BetaMode::InverseDegree,
                        Some(b) => BetaMode::Uniform(
                            b.parse()
                                .map_err(|_| Error::Config(format!("[{section}] beta: expected inverse_degree or a number")))?,
                        ),
                    };
                    EmbeddingSource::Retrofit {
                        path,
                        options,
                        ontology,
                        retrofit: RetrofitConfig {
                            iterations: sec.parse_or("iterations", d.iterations)?,
                            alpha: sec.parse_or("alpha", d.alpha)?,
                            beta_mode,
                        },
                    }
                }
                other => return Err(Error::Config(format!("[{section}] unknown source `{other}`"))),
            };
            sec.finish()?;
            embeddings.push(EmbeddingSpec { name, source });
        }

        let config = ExperimentConfig {
            dataset,
            folds,
            seed,
            approaches,
            disease_embedding,
            figurative: FigurativeSettings {
                table,
                table_options,
                keywords,
                health_lexicon,
                detector,
                use_lda,
                lda_iterations,
                pipeline_flip_rate,
            },
            phmd_model,
            feataug_model,
            train,
            embeddings,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks value ranges and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.folds < 2 {
            return fail(format!("folds must be at least 2, got {}", self.folds));
        }
        let t = self.figurative.detector.threshold;
        if !(t > 0.0 && t < 1.0) {
            return fail(format!("threshold {t} outside (0, 1)"));
        }
        if self.figurative.detector.k == 0 {
            return fail("k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.figurative.pipeline_flip_rate) {
            return fail("pipeline_flip_rate outside [0, 1]".into());
        }
        if self.figurative.lda_iterations == 0 {
            return fail("lda_iterations must be at least 1".into());
        }
        if self.train.epochs == 0 || self.train.batch_size == 0 {
            return fail("epochs and batch_size must be at least 1".into());
        }
        if !(self.train.adam.lr > 0.0) {
            return fail("learning_rate must be positive".into());
        }
        for m in [&self.phmd_model, &self.feataug_model] {
            if m.dropout.len() != m.kernels.len() {
                return fail(format!("{} dropout rates for {} kernels", m.dropout.len(), m.kernels.len()));
            }
            if m.dropout.iter().any(|r| !(0.0..1.0).contains(r)) {
                return fail("dropout rates must lie in [0, 1)".into());
            }
            let largest = m.kernels.iter().copied().max().unwrap_or(0);
            if m.max_len < largest {
                return fail(format!("max_len {} is shorter than the largest kernel {largest}", m.max_len));
            }
        }
        if self.approaches.is_empty() {
            return fail("no approaches selected".into());
        }
        if self.embeddings.is_empty() {
            return fail("no [embedding.NAME] sections".into());
        }
        let mut names = HashSet::new();
        for e in &self.embeddings {
            if !names.insert(e.name.as_str()) {
                return fail(format!("embedding `{}` defined twice", e.name));
            }
            match &e.source {
                EmbeddingSource::Random { dim } if *dim == 0 => return fail(format!("embedding `{}`: dim must be positive", e.name)),
                EmbeddingSource::Retrofit { retrofit, .. } if !(retrofit.alpha > 0.0) => {
                    return fail(format!("embedding `{}`: alpha must be positive", e.name))
                }
                _ => {}
            }
        }
        if let Some(d) = &self.disease_embedding {
            if !names.contains(d.as_str()) {
                return fail(format!("disease_embedding `{d}` is not a configured embedding"));
            }
        }
        for path in self.referenced_files() {
            if !path.is_file() {
                return fail(format!("file not found: {}", path.display()));
            }
        }
        Ok(())
    }

    pub fn referenced_files(&self) -> Vec<&Path> {
        let mut files = vec![self.dataset.as_path(), self.figurative.table.as_path()];
        files.extend(self.figurative.keywords.as_deref());
        files.extend(self.figurative.health_lexicon.as_deref());
        for e in &self.embeddings {
            match &e.source {
                EmbeddingSource::Random { .. } => {}
                EmbeddingSource::File { path, .. } => files.push(path),
                EmbeddingSource::Retrofit { path, ontology, .. } => {
                    files.push(path);
                    files.push(ontology);
                }
            }
        }
        files
    }

    /// Embedding used for the per-disease table: the configured one, else
    /// the first pre-trained one, else the first.
    pub fn disease_table_embedding(&self) -> &str {
        self.disease_embedding
            .as_deref()
            .or_else(|| {
                self.embeddings
                    .iter()
                    .find(|e| matches!(e.source, EmbeddingSource::File { .. }))
                    .map(|e| e.name.as_str())
            })
            .unwrap_or(&self.embeddings[0].name)
    }
}

struct Section {
    name: String,
    values: BTreeMap<String, String>,
}

impl Section {
    fn new(name: &str) -> Self {
        Section {
            name: name.to_string(),
            values: BTreeMap::new(),
        }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Config(format!("[{}] missing `{key}`", self.name)))
    }

    fn parse_or<V: FromStr>(&mut self, key: &str, default: V) -> Result<V> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("[{}] {key}: cannot parse `{v}`", self.name))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => Err(Error::Config(format!("[{}] unknown key `{k}`", self.name))),
            None => Ok(()),
        }
    }
}

fn load_options(sec: &mut Section, format_key: &str, prefix_key: &str) -> Result<LoadOptions> {
    let format = match sec.take(format_key) {
        Some(f) => f
            .parse::<TableFormat>()
            .map_err(|e| Error::Config(format!("[{}] {format_key}: {e}", sec.name)))?,
        None => TableFormat::GloveText,
    };
    let opts = LoadOptions::new(format);
    Ok(match sec.take(prefix_key).filter(|p| !p.is_empty()) {
        Some(p) => opts.with_prefix(p),
        None => opts,
    })
}

fn parse_list<V: FromStr>(s: &str) -> std::result::Result<Vec<V>, String>
where
    V::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<V>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn fixture() -> (tempfile::TempDir, String) {
        let dir = tempfile::tempdir().unwrap();
        for f in ["data.tsv", "sim.txt", "glove.txt", "mesh.txt"] {
            fs::write(dir.path().join(f), "").unwrap();
        }
        let text = "\
[experiment]
dataset = data.tsv
folds = 5
seed = 9

[figurative]
table = sim.txt
table_format = word2vec_text
threshold = 0.25
use_lda = true

[model]
epochs = 3
kernels = 2, 3
phmd_dropout = 0.1, 0.2
feataug_dropout = 0.0, 0.4
max_len = 12

[embedding.random]
source = random
dim = 8

[embedding.glove]
source = file
path = glove.txt
prefix = /c/en/

[embedding.glove_mesh]
source = retrofit
path = glove.txt
ontology = mesh.txt
iterations = 4
"
        .to_string();
        (dir, text)
    }

    #[test]
    fn parses_full_config() {
        let (dir, text) = fixture();
        let c = ExperimentConfig::parse(&text, dir.path()).unwrap();
        assert_eq!(c.folds, 5);
        assert_eq!(c.seed, 9);
        assert_eq!(c.train.seed, 9);
        assert_eq!(c.train.epochs, 3);
        assert_eq!(c.train.batch_size, 128);
        assert_eq!(c.dataset, dir.path().join("data.tsv"));
        assert_eq!(c.figurative.table_options.format, TableFormat::Word2VecText);
        assert_eq!(c.figurative.detector.threshold, 0.25);
        assert!(c.figurative.use_lda);
        assert_eq!(c.phmd_model.kernels, vec![2, 3]);
        assert_eq!(c.phmd_model.dropout, vec![0.1, 0.2]);
        assert_eq!(c.feataug_model.dropout, vec![0.0, 0.4]);
        assert_eq!(c.feataug_model.max_len, 12);
        assert_eq!(c.embeddings.len(), 3);
        assert_eq!(c.embeddings[0].name, "random");
        assert_eq!(c.embeddings[1].source.kind(), "file");
        assert_eq!(c.disease_table_embedding(), "glove");
        match &c.embeddings[2].source {
            EmbeddingSource::Retrofit { retrofit, .. } => assert_eq!(retrofit.iterations, 4),
            other => panic!("{other:?}"),
        }
        assert_eq!(c.approaches, Approach::ALL.to_vec());
    }

    #[test]
    fn defaults_follow_the_model_description() {
        let (dir, _) = fixture();
        let text = "[experiment]\ndataset = data.tsv\n[figurative]\ntable = sim.txt\n[embedding.r]\nsource = random\n";
        let c = ExperimentConfig::parse(text, dir.path()).unwrap();
        assert_eq!(c.folds, 10);
        assert_eq!(c.figurative.detector.threshold, 0.2);
        assert_eq!(c.figurative.detector.k, 10);
        assert!(!c.figurative.use_lda);
        assert_eq!(c.phmd_model.dropout, vec![0.2, 0.3, 0.5]);
        assert_eq!(c.feataug_model.dropout, vec![0.3, 0.1, 0.3]);
        assert_eq!((c.train.epochs, c.train.batch_size), (35, 128));
    }

    #[test]
    fn rejects_bad_configs() {
        let (dir, text) = fixture();
        let cases = [
            text.replace("folds = 5", "folds = 1"),
            text.replace("threshold = 0.25", "threshold = 1.5"),
            text.replace("epochs = 3", "epochs = 3\nepoch = 4"),
            text.replace("path = glove.txt\nprefix", "path = missing.txt\nprefix"),
            text.replace("source = random", "source = magic"),
            text.replace("[model]", "[modle]"),
            text.replace("phmd_dropout = 0.1, 0.2", "phmd_dropout = 0.1"),
            format!("stray = 1\n{text}"),
        ];
        for bad in cases {
            let err = ExperimentConfig::parse(&bad, dir.path()).unwrap_err();
            assert_eq!(err.kind(), crate::ErrorKind::Config, "{err}");
        }
    }

    #[test]
    fn approach_names() {
        assert_eq!("pipeline".parse::<Approach>().unwrap(), Approach::Pipeline);
        assert_eq!("+FeatAug".parse::<Approach>().unwrap(), Approach::FeatAug);
        assert!("all".parse::<Approach>().is_err());
        assert_eq!(Approach::Phmd.to_string(), "PHMD");
    }
}
