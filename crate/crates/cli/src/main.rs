use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use figphm_core::corpus::{cohen_kappa, load_annotations, pad, Label};
use figphm_core::embeddings::{load_ontology, load_table, retrofit, write_table, BetaMode, LoadOptions, RetrofitConfig, TableFormat};
use figphm_core::figurative::{write_verdicts, LdaConfig};
use figphm_core::harness::{
    build_detector, compute_metrics, corpus_words, evaluate_figurative, figurative_verdicts, load_corpus, load_embedding,
    load_report, load_usage_gold, noisy_verdicts, derive_seed, render_tables, run_cross_validation, prepare_inputs,
    training_examples, write_outputs, Approach, ExperimentConfig, Metrics, REPORT_FILE,
};
use figphm_core::neuralnet::Checkpoint;
use figphm_core::phm::{
    build_model, feataug_predict, pipeline_predict, predict_phmd, train, write_predictions, Architecture, CnnModel, Prediction,
};
use figphm_core::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "figphm", version, about = "Personal health mention detection with figurative-usage features")]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (or file, for `retrofit`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for cross-validation.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    approach: Option<ApproachArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApproachArg {
    Phmd,
    Pipeline,
    Feataug,
    All,
}

impl ApproachArg {
    fn approaches(self) -> Vec<Approach> {
        match self {
            ApproachArg::Phmd => vec![Approach::Phmd],
            ApproachArg::Pipeline => vec![Approach::Pipeline],
            ApproachArg::Feataug => vec![Approach::FeatAug],
            ApproachArg::All => Approach::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Inter-annotator agreement of a two-annotator usage file.
    Kappa { annotations: PathBuf },
    /// Retrofit an embedding table to an ontology graph.
    Retrofit {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "glove_text")]
        format: String,
        #[arg(long)]
        prefix: Option<String>,
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Fixed neighbour weight; inverse degree when absent.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Literal usage scores and verdicts for the configured dataset.
    FigScore,
    /// Score the figurative detector against gold usage labels.
    FigEval { gold: PathBuf },
    /// Train one model on the whole dataset and save a checkpoint.
    Train {
        /// Embedding spec to initialize from (defaults to the disease-table one).
        #[arg(long)]
        embedding: Option<String>,
    },
    /// Predict the configured dataset with a saved checkpoint.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Full cross-validated sweep over all embedding specs.
    Experiment,
    /// Render the tables of a finished experiment.
    Report {
        /// A report.tsv file or the directory holding it.
        path: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data => 2,
                ErrorKind::Runtime => 3,
            })
        }
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| config_error("--config is required"))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(a) = cli.approach {
        config.approaches = a.approaches();
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    let dir = cli.out.as_deref().ok_or_else(|| config_error("--out is required"))?;
    fs::create_dir_all(dir).map_err(|e| config_error(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn print_metrics(name: &str, m: &Metrics) {
    println!(
        "{name}\tP={:.4}\tR={:.4}\tF={:.4}\tTP={}\tFP={}\tFN={}\tTN={}\t{}",
        m.precision,
        m.recall,
        m.f_score,
        m.tp,
        m.fp,
        m.fn_,
        m.tn,
        m.flags()
    );
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Kappa { annotations } => {
            let a = cohen_kappa(&load_annotations(annotations)?)?;
            println!("observed\t{:.6}\nchance\t{:.6}\nkappa\t{:.6}", a.observed, a.chance, a.kappa);
            Ok(())
        }
        Command::Retrofit {
            table,
            format,
            prefix,
            ontology,
            iterations,
            alpha,
            beta,
        } => {
            let format: TableFormat = format.parse().map_err(config_error)?;
            let mut opts = LoadOptions::new(format);
            if let Some(p) = prefix {
                opts = opts.with_prefix(p.clone());
            }
            let out = cli.out.as_deref().ok_or_else(|| config_error("--out is required"))?;
            let cfg = RetrofitConfig {
                iterations: *iterations,
                alpha: *alpha,
                beta_mode: beta.map_or(BetaMode::InverseDegree, BetaMode::Uniform),
            };
            let table = load_table::<f64>(table, &opts)?.table;
            let graph = load_ontology(ontology)?;
            let fitted = retrofit(&table, &graph, &cfg)?;
            write_table(&fitted, io::BufWriter::new(create(out)?))
        }
        Command::FigScore => {
            let config = load_config(&cli)?;
            let detector = build_detector(&config.figurative)?;
            let docs = load_corpus(&config, &detector.keywords())?;
            let verdicts = figurative_verdicts(&detector, &docs, &config.figurative, config.seed)?;
            match &cli.out {
                Some(_) => write_verdicts(&docs, &verdicts, create(&out_dir(&cli)?.join("verdicts.tsv"))?),
                None => write_verdicts(&docs, &verdicts, io::stdout().lock()),
            }
        }
        Command::FigEval { gold } => {
            let config = load_config(&cli)?;
            let detector = build_detector(&config.figurative)?;
            let examples = load_usage_gold(gold)?;
            if examples.is_empty() {
                return Err(Error::InvalidInput("gold file has no examples".into()));
            }
            let lda = LdaConfig {
                iterations: config.figurative.lda_iterations,
                seed: derive_seed(config.seed, "lda", 0),
                ..LdaConfig::default()
            };
            let eval = evaluate_figurative(&examples, &detector, config.figurative.use_lda.then_some(&lda))?;
            print_metrics("score-only", &eval.score_only);
            if let Some(m) = &eval.with_lda {
                print_metrics("score+lda", m);
            }
            Ok(())
        }
        Command::Train { embedding } => cmd_train(&cli, embedding.as_deref()),
        Command::Evaluate { checkpoint } => cmd_evaluate(&cli, checkpoint),
        Command::Experiment => {
            let config = load_config(&cli)?;
            let dir = out_dir(&cli)?;
            let (_, inputs) = prepare_inputs(&config)?;
            let report = run_cross_validation(&config, &inputs, cli.jobs)?;
            write_outputs(&report, &inputs.docs, &inputs.verdicts, dir)?;
            print!("{}", render_tables(&report));
            Ok(())
        }
        Command::Report { path } => {
            let path = match (path, &cli.out) {
                (Some(p), _) => p.clone(),
                (None, Some(dir)) => dir.clone(),
                (None, None) => return Err(config_error("give a report path or --out")),
            };
            let file = if path.is_dir() { path.join(REPORT_FILE) } else { path };
            let report = load_report(&file)?;
            let mut out = io::stdout().lock();
            out.write_all(render_tables(&report).as_bytes()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn single_approach(cli: &Cli, default: Approach) -> Result<Approach> {
    match cli.approach {
        None => Ok(default),
        Some(ApproachArg::All) => Err(config_error("this command takes a single --approach")),
        Some(a) => Ok(a.approaches()[0]),
    }
}

fn cmd_train(cli: &Cli, embedding: Option<&str>) -> Result<()> {
    let config = load_config(cli)?;
    let approach = single_approach(cli, Approach::Phmd)?;
    let (arch, model_cfg) = match approach {
        Approach::FeatAug => (Architecture::FeatAug, &config.feataug_model),
        _ => (Architecture::Phmd, &config.phmd_model),
    };
    let name = embedding.unwrap_or(config.disease_table_embedding());
    let spec = config
        .embeddings
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| config_error(format!("no embedding named `{name}`")))?;
    let detector = build_detector(&config.figurative)?;
    let docs = load_corpus(&config, &detector.keywords())?;
    let verdicts = figurative_verdicts(&detector, &docs, &config.figurative, config.seed)?;
    let table = load_embedding(spec, &corpus_words(&docs), config.seed)?;
    let vocab = figphm_core::corpus::Vocabulary::from_tokens(docs.iter().flat_map(|d| d.tokens.iter()));
    let seed = derive_seed(config.seed, name, u64::MAX - 1);
    let mut model = build_model(arch, &table, &vocab, model_cfg, seed)?;
    let all: Vec<usize> = (0..docs.len()).collect();
    let examples = training_examples(&docs, &verdicts, &all, &vocab, model_cfg.max_len, model_cfg.include_raw_score);
    let train_cfg = figphm_core::phm::TrainConfig {
        seed: seed.wrapping_add(1),
        ..config.train
    };
    let losses = train(&mut model, &examples, &train_cfg)?;
    for (epoch, loss) in losses.iter().enumerate() {
        println!("epoch {}\tloss {:.6}", epoch + 1, loss);
    }
    let dir = out_dir(cli)?;
    let file = dir.join(format!("{}.ckpt", approach.as_str().trim_start_matches('+').to_lowercase()));
    model.to_checkpoint().save(&file)?;
    println!("saved {}", file.display());
    Ok(())
}

fn cmd_evaluate(cli: &Cli, checkpoint: &Path) -> Result<()> {
    let config = load_config(cli)?;
    let model = CnnModel::<f64>::from_checkpoint(&Checkpoint::load(checkpoint)?)?;
    let default = match model.architecture() {
        Architecture::Phmd => Approach::Phmd,
        Architecture::FeatAug => Approach::FeatAug,
    };
    let approach = single_approach(cli, default)?;
    let needs = match approach {
        Approach::FeatAug => Architecture::FeatAug,
        _ => Architecture::Phmd,
    };
    if model.architecture() != needs {
        return Err(config_error(format!("{} needs a {:?} checkpoint", approach.as_str(), needs)));
    }
    let detector = build_detector(&config.figurative)?;
    let docs = load_corpus(&config, &detector.keywords())?;
    let verdicts = figurative_verdicts(&detector, &docs, &config.figurative, config.seed)?;
    let routed = match approach {
        Approach::Pipeline => noisy_verdicts(
            &verdicts,
            config.figurative.pipeline_flip_rate,
            derive_seed(config.seed, "pipeline-noise", 0),
        ),
        _ => verdicts.clone(),
    };
    let max_len = model.config().max_len;
    let preds: Vec<Prediction> = docs
        .iter()
        .zip(&routed)
        .map(|(d, v)| {
            let seq = pad(&d.tokens, model.vocab(), max_len);
            match approach {
                Approach::Phmd => predict_phmd(&model, &d.id, &seq),
                Approach::Pipeline => pipeline_predict(&d.id, v, &model, &seq),
                Approach::FeatAug => feataug_predict(&model, &d.id, &seq, v),
            }
        })
        .collect::<Result<_>>()?;
    let labels: Vec<Label> = preds.iter().map(|p| p.label).collect();
    let golds: Vec<Label> = docs.iter().map(|d| d.label).collect();
    print_metrics(approach.as_str(), &compute_metrics(&labels, &golds, Label::Phm)?);
    if cli.out.is_some() {
        write_predictions(&preds, create(&out_dir(cli)?.join("predictions.tsv"))?)?;
    }
    Ok(())
}
