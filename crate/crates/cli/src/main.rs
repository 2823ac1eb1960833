use std::collections::BTreeSet;
use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glossa::corpus::{
    corpus_stats, load_corpus_dir, load_parallel_dir, parallel_stats, Corpus, NormalizeConfig, ParallelCorpus, Sentence,
    TagMode, TagsetMapping,
};
use glossa::crf::{train_crf, CrfConfig};
use glossa::dict::TagDictionary;
use glossa::harness::{
    cross_validate, raw_text, run_active_learning, run_grid, ActiveLearner, AlConfig, Annotator, Augment,
    DataCondition, GridData, HarnessConfig, OracleAnnotator, PassThroughAnnotator, Resources, TaggerKind, TaggerSpec,
    TrainedTagger,
};
use glossa::metrics::token_accuracy;
use glossa::neural::{train_neural, NeuralConfig};
use glossa::projection::{project_corpus, ProjectionConfig, ProjectionMode};
use glossa::semisup::{train_gdb, GdbConfig};
use glossa_service::ServiceConfig;

type Res<T = ()> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "glossa", version, about = "POS tagging for a low-resource language")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect a corpus directory.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Train one tagger and optionally score it.
    #[command(subcommand)]
    Train(TrainCmd),
    /// Project a type-level tag dictionary from parallel text.
    Project(ProjectArgs),
    /// Score taggers under several data conditions.
    Grid(GridArgs),
    /// Run the active-learning loop with a scripted annotator.
    Al(AlArgs),
    /// Leave-one-narrative-out cross-validation.
    Cv(CvArgs),
    /// Run the annotation HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct CorpusArgs {
    dir: PathBuf,
    /// Read `<id>.grk`/`<id>.ita` pairs.
    #[arg(long)]
    parallel: bool,
    /// Italian tagset mapping for `.ita.tag` files.
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Story, sentence, type and token counts.
    Stats {
        #[command(flatten)]
        c: CorpusArgs,
        #[arg(long)]
        json: bool,
    },
    /// Reports structural problems; exits non-zero when any are found.
    Validate {
        #[command(flatten)]
        c: CorpusArgs,
    },
}

#[derive(Args)]
struct TrainData {
    /// Tagged training narratives.
    #[arg(long)]
    train: PathBuf,
    /// Gold narratives to score on.
    #[arg(long)]
    test: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TrainCmd {
    /// Linear-chain CRF trained with L-BFGS.
    Crf {
        #[command(flatten)]
        data: TrainData,
        /// Use the basic feature template.
        #[arg(long)]
        basic: bool,
        #[arg(long, default_value_t = 0.1)]
        l2: f64,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        /// Extra supervision dictionary (TSV).
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Write the model here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BiLSTM tagger with dev-set early stopping.
    Neural {
        #[command(flatten)]
        data: TrainData,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 40)]
        dev_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dictionary expansion by label propagation plus a constrained HMM.
    Gdb {
        #[command(flatten)]
        data: TrainData,
        /// Raw narratives for the similarity graph.
        #[arg(long)]
        mono: PathBuf,
        /// Extra seed dictionary (TSV).
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Write the expanded dictionary here (TSV).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    parallel: PathBuf,
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Comma-separated narrative ids treated as test side.
    #[arg(long, value_delimiter = ',')]
    test_ids: Vec<String>,
    /// Also align the test side.
    #[arg(long)]
    transductive: bool,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    /// Write the dictionary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    mono: PathBuf,
    #[arg(long)]
    parallel: Option<PathBuf>,
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "majority,crf,crf-mod,neural,gdb")]
    taggers: Vec<String>,
    /// base, clp or clpa, each optionally suffixed with +mono-test.
    #[arg(long, value_delimiter = ',', default_value = "base")]
    conditions: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnnotatorKind {
    Oracle,
    PassThrough,
}

#[derive(Args)]
struct AlArgs {
    /// Tagged starting pool.
    #[arg(long)]
    base: PathBuf,
    /// Narratives to annotate, with gold tags for the oracle.
    #[arg(long)]
    queue: PathBuf,
    #[arg(long)]
    mono: PathBuf,
    #[arg(long)]
    parallel: Option<PathBuf>,
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "crf,crf-mod,gdb")]
    taggers: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "oracle")]
    annotator: AnnotatorKind,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CvArgs {
    /// Narratives to fold over.
    #[arg(long)]
    narratives: PathBuf,
    /// Tagged data added to every fold's training set.
    #[arg(long)]
    base: Option<PathBuf>,
    /// Raw text for gdb.
    #[arg(long)]
    mono: Option<PathBuf>,
    #[arg(long, default_value = "crf-mod")]
    tagger: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    /// TOML config; GLOSSA_* environment variables override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load(dir: &Path) -> Res<Corpus> {
    Ok(load_corpus_dir(dir, TagMode::Auto, &NormalizeConfig::default())?)
}

fn load_parallel(dir: &Path, mapping: Option<&Path>) -> Res<ParallelCorpus> {
    let mapping = mapping.map(TagsetMapping::load).transpose()?;
    Ok(load_parallel_dir(dir, TagMode::Auto, mapping.as_ref(), &NormalizeConfig::default())?)
}

fn parse_specs(names: &[String]) -> Res<Vec<TaggerSpec>> {
    Ok(names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?)
}

fn parse_condition(s: &str) -> Res<DataCondition> {
    let (name, transductive_mono) = match s.strip_suffix("+mono-test") {
        Some(n) => (n, true),
        None => (s, false),
    };
    let projection = match name {
        "base" => Augment::None,
        "clp" => Augment::Clp,
        "clpa" => Augment::Clpa,
        _ => return Err(format!("unknown data condition `{s}`").into()),
    };
    Ok(DataCondition {
        projection,
        transductive_mono,
    })
}

fn print_json(v: &impl serde::Serialize) -> Res {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn score(model: &TrainedTagger, test: Option<&Path>) -> Res {
    if let Some(dir) = test {
        let gold: Vec<Sentence> = load(dir)?.active_sentences().cloned().collect();
        let acc = token_accuracy(&gold, &model.tag_all(&gold));
        println!("accuracy\t{:.2}\t({}/{})", acc.percent(), acc.correct, acc.total);
    }
    Ok(())
}

fn corpus(cmd: CorpusCmd) -> Res<ExitCode> {
    match cmd {
        CorpusCmd::Stats { c, json } => {
            let report = if c.parallel {
                parallel_stats(&load_parallel(&c.dir, c.mapping.as_deref())?)
            } else {
                corpus_stats(&load(&c.dir)?)
            };
            if json {
                print_json(&report)?;
            } else {
                print!("{report}");
            }
        }
        CorpusCmd::Validate { c } => {
            let issues = if c.parallel {
                load_parallel(&c.dir, c.mapping.as_deref())?.validate()
            } else {
                load(&c.dir)?.validate()
            };
            for i in &issues {
                println!("{i}");
            }
            if !issues.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
            println!("ok");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn train(cmd: TrainCmd) -> Res {
    match cmd {
        TrainCmd::Crf {
            data,
            basic,
            l2,
            max_iters,
            dict,
            out,
        } => {
            let train = load(&data.train)?.training_sentences();
            let dict = dict.as_deref().map(TagDictionary::load).transpose()?;
            let base = if basic { CrfConfig::basic() } else { CrfConfig::extended() };
            let cfg = CrfConfig { l2, max_iters, ..base };
            let (model, report) = train_crf(&train, dict.as_ref(), &cfg)?;
            println!(
                "iterations\t{}\nconverged\t{}\nobjective\t{:.6}",
                report.iterations,
                report.converged,
                report.objective.last().copied().unwrap_or(f64::NAN)
            );
            if let Some(p) = out {
                model.save(&p)?;
            }
            score(&TrainedTagger::Crf(model), data.test.as_deref())
        }
        TrainCmd::Neural {
            data,
            epochs,
            dev_size,
            seed,
            out,
        } => {
            let train = load(&data.train)?.training_sentences();
            let cfg = NeuralConfig {
                max_epochs: epochs,
                dev_size,
                seed,
                ..Default::default()
            };
            let (model, report) = train_neural(&train, &cfg)?;
            println!(
                "best_epoch\t{}\ntrain_loss\t{:.6}",
                report.best_epoch,
                report.train_loss.last().copied().unwrap_or(f64::NAN)
            );
            if let Some(p) = out {
                model.save(&p)?;
            }
            score(&TrainedTagger::Neural(model), data.test.as_deref())
        }
        TrainCmd::Gdb { data, mono, dict, out } => {
            let train = load(&data.train)?.training_sentences();
            let mono = raw_text(&load(&mono)?);
            let extra = dict.as_deref().map(TagDictionary::load).transpose()?.unwrap_or_default();
            let model = train_gdb(&mono, &train, &extra, &GdbConfig::default())?;
            println!(
                "dictionary_types\t{}\npropagation_iterations\t{}\npropagation_residual\t{:.3e}",
                model.dictionary.len(),
                model.propagation_iterations,
                model.propagation_residual
            );
            if let Some(p) = out {
                model.dictionary.save(&p)?;
            }
            score(&TrainedTagger::Gdb(Box::new(model)), data.test.as_deref())
        }
    }
}

fn project(a: ProjectArgs) -> Res {
    let parallel = load_parallel(&a.parallel, a.mapping.as_deref())?;
    let test: BTreeSet<String> = a.test_ids.into_iter().collect();
    let train: BTreeSet<String> = parallel
        .pairs
        .iter()
        .map(|p| p.id().to_string())
        .filter(|id| !test.contains(id))
        .collect();
    let mode = if a.transductive {
        ProjectionMode::Transductive
    } else {
        ProjectionMode::TrainOnly
    };
    let cfg = ProjectionConfig {
        iters: a.iters,
        ..Default::default()
    };
    let p = project_corpus(&parallel, &train, &test, mode, &cfg)?;
    eprintln!(
        "{} types from {} kept links, {} tied types dropped",
        p.dictionary.len(),
        p.kept_links,
        p.tied_types.len()
    );
    match a.out {
        Some(path) => p.dictionary.save(&path)?,
        None => print!("{}", p.dictionary.to_tsv()),
    }
    Ok(())
}

fn grid(a: GridArgs) -> Res {
    let kinds: Vec<TaggerKind> = parse_specs(&a.taggers)?
        .into_iter()
        .map(|s| match s.augment {
            Augment::None => Ok(s.kind),
            _ => Err(format!("give projection through --conditions, not `{s}`")),
        })
        .collect::<Result<_, _>>()?;
    let conditions: Vec<DataCondition> = a.conditions.iter().map(|c| parse_condition(c)).collect::<Res<_>>()?;
    let (train, test, mono) = (load(&a.train)?, load(&a.test)?, load(&a.mono)?);
    let parallel = a.parallel.as_deref().map(|p| load_parallel(p, a.mapping.as_deref())).transpose()?;
    let data = GridData {
        train: &train,
        test: &test,
        mono: &mono,
        parallel: parallel.as_ref(),
    };
    let table = run_grid(&kinds, &conditions, &data, &HarnessConfig::default())?;
    if a.json {
        print_json(&table)
    } else {
        print!("{}", table.to_tsv());
        Ok(())
    }
}

fn al(a: AlArgs) -> Res {
    let (base, queue, mono) = (load(&a.base)?, load(&a.queue)?, load(&a.mono)?);
    let parallel = a.parallel.as_deref().map(|p| load_parallel(p, a.mapping.as_deref())).transpose()?;
    let cfg = AlConfig {
        taggers: parse_specs(&a.taggers)?,
        seed: a.seed,
        ..Default::default()
    };
    let mut learner = ActiveLearner::new(&base, &queue, &mono, parallel.as_ref(), cfg)?;
    let mut annotator: Box<dyn Annotator> = match a.annotator {
        AnnotatorKind::Oracle => Box::new(OracleAnnotator),
        AnnotatorKind::PassThrough => Box::new(PassThroughAnnotator),
    };
    let log = run_active_learning(&mut learner, annotator.as_mut())?;
    if a.json {
        return print_json(&log);
    }
    println!("iteration\tnarrative\tmethod\ttokens\taccuracy\tchanged\tfinal_story");
    for r in &log {
        let fin = r.final_story_accuracy.map_or("-".to_string(), |v| format!("{v:.2}"));
        println!(
            "{}\t{}\t{}\t{}\t{:.2}\t{}\t{}",
            r.iteration, r.narrative_id, r.method, r.tokens, r.accuracy, r.changed_count, fin
        );
    }
    Ok(())
}

fn cv(a: CvArgs) -> Res {
    let narratives = load(&a.narratives)?;
    let base = match &a.base {
        Some(d) => load(d)?.training_sentences(),
        None => Vec::new(),
    };
    let spec: TaggerSpec = a.tagger.parse()?;
    let res = Resources {
        mono: match &a.mono {
            Some(d) => raw_text(&load(d)?),
            None => Vec::new(),
        },
        ..Default::default()
    };
    let report = cross_validate(&narratives, &base, spec, &res, &HarnessConfig::default())?;
    if a.json {
        return print_json(&report);
    }
    for f in &report.folds {
        println!("{}\t{:.2}\t({}/{})", f.narrative_id, f.accuracy, f.correct, f.total);
    }
    println!(
        "mean {:.2}  sd {:.2}  min {:.2} ({})  max {:.2} ({})",
        report.mean, report.sd, report.min.accuracy, report.min.narrative_id, report.max.accuracy, report.max.narrative_id
    );
    Ok(())
}

fn serve(a: ServeArgs) -> Res {
    let cfg = match &a.config {
        Some(p) => ServiceConfig::from_file(p)?,
        None => ServiceConfig::default(),
    }
    .with_env(std::env::vars())?;
    tokio::runtime::Runtime::new()?.block_on(glossa_service::serve(cfg))?;
    Ok(())
}

fn run(cli: Cli) -> Res<ExitCode> {
    match cli.cmd {
        Cmd::Corpus(c) => return corpus(c),
        Cmd::Train(t) => train(t)?,
        Cmd::Project(p) => project(p)?,
        Cmd::Grid(g) => grid(g)?,
        Cmd::Al(a) => al(a)?,
        Cmd::Cv(c) => cv(c)?,
        Cmd::Serve(s) => serve(s)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
