//! Command-line front end.
//!
//! Trained models are stored as a file prefix: `PREFIX.hmm` (HMMv1),
//! `PREFIX.lex` (lexicon) and `PREFIX.guess` (guesser suffixes).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use thiserror::Error;

use crate::btype::{compile_btype_detailed, BTypeConfig, BuildReport, CompileError, DEFAULT_MAX_STATES};
use crate::corpus::{Corpus, CorpusError, Token, DEFAULT_END_TAG};
use crate::eval::{self, evaluate, histogram, sample_corpus, EvalError, Report, ReportFormat};
use crate::fst::{Fst, FstError, DEFAULT_OUTPUT_LIMIT};
use crate::hmm::{train, HmmError, HmmModel, TrainConfig, DEFAULT_SMOOTHING};
use crate::lexicon::{
    read_guesser_file, read_lexicon_file, write_guesser_file, write_lexicon_file, GuesserConfig, Lexicon,
    LexiconError, LexiconSources, TagMap, TagSet, DEFAULT_MAX_FREQ, DEFAULT_MAX_SUFFIX,
};
use crate::tagger::{self, end_class, segment, segment_tokens, Mode, Sentence, Tagger, TaggerError};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("compile: {0}")]
    Compile(#[from] CompileError),
    #[error("tag: {0}")]
    Tag(#[from] TaggerError),
    #[error("eval: {0}")]
    Eval(#[from] EvalError),
    #[error("train: {0}")]
    Train(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compile(CompileError::NotComputable { .. }) => EXIT_BUDGET,
            CliError::Tag(TaggerError::Fst { source: FstError::LimitExceeded { .. }, .. }) => EXIT_BUDGET,
            _ => EXIT_DATA,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Parser)]
#[command(name = "bfst", version, about = "Train HMM taggers and compile them into finite-state transducers")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ReportFormat::Text,
            Format::Tsv => ReportFormat::Tsv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TagMode {
    First,
    All,
    Count,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model from a `word<TAB>tag` corpus.
    Train {
        corpus: PathBuf,
        /// Output prefix for the .hmm, .lex and .guess files.
        #[arg(long, short)]
        out: PathBuf,
        /// Extra `word<TAB>tag,tag` entries merged into the lexicon.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SUFFIX)]
        max_suffix: usize,
        /// Words seen at most this often train the guesser.
        #[arg(long, default_value_t = DEFAULT_MAX_FREQ)]
        max_freq: usize,
        #[arg(long, default_value = DEFAULT_END_TAG)]
        end_tag: String,
    },
    /// Compile a model into a b-type transducer.
    Compile {
        /// Model prefix (or the .hmm file).
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        beta: usize,
        #[arg(long, default_value_t = 0)]
        alpha: usize,
        /// Largest intermediate automaton, in states.
        #[arg(long, env = "BFST_BUDGET", default_value_t = DEFAULT_MAX_STATES)]
        budget: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Tag one token per line (first column if tab separated).
    Tag {
        #[arg(long, short)]
        model: PathBuf,
        /// Tag with this transducer instead of the HMM.
        #[arg(long)]
        fst: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TagMode::First)]
        mode: TagMode,
        /// Print `word<TAB>class<TAB>tag`.
        #[arg(long)]
        show_classes: bool,
        /// Input file; standard input if absent.
        input: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_END_TAG)]
        end_tag: String,
        #[arg(long, default_value_t = DEFAULT_OUTPUT_LIMIT)]
        limit: usize,
    },
    /// Score tagging against a gold corpus and against the HMM.
    Eval {
        #[arg(long, short)]
        model: PathBuf,
        /// Gold `word<TAB>tag` corpus.
        gold: PathBuf,
        #[arg(long)]
        fst: Option<PathBuf>,
        /// Score this tagged output instead of tagging the gold words.
        #[arg(long)]
        tagged: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_END_TAG)]
        end_tag: String,
    },
    /// Histogram of the number of results per sentence.
    Stats {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long)]
        fst: PathBuf,
        input: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_END_TAG)]
        end_tag: String,
        #[arg(long, default_value_t = DEFAULT_OUTPUT_LIMIT)]
        limit: usize,
    },
    /// Sample a tagged corpus from a model.
    Sample {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        tokens: usize,
        #[arg(long, env = "BFST_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write a lexicon mapping each sampled word to its class.
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_END_TAG)]
        end_tag: String,
    },
}

/// Parses `argv` and runs it; returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let format = ReportFormat::from(cli.format);
    match cli.command {
        Command::Train { corpus, out, lexicon, smoothing, max_suffix, max_freq, end_tag } => {
            let c = Corpus::read(open(&corpus)?, &end_tag).map_err(|e| corpus_err(&corpus, e))?;
            let extra = lexicon.as_deref().map(|p| read_lexicon_file(open(p)?).map_err(|e| lex_err(p, e))).transpose()?;
            let guesser = GuesserConfig { max_suffix, max_freq };
            let sources = LexiconSources::build(Some(&c), extra.as_ref(), guesser).map_err(|e| lex_err(&corpus, e))?;
            let cfg = TrainConfig { smoothing, guesser };
            let model = train(&c, &sources, &cfg).map_err(|e| CliError::Train(e.to_string()))?;
            let kept: TagSet = model.tag_names().iter().cloned().collect();
            let sources = sources.restricted(&kept);
            let (hmm, lex, guess) = bundle_paths(&out);
            write_file(&hmm, |w| model.write_text(w).map_err(hmm_io))?;
            write_file(&lex, |w| write_lexicon_file(&sources.words, w))?;
            write_file(&guess, |w| write_guesser_file(&sources.suffixes, w))?;
            let mut r = Report::default();
            r.push("tokens", c.num_tokens());
            r.push("sentences", c.sentences.len());
            r.push("tags", model.num_tags());
            r.push("classes", model.num_classes());
            r.push("lexicon_entries", sources.words.len());
            r.push("guesser_suffixes", sources.suffixes.len());
            r.push("model", hmm.display());
            emit(stdout, &r, format)
        }
        Command::Compile { model, beta, alpha, budget, out } => {
            let m = load_model(&model)?;
            let cfg = BTypeConfig::new(beta, alpha).with_max_states(budget);
            info!("compiling b-type transducer ({beta},{alpha}) with a budget of {budget} states");
            let compiled = compile_btype_detailed(&m, &cfg)?;
            write_file(&out, |w| compiled.fst.write_text(w).map_err(fst_io))?;
            emit(stdout, &build_report(&compiled.report), format)
        }
        Command::Tag { model, fst, mode, show_classes, input, out, end_tag, limit } => {
            let (m, lex) = load_bundle(&model)?;
            let f = fst.as_deref().map(load_fst).transpose()?;
            let tagger = match &f {
                Some(f) => Tagger::fst(&m, f)?,
                None => Tagger::hmm(&m),
            };
            let words = read_words(input.as_deref())?;
            let sentences = segment(&lex, words, end_class(&m, &end_tag));
            warn_synthetic(&sentences);
            let mode = match mode {
                TagMode::First => Mode::First,
                TagMode::All => Mode::All { limit },
                TagMode::Count => Mode::Count { limit },
            };
            let results = tagger.tag_all(&sentences, mode)?;
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
                None => Box::new(&mut *stdout),
            };
            let where_ = out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
            if let Mode::Count { .. } = mode {
                for (s, r) in sentences.iter().zip(&results) {
                    writeln!(sink, "{}\t{}", s.real_len(), r.n_results.unwrap_or(1)).map_err(|e| io_err(&where_, e))?;
                }
            } else {
                tagger::write_tagged(&mut sink, &m, &sentences, &results, show_classes).map_err(|e| io_err(&where_, e))?;
            }
            sink.flush().map_err(|e| io_err(&where_, e))
        }
        Command::Eval { model, gold, fst, tagged, end_tag } => {
            let (m, lex) = load_bundle(&model)?;
            let g = Corpus::read(open(&gold)?, &end_tag).map_err(|e| corpus_err(&gold, e))?;
            let end = end_class(&m, &end_tag);
            let sentences = segment_tokens(&lex, g.tokens(), end);
            let gold_tokens = tagger::gold_tokens(&sentences);
            let hmm = Tagger::hmm(&m);
            let hmm_tokens = tagger::to_tokens(&m, &sentences, &hmm.tag_all(&sentences, Mode::First)?);
            let f = fst.as_deref().map(load_fst).transpose()?;
            let mut report;
            if let Some(path) = &tagged {
                let t = Corpus::read(open(path)?, &end_tag).map_err(|e| corpus_err(path, e))?;
                let toks: Vec<Token> = t.tokens().filter(|t| t.word != tagger::SYNTHETIC_END_WORD).cloned().collect();
                report = evaluate(&toks, Some(&gold_tokens), Some(&hmm_tokens))?;
            } else {
                let tagger = match &f {
                    Some(f) => Tagger::fst(&m, f)?,
                    None => Tagger::hmm(&m),
                };
                let start = Instant::now();
                let results = tagger.tag_all(&sentences, Mode::First)?;
                let secs = start.elapsed().as_secs_f64();
                let toks = tagger::to_tokens(&m, &sentences, &results);
                report = evaluate(&toks, Some(&gold_tokens), Some(&hmm_tokens))?;
                report.words_per_sec = Some(toks.len() as f64 / secs.max(1e-9));
            }
            report.sentences = sentences.len();
            if let Some(f) = &f {
                report.states = Some(f.num_states());
                report.arcs = Some(f.num_arcs());
                report.histogram = result_histogram(&m, f, &sentences, DEFAULT_OUTPUT_LIMIT)?;
            }
            emit(stdout, &report.report(), format)
        }
        Command::Stats { model, fst, input, end_tag, limit } => {
            let (m, lex) = load_bundle(&model)?;
            let f = load_fst(&fst)?;
            let words = read_words(input.as_deref())?;
            let sentences = segment(&lex, words, end_class(&m, &end_tag));
            warn_synthetic(&sentences);
            let mut r = Report::default();
            r.push("sentences", sentences.len());
            for (n, p) in result_histogram(&m, &f, &sentences, limit)? {
                r.push(format!("results_{n}"), p);
            }
            emit(stdout, &r, format)
        }
        Command::Sample { model, tokens, seed, out, lexicon_out, end_tag } => {
            if tokens == 0 {
                return Err(CliError::Usage("--tokens must be at least 1".into()));
            }
            let m = load_model(&model)?;
            let c = sample_corpus(&m, tokens, seed, &end_tag);
            match &out {
                Some(p) => write_file(p, |w| c.write(w))?,
                None => c.write(&mut *stdout).map_err(|e| io_err(Path::new("<stdout>"), e))?,
            }
            if let Some(p) = &lexicon_out {
                write_file(p, |w| write_lexicon_file(&eval::class_lexicon(&m), w))?;
            }
            Ok(())
        }
    }
}

fn result_histogram(
    m: &HmmModel,
    f: &Fst,
    sentences: &[Sentence],
    limit: usize,
) -> Result<std::collections::BTreeMap<usize, eval::Percent>> {
    let results = Tagger::fst(m, f)?.tag_all(sentences, Mode::Count { limit })?;
    let counts: Vec<usize> = results.iter().map(|r| r.n_results.unwrap_or(1)).collect();
    Ok(histogram(&counts))
}

pub fn build_report(b: &BuildReport) -> Report {
    let mut r = Report::default();
    r.push("beta", b.beta);
    r.push("alpha", b.alpha);
    r.push("sequences", b.sequences);
    for s in &b.stages {
        r.push(format!("{}_states", s.stage.as_str().replace(' ', "_")), s.states);
        r.push(format!("{}_arcs", s.stage.as_str().replace(' ', "_")), s.arcs);
    }
    r.push("states", b.states);
    r.push("arcs", b.arcs);
    r.push("build_seconds", format!("{:.3}", b.elapsed.as_secs_f64()));
    r
}

fn emit(stdout: &mut dyn Write, r: &Report, format: ReportFormat) -> Result<()> {
    stdout.write_all(r.render(format).as_bytes()).map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn warn_synthetic(sentences: &[Sentence]) {
    if sentences.last().is_some_and(|s| s.synthetic_end) {
        warn!("input ends mid-sentence; appended `{}`", tagger::SYNTHETIC_END_WORD);
    }
}

/// `(PREFIX.hmm, PREFIX.lex, PREFIX.guess)`; a trailing `.hmm` on `prefix` is dropped.
pub fn bundle_paths(prefix: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let base = if prefix.extension().is_some_and(|e| e == "hmm") { prefix.with_extension("") } else { prefix.to_owned() };
    let with = |ext: &str| {
        let mut s = base.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("hmm"), with("lex"), with("guess"))
}

fn load_model(prefix: &Path) -> Result<HmmModel> {
    let (hmm, _, _) = bundle_paths(prefix);
    HmmModel::read_text(open(&hmm)?).map_err(|e| match e {
        HmmError::Io(source) => CliError::Io { path: hmm.clone(), source },
        e => CliError::Parse { path: hmm.clone(), msg: e.to_string() },
    })
}

fn load_bundle(prefix: &Path) -> Result<(HmmModel, Lexicon)> {
    let m = load_model(prefix)?;
    let (_, lex, guess) = bundle_paths(prefix);
    let words = read_lexicon_file(open(&lex)?).map_err(|e| lex_err(&lex, e))?;
    let suffixes = if guess.exists() {
        read_guesser_file(open(&guess)?).map_err(|e| lex_err(&guess, e))?
    } else {
        TagMap::new()
    };
    let unknown: TagSet = match m.unknown_class() {
        Some(c) => m.class(c).members.iter().map(|&t| m.tag_name(t).to_owned()).collect(),
        None => TagSet::new(),
    };
    let sources = LexiconSources::from_files(words, suffixes, unknown);
    let lexicon = Lexicon::bind(&sources, &m).map_err(|e| lex_err(&lex, e))?;
    Ok((m, lexicon))
}

fn load_fst(path: &Path) -> Result<Fst> {
    Fst::read_text(open(path)?).map_err(|e| match e {
        FstError::Io(source) => CliError::Io { path: path.to_owned(), source },
        e => CliError::Parse { path: path.to_owned(), msg: e.to_string() },
    })
}

fn read_words(input: Option<&Path>) -> Result<Vec<String>> {
    let mut text = String::new();
    match input {
        Some(p) => open(p)?.read_to_string(&mut text).map_err(|e| io_err(p, e))?,
        None => io::stdin().read_to_string(&mut text).map_err(|e| io_err(Path::new("<stdin>"), e))?,
    };
    Ok(text.lines().map(|l| l.split('\t').next().unwrap_or("").to_owned()).collect())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|()| w.flush()).map_err(|e| io_err(path, e))
}

fn hmm_io(e: HmmError) -> io::Error {
    match e {
        HmmError::Io(e) => e,
        e => io::Error::other(e.to_string()),
    }
}

fn fst_io(e: FstError) -> io::Error {
    match e {
        FstError::Io(e) => e,
        e => io::Error::other(e.to_string()),
    }
}

fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Io { path: path.to_owned(), source }
}

fn corpus_err(path: &Path, e: CorpusError) -> CliError {
    match e {
        CorpusError::Io(source) => io_err(path, source),
        e => CliError::Parse { path: path.to_owned(), msg: e.to_string() },
    }
}

fn lex_err(path: &Path, e: LexiconError) -> CliError {
    match e {
        LexiconError::Io(source) => io_err(path, source),
        e => CliError::Parse { path: path.to_owned(), msg: e.to_string() },
    }
}
