//! Sentence segmentation and tagging with an HMM or a compiled transducer.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::Token;
use crate::fst::{Fst, FstError, DEFAULT_OUTPUT_LIMIT};
use crate::hmm::{viterbi, ClassId, HmmError, HmmModel, TagId};
use crate::lexicon::Lexicon;
use crate::symbols::{SymbolId, SymbolKind};

/// Word form printed for the end token added to an unterminated final sentence.
pub const SYNTHETIC_END_WORD: &str = "<synthetic-end>";

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("the transducer has no symbol for class {class} of word `{word}`")]
    UnknownClass { word: String, class: String },
    #[error("the transducer has no result for sentence {sentence}")]
    NoResult { sentence: usize },
    #[error("transducer output symbol `{0}` is not a tag of the model")]
    UnknownOutput(String),
    #[error("sentence {sentence}: {source}")]
    Fst { sentence: usize, source: FstError },
    #[error(transparent)]
    Hmm(#[from] HmmError),
}

pub type Result<T, E = TaggerError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub words: Vec<String>,
    pub classes: Vec<ClassId>,
    pub gold: Option<Vec<String>>,
    /// The last token was added because the input ended mid-sentence.
    pub synthetic_end: bool,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of tokens that came from the input.
    pub fn real_len(&self) -> usize {
        self.words.len() - usize::from(self.synthetic_end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// First result under the fixed arc order.
    First,
    /// Every result, first one included.
    All { limit: usize },
    /// First result plus the number of results.
    Count { limit: usize },
}

impl Mode {
    pub const ALL: Mode = Mode::All { limit: DEFAULT_OUTPUT_LIMIT };
    pub const COUNT: Mode = Mode::Count { limit: DEFAULT_OUTPUT_LIMIT };
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagResult {
    pub tags: Vec<TagId>,
    /// Set in `All` and `Count` mode.
    pub n_results: Option<usize>,
    /// Set in `All` mode, in result order.
    pub alternatives: Vec<Vec<TagId>>,
}

/// Splits a token stream into sentences.
///
/// A sentence ends after each token whose class is `end_class`, and at blank
/// input lines. A trailing sentence without an end token gets one appended
/// (flagged) when `end_class` is known.
pub fn segment<I, S>(lex: &Lexicon, tokens: I, end_class: Option<ClassId>) -> Vec<Sentence>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    segment_inner(lex, tokens.into_iter().map(|w| (w.into(), None)), end_class)
}

/// [`segment`] over gold-tagged tokens, keeping the gold tags.
pub fn segment_tokens<'a, I>(lex: &Lexicon, tokens: I, end_class: Option<ClassId>) -> Vec<Sentence>
where
    I: IntoIterator<Item = &'a Token>,
{
    segment_inner(lex, tokens.into_iter().map(|t| (t.word.clone(), Some(t.tag.clone()))), end_class)
}

fn segment_inner(
    lex: &Lexicon,
    tokens: impl Iterator<Item = (String, Option<String>)>,
    end_class: Option<ClassId>,
) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut cur = Sentence { words: vec![], classes: vec![], gold: None, synthetic_end: false };
    let mut gold: Vec<String> = Vec::new();
    let mut has_gold = false;
    let flush = |cur: &mut Sentence, gold: &mut Vec<String>, has_gold: bool, out: &mut Vec<Sentence>| {
        if !cur.words.is_empty() {
            let mut s = std::mem::replace(cur, Sentence { words: vec![], classes: vec![], gold: None, synthetic_end: false });
            if has_gold {
                s.gold = Some(std::mem::take(gold));
            }
            out.push(s);
        }
        gold.clear();
    };
    for (word, tag) in tokens {
        let word = word.trim().to_owned();
        if word.is_empty() {
            flush(&mut cur, &mut gold, has_gold, &mut out);
            continue;
        }
        let c = lex.lookup(&word);
        cur.words.push(word);
        cur.classes.push(c);
        if let Some(t) = tag {
            has_gold = true;
            gold.push(t);
        }
        if Some(c) == end_class {
            flush(&mut cur, &mut gold, has_gold, &mut out);
        }
    }
    if let (false, Some(end)) = (cur.words.is_empty(), end_class) {
        cur.words.push(SYNTHETIC_END_WORD.to_owned());
        cur.classes.push(end);
        cur.synthetic_end = true;
        if has_gold {
            gold.push(String::new());
        }
    }
    flush(&mut cur, &mut gold, has_gold, &mut out);
    out
}

/// A transducer bound to a model's class and tag inventories by name.
#[derive(Clone, Debug)]
pub struct FstBinding<'f> {
    fst: &'f Fst,
    class_symbols: Vec<Option<SymbolId>>,
    tag_of: HashMap<SymbolId, TagId>,
}

impl<'f> FstBinding<'f> {
    pub fn new(fst: &'f Fst, model: &HmmModel) -> Result<Self> {
        let table = fst.table();
        let class_symbols = model
            .classes()
            .iter()
            .map(|c| table.lookup(&c.name).filter(|&s| table.kind(s) == SymbolKind::Class))
            .collect();
        let mut tag_of = HashMap::new();
        for s in table.ids_of_kind(SymbolKind::Tag) {
            if let Some(t) = model.tag_id(table.name(s)) {
                tag_of.insert(s, t);
            }
        }
        for (_, arc) in fst.arcs() {
            if !arc.lower.is_epsilon() && !tag_of.contains_key(&arc.lower) {
                return Err(TaggerError::UnknownOutput(table.name(arc.lower).to_owned()));
            }
        }
        Ok(FstBinding { fst, class_symbols, tag_of })
    }

    pub fn fst(&self) -> &Fst {
        self.fst
    }

    fn input(&self, model: &HmmModel, s: &Sentence) -> Result<Vec<SymbolId>> {
        self.symbols(model, &s.classes, &s.words)
    }

    fn symbols(&self, model: &HmmModel, classes: &[ClassId], words: &[String]) -> Result<Vec<SymbolId>> {
        classes
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                self.class_symbols.get(c.index()).copied().flatten().ok_or_else(|| TaggerError::UnknownClass {
                    word: words.get(i).cloned().unwrap_or_else(|| model.class(c).name.clone()),
                    class: model.class(c).name.clone(),
                })
            })
            .collect()
    }

    /// First output for a bare class sequence.
    pub fn first(&self, model: &HmmModel, classes: &[ClassId]) -> Result<Option<Vec<TagId>>> {
        let input = self.symbols(model, classes, &[])?;
        let out = self.fst.apply_first(&input).map_err(|source| TaggerError::Fst { sentence: 0, source })?;
        Ok(out.map(|o| self.tags(&o)))
    }

    /// Number of outputs for a bare class sequence.
    pub fn count(&self, model: &HmmModel, classes: &[ClassId], limit: usize) -> Result<usize> {
        let input = self.symbols(model, classes, &[])?;
        count_results(self.fst, &input, limit).map_err(|source| TaggerError::Fst { sentence: 0, source })
    }

    fn tags(&self, out: &[SymbolId]) -> Vec<TagId> {
        out.iter().map(|s| self.tag_of[s]).collect()
    }
}

/// Tags sentences with the HMM, or with a bound transducer when given.
#[derive(Clone, Debug)]
pub struct Tagger<'a> {
    model: &'a HmmModel,
    fst: Option<FstBinding<'a>>,
}

impl<'a> Tagger<'a> {
    pub fn hmm(model: &'a HmmModel) -> Self {
        Tagger { model, fst: None }
    }

    pub fn fst(model: &'a HmmModel, fst: &'a Fst) -> Result<Self> {
        Ok(Tagger { model, fst: Some(FstBinding::new(fst, model)?) })
    }

    pub fn model(&self) -> &HmmModel {
        self.model
    }

    pub fn uses_fst(&self) -> bool {
        self.fst.is_some()
    }

    /// Tags one sentence; `index` only labels errors.
    pub fn tag_sentence(&self, s: &Sentence, mode: Mode, index: usize) -> Result<TagResult> {
        let Some(b) = &self.fst else {
            let tags = viterbi(self.model, &s.classes)?;
            let n_results = (mode != Mode::First).then_some(1);
            let alternatives = if matches!(mode, Mode::All { .. }) { vec![tags.clone()] } else { vec![] };
            return Ok(TagResult { tags, n_results, alternatives });
        };
        let input = b.input(self.model, s)?;
        let fst_err = |source| TaggerError::Fst { sentence: index, source };
        match mode {
            Mode::First => {
                let out = b.fst.apply_first(&input).map_err(fst_err)?;
                let out = out.ok_or(TaggerError::NoResult { sentence: index })?;
                Ok(TagResult { tags: b.tags(&out), n_results: None, alternatives: vec![] })
            }
            Mode::All { limit } => {
                let all = b.fst.apply_all(&input, limit).map_err(fst_err)?;
                if all.is_empty() {
                    return Err(TaggerError::NoResult { sentence: index });
                }
                let alternatives: Vec<Vec<TagId>> = all.iter().map(|o| b.tags(o)).collect();
                Ok(TagResult { tags: alternatives[0].clone(), n_results: Some(alternatives.len()), alternatives })
            }
            Mode::Count { limit } => {
                let n = count_results(b.fst, &input, limit).map_err(fst_err)?;
                let out = b.fst.apply_first(&input).map_err(fst_err)?;
                let out = out.ok_or(TaggerError::NoResult { sentence: index })?;
                Ok(TagResult { tags: b.tags(&out), n_results: Some(n), alternatives: vec![] })
            }
        }
    }

    /// Tags sentences in parallel; results keep the input order.
    pub fn tag_all(&self, sentences: &[Sentence], mode: Mode) -> Result<Vec<TagResult>> {
        sentences.par_iter().enumerate().map(|(i, s)| self.tag_sentence(s, mode, i)).collect()
    }
}

/// Exact number of outputs of `fst` for `input`, failing above `limit`.
pub fn count_results(fst: &Fst, input: &[SymbolId], limit: usize) -> Result<usize, FstError> {
    fst.count_outputs(input, limit)
}

/// Writes `word<TAB>tag` lines (or `word<TAB>class<TAB>tag`), one extra tag
/// column per alternative in `All` mode, and a blank line after each sentence.
pub fn write_tagged<W: std::io::Write>(
    mut w: W,
    model: &HmmModel,
    sentences: &[Sentence],
    results: &[TagResult],
    show_classes: bool,
) -> std::io::Result<()> {
    for (s, r) in sentences.iter().zip(results) {
        for i in 0..s.len() {
            write!(w, "{}", s.words[i])?;
            if show_classes {
                write!(w, "\t{}", model.class(s.classes[i]).name)?;
            }
            if r.alternatives.is_empty() {
                write!(w, "\t{}", model.tag_name(r.tags[i]))?;
            } else {
                for alt in &r.alternatives {
                    write!(w, "\t{}", model.tag_name(alt[i]))?;
                }
            }
            writeln!(w)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Flattens tagged sentences into tokens, leaving out synthetic end tokens.
pub fn to_tokens(model: &HmmModel, sentences: &[Sentence], results: &[TagResult]) -> Vec<Token> {
    let mut out = Vec::new();
    for (s, r) in sentences.iter().zip(results) {
        for i in 0..s.real_len() {
            out.push(Token::new(s.words[i].clone(), model.tag_name(r.tags[i])));
        }
    }
    out
}

/// Gold tokens of segmented sentences, leaving out synthetic end tokens.
pub fn gold_tokens(sentences: &[Sentence]) -> Vec<Token> {
    let mut out = Vec::new();
    for s in sentences {
        if let Some(gold) = &s.gold {
            for i in 0..s.real_len() {
                out.push(Token::new(s.words[i].clone(), gold[i].clone()));
            }
        }
    }
    out
}

/// The singleton class of `end_tag`, if the model has one.
pub fn end_class(model: &HmmModel, end_tag: &str) -> Option<ClassId> {
    model.tag_id(end_tag).and_then(|t| model.class_with_members(&[t]))
}
