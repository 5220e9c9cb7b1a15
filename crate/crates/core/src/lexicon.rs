//! Word to ambiguity-class lookup: full-form lexicon, then the longest known
//! suffix, then `[UNKNOWN]`.
//!
//! [`LexiconSources`] holds tag sets by name, as read from files or counted
//! from a corpus. [`Lexicon`] is the same data bound to a model's class ids.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::corpus::Corpus;
use crate::hmm::{class_name, ClassId, HmmModel, TagId};

pub type TagSet = BTreeSet<String>;
pub type TagMap = BTreeMap<String, TagSet>;

pub const DEFAULT_MAX_SUFFIX: usize = 3;
pub const DEFAULT_MAX_FREQ: usize = 2;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("no lexicon source given")]
    Empty,
    #[error("class {0} is not registered in the model")]
    UnregisteredClass(String),
    #[error("the model has no [UNKNOWN] class")]
    NoUnknownClass,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LexiconError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GuesserConfig {
    /// Longest suffix stored, in characters.
    pub max_suffix: usize,
    /// Only words at most this frequent in the corpus train the guesser.
    pub max_freq: usize,
}

impl Default for GuesserConfig {
    fn default() -> Self {
        GuesserConfig { max_suffix: DEFAULT_MAX_SUFFIX, max_freq: DEFAULT_MAX_FREQ }
    }
}

fn parse_tags(field: &str) -> Option<TagSet> {
    let tags: TagSet = field.split(',').map(str::to_owned).collect();
    if tags.iter().any(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
        None
    } else {
        Some(tags)
    }
}

fn read_map<R: BufRead>(r: R, suffixes: bool) -> Result<TagMap> {
    let mut map = TagMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| LexiconError::Malformed { line: i + 1, msg: msg.to_owned() };
        let (key, tags) = line.split_once('\t').ok_or_else(|| bad("expected `entry<TAB>tag,tag,...`"))?;
        let key = if suffixes {
            key.strip_prefix('-').filter(|s| !s.is_empty()).ok_or_else(|| bad("expected `-suffix`"))?
        } else {
            key
        };
        if key.is_empty() {
            return Err(bad("empty word"));
        }
        let tags = parse_tags(tags).ok_or_else(|| bad("bad tag list"))?;
        map.entry(key.to_owned()).or_default().extend(tags);
    }
    Ok(map)
}

fn write_map<W: Write>(map: &TagMap, mut w: W, prefix: &str) -> std::io::Result<()> {
    for (key, tags) in map {
        let tags: Vec<&str> = tags.iter().map(String::as_str).collect();
        writeln!(w, "{prefix}{key}\t{}", tags.join(","))?;
    }
    Ok(())
}

/// Reads `word<TAB>tag,tag,...` lines.
pub fn read_lexicon_file<R: BufRead>(r: R) -> Result<TagMap> {
    read_map(r, false)
}

/// Reads `-suffix<TAB>tag,tag,...` lines.
pub fn read_guesser_file<R: BufRead>(r: R) -> Result<TagMap> {
    read_map(r, true)
}

pub fn write_lexicon_file<W: Write>(map: &TagMap, w: W) -> std::io::Result<()> {
    write_map(map, w, "")
}

pub fn write_guesser_file<W: Write>(map: &TagMap, w: W) -> std::io::Result<()> {
    write_map(map, w, "-")
}

/// Proper suffixes of `word` of length `1..=max`, longest first.
fn suffixes(word: &str, max: usize) -> impl Iterator<Item = &str> {
    let starts: Vec<usize> = word.char_indices().map(|(i, _)| i).skip(1).collect();
    let keep = starts.len().min(max);
    starts.into_iter().rev().take(keep).rev().map(move |i| &word[i..])
}

/// Tag sets by name, before binding to a model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LexiconSources {
    pub words: TagMap,
    pub suffixes: TagMap,
    pub max_suffix: usize,
    /// Members of `[UNKNOWN]`.
    pub unknown: TagSet,
}

impl LexiconSources {
    /// Counts tag sets from a corpus, optionally merged with a lexicon file.
    ///
    /// The guesser learns every proper suffix (up to `max_suffix` characters)
    /// of words seen at most `max_freq` times. `[UNKNOWN]` gets the tags of
    /// words seen once, or every tag if there are none.
    pub fn build(corpus: Option<&Corpus>, lexicon: Option<&TagMap>, cfg: GuesserConfig) -> Result<Self> {
        if corpus.map_or(true, Corpus::is_empty) && lexicon.map_or(true, BTreeMap::is_empty) {
            return Err(LexiconError::Empty);
        }
        let mut words = TagMap::new();
        let mut suffix_map = TagMap::new();
        let mut unknown = TagSet::new();
        if let Some(corpus) = corpus {
            let mut freq: HashMap<&str, usize> = HashMap::new();
            for tok in corpus.tokens() {
                *freq.entry(&tok.word).or_default() += 1;
                words.entry(tok.word.clone()).or_default().insert(tok.tag.clone());
            }
            for tok in corpus.tokens() {
                let f = freq[tok.word.as_str()];
                if f == 1 {
                    unknown.insert(tok.tag.clone());
                }
                if f <= cfg.max_freq {
                    for s in suffixes(&tok.word, cfg.max_suffix) {
                        suffix_map.entry(s.to_owned()).or_default().insert(tok.tag.clone());
                    }
                }
            }
        }
        if let Some(lex) = lexicon {
            for (w, tags) in lex {
                words.entry(w.clone()).or_default().extend(tags.iter().cloned());
            }
        }
        if unknown.is_empty() {
            unknown = words.values().flatten().cloned().collect();
        }
        Ok(LexiconSources { words, suffixes: suffix_map, max_suffix: cfg.max_suffix, unknown })
    }

    /// Assembles sources from lexicon and guesser files.
    pub fn from_files(words: TagMap, guesser: TagMap, unknown: TagSet) -> Self {
        let max_suffix = guesser.keys().map(|s| s.chars().count()).max().unwrap_or(0);
        LexiconSources { words, suffixes: guesser, max_suffix, unknown }
    }

    pub fn all_tags(&self) -> TagSet {
        self.words.values().chain(self.suffixes.values()).flatten().chain(&self.unknown).cloned().collect()
    }

    /// Drops tags outside `keep`, and entries left without tags.
    pub fn restricted(&self, keep: &TagSet) -> LexiconSources {
        let filter = |map: &TagMap| -> TagMap {
            map.iter()
                .filter_map(|(k, tags)| {
                    let tags: TagSet = tags.intersection(keep).cloned().collect();
                    (!tags.is_empty()).then(|| (k.clone(), tags))
                })
                .collect()
        };
        let mut unknown: TagSet = self.unknown.intersection(keep).cloned().collect();
        if unknown.is_empty() {
            unknown = keep.clone();
        }
        LexiconSources {
            words: filter(&self.words),
            suffixes: filter(&self.suffixes),
            max_suffix: self.max_suffix,
            unknown,
        }
    }

    /// Tag set of the longest stored suffix of `word`.
    pub fn guess(&self, word: &str) -> Option<&TagSet> {
        suffixes(word, self.max_suffix).find_map(|s| self.suffixes.get(s))
    }

    /// Where `word` gets its tags from: lexicon, guesser, or `None` for unknown.
    pub fn tags_of(&self, word: &str) -> Option<&TagSet> {
        self.words.get(word).or_else(|| self.guess(word))
    }
}

/// Lookup chain bound to a model's classes.
#[derive(Clone, Debug)]
pub struct Lexicon {
    entries: HashMap<String, ClassId>,
    suffixes: HashMap<String, ClassId>,
    max_suffix: usize,
    unknown: ClassId,
}

impl Lexicon {
    /// Resolves every tag set to a class of `model`. Tags the model does not
    /// know are dropped first.
    pub fn bind(sources: &LexiconSources, model: &HmmModel) -> Result<Lexicon> {
        let keep: TagSet = model.tag_names().iter().cloned().collect();
        let sources = sources.restricted(&keep);
        let class_of = |tags: &TagSet| -> Result<ClassId> {
            let ids: Vec<TagId> = tags.iter().map(|t| model.tag_id(t).expect("restricted")).collect();
            model.class_with_members(&ids).ok_or_else(|| LexiconError::UnregisteredClass(class_name(&ids_to_names(model, &ids))))
        };
        let bind_map = |map: &TagMap| -> Result<HashMap<String, ClassId>> {
            map.iter().map(|(k, tags)| Ok((k.clone(), class_of(tags)?))).collect()
        };
        Ok(Lexicon {
            entries: bind_map(&sources.words)?,
            suffixes: bind_map(&sources.suffixes)?,
            max_suffix: sources.max_suffix,
            unknown: model.unknown_class().ok_or(LexiconError::NoUnknownClass)?,
        })
    }

    pub fn lookup(&self, word: &str) -> ClassId {
        if let Some(&c) = self.entries.get(word) {
            return c;
        }
        suffixes(word, self.max_suffix).find_map(|s| self.suffixes.get(s).copied()).unwrap_or(self.unknown)
    }

    pub fn unknown(&self) -> ClassId {
        self.unknown
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn ids_to_names<'a>(model: &'a HmmModel, ids: &[TagId]) -> Vec<&'a str> {
    ids.iter().map(|&t| model.tag_name(t)).collect()
}
