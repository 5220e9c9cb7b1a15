//! Tagged corpora: `word<TAB>tag` per line, sentences ending at the
//! designated end tag. Blank lines are ignored.

use std::io::{BufRead, Write};

use thiserror::Error;

pub const DEFAULT_END_TAG: &str = "SENT";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub word: String,
    pub tag: String,
}

impl Token {
    pub fn new(word: impl Into<String>, tag: impl Into<String>) -> Self {
        Token { word: word.into(), tag: tag.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Vec<Token>>,
}

impl Corpus {
    pub fn new(sentences: Vec<Vec<Token>>) -> Self {
        Corpus { sentences }
    }

    /// Builds a corpus from `word/tag` items, one sentence per slice.
    pub fn from_pairs(sentences: &[&[(&str, &str)]]) -> Self {
        Corpus {
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|&(w, t)| Token::new(w, t)).collect())
                .collect(),
        }
    }

    pub fn read<R: BufRead>(r: R, end_tag: &str) -> Result<Corpus, CorpusError> {
        let mut sentences = Vec::new();
        let mut current = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| CorpusError::Malformed {
                line: i + 1,
                msg: "expected `word<TAB>tag`".into(),
            })?;
            if word.is_empty() || tag.is_empty() || tag.contains('\t') {
                return Err(CorpusError::Malformed { line: i + 1, msg: "empty word or tag".into() });
            }
            let end = tag == end_tag;
            current.push(Token::new(word, tag));
            if end {
                sentences.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            sentences.push(current);
        }
        Ok(Corpus { sentences })
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, s) in self.sentences.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            for tok in s {
                writeln!(w, "{}\t{}", tok.word, tok.tag)?;
            }
        }
        Ok(())
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_tokens() == 0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }
}
