//! Accuracy and agreement scores, result-count histograms, reports, and
//! corpora sampled from a model.

use std::collections::BTreeMap;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{Corpus, Token};
use crate::hmm::{HmmModel, TagId};
use crate::lexicon::TagMap;

/// Sentence lengths drawn when the model has no end tag.
pub const SAMPLE_LENGTHS: std::ops::RangeInclusive<usize> = 1..=12;
/// Longest sampled sentence when waiting for the end tag.
pub const MAX_SAMPLED_SENTENCE: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("streams disagree at token {position}: `{expected}` vs `{found}`")]
    Misaligned { position: usize, expected: String, found: String },
    #[error("streams have different lengths: {left} vs {right} tokens")]
    Length { left: usize, right: usize },
}

/// A percentage in hundredths, so `10000` is 100.00.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(pub u32);

impl Percent {
    pub const HUNDRED: Percent = Percent(10_000);

    /// `100·num/den` rounded half up to two decimals; 100.00 when `den` is 0.
    pub fn ratio(num: usize, den: usize) -> Percent {
        assert!(num <= den, "ratio above 1");
        if den == 0 {
            return Percent::HUNDRED;
        }
        let (num, den) = (num as u128, den as u128);
        Percent(((num * 20_000 + den) / (2 * den)) as u32)
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

/// Share of positions where the tags agree. Words must match position by position.
pub fn match_rate(left: &[Token], right: &[Token]) -> Result<Percent, EvalError> {
    if left.len() != right.len() {
        for (i, (a, b)) in left.iter().zip(right).enumerate() {
            if a.word != b.word {
                return Err(EvalError::Misaligned { position: i, expected: a.word.clone(), found: b.word.clone() });
            }
        }
        return Err(EvalError::Length { left: left.len(), right: right.len() });
    }
    let mut same = 0;
    for (i, (a, b)) in left.iter().zip(right).enumerate() {
        if a.word != b.word {
            return Err(EvalError::Misaligned { position: i, expected: a.word.clone(), found: b.word.clone() });
        }
        same += usize::from(a.tag == b.tag);
    }
    Ok(Percent::ratio(same, left.len()))
}

/// Percentages per result count, rounded by largest remainder so the bins
/// always add up to exactly 100.00.
pub fn histogram(counts: &[usize]) -> BTreeMap<usize, Percent> {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &n in counts {
        *freq.entry(n).or_default() += 1;
    }
    let total = counts.len() as u128;
    if total == 0 {
        return BTreeMap::new();
    }
    let mut bins: Vec<(usize, u32, u128)> = freq
        .iter()
        .map(|(&n, &k)| {
            let scaled = k as u128 * 10_000;
            (n, (scaled / total) as u32, scaled % total)
        })
        .collect();
    let assigned: u32 = bins.iter().map(|b| b.1).sum();
    let mut order: Vec<usize> = (0..bins.len()).collect();
    order.sort_by(|&i, &j| bins[j].2.cmp(&bins[i].2).then(bins[i].0.cmp(&bins[j].0)));
    for &i in order.iter().take((10_000 - assigned) as usize) {
        bins[i].1 += 1;
    }
    bins.into_iter().map(|(n, p, _)| (n, Percent(p))).collect()
}

/// Ordered key/value lines, printed aligned or tab separated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub rows: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Tsv,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.rows.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.rows {
            match format {
                ReportFormat::Text => out.push_str(&format!("{k:<width$}  {v}\n")),
                ReportFormat::Tsv => out.push_str(&format!("{k}\t{v}\n")),
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub tokens: usize,
    pub sentences: usize,
    /// Against gold tags.
    pub accuracy: Option<Percent>,
    /// Against the HMM's own output.
    pub agreement: Option<Percent>,
    pub states: Option<usize>,
    pub arcs: Option<usize>,
    /// Tagging time only, model loading excluded.
    pub words_per_sec: Option<f64>,
    /// Result count → share of sentences.
    pub histogram: BTreeMap<usize, Percent>,
    pub build_time: Option<f64>,
}

/// Scores `tagged` against gold tags and against HMM output.
pub fn evaluate(tagged: &[Token], gold: Option<&[Token]>, hmm: Option<&[Token]>) -> Result<EvalReport, EvalError> {
    Ok(EvalReport {
        tokens: tagged.len(),
        accuracy: gold.map(|g| match_rate(g, tagged)).transpose()?,
        agreement: hmm.map(|h| match_rate(h, tagged)).transpose()?,
        ..EvalReport::default()
    })
}

impl EvalReport {
    pub fn report(&self) -> Report {
        let mut r = Report::default();
        r.push("tokens", self.tokens);
        r.push("sentences", self.sentences);
        if let Some(a) = self.accuracy {
            r.push("accuracy", a);
        }
        if let Some(a) = self.agreement {
            r.push("agreement", a);
        }
        if let Some(s) = self.states {
            r.push("states", s);
        }
        if let Some(a) = self.arcs {
            r.push("arcs", a);
        }
        if let Some(t) = self.build_time {
            r.push("build_seconds", format!("{t:.3}"));
        }
        if let Some(w) = self.words_per_sec {
            r.push("words_per_sec", format!("{w:.0}"));
        }
        for (n, p) in &self.histogram {
            r.push(format!("results_{n}"), p);
        }
        r
    }
}

/// Word forms of sampled corpora: the class name, except `[UNKNOWN]`
/// which is not listed in [`class_lexicon`].
pub fn class_word(m: &HmmModel, c: crate::hmm::ClassId) -> &str {
    &m.class(c).name
}

/// Lexicon that maps each class word form back to its class.
pub fn class_lexicon(m: &HmmModel) -> TagMap {
    m.classes()
        .iter()
        .filter(|c| !c.is_unknown())
        .map(|c| (c.name.clone(), c.members.iter().map(|&t| m.tag_name(t).to_owned()).collect()))
        .collect()
}

/// Draws exactly `n_tokens` tokens from the model.
///
/// Each sentence starts from `π` and follows `a`; each token's class is drawn
/// from `b(·|t)` and written as its class word form. A sentence ends after
/// `end_tag` when the model has it (or after [`MAX_SAMPLED_SENTENCE`] tokens),
/// otherwise after a length drawn uniformly from [`SAMPLE_LENGTHS`]. The last
/// sentence is cut at `n_tokens`.
pub fn sample_corpus(m: &HmmModel, n_tokens: usize, seed: u64, end_tag: &str) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = WeightedIndex::new(m.tags().map(|t| m.pi(t))).expect("pi is a distribution");
    let trans: Vec<WeightedIndex<f64>> = m
        .tags()
        .map(|u| WeightedIndex::new(m.tags().map(|t| m.a(u, t))).expect("row of a is a distribution"))
        .collect();
    let emit: Vec<WeightedIndex<f64>> = m
        .tags()
        .map(|t| WeightedIndex::new(m.class_ids().map(|c| m.b(c, t))).expect("column of b is a distribution"))
        .collect();
    let end = m.tag_id(end_tag);
    let mut sentences = Vec::new();
    let mut left = n_tokens;
    while left > 0 {
        let target = match end {
            Some(_) => MAX_SAMPLED_SENTENCE,
            None => rng.gen_range(SAMPLE_LENGTHS),
        }
        .min(left);
        let mut s = Vec::with_capacity(target);
        let mut t = TagId(pi.sample(&mut rng) as u32);
        loop {
            let c = crate::hmm::ClassId(emit[t.index()].sample(&mut rng) as u32);
            s.push(Token::new(class_word(m, c), m.tag_name(t)));
            if s.len() == target || Some(t) == end {
                break;
            }
            t = TagId(trans[t.index()].sample(&mut rng) as u32);
        }
        left -= s.len();
        sentences.push(s);
    }
    Corpus::new(sentences)
}
