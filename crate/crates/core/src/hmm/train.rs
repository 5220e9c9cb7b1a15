//! Supervised estimation with additive smoothing.

use std::collections::{BTreeSet, HashMap};

use log::warn;

use super::{class_name, valid_tag_name, HmmError, HmmModel, Result, TagId, UNKNOWN_CLASS};
use crate::corpus::Corpus;
use crate::lexicon::{GuesserConfig, LexiconSources, TagSet};

pub const DEFAULT_SMOOTHING: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Added to every transition count and every admissible emission count.
    pub smoothing: f64,
    /// Which words count as rare when estimating guessed classes.
    pub guesser: GuesserConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { smoothing: DEFAULT_SMOOTHING, guesser: GuesserConfig::default() }
    }
}

fn normalize_row(counts: &[f64], lambda: f64, admissible: impl Fn(usize) -> bool) -> Vec<f64> {
    let smoothed: Vec<f64> =
        counts.iter().enumerate().map(|(i, &c)| if admissible(i) { c + lambda } else { 0.0 }).collect();
    let total: f64 = smoothed.iter().sum();
    if total > 0.0 {
        smoothed.iter().map(|&c| c / total).collect()
    } else {
        let n = (0..counts.len()).filter(|&i| admissible(i)).count() as f64;
        (0..counts.len()).map(|i| if admissible(i) { 1.0 / n } else { 0.0 }).collect()
    }
}

/// Estimates a model from a tagged corpus.
///
/// Classes are the tag sets of `sources` (lexicon words and guesser
/// suffixes) plus `[UNKNOWN]`. Every token adds to the emission count of its
/// word's class. Tokens of words seen once also count towards `[UNKNOWN]`,
/// and tokens of rare words towards the class of their longest known suffix,
/// so both fallbacks get estimates from the words they stand in for. Tags
/// that occur only in `sources` are dropped.
pub fn train(corpus: &Corpus, sources: &LexiconSources, cfg: &TrainConfig) -> Result<HmmModel> {
    if corpus.is_empty() {
        return Err(HmmError::EmptyCorpus);
    }
    if !(cfg.smoothing >= 0.0 && cfg.smoothing.is_finite()) {
        return Err(HmmError::Invalid(format!("smoothing must be a non-negative number, got {}", cfg.smoothing)));
    }
    let observed: TagSet = corpus.tokens().map(|t| t.tag.clone()).collect();
    if let Some(bad) = observed.iter().find(|t| !valid_tag_name(t)) {
        return Err(HmmError::Invalid(format!("bad tag name `{bad}`")));
    }
    for t in sources.all_tags().difference(&observed) {
        warn!("tag `{t}` never occurs in the training corpus; dropping it");
    }
    let sources = sources.restricted(&observed);
    let tags: Vec<String> = observed.into_iter().collect();
    let n = tags.len();
    let tag_id: HashMap<&str, TagId> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), TagId(i as u32))).collect();
    let ids = |set: &TagSet| -> Vec<TagId> { set.iter().map(|t| tag_id[t.as_str()]).collect() };

    let member_sets: BTreeSet<Vec<TagId>> =
        sources.words.values().chain(sources.suffixes.values()).map(ids).collect();
    let mut classes: Vec<(String, Vec<TagId>)> = member_sets
        .into_iter()
        .map(|m| (class_name(&m.iter().map(|t| tags[t.index()].as_str()).collect::<Vec<_>>()), m))
        .collect();
    let class_of: HashMap<Vec<TagId>, usize> = classes.iter().enumerate().map(|(i, (_, m))| (m.clone(), i)).collect();
    let unknown = classes.len();
    classes.push((UNKNOWN_CLASS.to_owned(), ids(&sources.unknown)));
    let k = classes.len();

    let mut freq: HashMap<&str, usize> = HashMap::new();
    for tok in corpus.tokens() {
        *freq.entry(&tok.word).or_default() += 1;
    }

    let mut init = vec![0.0; n];
    let mut trans = vec![vec![0.0; n]; n];
    // emit[c][t]
    let mut emit = vec![vec![0.0; n]; k];
    let mut hapax = false;
    let contains = |c: usize, t: TagId| classes[c].1.binary_search(&t).is_ok();
    for sentence in &corpus.sentences {
        init[tag_id[sentence[0].tag.as_str()].index()] += 1.0;
        for pair in sentence.windows(2) {
            trans[tag_id[pair[0].tag.as_str()].index()][tag_id[pair[1].tag.as_str()].index()] += 1.0;
        }
        for tok in sentence {
            let t = tag_id[tok.tag.as_str()];
            let class = match sources.tags_of(&tok.word) {
                Some(set) => class_of[&ids(set)],
                None => unknown,
            };
            if contains(class, t) {
                emit[class][t.index()] += 1.0;
            }
            let f = freq[tok.word.as_str()];
            if f == 1 {
                hapax = true;
                emit[unknown][t.index()] += 1.0;
            }
            if f <= cfg.guesser.max_freq {
                if let Some(set) = sources.guess(&tok.word) {
                    let g = class_of[&ids(set)];
                    if g != class && contains(g, t) {
                        emit[g][t.index()] += 1.0;
                    }
                }
            }
        }
    }
    if !hapax {
        for t in &classes[unknown].1 {
            emit[unknown][t.index()] += 1.0;
        }
    }

    let lambda = cfg.smoothing;
    let pi = normalize_row(&init, lambda, |_| true);
    let a = trans.iter().map(|row| normalize_row(row, lambda, |_| true)).collect();
    let mut b = vec![vec![0.0; n]; k];
    for t in 0..n {
        let column: Vec<f64> = (0..k).map(|c| emit[c][t]).collect();
        let probs = normalize_row(&column, lambda, |c| contains(c, TagId(t as u32)));
        for c in 0..k {
            b[c][t] = probs[c];
        }
    }
    HmmModel::new(tags, classes, pi, a, b)
}
