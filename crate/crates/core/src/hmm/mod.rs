//! First-order HMM over tags, emitting ambiguity classes.
//!
//! Tags and classes are indexed locally ([`TagId`], [`ClassId`]); the symbol
//! table used by the transducers is derived from the model by name. Tags are
//! kept in byte order of their names, so "lowest tag id" is also "first tag
//! name", which keeps tie-breaking independent of insertion order.

mod random;
mod text;
mod train;
mod viterbi;
mod window;

use std::collections::HashMap;

use thiserror::Error;

pub use random::random_model;
pub use train::{train, TrainConfig, DEFAULT_SMOOTHING};
pub use viterbi::{joint_logprob, viterbi};
pub use window::{btype_logprob, disambiguate, BTypeSequence, Context, TaggedBTypeSequence};

pub const UNKNOWN_CLASS: &str = "[UNKNOWN]";

/// Tolerance on probability row sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Decoding compares path scores as fixed-point log probabilities with this
/// many fractional bits. Integer sums do not depend on summation order, so
/// two paths made of the same factors in a different order tie exactly and
/// the tie-break rule decides between them.
pub const SCORE_FRACTION_BITS: u32 = 36;

/// Fixed-point log probability; `Score::MIN` stands for log 0.
pub type Score = i64;

/// `ln p` in fixed point, rounded to nearest.
pub fn quantize(log_p: f64) -> Score {
    if log_p == f64::NEG_INFINITY {
        Score::MIN
    } else {
        (log_p * (1u64 << SCORE_FRACTION_BITS) as f64).round() as Score
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(pub u32);

impl TagId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

impl ClassId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error)]
pub enum HmmError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("empty input sequence")]
    EmptySequence,
    #[error("class {0:?} is not in the model")]
    UnknownClass(ClassId),
    #[error("tag {0:?} is not in the model")]
    UnknownTag(TagId),
    #[error("{classes} classes but {tags} tags")]
    LengthMismatch { classes: usize, tags: usize },
    #[error("position {position}: tag `{tag}` is not a member of class `{class}`")]
    TagNotInClass { position: usize, tag: String, class: String },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HmmError> = std::result::Result<T, E>;

/// A set of tags a word form can bear.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmbiguityClass {
    pub name: String,
    /// Sorted, duplicate-free, non-empty.
    pub members: Vec<TagId>,
}

impl AmbiguityClass {
    pub fn contains(&self, t: TagId) -> bool {
        self.members.binary_search(&t).is_ok()
    }

    pub fn is_unknown(&self) -> bool {
        self.name == UNKNOWN_CLASS
    }
}

/// Canonical class name, e.g. `[NN,VB]`.
pub fn class_name<S: AsRef<str>>(tags: &[S]) -> String {
    let mut s = String::from("[");
    for (i, t) in tags.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(t.as_ref());
    }
    s.push(']');
    s
}

/// Tag names may not contain characters the file formats use as delimiters.
pub fn valid_tag_name(name: &str) -> bool {
    !name.is_empty()
        && !name.chars().any(|c| c.is_whitespace() || matches!(c, ',' | ':' | '[' | ']'))
        && crate::symbols::parse_marker_name(name).is_none()
        && !matches!(name, "<eps>" | "?" | "<#>")
}

#[derive(Clone, Debug)]
pub struct HmmModel {
    tags: Vec<String>,
    classes: Vec<AmbiguityClass>,
    tag_index: HashMap<String, TagId>,
    class_index: HashMap<String, ClassId>,
    by_members: HashMap<Vec<TagId>, ClassId>,
    unknown: Option<ClassId>,
    pi: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    log_pi: Vec<f64>,
    log_a: Vec<f64>,
    log_b: Vec<f64>,
    q_pi: Vec<Score>,
    q_a: Vec<Score>,
    q_b: Vec<Score>,
}

impl HmmModel {
    /// Builds and validates a model.
    ///
    /// `classes` lists member tags by id; `a[i][j]` is `a(j|i)`; `b[c][t]` is
    /// `b(c|t)` and must be zero whenever `t` is not a member of `c`.
    pub fn new(
        tags: Vec<String>,
        classes: Vec<(String, Vec<TagId>)>,
        pi: Vec<f64>,
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
    ) -> Result<HmmModel> {
        let invalid = |msg: String| Err(HmmError::Invalid(msg));
        let n = tags.len();
        if n == 0 {
            return invalid("no tags".into());
        }
        if !tags.windows(2).all(|w| w[0] < w[1]) {
            return invalid("tags must be sorted and unique".into());
        }
        if let Some(t) = tags.iter().find(|t| !valid_tag_name(t)) {
            return invalid(format!("bad tag name `{t}`"));
        }
        let tag_index: HashMap<String, TagId> =
            tags.iter().enumerate().map(|(i, t)| (t.clone(), TagId(i as u32))).collect();

        let mut class_index = HashMap::new();
        let mut by_members = HashMap::new();
        let mut unknown = None;
        let mut out_classes = Vec::with_capacity(classes.len());
        for (i, (name, members)) in classes.into_iter().enumerate() {
            let id = ClassId(i as u32);
            if members.is_empty() || !members.windows(2).all(|w| w[0] < w[1]) {
                return invalid(format!("class `{name}` needs sorted, unique, non-empty members"));
            }
            if members.iter().any(|t| t.index() >= n) {
                return invalid(format!("class `{name}` has an unknown member"));
            }
            if name == UNKNOWN_CLASS {
                if unknown.replace(id).is_some() {
                    return invalid("duplicate [UNKNOWN] class".into());
                }
            } else {
                let canonical = class_name(&members.iter().map(|t| &tags[t.index()]).collect::<Vec<_>>());
                if name != canonical {
                    return invalid(format!("class `{name}` should be named `{canonical}`"));
                }
                if by_members.insert(members.clone(), id).is_some() {
                    return invalid(format!("duplicate class `{name}`"));
                }
            }
            class_index.insert(name.clone(), id);
            out_classes.push(AmbiguityClass { name, members });
        }
        let k = out_classes.len();
        if k == 0 {
            return invalid("no classes".into());
        }

        let prob = |p: f64, what: &str| -> Result<f64> {
            if p.is_finite() && (0.0..=1.0 + SUM_TOLERANCE).contains(&p) {
                Ok(p)
            } else {
                Err(HmmError::Invalid(format!("{what}: {p} is not a probability")))
            }
        };
        let row_sum = |s: f64, what: String| -> Result<()> {
            if (s - 1.0).abs() < SUM_TOLERANCE {
                Ok(())
            } else {
                Err(HmmError::Invalid(format!("{what} sums to {s}")))
            }
        };

        if pi.len() != n {
            return invalid("pi has the wrong length".into());
        }
        for &p in &pi {
            prob(p, "pi")?;
        }
        row_sum(pi.iter().sum(), "pi".into())?;

        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return invalid("transition table has the wrong shape".into());
        }
        for (i, row) in a.iter().enumerate() {
            for &p in row {
                prob(p, "a")?;
            }
            row_sum(row.iter().sum(), format!("transitions from `{}`", tags[i]))?;
        }

        if b.len() != k || b.iter().any(|r| r.len() != n) {
            return invalid("emission table has the wrong shape".into());
        }
        for t in 0..n {
            let mut sum = 0.0;
            for (c, class) in out_classes.iter().enumerate() {
                let p = prob(b[c][t], "b")?;
                if p != 0.0 && !class.contains(TagId(t as u32)) {
                    return invalid(format!("b({}|{}) must be 0", class.name, tags[t]));
                }
                sum += p;
            }
            row_sum(sum, format!("emissions of `{}`", tags[t]))?;
        }

        let flat_a: Vec<f64> = a.into_iter().flatten().collect();
        let flat_b: Vec<f64> = b.into_iter().flatten().collect();
        let ln = |v: &[f64]| v.iter().map(|&p| p.ln()).collect::<Vec<_>>();
        let mut m = HmmModel {
            log_pi: ln(&pi),
            log_a: ln(&flat_a),
            log_b: ln(&flat_b),
            q_pi: Vec::new(),
            q_a: Vec::new(),
            q_b: Vec::new(),
            tags,
            classes: out_classes,
            tag_index,
            class_index,
            by_members,
            unknown,
            pi,
            a: flat_a,
            b: flat_b,
        };
        m.quantize_scores();
        Ok(m)
    }

    fn quantize_scores(&mut self) {
        let q = |v: &[f64]| v.iter().map(|&x| quantize(x)).collect();
        self.q_pi = q(&self.log_pi);
        self.q_a = q(&self.log_a);
        self.q_b = q(&self.log_b);
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn tags(&self) -> impl Iterator<Item = TagId> {
        (0..self.tags.len() as u32).map(TagId)
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.classes.len() as u32).map(ClassId)
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tags
    }

    pub fn tag_name(&self, t: TagId) -> &str {
        &self.tags[t.index()]
    }

    pub fn tag_id(&self, name: &str) -> Option<TagId> {
        self.tag_index.get(name).copied()
    }

    pub fn classes(&self) -> &[AmbiguityClass] {
        &self.classes
    }

    pub fn class(&self, c: ClassId) -> &AmbiguityClass {
        &self.classes[c.index()]
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_index.get(name).copied()
    }

    /// The canonical (non-`[UNKNOWN]`) class with exactly these members.
    pub fn class_with_members(&self, members: &[TagId]) -> Option<ClassId> {
        self.by_members.get(members).copied()
    }

    pub fn unknown_class(&self) -> Option<ClassId> {
        self.unknown
    }

    pub fn check_class(&self, c: ClassId) -> Result<()> {
        if c.index() < self.classes.len() {
            Ok(())
        } else {
            Err(HmmError::UnknownClass(c))
        }
    }

    pub fn check_tag(&self, t: TagId) -> Result<()> {
        if t.index() < self.tags.len() {
            Ok(())
        } else {
            Err(HmmError::UnknownTag(t))
        }
    }

    pub fn pi(&self, t: TagId) -> f64 {
        self.pi[t.index()]
    }

    pub fn a(&self, prev: TagId, next: TagId) -> f64 {
        self.a[prev.index() * self.tags.len() + next.index()]
    }

    pub fn b(&self, c: ClassId, t: TagId) -> f64 {
        self.b[c.index() * self.tags.len() + t.index()]
    }

    #[inline]
    pub fn log_pi(&self, t: TagId) -> f64 {
        self.log_pi[t.index()]
    }

    #[inline]
    pub fn log_a(&self, prev: TagId, next: TagId) -> f64 {
        self.log_a[prev.index() * self.tags.len() + next.index()]
    }

    #[inline]
    pub fn log_b(&self, c: ClassId, t: TagId) -> f64 {
        self.log_b[c.index() * self.tags.len() + t.index()]
    }

    #[inline]
    pub fn score_pi(&self, t: TagId) -> Score {
        self.q_pi[t.index()]
    }

    #[inline]
    pub fn score_a(&self, prev: TagId, next: TagId) -> Score {
        self.q_a[prev.index() * self.tags.len() + next.index()]
    }

    #[inline]
    pub fn score_b(&self, c: ClassId, t: TagId) -> Score {
        self.q_b[c.index() * self.tags.len() + t.index()]
    }

    /// The most likely tag of a class in isolation, `argmax_t b(c|t)`, lowest
    /// tag id on ties.
    pub fn best_emitter(&self, c: ClassId) -> TagId {
        let mut best = self.classes[c.index()].members[0];
        for &t in &self.classes[c.index()].members[1..] {
            if self.score_b(c, t) > self.score_b(c, best) {
                best = t;
            }
        }
        best
    }

    /// Same model with every log value passed through `f`. Used to check that
    /// decoding depends only on the order of scores.
    pub fn map_logs(&self, f: impl Fn(f64) -> f64) -> HmmModel {
        let mut m = self.clone();
        for v in m.log_pi.iter_mut().chain(m.log_a.iter_mut()).chain(m.log_b.iter_mut()) {
            *v = f(*v);
        }
        m.quantize_scores();
        m
    }
}
