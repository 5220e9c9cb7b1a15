//! Context windows around a center class and their probabilities.

use super::viterbi::decode;
use super::{AmbiguityClass, ClassId, HmmError, HmmModel, Result, Score, TagId};

/// What bounds a window on one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    /// A selected tag just outside the window.
    Tag(TagId),
    /// The sentence edge.
    Boundary,
    /// No context on this side (length 0).
    None,
}

/// `left back… center ahead… right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BTypeSequence {
    pub left: Context,
    /// Nearest class last.
    pub back: Vec<ClassId>,
    pub center: ClassId,
    /// Nearest class first.
    pub ahead: Vec<ClassId>,
    pub right: Context,
}

impl BTypeSequence {
    /// The classes whose tags are chosen inside the window, left to right.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut v = Vec::with_capacity(self.back.len() + 1 + self.ahead.len());
        v.extend_from_slice(&self.back);
        v.push(self.center);
        v.extend_from_slice(&self.ahead);
        v
    }

    pub fn center_index(&self) -> usize {
        self.back.len()
    }

    fn check(&self, m: &HmmModel) -> Result<()> {
        for c in self.classes() {
            m.check_class(c)?;
        }
        for ctx in [self.left, self.right] {
            if let Context::Tag(t) = ctx {
                m.check_tag(t)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TaggedBTypeSequence {
    pub source: BTypeSequence,
    pub chosen: TagId,
    /// Best tags for [`BTypeSequence::classes`]; kept for diagnostics.
    pub context_tags: Vec<TagId>,
}

fn start_score(m: &HmmModel, left: Context, t: TagId) -> f64 {
    match left {
        Context::Tag(u) => m.log_a(u, t),
        Context::Boundary => m.log_pi(t),
        Context::None => 0.0,
    }
}

fn end_score(m: &HmmModel, right: Context, t: TagId) -> f64 {
    match right {
        Context::Tag(v) => m.log_a(t, v),
        Context::Boundary | Context::None => 0.0,
    }
}

fn start_fixed(m: &HmmModel, left: Context, t: TagId) -> Score {
    match left {
        Context::Tag(u) => m.score_a(u, t),
        Context::Boundary => m.score_pi(t),
        Context::None => 0,
    }
}

fn end_fixed(m: &HmmModel, right: Context, t: TagId) -> Score {
    match right {
        Context::Tag(v) => m.score_a(t, v),
        Context::Boundary | Context::None => 0,
    }
}

/// Log probability of a window under a given assignment of its inner tags:
/// `p_start · p_middle · p_end`, where the start factor is `a(t|u)` after a
/// selected tag, `π(t)` after a boundary and 1 with no look-back, and the end
/// factor is `a(v|t)` before a selected tag and 1 otherwise.
pub fn btype_logprob(m: &HmmModel, s: &BTypeSequence, tags: &[TagId]) -> Result<f64> {
    s.check(m)?;
    let classes = s.classes();
    if classes.len() != tags.len() {
        return Err(HmmError::LengthMismatch { classes: classes.len(), tags: tags.len() });
    }
    for (i, (&c, &t)) in classes.iter().zip(tags).enumerate() {
        m.check_tag(t)?;
        if !m.class(c).contains(t) {
            return Err(HmmError::TagNotInClass {
                position: i,
                tag: m.tag_name(t).to_owned(),
                class: m.class(c).name.clone(),
            });
        }
    }
    let mut lp = start_score(m, s.left, tags[0]) + m.log_b(classes[0], tags[0]);
    for i in 1..tags.len() {
        lp += m.log_a(tags[i - 1], tags[i]) + m.log_b(classes[i], tags[i]);
    }
    Ok(lp + end_score(m, s.right, tags[tags.len() - 1]))
}

/// Assigns the center class its tag from the best-scoring window assignment,
/// decoded like [`super::viterbi`] with the same tie-break.
pub fn disambiguate(m: &HmmModel, s: &BTypeSequence) -> Result<TaggedBTypeSequence> {
    s.check(m)?;
    let classes = s.classes();
    let first: &AmbiguityClass = m.class(classes[0]);
    let init = first
        .members
        .iter()
        .map(|&t| start_fixed(m, s.left, t).saturating_add(m.score_b(classes[0], t)))
        .collect();
    let right = s.right;
    let end = move |t: TagId| end_fixed(m, right, t);
    let (_, tags) = decode(m, init, &classes, Some(&end));
    Ok(TaggedBTypeSequence { source: s.clone(), chosen: tags[s.center_index()], context_tags: tags })
}
