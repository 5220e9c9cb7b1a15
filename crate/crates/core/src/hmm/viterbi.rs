use super::{ClassId, HmmError, HmmModel, Result, Score, TagId};

/// Most likely tag sequence for a class sequence.
///
/// Candidates at each position are the members of its class. When scores tie,
/// the lowest tag id wins, both for backpointers and for the final state.
pub fn viterbi(m: &HmmModel, classes: &[ClassId]) -> Result<Vec<TagId>> {
    if classes.is_empty() {
        return Err(HmmError::EmptySequence);
    }
    for &c in classes {
        m.check_class(c)?;
    }
    let first = classes[0];
    let init: Vec<Score> =
        m.class(first).members.iter().map(|&t| m.score_pi(t).saturating_add(m.score_b(first, t))).collect();
    Ok(decode(m, init, classes, None).1)
}

/// Trellis search shared by sentence decoding and window disambiguation.
///
/// `init` scores the members of `classes[0]`; `end`, if given, is added to the
/// final column per tag. Returns the best score and its tag sequence. All
/// scores are at most 0, so saturating at `Score::MIN` keeps log 0 absorbing.
pub(crate) fn decode(
    m: &HmmModel,
    init: Vec<Score>,
    classes: &[ClassId],
    end: Option<&dyn Fn(TagId) -> Score>,
) -> (Score, Vec<TagId>) {
    let mut scores = init;
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(classes.len());
    for i in 1..classes.len() {
        let prev = &m.class(classes[i - 1]).members;
        let cur = &m.class(classes[i]).members;
        let mut next = Vec::with_capacity(cur.len());
        let mut bp = Vec::with_capacity(cur.len());
        for &t in cur {
            let mut best = Score::MIN;
            let mut arg = 0u32;
            for (j, &u) in prev.iter().enumerate() {
                let s = scores[j].saturating_add(m.score_a(u, t));
                if s > best {
                    best = s;
                    arg = j as u32;
                }
            }
            next.push(best.saturating_add(m.score_b(classes[i], t)));
            bp.push(arg);
        }
        scores = next;
        back.push(bp);
    }
    let last = &m.class(*classes.last().unwrap()).members;
    if let Some(end) = end {
        for (s, &t) in scores.iter_mut().zip(last) {
            *s = s.saturating_add(end(t));
        }
    }
    let mut best = Score::MIN;
    let mut arg = 0usize;
    for (j, &s) in scores.iter().enumerate() {
        if s > best {
            best = s;
            arg = j;
        }
    }
    let mut idx = vec![0usize; classes.len()];
    idx[classes.len() - 1] = arg;
    for i in (1..classes.len()).rev() {
        idx[i - 1] = back[i - 1][idx[i]] as usize;
    }
    let tags = idx.iter().zip(classes).map(|(&j, &c)| m.class(c).members[j]).collect();
    (best, tags)
}

/// `log π(t₁) + log b(c₁|t₁) + Σ [log a(tᵢ|tᵢ₋₁) + log b(cᵢ|tᵢ)]`.
pub fn joint_logprob(m: &HmmModel, classes: &[ClassId], tags: &[TagId]) -> Result<f64> {
    if classes.len() != tags.len() {
        return Err(HmmError::LengthMismatch { classes: classes.len(), tags: tags.len() });
    }
    if classes.is_empty() {
        return Err(HmmError::EmptySequence);
    }
    for (&c, &t) in classes.iter().zip(tags) {
        m.check_class(c)?;
        m.check_tag(t)?;
    }
    let mut lp = m.log_pi(tags[0]) + m.log_b(classes[0], tags[0]);
    for i in 1..tags.len() {
        lp += m.log_a(tags[i - 1], tags[i]) + m.log_b(classes[i], tags[i]);
    }
    Ok(lp)
}
