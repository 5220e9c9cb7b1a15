use super::{BTypeConfig, CompileError, Result, Stage};
use crate::hmm::{BTypeSequence, ClassId, Context, HmmModel};

/// All class strings of length `len`, in lexicographic order.
fn class_strings(m: &HmmModel, len: usize) -> Vec<Vec<ClassId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                m.class_ids().map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// Left contexts: a selected tag beyond `β−1` classes, or the sentence edge
/// beyond `k−1` classes for each `k ≤ β`.
fn left_options(m: &HmmModel, beta: usize) -> Vec<(Context, Vec<ClassId>)> {
    if beta == 0 {
        return vec![(Context::None, Vec::new())];
    }
    let mut out = Vec::new();
    let full = class_strings(m, beta - 1);
    for t in m.tags() {
        out.extend(full.iter().map(|back| (Context::Tag(t), back.clone())));
    }
    for k in 1..=beta {
        out.extend(class_strings(m, k - 1).into_iter().map(|back| (Context::Boundary, back)));
    }
    out
}

fn right_options(m: &HmmModel, alpha: usize) -> Vec<(Vec<ClassId>, Context)> {
    if alpha == 0 {
        return vec![(Vec::new(), Context::None)];
    }
    let mut out = Vec::new();
    let full = class_strings(m, alpha - 1);
    for t in m.tags() {
        out.extend(full.iter().map(|ahead| (ahead.clone(), Context::Tag(t))));
    }
    for k in 1..=alpha {
        out.extend(class_strings(m, k - 1).into_iter().map(|ahead| (ahead, Context::Boundary)));
    }
    out
}

fn side_count(tags: u128, classes: u128, len: usize) -> u128 {
    if len == 0 {
        return 1;
    }
    let pow = |e: usize| classes.saturating_pow(e as u32);
    let edge: u128 = (0..len).map(pow).fold(0u128, u128::saturating_add);
    tags.saturating_mul(pow(len - 1)).saturating_add(edge)
}

/// Number of windows [`enumerate_bsequences`] yields, without building them.
pub fn count_bsequences(m: &HmmModel, cfg: &BTypeConfig) -> u128 {
    let (t, c) = (m.num_tags() as u128, m.num_classes() as u128);
    side_count(t, c, cfg.beta).saturating_mul(c).saturating_mul(side_count(t, c, cfg.alpha))
}

/// Every window for every center class: full-length contexts ending in a
/// selected tag, and each shorter context cut off by the sentence edge.
pub fn enumerate_bsequences<'m>(
    m: &'m HmmModel,
    cfg: &BTypeConfig,
) -> Result<impl Iterator<Item = BTypeSequence> + 'm> {
    let count = count_bsequences(m, cfg);
    if count > cfg.max_states as u128 {
        return Err(CompileError::NotComputable {
            stage: Stage::Enumerate,
            states: count.min(usize::MAX as u128) as usize,
            limit: cfg.max_states,
        });
    }
    let left = left_options(m, cfg.beta);
    let right = right_options(m, cfg.alpha);
    Ok(left.into_iter().flat_map(move |(l, back)| {
        let right = right.clone();
        m.class_ids().flat_map(move |center| {
            let back = back.clone();
            right.clone().into_iter().map(move |(ahead, r)| BTypeSequence {
                left: l,
                back: back.clone(),
                center,
                ahead,
                right: r,
            })
        })
    }))
}
