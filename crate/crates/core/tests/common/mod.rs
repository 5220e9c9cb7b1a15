//! Oracles shared by the integration tests. None of them call the library's
//! algorithms; they only read arcs and probabilities.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use bfst::fst::{Fst, StateId};
use bfst::hmm::{ClassId, HmmModel, TagId};
use bfst::symbols::{parse_marker_name, Side, SymbolId, SymbolKind, SymbolTable, TableRef};
use rand::Rng;

pub type Pair = (Vec<SymbolId>, Vec<SymbolId>);

/// Every `(upper, lower)` pair of strings of length at most `max_len` on each
/// side, found by breadth-first search over `(state, upper, lower)`.
pub fn relation(f: &Fst, max_len: usize) -> BTreeSet<Pair> {
    let mut seen: HashSet<(StateId, Vec<SymbolId>, Vec<SymbolId>)> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut out = BTreeSet::new();
    let start = (f.initial(), vec![], vec![]);
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((q, up, low)) = queue.pop_front() {
        if f.is_final(q) {
            out.insert((up.clone(), low.clone()));
        }
        for a in f.arcs_from(q) {
            let mut u = up.clone();
            let mut l = low.clone();
            if !a.upper.is_epsilon() {
                u.push(a.upper);
            }
            if !a.lower.is_epsilon() {
                l.push(a.lower);
            }
            if u.len() > max_len || l.len() > max_len {
                continue;
            }
            let next = (a.dst, u, l);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    out
}

/// Upper-side strings of an acceptor, up to `max_len`.
pub fn language(f: &Fst, max_len: usize) -> BTreeSet<Vec<SymbolId>> {
    relation(f, max_len).into_iter().map(|(u, _)| u).collect()
}

/// Outputs for `input` among pairs up to `max_len`.
pub fn outputs(rel: &BTreeSet<Pair>, input: &[SymbolId]) -> BTreeSet<Vec<SymbolId>> {
    rel.iter().filter(|(u, _)| u == input).map(|(_, l)| l.clone()).collect()
}

/// All strings over `sigma` of length `0..=max_len`.
pub fn strings(sigma: &[SymbolId], max_len: usize) -> Vec<Vec<SymbolId>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<SymbolId>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for &c in sigma {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// All class sequences of length `1..=max_len`.
pub fn class_sequences(m: &HmmModel, max_len: usize) -> Vec<Vec<ClassId>> {
    let ids: Vec<SymbolId> = (0..m.num_classes() as u32).map(SymbolId).collect();
    strings(&ids, max_len).into_iter().skip(1).map(|s| s.into_iter().map(|x| ClassId(x.0)).collect()).collect()
}

/// A random FST over `sigma` with `n` states. Acceptors get identity arcs;
/// otherwise each side may be epsilon with probability `eps`.
pub fn random_fst<R: Rng>(
    rng: &mut R,
    table: &TableRef,
    sigma: &[SymbolId],
    n: usize,
    arcs: usize,
    acceptor: bool,
    eps: f64,
) -> Fst {
    let mut list = Vec::new();
    for _ in 0..arcs {
        let src = rng.gen_range(0..n) as StateId;
        let dst = rng.gen_range(0..n) as StateId;
        let pick = |rng: &mut R| {
            if rng.gen_bool(eps) {
                SymbolId::EPSILON
            } else {
                sigma[rng.gen_range(0..sigma.len())]
            }
        };
        let (u, l) = if acceptor {
            let s = pick(rng);
            (s, s)
        } else {
            (pick(rng), pick(rng))
        };
        list.push((src, dst, u, l));
    }
    let finals: Vec<StateId> = (0..n as StateId).filter(|_| rng.gen_bool(0.4)).collect();
    Fst::from_parts(table.clone(), n, 0, finals, list).unwrap()
}

/// Joint log probability, summed left to right in floating point.
pub fn joint(m: &HmmModel, classes: &[ClassId], tags: &[TagId]) -> f64 {
    let mut lp = m.pi(tags[0]).ln() + m.b(classes[0], tags[0]).ln();
    for i in 1..tags.len() {
        lp += m.a(tags[i - 1], tags[i]).ln() + m.b(classes[i], tags[i]).ln();
    }
    lp
}

/// Every tag sequence consistent with the classes.
pub fn tag_paths(m: &HmmModel, classes: &[ClassId]) -> Vec<Vec<TagId>> {
    let mut paths = vec![vec![]];
    for &c in classes {
        let mut next = Vec::new();
        for p in &paths {
            for &t in &m.class(c).members {
                let mut q: Vec<TagId> = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        paths = next;
    }
    paths
}

/// Best score over all paths, and every path within `tol` of it.
pub fn brute_force_best(m: &HmmModel, classes: &[ClassId], tol: f64) -> (f64, Vec<Vec<TagId>>) {
    let scored: Vec<(f64, Vec<TagId>)> = tag_paths(m, classes).into_iter().map(|p| (joint(m, classes, &p), p)).collect();
    let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    (best, scored.into_iter().filter(|s| s.0 >= best - tol).map(|s| s.1).collect())
}

pub fn tag_string(tags: &[TagId]) -> Vec<SymbolId> {
    tags.iter().map(|&t| bfst::btype::tag_symbol(t)).collect()
}

pub fn class_string(m: &HmmModel, classes: &[ClassId]) -> Vec<SymbolId> {
    classes.iter().map(|&c| bfst::btype::class_symbol(m, c)).collect()
}

/// A model given by rows; classes named from their members.
pub fn model(tags: &[&str], classes: &[&[usize]], pi: &[f64], a: &[&[f64]], b: &[&[f64]]) -> HmmModel {
    let cls = classes
        .iter()
        .map(|members| {
            let names: Vec<&str> = members.iter().map(|&i| tags[i]).collect();
            (bfst::hmm::class_name(&names), members.iter().map(|&i| TagId(i as u32)).collect())
        })
        .collect();
    HmmModel::new(
        tags.iter().map(|s| s.to_string()).collect(),
        cls,
        pi.to_vec(),
        a.iter().map(|r| r.to_vec()).collect(),
        b.iter().map(|r| r.to_vec()).collect(),
    )
    .unwrap()
}

/// Every tag admissible everywhere: uniform π and a, and each tag spread
/// evenly over the classes containing it.
pub fn uniform_model(tags: &[&str], classes: &[&[usize]]) -> HmmModel {
    let named: Vec<(String, &[usize])> = classes
        .iter()
        .map(|&members| (bfst::hmm::class_name(&members.iter().map(|&i| tags[i]).collect::<Vec<_>>()), members))
        .collect();
    uniform_model_named(tags, &named)
}

/// [`uniform_model`] with explicit class names, e.g. for `[UNKNOWN]`.
pub fn uniform_model_named<S: AsRef<str>>(tags: &[&str], classes: &[(S, &[usize])]) -> HmmModel {
    let n = tags.len();
    let holders: Vec<usize> = (0..n).map(|t| classes.iter().filter(|c| c.1.contains(&t)).count()).collect();
    HmmModel::new(
        tags.iter().map(|s| s.to_string()).collect(),
        classes.iter().map(|(name, m)| (name.as_ref().to_owned(), m.iter().map(|&i| TagId(i as u32)).collect())).collect(),
        vec![1.0 / n as f64; n],
        vec![vec![1.0 / n as f64; n]; n],
        classes
            .iter()
            .map(|c| (0..n).map(|t| if c.1.contains(&t) { 1.0 / holders[t] as f64 } else { 0.0 }).collect())
            .collect(),
    )
    .unwrap()
}

/// What a marker's base is, for [`markers_hold`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    Tag,
    Class,
    Boundary,
}

/// Checks markers one by one, by scanning: `X-Bk` needs the k-th symbol of
/// X's kind to its left to be X, `<#>-Bk` needs exactly k−1 tags to its
/// left, and the `A` forms look right. Only markers whose base satisfies
/// `which` are checked.
pub fn markers_hold(table: &SymbolTable, s: &[SymbolId], which: impl Fn(Base) -> bool) -> bool {
    for (i, &m) in s.iter().enumerate() {
        if !table.is_marker(m) {
            continue;
        }
        let (base, side, k) = parse_marker_name(table.name(m)).expect("marker name");
        let base_id = table.lookup(base).expect("marker base");
        let kind = if base_id == SymbolId::BOUNDARY {
            Base::Boundary
        } else if table.kind(base_id) == SymbolKind::Tag {
            Base::Tag
        } else {
            Base::Class
        };
        if !which(kind) {
            continue;
        }
        let counted = if kind == Base::Class { SymbolKind::Class } else { SymbolKind::Tag };
        let side_symbols: Vec<SymbolId> = match side {
            Side::Back => s[..i].iter().rev().copied().filter(|&x| table.kind(x) == counted).collect(),
            Side::Ahead => s[i + 1..].iter().copied().filter(|&x| table.kind(x) == counted).collect(),
        };
        let ok = match kind {
            Base::Boundary => side_symbols.len() == k as usize - 1,
            _ => side_symbols.get(k as usize - 1) == Some(&base_id),
        };
        if !ok {
            return false;
        }
    }
    true
}
