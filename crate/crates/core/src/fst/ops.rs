//! Rational operations: union, concatenation, closure, complement,
//! intersection, inversion and symbol deletion.

use std::collections::{BTreeSet, HashMap};

use super::{Arc, Budget, Fst, FstError, Result, StateId};
use crate::symbols::{SymbolId, SymbolKind, TableRef};

/// Copies `src` into `states`/`finals` with state offset, returning the
/// offset initial state.
fn append(states: &mut Vec<Vec<Arc>>, finals: &mut Vec<bool>, src: &Fst) -> StateId {
    let off = states.len() as StateId;
    for q in 0..src.num_states() as StateId {
        states.push(
            src.arcs_from(q)
                .iter()
                .map(|a| Arc::new(a.upper, a.lower, a.dst + off))
                .collect(),
        );
        finals.push(src.is_final(q));
    }
    src.initial + off
}

fn eps_arc(dst: StateId) -> Arc {
    Arc::new(SymbolId::EPSILON, SymbolId::EPSILON, dst)
}

/// `A ∪ B`.
pub fn union(a: &Fst, b: &Fst) -> Result<Fst> {
    union_all([a, b])
}

/// n-ary union behind a fresh initial state with epsilon arcs.
pub fn union_all<'a>(fsts: impl IntoIterator<Item = &'a Fst>) -> Result<Fst> {
    let mut iter = fsts.into_iter().peekable();
    let table: TableRef = match iter.peek() {
        Some(f) => f.table.clone(),
        None => return Err(FstError::IncompatibleTables),
    };
    let mut states = vec![Vec::new()];
    let mut finals = vec![false];
    let mut starts = Vec::new();
    for f in iter {
        if !(std::sync::Arc::ptr_eq(&table, &f.table) || *table == *f.table) {
            return Err(FstError::IncompatibleTables);
        }
        starts.push(append(&mut states, &mut finals, f));
    }
    states[0] = starts.into_iter().map(eps_arc).collect();
    Ok(Fst::build(table, states, finals, 0))
}

/// `A B`.
pub fn concat(a: &Fst, b: &Fst) -> Result<Fst> {
    a.check_compatible(b)?;
    let mut states = Vec::new();
    let mut finals = Vec::new();
    let ia = append(&mut states, &mut finals, a);
    let a_finals: Vec<usize> = (0..finals.len()).filter(|&q| finals[q]).collect();
    let ib = append(&mut states, &mut finals, b);
    for q in a_finals {
        finals[q] = false;
        states[q].push(eps_arc(ib));
    }
    Ok(a.with_states(states, finals, ia))
}

/// `\a` generalized to a set: the single symbols of Σ not in `excluded`.
pub fn term_complement_set(table: &TableRef, excluded: &[SymbolId]) -> Result<Fst> {
    for &s in excluded {
        if !table.contains(s) {
            return Err(FstError::UnknownSymbol(s));
        }
        if matches!(table.kind(s), SymbolKind::Epsilon | SymbolKind::Any) {
            return Err(FstError::ReservedSymbol(table.name(s).to_owned()));
        }
    }
    let excluded: BTreeSet<_> = excluded.iter().copied().collect();
    let keep: Vec<_> = table.sigma().into_iter().filter(|s| !excluded.contains(s)).collect();
    Fst::symbol_set(table.clone(), &keep)
}

/// `\a`: any single symbol other than `s`.
pub fn term_complement(table: &TableRef, s: SymbolId) -> Result<Fst> {
    term_complement_set(table, &[s])
}

/// `A & B` for acceptors.
pub fn intersect(a: &Fst, b: &Fst) -> Result<Fst> {
    intersect_within(a, b, &Budget::UNLIMITED)
}

pub fn intersect_within(a: &Fst, b: &Fst, budget: &Budget) -> Result<Fst> {
    a.check_compatible(b)?;
    if !a.is_acceptor() || !b.is_acceptor() {
        return Err(FstError::NotAcceptor("intersect"));
    }
    let a = a.determinize_within(budget)?;
    let b = b.determinize_within(budget)?;
    let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = vec![(a.initial, b.initial)];
    ids.insert(pairs[0], 0);
    let mut states = Vec::new();
    let mut finals = Vec::new();
    let mut next = 0;
    while next < pairs.len() {
        let (p, q) = pairs[next];
        next += 1;
        finals.push(a.is_final(p) && b.is_final(q));
        let (xs, ys) = (a.arcs_from(p), b.arcs_from(q));
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        // Both arc lists are sorted by label and deterministic.
        while i < xs.len() && j < ys.len() {
            match xs[i].label().cmp(&ys[j].label()) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let key = (xs[i].dst, ys[j].dst);
                    let id = match ids.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = pairs.len() as StateId;
                            ids.insert(key, id);
                            pairs.push(key);
                            budget.check("intersect", pairs.len())?;
                            id
                        }
                    };
                    out.push(Arc::new(xs[i].upper, xs[i].lower, id));
                    i += 1;
                    j += 1;
                }
            }
        }
        states.push(out);
    }
    Ok(a.with_states(states, finals, 0).trim())
}

impl Fst {
    /// `A*`.
    pub fn star(&self) -> Fst {
        let mut states = vec![Vec::new()];
        let mut finals = vec![true];
        let init = append(&mut states, &mut finals, self);
        states[0].push(eps_arc(init));
        for q in 1..finals.len() {
            if finals[q] {
                finals[q] = false;
                states[q].push(eps_arc(0));
            }
        }
        self.with_states(states, finals, 0)
    }

    /// `A^n`; `A^0` is the empty-string acceptor.
    pub fn power(&self, n: usize) -> Fst {
        let mut acc = Fst::epsilon(self.table.clone());
        for _ in 0..n {
            acc = concat(&acc, self).expect("same table");
        }
        acc
    }

    /// `R.i`: upper and lower swapped on every arc.
    pub fn invert(&self) -> Fst {
        let states = self
            .states
            .iter()
            .map(|arcs| arcs.iter().map(|a| Arc::new(a.lower, a.upper, a.dst)).collect())
            .collect();
        self.with_states(states, self.finals.clone(), self.initial)
    }

    /// `~A` over the closed alphabet Σ of the table.
    pub fn complement(&self) -> Result<Fst> {
        self.complement_within(&Budget::UNLIMITED)
    }

    pub fn complement_within(&self, budget: &Budget) -> Result<Fst> {
        if !self.is_acceptor() {
            return Err(FstError::NotAcceptor("complement"));
        }
        let dfa = self.determinize_within(budget)?;
        let sigma = self.table.sigma();
        let sink = dfa.num_states() as StateId;
        budget.check("complement", dfa.num_states() + 1)?;
        let mut states = Vec::with_capacity(dfa.num_states() + 1);
        for q in 0..dfa.num_states() as StateId {
            let arcs = dfa.arcs_from(q);
            let mut out = Vec::with_capacity(sigma.len());
            let mut i = 0;
            for &s in &sigma {
                while i < arcs.len() && arcs[i].upper < s {
                    i += 1;
                }
                if i < arcs.len() && arcs[i].upper == s {
                    out.push(arcs[i]);
                } else {
                    out.push(Arc::new(s, s, sink));
                }
            }
            states.push(out);
        }
        states.push(sigma.iter().map(|&s| Arc::new(s, s, sink)).collect());
        let mut finals: Vec<bool> = dfa.finals.iter().map(|&f| !f).collect();
        finals.push(true);
        Ok(self.with_states(states, finals, dfa.initial))
    }

    /// Replaces every occurrence of a doomed marker by epsilon, on whichever
    /// side it appears.
    pub fn rewrite_to_epsilon(&self, doomed: &BTreeSet<SymbolId>) -> Result<Fst> {
        for &s in doomed {
            if !self.table.is_marker(s) {
                let name = if self.table.contains(s) {
                    self.table.name(s).to_owned()
                } else {
                    s.to_string()
                };
                return Err(FstError::NotMarker(name));
            }
        }
        if doomed.is_empty() {
            return Ok(self.clone());
        }
        let erase = |s: SymbolId| if doomed.contains(&s) { SymbolId::EPSILON } else { s };
        let states = self
            .states
            .iter()
            .map(|arcs| arcs.iter().map(|a| Arc::new(erase(a.upper), erase(a.lower), a.dst)).collect())
            .collect();
        Ok(self.with_states(states, self.finals.clone(), self.initial))
    }
}
