//! Relational composition `R .o. Q`.
//!
//! Epsilon moves are sequenced by a two-state filter: between two matching
//! moves, all moves of `R` alone (`x:eps`) come before all moves of `Q` alone
//! (`eps:y`). Every path of the naive product has exactly one representative,
//! so no redundant epsilon paths are generated.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use super::{Arc, Budget, Fst, Result, StateId};
use crate::symbols::SymbolId;

/// `r .o. q`.
pub fn compose(r: &Fst, q: &Fst) -> Result<Fst> {
    compose_within(r, q, &Budget::UNLIMITED)
}

pub fn compose_within(r: &Fst, q: &Fst, budget: &Budget) -> Result<Fst> {
    r.check_compatible(q)?;
    // Filter state 0: anything allowed; 1: `q` has moved alone, so `r` may not.
    type Key = (StateId, StateId, u8);
    let mut ids: HashMap<Key, StateId> = HashMap::new();
    let mut keys: Vec<Key> = vec![(r.initial, q.initial, 0)];
    ids.insert(keys[0], 0);
    let mut states: Vec<Vec<Arc>> = Vec::new();
    let mut finals = Vec::new();

    let mut intern = |key: Key, keys: &mut Vec<Key>| -> Result<StateId> {
        match ids.entry(key) {
            Entry::Occupied(e) => Ok(*e.get()),
            Entry::Vacant(e) => {
                let id = keys.len() as StateId;
                e.insert(id);
                keys.push(key);
                budget.check("compose", keys.len())?;
                Ok(id)
            }
        }
    };

    let mut next = 0;
    while next < keys.len() {
        let (p, s, filter) = keys[next];
        next += 1;
        finals.push(r.is_final(p) && q.is_final(s));
        let mut out = Vec::new();
        for a in r.arcs_from(p) {
            if a.lower.is_epsilon() {
                if filter == 0 {
                    let id = intern((a.dst, s, 0), &mut keys)?;
                    out.push(Arc::new(a.upper, SymbolId::EPSILON, id));
                }
                continue;
            }
            for b in q.arcs_with_upper(s, a.lower) {
                let id = intern((a.dst, b.dst, 0), &mut keys)?;
                out.push(Arc::new(a.upper, b.lower, id));
            }
        }
        for b in q.arcs_with_upper(s, SymbolId::EPSILON) {
            let id = intern((p, b.dst, 1), &mut keys)?;
            out.push(Arc::new(SymbolId::EPSILON, b.lower, id));
        }
        states.push(out);
    }
    Ok(r.with_states(states, finals, 0).trim())
}
