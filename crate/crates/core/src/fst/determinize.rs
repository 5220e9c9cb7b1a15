//! Epsilon removal, subset construction and minimization.
//!
//! Transducers are treated as acceptors over label pairs: `eps:eps` is the
//! only epsilon, while `a:eps` and `eps:b` are ordinary pair symbols. This
//! preserves the pair-string language and therefore the relation.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use super::{Arc, Budget, Fst, Result, StateId};

impl Fst {
    /// Epsilon-free, pair-deterministic, minimal and canonically numbered.
    pub fn normalize(&self) -> Fst {
        self.normalize_within(&Budget::UNLIMITED)
            .expect("unlimited budget cannot be exceeded")
    }

    pub fn normalize_within(&self, budget: &Budget) -> Result<Fst> {
        let dfa = self.determinize_within(budget)?;
        Ok(dfa.minimize())
    }

    /// Subset construction with epsilon closure.
    pub fn determinize_within(&self, budget: &Budget) -> Result<Fst> {
        if self.is_deterministic() {
            return Ok(self.clone());
        }
        let mut closer = Closure::new(self.num_states());
        let mut start = vec![self.initial];
        closer.close(self, &mut start);

        let mut ids: HashMap<Box<[StateId]>, StateId> = HashMap::new();
        let mut subsets: Vec<Box<[StateId]>> = Vec::new();
        let start: Box<[StateId]> = start.into();
        ids.insert(start.clone(), 0);
        subsets.push(start);

        let mut states: Vec<Vec<Arc>> = Vec::new();
        let mut finals = Vec::new();
        let mut moves: Vec<(super::SymbolId, super::SymbolId, StateId)> = Vec::new();
        let mut next = 0usize;
        while next < subsets.len() {
            let subset = subsets[next].clone();
            next += 1;
            finals.push(subset.iter().any(|&q| self.is_final(q)));
            moves.clear();
            for &q in subset.iter() {
                for a in self.arcs_from(q) {
                    if !a.is_epsilon() {
                        moves.push((a.upper, a.lower, a.dst));
                    }
                }
            }
            moves.sort_unstable();
            let mut out = Vec::new();
            let mut i = 0;
            while i < moves.len() {
                let (u, l, _) = moves[i];
                let mut target = Vec::new();
                while i < moves.len() && moves[i].0 == u && moves[i].1 == l {
                    if target.last() != Some(&moves[i].2) {
                        target.push(moves[i].2);
                    }
                    i += 1;
                }
                closer.close(self, &mut target);
                let key: Box<[StateId]> = target.into();
                let id = match ids.entry(key) {
                    Entry::Occupied(e) => *e.get(),
                    Entry::Vacant(e) => {
                        let id = subsets.len() as StateId;
                        subsets.push(e.key().clone());
                        e.insert(id);
                        budget.check("determinize", subsets.len())?;
                        id
                    }
                };
                out.push(Arc::new(u, l, id));
            }
            states.push(out);
        }
        Ok(self.with_states(states, finals, 0))
    }

    /// States that are reachable from the initial state and can reach a final one.
    pub(crate) fn live_states(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut reach = vec![false; n];
        let mut stack = vec![self.initial];
        reach[self.initial as usize] = true;
        while let Some(q) = stack.pop() {
            for a in self.arcs_from(q) {
                if !reach[a.dst as usize] {
                    reach[a.dst as usize] = true;
                    stack.push(a.dst);
                }
            }
        }
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (src, a) in self.arcs() {
            rev[a.dst as usize].push(src);
        }
        let mut coreach = vec![false; n];
        let mut stack: Vec<StateId> = self.finals().collect();
        for &f in &stack {
            coreach[f as usize] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &rev[q as usize] {
                if !coreach[p as usize] {
                    coreach[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        reach.iter().zip(&coreach).map(|(&a, &b)| a && b).collect()
    }

    /// Removes useless states. The initial state is always kept.
    pub fn trim(&self) -> Fst {
        let live = self.live_states();
        if !live[self.initial as usize] {
            return Fst::empty(self.table.clone());
        }
        if live.iter().all(|&x| x) {
            return self.clone();
        }
        let mut map = vec![StateId::MAX; self.num_states()];
        let mut next = 0;
        for (q, &l) in live.iter().enumerate() {
            if l {
                map[q] = next;
                next += 1;
            }
        }
        let mut states = vec![Vec::new(); next as usize];
        let mut finals = vec![false; next as usize];
        for (q, &l) in live.iter().enumerate() {
            if !l {
                continue;
            }
            let nq = map[q] as usize;
            finals[nq] = self.finals[q];
            states[nq] = self.states[q]
                .iter()
                .filter(|a| live[a.dst as usize])
                .map(|a| Arc::new(a.upper, a.lower, map[a.dst as usize]))
                .collect();
        }
        self.with_states(states, finals, map[self.initial as usize])
    }

    /// Moore-style partition refinement on a trimmed deterministic FST,
    /// followed by breadth-first canonical renumbering.
    fn minimize(&self) -> Fst {
        debug_assert!(self.is_deterministic());
        let dfa = self.trim();
        let n = dfa.num_states();
        let mut class: Vec<u32> = dfa.finals.iter().map(|&f| f as u32).collect();
        let mut num_classes = {
            let has_final = dfa.finals.iter().any(|&f| f);
            let has_nonfinal = dfa.finals.iter().any(|&f| !f);
            has_final as usize + has_nonfinal as usize
        };
        let mut sig: Vec<u32> = Vec::new();
        loop {
            let mut table: HashMap<Vec<u32>, u32> = HashMap::with_capacity(n);
            let mut next_class = vec![0u32; n];
            for q in 0..n {
                sig.clear();
                sig.push(class[q]);
                for a in &dfa.states[q] {
                    sig.push(a.upper.0);
                    sig.push(a.lower.0);
                    sig.push(class[a.dst as usize]);
                }
                let len = table.len() as u32;
                next_class[q] = *table.entry(sig.clone()).or_insert(len);
            }
            let count = table.len();
            class = next_class;
            if count == num_classes {
                break;
            }
            num_classes = count;
        }

        // Canonical BFS numbering over the quotient.
        let mut order = vec![u32::MAX; num_classes];
        let mut rep = vec![usize::MAX; num_classes];
        for q in 0..n {
            if rep[class[q] as usize] == usize::MAX {
                rep[class[q] as usize] = q;
            }
        }
        let mut queue = VecDeque::new();
        let start = class[dfa.initial as usize];
        order[start as usize] = 0;
        queue.push_back(start);
        let mut visited = vec![start];
        let mut next = 1u32;
        while let Some(c) = queue.pop_front() {
            for a in &dfa.states[rep[c as usize]] {
                let d = class[a.dst as usize];
                if order[d as usize] == u32::MAX {
                    order[d as usize] = next;
                    next += 1;
                    queue.push_back(d);
                    visited.push(d);
                }
            }
        }
        let mut states = vec![Vec::new(); visited.len()];
        let mut finals = vec![false; visited.len()];
        for &c in &visited {
            let q = rep[c as usize];
            let nc = order[c as usize] as usize;
            finals[nc] = dfa.finals[q];
            states[nc] = dfa.states[q]
                .iter()
                .map(|a| Arc::new(a.upper, a.lower, order[class[a.dst as usize] as usize]))
                .collect();
        }
        dfa.with_states(states, finals, 0)
    }
}

/// Reusable epsilon-closure helper with a generation-stamped visited set.
pub(crate) struct Closure {
    stamp: Vec<u32>,
    generation: u32,
    stack: Vec<StateId>,
}

impl Closure {
    pub(crate) fn new(n: usize) -> Self {
        Closure { stamp: vec![0; n], generation: 0, stack: Vec::new() }
    }

    /// Extends `set` with everything reachable over `eps:eps` arcs; the result
    /// is sorted and duplicate-free.
    pub(crate) fn close(&mut self, fst: &Fst, set: &mut Vec<StateId>) {
        self.generation += 1;
        let g = self.generation;
        self.stack.clear();
        let mut out = Vec::with_capacity(set.len());
        for &q in set.iter() {
            if self.stamp[q as usize] != g {
                self.stamp[q as usize] = g;
                self.stack.push(q);
                out.push(q);
            }
        }
        while let Some(q) = self.stack.pop() {
            for a in fst.arcs_from(q) {
                // Arcs are sorted with epsilon first.
                if !a.upper.is_epsilon() {
                    break;
                }
                if a.lower.is_epsilon() && self.stamp[a.dst as usize] != g {
                    self.stamp[a.dst as usize] = g;
                    self.stack.push(a.dst);
                    out.push(a.dst);
                }
            }
        }
        out.sort_unstable();
        *set = out;
    }
}
