//! Running a transducer on an input string.
//!
//! The input is intersected with the upper side by walking the product of the
//! FST with the input positions, keeping only nodes that lie on an accepting
//! path. For epsilon-free pair-deterministic FSTs (every normalized b-type
//! transducer) distinct paths carry distinct outputs and the live graph is
//! read directly. Otherwise the projected output automaton is determinized
//! first, so results always have set semantics.

use std::collections::{HashMap, HashSet};

use super::{Arc, Fst, FstError, Result, StateId};
use crate::symbols::{SymbolId, SymbolKind};

/// Default bound on the number of outputs enumerated or counted.
pub const DEFAULT_OUTPUT_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApplyMode {
    /// Lexicographically first output under symbol-id order.
    First,
    /// Every output, in lexicographic order.
    All { limit: usize },
    /// Number of distinct outputs.
    Count { limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApplyOutput {
    First(Option<Vec<SymbolId>>),
    All(Vec<Vec<SymbolId>>),
    Count(usize),
}

/// Live part of the product of an FST with an input string.
struct OutputGraph {
    /// Per node: outgoing `(lower, target)` in lexicographic order.
    edges: Vec<Vec<(SymbolId, u32)>>,
    accepting: Vec<bool>,
    start: u32,
    empty: bool,
}

impl Fst {
    pub fn apply(&self, input: &[SymbolId], mode: ApplyMode) -> Result<ApplyOutput> {
        Ok(match mode {
            ApplyMode::First => ApplyOutput::First(self.apply_first(input)?),
            ApplyMode::All { limit } => ApplyOutput::All(self.apply_all(input, limit)?),
            ApplyMode::Count { limit } => ApplyOutput::Count(self.count_outputs(input, limit)?),
        })
    }

    pub fn apply_first(&self, input: &[SymbolId]) -> Result<Option<Vec<SymbolId>>> {
        let g = self.output_graph(input)?;
        if g.empty {
            return Ok(None);
        }
        let mut node = g.start;
        let mut out = Vec::new();
        // Every live node reaches acceptance, so greedy descent terminates
        // once the graph is acyclic (checked by `output_graph`).
        while !g.accepting[node as usize] {
            let &(sym, next) = g.edges[node as usize].first().expect("live node has an exit");
            if !sym.is_epsilon() {
                out.push(sym);
            }
            node = next;
        }
        Ok(Some(out))
    }

    pub fn apply_all(&self, input: &[SymbolId], limit: usize) -> Result<Vec<Vec<SymbolId>>> {
        let g = self.output_graph(input)?;
        let mut results = Vec::new();
        if g.empty {
            return Ok(results);
        }
        let mut prefix = Vec::new();
        collect(&g, g.start, &mut prefix, &mut results, limit)?;
        Ok(results)
    }

    pub fn count_outputs(&self, input: &[SymbolId], limit: usize) -> Result<usize> {
        let p = self.props();
        if p.pair_deterministic && p.no_upper_epsilon && p.no_lower_epsilon {
            self.check_input(input)?;
            return self.count_paths_forward(input, limit);
        }
        let g = self.output_graph(input)?;
        if g.empty {
            return Ok(0);
        }
        // Paths in the (acyclic) output graph correspond one-to-one with outputs.
        let mut memo = vec![None; g.edges.len()];
        count_paths(&g, g.start, &mut memo, limit)
    }

    /// Accepting paths labelled `input` on the upper side, counted forward.
    /// Only meaningful when distinct paths carry distinct outputs.
    fn count_paths_forward(&self, input: &[SymbolId], limit: usize) -> Result<usize> {
        let n = self.num_states();
        let mut cur = vec![0usize; n];
        let mut next = vec![0usize; n];
        let mut active = vec![self.initial];
        let mut touched = Vec::new();
        cur[self.initial as usize] = 1;
        for &sym in input {
            for &q in &active {
                let c = cur[q as usize];
                for a in self.arcs_with_upper(q, sym) {
                    let slot = &mut next[a.dst as usize];
                    if *slot == 0 {
                        touched.push(a.dst);
                    }
                    *slot = slot.saturating_add(c);
                }
                cur[q as usize] = 0;
            }
            std::mem::swap(&mut cur, &mut next);
            std::mem::swap(&mut active, &mut touched);
            touched.clear();
            if active.is_empty() {
                return Ok(0);
            }
        }
        let total = active
            .iter()
            .filter(|&&q| self.is_final(q))
            .fold(0usize, |acc, &q| acc.saturating_add(cur[q as usize]));
        if total > limit {
            return Err(FstError::LimitExceeded { limit });
        }
        Ok(total)
    }

    fn check_input(&self, input: &[SymbolId]) -> Result<()> {
        for &s in input {
            if !self.table.contains(s) {
                return Err(FstError::UnknownSymbol(s));
            }
            if matches!(self.table.kind(s), SymbolKind::Epsilon | SymbolKind::Any) {
                return Err(FstError::ReservedInput);
            }
        }
        Ok(())
    }

    fn output_graph(&self, input: &[SymbolId]) -> Result<OutputGraph> {
        self.check_input(input)?;
        let n = input.len();
        let mut ids: HashMap<(StateId, usize), u32> = HashMap::new();
        let mut nodes: Vec<(StateId, usize)> = vec![(self.initial, 0)];
        ids.insert((self.initial, 0), 0);
        let mut edges: Vec<Vec<(SymbolId, u32)>> = Vec::new();
        let mut next = 0;
        while next < nodes.len() {
            let (q, pos) = nodes[next];
            next += 1;
            let mut out = Vec::new();
            let mut push = |a: &Arc, npos: usize, nodes: &mut Vec<(StateId, usize)>| {
                let key = (a.dst, npos);
                let id = *ids.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    (nodes.len() - 1) as u32
                });
                out.push((a.lower, id));
            };
            for a in self.arcs_with_upper(q, SymbolId::EPSILON) {
                push(a, pos, &mut nodes);
            }
            if pos < n {
                for a in self.arcs_with_upper(q, input[pos]) {
                    push(a, pos + 1, &mut nodes);
                }
            }
            edges.push(out);
        }
        let accepting: Vec<bool> =
            nodes.iter().map(|&(q, pos)| pos == n && self.is_final(q)).collect();

        // Backward liveness.
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        for (u, out) in edges.iter().enumerate() {
            for &(_, v) in out {
                rev[v as usize].push(u as u32);
            }
        }
        let mut live = accepting.clone();
        let mut stack: Vec<u32> =
            (0..nodes.len() as u32).filter(|&u| accepting[u as usize]).collect();
        while let Some(v) = stack.pop() {
            for &u in &rev[v as usize] {
                if !live[u as usize] {
                    live[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        if !live[0] {
            return Ok(OutputGraph { edges: Vec::new(), accepting: Vec::new(), start: 0, empty: true });
        }
        for out in &mut edges {
            out.retain(|&(_, v)| live[v as usize]);
            out.sort_unstable();
            out.dedup();
        }

        let p = self.props();
        if p.pair_deterministic && p.no_upper_epsilon && p.no_lower_epsilon {
            return Ok(OutputGraph { edges, accepting, start: 0, empty: false });
        }
        self.determinized_output(&nodes, &edges, &accepting, &live)
    }

    /// Projects the live product graph onto the lower side and determinizes
    /// it, so that each remaining path spells a distinct output.
    fn determinized_output(
        &self,
        nodes: &[(StateId, usize)],
        edges: &[Vec<(SymbolId, u32)>],
        accepting: &[bool],
        live: &[bool],
    ) -> Result<OutputGraph> {
        let states: Vec<Vec<Arc>> = (0..nodes.len())
            .map(|u| {
                if !live[u] {
                    return Vec::new();
                }
                edges[u].iter().map(|&(sym, v)| Arc::new(sym, sym, v)).collect()
            })
            .collect();
        let dfa = self.with_states(states, accepting.to_vec(), 0).normalize();
        if has_cycle(&dfa) {
            return Err(FstError::LimitExceeded { limit: DEFAULT_OUTPUT_LIMIT });
        }
        let edges = (0..dfa.num_states() as StateId)
            .map(|q| dfa.arcs_from(q).iter().map(|a| (a.lower, a.dst)).collect())
            .collect();
        let accepting = (0..dfa.num_states() as StateId).map(|q| dfa.is_final(q)).collect();
        Ok(OutputGraph { edges, accepting, start: dfa.initial(), empty: false })
    }
}

fn collect(
    g: &OutputGraph,
    node: u32,
    prefix: &mut Vec<SymbolId>,
    results: &mut Vec<Vec<SymbolId>>,
    limit: usize,
) -> Result<()> {
    if g.accepting[node as usize] {
        if results.len() >= limit {
            return Err(FstError::LimitExceeded { limit });
        }
        results.push(prefix.clone());
    }
    for &(sym, next) in &g.edges[node as usize] {
        let pushed = !sym.is_epsilon();
        if pushed {
            prefix.push(sym);
        }
        collect(g, next, prefix, results, limit)?;
        if pushed {
            prefix.pop();
        }
    }
    Ok(())
}

fn count_paths(g: &OutputGraph, node: u32, memo: &mut Vec<Option<usize>>, limit: usize) -> Result<usize> {
    if let Some(c) = memo[node as usize] {
        return Ok(c);
    }
    let mut total = g.accepting[node as usize] as usize;
    for &(_, next) in &g.edges[node as usize] {
        total = total.saturating_add(count_paths(g, next, memo, limit)?);
    }
    if total > limit {
        return Err(FstError::LimitExceeded { limit });
    }
    memo[node as usize] = Some(total);
    Ok(total)
}

fn has_cycle(fst: &Fst) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done.
    let mut color = vec![0u8; fst.num_states()];
    let mut stack: Vec<(StateId, usize)> = vec![(fst.initial(), 0)];
    color[fst.initial() as usize] = 1;
    while let Some(&mut (q, ref mut i)) = stack.last_mut() {
        let arcs = fst.arcs_from(q);
        if *i < arcs.len() {
            let d = arcs[*i].dst;
            *i += 1;
            match color[d as usize] {
                0 => {
                    color[d as usize] = 1;
                    stack.push((d, 0));
                }
                1 => return true,
                _ => {}
            }
        } else {
            color[q as usize] = 2;
            stack.pop();
        }
    }
    false
}

/// Membership of `(input, output)` in the relation for arbitrary FSTs.
pub(crate) fn transduces_general(fst: &Fst, input: &[SymbolId], output: &[SymbolId]) -> bool {
    let start = (fst.initial(), 0usize, 0usize);
    let mut seen: HashSet<(StateId, usize, usize)> = HashSet::new();
    seen.insert(start);
    let mut stack = vec![start];
    while let Some((q, i, j)) = stack.pop() {
        if i == input.len() && j == output.len() && fst.is_final(q) {
            return true;
        }
        for a in fst.arcs_from(q) {
            let ni = if a.upper.is_epsilon() {
                i
            } else if i < input.len() && input[i] == a.upper {
                i + 1
            } else {
                continue;
            };
            let nj = if a.lower.is_epsilon() {
                j
            } else if j < output.len() && output[j] == a.lower {
                j + 1
            } else {
                continue;
            };
            if seen.insert((a.dst, ni, nj)) {
                stack.push((a.dst, ni, nj));
            }
        }
    }
    false
}
