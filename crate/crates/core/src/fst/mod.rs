//! Unweighted finite-state transducers and the regular-expression calculus
//! the b-type construction is written in.
//!
//! An [`Fst`] is a set of states with arcs labelled by `upper:lower` symbol
//! pairs. Acceptors are transducers whose arcs all carry identity pairs.
//! Arcs leaving a state are kept sorted by `(upper, lower, dst)`, which is the
//! order [`Fst::apply`] explores when it reports a "first" result.

mod apply;
mod compose;
mod determinize;
mod ops;
mod text;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use thiserror::Error;

use crate::symbols::{SymbolError, SymbolId, SymbolKind, SymbolTable, TableRef};

pub use apply::{ApplyMode, ApplyOutput, DEFAULT_OUTPUT_LIMIT};
pub use compose::{compose, compose_within};
pub use ops::{
    concat, intersect, intersect_within, term_complement, term_complement_set, union, union_all,
};

pub type StateId = u32;

/// One transition. Field order gives the canonical arc order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub upper: SymbolId,
    pub lower: SymbolId,
    pub dst: StateId,
}

impl Arc {
    pub fn new(upper: SymbolId, lower: SymbolId, dst: StateId) -> Self {
        Arc { upper, lower, dst }
    }

    #[inline]
    pub(crate) fn is_epsilon(&self) -> bool {
        self.upper.is_epsilon() && self.lower.is_epsilon()
    }

    #[inline]
    pub(crate) fn label(&self) -> (SymbolId, SymbolId) {
        (self.upper, self.lower)
    }
}

/// Upper bound on the states an operation may create.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_states: usize,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget { max_states: usize::MAX };

    pub fn states(max_states: usize) -> Self {
        Budget { max_states }
    }

    #[inline]
    pub(crate) fn check(&self, op: &'static str, states: usize) -> Result<(), FstError> {
        if states > self.max_states {
            Err(FstError::BudgetExceeded { op, states, limit: self.max_states })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::UNLIMITED
    }
}

#[derive(Debug, Error)]
pub enum FstError {
    #[error("symbol {0} is not in the symbol table")]
    UnknownSymbol(SymbolId),
    #[error("unknown symbol name `{0}`")]
    UnknownName(String),
    #[error("operands use different symbol tables")]
    IncompatibleTables,
    #[error("{0} requires an acceptor")]
    NotAcceptor(&'static str),
    #[error("symbol `{0}` is reserved and cannot be used here")]
    ReservedSymbol(String),
    #[error("symbol `{0}` is not a marker")]
    NotMarker(String),
    #[error("state {state} out of range ({num_states} states)")]
    BadState { state: StateId, num_states: usize },
    #[error("{op} exceeded the state budget: {states} states > {limit}")]
    BudgetExceeded { op: &'static str, states: usize, limit: usize },
    #[error("output limit of {limit} results exceeded")]
    LimitExceeded { limit: usize },
    #[error("input may not contain epsilon or the wildcard")]
    ReservedInput,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FstError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Props {
    /// Every arc is an identity pair.
    pub acceptor: bool,
    /// No arc has epsilon on both sides.
    pub no_epsilon_pairs: bool,
    /// No arc has epsilon on the upper side.
    pub no_upper_epsilon: bool,
    /// No arc has epsilon on the lower side.
    pub no_lower_epsilon: bool,
    /// No state has two arcs with the same label pair.
    pub pair_deterministic: bool,
}

#[derive(Clone, Debug)]
pub struct Fst {
    table: TableRef,
    states: Vec<Vec<Arc>>,
    finals: Vec<bool>,
    initial: StateId,
    props: OnceLock<Props>,
}

impl Fst {
    /// Checked constructor from an arc list `(src, dst, upper, lower)`.
    pub fn from_parts(
        table: TableRef,
        num_states: usize,
        initial: StateId,
        finals: impl IntoIterator<Item = StateId>,
        arcs: impl IntoIterator<Item = (StateId, StateId, SymbolId, SymbolId)>,
    ) -> Result<Fst> {
        let check_state = |s: StateId| {
            if (s as usize) < num_states {
                Ok(())
            } else {
                Err(FstError::BadState { state: s, num_states })
            }
        };
        check_state(initial)?;
        let mut states = vec![Vec::new(); num_states];
        for (src, dst, upper, lower) in arcs {
            check_state(src)?;
            check_state(dst)?;
            for sym in [upper, lower] {
                if !table.contains(sym) {
                    return Err(FstError::UnknownSymbol(sym));
                }
                if sym == SymbolId::ANY {
                    return Err(FstError::ReservedSymbol(table.name(sym).to_owned()));
                }
            }
            states[src as usize].push(Arc::new(upper, lower, dst));
        }
        let mut fin = vec![false; num_states];
        for f in finals {
            check_state(f)?;
            fin[f as usize] = true;
        }
        Ok(Fst::build(table, states, fin, initial))
    }

    /// Unchecked constructor used by the algorithms; sorts and dedups arcs.
    pub(crate) fn build(
        table: TableRef,
        mut states: Vec<Vec<Arc>>,
        finals: Vec<bool>,
        initial: StateId,
    ) -> Fst {
        debug_assert_eq!(states.len(), finals.len());
        debug_assert!((initial as usize) < states.len());
        for arcs in &mut states {
            arcs.sort_unstable();
            arcs.dedup();
        }
        Fst { table, states, finals, initial, props: OnceLock::new() }
    }

    /// The FST of the empty language: one non-final state.
    pub fn empty(table: TableRef) -> Fst {
        Fst::build(table, vec![Vec::new()], vec![false], 0)
    }

    /// Accepts only the empty string.
    pub fn epsilon(table: TableRef) -> Fst {
        Fst::build(table, vec![Vec::new()], vec![true], 0)
    }

    /// A single path spelling `pairs`: `len + 1` states and `len` arcs.
    pub fn linear(table: TableRef, pairs: &[(SymbolId, SymbolId)]) -> Result<Fst> {
        let n = pairs.len();
        Fst::from_parts(
            table,
            n + 1,
            0,
            [n as StateId],
            pairs
                .iter()
                .enumerate()
                .map(|(i, &(u, l))| (i as StateId, i as StateId + 1, u, l)),
        )
    }

    /// Identity acceptor of the given symbol string.
    pub fn string(table: TableRef, symbols: &[SymbolId]) -> Result<Fst> {
        let pairs: Vec<_> = symbols.iter().map(|&s| (s, s)).collect();
        Fst::linear(table, &pairs)
    }

    /// Deterministic union of pair strings, shaped as a prefix tree.
    pub fn prefix_tree(table: TableRef, strings: &[Vec<(SymbolId, SymbolId)>]) -> Result<Fst> {
        let mut states: Vec<Vec<Arc>> = vec![Vec::new()];
        let mut finals = vec![false];
        for s in strings {
            let mut q = 0usize;
            for &(u, l) in s {
                for sym in [u, l] {
                    if !table.contains(sym) {
                        return Err(FstError::UnknownSymbol(sym));
                    }
                    if sym == SymbolId::ANY {
                        return Err(FstError::ReservedSymbol(table.name(sym).to_owned()));
                    }
                }
                q = match states[q].iter().find(|a| a.upper == u && a.lower == l) {
                    Some(a) => a.dst as usize,
                    None => {
                        let dst = states.len();
                        states.push(Vec::new());
                        finals.push(false);
                        states[q].push(Arc::new(u, l, dst as StateId));
                        dst
                    }
                };
            }
            finals[q] = true;
        }
        Ok(Fst::build(table, states, finals, 0))
    }

    /// Acceptor of exactly one symbol from `set` (each symbol once).
    pub fn symbol_set(table: TableRef, set: &[SymbolId]) -> Result<Fst> {
        Fst::from_parts(table, 2, 0, [1], set.iter().map(|&s| (0, 1, s, s)))
    }

    /// The `?` wildcard expanded against the closed alphabet.
    pub fn any(table: TableRef) -> Fst {
        let sigma = table.sigma();
        let arcs = sigma.into_iter().map(|s| Arc::new(s, s, 1)).collect();
        Fst::build(table, vec![arcs, Vec::new()], vec![false, true], 0)
    }

    /// `?*`: every string over Σ, as a one-state DFA.
    pub fn sigma_star(table: TableRef) -> Fst {
        let arcs = table.sigma().into_iter().map(|s| Arc::new(s, s, 0)).collect();
        Fst::build(table, vec![arcs], vec![true], 0)
    }

    /// Identity relation over Σ*.
    pub fn identity(table: TableRef) -> Fst {
        Fst::sigma_star(table)
    }

    pub fn table(&self) -> &TableRef {
        &self.table
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, state: StateId) -> bool {
        self.finals[state as usize]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i as StateId)
    }

    /// Outgoing arcs of `state`, in canonical order.
    pub fn arcs_from(&self, state: StateId) -> &[Arc] {
        &self.states[state as usize]
    }

    /// All arcs as `(src, arc)` in canonical order.
    pub fn arcs(&self) -> impl Iterator<Item = (StateId, &Arc)> + '_ {
        self.states
            .iter()
            .enumerate()
            .flat_map(|(s, arcs)| arcs.iter().map(move |a| (s as StateId, a)))
    }

    /// Arcs of `state` whose upper symbol is `upper`.
    pub(crate) fn arcs_with_upper(&self, state: StateId, upper: SymbolId) -> &[Arc] {
        let arcs = &self.states[state as usize];
        let lo = arcs.partition_point(|a| a.upper < upper);
        let hi = lo + arcs[lo..].partition_point(|a| a.upper == upper);
        &arcs[lo..hi]
    }

    pub(crate) fn props(&self) -> Props {
        *self.props.get_or_init(|| {
            let mut p = Props {
                acceptor: true,
                no_epsilon_pairs: true,
                no_upper_epsilon: true,
                no_lower_epsilon: true,
                pair_deterministic: true,
            };
            for arcs in &self.states {
                for (i, a) in arcs.iter().enumerate() {
                    p.acceptor &= a.upper == a.lower;
                    p.no_epsilon_pairs &= !a.is_epsilon();
                    p.no_upper_epsilon &= !a.upper.is_epsilon();
                    p.no_lower_epsilon &= !a.lower.is_epsilon();
                    if i > 0 && arcs[i - 1].label() == a.label() {
                        p.pair_deterministic = false;
                    }
                }
            }
            p
        })
    }

    pub fn is_acceptor(&self) -> bool {
        self.props().acceptor
    }

    /// Epsilon-free and deterministic over label pairs.
    pub fn is_deterministic(&self) -> bool {
        let p = self.props();
        p.no_epsilon_pairs && p.pair_deterministic
    }

    pub(crate) fn same_table(&self, other: &Fst) -> bool {
        std::sync::Arc::ptr_eq(&self.table, &other.table) || *self.table == *other.table
    }

    pub(crate) fn check_compatible(&self, other: &Fst) -> Result<()> {
        if self.same_table(other) {
            Ok(())
        } else {
            Err(FstError::IncompatibleTables)
        }
    }

    /// Symbols that occur on any arc, either side, excluding epsilon.
    pub fn used_symbols(&self) -> BTreeSet<SymbolId> {
        self.arcs()
            .flat_map(|(_, a)| [a.upper, a.lower])
            .filter(|s| !s.is_epsilon())
            .collect()
    }

    /// Resolves names against this FST's table.
    pub fn symbols_of(&self, names: &[&str]) -> Result<Vec<SymbolId>> {
        names
            .iter()
            .map(|n| self.table.lookup(n).ok_or_else(|| FstError::UnknownName((*n).to_owned())))
            .collect()
    }

    /// Arc-for-arc equality (same numbering), not language equality.
    pub fn structurally_equal(&self, other: &Fst) -> bool {
        self.same_table(other)
            && self.initial == other.initial
            && self.finals == other.finals
            && self.states == other.states
    }

    /// Language (pair-string) equality, decided by comparing canonical minimal
    /// forms.
    pub fn equivalent(&self, other: &Fst) -> bool {
        self.same_table(other) && self.normalize().structurally_equal(&other.normalize())
    }

    /// Whether the pair string `(input[i], output[i])` aligned symbol by symbol
    /// with optional epsilon moves is accepted, i.e. `output ∈ apply(input)`.
    pub fn transduces(&self, input: &[SymbolId], output: &[SymbolId]) -> bool {
        let p = self.props();
        if p.pair_deterministic && p.no_upper_epsilon && p.no_lower_epsilon {
            if input.len() != output.len() {
                return false;
            }
            let mut q = self.initial;
            for (&i, &o) in input.iter().zip(output) {
                let arcs = self.arcs_with_upper(q, i);
                match arcs.binary_search_by(|a| a.lower.cmp(&o)) {
                    Ok(k) => q = arcs[k].dst,
                    Err(_) => return false,
                }
            }
            return self.is_final(q);
        }
        apply::transduces_general(self, input, output)
    }

    /// The same transducer over another table, matching symbols by name.
    pub fn with_table(&self, table: TableRef) -> Result<Fst> {
        let mut map = vec![None; self.table.len()];
        map[SymbolId::EPSILON.index()] = Some(SymbolId::EPSILON);
        for s in self.used_symbols() {
            let name = self.table.name(s);
            let id = table.lookup(name).ok_or_else(|| FstError::UnknownName(name.to_owned()))?;
            if table.kind(id) != self.table.kind(s) {
                return Err(FstError::UnknownName(name.to_owned()));
            }
            map[s.index()] = Some(id);
        }
        let states = self
            .states
            .iter()
            .map(|arcs| {
                arcs.iter()
                    .map(|a| Arc::new(map[a.upper.index()].unwrap(), map[a.lower.index()].unwrap(), a.dst))
                    .collect()
            })
            .collect();
        Ok(Fst::build(table, states, self.finals.clone(), self.initial))
    }

    /// Builds a new table-compatible FST from parts owned by the caller.
    pub(crate) fn with_states(&self, states: Vec<Vec<Arc>>, finals: Vec<bool>, initial: StateId) -> Fst {
        Fst::build(self.table.clone(), states, finals, initial)
    }
}

impl PartialEq for Fst {
    fn eq(&self, other: &Self) -> bool {
        self.structurally_equal(other)
    }
}

/// Convenience for tests and examples: a table with the given tags, frozen.
pub fn table_with(tags: &[&str], classes: &[&str]) -> Result<TableRef> {
    let mut t = SymbolTable::new();
    for tag in tags {
        t.insert(tag, SymbolKind::Tag)?;
    }
    for class in classes {
        t.insert(class, SymbolKind::Class)?;
    }
    Ok(t.into_shared())
}
