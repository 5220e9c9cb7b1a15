//! Compiles an HMM into an unweighted transducer from disambiguated context
//! windows.
//!
//! Every window `left back… center ahead… right` is tagged at its center and
//! spelled as a linear FST in which the context survives only as marker
//! symbols (`X-Bk`, `X-Ak`). The star of their union allows any sequence of
//! blocks; composing with the marker constraints keeps exactly the sequences
//! in which every marker agrees with the neighbouring blocks. Deleting the
//! markers leaves a transducer from class strings to tag strings.

mod constraints;
mod enumerate;

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use log::debug;
use rayon::prelude::*;
use thiserror::Error;

use crate::fst::{compose_within, Budget, Fst, FstError};
use crate::hmm::{disambiguate, ClassId, Context, HmmError, HmmModel, TagId, TaggedBTypeSequence};
use crate::symbols::{Side, SymbolId, SymbolKind, SymbolTable, TableRef};

pub use constraints::{build_constraint, combine_constraints, constraint_specs, ConstraintKind, ConstraintSpec, Constraints};
pub use enumerate::{count_bsequences, enumerate_bsequences};

pub const DEFAULT_MAX_STATES: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BTypeConfig {
    /// Look-back length.
    pub beta: usize,
    /// Look-ahead length.
    pub alpha: usize,
    /// Largest intermediate automaton any stage may build.
    pub max_states: usize,
}

impl BTypeConfig {
    pub fn new(beta: usize, alpha: usize) -> Self {
        BTypeConfig { beta, alpha, max_states: DEFAULT_MAX_STATES }
    }

    pub fn with_max_states(self, max_states: usize) -> Self {
        BTypeConfig { max_states, ..self }
    }

    fn budget(&self) -> Budget {
        Budget::states(self.max_states)
    }
}

/// Construction stages, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Enumerate,
    Disambiguate,
    Preliminary,
    Constraints,
    Enforce,
    Strip,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Enumerate => "enumerate",
            Stage::Disambiguate => "disambiguate",
            Stage::Preliminary => "preliminary model",
            Stage::Constraints => "constraints",
            Stage::Enforce => "enforce constraints",
            Stage::Strip => "strip markers",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("not computable: stage `{stage}` needs {states} states, budget is {limit}")]
    NotComputable { stage: Stage, states: usize, limit: usize },
    #[error("invalid constraint: {0}")]
    InvalidSpec(String),
    #[error("stage `{stage}`: {source}")]
    Fst { stage: Stage, source: FstError },
    #[error(transparent)]
    Hmm(#[from] HmmError),
}

impl CompileError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            CompileError::NotComputable { stage, .. } | CompileError::Fst { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    pub(crate) fn at(stage: Stage) -> impl Fn(FstError) -> CompileError {
        move |e| match e {
            FstError::BudgetExceeded { states, limit, .. } => CompileError::NotComputable { stage, states, limit },
            source => CompileError::Fst { stage, source },
        }
    }
}

pub type Result<T, E = CompileError> = std::result::Result<T, E>;

/// The symbols of a model: tags in id order, then classes in id order.
pub fn model_table(m: &HmmModel) -> SymbolTable {
    let mut t = SymbolTable::new();
    for name in m.tag_names() {
        t.insert(name, SymbolKind::Tag).expect("tag names are validated by the model");
    }
    for c in m.classes() {
        t.insert(&c.name, SymbolKind::Class).expect("class names are validated by the model");
    }
    t
}

/// Symbol of tag `t` in a table from [`model_table`] or [`compile_table`].
pub fn tag_symbol(t: TagId) -> SymbolId {
    SymbolId(3 + t.0)
}

/// Symbol of class `c` in a table from [`model_table`] or [`compile_table`].
pub fn class_symbol(m: &HmmModel, c: ClassId) -> SymbolId {
    SymbolId(3 + m.num_tags() as u32 + c.0)
}

/// [`model_table`] plus every marker the configuration can use, frozen.
pub fn compile_table(m: &HmmModel, cfg: &BTypeConfig) -> TableRef {
    let mut t = model_table(m);
    for spec in constraint_specs(m, cfg) {
        let name = spec.marker_name(&t);
        t.insert(&name, SymbolKind::Marker).expect("marker bases are in the table");
    }
    t.into_shared()
}

/// Marker for `base` at distance `k` on `side`.
fn marker(table: &SymbolTable, base: SymbolId, side: Side, k: usize) -> SymbolId {
    table.marker(base, side, k as u32).expect("compile_table registers every marker")
}

/// Pair string of a tagged window: look-back markers outermost first, the
/// center `class:tag`, then look-ahead markers nearest first.
pub fn sequence_pairs(m: &HmmModel, table: &SymbolTable, t: &TaggedBTypeSequence) -> Vec<(SymbolId, SymbolId)> {
    let s = &t.source;
    let mut out = Vec::with_capacity(s.back.len() + s.ahead.len() + 3);
    let id = |x: SymbolId| (x, x);
    let outer_back = s.back.len() + 1;
    match s.left {
        Context::Tag(u) => out.push(id(marker(table, tag_symbol(u), Side::Back, outer_back))),
        Context::Boundary => out.push(id(marker(table, SymbolId::BOUNDARY, Side::Back, outer_back))),
        Context::None => {}
    }
    for (i, &c) in s.back.iter().enumerate() {
        out.push(id(marker(table, class_symbol(m, c), Side::Back, s.back.len() - i)));
    }
    out.push((class_symbol(m, s.center), tag_symbol(t.chosen)));
    for (i, &c) in s.ahead.iter().enumerate() {
        out.push(id(marker(table, class_symbol(m, c), Side::Ahead, i + 1)));
    }
    let outer_ahead = s.ahead.len() + 1;
    match s.right {
        Context::Tag(v) => out.push(id(marker(table, tag_symbol(v), Side::Ahead, outer_ahead))),
        Context::Boundary => out.push(id(marker(table, SymbolId::BOUNDARY, Side::Ahead, outer_ahead))),
        Context::None => {}
    }
    out
}

/// Linear FST of one tagged window.
pub fn sequence_fst(m: &HmmModel, table: &TableRef, t: &TaggedBTypeSequence) -> Fst {
    Fst::linear(table.clone(), &sequence_pairs(m, table, t)).expect("symbols come from the table")
}

/// `[∪ B]*`, normalized.
pub fn preliminary_model(table: &TableRef, pair_strings: &[Vec<(SymbolId, SymbolId)>], budget: &Budget) -> Result<Fst> {
    let at = CompileError::at(Stage::Preliminary);
    let mut sorted: Vec<&Vec<(SymbolId, SymbolId)>> = pair_strings.iter().collect();
    sorted.sort();
    sorted.dedup();
    let total: usize = sorted.iter().map(|p| p.len() + 1).sum();
    budget.check("union", total).map_err(&at)?;
    let owned: Vec<Vec<(SymbolId, SymbolId)>> = sorted.into_iter().cloned().collect();
    let union = Fst::prefix_tree(table.clone(), &owned).map_err(&at)?.normalize_within(budget).map_err(&at)?;
    union.star().normalize_within(budget).map_err(at)
}

/// `R_c .o. B' .o. R_t .o. R_#`, normalizing after each composition.
pub fn enforce(b_prime: &Fst, r: &Constraints, budget: &Budget) -> Result<Fst> {
    let at = CompileError::at(Stage::Enforce);
    let x = compose_within(&r.classes, b_prime, budget).map_err(&at)?.normalize_within(budget).map_err(&at)?;
    let x = compose_within(&x, &r.tags, budget).map_err(&at)?.normalize_within(budget).map_err(&at)?;
    compose_within(&x, &r.boundary, budget).map_err(&at)?.normalize_within(budget).map_err(at)
}

fn markers(table: &TableRef) -> BTreeSet<SymbolId> {
    table.ids_of_kind(SymbolKind::Marker).into_iter().collect()
}

/// Deletes every marker by overwriting it with epsilon in place, then
/// normalizes.
pub fn strip_markers(b2: &Fst, budget: &Budget) -> Result<Fst> {
    let at = CompileError::at(Stage::Strip);
    b2.rewrite_to_epsilon(&markers(b2.table())).map_err(&at)?.normalize_within(budget).map_err(at)
}

/// `D_r`: identity on every non-marker symbol, markers deleted.
pub fn marker_deleter(table: &TableRef) -> Fst {
    let arcs = table.sigma().into_iter().map(|s| {
        let lower = if table.is_marker(s) { SymbolId::EPSILON } else { s };
        (0, 0, s, lower)
    });
    Fst::from_parts(table.clone(), 1, 0, [0], arcs).expect("symbols come from the table")
}

/// Marker deletion by composition, `D_r.i .o. B'' .o. D_r`. Slower than
/// [`strip_markers`] and kept as a cross-check.
pub fn strip_markers_by_composition(b2: &Fst, budget: &Budget) -> Result<Fst> {
    let at = CompileError::at(Stage::Strip);
    let d = marker_deleter(b2.table());
    let x = compose_within(&d.invert(), b2, budget).map_err(&at)?;
    compose_within(&x, &d, budget).map_err(&at)?.normalize_within(budget).map_err(at)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub stage: Stage,
    pub states: usize,
    pub arcs: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildReport {
    pub beta: usize,
    pub alpha: usize,
    pub sequences: usize,
    pub stages: Vec<StageReport>,
    pub states: usize,
    pub arcs: usize,
    pub elapsed: Duration,
}

/// Everything the construction produced, for inspection and tests.
#[derive(Clone, Debug)]
pub struct Compiled {
    /// The final transducer, over [`model_table`].
    pub fst: Fst,
    /// `B''` before marker deletion, over [`compile_table`].
    pub enforced: Fst,
    pub report: BuildReport,
}

pub fn compile_btype(m: &HmmModel, cfg: &BTypeConfig) -> Result<Fst> {
    Ok(compile_btype_detailed(m, cfg)?.fst)
}

pub fn compile_btype_detailed(m: &HmmModel, cfg: &BTypeConfig) -> Result<Compiled> {
    let budget = cfg.budget();
    let start = Instant::now();
    let mut stages = Vec::new();
    let mut mark = |stage: Stage, states: usize, arcs: usize, t: Instant| {
        let elapsed = t.elapsed();
        debug!("{stage}: {states} states, {arcs} arcs, {elapsed:?}");
        stages.push(StageReport { stage, states, arcs, elapsed });
    };

    let t = Instant::now();
    let count = count_bsequences(m, cfg);
    if count > cfg.max_states as u128 {
        return Err(CompileError::NotComputable {
            stage: Stage::Enumerate,
            states: count.min(usize::MAX as u128) as usize,
            limit: cfg.max_states,
        });
    }
    let seqs: Vec<_> = enumerate_bsequences(m, cfg)?.collect();
    mark(Stage::Enumerate, seqs.len(), 0, t);

    let t = Instant::now();
    let table = compile_table(m, cfg);
    let pairs: Vec<Vec<(SymbolId, SymbolId)>> = seqs
        .par_iter()
        .map(|s| disambiguate(m, s).map(|tagged| sequence_pairs(m, &table, &tagged)))
        .collect::<std::result::Result<_, _>>()?;
    mark(Stage::Disambiguate, pairs.len(), 0, t);

    let t = Instant::now();
    let b1 = preliminary_model(&table, &pairs, &budget)?;
    mark(Stage::Preliminary, b1.num_states(), b1.num_arcs(), t);

    let t = Instant::now();
    let r = combine_constraints(m, cfg, &table)?;
    mark(Stage::Constraints, r.num_states(), r.num_arcs(), t);

    let t = Instant::now();
    let b2 = enforce(&b1, &r, &budget)?;
    mark(Stage::Enforce, b2.num_states(), b2.num_arcs(), t);

    let t = Instant::now();
    let stripped = strip_markers(&b2, &budget)?;
    let fst = stripped
        .with_table(model_table(m).into_shared())
        .map_err(CompileError::at(Stage::Strip))?
        .normalize();
    mark(Stage::Strip, fst.num_states(), fst.num_arcs(), t);

    let report = BuildReport {
        beta: cfg.beta,
        alpha: cfg.alpha,
        sequences: seqs.len(),
        states: fst.num_states(),
        arcs: fst.num_arcs(),
        stages,
        elapsed: start.elapsed(),
    };
    Ok(Compiled { fst, enforced: b2, report })
}
