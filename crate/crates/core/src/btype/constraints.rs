//! Marker constraints.
//!
//! A marker `X-Bk` asserts that the k-th symbol of X's kind to its left is X;
//! `<#>-Bk` asserts that exactly `k−1` tags precede it. `X-Ak` and `<#>-Ak`
//! mirror this to the right. Each constraint is written as a regular
//! expression with complement, term complement, power and concatenation:
//!
//! ```text
//! X-Bk    ~[ ~[ ?* X [\K]* [K [\K]*]^(k-1) ] X-Bk ?* ]
//! <#>-Bk  ~[ ~[ [\T]* [T [\T]*]^(k-1) ] <#>-Bk ?* ]
//! X-Ak    ~[ ?* X-Ak ~[ [\K]* [K [\K]*]^(k-1) X ?* ] ]
//! <#>-Ak  ~[ ?* <#>-Ak ~[ [\T]* [T [\T]*]^(k-1) ] ]
//! ```
//!
//! where K is the set of tags or of classes and T the set of tags.

use std::fmt;

use super::{BTypeConfig, CompileError, Result, Stage};
use crate::fst::{concat, intersect_within, term_complement_set, Budget, Fst, FstError};
use crate::hmm::HmmModel;
use crate::symbols::{marker_name, Side, SymbolId, SymbolKind, SymbolTable, TableRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Tag,
    Class,
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub side: Side,
    /// Distance `|δ| ≥ 1`.
    pub distance: usize,
    pub symbol: SymbolId,
}

impl ConstraintSpec {
    /// Signed distance: negative looking back.
    pub fn delta(&self) -> i64 {
        match self.side {
            Side::Back => -(self.distance as i64),
            Side::Ahead => self.distance as i64,
        }
    }

    pub fn marker_name(&self, table: &SymbolTable) -> String {
        marker_name(table.name(self.symbol), self.side, self.distance as u32)
    }

    /// Checks the symbol kind and that the distance is one the configuration
    /// uses: tags only at the outer edge, classes strictly inside, the
    /// boundary anywhere.
    pub fn validate(&self, table: &SymbolTable, cfg: &BTypeConfig) -> Result<()> {
        let len = match self.side {
            Side::Back => cfg.beta,
            Side::Ahead => cfg.alpha,
        };
        let k = self.distance;
        let (want, ok) = match self.kind {
            ConstraintKind::Tag => (SymbolKind::Tag, k >= 1 && k == len),
            ConstraintKind::Class => (SymbolKind::Class, k >= 1 && k < len),
            ConstraintKind::Boundary => (SymbolKind::Boundary, k >= 1 && k <= len),
        };
        if !table.contains(self.symbol) || table.kind(self.symbol) != want {
            return Err(CompileError::InvalidSpec(format!("{self:?}: symbol is not a {}", want.as_str())));
        }
        if !ok {
            return Err(CompileError::InvalidSpec(format!(
                "{:?} constraint at distance {} with beta={} alpha={}",
                self.kind,
                self.delta(),
                cfg.beta,
                cfg.alpha
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@{}", self.kind, self.delta())
    }
}

/// Every constraint the configuration calls for, over the model's symbols.
pub fn constraint_specs(m: &HmmModel, cfg: &BTypeConfig) -> Vec<ConstraintSpec> {
    let tags: Vec<SymbolId> = m.tags().map(super::tag_symbol).collect();
    let classes: Vec<SymbolId> = m.class_ids().map(|c| super::class_symbol(m, c)).collect();
    let mut out = Vec::new();
    for (side, len) in [(Side::Back, cfg.beta), (Side::Ahead, cfg.alpha)] {
        if len == 0 {
            continue;
        }
        for &t in &tags {
            out.push(ConstraintSpec { kind: ConstraintKind::Tag, side, distance: len, symbol: t });
        }
        for k in 1..len {
            for &c in &classes {
                out.push(ConstraintSpec { kind: ConstraintKind::Class, side, distance: k, symbol: c });
            }
        }
        for k in 1..=len {
            out.push(ConstraintSpec { kind: ConstraintKind::Boundary, side, distance: k, symbol: SymbolId::BOUNDARY });
        }
    }
    out
}

fn single(table: &TableRef, s: SymbolId) -> Fst {
    Fst::string(table.clone(), &[s]).expect("symbol from table")
}

fn cat(parts: &[&Fst]) -> Fst {
    let mut acc = parts[0].clone();
    for p in &parts[1..] {
        acc = concat(&acc, p).expect("same table");
    }
    acc
}

/// The acceptor of one constraint over the table's closed alphabet.
pub fn build_constraint(spec: &ConstraintSpec, table: &TableRef, budget: &Budget) -> Result<Fst> {
    build(spec, table, budget).map_err(CompileError::at(Stage::Constraints))
}

fn build(spec: &ConstraintSpec, table: &TableRef, budget: &Budget) -> Result<Fst, FstError> {
    let counted = match spec.kind {
        ConstraintKind::Class => SymbolKind::Class,
        ConstraintKind::Tag | ConstraintKind::Boundary => SymbolKind::Tag,
    };
    let k_set = table.ids_of_kind(counted);
    let k = spec.distance;
    let marker = table
        .marker(spec.symbol, spec.side, k as u32)
        .ok_or_else(|| FstError::UnknownName(spec.marker_name(table)))?;

    let any_star = Fst::sigma_star(table.clone());
    let others_star = term_complement_set(table, &k_set)?.star();
    let one_more = concat(&Fst::symbol_set(table.clone(), &k_set)?, &others_star)?;
    // [\K]* [K [\K]*]^(k-1)
    let gap = concat(&others_star, &one_more.power(k - 1))?;
    let x = single(table, spec.symbol);
    let m = single(table, marker);
    let complement = |f: &Fst| f.complement_within(budget);

    let fst = match (spec.kind, spec.side) {
        (ConstraintKind::Boundary, Side::Back) => complement(&cat(&[&complement(&gap)?, &m, &any_star]))?,
        (_, Side::Back) => {
            let allowed = cat(&[&any_star, &x, &gap]);
            complement(&cat(&[&complement(&allowed)?, &m, &any_star]))?
        }
        (ConstraintKind::Boundary, Side::Ahead) => complement(&cat(&[&any_star, &m, &complement(&gap)?]))?,
        (_, Side::Ahead) => {
            let allowed = cat(&[&gap, &x, &any_star]);
            complement(&cat(&[&any_star, &m, &complement(&allowed)?]))?
        }
    };
    fst.normalize_within(budget)
}

/// The intersected tag, class and boundary constraints.
#[derive(Clone, Debug)]
pub struct Constraints {
    pub tags: Fst,
    pub classes: Fst,
    pub boundary: Fst,
}

impl Constraints {
    pub fn num_states(&self) -> usize {
        self.tags.num_states() + self.classes.num_states() + self.boundary.num_states()
    }

    pub fn num_arcs(&self) -> usize {
        self.tags.num_arcs() + self.classes.num_arcs() + self.boundary.num_arcs()
    }
}

/// `R_t`, `R_c` and `R_#`: each the intersection of its constraints, or `?*`
/// when there are none.
pub fn combine_constraints(m: &HmmModel, cfg: &BTypeConfig, table: &TableRef) -> Result<Constraints> {
    let budget = cfg.budget();
    let at = CompileError::at(Stage::Constraints);
    let specs = constraint_specs(m, cfg);
    let meet = |kind: ConstraintKind| -> Result<Fst> {
        let mut acc: Option<Fst> = None;
        for spec in specs.iter().filter(|s| s.kind == kind) {
            spec.validate(table, cfg)?;
            let r = build_constraint(spec, table, &budget)?;
            acc = Some(match acc {
                None => r,
                Some(a) => intersect_within(&a, &r, &budget).map_err(&at)?.normalize_within(&budget).map_err(&at)?,
            });
        }
        Ok(acc.unwrap_or_else(|| Fst::sigma_star(table.clone())))
    };
    Ok(Constraints {
        tags: meet(ConstraintKind::Tag)?,
        classes: meet(ConstraintKind::Class)?,
        boundary: meet(ConstraintKind::Boundary)?,
    })
}
