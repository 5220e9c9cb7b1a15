//! Interned alphabet shared by every transducer built over one model.
//!
//! Ids 0, 1 and 2 are reserved for epsilon, the "any symbol" wildcard and the
//! sentence boundary. Everything else is a tag, an ambiguity class or a
//! constraint marker of the form `<base>-B<k>` / `<base>-A<k>`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Shared, immutable handle to a frozen table.
pub type TableRef = Arc<SymbolTable>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub const EPSILON: SymbolId = SymbolId(0);
    pub const ANY: SymbolId = SymbolId(1);
    pub const BOUNDARY: SymbolId = SymbolId(2);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_epsilon(self) -> bool {
        self == Self::EPSILON
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub const EPSILON_NAME: &str = "<eps>";
pub const ANY_NAME: &str = "?";
pub const BOUNDARY_NAME: &str = "<#>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Epsilon,
    Any,
    Boundary,
    Tag,
    Class,
    Marker,
}

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Epsilon => "epsilon",
            SymbolKind::Any => "any",
            SymbolKind::Boundary => "boundary",
            SymbolKind::Tag => "tag",
            SymbolKind::Class => "class",
            SymbolKind::Marker => "marker",
        }
    }

    pub fn parse(s: &str) -> Option<SymbolKind> {
        Some(match s {
            "epsilon" => SymbolKind::Epsilon,
            "any" => SymbolKind::Any,
            "boundary" => SymbolKind::Boundary,
            "tag" => SymbolKind::Tag,
            "class" => SymbolKind::Class,
            "marker" => SymbolKind::Marker,
            _ => return None,
        })
    }
}

/// Which side of the center a marker constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// Look-back, spelled `B`.
    Back,
    /// Look-ahead, spelled `A`.
    Ahead,
}

impl Side {
    fn letter(self) -> char {
        match self {
            Side::Back => 'B',
            Side::Ahead => 'A',
        }
    }
}

/// Spells a marker name, e.g. `CONJ-B2` or `<#>-A1`.
pub fn marker_name(base: &str, side: Side, distance: u32) -> String {
    format!("{}-{}{}", base, side.letter(), distance)
}

/// Splits a marker name into `(base, side, distance)`. Distance must be ≥ 1.
pub fn parse_marker_name(name: &str) -> Option<(&str, Side, u32)> {
    let dash = name.rfind('-')?;
    let (base, rest) = (&name[..dash], &name[dash + 1..]);
    if base.is_empty() {
        return None;
    }
    let mut chars = rest.chars();
    let side = match chars.next()? {
        'B' => Side::Back,
        'A' => Side::Ahead,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let k: u32 = digits.parse().ok()?;
    Some((base, side, k))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("symbol table is frozen; cannot add `{0}`")]
    Frozen(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("symbol `{name}` already registered as {existing}")]
    KindConflict { name: String, existing: &'static str },
    #[error("marker `{0}` does not name a tag, class or boundary base")]
    BadMarker(String),
    #[error("kind `{0}` is reserved")]
    ReservedKind(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    kinds: Vec<SymbolKind>,
    index: HashMap<String, SymbolId>,
    frozen: bool,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut table = SymbolTable {
            names: Vec::new(),
            kinds: Vec::new(),
            index: HashMap::new(),
            frozen: false,
        };
        table.push(EPSILON_NAME, SymbolKind::Epsilon);
        table.push(ANY_NAME, SymbolKind::Any);
        table.push(BOUNDARY_NAME, SymbolKind::Boundary);
        table
    }

    fn push(&mut self, name: &str, kind: SymbolKind) -> SymbolId {
        let id = SymbolId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.kinds.push(kind);
        self.index.insert(name.to_owned(), id);
        id
    }

    /// Registers `name` with `kind`, returning the existing id when the same
    /// name/kind pair is already present.
    pub fn insert(&mut self, name: &str, kind: SymbolKind) -> Result<SymbolId, SymbolError> {
        if let Some(&id) = self.index.get(name) {
            let existing = self.kinds[id.index()];
            if existing == kind {
                return Ok(id);
            }
            return Err(SymbolError::KindConflict {
                name: name.to_owned(),
                existing: existing.as_str(),
            });
        }
        if self.frozen {
            return Err(SymbolError::Frozen(name.to_owned()));
        }
        match kind {
            SymbolKind::Epsilon | SymbolKind::Any | SymbolKind::Boundary => {
                return Err(SymbolError::ReservedKind(kind.as_str()))
            }
            _ => {}
        }
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(SymbolError::InvalidName(name.to_owned()));
        }
        match kind {
            SymbolKind::Marker => {
                let (base, _, _) =
                    parse_marker_name(name).ok_or_else(|| SymbolError::BadMarker(name.to_owned()))?;
                let ok = matches!(
                    self.lookup(base).map(|id| self.kind(id)),
                    Some(SymbolKind::Tag | SymbolKind::Class | SymbolKind::Boundary)
                );
                if !ok {
                    return Err(SymbolError::BadMarker(name.to_owned()));
                }
            }
            // A tag or class spelled like a marker would make names ambiguous.
            _ if parse_marker_name(name).is_some() => {
                return Err(SymbolError::InvalidName(name.to_owned()))
            }
            _ => {}
        }
        Ok(self.push(name, kind))
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Freezes the table and wraps it for sharing between transducers.
    pub fn into_shared(mut self) -> TableRef {
        self.freeze();
        Arc::new(self)
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.names[id.index()]
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.kinds[id.index()]
    }

    pub fn contains(&self, id: SymbolId) -> bool {
        id.index() < self.names.len()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.names.len() as u32).map(SymbolId)
    }

    pub fn ids_of_kind(&self, kind: SymbolKind) -> Vec<SymbolId> {
        self.ids().filter(|&id| self.kind(id) == kind).collect()
    }

    /// The closed alphabet Σ: every symbol except epsilon and the wildcard.
    pub fn sigma(&self) -> Vec<SymbolId> {
        self.ids()
            .filter(|&id| !matches!(self.kind(id), SymbolKind::Epsilon | SymbolKind::Any))
            .collect()
    }

    pub fn is_marker(&self, id: SymbolId) -> bool {
        self.contains(id) && self.kind(id) == SymbolKind::Marker
    }

    pub fn marker(&self, base: SymbolId, side: Side, distance: u32) -> Option<SymbolId> {
        self.lookup(&marker_name(self.name(base), side, distance))
    }
}
