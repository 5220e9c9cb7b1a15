//! `FSTv1` text format.
//!
//! ```text
//! FSTv1
//! symbol <id> <kind> <name>      one line per table entry, ids in order
//! states <count>
//! initial <state>
//! arc <src> <dst> <upper> <lower> canonical arc order
//! final <state>                   ascending
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Fst, FstError, Result, StateId};
use crate::symbols::{SymbolId, SymbolKind, SymbolTable};

pub const MAGIC: &str = "FSTv1";

impl Fst {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        let t = &self.table;
        for id in t.ids() {
            let _ = writeln!(out, "symbol {} {} {}", id.0, t.kind(id).as_str(), t.name(id));
        }
        let _ = writeln!(out, "states {}", self.num_states());
        let _ = writeln!(out, "initial {}", self.initial);
        for (src, a) in self.arcs() {
            let _ = writeln!(out, "arc {} {} {} {}", src, a.dst, t.name(a.upper), t.name(a.lower));
        }
        for f in self.finals() {
            let _ = writeln!(out, "final {}", f);
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Fst> {
        let mut table = SymbolTable::new();
        let mut num_states: Option<usize> = None;
        let mut initial: Option<StateId> = None;
        let mut arcs = Vec::new();
        let mut finals = Vec::new();
        let mut seen_magic = false;
        let mut next_symbol = 0u32;

        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let err = |msg: &str| FstError::Parse { line: lineno, msg: msg.to_owned() };
            if !seen_magic {
                if line != MAGIC {
                    return Err(err("expected FSTv1 header"));
                }
                seen_magic = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let num = |s: &str| s.parse::<u32>().map_err(|_| err("expected a number"));
            match fields.as_slice() {
                ["symbol", id, kind, name] => {
                    if num(id)? != next_symbol {
                        return Err(err("symbol ids must be consecutive"));
                    }
                    let kind = SymbolKind::parse(kind).ok_or_else(|| err("unknown symbol kind"))?;
                    if next_symbol < 3 {
                        let expected = SymbolId(next_symbol);
                        if table.lookup(name) != Some(expected) || table.kind(expected) != kind {
                            return Err(err("reserved symbol mismatch"));
                        }
                    } else {
                        let id = table.insert(name, kind).map_err(|e| err(&e.to_string()))?;
                        if id.0 != next_symbol {
                            return Err(err("duplicate symbol"));
                        }
                    }
                    next_symbol += 1;
                }
                ["states", n] => num_states = Some(num(n)? as usize),
                ["initial", q] => initial = Some(num(q)?),
                ["arc", src, dst, upper, lower] => {
                    let sym = |name: &str| {
                        table.lookup(name).ok_or_else(|| err(&format!("unknown symbol `{name}`")))
                    };
                    arcs.push((num(src)?, num(dst)?, sym(upper)?, sym(lower)?));
                }
                ["final", q] => finals.push(num(q)?),
                _ => return Err(err("unrecognized line")),
            }
        }
        if !seen_magic {
            return Err(FstError::Parse { line: 1, msg: "empty input".into() });
        }
        let missing = |what: &str| FstError::Parse { line: 0, msg: format!("missing `{what}` line") };
        let n = num_states.ok_or_else(|| missing("states"))?;
        let q0 = initial.ok_or_else(|| missing("initial"))?;
        Fst::from_parts(table.into_shared(), n, q0, finals, arcs)
    }

    pub fn from_text(text: &str) -> Result<Fst> {
        Fst::read_text(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::table_with;

    #[test]
    fn round_trip_is_bit_exact() {
        let t = table_with(&["ADJ", "NOUN"], &["[ADJ,NOUN]"]).unwrap();
        let c = t.lookup("[ADJ,NOUN]").unwrap();
        let adj = t.lookup("ADJ").unwrap();
        let f = Fst::linear(t, &[(SymbolId::BOUNDARY, SymbolId::BOUNDARY), (c, adj)]).unwrap();
        let text = f.to_text();
        assert!(text.starts_with("FSTv1\nsymbol 0 epsilon <eps>\nsymbol 1 any ?\nsymbol 2 boundary <#>\n"));
        assert!(text.contains("arc 1 2 [ADJ,NOUN] ADJ\n"));
        let g = Fst::from_text(&text).unwrap();
        assert_eq!(g.to_text(), text);
        assert!(g.transduces(&[SymbolId::BOUNDARY, c], &[SymbolId::BOUNDARY, adj]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "FSTv1\nsymbol 0 epsilon <eps>\nsymbol 1 any ?\nsymbol 2 boundary <#>\nstates 1\ninitial 0\narc 0 0 X X\n";
        match Fst::from_text(bad) {
            Err(FstError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Fst::from_text("FST\n"), Err(FstError::Parse { line: 1, .. })));
        let no_states = "FSTv1\nsymbol 0 epsilon <eps>\nsymbol 1 any ?\nsymbol 2 boundary <#>\ninitial 0\n";
        assert!(Fst::from_text(no_states).is_err());
    }
}
