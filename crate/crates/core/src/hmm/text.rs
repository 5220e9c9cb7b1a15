//! `HMMv1` model files.
//!
//! ```text
//! HMMv1
//! #TAGS
//! <tag>                 one per line, sorted
//! #CLASSES
//! <name>: <tag>,<tag>   members sorted
//! #PI
//! <tag> <prob>
//! #A
//! <prev> <next> <prob>  every pair
//! #B
//! <class> <tag> <prob>  member pairs only
//! ```
//!
//! Probabilities are written with 17 significant digits, which is enough for
//! every `f64` to read back to the same value.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{HmmError, HmmModel, Result, TagId};

pub const MAGIC: &str = "HMMv1";

fn fmt_prob(p: f64) -> String {
    format!("{p:.16e}")
}

impl HmmModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}\n#TAGS");
        for t in self.tag_names() {
            let _ = writeln!(out, "{t}");
        }
        out.push_str("#CLASSES\n");
        for c in self.classes() {
            let members: Vec<&str> = c.members.iter().map(|&t| self.tag_name(t)).collect();
            let _ = writeln!(out, "{}: {}", c.name, members.join(","));
        }
        out.push_str("#PI\n");
        for t in self.tags() {
            let _ = writeln!(out, "{} {}", self.tag_name(t), fmt_prob(self.pi(t)));
        }
        out.push_str("#A\n");
        for u in self.tags() {
            for t in self.tags() {
                let _ = writeln!(out, "{} {} {}", self.tag_name(u), self.tag_name(t), fmt_prob(self.a(u, t)));
            }
        }
        out.push_str("#B\n");
        for c in self.class_ids() {
            for &t in &self.class(c).members {
                let _ = writeln!(out, "{} {} {}", self.class(c).name, self.tag_name(t), fmt_prob(self.b(c, t)));
            }
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<HmmModel> {
        HmmModel::read_text(text.as_bytes())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<HmmModel> {
        #[derive(PartialEq, PartialOrd, Clone, Copy)]
        enum Section {
            Header,
            Tags,
            Classes,
            Pi,
            A,
            B,
        }
        let mut section = Section::Header;
        let mut tags: Vec<String> = Vec::new();
        let mut class_lines: Vec<(usize, String, Vec<String>)> = Vec::new();
        let mut pi_lines = Vec::new();
        let mut a_lines = Vec::new();
        let mut b_lines = Vec::new();

        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let err = |msg: &str| HmmError::Parse { line: lineno, msg: msg.to_owned() };
            if section == Section::Header {
                if line != MAGIC {
                    return Err(err("expected HMMv1 header"));
                }
                section = Section::Tags;
                continue;
            }
            let next = match line.as_str() {
                "#TAGS" => Some(Section::Tags),
                "#CLASSES" => Some(Section::Classes),
                "#PI" => Some(Section::Pi),
                "#A" => Some(Section::A),
                "#B" => Some(Section::B),
                _ => None,
            };
            if let Some(s) = next {
                if s < section {
                    return Err(err("sections out of order"));
                }
                section = s;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let prob = |s: &str| s.parse::<f64>().map_err(|_| err("expected a probability"));
            match section {
                Section::Header => unreachable!(),
                Section::Tags => tags.push(line.clone()),
                Section::Classes => {
                    let (name, members) = line.split_once(": ").ok_or_else(|| err("expected `name: tags`"))?;
                    class_lines.push((lineno, name.to_owned(), members.split(',').map(str::to_owned).collect()));
                }
                Section::Pi => match fields.as_slice() {
                    [t, p] => pi_lines.push((lineno, t.to_string(), prob(p)?)),
                    _ => return Err(err("expected `tag prob`")),
                },
                Section::A => match fields.as_slice() {
                    [u, t, p] => a_lines.push((lineno, u.to_string(), t.to_string(), prob(p)?)),
                    _ => return Err(err("expected `tag tag prob`")),
                },
                Section::B => match fields.as_slice() {
                    [c, t, p] => b_lines.push((lineno, c.to_string(), t.to_string(), prob(p)?)),
                    _ => return Err(err("expected `class tag prob`")),
                },
            }
        }
        if section == Section::Header {
            return Err(HmmError::Parse { line: 1, msg: "empty input".into() });
        }

        let n = tags.len();
        let tag = |line: usize, name: &str| -> Result<TagId> {
            tags.iter()
                .position(|t| t == name)
                .map(|i| TagId(i as u32))
                .ok_or_else(|| HmmError::Parse { line, msg: format!("unknown tag `{name}`") })
        };
        let mut classes = Vec::with_capacity(class_lines.len());
        for (line, name, members) in &class_lines {
            let mut ids = members.iter().map(|m| tag(*line, m)).collect::<Result<Vec<_>>>()?;
            ids.sort();
            classes.push((name.clone(), ids));
        }
        let mut pi = vec![0.0; n];
        for (line, t, p) in &pi_lines {
            pi[tag(*line, t)?.index()] = *p;
        }
        let mut a = vec![vec![0.0; n]; n];
        for (line, u, t, p) in &a_lines {
            a[tag(*line, u)?.index()][tag(*line, t)?.index()] = *p;
        }
        let mut b = vec![vec![0.0; n]; classes.len()];
        for (line, c, t, p) in &b_lines {
            let ci = classes
                .iter()
                .position(|(name, _)| name == c)
                .ok_or_else(|| HmmError::Parse { line: *line, msg: format!("unknown class `{c}`") })?;
            b[ci][tag(*line, t)?.index()] = *p;
        }
        HmmModel::new(tags, classes, pi, a, b)
    }
}
