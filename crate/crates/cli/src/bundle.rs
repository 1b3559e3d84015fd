//! The site-bundle text format.
//!
//! A bundle is a sequence of sections. Each section starts with a header
//! line `[kind name]` and continues with entry lines `key arg arg ...`.
//! Tokens are separated by whitespace, `#` starts a comment line, blank
//! lines are ignored and nothing depends on indentation. Pairs inside
//! `map` and `exists` entries are written `from->to`.
//!
//! ```text
//! [preorder P2]
//! element e
//! element 0
//! leq e 0
//!
//! [topology J]
//! on P2
//! kind canonical
//! ```
//!
//! The printed form of a bundle is canonical: one blank line between
//! sections, single spaces between tokens, no comments.

use std::fmt;

/// What a section declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectionKind {
    Category,
    Preorder,
    Frame,
    Topology,
    Functor,
    Indexed,
    Site,
}

impl SectionKind {
    pub const ALL: [SectionKind; 7] = [
        SectionKind::Category,
        SectionKind::Preorder,
        SectionKind::Frame,
        SectionKind::Topology,
        SectionKind::Functor,
        SectionKind::Indexed,
        SectionKind::Site,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SectionKind::Category => "category",
            SectionKind::Preorder => "preorder",
            SectionKind::Frame => "frame",
            SectionKind::Topology => "topology",
            SectionKind::Functor => "functor",
            SectionKind::Indexed => "indexed",
            SectionKind::Site => "site",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        SectionKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Allowed keys with their argument counts: `(min, max)`, `max = None`
    /// for variadic entries.
    fn keys(self) -> &'static [(&'static str, usize, Option<usize>)] {
        match self {
            SectionKind::Category => {
                &[("object", 1, Some(1)), ("arrow", 3, Some(3)), ("identity", 2, Some(2)), ("compose", 3, Some(3))]
            }
            SectionKind::Preorder | SectionKind::Frame => &[("element", 1, Some(1)), ("leq", 2, Some(2))],
            SectionKind::Topology => {
                &[("on", 1, Some(2)), ("kind", 1, Some(3)), ("cover", 1, None), ("sieve", 1, None)]
            }
            SectionKind::Functor => {
                &[("from", 1, Some(1)), ("to", 1, Some(1)), ("object", 2, Some(2)), ("arrow", 2, Some(2))]
            }
            SectionKind::Indexed => {
                &[("base", 1, Some(1)), ("fibre", 2, Some(2)), ("map", 1, None), ("transition", 2, Some(2))]
            }
            SectionKind::Site => &[
                ("indexed", 1, Some(1)),
                ("fibre-topologies", 1, Some(1)),
                ("fibre-topology", 2, Some(2)),
                ("exists", 1, None),
            ],
        }
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// One `key arg ...` line. Positions are carried for error messages and
/// ignored by equality.
#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub args: Vec<String>,
    pub pos: Pos,
    pub arg_pos: Vec<Pos>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.args == other.args
    }
}

impl Eq for Entry {}

impl Entry {
    pub fn new(key: &str, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        let arg_pos = vec![Pos::default(); args.len()];
        Entry { key: key.into(), args, pos: Pos::default(), arg_pos }
    }

    /// Position of argument `i`, or of the entry itself.
    pub fn at(&self, i: usize) -> Pos {
        self.arg_pos.get(i).copied().unwrap_or(self.pos)
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub kind: SectionKind,
    pub name: String,
    pub entries: Vec<Entry>,
    pub pos: Pos,
}

impl PartialEq for Section {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.name == other.name && self.entries == other.entries
    }
}

impl Eq for Section {}

impl Section {
    pub fn new(kind: SectionKind, name: &str) -> Self {
        Section { kind, name: name.into(), entries: Vec::new(), pos: Pos::default() }
    }

    pub fn push(&mut self, key: &str, args: impl IntoIterator<Item = impl Into<String>>) -> &mut Self {
        self.entries.push(Entry::new(key, args));
        self
    }

    pub fn entries<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn first(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteBundle {
    pub sections: Vec<Section>,
}

impl SiteBundle {
    pub fn get(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn of_kind(&self, kind: SectionKind) -> impl Iterator<Item = &Section> {
        self.sections.iter().filter(move |s| s.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate name `{name}` (first declared at line {first})")]
    Duplicate { pos: Pos, name: String, first: usize },
}

fn syntax<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax { pos, msg: msg.into() })
}

/// Splits a line into tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(b, t)| (line[..b].chars().count() + 1, t)).collect()
}

pub fn parse_site_bundle(text: &str) -> Result<SiteBundle, ParseError> {
    let mut bundle = SiteBundle::default();
    let mut names: Vec<(String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        let Some(&(col, first)) = toks.first() else { continue };
        if first.starts_with('#') {
            continue;
        }
        let pos = Pos { line, col };
        if first.starts_with('[') {
            let body = raw.trim();
            let Some(inner) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) else {
                return syntax(pos, "section header must be `[kind name]`");
            };
            let parts: Vec<&str> = inner.split_whitespace().collect();
            let [kind, name] = parts[..] else {
                return syntax(pos, "section header must be `[kind name]`");
            };
            let Some(kind) = SectionKind::parse(kind) else {
                let known: Vec<&str> = SectionKind::ALL.iter().map(|k| k.as_str()).collect();
                return syntax(pos, format!("unknown section kind `{kind}` (expected one of {})", known.join(", ")));
            };
            if let Some((_, first)) = names.iter().find(|(n, _)| n == name) {
                return Err(ParseError::Duplicate { pos, name: name.into(), first: *first });
            }
            names.push((name.into(), line));
            bundle.sections.push(Section { kind, name: name.into(), entries: Vec::new(), pos });
            continue;
        }
        let Some(section) = bundle.sections.last_mut() else {
            return syntax(pos, "entry before the first section header");
        };
        let Some(&(_, min, max)) = section.kind.keys().iter().find(|(k, _, _)| *k == first) else {
            let known: Vec<&str> = section.kind.keys().iter().map(|(k, _, _)| *k).collect();
            return syntax(
                pos,
                format!("unknown key `{first}` in a {} section (expected one of {})", section.kind, known.join(", ")),
            );
        };
        let args = &toks[1..];
        if args.len() < min || max.is_some_and(|m| args.len() > m) {
            let want = match max {
                Some(m) if m == min => format!("{min}"),
                Some(m) => format!("{min} to {m}"),
                None => format!("at least {min}"),
            };
            let at = args.get(max.unwrap_or(usize::MAX)).map_or(pos, |&(c, _)| Pos { line, col: c });
            return syntax(at, format!("`{first}` takes {want} argument(s), found {}", args.len()));
        }
        for &(c, t) in args {
            if t.starts_with('#') {
                return syntax(Pos { line, col: c }, "comments must be on their own line");
            }
        }
        section.entries.push(Entry {
            key: first.into(),
            args: args.iter().map(|&(_, t)| t.to_string()).collect(),
            pos,
            arg_pos: args.iter().map(|&(c, _)| Pos { line, col: c }).collect(),
        });
    }
    Ok(bundle)
}

/// The canonical text of a bundle.
pub fn print_site_bundle(b: &SiteBundle) -> String {
    let mut out = String::new();
    for (i, s) in b.sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("[{} {}]\n", s.kind, s.name));
        for e in &s.entries {
            out.push_str(&e.key);
            for a in &e.args {
                out.push(' ');
                out.push_str(a);
            }
            out.push('\n');
        }
    }
    out
}

impl fmt::Display for SiteBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_site_bundle(self))
    }
}

/// Splits `from->to`.
pub fn pair(token: &str) -> Option<(&str, &str)> {
    token.split_once("->").filter(|(a, b)| !a.is_empty() && !b.is_empty())
}

/// Whether a name can be written as a single token.
pub fn is_token(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(char::is_whitespace) && !name.starts_with('#') && !name.starts_with('[')
}
