//! Plain-text formats for graphs, lists, covers, streams, palettes and
//! colorings. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::coloring::PartialColoring;
use crate::cover::{Color, CorrespondenceCover, ListAssignment};
use crate::graph::{Graph, Vertex};
use crate::sparsify::PaletteFamily;
use crate::streaming::{EdgeStream, StreamRecord};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

/// Non-empty, non-comment lines with 1-based line numbers, split into
/// integer fields.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    fn next_raw(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn next_fields(&mut self) -> Result<Option<(usize, Vec<u64>)>, FormatError> {
        let Some((no, t)) = self.next_raw() else {
            return Ok(None);
        };
        let fields = t
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|_| parse_err(no, format!("`{f}` is not a non-negative integer"))))
            .collect::<Result<_, _>>()?;
        Ok(Some((no, fields)))
    }

    fn expect_fields(&mut self, what: &str) -> Result<(usize, Vec<u64>), FormatError> {
        self.next_fields()?.ok_or_else(|| FormatError::Truncated(what.into()))
    }
}

fn header(lines: &mut Lines<'_>, what: &str, width: usize) -> Result<Vec<u64>, FormatError> {
    let (no, f) = lines.expect_fields(what)?;
    if f.len() != width {
        return Err(parse_err(no, format!("{what} header needs {width} fields")));
    }
    Ok(f)
}

fn counted_list(no: usize, f: &[u64]) -> Result<Vec<Color>, FormatError> {
    let (&len, rest) = f.split_first().ok_or_else(|| parse_err(no, "empty list line"))?;
    if rest.len() as u64 != len {
        return Err(parse_err(no, format!("list announces {len} colors, has {}", rest.len())));
    }
    rest.iter().map(|&c| to_color(no, c)).collect()
}

fn to_color(no: usize, c: u64) -> Result<Color, FormatError> {
    Color::try_from(c).map_err(|_| parse_err(no, format!("color {c} out of range")))
}

fn read_lists(lines: &mut Lines<'_>, n: usize) -> Result<Vec<Vec<Color>>, FormatError> {
    (0..n)
        .map(|v| {
            let (no, f) = lines.expect_fields(&format!("list of vertex {v}"))?;
            counted_list(no, &f)
        })
        .collect()
}

fn write_counted(out: &mut String, list: &[Color]) {
    out.push_str(&list.len().to_string());
    for c in list {
        out.push(' ');
        out.push_str(&c.to_string());
    }
    out.push('\n');
}

/// `n m`, then `m` lines `u v` with `u < v`, sorted.
pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_graph(text: &str) -> Result<Graph, FormatError> {
    let mut lines = Lines::new(text);
    let h = header(&mut lines, "graph", 2)?;
    let (n, m) = (h[0] as usize, h[1] as usize);
    let mut edges = Vec::with_capacity(m);
    while let Some((no, f)) = lines.next_fields()? {
        let &[u, v] = f.as_slice() else {
            return Err(parse_err(no, "edge line needs two fields"));
        };
        if u >= v {
            return Err(parse_err(no, format!("edge {u} {v} must have u < v")));
        }
        if v as usize >= n {
            return Err(parse_err(no, format!("vertex {v} out of range for n = {n}")));
        }
        if edges.last().is_some_and(|&(a, b)| (a, b) >= (u as usize, v as usize)) {
            return Err(parse_err(no, "edges must be strictly increasing"));
        }
        edges.push((u as usize, v as usize));
    }
    if edges.len() != m {
        return Err(FormatError::Truncated(format!("header announces {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, edges).map_err(|e| parse_err(0, e.to_string()))
}

/// `n`, then one `len c…` line per vertex.
pub fn write_lists(l: &ListAssignment) -> String {
    let mut out = format!("{}\n", l.n());
    for list in l.lists() {
        write_counted(&mut out, list);
    }
    out
}

pub fn read_list_assignment(text: &str) -> Result<ListAssignment, FormatError> {
    let mut lines = Lines::new(text);
    let n = header(&mut lines, "lists", 1)?[0] as usize;
    let lists = read_lists(&mut lines, n)?;
    if let Some((no, _)) = lines.next_raw() {
        return Err(parse_err(no, "trailing data after the last list"));
    }
    ListAssignment::new(lists).map_err(|e| parse_err(0, e.to_string()))
}

/// `n q_total`, one `len c…` line per vertex, then `u v p (c c')×p` per
/// edge with a matching. `q_total` bounds every color id.
pub fn write_cover(cov: &CorrespondenceCover) -> String {
    let mut out = format!("{} {}\n", cov.n(), cov.color_bound());
    for list in cov.lists() {
        write_counted(&mut out, list);
    }
    for (&(u, v), pairs) in cov.matchings() {
        out.push_str(&format!("{u} {v} {}", pairs.len()));
        for (a, b) in pairs {
            out.push_str(&format!(" {a} {b}"));
        }
        out.push('\n');
    }
    out
}

fn matching_line(no: usize, f: &[u64]) -> Result<StreamRecord, FormatError> {
    if f.len() < 3 {
        return Err(parse_err(no, "record needs `u v p`"));
    }
    let p = f[2] as usize;
    if f.len() != 3 + 2 * p {
        return Err(parse_err(no, format!("record announces {p} pairs, has {} fields", f.len() - 3)));
    }
    let pairs = f[3..]
        .chunks(2)
        .map(|ch| Ok((to_color(no, ch[0])?, to_color(no, ch[1])?)))
        .collect::<Result<_, FormatError>>()?;
    Ok(StreamRecord {
        u: f[0] as usize,
        v: f[1] as usize,
        pairs,
    })
}

/// Parse a cover; structural checks (CC1–CC3) are left to
/// [`crate::cover::validate_cover`].
pub fn read_cover(text: &str) -> Result<CorrespondenceCover, FormatError> {
    let mut lines = Lines::new(text);
    let h = header(&mut lines, "cover", 2)?;
    let n = h[0] as usize;
    let bound = to_color(0, h[1])?;
    let lists = read_lists(&mut lines, n)?;
    for (v, list) in lists.iter().enumerate() {
        if let Some(&c) = list.iter().find(|&&c| c >= bound) {
            return Err(parse_err(0, format!("vertex {v} lists color {c} ≥ q_total = {bound}")));
        }
    }
    let mut matchings = BTreeMap::new();
    while let Some((no, f)) = lines.next_fields()? {
        let r = matching_line(no, &f)?;
        if r.u >= n || r.v >= n {
            return Err(parse_err(no, "vertex out of range"));
        }
        let key = (r.u.min(r.v), r.u.max(r.v));
        let pairs: Vec<_> = if r.u <= r.v { r.pairs } else { r.pairs.into_iter().map(|(a, b)| (b, a)).collect() };
        if matchings.insert(key, pairs).is_some() {
            return Err(parse_err(no, format!("edge {} {} repeated", key.0, key.1)));
        }
    }
    Ok(CorrespondenceCover::new(bound, lists, matchings))
}

/// `n r`, then one `u v [p (c c')×p]` line per record in arrival order.
pub fn write_stream(s: &EdgeStream) -> String {
    let mut out = format!("{} {}\n", s.n, s.records.len());
    for r in &s.records {
        out.push_str(&format!("{} {}", r.u, r.v));
        if s.lists.is_some() {
            out.push_str(&format!(" {}", r.pairs.len()));
            for (a, b) in &r.pairs {
                out.push_str(&format!(" {a} {b}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Read a stream file. Cover lists come from a separate cover file.
pub fn read_stream(text: &str, lists: Option<Vec<Vec<Color>>>) -> Result<EdgeStream, FormatError> {
    let mut lines = Lines::new(text);
    let h = header(&mut lines, "stream", 2)?;
    let (n, r) = (h[0] as usize, h[1] as usize);
    let mut records = Vec::with_capacity(r);
    while let Some((no, f)) = lines.next_fields()? {
        let rec = if f.len() == 2 {
            StreamRecord {
                u: f[0] as usize,
                v: f[1] as usize,
                pairs: Vec::new(),
            }
        } else {
            matching_line(no, &f)?
        };
        if rec.u >= n || rec.v >= n || rec.u == rec.v {
            return Err(parse_err(no, "bad endpoints"));
        }
        records.push(rec);
    }
    if records.len() != r {
        return Err(FormatError::Truncated(format!("header announces {r} records, found {}", records.len())));
    }
    Ok(EdgeStream { n, records, lists })
}

/// `v : kept… | pruned…` per vertex.
pub fn write_palettes(sampled: &PaletteFamily, pruned: &PaletteFamily) -> String {
    let mut out = String::new();
    for v in 0..sampled.n() {
        out.push_str(&format!("{v} :"));
        for c in pruned.set(v) {
            out.push_str(&format!(" {c}"));
        }
        out.push_str(" |");
        for c in sampled.set(v).iter().filter(|&&c| !pruned.contains(v, c)) {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
    }
    out
}

/// `n`, then `v c` per vertex, `v -` for a blank vertex.
pub fn write_coloring(phi: &PartialColoring) -> String {
    let mut out = format!("{}\n", phi.n());
    for (v, c) in phi.assignment().iter().enumerate() {
        match c {
            Some(c) => out.push_str(&format!("{v} {c}\n")),
            None => out.push_str(&format!("{v} -\n")),
        }
    }
    out
}

pub fn read_coloring(text: &str) -> Result<PartialColoring, FormatError> {
    let mut lines = Lines::new(text);
    let (no, t) = lines.next_raw().ok_or_else(|| FormatError::Truncated("coloring header".into()))?;
    let n: usize = t.parse().map_err(|_| parse_err(no, "header must be `n`"))?;
    let mut phi = PartialColoring::blank(n);
    let mut seen = vec![false; n];
    while let Some((no, t)) = lines.next_raw() {
        let mut it = t.split_whitespace();
        let (Some(v), Some(c), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(no, "line must be `v c`"));
        };
        let v: Vertex = v.parse().map_err(|_| parse_err(no, "bad vertex"))?;
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(parse_err(no, format!("vertex {v} out of range or repeated")));
        }
        if c != "-" {
            phi.set(v, Some(c.parse().map_err(|_| parse_err(no, "bad color"))?));
        }
    }
    Ok(phi)
}

pub fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, FormatError>) -> Result<T, FormatError> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn save(path: &Path, text: &str) -> Result<(), FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
