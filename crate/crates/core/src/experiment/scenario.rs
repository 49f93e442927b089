//! Scenario documents.
//!
//! A scenario is a small indentation-structured text file:
//!
//! ```text
//! projrate-scenario 1
//! # comments run to the end of the line
//! name: two-lines-60
//! ambient_dim: 2
//! mode: linear                 # linear | affine
//! method: simultaneous         # simultaneous | cyclic | product_alternating
//! k_max: 5
//! starts: random 4 seed 42     # or a block with one start vector per line
//! checks: norm_chain, bounds   # any of norm_chain kw lemma_identity pierra_lift compare bounds
//! subspace:
//!   vectors:                   # one spanning vector per line; may be empty
//!     1 0
//! subspace:
//!   anchor: 0 0                # required in affine mode, rejected in linear mode
//!   vectors:
//!     0.5 0.8660254037844386
//! ```
//!
//! The first non-comment line is the versioned header. Keys may appear in
//! any order; `subspace` repeats once per subspace. Vectors are whitespace
//! separated reals. Every error names the offending line.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affine::{affine_from_point_span, AffineSubspace};
use crate::error::{Error, Result};
use crate::numlin::{Matrix, RankTolerance, Vector};
use crate::subspace::Subspace;

pub const HEADER: &str = "projrate-scenario 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Linear,
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Simultaneous,
    Cyclic,
    ProductAlternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    NormChain,
    Kw,
    LemmaIdentity,
    PierraLift,
    Compare,
    Bounds,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::NormChain,
        Check::Kw,
        Check::LemmaIdentity,
        Check::PierraLift,
        Check::Compare,
        Check::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::NormChain => "norm_chain",
            Check::Kw => "kw",
            Check::LemmaIdentity => "lemma_identity",
            Check::PierraLift => "pierra_lift",
            Check::Compare => "compare",
            Check::Bounds => "bounds",
        }
    }

    /// Checks that only make sense for exactly two subspaces.
    pub fn needs_pair(self) -> bool {
        matches!(self, Check::Kw | Check::Compare)
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Linear => "linear",
            Mode::Affine => "affine",
        }
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Simultaneous => "simultaneous",
            Method::Cyclic => "cyclic",
            Method::ProductAlternating => "product_alternating",
        }
    }
}

macro_rules! from_name {
    ($ty:ty, $($v:expr),+) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                [$($v),+]
                    .into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| {
                        let names: Vec<&str> = [$($v),+].iter().map(|v| v.name()).collect();
                        format!("unknown value '{s}', expected one of: {}", names.join(", "))
                    })
            }
        }
    };
}

from_name!(Mode, Mode::Linear, Mode::Affine);
from_name!(Method, Method::Simultaneous, Method::Cyclic, Method::ProductAlternating);
from_name!(
    Check,
    Check::NormChain,
    Check::Kw,
    Check::LemmaIdentity,
    Check::PierraLift,
    Check::Compare,
    Check::Bounds
);

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSpec {
    /// Spanning vectors, each of length `ambient_dim`.
    pub vectors: Vec<Vec<f64>>,
    pub anchor: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Starts {
    Explicit(Vec<Vec<f64>>),
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub ambient_dim: usize,
    pub mode: Mode,
    pub subspaces: Vec<SubspaceSpec>,
    pub method: Method,
    pub k_max: usize,
    pub starts: Starts,
    pub checks: Vec<Check>,
}

impl SubspaceSpec {
    pub fn spanning_matrix(&self, n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, self.vectors.len());
        for (j, v) in self.vectors.iter().enumerate() {
            m.set_column(j, &Vector::from_column_slice(v));
        }
        m
    }
}

impl Scenario {
    pub fn r(&self) -> usize {
        self.subspaces.len()
    }

    /// The linear subspaces, or the direction spaces in affine mode.
    pub fn linear_subspaces(&self) -> Result<Vec<Subspace>> {
        self.subspaces
            .iter()
            .map(|s| {
                Subspace::from_spanning(&s.spanning_matrix(self.ambient_dim), RankTolerance::default())
            })
            .collect()
    }

    pub fn affine_subspaces(&self) -> Result<Vec<AffineSubspace>> {
        self.subspaces
            .iter()
            .map(|s| {
                let anchor = s
                    .anchor
                    .as_deref()
                    .map(Vector::from_column_slice)
                    .unwrap_or_else(|| Vector::zeros(self.ambient_dim));
                affine_from_point_span(&anchor, &s.spanning_matrix(self.ambient_dim))
            })
            .collect()
    }

    pub fn seed(&self) -> Option<u64> {
        match self.starts {
            Starts::Random { seed, .. } => Some(seed),
            Starts::Explicit(_) => None,
        }
    }

    /// Structural checks shared by the parser and programmatic construction.
    /// Errors are reported against line 0 here; the parser re-anchors them.
    pub fn validate(&self) -> Result<()> {
        self.validate_fields().map_err(|(_, msg)| Error::invalid(msg))
    }

    fn validate_fields(&self) -> std::result::Result<(), (&'static str, String)> {
        let n = self.ambient_dim;
        if n == 0 {
            return Err(("ambient_dim", "ambient_dim must be at least 1".into()));
        }
        if self.k_max == 0 {
            return Err(("k_max", "k_max must be at least 1".into()));
        }
        if self.subspaces.is_empty() {
            return Err(("subspace", "at least one subspace is required".into()));
        }
        for (i, s) in self.subspaces.iter().enumerate() {
            if let Some(v) = s.vectors.iter().find(|v| v.len() != n) {
                return Err((
                    "subspace",
                    format!(
                        "subspace {}: spanning vector has {} entries, ambient_dim is {n}",
                        i + 1,
                        v.len()
                    ),
                ));
            }
            match (&s.anchor, self.mode) {
                (None, Mode::Affine) => {
                    return Err((
                        "subspace",
                        format!("subspace {}: anchor required in affine mode", i + 1),
                    ))
                }
                (Some(_), Mode::Linear) => {
                    return Err((
                        "subspace",
                        format!("subspace {}: anchor is only allowed in affine mode", i + 1),
                    ))
                }
                (Some(a), Mode::Affine) if a.len() != n => {
                    return Err((
                        "subspace",
                        format!(
                            "subspace {}: anchor has {} entries, ambient_dim is {n}",
                            i + 1,
                            a.len()
                        ),
                    ))
                }
                _ => {}
            }
        }
        match &self.starts {
            Starts::Explicit(v) => {
                if v.is_empty() {
                    return Err(("starts", "at least one start is required".into()));
                }
                if let Some(x) = v.iter().find(|x| x.len() != n) {
                    return Err((
                        "starts",
                        format!("start has {} entries, ambient_dim is {n}", x.len()),
                    ));
                }
            }
            Starts::Random { count, .. } => {
                if *count == 0 {
                    return Err(("starts", "random start count must be at least 1".into()));
                }
            }
        }
        if self.method == Method::ProductAlternating && self.mode == Mode::Affine {
            return Err((
                "method",
                "product_alternating is only available in linear mode".into(),
            ));
        }
        if self.method == Method::ProductAlternating && self.r() < 2 {
            return Err(("method", "product_alternating needs at least two subspaces".into()));
        }
        for c in &self.checks {
            if c.needs_pair() && self.r() != 2 {
                return Err((
                    "checks",
                    format!("check '{}' requires exactly two subspaces, got {}", c.name(), self.r()),
                ));
            }
            if matches!(c, Check::NormChain | Check::PierraLift) && self.r() < 2 {
                return Err((
                    "checks",
                    format!("check '{}' requires at least two subspaces", c.name()),
                ));
            }
        }
        Ok(())
    }

    /// Serialize in the scenario grammar. Reals are written in shortest
    /// round-trip form, so `parse_scenario(s.to_text()) == s`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "name: {}", self.name);
        let _ = writeln!(out, "ambient_dim: {}", self.ambient_dim);
        let _ = writeln!(out, "mode: {}", self.mode.name());
        let _ = writeln!(out, "method: {}", self.method.name());
        let _ = writeln!(out, "k_max: {}", self.k_max);
        match &self.starts {
            Starts::Random { count, seed } => {
                let _ = writeln!(out, "starts: random {count} seed {seed}");
            }
            Starts::Explicit(v) => {
                let _ = writeln!(out, "starts:");
                for x in v {
                    let _ = writeln!(out, "  {}", fmt_vec(x));
                }
            }
        }
        let names: Vec<&str> = self.checks.iter().map(|c| c.name()).collect();
        let _ = writeln!(out, "checks: {}", names.join(", "));
        for s in &self.subspaces {
            let _ = writeln!(out, "subspace:");
            if let Some(a) = &s.anchor {
                let _ = writeln!(out, "  anchor: {}", fmt_vec(a));
            }
            let _ = writeln!(out, "  vectors:");
            for v in &s.vectors {
                let _ = writeln!(out, "    {}", fmt_vec(v));
            }
        }
        out
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

struct Line<'a> {
    number: usize,
    indent: usize,
    text: &'a str,
}

fn significant_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim_end();
            let content = trimmed.trim_start();
            if content.is_empty() {
                return None;
            }
            Some(Line {
                number: i + 1,
                indent: trimmed.len() - content.len(),
                text: content,
            })
        })
        .collect()
}

fn split_key<'a>(line: &Line<'a>) -> Result<(&'a str, &'a str)> {
    let (key, value) = line
        .text
        .split_once(':')
        .ok_or_else(|| Error::parse(line.number, format!("expected 'key: value', found '{}'", line.text)))?;
    Ok((key.trim(), value.trim()))
}

fn parse_reals(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(line, format!("'{tok}' is not a real number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, format!("'{tok}' is not finite")))
            }
        })
        .collect()
}

fn parse_count(line: usize, field: &str, text: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::parse(line, format!("{field}: '{text}' is not a non-negative integer")))
}

/// Lines strictly more indented than `parent`, starting at `*pos`.
fn take_block<'a, 'b>(lines: &'b [Line<'a>], pos: &mut usize, parent: usize) -> &'b [Line<'a>] {
    let start = *pos;
    while *pos < lines.len() && lines[*pos].indent > parent {
        *pos += 1;
    }
    &lines[start..*pos]
}

#[derive(Default)]
struct Fields {
    name: Option<String>,
    ambient_dim: Option<usize>,
    mode: Option<Mode>,
    method: Option<Method>,
    k_max: Option<usize>,
    starts: Option<Starts>,
    checks: Option<Vec<Check>>,
    subspaces: Vec<SubspaceSpec>,
    lines: std::collections::BTreeMap<&'static str, usize>,
    subspace_lines: Vec<usize>,
}

fn parse_subspace(block: &[Line<'_>], header_line: usize) -> Result<SubspaceSpec> {
    let mut spec = SubspaceSpec {
        vectors: Vec::new(),
        anchor: None,
    };
    let mut seen_vectors = false;
    let mut pos = 0;
    let indent = block.first().map(|l| l.indent).unwrap_or(0);
    while pos < block.len() {
        let line = &block[pos];
        if line.indent != indent {
            return Err(Error::parse(line.number, "inconsistent indentation inside subspace"));
        }
        pos += 1;
        let (key, value) = split_key(line)?;
        match key {
            "anchor" => {
                if spec.anchor.is_some() {
                    return Err(Error::parse(line.number, "duplicate anchor"));
                }
                spec.anchor = Some(parse_reals(line.number, value)?);
            }
            "vectors" => {
                if seen_vectors {
                    return Err(Error::parse(line.number, "duplicate vectors block"));
                }
                seen_vectors = true;
                if !value.is_empty() {
                    return Err(Error::parse(
                        line.number,
                        "vectors: list one spanning vector per indented line",
                    ));
                }
                for row in take_block(block, &mut pos, indent) {
                    spec.vectors.push(parse_reals(row.number, row.text)?);
                }
            }
            other => {
                return Err(Error::parse(
                    line.number,
                    format!("unknown subspace field '{other}'"),
                ))
            }
        }
    }
    if !seen_vectors {
        return Err(Error::parse(header_line, "subspace: vectors block required"));
    }
    Ok(spec)
}

fn parse_starts(line: &Line<'_>, value: &str, block: &[Line<'_>]) -> Result<Starts> {
    if value.is_empty() {
        let vectors = block
            .iter()
            .map(|l| parse_reals(l.number, l.text))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Starts::Explicit(vectors));
    }
    if !block.is_empty() {
        return Err(Error::parse(
            block[0].number,
            "starts: give either 'random <count> seed <seed>' or an indented block, not both",
        ));
    }
    let toks: Vec<&str> = value.split_whitespace().collect();
    match toks.as_slice() {
        ["random", count, "seed", seed] => Ok(Starts::Random {
            count: parse_count(line.number, "starts", count)?,
            seed: seed.parse().map_err(|_| {
                Error::parse(line.number, format!("starts: '{seed}' is not a valid seed"))
            })?,
        }),
        ["random", count] => Ok(Starts::Random {
            count: parse_count(line.number, "starts", count)?,
            seed: 0,
        }),
        _ => Err(Error::parse(
            line.number,
            format!("starts: expected 'random <count> seed <seed>', found '{value}'"),
        )),
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let lines = significant_lines(text);
    let first = lines
        .first()
        .ok_or_else(|| Error::parse(1, format!("empty document, expected header '{HEADER}'")))?;
    if first.text != HEADER {
        return Err(Error::parse(
            first.number,
            format!("expected header '{HEADER}', found '{}'", first.text),
        ));
    }
    let mut f = Fields::default();
    let mut pos = 1;
    while pos < lines.len() {
        let line = &lines[pos];
        pos += 1;
        if line.indent != 0 {
            return Err(Error::parse(line.number, "unexpected indentation"));
        }
        let (key, value) = split_key(line)?;
        let block = take_block(&lines, &mut pos, 0);
        let slot: &'static str = match key {
            "name" => "name",
            "ambient_dim" => "ambient_dim",
            "mode" => "mode",
            "method" => "method",
            "k_max" => "k_max",
            "starts" => "starts",
            "checks" => "checks",
            "subspace" => "subspace",
            other => return Err(Error::parse(line.number, format!("unknown field '{other}'"))),
        };
        if slot != "starts" && slot != "subspace" && !block.is_empty() {
            return Err(Error::parse(block[0].number, format!("{slot}: unexpected indented block")));
        }
        if slot == "subspace" {
            if !value.is_empty() {
                return Err(Error::parse(line.number, "subspace: fields go on indented lines"));
            }
            f.subspaces.push(parse_subspace(block, line.number)?);
            f.subspace_lines.push(line.number);
            continue;
        }
        if f.lines.insert(slot, line.number).is_some() {
            return Err(Error::parse(line.number, format!("duplicate field '{slot}'")));
        }
        let bad = |msg: String| Error::parse(line.number, format!("{slot}: {msg}"));
        match slot {
            "name" => {
                if value.is_empty() {
                    return Err(bad("must not be empty".into()));
                }
                f.name = Some(value.to_string());
            }
            "ambient_dim" => f.ambient_dim = Some(parse_count(line.number, slot, value)?),
            "mode" => f.mode = Some(value.parse().map_err(bad)?),
            "method" => f.method = Some(value.parse().map_err(bad)?),
            "k_max" => f.k_max = Some(parse_count(line.number, slot, value)?),
            "starts" => f.starts = Some(parse_starts(line, value, block)?),
            "checks" => {
                let mut checks = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<Check>().map_err(bad))
                    .collect::<Result<Vec<_>>>()?;
                checks.sort();
                checks.dedup();
                f.checks = Some(checks);
            }
            _ => unreachable!(),
        }
    }

    let end = lines.last().map(|l| l.number).unwrap_or(1);
    let missing = |field: &str| Error::parse(end, format!("missing required field '{field}'"));
    let scenario = Scenario {
        name: f.name.ok_or_else(|| missing("name"))?,
        ambient_dim: f.ambient_dim.ok_or_else(|| missing("ambient_dim"))?,
        mode: f.mode.unwrap_or(Mode::Linear),
        subspaces: f.subspaces,
        method: f.method.unwrap_or(Method::Simultaneous),
        k_max: f.k_max.ok_or_else(|| missing("k_max"))?,
        starts: f.starts.ok_or_else(|| missing("starts"))?,
        checks: f.checks.unwrap_or_default(),
    };
    scenario.validate_fields().map_err(|(field, msg)| {
        let line = if field == "subspace" {
            // Point at the offending subspace when the message names one.
            msg.strip_prefix("subspace ")
                .and_then(|rest| rest.split(':').next())
                .and_then(|i| i.parse::<usize>().ok())
                .and_then(|i| f.subspace_lines.get(i - 1).copied())
                .unwrap_or(end)
        } else {
            f.lines.get(field).copied().unwrap_or(end)
        };
        Error::parse(line, msg)
    })?;
    Ok(scenario)
}

pub fn read_scenario(path: &std::path::Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
projrate-scenario 1
name: pair
ambient_dim: 2
k_max: 3
starts: random 2 seed 9
subspace:
  vectors:
    1 0
subspace:
  vectors:
    0 1
";

    #[test]
    fn minimal_linear_scenario() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.r(), 2);
        assert_eq!(s.mode, Mode::Linear);
        assert_eq!(s.method, Method::Simultaneous);
        assert_eq!(s.starts, Starts::Random { count: 2, seed: 9 });
        assert!(s.checks.is_empty());
        assert_eq!(s.subspaces[1].vectors, vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn affine_without_anchor_is_rejected() {
        let text = MINIMAL.replace("k_max: 3", "k_max: 3\nmode: affine");
        let err = parse_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("anchor required"), "{msg}");
        assert!(msg.starts_with("line 7:"), "{msg}");
    }

    #[test]
    fn zero_k_max_is_rejected() {
        let err = parse_scenario(&MINIMAL.replace("k_max: 3", "k_max: 0")).unwrap_err();
        assert_eq!(err.to_string(), "line 4: k_max must be at least 1");
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = parse_scenario(&MINIMAL.replace("    0 1", "    0 x")).unwrap_err();
        assert_eq!(err.to_string(), "line 11: 'x' is not a real number");

        let err = parse_scenario(&MINIMAL.replace("ambient_dim: 2", "ambient_dim: 3")).unwrap_err();
        assert!(err.to_string().contains("spanning vector has 2 entries"));

        let err = parse_scenario(&MINIMAL.replace("projrate-scenario 1", "scenario")).unwrap_err();
        assert!(err.to_string().starts_with("line 1: expected header"));

        let err = parse_scenario(&MINIMAL.replace("name: pair", "colour: red")).unwrap_err();
        assert_eq!(err.to_string(), "line 2: unknown field 'colour'");

        let err = parse_scenario(&MINIMAL.replace("k_max: 3\n", "")).unwrap_err();
        assert!(err.to_string().contains("missing required field 'k_max'"));

        let err = parse_scenario(&format!("{MINIMAL}checks: kw, wobble\n")).unwrap_err();
        assert!(err.to_string().contains("unknown value 'wobble'"));
    }

    #[test]
    fn pair_checks_need_two_subspaces() {
        let text = format!("{MINIMAL}checks: kw\nsubspace:\n  vectors:\n    1 1\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("requires exactly two subspaces"));
    }

    #[test]
    fn explicit_starts_and_comments() {
        let text = "\
# leading comment
projrate-scenario 1
name: affine pair   # trailing comment
ambient_dim: 2
mode: affine
method: cyclic
k_max: 2
starts:
  0 0
  1.5 -2e-3
checks: bounds,kw
subspace:
  anchor: 0 1
  vectors:
    1 0
subspace:
  anchor: 2 0
  vectors:
    0 1
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.name, "affine pair");
        assert_eq!(s.starts, Starts::Explicit(vec![vec![0.0, 0.0], vec![1.5, -2e-3]]));
        assert_eq!(s.checks, vec![Check::Kw, Check::Bounds]);
        assert_eq!(s.subspaces[0].anchor, Some(vec![0.0, 1.0]));
        assert_eq!(parse_scenario(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn empty_vectors_block_is_trivial_subspace() {
        let text = MINIMAL.replace("  vectors:\n    0 1\n", "  vectors:\n");
        let s = parse_scenario(&text).unwrap();
        assert!(s.subspaces[1].vectors.is_empty());
        assert!(s.linear_subspaces().unwrap()[1].is_trivial());
    }
}
