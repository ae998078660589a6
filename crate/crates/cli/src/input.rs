//! Text formats. Everything after `#` on a line is a comment; tokens are
//! whitespace-separated; state and vertex labels are 1-based.

use std::path::Path;

use kemeny_core::graph::GraphSpec;
use kemeny_core::perturb::{Perturbation, PerturbationKindTag};
use kemeny_core::TransitionMatrix;
use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Raw bytes of an input file with its name and SHA-256.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub sha256: String,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Parse { line: 0, message: format!("{} is not UTF-8", path.display()) })?;
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        Ok(Self { name, sha256: hex::encode(Sha256::digest(&bytes)), text })
    }

    pub fn from_text(name: &str, text: &str) -> Self {
        Self { name: name.to_string(), sha256: hex::encode(Sha256::digest(text.as_bytes())), text: text.to_string() }
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(body, _)| body)
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    text.lines()
        .enumerate()
        .flat_map(|(k, line)| strip_comment(line).split_whitespace().map(move |t| Token { text: t, line: k + 1 }))
        .collect()
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let last_line = text.lines().count();
        Self { tokens: tokens(text), pos: 0, last_line }
    }

    fn next(&mut self, what: &str) -> Result<&Token<'a>, CliError> {
        let line = self.last_line;
        let t =
            self.tokens.get(self.pos).ok_or_else(|| CliError::Parse { line, message: format!("missing {what}") })?;
        self.pos += 1;
        Ok(t)
    }

    fn real(&mut self, what: &str) -> Result<f64, CliError> {
        let t = self.next(what)?;
        let x: f64 = t
            .text
            .parse()
            .map_err(|_| CliError::Parse { line: t.line, message: format!("{what}: '{}' is not a number", t.text) })?;
        if !x.is_finite() {
            return Err(CliError::Parse { line: t.line, message: format!("{what} is not finite") });
        }
        Ok(x)
    }

    fn count(&mut self, what: &str) -> Result<usize, CliError> {
        let t = self.next(what)?;
        t.text.parse().map_err(|_| CliError::Parse {
            line: t.line,
            message: format!("{what}: '{}' is not a non-negative integer", t.text),
        })
    }

    /// 1-based label converted to a 0-based index.
    fn label(&mut self, what: &str, m: usize) -> Result<usize, CliError> {
        let line = self.tokens.get(self.pos).map_or(self.last_line, |t| t.line);
        let k = self.count(what)?;
        if k == 0 || k > m {
            return Err(CliError::Parse { line, message: format!("{what} {k} outside 1..={m}") });
        }
        Ok(k - 1)
    }

    fn reals(&mut self, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
        (0..n).map(|_| self.real(what)).collect()
    }

    fn finish(&self) -> Result<(), CliError> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(t) => {
                Err(CliError::Parse { line: t.line, message: format!("unexpected trailing token '{}'", t.text) })
            }
        }
    }
}

/// `m` followed by `m·m` row-major entries, before validation.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, CliError> {
    let mut c = Cursor::new(text);
    let m = c.count("state count")?;
    if m == 0 {
        return Err(CliError::Parse { line: 1, message: "state count must be positive".into() });
    }
    let data = c.reals(m * m, "matrix entry")?;
    c.finish()?;
    Ok(DMatrix::from_row_slice(m, m, &data))
}

pub fn parse_chain(text: &str) -> Result<TransitionMatrix, CliError> {
    Ok(TransitionMatrix::new(parse_matrix(text)?)?)
}

/// Header `directed` or `undirected`, optionally followed by the vertex
/// count; then `i j [w]` per line. Without a count, `m` is the largest label.
pub fn parse_edges(text: &str) -> Result<GraphSpec, CliError> {
    let mut lines =
        text.lines().enumerate().map(|(k, l)| (k + 1, strip_comment(l).trim())).filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| CliError::Parse { line: 0, message: "empty edge list".into() })?;
    let mut head = header.split_whitespace();
    let directed = match head.next() {
        Some("directed") => true,
        Some("undirected") => false,
        other => {
            return Err(CliError::Parse {
                line: hline,
                message: format!("expected 'directed' or 'undirected', found '{}'", other.unwrap_or("")),
            })
        }
    };
    let declared =
        match head.next() {
            Some(t) => Some(t.parse::<usize>().map_err(|_| CliError::Parse {
                line: hline,
                message: format!("vertex count '{t}' is not an integer"),
            })?),
            None => None,
        };
    if let Some(t) = head.next() {
        return Err(CliError::Parse { line: hline, message: format!("unexpected token '{t}' in header") });
    }
    let mut raw = Vec::new();
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(CliError::Parse { line, message: "edge lines are 'i j [w]'".into() });
        }
        let label = |t: &str| {
            t.parse::<usize>()
                .ok()
                .filter(|k| *k >= 1)
                .ok_or_else(|| CliError::Parse { line, message: format!("vertex '{t}' is not a 1-based label") })
        };
        let (i, j) = (label(fields[0])?, label(fields[1])?);
        let w = match fields.get(2) {
            Some(t) => t
                .parse::<f64>()
                .ok()
                .filter(|w| *w > 0.0 && w.is_finite())
                .ok_or_else(|| CliError::Parse { line, message: format!("weight '{t}' must be positive") })?,
            None => 1.0,
        };
        raw.push((line, i, j, w));
    }
    let largest = raw.iter().map(|&(_, i, j, _)| i.max(j)).max().unwrap_or(0);
    let m = declared.unwrap_or(largest);
    if let Some(&(line, i, j, _)) = raw.iter().find(|&&(_, i, j, _)| i.max(j) > m) {
        return Err(CliError::Parse { line, message: format!("edge ({i}, {j}) exceeds the {m} declared vertices") });
    }
    if m == 0 {
        return Err(CliError::Parse { line: hline, message: "graph has no vertices".into() });
    }
    Ok(GraphSpec::new(m, raw.into_iter().map(|(_, i, j, w)| (i - 1, j - 1, w)).collect(), directed)?)
}

/// `m`, then by kind: general/psd `m·m` entries of `E`; type1 `r` and `h`;
/// type2 `h`; damping `α` and `v`.
pub fn parse_perturbation(text: &str, kind: PerturbationKindTag) -> Result<Perturbation, CliError> {
    let mut c = Cursor::new(text);
    let m = c.count("state count")?;
    if m == 0 {
        return Err(CliError::Parse { line: 1, message: "state count must be positive".into() });
    }
    let pert = match kind {
        PerturbationKindTag::General | PerturbationKindTag::PsdSubtract => {
            let e = DMatrix::from_row_slice(m, m, &c.reals(m * m, "perturbation entry")?);
            if kind == PerturbationKindTag::General {
                Perturbation::General(e)
            } else {
                Perturbation::PsdSubtract(e)
            }
        }
        PerturbationKindTag::Type1 => {
            let r = c.label("row index r", m)?;
            Perturbation::Type1 { r, h: DVector::from_vec(c.reals(m, "entry of h")?) }
        }
        PerturbationKindTag::Type2 => Perturbation::Type2 { h: DVector::from_vec(c.reals(m, "entry of h")?) },
        PerturbationKindTag::Damping => {
            let alpha = c.real("alpha")?;
            Perturbation::Damping { alpha, v: DVector::from_vec(c.reals(m, "entry of v")?) }
        }
    };
    c.finish()?;
    Ok(pert)
}
