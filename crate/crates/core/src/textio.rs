//! Line-oriented text tables shared by the mesh, coefficient and state files.
//!
//! A file starts with a magic line `<kind> <version>`, followed by
//! `key value...` header lines and then sections. A section starts with
//! `section <name> <rows>` and holds `rows` lines of whitespace-separated
//! tokens. Blank lines and lines starting with `#` are ignored. Reals are
//! written with 17 significant digits so they round-trip exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) fn real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Default)]
pub(crate) struct TableWriter {
    buf: String,
}

impl TableWriter {
    pub fn new(kind: &str, version: u32) -> Self {
        TableWriter {
            buf: format!("{kind} {version}\n"),
        }
    }

    pub fn header(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.buf, "{key} {value}");
    }

    pub fn section<I, R>(&mut self, name: &str, rows: I)
    where
        I: ExactSizeIterator<Item = R>,
        R: AsRef<str>,
    {
        let _ = writeln!(self.buf, "section {name} {}", rows.len());
        for row in rows {
            self.buf.push_str(row.as_ref());
            self.buf.push('\n');
        }
    }

    pub fn reals(&mut self, name: &str, values: &[f64]) {
        self.section(name, values.iter().map(|&x| real(x)));
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.buf).map_err(|e| Error::io(path, e))
    }
}

pub(crate) struct Section {
    pub line: usize,
    pub rows: Vec<(usize, Vec<String>)>,
}

pub(crate) struct TableReader {
    pub path: PathBuf,
    headers: HashMap<String, (usize, Vec<String>)>,
    sections: HashMap<String, Section>,
}

impl TableReader {
    pub fn open(path: &Path, kind: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text, kind)
    }

    pub fn parse(path: &Path, text: &str, kind: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (n, magic) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        if magic.split_whitespace().next() != Some(kind) {
            return Err(err(n, format!("expected a `{kind}` file")));
        }
        let mut headers = HashMap::new();
        let mut sections = HashMap::new();
        while let Some((n, line)) = lines.next() {
            let mut toks = line.split_whitespace().map(str::to_string);
            let key = toks.next().unwrap_or_default();
            if key == "section" {
                let name = toks.next().ok_or_else(|| err(n, "missing section name".into()))?;
                let count: usize = toks
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(n, "missing section row count".into()))?;
                let mut rows = Vec::with_capacity(count);
                for _ in 0..count {
                    let (m, row) = lines
                        .next()
                        .ok_or_else(|| err(n, format!("section {name} is truncated")))?;
                    rows.push((m, row.split_whitespace().map(str::to_string).collect()));
                }
                sections.insert(name, Section { line: n, rows });
            } else {
                headers.insert(key, (n, toks.collect()));
            }
        }
        Ok(TableReader {
            path: path.to_path_buf(),
            headers,
            sections,
        })
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    pub fn header(&self, key: &str) -> Result<&[String]> {
        self.headers
            .get(key)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| self.error(0, format!("missing header `{key}`")))
    }

    pub fn section(&self, name: &str) -> Result<&Section> {
        self.sections
            .get(name)
            .ok_or_else(|| self.error(0, format!("missing section `{name}`")))
    }

    pub fn parse_token<T: FromStr>(&self, line: usize, tok: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.error(line, format!("cannot parse `{tok}`")))
    }

    /// Rows of a section parsed as fixed-width tuples.
    pub fn fixed<T: FromStr>(&self, name: &str, width: usize) -> Result<Vec<Vec<T>>> {
        let sec = self.section(name)?;
        sec.rows
            .iter()
            .map(|(line, toks)| {
                if toks.len() != width {
                    return Err(self.error(*line, format!("expected {width} values")));
                }
                toks.iter().map(|t| self.parse_token(*line, t)).collect()
            })
            .collect()
    }

    /// Rows of a section with a leading element count.
    pub fn ragged<T: FromStr>(&self, name: &str) -> Result<Vec<Vec<T>>> {
        let sec = self.section(name)?;
        sec.rows
            .iter()
            .map(|(line, toks)| {
                let count: usize = toks
                    .first()
                    .ok_or_else(|| self.error(*line, "empty row"))
                    .and_then(|t| self.parse_token(*line, t))?;
                if toks.len() != count + 1 {
                    return Err(self.error(*line, format!("expected {count} values")));
                }
                toks[1..].iter().map(|t| self.parse_token(*line, t)).collect()
            })
            .collect()
    }

    pub fn reals(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.fixed::<f64>(name, 1)?.into_iter().map(|r| r[0]).collect())
    }
}

pub(crate) fn ragged_row<T: std::fmt::Display>(values: &[T]) -> String {
    let mut s = values.len().to_string();
    for v in values {
        let _ = write!(s, " {v}");
    }
    s
}

pub(crate) fn real_row(values: &[f64]) -> String {
    let mut s = values.len().to_string();
    for &v in values {
        s.push(' ');
        s.push_str(&real(v));
    }
    s
}
