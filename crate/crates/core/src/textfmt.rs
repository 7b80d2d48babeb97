//! Line-oriented helpers shared by the model file formats.

use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::treebank::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    pub fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError {
            line: self.line,
            message: message.into(),
        }
    }

    pub fn next_line(&mut self) -> Result<&'a str, FormatError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.error("unexpected end of file"))
            }
        }
    }

    /// Reads a `key value` line and returns the value text.
    pub fn field(&mut self, key: &str) -> Result<&'a str, FormatError> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ if line == key => Ok(""),
            _ => Err(self.error(format!("expected `{}`, found `{}`", key, line))),
        }
    }

    pub fn parse_field<T: FromStr>(&mut self, key: &str) -> Result<T, FormatError> {
        let v = self.field(key)?;
        self.parse(v)
    }

    pub fn parse<T: FromStr>(&self, text: &str) -> Result<T, FormatError> {
        text.trim()
            .parse()
            .map_err(|_| self.error(format!("cannot parse `{}`", text)))
    }

    /// Parses a whitespace-separated row of exactly `n` values.
    pub fn row<T: FromStr>(&mut self, n: usize) -> Result<Vec<T>, FormatError> {
        let line = self.next_line()?;
        let values = line
            .split_whitespace()
            .map(|t| self.parse(t))
            .collect::<Result<Vec<T>, _>>()?;
        if values.len() != n {
            return Err(self.error(format!("expected {} values, found {}", n, values.len())));
        }
        Ok(values)
    }

    pub fn finish(mut self) -> Result<(), FormatError> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                self.line = i + 1;
                return Err(self.error("trailing content"));
            }
        }
        Ok(())
    }
}

pub(crate) fn write_vocab(out: &mut String, vocab: &Vocabulary) {
    writeln!(out, "nonterminals {}", vocab.num_nonterminals()).unwrap();
    for l in vocab.nonterminals().iter() {
        writeln!(out, "{}", l).unwrap();
    }
    writeln!(out, "words {}", vocab.num_words()).unwrap();
    for w in vocab.words().iter() {
        writeln!(out, "{}", w).unwrap();
    }
}

pub(crate) fn read_vocab(lines: &mut Lines<'_>) -> Result<Vocabulary, FormatError> {
    let n: usize = lines.parse_field("nonterminals")?;
    let mut nts = Vec::with_capacity(n);
    for _ in 0..n {
        nts.push(lines.next_line()?.to_string());
    }
    let w: usize = lines.parse_field("words")?;
    let mut words = Vec::with_capacity(w);
    for _ in 0..w {
        words.push(lines.next_line()?.to_string());
    }
    let vocab = Vocabulary::new(&nts, &words);
    if vocab.num_nonterminals() != n || vocab.num_words() != w {
        return Err(lines.error("duplicate or misplaced vocabulary entries"));
    }
    Ok(vocab)
}

/// Writes `values` space-separated using the shortest round-trip form.
pub(crate) fn write_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{:?}", v).unwrap();
    }
    out.push('\n');
}
