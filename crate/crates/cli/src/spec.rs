//! Lattice specifications: `U(6) + U`, `diag(-2, -4)`, `A(2) + E8`, or a
//! JSON file `{"gram": [[...]], "name": "..."}`.
//!
//! Root lattices `A(n)`, `D(n)`, `E8` are negative definite by default, as
//! they occur in Néron–Severi lattices; [`parse_lattice_spec_signed`] takes
//! the other convention.

use std::path::Path;

use anyhow::Context;
use cuspcount::lattice::named_lattice;
use cuspcount::{Error, EvenLattice, RootSign};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramFile {
    pub gram: Vec<Vec<i64>>,
    #[serde(default)]
    pub name: Option<String>,
}

/// A spec naming an existing `.json` file is read as a Gram file; anything
/// else is parsed as an expression.
pub fn load_lattice(spec: &str, roots: RootSign) -> anyhow::Result<EvenLattice> {
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        let file: GramFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {spec}"))?;
        return Ok(EvenLattice::from_rows(&file.gram)?);
    }
    Ok(parse_lattice_spec_signed(spec, roots)?)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    roots: RootSign,
}

impl<'a> Parser<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), Error> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(self.pos, format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<(usize, &'a str), Error> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(self.error(start, "expected a lattice name"));
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        Ok((start, &self.text[start..self.pos]))
    }

    fn int(&mut self) -> Result<i64, Error> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some('-' | '+')) {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| self.error(start, "expected an integer"))
    }

    fn term(&mut self) -> Result<EvenLattice, Error> {
        let (at, name) = self.name()?;
        let mut params = vec![];
        if self.eat('(') {
            params.push(self.int()?);
            while self.eat(',') {
                params.push(self.int()?);
            }
            self.expect(')')?;
        }
        named_lattice(name, &params, self.roots).map_err(|e| match e {
            Error::UnknownName(n) => self.error(at, format!("unknown lattice name `{n}`")),
            other => other,
        })
    }
}

/// `expr := term ('+' term)*`, `term := NAME ['(' INT (',' INT)* ')']`.
pub fn parse_lattice_spec(text: &str) -> Result<EvenLattice, Error> {
    parse_lattice_spec_signed(text, RootSign::Negative)
}

pub fn parse_lattice_spec_signed(text: &str, roots: RootSign) -> Result<EvenLattice, Error> {
    let mut p = Parser {
        text,
        pos: 0,
        roots,
    };
    let mut lattice = p.term()?;
    while p.eat('+') {
        lattice = lattice.direct_sum(&p.term()?);
    }
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error(p.pos, "unexpected input"));
    }
    Ok(lattice)
}
