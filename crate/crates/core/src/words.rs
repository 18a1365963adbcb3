//! Words over a group's generator list.
//!
//! A word is a sequence of letters `(generator index, sign)`. The empty word
//! is the identity. Words carry no group reference themselves; every
//! operation takes the ambient [`GroupHandle`](crate::groups::GroupHandle)
//! explicitly and validates letter indices against it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One letter of a word: a generator index plus a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    pub fn pos(gen: usize) -> Self {
        Letter { gen, inv: false }
    }
    pub fn neg(gen: usize) -> Self {
        Letter { gen, inv: true }
    }
    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn gen(g: usize) -> Self {
        Word(vec![Letter::pos(g)])
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn is_identity_word(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut v = Vec::with_capacity(self.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            v.extend_from_slice(&base.0);
        }
        Word(v)
    }

    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.concat(self).concat(&g.inverse())
    }

    /// Checks that all letters refer to generators below `n_gens`.
    pub fn check_letters(&self, n_gens: usize) -> Result<()> {
        for l in &self.0 {
            if l.gen >= n_gens {
                return Err(Error::InvalidWord(format!(
                    "letter index {} out of range (group has {} generators)",
                    l.gen, n_gens
                )));
            }
        }
        Ok(())
    }

    /// Renders the word over the given generator names, e.g. `a*b^-1*a^2`.
    pub fn render(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1usize;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            let name = names.get(l.gen).cloned().unwrap_or_else(|| format!("g{}", l.gen));
            let exp: i64 = if l.inv { -(run as i64) } else { run as i64 };
            if exp == 1 {
                parts.push(name);
            } else {
                parts.push(format!("{}^{}", name, exp));
            }
            i += run;
        }
        parts.join("*")
    }

    /// Parses `a*b^-1*a^2` (also accepts whitespace separators) over the
    /// given generator names.
    pub fn parse(text: &str, names: &[String]) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "1" || text == "e" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for tok in text.split(|c: char| c == '*' || c.is_whitespace()) {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let exp: i64 = e.parse().map_err(|_| {
                        Error::InvalidWord(format!("bad exponent in token `{}`", tok))
                    })?;
                    (n, exp)
                }
                None => (tok, 1),
            };
            let gen = names
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| Error::InvalidWord(format!("unknown generator `{}`", name)))?;
            let letter = if exp < 0 { Letter::neg(gen) } else { Letter::pos(gen) };
            for _ in 0..exp.unsigned_abs() {
                letters.push(letter);
            }
        }
        Ok(Word(letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn parse_render_round_trip() {
        let w = Word::parse("a*b^-1*a^2", &names()).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.render(&names()), "a*b^-1*a^2");
        assert_eq!(Word::parse("1", &names()).unwrap(), Word::identity());
    }

    #[test]
    fn inverse_reverses_and_flips() {
        let w = Word::parse("a*b", &names()).unwrap();
        assert_eq!(w.inverse().render(&names()), "b^-1*a^-1");
        let c = w.concat(&w.inverse());
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn pow_negative() {
        let w = Word::parse("a*b", &names()).unwrap();
        assert_eq!(w.pow(-2).render(&names()), "b^-1*a^-1*b^-1*a^-1");
        assert_eq!(w.pow(0), Word::identity());
    }
}
