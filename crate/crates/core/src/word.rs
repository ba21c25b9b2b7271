//! Words over an involutory alphabet, ordered shortlex.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Gen};

/// A finite word of 0-based generator indices.
///
/// `Ord` is the shortlex order: shorter words first, equal lengths compared
/// lexicographically with `a_1 < a_2 < ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Gen>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Gen>) -> Self {
        Word(letters)
    }

    /// From 1-based indices, as written in text.
    pub fn from_one_based(letters: &[usize]) -> Self {
        Word(letters.iter().map(|&l| l - 1).collect())
    }

    pub fn letters(&self) -> &[Gen] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Gen> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Gen> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Gen> {
        self.0.last().copied()
    }

    pub fn push(&mut self, g: Gen) {
        self.0.push(g);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Inverse in a Coxeter group: the reversal.
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn pow(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    pub fn check_alphabet(&self, n: usize) -> Result<(), Error> {
        match self.0.iter().find(|&&g| g >= n) {
            Some(&g) => Err(Error::LetterOutOfRange { letter: g + 1, n }),
            None => Ok(()),
        }
    }

    /// Parses `a1a2a3`, `1 2 3` or compact letters `abc`. Empty input, `ε`,
    /// `()` and `-` denote the identity.
    pub fn parse(text: &str, n: usize) -> Result<Word, Error> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "ε" || trimmed == "()" || trimmed == "-" {
            return Ok(Word::empty());
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let letters = if tokens.iter().all(|t| t.chars().all(|c| c.is_ascii_digit())) {
            tokens
                .iter()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Word(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            let compact: String = tokens.concat();
            if compact.starts_with('a') && compact.chars().any(|c| c.is_ascii_digit()) {
                parse_indexed(&compact)?
            } else {
                compact
                    .chars()
                    .map(|c| {
                        if c.is_ascii_lowercase() {
                            Ok(c as usize - 'a' as usize + 1)
                        } else {
                            Err(Error::Word(format!("unexpected character `{c}` in `{text}`")))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l > n) {
            return Err(Error::LetterOutOfRange { letter: bad, n });
        }
        Ok(Word::from_one_based(&letters))
    }

    /// `a1a2a3` style rendering; `ε` for the empty word.
    pub fn to_indexed(&self) -> String {
        if self.0.is_empty() {
            return "ε".to_string();
        }
        self.0.iter().map(|g| format!("a{}", g + 1)).collect()
    }
}

fn parse_indexed(s: &str) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c != 'a' {
            return Err(Error::Word(format!("expected `a` in `{s}`, found `{c}`")));
        }
        let mut digits = String::new();
        while let Some(&d) = chars.peek() {
            if d.is_ascii_digit() {
                digits.push(d);
                chars.next();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return Err(Error::Word(format!("missing index after `a` in `{s}`")));
        }
        out.push(digits.parse().map_err(|_| Error::Word(s.to_string()))?);
    }
    Ok(out)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_indexed())
    }
}

impl From<Vec<Gen>> for Word {
    fn from(v: Vec<Gen>) -> Self {
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn shortlex_cmp(u: &[Gen], v: &[Gen]) -> Ordering {
    u.len().cmp(&v.len()).then_with(|| u.cmp(v))
}
