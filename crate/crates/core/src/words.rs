//! Words over the generators of `PSL(2,Z) = <a, b | a^2 = b^3 = 1>`.
//!
//! A group element has a unique geodesic normal form: an alternating product
//! of `a` and `b`-letters in which the `b`-letters are `b` or `b^-1` and the
//! letter `a^-1` never appears (it equals `a`).  [`Word::normalize`] computes
//! that form; two words represent the same element exactly when their normal
//! forms coincide.
//!
//! Text syntax: `a`, `b` are the generators, `A`, `B` their inverses, written
//! in direct concatenation (`"abAB"`). The forms `a^-1` and `b^-1` are also
//! accepted. ASCII whitespace between letters is ignored.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A single letter of a word: a generator or an inverse of one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Letter {
    /// The involution `a`.
    A,
    /// `a^-1` (equal to `a` in the group, but kept distinct in raw words).
    AInv,
    /// The order-three generator `b`.
    B,
    /// `b^-1` (equal to `b^2` in the group).
    BInv,
}

impl Letter {
    /// The inverse letter.
    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    /// True for `a` and `a^-1`.
    pub fn is_a_type(self) -> bool {
        matches!(self, Letter::A | Letter::AInv)
    }

    /// Rank used for lexicographic comparison of normalized words: `a < b < b^-1`.
    fn lex_rank(self) -> u8 {
        match self {
            Letter::A => 0,
            Letter::AInv => 1,
            Letter::B => 2,
            Letter::BInv => 3,
        }
    }

    fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }
}

/// Error raised when parsing a word from text fails.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseWordError {
    #[error("unexpected character {0:?} in word")]
    UnexpectedChar(char),
    #[error("dangling '^' at end of word")]
    DanglingCaret,
    #[error("malformed exponent after '^' (only '^-1' is supported)")]
    BadExponent,
}

/// A word over `a`, `a^-1`, `b`, `b^-1`, not necessarily reduced.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    /// The empty word.
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Formal inverse: reverse the word and invert each letter.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Concatenation (no reduction performed).
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Free reduction: repeatedly delete adjacent `x x^-1` pairs.
    ///
    /// This uses only the free-group cancellations, not the torsion
    /// relations, so e.g. `"baAb"` reduces to `"bb"`.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Geodesic normal form in the modular group.
    ///
    /// Rewrites with `a^-1 -> a`, `a a -> 1`, `b b -> b^-1`,
    /// `b^-1 b^-1 -> b`, `b b^-1 -> 1`, `b^-1 b -> 1` until no rule applies.
    /// The result alternates between `a` and a `b`-letter and is the unique
    /// shortest representative of the group element (shortlex normal form).
    pub fn normalize(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &raw in &self.0 {
            // a^-1 = a, so raw words lose their a-inverses immediately.
            let mut l = if raw == Letter::AInv { Letter::A } else { raw };
            // Pushing one letter can trigger a cascade of rewrites at the top
            // of the stack; each iteration consumes the current top.
            loop {
                match (stack.last().copied(), l) {
                    (Some(Letter::A), Letter::A)
                    | (Some(Letter::B), Letter::BInv)
                    | (Some(Letter::BInv), Letter::B) => {
                        stack.pop();
                        break;
                    }
                    (Some(Letter::B), Letter::B) => {
                        stack.pop();
                        l = Letter::BInv;
                    }
                    (Some(Letter::BInv), Letter::BInv) => {
                        stack.pop();
                        l = Letter::B;
                    }
                    _ => {
                        stack.push(l);
                        break;
                    }
                }
            }
        }
        Word(stack)
    }

    /// True if the word is already in normal form.
    pub fn is_normal(&self) -> bool {
        for pair in self.0.windows(2) {
            let bad = match (pair[0], pair[1]) {
                (Letter::A, Letter::A) => true,
                (x, y) if !x.is_a_type() && !y.is_a_type() => true,
                _ => false,
            };
            if bad {
                return false;
            }
        }
        !self.0.contains(&Letter::AInv)
    }

    /// Whether two words represent the same element of the modular group.
    pub fn equal_in_group(&self, other: &Word) -> bool {
        self.normalize() == other.normalize()
    }

    /// Shortlex comparison of words: shorter first, ties broken
    /// lexicographically with `a < b < b^-1`.
    pub fn cmp_shortlex(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            self.0
                .iter()
                .map(|l| l.lex_rank())
                .cmp(other.0.iter().map(|l| l.lex_rank()))
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Word, ParseWordError> {
        let mut letters = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            if c.is_ascii_whitespace() {
                continue;
            }
            let letter = match c {
                'a' => Letter::A,
                'A' => Letter::AInv,
                'b' => Letter::B,
                'B' => Letter::BInv,
                other => return Err(ParseWordError::UnexpectedChar(other)),
            };
            // Optional explicit exponent: x^-1 inverts the letter just read.
            if chars.peek() == Some(&'^') {
                chars.next();
                let rest: String = chars.by_ref().take(2).collect();
                if rest.is_empty() {
                    return Err(ParseWordError::DanglingCaret);
                }
                if rest != "-1" {
                    return Err(ParseWordError::BadExponent);
                }
                letters.push(letter.inverse());
            } else {
                letters.push(letter);
            }
        }
        Ok(Word(letters))
    }
}

/// Parse a comma-separated list of words, skipping empty entries.
pub fn parse_generators(s: &str) -> Result<Vec<Word>, ParseWordError> {
    s.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(Word::from_str)
        .collect()
}
