//! Words over a symmetric alphabet, presentations and the word-problem engines
//! used everywhere else: free reduction, Dehn's algorithm, coset enumeration,
//! shortlex normal forms, Cayley balls and quasi-geodesic tests.

mod ball;
mod coset;
mod dehn;
mod group;
mod presentation;
mod qg;

pub use ball::CayleyBall;
pub use coset::CosetTable;
pub use dehn::{check_small_cancellation, DehnEngine, DehnStep, PieceViolation, SmallCancellationReport};
pub use group::{Engine, Group, WordProblem};
pub use presentation::Presentation;
pub use qg::{derive_qg_constants, extends_quasigeodesic, is_quasigeodesic, is_quasigeodesic_with, Metric, QgConstants, QgThresholds};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordsError {
    #[error("unknown letter {0:?}")]
    UnknownLetter(char),
    #[error("generator names must be single lowercase ascii letters, got {0:?}")]
    BadGenerator(String),
    #[error("duplicate generator {0:?}")]
    DuplicateGenerator(char),
    #[error("relator {0} is not freely and cyclically reduced")]
    RelatorNotReduced(usize),
    #[error("presentation is not C'({0}) and no fallback engine was configured")]
    NotSmallCancellation(String),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("distance of a subword exceeds the ball radius {0}")]
    BallTooSmall(usize),
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
}

/// A letter of an alphabet. Generator `i` is letter `2i`, its inverse `2i+1`,
/// so the formal inverse is a bit flip and declaration order is
/// `a < A < b < B < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }
}

/// Symmetric generating alphabet: each generator comes with a distinct formal
/// inverse, written in upper case.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    generators: Vec<char>,
}

impl Alphabet {
    pub fn new(generators: &[char]) -> Result<Self, WordsError> {
        let mut seen = Vec::new();
        for &g in generators {
            if !g.is_ascii_lowercase() {
                return Err(WordsError::BadGenerator(g.to_string()));
            }
            if seen.contains(&g) {
                return Err(WordsError::DuplicateGenerator(g));
            }
            seen.push(g);
        }
        Ok(Alphabet { generators: seen })
    }

    pub fn from_names(names: &[String]) -> Result<Self, WordsError> {
        let mut chars = Vec::with_capacity(names.len());
        for n in names {
            let mut it = n.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => chars.push(c),
                _ => return Err(WordsError::BadGenerator(n.clone())),
            }
        }
        Alphabet::new(&chars)
    }

    pub fn generators(&self) -> &[char] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Number of letters, i.e. twice the number of generators.
    pub fn size(&self) -> usize {
        2 * self.generators.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.size() as u8).map(Letter)
    }

    pub fn letter(&self, c: char) -> Result<Letter, WordsError> {
        let lower = c.to_ascii_lowercase();
        let pos = self
            .generators
            .iter()
            .position(|&g| g == lower)
            .ok_or(WordsError::UnknownLetter(c))?;
        Ok(Letter((2 * pos) as u8 + u8::from(c.is_ascii_uppercase())))
    }

    pub fn char_of(&self, l: Letter) -> char {
        let g = self.generators[l.generator()];
        if l.is_inverse() {
            g.to_ascii_uppercase()
        } else {
            g
        }
    }

    /// Parses a word; whitespace is ignored and upper case means inverse.
    pub fn parse(&self, s: &str) -> Result<Word, WordsError> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| self.letter(c))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    pub fn render(&self, w: &Word) -> String {
        w.0.iter().map(|&l| self.char_of(l)).collect()
    }
}

/// A word over an alphabet, stored as letter indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// The reversed word, without inverting letters.
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Every letter replaced by its inverse, order kept.
    pub fn letterwise_inverse(&self) -> Word {
        Word(self.0.iter().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn with(&self, l: Letter) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }

    pub fn subword(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&a), Some(&b)) => self.len() == 1 || a != b.inverse(),
                _ => true,
            }
    }

    /// Shortlex comparison: length first, then letter order.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// Unique freely reduced word equal to `w` in the free group.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.0 {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// All words over `n_letters` letters of length at most `max_len`, in
/// shortlex order.
pub fn all_words(n_letters: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * n_letters);
        for w in &layer {
            for l in 0..n_letters {
                next.push(w.with(Letter(l as u8)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(&['a', 'b']).unwrap()
    }

    #[test]
    fn parse_and_render_round_trip() {
        let al = ab();
        let w = al.parse("a bA B").unwrap();
        assert_eq!(al.render(&w), "abAB");
        assert_eq!(al.render(&w.inverse()), "baBA");
        assert!(al.parse("c").is_err());
    }

    #[test]
    fn free_reduction_examples() {
        let al = ab();
        let r = |s: &str| al.render(&free_reduce(&al.parse(s).unwrap()));
        assert_eq!(r("aA"), "");
        assert_eq!(r(""), "");
        assert_eq!(r("abBa"), "aa");
    }

    /// Stack-free oracle: repeatedly delete the first cancelling pair.
    fn reduce_by_rescanning(w: &Word) -> Word {
        let mut v = w.0.clone();
        loop {
            match v.windows(2).position(|p| p[0] == p[1].inverse()) {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return Word(v),
            }
        }
    }

    #[test]
    fn free_reduce_is_idempotent_and_matches_rescanning() {
        for w in all_words(4, 8) {
            let r = free_reduce(&w);
            assert!(r.len() <= w.len());
            assert!(r.is_freely_reduced());
            assert_eq!(free_reduce(&r), r);
            assert_eq!(r, reduce_by_rescanning(&w));
        }
    }

    #[test]
    fn free_reduce_exhaustive_one_generator() {
        for w in all_words(2, 12) {
            let r = free_reduce(&w);
            assert!(r.len() <= w.len());
            assert_eq!(free_reduce(&r), r);
        }
    }

    #[test]
    fn shortlex_order_is_length_then_letters() {
        let al = ab();
        let a = al.parse("b").unwrap();
        let b = al.parse("aa").unwrap();
        let c = al.parse("aA").unwrap();
        assert!(a.shortlex_cmp(&b).is_lt());
        assert!(b.shortlex_cmp(&c).is_lt());
    }
}
