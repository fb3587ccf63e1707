use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::{free_reduce, Letter, Presentation, Word};

/// One application of a relator during Dehn reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DehnStep {
    /// Index of the relator in the presentation.
    pub relator: usize,
    /// `+1` if a rotation of the relator was used, `-1` for its inverse.
    pub sign: i8,
    /// Start of the replaced subword in the word at the time of replacement.
    pub position: usize,
}

#[derive(Clone, Debug)]
struct Rewrite {
    replacement: Vec<Letter>,
    relator: usize,
    sign: i8,
}

/// A symmetrized relator together with where it came from.
#[derive(Clone, Debug)]
struct Symmetrized {
    word: Vec<Letter>,
    relator: usize,
    sign: i8,
}

/// All cyclic rotations of every relator and its inverse, one entry per
/// rotation offset (a proper power contributes equal words at several
/// offsets).
fn symmetrize(p: &Presentation) -> Vec<Symmetrized> {
    let mut out: Vec<Symmetrized> = Vec::new();
    for (idx, r) in p.relators.iter().enumerate() {
        for (sign, base) in [(1i8, r.clone()), (-1i8, r.inverse())] {
            let n = base.len();
            for k in 0..n {
                let rot: Vec<Letter> = base.0[k..].iter().chain(&base.0[..k]).copied().collect();
                out.push(Symmetrized { word: rot, relator: idx, sign });
            }
        }
    }
    out
}

/// Dehn's algorithm over the symmetrized relators of a presentation.
///
/// Replacement policy: the leftmost subword that is more than half of a
/// symmetrized relator (longest such at that position) is replaced by the
/// inverse of the complementary part, then the word is freely reduced.
#[derive(Clone, Debug)]
pub struct DehnEngine {
    rules: HashMap<Vec<Letter>, Rewrite>,
    lengths: Vec<usize>,
}

impl DehnEngine {
    pub fn new(p: &Presentation) -> Self {
        let mut rules: HashMap<Vec<Letter>, Rewrite> = HashMap::new();
        for s in symmetrize(p) {
            let n = s.word.len();
            for l in (n / 2 + 1)..=n {
                let lhs = s.word[..l].to_vec();
                let replacement: Vec<Letter> = s.word[l..].iter().rev().map(|x| x.inverse()).collect();
                rules.entry(lhs).or_insert(Rewrite { replacement, relator: s.relator, sign: s.sign });
            }
        }
        let mut lengths: Vec<usize> = rules.keys().map(|k| k.len()).collect();
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths.dedup();
        DehnEngine { rules, lengths }
    }

    /// Dehn-reduces `w`, returning the reduced word and the log of relator
    /// applications.
    pub fn reduce(&self, w: &Word) -> (Word, Vec<DehnStep>) {
        self.reduce_with(w, false)
    }

    /// Same reduction with the rightmost applicable subword chosen first.
    /// Only used to check that defects do not depend on the policy.
    pub fn reduce_rightmost(&self, w: &Word) -> (Word, Vec<DehnStep>) {
        self.reduce_with(w, true)
    }

    fn find(&self, cur: &[Letter], from: usize, rightmost: bool) -> Option<(usize, usize, &Rewrite)> {
        let at = |i: usize| {
            self.lengths
                .iter()
                .filter(|&&l| i + l <= cur.len())
                .find_map(|&l| self.rules.get(&cur[i..i + l]).map(|rw| (i, l, rw)))
        };
        if rightmost {
            (0..cur.len()).rev().find_map(at)
        } else {
            (from..cur.len()).find_map(at)
        }
    }

    fn reduce_with(&self, w: &Word, rightmost: bool) -> (Word, Vec<DehnStep>) {
        let longest = self.lengths.first().copied().unwrap_or(1);
        let mut cur = free_reduce(w).0;
        let mut log = Vec::new();
        let mut from = 0;
        while let Some((i, l, rw)) = self.find(&cur, from, rightmost) {
            log.push(DehnStep { relator: rw.relator, sign: rw.sign, position: i });
            // The prefix before `i` is freely reduced, so cancellation only
            // eats into it from the right; `low` is the first changed letter.
            let mut next = cur[..i].to_vec();
            let mut low = i;
            for &x in rw.replacement.iter().chain(&cur[i + l..]) {
                if next.last() == Some(&x.inverse()) {
                    next.pop();
                    low = low.min(next.len());
                } else {
                    next.push(x);
                }
            }
            // No window ending before `low` matched, and none has changed.
            from = low.saturating_sub(longest - 1);
            cur = next;
        }
        (Word(cur), log)
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).0.is_empty()
    }
}

/// A piece that is too long relative to a relator containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceViolation {
    pub piece: Word,
    pub relator_length: usize,
    pub relators: (usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallCancellationReport {
    pub fraction: String,
    pub longest_piece: usize,
    pub violations: Vec<PieceViolation>,
    pub pass: bool,
}

/// Checks the metric small-cancellation condition `|piece| < fraction * |r|`
/// over all pairs of symmetrized relators at distinct positions. Overlaps of
/// a relator with its own rotations count, so proper powers such as `a^3`
/// or `s^2` fail.
pub fn check_small_cancellation(p: &Presentation, fraction: &BigRational) -> SmallCancellationReport {
    let sym = symmetrize(p);
    let mut violations = Vec::new();
    let mut longest = 0usize;
    for (i, a) in sym.iter().enumerate() {
        for b in &sym[i + 1..] {
            let longest_proper = a.word.len().min(b.word.len()) - 1;
            let common = a.word.iter().zip(&b.word).take_while(|(x, y)| x == y).count().min(longest_proper);
            if common == 0 {
                continue;
            }
            longest = longest.max(common);
            for len in [a.word.len(), b.word.len()] {
                let bound = fraction * BigRational::from_integer(BigInt::from(len));
                if BigRational::from_integer(BigInt::from(common)) >= bound {
                    let v = PieceViolation {
                        piece: Word(a.word[..common].to_vec()),
                        relator_length: len,
                        relators: (a.relator, b.relator),
                    };
                    if !violations.contains(&v) {
                        violations.push(v);
                    }
                }
            }
        }
    }
    SmallCancellationReport {
        fraction: fraction.to_string(),
        longest_piece: longest,
        pass: violations.is_empty(),
        violations,
    }
}
