//! Synthesis and validation of the regular languages the reduction consumes:
//! the quasi-geodesic language `L` and the predictor families whose
//! automata read off cocycle values from `L`-words.
//!
//! Synthesis is a Myhill-Nerode approximation. A word's signature is the
//! tuple of labels of its extensions by a set of test suffixes, initially
//! all words up to the learning depth. Words with equal signatures share a
//! state. The hypothesis is then checked on every word up to the
//! validation radius; a counterexample contributes its suffixes to the test
//! set and learning restarts.

mod family;

pub use family::{build_predictor_family, validate_family, FamilyEntry, FamilyKind, PredictorFamily};

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{AutomataError, Fsa};
use crate::extension::ExtensionError;
use crate::words::{all_words, Group, Letter, QgThresholds, Word, WordsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrationalError {
    #[error("synthesized automaton disagrees with the oracle: {0}")]
    SynthesisInconsistent(Box<ValidationReport>),
    #[error("value set for letter {letter:?} grew during validation: {values}")]
    ValueSetUnstable { letter: char, values: String },
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// Knobs of the learning loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Length of the test suffixes distinguishing states.
    pub learn: usize,
    /// Every word up to this length is checked against the oracle.
    pub validate: usize,
    pub cap_states: usize,
    /// Counterexample-driven relearning rounds before giving up.
    pub max_rounds: usize,
}

impl SynthesisConfig {
    pub fn new(learn: usize, validate: usize) -> Self {
        SynthesisConfig { learn, validate, cap_states: 20_000, max_rounds: 32 }
    }
}

/// One disagreement between an automaton and the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub word: String,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub radius: usize,
    pub words_checked: usize,
    pub mismatches: Vec<Mismatch>,
    pub pass: bool,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "radius {}, {} words, {} mismatches", self.radius, self.words_checked, self.mismatches.len())?;
        if let Some(m) = self.mismatches.first() {
            write!(f, " (first: {:?} expected {} got {})", m.word, m.expected, m.got)?;
        }
        Ok(())
    }
}

/// A labelling of all words, evaluated incrementally letter by letter.
pub trait Labeler {
    type Pos: Clone;
    type Label: Clone + Eq + Hash + Debug;
    fn root(&self) -> Self::Pos;
    fn step(&self, p: &Self::Pos, l: Letter) -> Self::Pos;
    fn label(&self, p: &Self::Pos) -> Self::Label;
    /// All extensions of a dead position carry its label.
    fn is_dead(&self, p: &Self::Pos) -> bool;
}

/// A DFA with one output per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MooreMachine<T> {
    pub graph: Fsa,
    pub outputs: Vec<T>,
}

impl<T: Clone + Eq + Hash> MooreMachine<T> {
    pub fn output(&self, w: &Word) -> Result<&T, AutomataError> {
        Ok(&self.outputs[self.graph.run(w)?])
    }

    /// For each state, whether every reachable state has the same output.
    fn settled(&self) -> Vec<bool> {
        let g = &self.graph;
        (0..g.n_states())
            .map(|s| g.reroot(s).expect("state in range").reachable().iter().all(|&t| self.outputs[t] == self.outputs[s]))
            .collect()
    }
}

fn walk<O: Labeler>(o: &O, p: &O::Pos, w: &Word) -> O::Pos {
    w.letters().iter().fold(p.clone(), |p, &l| o.step(&p, l))
}

/// Learns a Moore machine agreeing with `oracle` on every word up to
/// `cfg.validate`. Returns the machine and its final validation report.
pub fn synthesize<O: Labeler>(
    oracle: &O,
    symbols: &[char],
    cfg: &SynthesisConfig,
) -> Result<(MooreMachine<O::Label>, ValidationReport), LrationalError> {
    let k = symbols.len();
    let base = all_words(k, cfg.learn);
    // Parent index of each base suffix, for walking the suffix trie.
    let base_index: HashMap<Word, usize> = base.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let parent: Vec<Option<(usize, Letter)>> = base
        .iter()
        .map(|w| w.letters().split_last().map(|(&l, rest)| (base_index[&Word(rest.to_vec())], l)))
        .collect();
    let mut extra: Vec<Word> = Vec::new();
    let mut last_report = None;
    for _round in 0..=cfg.max_rounds {
        let row = |p: &O::Pos| -> Vec<O::Label> {
            let mut pos: Vec<O::Pos> = Vec::with_capacity(base.len());
            for par in &parent {
                let q = match par {
                    None => p.clone(),
                    Some((i, l)) => oracle.step(&pos[*i], *l),
                };
                pos.push(q);
            }
            let mut out: Vec<O::Label> = pos.iter().map(|q| oracle.label(q)).collect();
            out.extend(extra.iter().map(|z| oracle.label(&walk(oracle, p, z))));
            out
        };
        let root = oracle.root();
        let mut index: HashMap<Vec<O::Label>, usize> = HashMap::new();
        index.insert(row(&root), 0);
        let mut reps = vec![root];
        let mut delta: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < reps.len() {
            for l in 0..k {
                let next = oracle.step(&reps[i], Letter(l as u8));
                let r = row(&next);
                let id = match index.get(&r) {
                    Some(&id) => id,
                    None => {
                        if reps.len() >= cfg.cap_states {
                            return Err(LrationalError::ResourceBound(format!(
                                "synthesis exceeds {} states",
                                cfg.cap_states
                            )));
                        }
                        index.insert(r, reps.len());
                        reps.push(next);
                        reps.len() - 1
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let outputs: Vec<O::Label> = reps.iter().map(|p| oracle.label(p)).collect();
        let graph = Fsa::from_fn(symbols.to_vec(), reps.len(), 0, |_| true, |s, l| delta[s * k + l.index()]);
        let machine = MooreMachine { graph, outputs };
        let (report, counterexamples) = validate_moore(oracle, &machine, cfg.validate, 512);
        if counterexamples.is_empty() {
            return Ok((machine, report));
        }
        let mut known: HashSet<Word> = extra.iter().cloned().collect();
        let before = extra.len();
        for w in &counterexamples {
            for start in 0..w.len() {
                let z = w.subword(start, w.len());
                if z.len() > cfg.learn && known.insert(z.clone()) {
                    extra.push(z);
                }
            }
        }
        if extra.len() == before {
            return Err(LrationalError::SynthesisInconsistent(Box::new(report)));
        }
        last_report = Some(report);
    }
    Err(LrationalError::SynthesisInconsistent(Box::new(last_report.expect("at least one round ran"))))
}

/// Breadth-first comparison of machine output and oracle label on all words
/// up to `radius`. Stops after the first layer containing mismatches and
/// returns the report with up to `max_mismatches` of them.
pub fn validate_moore<O: Labeler>(
    oracle: &O,
    m: &MooreMachine<O::Label>,
    radius: usize,
    max_mismatches: usize,
) -> (ValidationReport, Vec<Word>) {
    let settled = m.settled();
    let k = m.graph.n_letters();
    let mut mismatches = Vec::new();
    let mut words = Vec::new();
    let mut checked = 0;
    let mut layer = vec![(Word::empty(), oracle.root(), m.graph.initial())];
    for len in 0..=radius {
        let mut next = Vec::new();
        for (w, p, s) in layer {
            checked += 1;
            let expected = oracle.label(&p);
            if expected != m.outputs[s] {
                if mismatches.len() < max_mismatches {
                    mismatches.push(Mismatch {
                        word: m.graph.render(&w),
                        expected: format!("{expected:?}"),
                        got: format!("{:?}", m.outputs[s]),
                    });
                    words.push(w);
                }
                continue;
            }
            if len == radius || (oracle.is_dead(&p) && settled[s]) {
                continue;
            }
            for l in 0..k {
                let l = Letter(l as u8);
                next.push((w.with(l), oracle.step(&p, l), m.graph.step(s, l)));
            }
        }
        if !words.is_empty() {
            break;
        }
        layer = next;
    }
    let pass = mismatches.is_empty();
    (ValidationReport { radius, words_checked: checked, mismatches, pass }, words)
}

/// Membership in the `(lambda, nu)`-quasi-geodesic language, tracking the
/// normal forms of all suffixes of the word read so far.
pub struct QuasiGeodesicLabeler<'a> {
    group: &'a Group,
    thresholds: RefCell<QgThresholds>,
    /// With `lambda = 1, nu < 1` only the whole word needs checking.
    geodesic: bool,
}

impl<'a> QuasiGeodesicLabeler<'a> {
    pub fn new(group: &'a Group, lambda: &BigRational, nu: &BigRational) -> Result<Self, WordsError> {
        let thresholds = RefCell::new(QgThresholds::new(lambda, nu)?);
        Ok(QuasiGeodesicLabeler { group, thresholds, geodesic: lambda.is_one() && *nu < BigRational::one() })
    }
}

#[derive(Clone, Debug)]
pub struct SuffixForms {
    /// `forms[i]` is the normal form of the suffix starting at letter `i`,
    /// the last entry being the empty suffix. Geodesic mode keeps only the
    /// whole word.
    forms: Vec<Word>,
    len: usize,
    alive: bool,
}

impl Labeler for QuasiGeodesicLabeler<'_> {
    type Pos = SuffixForms;
    type Label = bool;

    fn root(&self) -> SuffixForms {
        SuffixForms { forms: vec![Word::empty()], len: 0, alive: true }
    }

    fn step(&self, p: &SuffixForms, l: Letter) -> SuffixForms {
        if !p.alive {
            return p.clone();
        }
        let len = p.len + 1;
        if self.geodesic {
            let g = self.group.normal_form_times(&p.forms[0], l);
            let alive = g.len() == len;
            return SuffixForms { forms: vec![g], len, alive };
        }
        let mut th = self.thresholds.borrow_mut();
        let mut forms = Vec::with_capacity(len + 1);
        let mut alive = true;
        for (i, f) in p.forms.iter().enumerate() {
            let g = self.group.normal_form_times(f, l);
            alive &= g.len() >= th.get(len - i);
            forms.push(g);
        }
        forms.push(Word::empty());
        SuffixForms { forms, len, alive }
    }

    fn label(&self, p: &SuffixForms) -> bool {
        p.alive
    }

    fn is_dead(&self, p: &SuffixForms) -> bool {
        !p.alive
    }
}

/// The quasi-geodesic language of `group` as a minimal DFA, with its
/// validation report.
pub fn build_l_automaton(
    group: &Group,
    symbols: &[char],
    lambda: &BigRational,
    nu: &BigRational,
    cfg: &SynthesisConfig,
) -> Result<(Fsa, ValidationReport), LrationalError> {
    let oracle = QuasiGeodesicLabeler::new(group, lambda, nu)?;
    let (m, report) = synthesize(&oracle, symbols, cfg)?;
    let accepting: Vec<usize> = (0..m.outputs.len()).filter(|&s| m.outputs[s]).collect();
    Ok((m.graph.restrict_accepting(&accepting)?.minimize(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{free_reduce, Presentation, WordProblem};

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn free_group_geodesics_are_reduced_words() {
        let p = Presentation::free("ab");
        let g = Group::new(p.clone(), WordProblem::Auto).unwrap();
        let symbols = Fsa::symbols_of(&p.alphabet);
        let (l, report) = build_l_automaton(&g, &symbols, &r(1), &r(0), &SynthesisConfig::new(1, 6)).unwrap();
        assert!(report.pass);
        // One state per last letter, the start state and the sink.
        assert_eq!(l.n_states(), 6);
        for w in all_words(4, 6) {
            assert_eq!(l.accepts(&w).unwrap(), free_reduce(&w) == w);
        }
    }

    #[test]
    fn dihedral_geodesics_alternate() {
        let p = Presentation::infinite_dihedral();
        let g = Group::new(p.clone(), WordProblem::Auto).unwrap();
        let symbols = Fsa::symbols_of(&p.alphabet);
        let (l, _) = build_l_automaton(&g, &symbols, &r(1), &r(0), &SynthesisConfig::new(1, 8)).unwrap();
        for w in all_words(4, 8) {
            let alternating = w.letters().windows(2).all(|p| p[0].generator() != p[1].generator());
            assert_eq!(l.accepts(&w).unwrap(), alternating);
        }
    }
}
