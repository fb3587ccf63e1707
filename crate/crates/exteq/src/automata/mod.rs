//! Complete deterministic finite automata over small indexed alphabets.
//!
//! Letters are the same `u8` indices used by [`Word`], so an automaton over a
//! group alphabet reads group words directly. Every automaton is total: a
//! missing edge goes to a sink state.

mod morphism;
mod ops;

pub use morphism::MonoidMorphism;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Alphabet, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("alphabet mismatch: expected {expected}, got {got}")]
    AlphabetMismatch { expected: String, got: String },
    #[error("unknown state {0}")]
    UnknownState(usize),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("malformed automaton: {0}")]
    Malformed(String),
}

/// A complete DFA. `symbols[i]` is the printable name of letter `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "FsaFile", try_from = "FsaFile")]
pub struct Fsa {
    symbols: Vec<char>,
    delta: Vec<usize>,
    initial: usize,
    accepting: Vec<bool>,
}

impl Fsa {
    /// Builds an automaton from a partial transition list; absent edges go
    /// to a fresh sink state, which is added only when needed.
    pub fn from_partial(
        symbols: Vec<char>,
        states: usize,
        initial: usize,
        accepting: &[usize],
        transitions: &[(usize, Letter, usize)],
    ) -> Result<Fsa, AutomataError> {
        let k = symbols.len();
        if initial >= states {
            return Err(AutomataError::UnknownState(initial));
        }
        let mut delta = vec![usize::MAX; states * k];
        for &(s, l, t) in transitions {
            if s >= states || t >= states {
                return Err(AutomataError::UnknownState(s.max(t)));
            }
            if l.index() >= k {
                return Err(AutomataError::Malformed(format!("letter {} out of range", l.0)));
            }
            let slot = &mut delta[s * k + l.index()];
            if *slot != usize::MAX && *slot != t {
                return Err(AutomataError::Malformed(format!("two edges from state {s} on letter {}", l.0)));
            }
            *slot = t;
        }
        let mut acc = vec![false; states];
        for &s in accepting {
            *acc.get_mut(s).ok_or(AutomataError::UnknownState(s))? = true;
        }
        let mut n = states;
        if delta.contains(&usize::MAX) {
            let sink = n;
            n += 1;
            for d in delta.iter_mut().filter(|d| **d == usize::MAX) {
                *d = sink;
            }
            delta.extend(std::iter::repeat_n(sink, k));
            acc.push(false);
        }
        debug_assert_eq!(delta.len(), n * k);
        Ok(Fsa { symbols, delta, initial, accepting: acc })
    }

    /// Builds an automaton from a total transition function.
    pub fn from_fn(
        symbols: Vec<char>,
        states: usize,
        initial: usize,
        accepting: impl Fn(usize) -> bool,
        step: impl Fn(usize, Letter) -> usize,
    ) -> Fsa {
        let k = symbols.len();
        let delta = (0..states)
            .flat_map(|s| (0..k).map(move |l| (s, l)))
            .map(|(s, l)| step(s, Letter(l as u8)))
            .collect();
        Fsa { symbols, delta, initial, accepting: (0..states).map(accepting).collect() }
    }

    /// Symbols of a group alphabet, in letter order.
    pub fn symbols_of(alphabet: &Alphabet) -> Vec<char> {
        alphabet.letters().map(|l| alphabet.char_of(l)).collect()
    }

    /// The automaton accepting every word.
    pub fn universal(symbols: Vec<char>) -> Fsa {
        Fsa::from_fn(symbols, 1, 0, |_| true, |_, _| 0)
    }

    /// The automaton accepting nothing.
    pub fn empty_language(symbols: Vec<char>) -> Fsa {
        Fsa::from_fn(symbols, 1, 0, |_| false, |_, _| 0)
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn n_letters(&self) -> usize {
        self.symbols.len()
    }

    pub fn n_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting.iter().enumerate().filter(|(_, &a)| a).map(|(s, _)| s)
    }

    pub fn step(&self, s: usize, l: Letter) -> usize {
        self.delta[s * self.symbols.len() + l.index()]
    }

    pub fn run_from(&self, s: usize, w: &Word) -> Result<usize, AutomataError> {
        if s >= self.n_states() {
            return Err(AutomataError::UnknownState(s));
        }
        w.letters().iter().try_fold(s, |s, &l| {
            if l.index() < self.symbols.len() {
                Ok(self.step(s, l))
            } else {
                Err(AutomataError::AlphabetMismatch {
                    expected: format!("{} letters", self.symbols.len()),
                    got: format!("letter {}", l.0),
                })
            }
        })
    }

    pub fn run(&self, w: &Word) -> Result<usize, AutomataError> {
        self.run_from(self.initial, w)
    }

    pub fn accepts(&self, w: &Word) -> Result<bool, AutomataError> {
        Ok(self.accepting[self.run(w)?])
    }

    pub fn render(&self, w: &Word) -> String {
        w.letters().iter().map(|l| self.symbols.get(l.index()).copied().unwrap_or('?')).collect()
    }

    /// Same transition graph with a different initial state.
    pub fn reroot(&self, s: usize) -> Result<Fsa, AutomataError> {
        if s >= self.n_states() {
            return Err(AutomataError::UnknownState(s));
        }
        Ok(Fsa { initial: s, ..self.clone() })
    }

    /// Same transition graph with accepting set exactly `states`.
    pub fn restrict_accepting(&self, states: &[usize]) -> Result<Fsa, AutomataError> {
        let mut accepting = vec![false; self.n_states()];
        for &s in states {
            *accepting.get_mut(s).ok_or(AutomataError::UnknownState(s))? = true;
        }
        Ok(Fsa { accepting, ..self.clone() })
    }

    pub fn complement(&self) -> Fsa {
        Fsa { accepting: self.accepting.iter().map(|a| !a).collect(), ..self.clone() }
    }

    fn check_same_alphabet(&self, other: &Fsa) -> Result<(), AutomataError> {
        if self.symbols == other.symbols {
            Ok(())
        } else {
            Err(AutomataError::AlphabetMismatch {
                expected: self.symbols.iter().collect(),
                got: other.symbols.iter().collect(),
            })
        }
    }

    pub fn intersect(&self, other: &Fsa) -> Result<Fsa, AutomataError> {
        product(&[self, other], |s| s.iter().zip([self, other]).all(|(&q, m)| m.accepting[q]))
    }

    pub fn union(&self, other: &Fsa) -> Result<Fsa, AutomataError> {
        product(&[self, other], |s| s.iter().zip([self, other]).any(|(&q, m)| m.accepting[q]))
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            for l in 0..self.symbols.len() {
                let t = self.step(s, Letter(l as u8));
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
        }
        order
    }

    /// States from which some accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.n_states();
        let k = self.symbols.len();
        let mut preds = vec![Vec::new(); n];
        for s in 0..n {
            for l in 0..k {
                preds[self.delta[s * k + l]].push(s);
            }
        }
        let mut live = self.accepting.clone();
        let mut queue: VecDeque<usize> = self.accepting_states().collect();
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !live[s] {
                    live[s] = true;
                    queue.push_back(s);
                }
            }
        }
        live
    }

    pub fn is_empty(&self) -> bool {
        !self.reachable().iter().any(|&s| self.accepting[s])
    }

    /// Language equality, decided on canonical minimal automata.
    pub fn language_eq(&self, other: &Fsa) -> bool {
        self.symbols == other.symbols && self.minimize() == other.minimize()
    }
}

/// Synchronous product over a shared alphabet, restricted to reachable state
/// tuples. Returns the automaton and the component tuple of each state.
pub fn product_with_states(
    machines: &[&Fsa],
    accept: impl Fn(&[usize]) -> bool,
) -> Result<(Fsa, Vec<Vec<usize>>), AutomataError> {
    product_bounded(machines, accept, usize::MAX)
}

/// [`product_with_states`] failing once more than `cap` states are reached.
pub fn product_bounded(
    machines: &[&Fsa],
    accept: impl Fn(&[usize]) -> bool,
    cap: usize,
) -> Result<(Fsa, Vec<Vec<usize>>), AutomataError> {
    let first = machines
        .first()
        .ok_or_else(|| AutomataError::Malformed("product of no automata".into()))?;
    for m in &machines[1..] {
        first.check_same_alphabet(m)?;
    }
    let k = first.n_letters();
    let start: Vec<usize> = machines.iter().map(|m| m.initial).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut tuples = vec![start];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < tuples.len() {
        for l in 0..k {
            let next: Vec<usize> = tuples[i].iter().zip(machines).map(|(&s, m)| m.step(s, Letter(l as u8))).collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = tuples.len();
                    if id >= cap {
                        return Err(AutomataError::ResourceBound(format!("product exceeds {cap} states")));
                    }
                    index.insert(next.clone(), id);
                    tuples.push(next);
                    id
                }
            };
            delta.push(id);
        }
        i += 1;
    }
    let accepting = tuples.iter().map(|t| accept(t)).collect();
    Ok((Fsa { symbols: first.symbols.clone(), delta, initial: 0, accepting }, tuples))
}

pub fn product(machines: &[&Fsa], accept: impl Fn(&[usize]) -> bool) -> Result<Fsa, AutomataError> {
    product_with_states(machines, accept).map(|(m, _)| m)
}

/// On-disk form: `{alphabet, states, initial, accepting, transitions}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FsaFile {
    pub alphabet: Vec<char>,
    pub states: usize,
    pub initial: usize,
    pub accepting: Vec<usize>,
    pub transitions: Vec<(usize, char, usize)>,
}

impl From<Fsa> for FsaFile {
    fn from(m: Fsa) -> FsaFile {
        let k = m.n_letters();
        let transitions = (0..m.n_states())
            .flat_map(|s| (0..k).map(move |l| (s, l)))
            .map(|(s, l)| (s, m.symbols[l], m.delta[s * k + l]))
            .collect();
        FsaFile {
            states: m.n_states(),
            initial: m.initial,
            accepting: m.accepting_states().collect(),
            transitions,
            alphabet: m.symbols,
        }
    }
}

impl TryFrom<FsaFile> for Fsa {
    type Error = AutomataError;

    fn try_from(f: FsaFile) -> Result<Fsa, AutomataError> {
        let letter = |c: char| {
            f.alphabet
                .iter()
                .position(|&a| a == c)
                .map(|i| Letter(i as u8))
                .ok_or_else(|| AutomataError::Malformed(format!("symbol {c:?} not in alphabet")))
        };
        let transitions = f
            .transitions
            .iter()
            .map(|&(s, c, t)| Ok((s, letter(c)?, t)))
            .collect::<Result<Vec<_>, AutomataError>>()?;
        Fsa::from_partial(f.alphabet.clone(), f.states, f.initial, &f.accepting, &transitions)
    }
}
