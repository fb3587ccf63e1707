//! Product automata over a predictor family. The future predicting
//! automaton reads an `L`-word `w` and, at the end, knows the cocycle value
//! against every letter; for the `q`-family this determines `sigma_q(w, v)`
//! for every compatible continuation `v`. The parity predicting automaton
//! combines the `rho`-families and tracks `Pa(sigma_rho(w, w^-1))`.

mod check;
mod ppa;

pub use check::{check_fpa_key_property, check_ppa_key_property, PropertyReport};
pub use ppa::{build_ppa, Ppa, PpaState};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{AbelianError, FgaElement, FgaGroup};
use crate::automata::{product_bounded, AutomataError, Fsa, MonoidMorphism};
use crate::extension::CentralExtension;
use crate::lrational::{FamilyKind, PredictorFamily};
use crate::words::{Letter, Word};

/// Default bound on the number of product states.
pub const DEFAULT_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpaError {
    #[error("state {0} is not an accepting state")]
    NotAcceptingState(usize),
    #[error("expected a {expected:?} family, got {got:?}")]
    WrongKind { expected: FamilyKind, got: FamilyKind },
    #[error("word {word:?} is not compatible with state {state}")]
    Incompatible { state: usize, word: String },
    #[error("no word reaches state {0}")]
    EmptyBranch(usize),
    #[error("the L-prefix {0:?} reaches the sink; the predictor families disagree")]
    SinkOnPrefix(String),
    #[error("accumulated value set exceeds {0} entries")]
    AccumulatorBound(usize),
    #[error("value {0} is not in the value set")]
    ValueNotInASet(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Abelian(#[from] AbelianError),
}

/// The product of all automata of a family. A state is accepting (lies in
/// `T`) when for every letter exactly one component of that letter accepts;
/// the accepted value is the readout of the state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "FpaFile", try_from = "FpaFile")]
pub struct Fpa {
    pub kind: FamilyKind,
    /// Accepting states are exactly `T`.
    pub product: Fsa,
    /// `(letter, value)` of each component, in family order.
    pub components: Vec<(Letter, FgaElement)>,
    /// For states of `T`, the readout value of each letter.
    pub readout: Vec<Option<Vec<FgaElement>>>,
    pub validation_radius: usize,
    /// Shortlex-least word reaching each state.
    access: Vec<Word>,
}

/// The q-family product.
pub fn build_fpa(fam: &PredictorFamily, cap: usize) -> Result<Fpa, FpaError> {
    expect_kind(fam, FamilyKind::QLeft)?;
    Fpa::from_family(fam, cap)
}

/// The left rho-family product; its readout at the end state of `w` is
/// `sigma_rho(w, x)`.
pub fn build_lfpa(fam: &PredictorFamily, cap: usize) -> Result<Fpa, FpaError> {
    expect_kind(fam, FamilyKind::RhoLeft)?;
    Fpa::from_family(fam, cap)
}

/// The right rho-family product. Each component is fed the inverse of the
/// letter read, so the product reads `w` by running the reversed automata
/// on the reversal of `w^-1`; its readout at the end state of `w` is
/// `sigma_rho(x, w^-1)`.
pub fn build_rfpa(fam: &PredictorFamily, cap: usize) -> Result<Fpa, FpaError> {
    expect_kind(fam, FamilyKind::RhoRightReversed)?;
    Fpa::from_family(fam, cap)
}

fn expect_kind(fam: &PredictorFamily, expected: FamilyKind) -> Result<(), FpaError> {
    if fam.kind != expected {
        return Err(FpaError::WrongKind { expected, got: fam.kind });
    }
    Ok(())
}

/// Breadth-first access words, letters in index order, so each is the
/// shortlex-least word reaching its state.
fn access_words(m: &Fsa) -> Vec<Word> {
    let mut access: Vec<Option<Word>> = vec![None; m.n_states()];
    access[m.initial()] = Some(Word::empty());
    let mut queue = VecDeque::from([m.initial()]);
    while let Some(s) = queue.pop_front() {
        for l in (0..m.n_letters()).map(|l| Letter(l as u8)) {
            let t = m.step(s, l);
            if access[t].is_none() {
                access[t] = Some(access[s].as_ref().expect("visited").with(l));
                queue.push_back(t);
            }
        }
    }
    // Unreachable states never occur in a reachable product.
    access.into_iter().map(|w| w.unwrap_or_default()).collect()
}

impl Fpa {
    fn from_family(fam: &PredictorFamily, cap: usize) -> Result<Fpa, FpaError> {
        let symbols = fam.symbols().to_vec();
        let k = symbols.len();
        let components: Vec<(Letter, FgaElement)> =
            fam.entries.iter().map(|e| (fam.letter_of(e), e.value.clone())).collect();
        let machines: Vec<Fsa> = match fam.kind {
            FamilyKind::RhoRightReversed => {
                let images = (0..k).map(|i| Word::letter(Letter(i as u8).inverse())).collect();
                let invert = MonoidMorphism::new(symbols.clone(), symbols.clone(), images)?;
                fam.entries.iter().map(|e| e.automaton.inverse_morphism(&invert)).collect::<Result<_, _>>()?
            }
            _ => fam.entries.iter().map(|e| e.automaton.clone()).collect(),
        };
        let refs: Vec<&Fsa> = machines.iter().collect();
        let read = |t: &[usize]| -> Option<Vec<FgaElement>> {
            let mut out: Vec<Option<FgaElement>> = vec![None; k];
            for ((x, a), (m, &s)) in components.iter().zip(refs.iter().zip(t)) {
                if m.is_accepting(s) {
                    if out[x.index()].is_some() {
                        return None;
                    }
                    out[x.index()] = Some(a.clone());
                }
            }
            out.into_iter().collect()
        };
        let (product, tuples) = product_bounded(&refs, |t| read(t).is_some(), cap)?;
        let readout = tuples.iter().map(|t| read(t)).collect();
        let access = access_words(&product);
        Ok(Fpa { kind: fam.kind, product, components, readout, validation_radius: fam.validation_radius, access })
    }

    pub fn symbols(&self) -> &[char] {
        self.product.symbols()
    }

    pub fn n_states(&self) -> usize {
        self.product.n_states()
    }

    /// The accepting set `T`.
    pub fn accepting(&self) -> impl Iterator<Item = usize> + '_ {
        self.product.accepting_states()
    }

    pub fn in_t(&self, s: usize) -> bool {
        s < self.n_states() && self.product.is_accepting(s)
    }

    fn require_t(&self, s: usize) -> Result<(), FpaError> {
        if self.in_t(s) {
            Ok(())
        } else {
            Err(FpaError::NotAcceptingState(s))
        }
    }

    /// The value read out at a state of `T` for letter `x`.
    pub fn value(&self, s: usize, x: Letter) -> Result<&FgaElement, FpaError> {
        self.require_t(s)?;
        Ok(&self.readout[s].as_ref().expect("T state has a readout")[x.index()])
    }

    /// Shortlex-least word ending in `s`.
    pub fn access_word(&self, s: usize) -> Result<&Word, FpaError> {
        self.access.get(s).ok_or(FpaError::EmptyBranch(s))
    }

    /// `M(s)`: the product with `s` as its only accepting state.
    pub fn branch(&self, s: usize) -> Result<Fsa, FpaError> {
        self.require_t(s)?;
        Ok(self.product.restrict_accepting(&[s])?)
    }

    /// `M_s`: the product started at `s`.
    pub fn reroot(&self, s: usize) -> Result<Fsa, FpaError> {
        self.require_t(s)?;
        Ok(self.product.reroot(s)?)
    }

    /// End state of `v` read from `s`.
    pub fn run_from(&self, s: usize, v: &Word) -> Result<usize, FpaError> {
        Ok(self.product.run_from(s, v)?)
    }

    /// Whether `v` read from `s` ends in `T`.
    pub fn is_compatible(&self, s: usize, v: &Word) -> Result<bool, FpaError> {
        self.require_t(s)?;
        Ok(self.in_t(self.run_from(s, v)?))
    }

    fn incompatible(&self, s: usize, v: &Word) -> FpaError {
        FpaError::Incompatible { state: s, word: self.product.render(v) }
    }

    /// `sigma_q(s, v)` from the automaton alone, by the chain rule
    /// `sigma_q(w, v x) = sigma_q(w, v) + sigma_q(w v, x) - sigma_q(v, x)`;
    /// both single-letter terms are readouts. `values` is the group the
    /// readouts live in, the pushout `A'`.
    pub fn sigma_q_of_state(&self, values: &FgaGroup, s: usize, v: &Word) -> Result<FgaElement, FpaError> {
        if self.kind != FamilyKind::QLeft {
            return Err(FpaError::WrongKind { expected: FamilyKind::QLeft, got: self.kind });
        }
        self.require_t(s)?;
        let mut cur = s;
        let mut prefix = self.product.initial();
        let mut acc = values.zero();
        for &x in v.letters() {
            if !self.in_t(cur) || !self.in_t(prefix) {
                return Err(self.incompatible(s, v));
            }
            acc = values.add(&acc, self.value(cur, x)?);
            acc = values.sub(&acc, self.value(prefix, x)?);
            cur = self.product.step(cur, x);
            prefix = self.product.step(prefix, x);
        }
        if !self.in_t(cur) {
            return Err(self.incompatible(s, v));
        }
        Ok(acc)
    }

    /// `sigma_q(w, v)` for the shortlex-least `w` ending in `s`.
    pub fn sigma_q_of_state_witness(&self, ext: &CentralExtension, s: usize, v: &Word) -> Result<FgaElement, FpaError> {
        if !self.is_compatible(s, v)? {
            return Err(self.incompatible(s, v));
        }
        Ok(ext.sigma_q(self.access_word(s)?, v))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ComponentFile {
    letter: char,
    value: FgaElement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ReadoutFile {
    state: usize,
    values: Vec<FgaElement>,
}

/// On-disk form: the product automaton annotated with its components and
/// the readout table of `T`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FpaFile {
    kind: FamilyKind,
    #[serde(default)]
    validation_radius: usize,
    automaton: Fsa,
    components: Vec<ComponentFile>,
    readout: Vec<ReadoutFile>,
}

impl From<Fpa> for FpaFile {
    fn from(f: Fpa) -> FpaFile {
        let symbols = f.symbols().to_vec();
        FpaFile {
            kind: f.kind,
            validation_radius: f.validation_radius,
            components: f
                .components
                .iter()
                .map(|(x, a)| ComponentFile { letter: symbols[x.index()], value: a.clone() })
                .collect(),
            readout: f
                .readout
                .iter()
                .enumerate()
                .filter_map(|(state, r)| r.as_ref().map(|values| ReadoutFile { state, values: values.clone() }))
                .collect(),
            automaton: f.product,
        }
    }
}

impl TryFrom<FpaFile> for Fpa {
    type Error = FpaError;

    fn try_from(f: FpaFile) -> Result<Fpa, FpaError> {
        let m = f.automaton;
        let malformed = |msg: String| FpaError::Automata(AutomataError::Malformed(msg));
        let components = f
            .components
            .into_iter()
            .map(|c| {
                let i = m.symbols().iter().position(|&d| d == c.letter);
                i.map(|i| (Letter(i as u8), c.value)).ok_or_else(|| malformed(format!("unknown letter {:?}", c.letter)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut readout = vec![None; m.n_states()];
        for r in f.readout {
            if r.state >= m.n_states() || r.values.len() != m.n_letters() {
                return Err(malformed(format!("bad readout for state {}", r.state)));
            }
            readout[r.state] = Some(r.values);
        }
        if (0..m.n_states()).any(|s| m.is_accepting(s) != readout[s].is_some()) {
            return Err(malformed("readout table does not match the accepting states".into()));
        }
        let access = access_words(&m);
        Ok(Fpa { kind: f.kind, product: m, components, readout, validation_radius: f.validation_radius, access })
    }
}
