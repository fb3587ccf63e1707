use serde::{Deserialize, Serialize};

use super::{AutomataError, Fsa};
use crate::words::{Alphabet, Word};

/// A monoid morphism `Y* -> X*`, given by the image of every source letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidMorphism {
    pub source: Vec<char>,
    pub target: Vec<char>,
    pub images: Vec<Word>,
}

impl MonoidMorphism {
    pub fn new(source: Vec<char>, target: Vec<char>, images: Vec<Word>) -> Result<Self, AutomataError> {
        if images.len() != source.len() {
            return Err(AutomataError::Malformed(format!(
                "{} images for {} source letters",
                images.len(),
                source.len()
            )));
        }
        if images.iter().flat_map(|w| w.letters()).any(|l| l.index() >= target.len()) {
            return Err(AutomataError::Malformed("image letter outside the target alphabet".into()));
        }
        Ok(MonoidMorphism { source, target, images })
    }

    /// Morphism between group alphabets determined by generator images;
    /// inverse letters map to inverse words.
    pub fn from_generators(source: &Alphabet, target: &Alphabet, images: &[Word]) -> Result<Self, AutomataError> {
        if images.len() != source.rank() {
            return Err(AutomataError::Malformed(format!(
                "{} images for {} generators",
                images.len(),
                source.rank()
            )));
        }
        let all = source
            .letters()
            .map(|y| {
                let w = &images[y.generator()];
                if y.is_inverse() {
                    w.inverse()
                } else {
                    w.clone()
                }
            })
            .collect();
        MonoidMorphism::new(Fsa::symbols_of(source), Fsa::symbols_of(target), all)
    }

    /// Identity on a symbol set.
    pub fn identity(symbols: Vec<char>) -> Self {
        let images = (0..symbols.len()).map(|i| Word::letter(crate::words::Letter(i as u8))).collect();
        MonoidMorphism { source: symbols.clone(), target: symbols, images }
    }

    pub fn apply(&self, w: &Word) -> Word {
        Word(w.letters().iter().flat_map(|l| self.images[l.index()].letters().iter().copied()).collect())
    }
}

impl Fsa {
    /// `{w over Y : phi(w) accepted}`, on the same state set.
    pub fn inverse_morphism(&self, phi: &MonoidMorphism) -> Result<Fsa, AutomataError> {
        if phi.target != self.symbols() {
            return Err(AutomataError::AlphabetMismatch {
                expected: self.symbols().iter().collect(),
                got: phi.target.iter().collect(),
            });
        }
        Ok(Fsa::from_fn(
            phi.source.clone(),
            self.n_states(),
            self.initial(),
            |s| self.is_accepting(s),
            |s, y| self.run_from(s, &phi.images[y.index()]).expect("image checked against target"),
        ))
    }
}
