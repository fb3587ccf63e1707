use crate::automata::{Fsa, MonoidMorphism};
use crate::extension::CentralExtension;
use crate::words::{free_reduce, Alphabet, Word};

use super::{ReductionError, Result};

/// The lift group `V`: the free group on `Y`, mapped to the base by
/// evaluating `phi` in the base group. `kappa2` bounds the `Y`-words used as
/// tripod centres.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VGroupContext {
    pub phi: MonoidMorphism,
    pub kappa2: usize,
}

impl VGroupContext {
    /// `Y = X` with `phi` the identity.
    pub fn identity(ext: &CentralExtension, kappa2: usize) -> Self {
        let symbols = Fsa::symbols_of(&ext.base.presentation.alphabet);
        VGroupContext { phi: MonoidMorphism::identity(symbols), kappa2 }
    }

    /// A context over a separate alphabet `Y` with generator images in `X`.
    pub fn with_generators(ext: &CentralExtension, y: &Alphabet, images: &[Word], kappa2: usize) -> Result<Self> {
        let phi = MonoidMorphism::from_generators(y, &ext.base.presentation.alphabet, images)?;
        Ok(VGroupContext { phi, kappa2 })
    }

    pub fn symbols(&self) -> &[char] {
        &self.phi.source
    }

    pub fn n_letters(&self) -> usize {
        self.phi.source.len()
    }

    pub fn render(&self, w: &Word) -> String {
        w.letters().iter().map(|l| self.phi.source[l.index()]).collect()
    }

    /// Product in `V`.
    pub fn mul(&self, u: &Word, v: &Word) -> Word {
        free_reduce(&u.concat(v))
    }

    /// `pi(w)`: the base normal form of `phi(w)`.
    pub fn project(&self, ext: &CentralExtension, w: &Word) -> Word {
        ext.nf(&self.phi.apply(w))
    }

    /// Pulls a constraint over `X` back to `Y`.
    pub fn pull_back(&self, k: &Fsa) -> Result<Fsa> {
        Ok(k.inverse_morphism(&self.phi)?)
    }

    /// Checks that `pi` and `phi` agree with the base group on every word of
    /// length at most `radius`: `pi(u v) = pi(u) pi(v)` and
    /// `pi(y^-1) = pi(y)^-1`.
    pub fn check_square(&self, ext: &CentralExtension, radius: usize) -> Result<()> {
        let words = crate::words::all_words(self.n_letters(), radius);
        for y in (0..self.n_letters()).map(|i| crate::words::Letter(i as u8)) {
            let w = Word::letter(y);
            if !ext.base.equal(&self.project(ext, &w.inverse()), &self.project(ext, &w).inverse()) {
                return Err(ReductionError::UnsupportedContext(format!(
                    "phi does not respect inverses at {}",
                    self.render(&w)
                )));
            }
        }
        for u in &words {
            for v in &words {
                let lhs = self.project(ext, &self.mul(u, v));
                let rhs = ext.nf(&self.project(ext, u).concat(&self.project(ext, v)));
                if lhs != rhs {
                    return Err(ReductionError::UnsupportedContext(format!(
                        "projection is not a homomorphism at ({}, {})",
                        self.render(u),
                        self.render(v)
                    )));
                }
            }
        }
        Ok(())
    }
}
