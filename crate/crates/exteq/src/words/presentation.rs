use num_rational::BigRational;

use super::{Alphabet, Word, WordProblem, WordsError};

/// A finite presentation of a group, with the metadata the pipeline consumes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
    /// Hyperbolicity constant, when known.
    pub delta: Option<BigRational>,
    /// Small-cancellation fraction the Dehn engine is gated on.
    pub sc_fraction: Option<BigRational>,
    /// Engine used when a group is built with [`WordProblem::Auto`].
    pub word_problem: WordProblem,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self, WordsError> {
        for (i, r) in relators.iter().enumerate() {
            if r.is_empty() || !r.is_cyclically_reduced() {
                return Err(WordsError::RelatorNotReduced(i));
            }
        }
        Ok(Presentation { alphabet, relators, delta: None, sc_fraction: None, word_problem: WordProblem::Auto })
    }

    /// Builds a presentation from generator characters and relator strings.
    pub fn parse(generators: &str, relators: &[&str]) -> Result<Self, WordsError> {
        let gens: Vec<char> = generators.chars().filter(|c| !c.is_whitespace()).collect();
        let alphabet = Alphabet::new(&gens)?;
        let rels = relators
            .iter()
            .map(|r| alphabet.parse(r))
            .collect::<Result<Vec<_>, _>>()?;
        Presentation::new(alphabet, rels)
    }

    pub fn with_delta(mut self, delta: BigRational) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_sc_fraction(mut self, f: BigRational) -> Self {
        self.sc_fraction = Some(f);
        self
    }

    pub fn with_word_problem(mut self, wp: WordProblem) -> Self {
        self.word_problem = wp;
        self
    }

    pub fn n_letters(&self) -> usize {
        self.alphabet.size()
    }

    /// Exponent-sum matrix: one row per relator, one column per generator.
    pub fn exponent_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![0i64; self.alphabet.rank()];
                for l in r.letters() {
                    row[l.generator()] += if l.is_inverse() { -1 } else { 1 };
                }
                row
            })
            .collect()
    }

    /// Surface group of genus 2, `<a,b,c,d | [a,b][c,d]>`.
    pub fn genus_two() -> Self {
        Presentation::parse("abcd", &["abABcdCD"]).expect("static presentation")
    }

    /// Infinite dihedral group `<s,t | s^2, t^2>`. Its relators are proper
    /// powers, so it is not C'(1/6); Dehn's algorithm is still complete for
    /// it (reduced words in the free product have no `ss`, `tt` blocks).
    pub fn infinite_dihedral() -> Self {
        Presentation::parse("st", &["ss", "tt"])
            .expect("static presentation")
            .with_word_problem(WordProblem::Dehn)
    }

    /// Klein four-group `<s,t | s^2, t^2, [s,t]>`.
    pub fn klein_four() -> Self {
        Presentation::parse("st", &["ss", "tt", "stST"]).expect("static presentation")
    }

    /// Free group on the given generators.
    pub fn free(generators: &str) -> Self {
        Presentation::parse(generators, &[]).expect("static presentation")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unreduced_relators() {
        assert!(Presentation::parse("ab", &["aA"]).is_err());
        assert!(Presentation::parse("ab", &["abA"]).is_err());
        assert!(Presentation::parse("ab", &["aab"]).is_ok());
    }

    #[test]
    fn exponent_matrix_of_commutator_is_zero() {
        let p = Presentation::genus_two();
        assert_eq!(p.exponent_matrix(), vec![vec![0, 0, 0, 0]]);
    }
}
