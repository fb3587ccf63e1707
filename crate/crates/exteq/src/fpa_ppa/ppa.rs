use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Fpa, FpaError};
use crate::abelian::{FgaElement, FgaGroup};
use crate::automata::{AutomataError, Fsa};
use crate::extension::CentralExtension;
use crate::lrational::FamilyKind;
use crate::words::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PpaState {
    Sink,
    Live { left: usize, right: usize, parity: FgaElement },
}

/// Product of the left and right predictors with a parity accumulator. At
/// the end of an `L`-word `w` the accumulator holds `Pa(sigma_rho(w, w^-1))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ppa {
    /// Accepting states are the live states whose two components accept.
    pub product: Fsa,
    pub states: Vec<PpaState>,
    pub parity_group: FgaGroup,
}

/// Builds the reachable part of the parity predicting automaton from the
/// left and right future predicting automata.
pub fn build_ppa(left: &Fpa, right: &Fpa, ext: &CentralExtension, cap: usize) -> Result<Ppa, FpaError> {
    for (m, kind) in [(left, FamilyKind::RhoLeft), (right, FamilyKind::RhoRightReversed)] {
        if m.kind != kind {
            return Err(FpaError::WrongKind { expected: kind, got: m.kind });
        }
    }
    if left.symbols() != right.symbols() {
        return Err(AutomataError::AlphabetMismatch {
            expected: left.symbols().iter().collect(),
            got: right.symbols().iter().collect(),
        }
        .into());
    }
    let a = &ext.kernel;
    let parity_group = a.parity_group();
    let k = left.symbols().len();
    // Pa(sigma_rho(x, x^-1)) per letter.
    let self_term: Vec<FgaElement> = (0..k)
        .map(|x| {
            let x = Letter(x as u8);
            ext.sigma_rho(&Word::letter(x), &Word::letter(x.inverse()))
        })
        .collect();

    let start = PpaState::Live { left: left.product.initial(), right: right.product.initial(), parity: parity_group.zero() };
    let mut index: HashMap<PpaState, usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut access = vec![Word::empty()];
    let mut delta = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut intern = |st: PpaState, w: Word, states: &mut Vec<PpaState>, access: &mut Vec<Word>| -> Result<usize, FpaError> {
        if let Some(&id) = index.get(&st) {
            return Ok(id);
        }
        if states.len() >= cap {
            return Err(AutomataError::ResourceBound(format!("parity automaton exceeds {cap} states")).into());
        }
        let id = states.len();
        index.insert(st.clone(), id);
        states.push(st);
        access.push(w);
        Ok(id)
    };
    // States are processed in creation order, so `delta` is filled row by row.
    while let Some(i) = queue.pop_front() {
        debug_assert_eq!(delta.len(), i * k);
        let st = states[i].clone();
        for x in (0..k).map(|x| Letter(x as u8)) {
            let next = match &st {
                PpaState::Sink => PpaState::Sink,
                PpaState::Live { left: s1, right: s2, parity } => {
                    let (in1, in2) = (left.in_t(*s1), right.in_t(*s2));
                    if in1 != in2 {
                        return Err(FpaError::SinkOnPrefix(left.product.render(&access[i])));
                    }
                    if !in1 {
                        PpaState::Sink
                    } else {
                        let term = a.sub(&a.sub(&self_term[x.index()], left.value(*s1, x)?), right.value(*s2, x.inverse())?);
                        PpaState::Live {
                            left: left.product.step(*s1, x),
                            right: right.product.step(*s2, x),
                            parity: parity_group.add(parity, &a.pa(&term)),
                        }
                    }
                }
            };
            let before = states.len();
            let id = intern(next, access[i].with(x), &mut states, &mut access)?;
            if states.len() > before {
                queue.push_back(id);
            }
            delta.push(id);
        }
    }
    let accepting = |s: usize| match &states[s] {
        PpaState::Live { left: s1, right: s2, .. } => left.in_t(*s1) && right.in_t(*s2),
        PpaState::Sink => false,
    };
    let product = Fsa::from_fn(left.symbols().to_vec(), states.len(), 0, accepting, |s, x| delta[s * k + x.index()]);
    Ok(Ppa { product, states, parity_group })
}

impl Ppa {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Parity component of an accepting state.
    pub fn parity_of_state(&self, s: usize) -> Option<&FgaElement> {
        match &self.states[s] {
            PpaState::Live { parity, .. } if self.product.is_accepting(s) => Some(parity),
            _ => None,
        }
    }

    /// The branch value of an accepted word.
    pub fn parity(&self, w: &Word) -> Result<Option<&FgaElement>, FpaError> {
        Ok(self.parity_of_state(self.product.run(w)?))
    }

    /// Branch values that occur at reachable accepting states.
    pub fn branch_values(&self) -> Vec<FgaElement> {
        let mut out: Vec<FgaElement> = (0..self.n_states()).filter_map(|s| self.parity_of_state(s).cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// `D(d)`: the accepted words whose accumulator ends at `d`.
    pub fn branch(&self, d: &FgaElement) -> Result<Fsa, FpaError> {
        if !self.parity_group.contains(d) {
            return Err(FpaError::ValueNotInASet(d.to_string()));
        }
        let acc: Vec<usize> = (0..self.n_states()).filter(|&s| self.parity_of_state(s) == Some(d)).collect();
        Ok(self.product.restrict_accepting(&acc)?)
    }
}
