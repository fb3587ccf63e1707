use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::abelian::{FgaElement, FgaGroup};
use crate::automata::Fsa;
use crate::extension::CentralExtension;
use crate::fpa_ppa::{Fpa, FpaError};
use crate::lrational::FamilyKind;
use crate::words::{Letter, Word};

use super::{ReductionError, Result};

/// Words compatible with a state `s` of the future predicting automaton,
/// tracked together with the running value of `sigma_q(u, w)` for any `u`
/// ending in `s`. A node is `(state from s, state from the initial state,
/// accumulated value)`; node 0 is the start, the last node is the sink.
#[derive(Clone, Debug)]
pub struct ValueGraph {
    symbols: Vec<char>,
    nodes: Vec<(usize, usize, FgaElement)>,
    delta: Vec<usize>,
    sink: usize,
    /// Set when some compatible word leaves `L` when read from the initial
    /// state; such words are dropped.
    pub left_language: bool,
}

impl ValueGraph {
    /// Breadth-first construction; fails once more than `cap` distinct
    /// accumulated values appear.
    pub fn build(f: &Fpa, values: &FgaGroup, s: usize, cap: usize) -> Result<Self> {
        if f.kind != FamilyKind::QLeft {
            return Err(FpaError::WrongKind { expected: FamilyKind::QLeft, got: f.kind }.into());
        }
        if !f.in_t(s) {
            return Err(FpaError::NotAcceptingState(s).into());
        }
        let k = f.symbols().len();
        let start = (s, f.product.initial(), values.zero());
        let mut index: HashMap<(usize, usize, FgaElement), usize> = HashMap::from([(start.clone(), 0)]);
        let mut nodes = vec![start];
        let mut seen_values: BTreeSet<FgaElement> = BTreeSet::from([values.zero()]);
        let mut targets: Vec<Option<(usize, usize, FgaElement)>> = Vec::new();
        let mut left_language = false;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (cur, init, acc) = nodes[i].clone();
            for x in (0..k).map(|x| Letter(x as u8)) {
                let (c2, i2) = (f.product.step(cur, x), f.product.step(init, x));
                if !f.in_t(c2) {
                    targets.push(None);
                    continue;
                }
                if !f.in_t(i2) {
                    left_language = true;
                    targets.push(None);
                    continue;
                }
                let acc2 = values.sub(&values.add(&acc, f.value(cur, x)?), f.value(init, x)?);
                let node = (c2, i2, acc2.clone());
                if !index.contains_key(&node) {
                    seen_values.insert(acc2);
                    if seen_values.len() > cap {
                        return Err(FpaError::AccumulatorBound(cap).into());
                    }
                    index.insert(node.clone(), nodes.len());
                    queue.push_back(nodes.len());
                    nodes.push(node.clone());
                }
                targets.push(Some(node));
            }
        }
        let sink = nodes.len();
        let mut delta: Vec<usize> = targets.into_iter().map(|t| t.map_or(sink, |n| index[&n])).collect();
        delta.extend(std::iter::repeat_n(sink, k));
        Ok(ValueGraph { symbols: f.symbols().to_vec(), nodes, delta, sink, left_language })
    }

    /// All values `sigma_q(s, w)` over compatible `w`.
    pub fn values(&self) -> BTreeSet<FgaElement> {
        self.nodes.iter().map(|n| n.2.clone()).collect()
    }

    /// Compatible words with value `b`.
    pub fn level(&self, b: &FgaElement) -> Result<Fsa> {
        if !self.nodes.iter().any(|n| &n.2 == b) {
            return Err(FpaError::ValueNotInASet(b.to_string()).into());
        }
        let k = self.symbols.len();
        Ok(Fsa::from_fn(
            self.symbols.clone(),
            self.sink + 1,
            0,
            |n| n != self.sink && &self.nodes[n].2 == b,
            |n, x| self.delta[n * k + x.index()],
        ))
    }
}

/// `A(s, c)`: the values `sigma_q(s', w)` over words `w` compatible with
/// the end state `s'` of `c` read from `s`.
pub fn compute_a_set(
    f: &Fpa,
    ext: &CentralExtension,
    s: usize,
    c: &Word,
    cap: usize,
) -> Result<BTreeSet<FgaElement>> {
    let s_end = end_state(f, s, c)?;
    Ok(ValueGraph::build(f, &ext.pushout, s_end, cap)?.values())
}

/// `L(b)`: the words `w` compatible with `s'` and `sigma_q(s', w) = b`.
pub fn build_lb_automaton(
    f: &Fpa,
    ext: &CentralExtension,
    s: usize,
    c: &Word,
    b: &FgaElement,
    cap: usize,
) -> Result<Fsa> {
    let s_end = end_state(f, s, c)?;
    ValueGraph::build(f, &ext.pushout, s_end, cap)?.level(b)
}

fn end_state(f: &Fpa, s: usize, c: &Word) -> Result<usize> {
    if !f.is_compatible(s, c)? {
        return Err(FpaError::Incompatible { state: s, word: f.product.render(c) }.into());
    }
    Ok(f.run_from(s, c)?)
}

/// The words of `l` of length at most `|g| + slack` that represent `g`, as
/// a trie automaton. Prefixes that can no longer reach `g` in the letters
/// left are pruned.
pub fn representatives(l: &Fsa, ext: &CentralExtension, g: &Word, slack: usize) -> Result<Fsa> {
    let g = ext.nf(g);
    let bound = g.len() + slack;
    let k = l.n_letters();
    let mut transitions = Vec::new();
    let mut accepting = Vec::new();
    let mut n_nodes = 1;
    let live = l.live_states();
    // (trie node, automaton state, word)
    let mut stack = vec![(0usize, l.initial(), Word::empty())];
    while let Some((node, state, w)) = stack.pop() {
        let rest = ext.nf(&w.inverse().concat(&g));
        if rest.is_empty() && l.is_accepting(state) {
            accepting.push(node);
        }
        if w.len() == bound {
            continue;
        }
        for x in (0..k).map(|x| Letter(x as u8)) {
            let next = l.step(state, x);
            if !live[next] {
                continue;
            }
            let w2 = w.with(x);
            if ext.nf(&w2.inverse().concat(&g)).len() > bound - w2.len() {
                continue;
            }
            transitions.push((node, x, n_nodes));
            stack.push((n_nodes, next, w2));
            n_nodes += 1;
            if n_nodes > 1_000_000 {
                return Err(ReductionError::ResourceBound("representative trie exceeds 10^6 nodes".into()));
            }
        }
    }
    Ok(Fsa::from_partial(l.symbols().to_vec(), n_nodes, 0, &accepting, &transitions)?)
}
