use std::collections::HashMap;

use super::{AutomataError, Fsa};
use crate::words::{Letter, Word};

impl Fsa {
    /// The minimal complete automaton, with states numbered in breadth-first
    /// order from the initial state. Equal languages give equal results.
    pub fn minimize(&self) -> Fsa {
        let k = self.n_letters();
        let order = self.reachable();
        let mut local = vec![usize::MAX; self.n_states()];
        for (i, &s) in order.iter().enumerate() {
            local[s] = i;
        }
        let n = order.len();
        let succ = |i: usize, l: usize| local[self.step(order[i], Letter(l as u8))];
        // Moore refinement.
        let mut class: Vec<usize> = order.iter().map(|&s| usize::from(self.is_accepting(s))).collect();
        let mut n_classes = 0;
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|i| {
                    let mut sig = Vec::with_capacity(k + 1);
                    sig.push(class[i]);
                    sig.extend((0..k).map(|l| class[succ(i, l)]));
                    let fresh = ids.len();
                    *ids.entry(sig).or_insert(fresh)
                })
                .collect();
            let done = ids.len() == n_classes;
            n_classes = ids.len();
            class = next;
            if done {
                break;
            }
        }
        // Canonical numbering by BFS over classes.
        let mut rep = vec![usize::MAX; n_classes];
        for i in (0..n).rev() {
            rep[class[i]] = i;
        }
        let mut number = vec![usize::MAX; n_classes];
        let mut queue = vec![class[0]];
        number[class[0]] = 0;
        let mut head = 0;
        while head < queue.len() {
            let c = queue[head];
            head += 1;
            for l in 0..k {
                let d = class[succ(rep[c], l)];
                if number[d] == usize::MAX {
                    number[d] = queue.len();
                    queue.push(d);
                }
            }
        }
        Fsa::from_fn(
            self.symbols().to_vec(),
            queue.len(),
            0,
            |s| self.is_accepting(order[rep[queue[s]]]),
            |s, l| number[class[succ(rep[queue[s]], l.index())]],
        )
    }

    /// Automaton for the reversed language, by subset construction on the
    /// reversed edges. Fails once more than `cap` subsets appear.
    pub fn reverse(&self, cap: usize) -> Result<Fsa, AutomataError> {
        let m = self.minimize();
        let k = m.n_letters();
        let mut preds = vec![vec![Vec::new(); m.n_states()]; k];
        for s in 0..m.n_states() {
            for (l, p) in preds.iter_mut().enumerate() {
                p[m.step(s, Letter(l as u8))].push(s);
            }
        }
        let start: Vec<usize> = m.accepting_states().collect();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
        let mut subsets = vec![start];
        let mut delta = Vec::new();
        let mut i = 0;
        while i < subsets.len() {
            for p in &preds {
                let mut next: Vec<usize> = subsets[i].iter().flat_map(|&t| p[t].iter().copied()).collect();
                next.sort_unstable();
                next.dedup();
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if subsets.len() >= cap {
                            return Err(AutomataError::ResourceBound(format!("reversal exceeds {cap} states")));
                        }
                        index.insert(next.clone(), subsets.len());
                        subsets.push(next);
                        subsets.len() - 1
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let init = m.initial();
        let rev = Fsa::from_fn(
            m.symbols().to_vec(),
            subsets.len(),
            0,
            |s| subsets[s].binary_search(&init).is_ok(),
            |s, l| delta[s * k + l.index()],
        );
        Ok(rev.minimize())
    }

    /// All accepted words of length at most `max_len`, in shortlex order.
    pub fn enumerate(&self, max_len: usize) -> Vec<Word> {
        let k = self.n_letters();
        // Shortest distance from each state to acceptance, for pruning.
        let n = self.n_states();
        let mut dist: Vec<usize> = (0..n).map(|s| if self.is_accepting(s) { 0 } else { usize::MAX }).collect();
        loop {
            let mut changed = false;
            for s in 0..n {
                let best = (0..k)
                    .map(|l| dist[self.step(s, Letter(l as u8))].saturating_add(1))
                    .min()
                    .unwrap_or(usize::MAX);
                if best < dist[s] {
                    dist[s] = best;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut out = Vec::new();
        let mut layer = vec![(Word::empty(), self.initial())];
        for len in 0..=max_len {
            layer.retain(|(_, s)| dist[*s] <= max_len - len);
            out.extend(layer.iter().filter(|(_, s)| self.is_accepting(*s)).map(|(w, _)| w.clone()));
            if len == max_len {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|(w, s)| (0..k).map(move |l| (w.with(Letter(l as u8)), self.step(*s, Letter(l as u8)))))
                .collect();
        }
        out
    }
}
