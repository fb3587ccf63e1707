use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::automata::Fsa;
use crate::words::{free_reduce, Word};

use super::systems::{ConstraintTarget, VSystem};

/// An assignment of reduced `Y`-words to the `p` variables (per row and
/// position) and the `v` variables (per symbol).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VSolution {
    pub p: Vec<[Word; 3]>,
    pub v: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleResult {
    Found(VSolution),
    /// Nothing within the bound. `complete` is false when the node budget
    /// ran out before the bounded search space was covered.
    ExhaustedBound { nodes: usize, complete: bool },
}

/// A solver for tripod systems with rational constraints over `V`.
pub trait VOracle {
    fn solve(&self, sys: &VSystem) -> OracleResult;
}

/// Depth-first search over `p` words of length at most `bound`, each drawn
/// from its constraint languages in shortlex order. Every `v` is then
/// determined and checked against its constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceOracle {
    pub bound: usize,
    pub node_budget: usize,
}

impl BruteForceOracle {
    pub fn new(bound: usize) -> Self {
        BruteForceOracle { bound, node_budget: 1_000_000 }
    }

    /// Up to `limit` solutions, and whether the bounded search finished.
    pub fn all_solutions(&self, sys: &VSystem, limit: usize) -> (Vec<VSolution>, bool) {
        let mut search = Search::new(self, sys);
        let mut out = Vec::new();
        let complete = search.run(&mut |sol| {
            out.push(sol);
            out.len() < limit
        });
        let complete = complete && out.len() < limit;
        (out, complete)
    }
}

impl VOracle for BruteForceOracle {
    fn solve(&self, sys: &VSystem) -> OracleResult {
        let mut search = Search::new(self, sys);
        let mut found = None;
        let complete = search.run(&mut |sol| {
            found = Some(sol);
            false
        });
        match found {
            Some(sol) => OracleResult::Found(sol),
            None => OracleResult::ExhaustedBound { nodes: search.nodes, complete },
        }
    }
}

/// Convenience wrapper: the default oracle with the given bound.
pub fn vf_oracle_solve(sys: &VSystem, bound: usize) -> OracleResult {
    BruteForceOracle::new(bound).solve(sys)
}

struct Search<'a> {
    sys: &'a VSystem,
    budget: usize,
    nodes: usize,
    /// Candidate words per `p` variable, flattened as `3 * row + pos`.
    candidates: Vec<Vec<Word>>,
    v_constraints: Vec<Vec<&'a Fsa>>,
    /// Tripod index per `(row, pos)`.
    tripod_at: HashMap<(usize, usize), usize>,
    v_cache: HashMap<(usize, Word), bool>,
}

impl<'a> Search<'a> {
    fn new(o: &BruteForceOracle, sys: &'a VSystem) -> Self {
        let n_v = sys.v_names.len();
        let mut candidates = Vec::new();
        for i in 0..sys.n_rows {
            for j in 0..3 {
                let forward: Vec<&Fsa> = sys.constraints_on(ConstraintTarget::P(i, j)).map(|c| &c.fsa).collect();
                let backward: Vec<&Fsa> =
                    sys.constraints_on(ConstraintTarget::PInverse(i, j)).map(|c| &c.fsa).collect();
                let words = match forward.first() {
                    Some(f) => f.enumerate(o.bound),
                    None => backward.first().map_or_else(Vec::new, |b| {
                        b.enumerate(o.bound).into_iter().map(|w| w.inverse()).collect()
                    }),
                };
                let mut ok: Vec<Word> = words
                    .into_iter()
                    .filter(|w| w.is_freely_reduced())
                    .filter(|w| forward.iter().all(|f| f.accepts(w).unwrap_or(false)))
                    .filter(|w| backward.iter().all(|b| b.accepts(&w.inverse()).unwrap_or(false)))
                    .collect();
                ok.sort_by(|a, b| a.shortlex_cmp(b));
                candidates.push(ok);
            }
        }
        let mut v_constraints = vec![Vec::new(); n_v];
        for c in &sys.constraints {
            if let ConstraintTarget::V(v) = c.target {
                v_constraints[v].push(&c.fsa);
            }
        }
        let tripod_at = sys.tripods.iter().enumerate().map(|(k, t)| ((t.row, t.pos), k)).collect();
        Search { sys, budget: o.node_budget, nodes: 0, candidates, v_constraints, tripod_at, v_cache: HashMap::new() }
    }

    fn v_ok(&mut self, v: usize, w: &Word) -> bool {
        if let Some(&b) = self.v_cache.get(&(v, w.clone())) {
            return b;
        }
        let b = self.v_constraints[v].iter().all(|f| f.accepts(w).unwrap_or(false));
        self.v_cache.insert((v, w.clone()), b);
        b
    }

    /// Calls `emit` on each solution until it returns false. Returns whether
    /// the whole bounded space was searched.
    fn run(&mut self, emit: &mut dyn FnMut(VSolution) -> bool) -> bool {
        let rows = self.sys.n_rows;
        let mut p: Vec<Option<Word>> = vec![None; 3 * rows];
        let mut v: Vec<Option<Word>> = vec![None; self.sys.v_names.len()];
        let mut stop = false;
        let finished = self.descend(0, &mut p, &mut v, emit, &mut stop);
        finished && !stop
    }

    /// The tripod value `p_k c p_{k+1}^-1` for position `k` of row `i`.
    fn tripod_value(&self, i: usize, j: usize, p: &[Option<Word>]) -> (usize, Word) {
        let t = &self.sys.tripods[self.tripod_at[&(i, j)]];
        let a = p[3 * i + j].as_ref().expect("assigned");
        let b = p[3 * i + (j + 1) % 3].as_ref().expect("assigned");
        (t.v, free_reduce(&a.concat(&t.c).concat(&b.inverse())))
    }

    // Assigns p variables in order; returns false when the budget ran out.
    fn descend(
        &mut self,
        k: usize,
        p: &mut Vec<Option<Word>>,
        v: &mut Vec<Option<Word>>,
        emit: &mut dyn FnMut(VSolution) -> bool,
        stop: &mut bool,
    ) -> bool {
        if *stop {
            return true;
        }
        if k == p.len() {
            let sol = VSolution {
                p: (0..self.sys.n_rows)
                    .map(|i| std::array::from_fn(|j| p[3 * i + j].clone().expect("assigned")))
                    .collect(),
                v: v.iter().map(|w| w.clone().unwrap_or_default()).collect(),
            };
            if !emit(sol) {
                *stop = true;
            }
            return true;
        }
        let (i, j) = (k / 3, k % 3);
        for idx in 0..self.candidates[k].len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            p[k] = Some(self.candidates[k][idx].clone());
            // Tripods closed by this choice: (i, j-1), and (i, 2) when j = 2.
            let mut closed = Vec::new();
            if j >= 1 {
                closed.push(j - 1);
            }
            if j == 2 {
                closed.push(2);
            }
            let mut newly = Vec::new();
            let mut ok = true;
            for jj in closed {
                let (var, w) = self.tripod_value(i, jj, p);
                match &v[var] {
                    Some(existing) => ok = *existing == w,
                    None => {
                        ok = self.v_ok(var, &w);
                        if ok {
                            v[var] = Some(w);
                            newly.push(var);
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok && !self.descend(k + 1, p, v, emit, stop) {
                return false;
            }
            for var in newly {
                v[var] = None;
            }
            p[k] = None;
            if *stop {
                return true;
            }
        }
        true
    }
}
