use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::abelian::FgaElement;
use crate::automata::Fsa;
use crate::extension::CentralExtension;
use crate::fpa_ppa::{Fpa, Ppa};
use crate::words::{all_words, Word};

use super::constraints::ValueGraph;
use super::{ReductionError, Result, Slot, TriangularSystem, VGroupContext};

/// Data attached to one position `(i, j)` of a triangular system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaSlot {
    /// Tripod centre, a `Y`-word.
    pub c: Word,
    /// FPA state in `T` compatible with `phi(c)`.
    pub s: usize,
    /// End state of `phi(c)` read from `s`.
    pub s_end: usize,
    /// `sigma_q(s, phi(c))`.
    pub a: FgaElement,
    pub b: FgaElement,
    /// Parity value; equal for equal symbols.
    pub d: FgaElement,
}

/// One index `t`: a slot per position, row by row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaIndex {
    pub rows: Vec<[ThetaSlot; 3]>,
}

/// The system being reduced, with its extension and lift group.
#[derive(Clone, Copy)]
pub struct Frame<'a> {
    pub tri: &'a TriangularSystem,
    pub ctx: &'a VGroupContext,
    pub ext: &'a CentralExtension,
}

/// Everything Θ depends on.
pub struct ThetaInputs<'a> {
    pub tri: &'a TriangularSystem,
    pub ctx: &'a VGroupContext,
    pub ext: &'a CentralExtension,
    pub fpa: &'a Fpa,
    pub ppa: &'a Ppa,
    /// Bound on distinct accumulator values per `A`-set.
    pub value_cap: usize,
}

impl ThetaInputs<'_> {
    pub fn frame(&self) -> Frame<'_> {
        Frame { tri: self.tri, ctx: self.ctx, ext: self.ext }
    }
}

/// Choices for one position given its centre: `(s, s_end, a, A(s, c))`.
type SlotOptions = Vec<(usize, usize, FgaElement, Vec<FgaElement>)>;

fn slot_options(inp: &ThetaInputs, c: &Word, graphs: &mut HashMap<usize, Vec<FgaElement>>) -> Result<SlotOptions> {
    let f = inp.fpa;
    let x = inp.ctx.phi.apply(c);
    let mut out = Vec::new();
    for s in f.accepting() {
        if !f.is_compatible(s, &x)? {
            continue;
        }
        let s_end = f.run_from(s, &x)?;
        let a = f.sigma_q_of_state(&inp.ext.pushout, s, &x)?;
        let values = match graphs.get(&s_end) {
            Some(v) => v.clone(),
            None => {
                let v: Vec<FgaElement> =
                    ValueGraph::build(f, &inp.ext.pushout, s_end, inp.value_cap)?.values().into_iter().collect();
                graphs.insert(s_end, v.clone());
                v
            }
        };
        out.push((s, s_end, a, values));
    }
    Ok(out)
}

/// Streams the tuples satisfying the four conditions, in a fixed order:
/// rows are varied last-first like an odometer, with the parity values of
/// the distinct symbols as the fastest digits.
pub struct ThetaStream {
    /// Per row, the admissible centre triples with their slot options.
    rows: Vec<Vec<([Word; 3], [usize; 3])>>,
    options: Vec<SlotOptions>,
    /// Distinct symbols and, per row position, its symbol index.
    symbol_of: Vec<[usize; 3]>,
    n_symbols: usize,
    parities: Vec<FgaElement>,
    digits: Option<Vec<usize>>,
}

/// Enumerates Θ. Per position the centre ranges over `Y`-words of length at
/// most `kappa2` with trivial row product in the base.
pub fn enumerate_theta(inp: &ThetaInputs) -> Result<ThetaStream> {
    let words = all_words(inp.ctx.n_letters(), inp.ctx.kappa2);
    let mut graphs = HashMap::new();
    let mut options: Vec<SlotOptions> = Vec::new();
    let mut option_of: HashMap<Word, usize> = HashMap::new();
    for c in &words {
        let o = slot_options(inp, c, &mut graphs)?;
        if !o.is_empty() {
            option_of.insert(c.clone(), options.len());
            options.push(o);
        }
    }
    let usable: Vec<(&Word, usize)> = words.iter().filter_map(|c| option_of.get(c).map(|&i| (c, i))).collect();
    let projected: Vec<Word> = usable.iter().map(|(c, _)| inp.ctx.project(inp.ext, c)).collect();
    let mut triples = Vec::new();
    for (i1, (c1, o1)) in usable.iter().enumerate() {
        for (i2, (c2, o2)) in usable.iter().enumerate() {
            let g12 = inp.ext.nf(&projected[i1].concat(&projected[i2]));
            for (i3, (c3, o3)) in usable.iter().enumerate() {
                if inp.ext.nf(&g12.concat(&projected[i3])).is_empty() {
                    triples.push(([(*c1).clone(), (*c2).clone(), (*c3).clone()], [*o1, *o2, *o3]));
                }
            }
        }
    }
    let (symbol_of, n_symbols) = symbol_pattern(inp.tri);
    let parities = inp.ppa.parity_group.elements(u64::MAX).expect("parity groups are finite");
    let rows = vec![triples; inp.tri.rows.len()];
    let empty = rows.iter().any(|r| r.is_empty());
    let mut stream = ThetaStream { rows, options, symbol_of, n_symbols, parities, digits: None };
    if !empty {
        stream.digits = Some(vec![0; stream.n_digits()]);
    }
    Ok(stream)
}

/// Index of the distinct symbol at each position, in order of appearance.
pub fn symbol_pattern(tri: &TriangularSystem) -> (Vec<[usize; 3]>, usize) {
    let mut ids: BTreeMap<Slot, usize> = BTreeMap::new();
    let mut order = Vec::new();
    let pattern = tri
        .rows
        .iter()
        .map(|row| {
            row.map(|s| {
                let n = ids.len();
                *ids.entry(s).or_insert_with(|| {
                    order.push(s);
                    n
                })
            })
        })
        .collect();
    (pattern, order.len())
}

impl ThetaStream {
    // Digit layout: per row [triple, (state, value) x 3], then one parity
    // digit per symbol.
    fn n_digits(&self) -> usize {
        self.rows.len() * 7 + self.n_symbols
    }

    fn radix(&self, digits: &[usize], pos: usize) -> usize {
        let per_row = 7;
        if pos >= self.rows.len() * per_row {
            return self.parities.len();
        }
        let (i, k) = (pos / per_row, pos % per_row);
        let row = &self.rows[i];
        if k == 0 {
            return row.len();
        }
        let opts = &self.options[row[digits[i * per_row]].1[(k - 1) / 2]];
        if k % 2 == 1 {
            opts.len()
        } else {
            opts[digits[pos - 1]].3.len()
        }
    }

    fn current(&self, digits: &[usize]) -> ThetaIndex {
        let d_base = self.rows.len() * 7;
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let (cs, os) = &row[digits[i * 7]];
                std::array::from_fn(|j| {
                    let (s, s_end, a, values) = &self.options[os[j]][digits[i * 7 + 1 + 2 * j]];
                    ThetaSlot {
                        c: cs[j].clone(),
                        s: *s,
                        s_end: *s_end,
                        a: a.clone(),
                        b: values[digits[i * 7 + 2 + 2 * j]].clone(),
                        d: self.parities[digits[d_base + self.symbol_of[i][j]]].clone(),
                    }
                })
            })
            .collect();
        ThetaIndex { rows }
    }

    /// Size of Θ, counting tuples already streamed; saturates.
    pub fn total(&self) -> u128 {
        if self.rows.iter().any(|r| r.is_empty()) {
            return 0;
        }
        let mut n: u128 = 1;
        for row in &self.rows {
            let per: u128 = row
                .iter()
                .map(|(_, os)| {
                    os.iter()
                        .map(|&o| self.options[o].iter().map(|x| x.3.len() as u128).sum::<u128>())
                        .product::<u128>()
                })
                .sum();
            n = n.saturating_mul(per);
        }
        n.saturating_mul((self.parities.len() as u128).saturating_pow(self.n_symbols as u32))
    }
}

impl Iterator for ThetaStream {
    type Item = ThetaIndex;

    fn next(&mut self) -> Option<ThetaIndex> {
        let mut digits = self.digits.take()?;
        let out = self.current(&digits);
        // Advance from the last digit; digits after a bumped one restart at 0.
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Some(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < self.radix(&digits, pos) {
                break;
            }
            digits[pos] = 0;
        }
        for d in digits.iter_mut().skip(pos + 1) {
            *d = 0;
        }
        self.digits = Some(digits);
        Some(out)
    }
}

/// Checks the four conditions and the derived fields of `t` directly.
pub fn check_theta(t: &ThetaIndex, inp: &ThetaInputs) -> std::result::Result<(), String> {
    let (f, ext) = (inp.fpa, inp.ext);
    if t.rows.len() != inp.tri.rows.len() {
        return Err(format!("{} rows for a system of {}", t.rows.len(), inp.tri.rows.len()));
    }
    let mut d_of: BTreeMap<Slot, &FgaElement> = BTreeMap::new();
    for (i, row) in t.rows.iter().enumerate() {
        let product = row.iter().fold(Word::empty(), |acc, s| ext.nf(&acc.concat(&inp.ctx.project(ext, &s.c))));
        if !product.is_empty() {
            return Err(format!("row {i}: centres do not multiply to 1"));
        }
        for (j, slot) in row.iter().enumerate() {
            let at = format!("position ({i}, {j})");
            if slot.c.len() > inp.ctx.kappa2 {
                return Err(format!("{at}: centre longer than kappa2"));
            }
            let x = inp.ctx.phi.apply(&slot.c);
            if !f.in_t(slot.s) || !f.is_compatible(slot.s, &x).map_err(|e| e.to_string())? {
                return Err(format!("{at}: state {} not in T or incompatible with the centre", slot.s));
            }
            if f.run_from(slot.s, &x).map_err(|e| e.to_string())? != slot.s_end {
                return Err(format!("{at}: wrong end state"));
            }
            let a = f.sigma_q_of_state(&ext.pushout, slot.s, &x).map_err(|e| e.to_string())?;
            if a != slot.a {
                return Err(format!("{at}: a = {}, expected {a}", slot.a));
            }
            let values = ValueGraph::build(f, &ext.pushout, slot.s_end, inp.value_cap)
                .map_err(|e| e.to_string())?
                .values();
            if !values.contains(&slot.b) {
                return Err(format!("{at}: b = {} is not in A(s, c)", slot.b));
            }
            if !inp.ppa.parity_group.contains(&slot.d) {
                return Err(format!("{at}: d = {} is not a parity value", slot.d));
            }
            let sym = inp.tri.rows[i][j];
            if let Some(prev) = d_of.insert(sym, &slot.d) {
                if prev != &slot.d {
                    return Err(format!("{at}: parity differs from an earlier occurrence of the same symbol"));
                }
            }
        }
    }
    Ok(())
}

/// Witness for a solution of `V_t`: `p` per position and `v` per distinct
/// symbol, all `Y`-words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripodWitness {
    pub p: Vec<[Word; 3]>,
    pub c: Vec<[Word; 3]>,
    pub v: Vec<Word>,
}

/// The index read off from a tripod solution: `s` from the FPA run of
/// `phi(p)`, `b = sigma_q(pi(p c), pi(p'^-1))`, `d` from the PPA run of
/// `phi(v)`.
pub fn theta_from_witness(w: &TripodWitness, inp: &ThetaInputs) -> Result<ThetaIndex> {
    let (f, ext, ctx) = (inp.fpa, inp.ext, inp.ctx);
    let (symbol_of, _) = symbol_pattern(inp.tri);
    let mut rows = Vec::new();
    for (i, (ps, cs)) in w.p.iter().zip(&w.c).enumerate() {
        let mut row = Vec::new();
        for j in 0..3 {
            let (p, c) = (ctx.phi.apply(&ps[j]), ctx.phi.apply(&cs[j]));
            let s = f.product.run(&p)?;
            if !f.in_t(s) {
                return Err(ReductionError::LiftVerificationFailed {
                    row: i,
                    reason: format!("p at position {j} is not in L"),
                });
            }
            if !f.is_compatible(s, &c)? {
                return Err(ReductionError::LiftVerificationFailed {
                    row: i,
                    reason: format!("centre at position {j} is incompatible"),
                });
            }
            let s_end = f.run_from(s, &c)?;
            let a = f.sigma_q_of_state(&ext.pushout, s, &c)?;
            let p_next_inv = ps[(j + 1) % 3].inverse();
            let b = ext.sigma_q(&p.concat(&c), &ctx.phi.apply(&p_next_inv));
            let v = ctx.phi.apply(&w.v[symbol_of[i][j]]);
            let d = inp.ppa.parity(&v)?.cloned().ok_or_else(|| ReductionError::LiftVerificationFailed {
                row: i,
                reason: format!("v at position {j} is not accepted by the parity automaton"),
            })?;
            row.push(ThetaSlot { c: cs[j].clone(), s, s_end, a, b, d });
        }
        rows.push(row.try_into().expect("three positions"));
    }
    Ok(ThetaIndex { rows })
}

/// The witness with every `p` empty and `v = c` the normal form of the
/// base value of each symbol, which must lie in `l` when given. Only
/// available when `phi` is the identity.
pub fn witness_from_base_solution(frame: Frame, l: Option<&Fsa>, values: &[Word]) -> Result<TripodWitness> {
    let Frame { tri, ctx, ext } = frame;
    if ctx.phi.source != ctx.phi.target
        || ctx.phi.images.iter().enumerate().any(|(i, w)| w.len() != 1 || w.letters()[0].index() != i)
    {
        return Err(ReductionError::UnsupportedContext("base solutions lift only through the identity morphism".into()));
    }
    let (symbol_of, n) = symbol_pattern(tri);
    let mut v = vec![Word::empty(); n];
    for (row, syms) in tri.rows.iter().zip(&symbol_of) {
        for (slot, &k) in row.iter().zip(syms) {
            let g = match *slot {
                Slot::Var(x) => &values[x],
                Slot::Const(c) => &tri.constants[c].1.g,
            };
            let rep = ext.nf(g);
            if let Some(l) = l {
                if !l.accepts(&rep)? {
                    return Err(ReductionError::UnsupportedContext(format!(
                        "normal form {} is not in L",
                        l.render(&rep)
                    )));
                }
            }
            v[k] = rep;
        }
    }
    let c = symbol_of.iter().map(|s| s.map(|k| v[k].clone())).collect();
    let p = vec![[Word::empty(), Word::empty(), Word::empty()]; tri.rows.len()];
    Ok(TripodWitness { p, c, v })
}

/// State field of slots built without an FPA.
pub const UNTRACKED_STATE: usize = usize::MAX;

/// The index of a tripod solution with `a`, `b` and `d` evaluated in the
/// extension instead of read from the automata:
/// `a = sigma_q(pi(p), pi(c))`, `b = sigma_q(pi(p c), pi(p'^-1))`,
/// `d = Pa(sigma_rho(pi(v), pi(v)^-1))`. States are left untracked.
pub fn theta_direct(frame: Frame, w: &TripodWitness) -> ThetaIndex {
    let Frame { tri, ctx, ext } = frame;
    let (symbol_of, _) = symbol_pattern(tri);
    let rows = w
        .p
        .iter()
        .zip(&w.c)
        .enumerate()
        .map(|(i, (ps, cs))| {
            std::array::from_fn(|j| {
                let p = ctx.project(ext, &ps[j]);
                let c = ctx.project(ext, &cs[j]);
                let next_inv = ctx.project(ext, &ps[(j + 1) % 3].inverse());
                let v = ctx.project(ext, &w.v[symbol_of[i][j]]);
                ThetaSlot {
                    c: cs[j].clone(),
                    s: UNTRACKED_STATE,
                    s_end: UNTRACKED_STATE,
                    a: ext.sigma_q(&p, &c),
                    b: ext.sigma_q(&ext.nf(&p.concat(&c)), &next_inv),
                    d: ext.kernel.pa(&ext.sigma_rho(&v, &v.inverse())),
                }
            })
        })
        .collect();
    ThetaIndex { rows }
}

/// `theta_from_witness` of [`witness_from_base_solution`].
pub fn theta_from_base_solution(inp: &ThetaInputs, l: &Fsa, values: &[Word]) -> Result<(ThetaIndex, TripodWitness)> {
    let w = witness_from_base_solution(inp.frame(), Some(l), values)?;
    Ok((theta_from_witness(&w, inp)?, w))
}
