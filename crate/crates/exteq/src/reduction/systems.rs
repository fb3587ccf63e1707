use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::{smith_normal_form, solve_linear_system, AbelianLinearSystem, FgaElement, FgaGroup};
use crate::automata::Fsa;
use crate::extension::Coords;
use crate::words::Word;

use super::constraints::{representatives, ValueGraph};
use super::theta::{symbol_pattern, Frame, ThetaIndex, ThetaInputs};
use super::{Result, Slot};

/// What a rational constraint is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintTarget {
    /// `p_{i,j}`.
    P(usize, usize),
    /// `p_{i,j}^-1`.
    PInverse(usize, usize),
    /// The `V`-variable of a symbol.
    V(usize),
}

/// Where a constraint comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Words ending in an FPA state.
    State(usize),
    /// Compatible words with a given `sigma_q` value.
    Value(FgaElement),
    /// Words with a given parity.
    Parity(FgaElement),
    /// Representatives of a constant, or all of `L` for a variable.
    Symbol(Slot),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub target: ConstraintTarget,
    pub kind: ConstraintKind,
    /// Over `Y`.
    pub fsa: Fsa,
}

/// `p_{i,j} c_{i,j} p_{i,j+1}^-1 = v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tripod {
    pub row: usize,
    pub pos: usize,
    pub c: Word,
    pub v: usize,
}

/// The tripod system `V_t` with its rational constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VSystem {
    pub n_rows: usize,
    /// Per distinct symbol, its name.
    pub v_names: Vec<String>,
    pub tripods: Vec<Tripod>,
    pub constraints: Vec<Constraint>,
}

impl VSystem {
    pub fn constraints_on(&self, target: ConstraintTarget) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.target == target)
    }
}

/// Builds `V_t`. `slack` is passed to [`representatives`] for constants.
pub fn build_vt(t: &ThetaIndex, inp: &ThetaInputs, l: &Fsa, slack: usize) -> Result<VSystem> {
    let (tri, ctx, ext, f) = (inp.tri, inp.ctx, inp.ext, inp.fpa);
    let (symbol_of, n) = symbol_pattern(tri);
    let mut v_names = vec![String::new(); n];
    let mut v_symbol = vec![None; n];
    let mut v_parity: Vec<Option<FgaElement>> = vec![None; n];
    let mut tripods = Vec::new();
    let mut constraints = Vec::new();
    let mut graphs: BTreeMap<usize, ValueGraph> = BTreeMap::new();
    for (i, row) in t.rows.iter().enumerate() {
        for (j, slot) in row.iter().enumerate() {
            let v = symbol_of[i][j];
            v_names[v] = tri.slot_name(tri.rows[i][j]).to_string();
            v_symbol[v] = Some(tri.rows[i][j]);
            v_parity[v] = Some(slot.d.clone());
            tripods.push(Tripod { row: i, pos: j, c: slot.c.clone(), v });
            constraints.push(Constraint {
                target: ConstraintTarget::P(i, j),
                kind: ConstraintKind::State(slot.s),
                fsa: ctx.pull_back(&f.branch(slot.s)?)?,
            });
            if let std::collections::btree_map::Entry::Vacant(e) = graphs.entry(slot.s_end) {
                e.insert(ValueGraph::build(f, &ext.pushout, slot.s_end, inp.value_cap)?);
            }
            constraints.push(Constraint {
                target: ConstraintTarget::PInverse(i, (j + 1) % 3),
                kind: ConstraintKind::Value(slot.b.clone()),
                fsa: ctx.pull_back(&graphs[&slot.s_end].level(&slot.b)?)?,
            });
        }
    }
    for v in 0..n {
        let d = v_parity[v].take().expect("every symbol occurs");
        constraints.push(Constraint {
            target: ConstraintTarget::V(v),
            kind: ConstraintKind::Parity(d.clone()),
            fsa: ctx.pull_back(&inp.ppa.branch(&d)?)?,
        });
        let sym = v_symbol[v].expect("every symbol occurs");
        let lang = match sym {
            Slot::Var(_) => l.clone(),
            Slot::Const(c) => representatives(l, ext, &tri.constants[c].1.g, slack)?,
        };
        constraints.push(Constraint { target: ConstraintTarget::V(v), kind: ConstraintKind::Symbol(sym), fsa: ctx.pull_back(&lang)? });
    }
    Ok(VSystem { n_rows: t.rows.len(), v_names, tripods, constraints })
}

/// `W_t`: one linear equation over `A` per row, or no solution when a
/// constant or right-hand side is not in the image of the doubling map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WSystem {
    Linear {
        /// Variables are those of the triangular system.
        system: AbelianLinearSystem,
        /// The value standing for each constant.
        constants: BTreeMap<usize, FgaElement>,
    },
    NoSolution { reason: String },
}

/// Builds `W_t`. Constants contribute
/// `iota1^-1(q-coordinate of iota2(e) + iota4(d))`; row `i` has right-hand
/// side `iota1^-1(sum_j (a + b + iota4(d)) - sigma_q(pi(c_1), pi(c_2)))`.
pub fn build_wt(t: &ThetaIndex, frame: Frame) -> Result<WSystem> {
    let (tri, ext) = (frame.tri, frame.ext);
    let (k, p) = (&ext.kernel, &ext.pushout);
    let mut constants = BTreeMap::new();
    for (row, slots) in tri.rows.iter().zip(&t.rows) {
        for (sym, slot) in row.iter().zip(slots) {
            if let Slot::Const(c) = *sym {
                if constants.contains_key(&c) {
                    continue;
                }
                let (name, e) = &tri.constants[c];
                let q = ext.convert(&ext.iota2(e)?, Coords::Q)?;
                match k.iota1_inverse(&p.add(&q.a, &k.iota4(&slot.d))) {
                    Ok(w) => {
                        constants.insert(c, w);
                    }
                    Err(_) => {
                        return Ok(WSystem::NoSolution {
                            reason: format!("constant {name} with parity {} is not in the image of A", slot.d),
                        })
                    }
                }
            }
        }
    }
    let mut system = AbelianLinearSystem::new(k.clone(), tri.variables.clone());
    for (i, (row, slots)) in tri.rows.iter().zip(&t.rows).enumerate() {
        let total = p.sum(
            slots.iter().map(|s| p.add(&p.add(&s.a, &s.b), &k.iota4(&s.d))).collect::<Vec<_>>().iter(),
        );
        let (c1, c2) = (frame.ctx.project(ext, &slots[0].c), frame.ctx.project(ext, &slots[1].c));
        let rhs = match k.iota1_inverse(&p.sub(&total, &ext.sigma_q(&c1, &c2))) {
            Ok(r) => r,
            Err(_) => return Ok(WSystem::NoSolution { reason: format!("right-hand side of row {i} is not in the image of A") }),
        };
        let mut coeffs: BTreeMap<usize, i64> = BTreeMap::new();
        let mut rhs = rhs;
        for sym in row {
            match *sym {
                Slot::Var(x) => *coeffs.entry(x).or_default() += 1,
                Slot::Const(c) => rhs = k.sub(&rhs, &constants[&c]),
            }
        }
        system.push(coeffs.into_iter().filter(|&(_, c)| c != 0).collect(), rhs);
    }
    Ok(WSystem::Linear { system, constants })
}

/// Result of solving `W_t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WOutcome {
    Solved(Vec<FgaElement>),
    NoSolution(String),
}

impl WSystem {
    pub fn solve(&self) -> WOutcome {
        match self {
            WSystem::NoSolution { reason } => WOutcome::NoSolution(reason.clone()),
            WSystem::Linear { system, .. } => match solve_linear_system(system) {
                Some(x) => WOutcome::Solved(x),
                None => WOutcome::NoSolution(explain_inconsistency(system)),
            },
        }
    }
}

/// Renders a group element, as a bare integer in a rank one free group.
pub fn render_value(a: &FgaElement) -> String {
    match (a.free.as_slice(), a.tors.as_slice()) {
        ([x], []) => x.to_string(),
        _ => a.to_string(),
    }
}

/// Explains why a linear system has no solution. When an integer
/// combination of the rows cancels every variable but not the right-hand
/// side, the result reads `0 = k`; the combination is scaled so that its
/// first nonzero coefficient is positive.
pub fn explain_inconsistency(sys: &AbelianLinearSystem) -> String {
    let g: &FgaGroup = &sys.group;
    let n = sys.variables.len();
    let m: Vec<Vec<BigInt>> = sys
        .equations
        .iter()
        .map(|eq| {
            let mut row = vec![BigInt::zero(); n.max(1)];
            for &(v, c) in &eq.coeffs {
                row[v] += c;
            }
            row
        })
        .collect();
    if m.is_empty() {
        return "empty system".into();
    }
    let snf = smith_normal_form(&m);
    let rank = snf.rank();
    for y in snf.u.iter().skip(rank) {
        let Some(mut y) = y.iter().map(|c| c.to_i64()).collect::<Option<Vec<i64>>>() else { continue };
        if y.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
            y.iter_mut().for_each(|c| *c = -*c);
        }
        let value = g.sum(sys.equations.iter().zip(&y).map(|(eq, &c)| g.scale(c, &eq.rhs)).collect::<Vec<_>>().iter());
        if !value.is_zero() {
            let mut combination = String::new();
            for (i, &c) in y.iter().enumerate().filter(|(_, &c)| c != 0) {
                let sign = match (combination.is_empty(), c < 0) {
                    (true, false) => "",
                    (true, true) => "-",
                    (false, false) => " + ",
                    (false, true) => " - ",
                };
                let k = c.unsigned_abs();
                let coeff = if k == 1 { String::new() } else { format!("{k} ") };
                combination.push_str(&format!("{sign}{coeff}row {i}"));
            }
            return format!("0 = {} (combination {combination})", render_value(&value));
        }
    }
    "no solution: a divisibility obstruction, no integer combination cancels all variables".into()
}

/// Per original position, the values read off a `V_t` solution, for
/// checking the rational-constraint lemma.
pub fn check_lemma_items(
    t: &ThetaIndex,
    frame: Frame,
    p: &[[Word; 3]],
    v: &[Word],
) -> Vec<String> {
    let (tri, ext, ctx) = (frame.tri, frame.ext, frame.ctx);
    let (symbol_of, _) = symbol_pattern(tri);
    let mut failures = Vec::new();
    for (i, row) in t.rows.iter().enumerate() {
        for (j, slot) in row.iter().enumerate() {
            let pp = ctx.project(ext, &p[i][j]);
            let c = ctx.project(ext, &slot.c);
            let next_inv = ctx.project(ext, &p[i][(j + 1) % 3].inverse());
            let vv = ctx.project(ext, &v[symbol_of[i][j]]);
            let at = format!("({i}, {j})");
            let item1 = ext.sigma_q(&pp, &c);
            if item1 != slot.a {
                failures.push(format!("{at} item 1: sigma_q(p, c) = {item1}, a = {}", slot.a));
            }
            let item2 = ext.sigma_q(&ext.nf(&pp.concat(&c)), &next_inv);
            if item2 != slot.b {
                failures.push(format!("{at} item 2: sigma_q(p c, p'^-1) = {item2}, b = {}", slot.b));
            }
            let item3 = ext.kernel.pa(&ext.sigma_rho(&vv, &vv.inverse()));
            if item3 != slot.d {
                failures.push(format!("{at} item 3: Pa(sigma_rho(v, v^-1)) = {item3}, d = {}", slot.d));
            }
            if let Slot::Const(k) = tri.rows[i][j] {
                if vv != ext.nf(&tri.constants[k].1.g) {
                    failures.push(format!("{at} item 4: v does not project to the constant"));
                }
            }
        }
    }
    failures
}

/// The right-hand side of each row of `W_t` computed from a tripod
/// solution instead of the automata:
/// `sum_j (sigma_q(p, c) + sigma_q(p c, p'^-1) + iota4(d)) - sigma_q(c_1, c_2)`,
/// before applying `iota1^-1`.
pub fn witness_rhs(t: &ThetaIndex, frame: Frame, p: &[[Word; 3]]) -> Vec<FgaElement> {
    let (ext, ctx) = (frame.ext, frame.ctx);
    let (k, g) = (&ext.kernel, &ext.pushout);
    t.rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut acc = g.zero();
            for (j, slot) in row.iter().enumerate() {
                let pp = ctx.project(ext, &p[i][j]);
                let c = ctx.project(ext, &slot.c);
                let next_inv = ctx.project(ext, &p[i][(j + 1) % 3].inverse());
                acc = g.add(&acc, &ext.sigma_q(&pp, &c));
                acc = g.add(&acc, &ext.sigma_q(&ext.nf(&pp.concat(&c)), &next_inv));
                acc = g.add(&acc, &k.iota4(&slot.d));
            }
            let (c1, c2) = (ctx.project(ext, &row[0].c), ctx.project(ext, &row[1].c));
            g.sub(&acc, &ext.sigma_q(&c1, &c2))
        })
        .collect()
}
