//! Reduction of an equation system over `E` to constrained tripod systems
//! over a free lift group `V` and linear systems over `A`, one pair per
//! index `t` in the finite set `Theta`.

mod constraints;
mod context;
mod lift;
mod oracle;
mod solve;
mod systems;
mod theta;

pub use constraints::{build_lb_automaton, compute_a_set, representatives, ValueGraph};
pub use context::VGroupContext;
pub use lift::{input_digest, lift_solution, make_certificate, verify_certificate, Certificate, Lift, LiftedRow, CERTIFICATE_VERSION};
pub use oracle::{vf_oracle_solve, BruteForceOracle, OracleResult, VOracle, VSolution};
pub use solve::{
    base_solutions, exhaustive_solve, group_elements, solve_direct, Mode, Pipeline, PipelineConfig, SolveConfig, SolveReport,
    Strategy, ThetaOutcome, ThetaStatus, Verdict,
};
pub use systems::{
    build_vt, build_wt, check_lemma_items, explain_inconsistency, render_value, witness_rhs, Constraint, ConstraintKind,
    ConstraintTarget, Tripod, VSystem, WOutcome, WSystem,
};
pub use theta::{
    check_theta, enumerate_theta, symbol_pattern, theta_direct, theta_from_base_solution, theta_from_witness,
    witness_from_base_solution, Frame, ThetaIndex, ThetaInputs, ThetaSlot, ThetaStream, TripodWitness, UNTRACKED_STATE,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{AbelianError, FgaElement};
use crate::automata::AutomataError;
use crate::extension::{Coords, CentralExtension, ExtElement, ExtensionError};
use crate::fpa_ppa::FpaError;
use crate::lrational::LrationalError;
use crate::words::{Word, WordsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("equation {0} is empty")]
    EmptyEquation(usize),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("symbol {0:?} is declared twice or clashes with an inverse")]
    AmbiguousSymbol(String),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("lift verification failed in row {row}: {reason}")]
    LiftVerificationFailed { row: usize, reason: String },
    #[error("finite-complete mode needs {0}")]
    NotFiniteComplete(String),
    #[error("certificate does not match: {0}")]
    CertificateMismatch(String),
    #[error("unsupported lift group: {0}")]
    UnsupportedContext(String),
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    #[error(transparent)]
    Fpa(#[from] FpaError),
    #[error(transparent)]
    Lrational(#[from] LrationalError),
}

pub type Result<T> = std::result::Result<T, ReductionError>;

/// A variable or constant, possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var { index: usize, inverse: bool },
    Const { index: usize, inverse: bool },
}

/// Equations `w = 1` over variables and constants of `E`. Constants are
/// stored in `rho` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    pub variables: Vec<String>,
    pub constants: Vec<(String, ExtElement)>,
    pub equations: Vec<Vec<Term>>,
}

/// An entry of a triangular equation: no inverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    Var(usize),
    Const(usize),
}

/// Equations `e1 e2 e3 = 1`. The first `n_original` variables are those of
/// the source system; the rest are fresh and determined by them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularSystem {
    pub variables: Vec<String>,
    pub n_original: usize,
    pub constants: Vec<(String, ExtElement)>,
    pub rows: Vec<[Slot; 3]>,
    /// How each fresh variable is computed from earlier ones.
    pub definitions: Vec<Definition>,
}

/// Value of a fresh variable: the inverse of the product of two slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Definition {
    pub var: usize,
    pub inverse_of: (Slot, Option<Slot>),
}

impl EquationSystem {
    /// Parses equations written as whitespace-separated symbol names; a name
    /// with its case swapped denotes the inverse.
    pub fn parse(variables: Vec<String>, constants: Vec<(String, ExtElement)>, equations: &[&str]) -> Result<Self> {
        let mut names: BTreeMap<String, Term> = BTreeMap::new();
        let declared = variables
            .iter()
            .enumerate()
            .map(|(index, n)| (n.clone(), Term::Var { index, inverse: false }))
            .chain(constants.iter().enumerate().map(|(index, (n, _))| (n.clone(), Term::Const { index, inverse: false })));
        for (name, term) in declared.collect::<Vec<_>>() {
            let inv = swap_case(&name);
            let inv_term = match term {
                Term::Var { index, .. } => Term::Var { index, inverse: true },
                Term::Const { index, .. } => Term::Const { index, inverse: true },
            };
            if names.insert(name.clone(), term).is_some() {
                return Err(ReductionError::AmbiguousSymbol(name));
            }
            if inv != name && names.insert(inv.clone(), inv_term).is_some() {
                return Err(ReductionError::AmbiguousSymbol(inv));
            }
        }
        let equations = equations
            .iter()
            .enumerate()
            .map(|(i, eq)| {
                let terms = eq
                    .split_whitespace()
                    .map(|t| names.get(t).copied().ok_or_else(|| ReductionError::UnknownSymbol(t.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if terms.is_empty() {
                    return Err(ReductionError::EmptyEquation(i));
                }
                Ok(terms)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EquationSystem { variables, constants, equations })
    }

    pub fn render_equation(&self, eq: &[Term]) -> String {
        eq.iter()
            .map(|t| match *t {
                Term::Var { index, inverse } => name_of(&self.variables[index], inverse),
                Term::Const { index, inverse } => name_of(&self.constants[index].0, inverse),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Whether `values` (one `rho`-coordinate element per variable) solves
    /// every equation, by direct multiplication in `E`.
    pub fn is_solved_by(&self, ext: &CentralExtension, values: &[ExtElement]) -> Result<bool> {
        for eq in &self.equations {
            let mut acc = ext.identity(Coords::Rho);
            for t in eq {
                let (e, inverse) = match *t {
                    Term::Var { index, inverse } => (&values[index], inverse),
                    Term::Const { index, inverse } => (&self.constants[index].1, inverse),
                };
                let e = if inverse { ext.inv(e) } else { e.clone() };
                acc = ext.mult(&acc, &e)?;
            }
            if !ext.is_identity(&acc) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn swap_case(s: &str) -> String {
    s.chars().map(|c| if c.is_uppercase() { c.to_lowercase().next().unwrap_or(c) } else { c.to_uppercase().next().unwrap_or(c) }).collect()
}

fn name_of(name: &str, inverse: bool) -> String {
    if inverse {
        swap_case(name)
    } else {
        name.to_string()
    }
}

/// Name of the identity constant added by triangularization.
pub const IDENTITY: &str = "1";

/// Cuts every equation into triangles. An equation `w1 ... wk = 1` with
/// `k > 3` becomes `w1 w2 t1' = 1, t1 w3 t2' = 1, ..., t_{k-3} w_{k-1} wk = 1`,
/// where `t'` is a fresh variable tied to `t` by `t t' 1 = 1`. Inverted
/// variables get the same treatment; inverted constants become constants.
/// Short equations are padded with the identity constant.
pub fn triangularize(ext: &CentralExtension, sys: &EquationSystem) -> Result<TriangularSystem> {
    let mut tri = TriangularSystem {
        variables: sys.variables.clone(),
        n_original: sys.variables.len(),
        constants: sys.constants.clone(),
        rows: Vec::new(),
        definitions: Vec::new(),
    };
    let identity = tri.constant(IDENTITY, ext.identity(Coords::Rho));
    let mut inverse_var: BTreeMap<usize, usize> = BTreeMap::new();
    let mut slots_of = |tri: &mut TriangularSystem, t: Term| -> Slot {
        match t {
            Term::Var { index, inverse: false } => Slot::Var(index),
            Term::Var { index, inverse: true } => Slot::Var(*inverse_var.entry(index).or_insert_with(|| {
                let v = tri.fresh(&name_of(&sys.variables[index], true));
                tri.rows.push([Slot::Var(index), Slot::Var(v), Slot::Const(identity)]);
                tri.definitions.push(Definition { var: v, inverse_of: (Slot::Var(index), None) });
                v
            })),
            Term::Const { index, inverse: false } => Slot::Const(index),
            Term::Const { index, inverse: true } => {
                let (name, e) = &sys.constants[index];
                Slot::Const(tri.constant(&name_of(name, true), ext.inv(e)))
            }
        }
    };
    for (i, eq) in sys.equations.iter().enumerate() {
        if eq.is_empty() {
            return Err(ReductionError::EmptyEquation(i));
        }
        let slots: Vec<Slot> = eq.iter().map(|&t| slots_of(&mut tri, t)).collect();
        match slots.len() {
            1 => tri.rows.push([slots[0], Slot::Const(identity), Slot::Const(identity)]),
            2 => tri.rows.push([slots[0], slots[1], Slot::Const(identity)]),
            3 => tri.rows.push([slots[0], slots[1], slots[2]]),
            k => {
                // t_j is the product of the first j + 1 symbols.
                let mut prev: Option<usize> = None;
                for j in 1..k - 2 {
                    let t = tri.fresh(&format!("t{}_{}", i, j));
                    let t_inv = tri.fresh(&format!("T{}_{}", i, j));
                    let head = prev.map_or(slots[0], Slot::Var);
                    tri.rows.push([head, slots[j], Slot::Var(t_inv)]);
                    tri.definitions.push(Definition { var: t_inv, inverse_of: (head, Some(slots[j])) });
                    tri.definitions.push(Definition { var: t, inverse_of: (Slot::Var(t_inv), None) });
                    tri.rows.push([Slot::Var(t), Slot::Var(t_inv), Slot::Const(identity)]);
                    prev = Some(t);
                }
                tri.rows.push([Slot::Var(prev.expect("k > 3")), slots[k - 2], slots[k - 1]]);
            }
        }
    }
    Ok(tri)
}

impl TriangularSystem {
    fn fresh(&mut self, name: &str) -> usize {
        let mut n = name.to_string();
        while self.variables.contains(&n) {
            n.push('\'');
        }
        self.variables.push(n);
        self.variables.len() - 1
    }

    fn constant(&mut self, name: &str, e: ExtElement) -> usize {
        if let Some(i) = self.constants.iter().position(|(n, _)| n == name) {
            return i;
        }
        self.constants.push((name.to_string(), e));
        self.constants.len() - 1
    }

    /// Extends values of the original variables to all variables, using
    /// `mul` and `inv` of whatever group the values live in.
    pub fn extend<T: Clone>(
        &self,
        original: &[T],
        constant: impl Fn(usize) -> T,
        mul: impl Fn(&T, &T) -> T,
        inv: impl Fn(&T) -> T,
    ) -> Vec<T> {
        let mut values: Vec<Option<T>> = original.iter().cloned().map(Some).collect();
        values.resize(self.variables.len(), None);
        let get = |values: &[Option<T>], s: Slot| match s {
            Slot::Var(v) => values[v].clone().expect("definitions are ordered"),
            Slot::Const(c) => constant(c),
        };
        for d in &self.definitions {
            let (x, y) = d.inverse_of;
            let prod = match y {
                Some(y) => mul(&get(&values, x), &get(&values, y)),
                None => get(&values, x),
            };
            values[d.var] = Some(inv(&prod));
        }
        values.into_iter().map(|v| v.expect("every fresh variable is defined")).collect()
    }

    pub fn render_row(&self, row: &[Slot; 3]) -> String {
        row.iter().map(|s| self.slot_name(*s)).collect::<Vec<_>>().join(" ")
    }

    pub fn slot_name(&self, s: Slot) -> &str {
        match s {
            Slot::Var(v) => &self.variables[v],
            Slot::Const(c) => &self.constants[c].0,
        }
    }

    /// Whether `values` (one element per variable, `rho` coordinates) solves
    /// every triangle in `E`.
    pub fn is_solved_by(&self, ext: &CentralExtension, values: &[ExtElement]) -> Result<bool> {
        for row in &self.rows {
            let mut acc = ext.identity(Coords::Rho);
            for &s in row {
                let e = match s {
                    Slot::Var(v) => &values[v],
                    Slot::Const(c) => &self.constants[c].1,
                };
                acc = ext.mult(&acc, e)?;
            }
            if !ext.is_identity(&acc) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Triangular system over the base group: constants replaced by their
/// normal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSystem {
    pub variables: Vec<String>,
    pub constants: Vec<(String, Word)>,
    pub rows: Vec<[Slot; 3]>,
}

/// Projects the constants to the base group.
pub fn project_to_base(tri: &TriangularSystem) -> BaseSystem {
    BaseSystem {
        variables: tri.variables.clone(),
        constants: tri.constants.iter().map(|(n, e)| (n.clone(), e.g.clone())).collect(),
        rows: tri.rows.clone(),
    }
}

/// `p(e)` for an element given in any coordinates.
pub fn base_of(e: &ExtElement) -> &Word {
    &e.g
}

/// Kernel values of constants are irrelevant to the base; this reports the
/// kernel part of a constant, for display.
pub fn central_part(e: &ExtElement) -> &FgaElement {
    &e.a
}
