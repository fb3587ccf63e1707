//! Central extensions `1 -> A -> E -> G -> 1` given by lifts of the base
//! relators, the pushout `E'` with doubled torsion, the shortlex section
//! `rho`, the symmetric section `q` and their cocycles.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{solve_linear_system, AbelianError, AbelianLinearSystem, FgaElement, FgaGroup};
use crate::words::{CosetTable, Engine, Group, Letter, Word, WordsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("word is not trivial in the base group")]
    NotTrivialInBase,
    #[error("coordinate systems differ: {0:?} vs {1:?}")]
    CoordMismatch(Coords, Coords),
    #[error("element is not in the image of E")]
    NotInE,
    #[error("expected {expected} relator lifts, got {got}")]
    LiftCount { expected: usize, got: usize },
    #[error("relator lift {0} is not an element of the kernel")]
    BadLift(usize),
    #[error("relator lifts do not define an extension with this kernel")]
    InconsistentLifts,
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error(transparent)]
    Abelian(#[from] AbelianError),
}

/// Which section the coordinates `(g, a)` refer to: `rho` into `E` with
/// `a` in `A`, `rho' = iota2 rho` into `E'`, or `q` into `E'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coords {
    Rho,
    RhoPrime,
    Q,
}

/// The element `s(g) i(a)` for the section `s` named by `coords`; `g` is a
/// shortlex normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtElement {
    pub coords: Coords,
    pub g: Word,
    pub a: FgaElement,
}

/// A central extension presented by `E = < X, A | r = i(z_r), A central >`:
/// the lift of each base relator `r`, read as a word in the lifted
/// generators, equals `i(z_r)`.
pub struct CentralExtension {
    pub base: Group,
    pub kernel: FgaGroup,
    pub pushout: FgaGroup,
    pub relator_lifts: Vec<FgaElement>,
    /// For finite base groups, `edge_cocycle[c][x]` is the `A`-part picked
    /// up by the edge from coset `c` along letter `x`.
    edge_cocycle: Option<Vec<Vec<FgaElement>>>,
    sigma_cache: Mutex<HashMap<(Word, Word), FgaElement>>,
    sigma_q_cache: Mutex<HashMap<(Word, Word), FgaElement>>,
}

impl CentralExtension {
    pub fn new(base: Group, kernel: FgaGroup, relator_lifts: Vec<FgaElement>) -> Result<Self, ExtensionError> {
        let expected = base.presentation.relators.len();
        if relator_lifts.len() != expected {
            return Err(ExtensionError::LiftCount { expected, got: relator_lifts.len() });
        }
        if let Some(i) = relator_lifts.iter().position(|z| !kernel.contains(z)) {
            return Err(ExtensionError::BadLift(i));
        }
        let edge_cocycle = match &base.engine {
            Engine::Coset(t) => Some(solve_edge_cocycle(&base, t, &kernel, &relator_lifts)?),
            _ => None,
        };
        Ok(CentralExtension {
            pushout: kernel.pushout(),
            base,
            kernel,
            relator_lifts,
            edge_cocycle,
            sigma_cache: Mutex::new(HashMap::new()),
            sigma_q_cache: Mutex::new(HashMap::new()),
        })
    }

    /// The split extension `G x A`.
    pub fn split(base: Group, kernel: FgaGroup) -> Result<Self, ExtensionError> {
        let lifts = vec![kernel.zero(); base.presentation.relators.len()];
        Self::new(base, kernel, lifts)
    }

    pub fn nf(&self, w: &Word) -> Word {
        self.base.normal_form(w)
    }

    /// The `a` in `A` with `w = i(a)` in `E`, for `w` trivial in the base.
    pub fn central_defect(&self, w: &Word) -> Result<FgaElement, ExtensionError> {
        match (&self.base.engine, &self.edge_cocycle) {
            (Engine::Coset(t), Some(f)) => {
                if t.trace(w) != 0 {
                    return Err(ExtensionError::NotTrivialInBase);
                }
                Ok(self.walk_cocycle(t, f, 0, w))
            }
            (Engine::Dehn(d, _), _) => {
                let (rest, log) = d.reduce(w);
                if !rest.is_empty() {
                    return Err(ExtensionError::NotTrivialInBase);
                }
                Ok(self.defect_of_log(log.iter().map(|s| (s.relator, s.sign))))
            }
            _ => {
                if !self.base.is_trivial(w) {
                    return Err(ExtensionError::NotTrivialInBase);
                }
                Ok(self.kernel.zero())
            }
        }
    }

    /// Same as [`central_defect`](Self::central_defect) but reducing with the
    /// rightmost-first Dehn policy; only differs in the engine path taken.
    pub fn central_defect_rightmost(&self, w: &Word) -> Result<FgaElement, ExtensionError> {
        match &self.base.engine {
            Engine::Dehn(d, _) => {
                let (rest, log) = d.reduce_rightmost(w);
                if !rest.is_empty() {
                    return Err(ExtensionError::NotTrivialInBase);
                }
                Ok(self.defect_of_log(log.iter().map(|s| (s.relator, s.sign))))
            }
            _ => self.central_defect(w),
        }
    }

    fn defect_of_log(&self, log: impl Iterator<Item = (usize, i8)>) -> FgaElement {
        let k = &self.kernel;
        log.fold(k.zero(), |acc, (r, sign)| k.add(&acc, &k.scale(i64::from(sign), &self.relator_lifts[r])))
    }

    fn walk_cocycle(&self, t: &CosetTable, f: &[Vec<FgaElement>], start: usize, w: &Word) -> FgaElement {
        let k = &self.kernel;
        let mut c = start;
        let mut acc = k.zero();
        for &l in w.letters() {
            acc = k.add(&acc, &f[c][l.index()]);
            c = t.act(c, l);
        }
        acc
    }

    /// `sigma_rho(g, h)` with `rho(g) rho(h) = rho(gh) i(sigma_rho(g, h))`.
    pub fn sigma_rho(&self, g: &Word, h: &Word) -> FgaElement {
        let (g, h) = (self.nf(g), self.nf(h));
        if g.is_empty() || h.is_empty() {
            return self.kernel.zero();
        }
        let key = (g, h);
        if let Some(v) = self.sigma_cache.lock().expect("cocycle cache poisoned").get(&key) {
            return v.clone();
        }
        let (g, h) = &key;
        let v = match (&self.base.engine, &self.edge_cocycle) {
            (Engine::Coset(t), Some(f)) => self.walk_cocycle(t, f, t.trace(g), h),
            _ => {
                let gh = self.nf(&g.concat(h));
                self.central_defect(&g.concat(h).concat(&gh.inverse()))
                    .expect("nf(g) nf(h) nf(gh)^-1 is trivial")
            }
        };
        self.sigma_cache.lock().expect("cocycle cache poisoned").insert(key, v.clone());
        v
    }

    /// `iota3 sigma_rho(g, g^-1)`, the correction defining `q`.
    fn q_offset(&self, g: &Word) -> FgaElement {
        self.kernel.iota3(&self.sigma_rho(g, &g.inverse()))
    }

    /// `q(g) = (g, -iota3 sigma_rho(g, g^-1))` in `rho'` coordinates.
    pub fn q_of(&self, g: &Word) -> ExtElement {
        let g = self.nf(g);
        let a = self.pushout.neg(&self.q_offset(&g));
        ExtElement { coords: Coords::RhoPrime, g, a }
    }

    /// `sigma_q(g, h)` with `q(g) q(h) = q(gh) i(sigma_q(g, h))`, evaluated
    /// directly from `sigma_rho`.
    pub fn sigma_q(&self, g: &Word, h: &Word) -> FgaElement {
        let key = (self.nf(g), self.nf(h));
        if let Some(v) = self.sigma_q_cache.lock().expect("cocycle cache poisoned").get(&key) {
            return v.clone();
        }
        let (g, h) = &key;
        let (k, p) = (&self.kernel, &self.pushout);
        let gh = g.concat(h);
        let twist = k.iota1(&self.sigma_rho(g, h));
        let corr = p.sub(&self.q_offset(&gh), &p.add(&self.q_offset(g), &self.q_offset(h)));
        let v = p.add(&twist, &corr);
        self.sigma_q_cache.lock().expect("cocycle cache poisoned").insert(key, v.clone());
        v
    }

    /// `sigma_q(g, x) = iota3 sigma_rho(g, x) - iota3 sigma_rho(x^-1, g^-1)`.
    ///
    /// Exact when `iota3` is additive on the values involved, which always
    /// holds for torsion-free kernels. With torsion the carries of `iota3`
    /// can make it differ from [`Self::sigma_q`] by a multiple of a torsion
    /// order.
    pub fn sigma_q_letter(&self, g: &Word, x: Letter) -> FgaElement {
        let k = &self.kernel;
        let xw = Word::letter(x);
        let left = k.iota3(&self.sigma_rho(g, &xw));
        let right = k.iota3(&self.sigma_rho(&Word::letter(x.inverse()), &g.inverse()));
        self.pushout.sub(&left, &right)
    }

    /// `sigma_q(g, h)` by the chain rule over the letters of `nf(h)`:
    /// `sigma_q(g, hx) = sigma_q(g, h) + sigma_q(gh, x) - sigma_q(h, x)`.
    /// Single-letter terms use the closed formula when the kernel is
    /// torsion-free.
    pub fn sigma_q_chain(&self, g: &Word, h: &Word) -> FgaElement {
        let p = &self.pushout;
        let g = self.nf(g);
        let h = self.nf(h);
        let letter = |g: &Word, x: Letter| {
            if self.kernel.torsion.is_empty() {
                self.sigma_q_letter(g, x)
            } else {
                self.sigma_q(g, &Word::letter(x))
            }
        };
        let mut acc = p.zero();
        let mut prefix = Word::empty();
        let mut g_prefix = g.clone();
        for &x in h.letters() {
            acc = p.add(&acc, &letter(&g_prefix, x));
            acc = p.sub(&acc, &letter(&prefix, x));
            prefix = self.base.normal_form_times(&prefix, x);
            g_prefix = self.base.normal_form_times(&g_prefix, x);
        }
        acc
    }

    fn group_of(&self, c: Coords) -> &FgaGroup {
        match c {
            Coords::Rho => &self.kernel,
            _ => &self.pushout,
        }
    }

    fn twist(&self, c: Coords, g: &Word, h: &Word) -> FgaElement {
        match c {
            Coords::Rho => self.sigma_rho(g, h),
            Coords::RhoPrime => self.kernel.iota1(&self.sigma_rho(g, h)),
            Coords::Q => self.sigma_q(g, h),
        }
    }

    pub fn element(&self, coords: Coords, g: &Word, a: FgaElement) -> ExtElement {
        ExtElement { coords, g: self.nf(g), a }
    }

    pub fn identity(&self, coords: Coords) -> ExtElement {
        ExtElement { coords, g: Word::empty(), a: self.group_of(coords).zero() }
    }

    pub fn mult(&self, e1: &ExtElement, e2: &ExtElement) -> Result<ExtElement, ExtensionError> {
        if e1.coords != e2.coords {
            return Err(ExtensionError::CoordMismatch(e1.coords, e2.coords));
        }
        let grp = self.group_of(e1.coords);
        let a = grp.add(&grp.add(&e1.a, &e2.a), &self.twist(e1.coords, &e1.g, &e2.g));
        Ok(ExtElement { coords: e1.coords, g: self.nf(&e1.g.concat(&e2.g)), a })
    }

    pub fn inv(&self, e: &ExtElement) -> ExtElement {
        let grp = self.group_of(e.coords);
        let gi = self.nf(&e.g.inverse());
        let a = grp.neg(&grp.add(&e.a, &self.twist(e.coords, &e.g, &gi)));
        ExtElement { coords: e.coords, g: gi, a }
    }

    /// Central element `i(a)` in the given coordinates.
    pub fn central(&self, coords: Coords, a: FgaElement) -> ExtElement {
        ExtElement { coords, g: Word::empty(), a }
    }

    /// The element of `E` spelled by a word in the lifted generators, in
    /// `rho` coordinates.
    pub fn evaluate(&self, w: &Word) -> ExtElement {
        let g = self.nf(w);
        let a = self.central_defect(&g.inverse().concat(w)).expect("nf(w)^-1 w is trivial");
        ExtElement { coords: Coords::Rho, g, a }
    }

    pub fn iota2(&self, e: &ExtElement) -> Result<ExtElement, ExtensionError> {
        if e.coords != Coords::Rho {
            return Err(ExtensionError::CoordMismatch(e.coords, Coords::Rho));
        }
        Ok(ExtElement { coords: Coords::RhoPrime, g: e.g.clone(), a: self.kernel.iota1(&e.a) })
    }

    /// Whether an element of `E'` lies in the image of `E`.
    pub fn in_e(&self, e: &ExtElement) -> bool {
        self.convert(e, Coords::Rho).is_ok()
    }

    /// Rewrites `e` in another coordinate system.
    pub fn convert(&self, e: &ExtElement, to: Coords) -> Result<ExtElement, ExtensionError> {
        let p = &self.pushout;
        // Everything passes through rho'.
        let rho_prime = match e.coords {
            Coords::RhoPrime => e.a.clone(),
            Coords::Rho => self.kernel.iota1(&e.a),
            Coords::Q => p.sub(&e.a, &self.q_offset(&e.g)),
        };
        let a = match to {
            Coords::RhoPrime => rho_prime,
            Coords::Q => p.add(&rho_prime, &self.q_offset(&e.g)),
            Coords::Rho => self.kernel.iota1_inverse(&rho_prime).map_err(|_| ExtensionError::NotInE)?,
        };
        Ok(ExtElement { coords: to, g: e.g.clone(), a })
    }

    pub fn is_identity(&self, e: &ExtElement) -> bool {
        e.g.is_empty() && e.a.is_zero()
    }
}

/// Solves for the edge cocycle of a finite base group: zero on the
/// breadth-first spanning tree, antisymmetric under inverting an edge, and
/// summing to `z_r` around every relator loop.
fn solve_edge_cocycle(
    base: &Group,
    t: &CosetTable,
    kernel: &FgaGroup,
    lifts: &[FgaElement],
) -> Result<Vec<Vec<FgaElement>>, ExtensionError> {
    let n = t.order();
    let letters = t.n_letters();
    let is_tree = |c: usize, x: usize| -> bool {
        let l = Letter(x as u8);
        *t.normal_form(t.act(c, l)) == t.normal_form(c).with(l)
    };
    // Unknown per positive edge not in the tree (in either direction).
    let mut var: Vec<Vec<Option<usize>>> = vec![vec![None; letters]; n];
    let mut names = Vec::new();
    for (c, row) in var.iter_mut().enumerate() {
        for x in (0..letters).step_by(2) {
            let d = t.act(c, Letter(x as u8));
            if !is_tree(c, x) && !is_tree(d, x + 1) {
                row[x] = Some(names.len());
                names.push(format!("f{c}_{x}"));
            }
        }
    }
    let mut sys = AbelianLinearSystem::new(kernel.clone(), names);
    for (r, rel) in base.presentation.relators.iter().enumerate() {
        for c0 in 0..n {
            let mut coeffs = Vec::new();
            let mut c = c0;
            for &l in rel.letters() {
                if l.is_inverse() {
                    let d = t.act(c, l);
                    if let Some(v) = var[d][l.inverse().index()] {
                        coeffs.push((v, -1));
                    }
                    c = d;
                } else {
                    if let Some(v) = var[c][l.index()] {
                        coeffs.push((v, 1));
                    }
                    c = t.act(c, l);
                }
            }
            sys.push(coeffs, lifts[r].clone());
        }
    }
    let sol = solve_linear_system(&sys).ok_or(ExtensionError::InconsistentLifts)?;
    let mut f = vec![vec![kernel.zero(); letters]; n];
    for c in 0..n {
        for x in (0..letters).step_by(2) {
            if let Some(v) = var[c][x] {
                let d = t.act(c, Letter(x as u8));
                f[c][x] = sol[v].clone();
                f[d][x + 1] = kernel.neg(&sol[v]);
            }
        }
    }
    Ok(f)
}
