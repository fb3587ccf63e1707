//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

use exteq::abelian::{FgaElement, FgaGroup};
use exteq::extension::CentralExtension;
use exteq::words::{CayleyBall, Group, Presentation, Word, WordProblem};

pub fn int(n: i64) -> FgaElement {
    FgaElement { free: vec![n], tors: vec![] }
}

pub fn modular(g: &FgaGroup, r: i64) -> FgaElement {
    g.element(vec![], vec![r]).unwrap()
}

/// Unit tangent bundle of the genus-2 surface: `[a,b][c,d] = z^-2`.
pub fn t1s() -> &'static CentralExtension {
    static E: OnceLock<CentralExtension> = OnceLock::new();
    E.get_or_init(|| {
        let base = Group::new(Presentation::genus_two(), WordProblem::Auto).unwrap();
        CentralExtension::new(base, FgaGroup::integers(), vec![int(-2)]).unwrap()
    })
}

/// `<s, t | s^2 = t^2>` over the infinite dihedral group, kernel `Z`.
pub fn dihedral() -> &'static CentralExtension {
    static E: OnceLock<CentralExtension> = OnceLock::new();
    E.get_or_init(|| {
        let base = Group::new(Presentation::infinite_dihedral(), WordProblem::Auto).unwrap();
        CentralExtension::new(base, FgaGroup::integers(), vec![int(1), int(1)]).unwrap()
    })
}

/// Quaternion group as an extension of the Klein four-group by `Z/2`.
pub fn q8() -> CentralExtension {
    let base = Group::new(Presentation::klein_four(), WordProblem::Auto).unwrap();
    let a = FgaGroup::cyclic(2).unwrap();
    let z = modular(&a, 1);
    CentralExtension::new(base, a, vec![z.clone(), z.clone(), z]).unwrap()
}

/// Modular group of order 16: `s^2 = z`, `t^2 = 1`, `[s,t] = z^2` with
/// kernel `Z/4`.
pub fn m16() -> CentralExtension {
    let base = Group::new(Presentation::klein_four(), WordProblem::Auto).unwrap();
    let a = FgaGroup::cyclic(4).unwrap();
    let lifts = vec![modular(&a, 1), modular(&a, 0), modular(&a, 2)];
    CentralExtension::new(base, a, lifts).unwrap()
}

pub fn ball(e: &CentralExtension, r: usize) -> CayleyBall {
    CayleyBall::build(&e.base, r, 1_000_000).unwrap()
}

pub fn parse(e: &CentralExtension, s: &str) -> Word {
    e.base.presentation.alphabet.parse(s).unwrap()
}

/// Signed number of relator cells in any van Kampen diagram of a word that
/// is trivial in the genus-2 surface group, read off from the abelianized
/// Fox derivative with respect to `a`: if `dw/da = lambda (1 - a b a^-1)`
/// then the count is the augmentation of `lambda`, which is minus the
/// `b`-derivative of the abelianized `dw/da` at 1.
pub fn surface_cell_count(w: &Word) -> i64 {
    let mut b_exp = 0i64;
    let mut total = 0i64;
    for l in w.letters() {
        match l.0 {
            0 => total += b_exp,
            1 => total -= b_exp,
            2 => b_exp += 1,
            3 => b_exp -= 1,
            _ => {}
        }
    }
    -total
}

/// Exponent sum of a word; for `s^2 = t^2 = z` this is twice the power of
/// `z` a base-trivial word equals.
pub fn exponent_sum(w: &Word) -> i64 {
    w.letters().iter().map(|l| if l.is_inverse() { -1 } else { 1 }).sum()
}

pub fn rat(n: i64) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(n.into())
}

pub fn symbols(e: &CentralExtension) -> Vec<char> {
    exteq::automata::Fsa::symbols_of(&e.base.presentation.alphabet)
}

/// The geodesic language of the base group, learned and validated.
pub fn geodesics(e: &CentralExtension, learn: usize, validate: usize) -> exteq::automata::Fsa {
    let cfg = exteq::lrational::SynthesisConfig::new(learn, validate);
    let (l, report) = exteq::lrational::build_l_automaton(&e.base, &symbols(e), &rat(1), &rat(0), &cfg).unwrap();
    assert!(report.pass, "{report}");
    l
}

/// Geodesic language of the infinite dihedral group.
pub fn dihedral_l() -> &'static exteq::automata::Fsa {
    static L: OnceLock<exteq::automata::Fsa> = OnceLock::new();
    L.get_or_init(|| geodesics(dihedral(), 1, 8))
}

pub fn dihedral_family(kind: exteq::lrational::FamilyKind) -> exteq::lrational::PredictorFamily {
    let cfg = exteq::lrational::SynthesisConfig::new(2, 10);
    exteq::lrational::build_predictor_family(dihedral(), kind, dihedral_l(), &cfg).unwrap()
}

/// Reduction pipeline over the geodesic language with `Y = X`.
pub fn pipeline(e: &CentralExtension, kappa2: usize) -> exteq::reduction::Pipeline<'_> {
    let synthesis = exteq::lrational::SynthesisConfig::new(2, 8);
    let l = geodesics(e, 1, 8);
    let cfg = exteq::reduction::PipelineConfig { synthesis, kappa2, cap_states: 20_000 };
    exteq::reduction::Pipeline::build(e, l, &cfg).unwrap()
}

/// A constant of `E` spelled by a word in the lifted generators.
pub fn constant(e: &CentralExtension, name: &str, w: &str) -> (String, exteq::extension::ExtElement) {
    (name.to_string(), e.evaluate(&parse(e, w)))
}

/// A random system over a finite extension: up to two variables, up to two
/// equations of length 1 to 5, and two constants drawn from `E`.
pub fn random_system(e: &CentralExtension, rng: &mut impl rand::Rng) -> exteq::reduction::EquationSystem {
    let base = ball(e, 4).elements;
    let kernel = e.kernel.elements(64).unwrap();
    let consts: Vec<_> = ["c", "k"]
        .iter()
        .map(|n| {
            let g = base[rng.gen_range(0..base.len())].clone();
            let a = kernel[rng.gen_range(0..kernel.len())].clone();
            (n.to_string(), e.element(exteq::extension::Coords::Rho, &g, a))
        })
        .collect();
    let nvars = rng.gen_range(1..=2);
    let vars: Vec<String> = ["x", "y"][..nvars].iter().map(|s| s.to_string()).collect();
    let mut symbols: Vec<String> = vars.clone();
    symbols.extend(["c", "k"].map(String::from));
    let eqs: Vec<String> = (0..rng.gen_range(1..=2))
        .map(|_| {
            (0..rng.gen_range(1..=5))
                .map(|_| {
                    let s = &symbols[rng.gen_range(0..symbols.len())];
                    if rng.gen_bool(0.5) { s.to_uppercase() } else { s.clone() }
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let eqs: Vec<&str> = eqs.iter().map(String::as_str).collect();
    exteq::reduction::EquationSystem::parse(vars, consts, &eqs).unwrap()
}

/// `Z/4` as an extension of `Z/2 = <s | s^2>` by `Z/2`.
pub fn z4() -> CentralExtension {
    let base = Group::new(Presentation::parse("s", &["ss"]).unwrap(), WordProblem::Auto).unwrap();
    let a = FgaGroup::cyclic(2).unwrap();
    let z = modular(&a, 1);
    CentralExtension::new(base, a, vec![z]).unwrap()
}
