use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Fpa, FpaError, Ppa};
use crate::automata::Fsa;
use crate::extension::CentralExtension;
use crate::lrational::FamilyKind;
use crate::words::Word;

/// Outcome of an exhaustive property check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub radius: usize,
    pub checked: usize,
    pub counterexamples: Vec<String>,
    pub pass: bool,
}

impl PropertyReport {
    fn new(radius: usize, checked: usize, counterexamples: Vec<String>) -> Self {
        let pass = counterexamples.is_empty();
        PropertyReport { radius, checked, counterexamples, pass }
    }
}

impl std::fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "radius {}, {} checks, {} counterexamples", self.radius, self.checked, self.counterexamples.len())?;
        if let Some(c) = self.counterexamples.first() {
            write!(f, " (first: {c})")?;
        }
        Ok(())
    }
}

/// For every `s` in `T`, all accepted words `w` of length at most
/// `w_radius` ending in `s`, and every compatible `v` of length at most
/// `v_radius`: `sigma_q(w, v)` is the same for all such `w` and equals the
/// value computed from the automaton.
pub fn check_fpa_key_property(
    f: &Fpa,
    ext: &CentralExtension,
    w_radius: usize,
    v_radius: usize,
) -> Result<PropertyReport, FpaError> {
    if f.kind != FamilyKind::QLeft {
        return Err(FpaError::WrongKind { expected: FamilyKind::QLeft, got: f.kind });
    }
    let mut by_state: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
    for w in f.product.enumerate(w_radius) {
        by_state.entry(f.product.run(&w)?).or_default().push(w);
    }
    let render = |w: &Word| f.product.render(w);
    let mut bad = Vec::new();
    let mut checked = 0;
    for (&s, words) in &by_state {
        for v in f.reroot(s)?.enumerate(v_radius) {
            let predicted = f.sigma_q_of_state(&ext.pushout, s, &v)?;
            for w in words {
                checked += 1;
                let actual = ext.sigma_q(w, &v);
                if actual != predicted {
                    bad.push(format!(
                        "state {s}: sigma_q({}, {}) = {actual}, predicted {predicted}",
                        render(w),
                        render(&v)
                    ));
                }
            }
        }
    }
    Ok(PropertyReport::new(w_radius, checked, bad))
}

/// For every `w` of `l` with `|w| <= radius`: no prefix reaches the sink, the
/// parity automaton accepts `w`, and its branch is `Pa(sigma_rho(w, w^-1))`.
pub fn check_ppa_key_property(
    d: &Ppa,
    ext: &CentralExtension,
    l: &Fsa,
    radius: usize,
) -> Result<PropertyReport, FpaError> {
    let mut bad = Vec::new();
    let mut checked = 0;
    for w in l.enumerate(radius) {
        checked += 1;
        let shown = l.render(&w);
        match d.parity(&w)? {
            None => bad.push(format!("{shown:?} is not accepted")),
            Some(p) => {
                let want = ext.kernel.pa(&ext.sigma_rho(&w, &w.inverse()));
                if *p != want {
                    bad.push(format!("{shown:?}: branch {p}, Pa(sigma_rho(w, w^-1)) = {want}"));
                }
            }
        }
    }
    Ok(PropertyReport::new(radius, checked, bad))
}
