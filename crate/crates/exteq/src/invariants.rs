//! Checks of the algebraic identities the constructions rely on, shared by
//! the command line and the acceptance tests.

use std::fmt;

use serde::Serialize;

use crate::abelian::{FgaElement, FgaGroup};
use crate::extension::CentralExtension;
use crate::words::{Letter, Word};

/// Counterexamples kept per report.
const KEEP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub counterexamples: Vec<String>,
}

impl InvariantReport {
    fn new(name: &str) -> Self {
        InvariantReport { name: name.into(), checked: 0, failed: 0, counterexamples: Vec::new() }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.counterexamples.len() < KEEP {
                self.counterexamples.push(describe());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass() { "pass" } else { "FAIL" };
        write!(f, "{}: {verdict} ({} checked, {} failed)", self.name, self.checked, self.failed)?;
        for c in &self.counterexamples {
            write!(f, "\n  {c}")?;
        }
        Ok(())
    }
}

/// Which 2-cocycle to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cocycle {
    Rho,
    Q,
}

/// `sigma(h, k) - sigma(g h, k) + sigma(g, h k) - sigma(g, h) = 0` on the
/// given triples of normal forms.
pub fn cocycle_condition<'a>(
    ext: &CentralExtension,
    which: Cocycle,
    triples: impl IntoIterator<Item = (&'a Word, &'a Word, &'a Word)>,
) -> InvariantReport {
    type Sigma<'e> = Box<dyn Fn(&Word, &Word) -> FgaElement + 'e>;
    let (name, group, sigma): (_, &FgaGroup, Sigma) = match which {
        Cocycle::Rho => ("cocycle sigma_rho", &ext.kernel, Box::new(|g, h| ext.sigma_rho(g, h))),
        Cocycle::Q => ("cocycle sigma_q", &ext.pushout, Box::new(|g, h| ext.sigma_q(g, h))),
    };
    let al = &ext.base.presentation.alphabet;
    let mut report = InvariantReport::new(name);
    for (g, h, k) in triples {
        let gh = ext.nf(&g.concat(h));
        let hk = ext.nf(&h.concat(k));
        let lhs = group.add(&sigma(h, k), &sigma(g, &hk));
        let rhs = group.add(&sigma(&gh, k), &sigma(g, h));
        report.record(lhs == rhs, || format!("({}, {}, {}): {lhs} != {rhs}", al.render(g), al.render(h), al.render(k)));
    }
    report
}

/// `q(g) q(g^-1) = 1`.
pub fn symmetric_section<'a>(ext: &CentralExtension, elements: impl IntoIterator<Item = &'a Word>) -> InvariantReport {
    let al = &ext.base.presentation.alphabet;
    let mut report = InvariantReport::new("symmetric section");
    for g in elements {
        let inv = ext.nf(&g.inverse());
        let ok = ext.mult(&ext.q_of(g), &ext.q_of(&inv)).is_ok_and(|p| ext.is_identity(&p));
        report.record(ok, || format!("q({0}) q({0}^-1) != 1", al.render(g)));
    }
    report
}

/// `sigma_q(g, x) = iota3(sigma_rho(g, x)) - iota3(sigma_rho(x^-1, g^-1))`
/// for every generator letter `x`.
pub fn sigma_q_identity<'a>(ext: &CentralExtension, elements: impl IntoIterator<Item = &'a Word>) -> InvariantReport {
    let (k, p) = (&ext.kernel, &ext.pushout);
    let al = &ext.base.presentation.alphabet;
    let letters: Vec<Letter> = (0..ext.base.n_letters()).map(|i| Letter(i as u8)).collect();
    let mut report = InvariantReport::new("sigma_q from sigma_rho");
    for g in elements {
        let g_inv = ext.nf(&g.inverse());
        for &x in &letters {
            let xw = Word::letter(x);
            let direct = ext.sigma_q(g, &xw);
            let formula = p.sub(&k.iota3(&ext.sigma_rho(g, &xw)), &k.iota3(&ext.sigma_rho(&xw.inverse(), &g_inv)));
            report.record(direct == formula, || {
                format!("g = {}, x = {}: {direct} != {formula}", al.render(g), al.render(&xw))
            });
        }
    }
    report
}

/// `iota3(a) + iota4(Pa(a))` lies in the image of `iota1`.
pub fn parity_lemma<'a>(kernel: &FgaGroup, elements: impl IntoIterator<Item = &'a FgaElement>) -> InvariantReport {
    let p = kernel.pushout();
    let mut report = InvariantReport::new("parity lemma");
    for a in elements {
        let shifted = p.add(&kernel.iota3(a), &kernel.iota4(&kernel.pa(a)));
        report.record(kernel.iota1_inverse(&shifted).is_ok(), || format!("a = {a}"));
    }
    report
}

/// Every element of `kernel` whose free coordinates lie in `[-r, r]`.
pub fn kernel_box(kernel: &FgaGroup, r: i64) -> Vec<FgaElement> {
    let mut out = vec![FgaElement { free: Vec::new(), tors: Vec::new() }];
    for _ in 0..kernel.rank {
        out = out
            .into_iter()
            .flat_map(|a| {
                (-r..=r).map(move |x| {
                    let mut b = a.clone();
                    b.free.push(x);
                    b
                })
            })
            .collect();
    }
    for &n in &kernel.torsion {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |x| {
                    let mut b = a.clone();
                    b.tors.push(x);
                    b
                })
            })
            .collect();
    }
    out
}
