use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{synthesize, Labeler, LrationalError, Mismatch, SynthesisConfig, ValidationReport};
use crate::abelian::FgaElement;
use crate::automata::Fsa;
use crate::extension::CentralExtension;
use crate::words::{Letter, Word};

/// Which cocycle a family predicts, and how it reads its input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `M_{x,a}`: `L`-words `w` with `sigma_q(w, x) = a`.
    QLeft,
    /// `L`-words `w` with `sigma_rho(w, x) = a`.
    RhoLeft,
    /// Reversals of the `L`-words `u` with `sigma_rho(x, u) = a`.
    RhoRightReversed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub letter: char,
    pub value: FgaElement,
    pub automaton: Fsa,
}

/// Automata `M_{x,a}`, one per letter `x` and value `a` in the finite value
/// set `A_x`. For fixed `x` their languages partition `L` (reversed `L` for
/// the reversed kind).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorFamily {
    pub kind: FamilyKind,
    pub entries: Vec<FamilyEntry>,
    /// Radius on which the family was checked against the extension.
    #[serde(default)]
    pub validation_radius: usize,
}

impl PredictorFamily {
    pub fn symbols(&self) -> &[char] {
        self.entries.first().map(|e| e.automaton.symbols()).unwrap_or(&[])
    }

    pub fn letter_of(&self, e: &FamilyEntry) -> Letter {
        Letter(self.symbols().iter().position(|&c| c == e.letter).expect("entry letter in alphabet") as u8)
    }

    /// Entries for letter `x`, in value order.
    pub fn entries_for(&self, x: Letter) -> impl Iterator<Item = &FamilyEntry> {
        let c = self.symbols()[x.index()];
        self.entries.iter().filter(move |e| e.letter == c)
    }

    /// The value set `A_x`.
    pub fn values(&self, x: Letter) -> Vec<FgaElement> {
        self.entries_for(x).map(|e| e.value.clone()).collect()
    }
}

/// The cocycle value attached to a word by each family kind, or `None`
/// off `L`.
struct CocycleLabeler<'a> {
    ext: &'a CentralExtension,
    kind: FamilyKind,
    x: Letter,
    /// `L` itself, or its reversal for the reversed kind.
    language: Fsa,
    live: Vec<bool>,
}

impl<'a> CocycleLabeler<'a> {
    fn new(ext: &'a CentralExtension, kind: FamilyKind, x: Letter, l: &Fsa, cap: usize) -> Result<Self, LrationalError> {
        let language = match kind {
            FamilyKind::RhoRightReversed => l.reverse(cap)?,
            _ => l.clone(),
        };
        let live = language.live_states();
        Ok(CocycleLabeler { ext, kind, x, language, live })
    }
}

/// Position: state of the language automaton and the normal form of the
/// group element read so far (for the reversed kind, of the inverse of the
/// reversed word).
#[derive(Clone, Debug)]
struct CocyclePos {
    state: usize,
    g: Word,
}

impl Labeler for CocycleLabeler<'_> {
    type Pos = CocyclePos;
    type Label = Option<FgaElement>;

    fn root(&self) -> CocyclePos {
        CocyclePos { state: self.language.initial(), g: Word::empty() }
    }

    fn step(&self, p: &CocyclePos, l: Letter) -> CocyclePos {
        if !self.live[p.state] {
            return p.clone();
        }
        let state = self.language.step(p.state, l);
        let g = match self.kind {
            FamilyKind::RhoRightReversed => self.ext.base.normal_form_times(&p.g, l.inverse()),
            _ => self.ext.base.normal_form_times(&p.g, l),
        };
        CocyclePos { state, g }
    }

    fn label(&self, p: &CocyclePos) -> Option<FgaElement> {
        if !self.language.is_accepting(p.state) {
            return None;
        }
        let x = Word::letter(self.x);
        Some(match self.kind {
            FamilyKind::QLeft => self.ext.sigma_q(&p.g, &x),
            FamilyKind::RhoLeft => self.ext.sigma_rho(&p.g, &x),
            FamilyKind::RhoRightReversed => self.ext.sigma_rho(&x, &p.g.inverse()),
        })
    }

    fn is_dead(&self, p: &CocyclePos) -> bool {
        !self.live[p.state]
    }
}

/// Synthesizes and validates the family of `kind` for the extension, over
/// the language accepted by `l`.
pub fn build_predictor_family(
    ext: &CentralExtension,
    kind: FamilyKind,
    l: &Fsa,
    cfg: &SynthesisConfig,
) -> Result<PredictorFamily, LrationalError> {
    let symbols = l.symbols().to_vec();
    let mut entries = Vec::new();
    for x in (0..symbols.len()).map(|i| Letter(i as u8)) {
        let oracle = CocycleLabeler::new(ext, kind, x, l, cfg.cap_states)?;
        let (machine, _) = synthesize(&oracle, &symbols, cfg)?;
        let learned: BTreeSet<FgaElement> = machine.outputs.iter().flatten().cloned().collect();
        let seen = observed_values(&oracle, cfg.validate);
        if !seen.is_subset(&learned) {
            let values: Vec<String> = seen.difference(&learned).map(|a| a.to_string()).collect();
            return Err(LrationalError::ValueSetUnstable { letter: symbols[x.index()], values: values.join(", ") });
        }
        for a in learned {
            let accepting: Vec<usize> =
                (0..machine.outputs.len()).filter(|&s| machine.outputs[s].as_ref() == Some(&a)).collect();
            let automaton = machine.graph.restrict_accepting(&accepting)?.minimize();
            entries.push(FamilyEntry { letter: symbols[x.index()], value: a, automaton });
        }
    }
    Ok(PredictorFamily { kind, entries, validation_radius: cfg.validate })
}

/// Values labelling the words of length at most `radius`.
fn observed_values(oracle: &CocycleLabeler<'_>, radius: usize) -> BTreeSet<FgaElement> {
    let mut seen = BTreeSet::new();
    let mut layer = vec![oracle.root()];
    let k = oracle.language.n_letters();
    for len in 0..=radius {
        let mut next = Vec::new();
        for p in layer {
            if let Some(a) = oracle.label(&p) {
                seen.insert(a);
            }
            if len < radius && !oracle.is_dead(&p) {
                next.extend((0..k).map(|l| oracle.step(&p, Letter(l as u8))));
            }
        }
        layer = next;
    }
    seen
}

/// Checks every word up to `radius` against the extension: for each letter
/// exactly the automaton of the true value accepts, and none accepts a word
/// outside the language. Never fails; problems are listed in the report.
pub fn validate_family(
    fam: &PredictorFamily,
    ext: &CentralExtension,
    l: &Fsa,
    radius: usize,
) -> Result<ValidationReport, LrationalError> {
    let symbols = l.symbols();
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for x in (0..symbols.len()).map(|i| Letter(i as u8)) {
        let oracle = CocycleLabeler::new(ext, fam.kind, x, l, usize::MAX)?;
        let machines: Vec<&FamilyEntry> = fam.entries_for(x).collect();
        // No automaton may accept outside the language.
        for e in &machines {
            let outside = e.automaton.intersect(&oracle.language.complement())?;
            if let Some(w) = outside.enumerate(radius).first() {
                mismatches.push(Mismatch {
                    word: l.render(w),
                    expected: format!("{:?} (outside the language)", None::<FgaElement>),
                    got: format!("{}: {}", e.letter, e.value),
                });
            }
        }
        let live: Vec<Vec<bool>> = machines.iter().map(|e| e.automaton.live_states()).collect();
        let mut layer = vec![(Word::empty(), oracle.root(), machines.iter().map(|e| e.automaton.initial()).collect::<Vec<_>>())];
        for len in 0..=radius {
            let mut next = Vec::new();
            for (w, p, states) in layer {
                checked += 1;
                let expected = oracle.label(&p);
                let got: Vec<&FgaElement> = machines
                    .iter()
                    .zip(&states)
                    .filter(|(e, &s)| e.automaton.is_accepting(s))
                    .map(|(e, _)| &e.value)
                    .collect();
                let ok = match &expected {
                    Some(a) => got == [a],
                    None => got.is_empty(),
                };
                if !ok {
                    mismatches.push(Mismatch {
                        word: l.render(&w),
                        expected: format!("{}: {:?}", symbols[x.index()], expected.map(|a| a.to_string())),
                        got: format!("{:?}", got.iter().map(|a| a.to_string()).collect::<Vec<_>>()),
                    });
                }
                let finished = oracle.is_dead(&p) && states.iter().zip(&live).all(|(&s, lv)| !lv[s]);
                if len == radius || finished {
                    continue;
                }
                for c in 0..symbols.len() {
                    let c = Letter(c as u8);
                    let st = machines.iter().zip(&states).map(|(e, &s)| e.automaton.step(s, c)).collect();
                    next.push((w.with(c), oracle.step(&p, c), st));
                }
            }
            layer = next;
        }
    }
    let pass = mismatches.is_empty();
    Ok(ValidationReport { radius, words_checked: checked, mismatches, pass })
}
