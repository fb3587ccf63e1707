mod common;

use std::sync::OnceLock;

use common::*;
use exteq::abelian::FgaGroup;
use exteq::extension::CentralExtension;
use exteq::fpa_ppa::{
    build_fpa, build_lfpa, build_ppa, build_rfpa, check_fpa_key_property, check_ppa_key_property, Fpa, FpaError,
    Ppa, DEFAULT_CAP,
};
use exteq::lrational::{build_predictor_family, FamilyKind, PredictorFamily, SynthesisConfig};
use exteq::words::{all_words, Group, Letter, Presentation, Word, WordProblem};

fn fpa() -> &'static Fpa {
    static F: OnceLock<Fpa> = OnceLock::new();
    F.get_or_init(|| build_fpa(&dihedral_family(FamilyKind::QLeft), DEFAULT_CAP).unwrap())
}

fn sides() -> &'static (Fpa, Fpa) {
    static S: OnceLock<(Fpa, Fpa)> = OnceLock::new();
    S.get_or_init(|| {
        let left = build_lfpa(&dihedral_family(FamilyKind::RhoLeft), DEFAULT_CAP).unwrap();
        let right = build_rfpa(&dihedral_family(FamilyKind::RhoRightReversed), DEFAULT_CAP).unwrap();
        (left, right)
    })
}

fn ppa() -> &'static Ppa {
    static D: OnceLock<Ppa> = OnceLock::new();
    D.get_or_init(|| build_ppa(&sides().0, &sides().1, dihedral(), DEFAULT_CAP).unwrap())
}

fn letters(k: usize) -> impl Iterator<Item = Letter> {
    (0..k).map(|i| Letter(i as u8))
}

#[test]
fn fpa_language_is_partitioned_by_accepting_states() {
    let f = fpa();
    let l = dihedral_l();
    assert!(f.product.language_eq(l));
    let branches: Vec<_> = f.accepting().map(|s| f.branch(s).unwrap()).collect();
    for w in all_words(4, 8) {
        let hits = branches.iter().filter(|b| b.accepts(&w).unwrap()).count();
        assert_eq!(hits, usize::from(l.accepts(&w).unwrap()));
    }
}

#[test]
fn compatible_continuations_stay_in_the_language() {
    let f = fpa();
    let l = dihedral_l();
    for s in f.accepting() {
        assert!(f.is_compatible(s, &Word::empty()).unwrap());
        let words = f.branch(s).unwrap().enumerate(8);
        for v in f.reroot(s).unwrap().enumerate(8) {
            assert!(f.is_compatible(s, &v).unwrap());
            for w in words.iter().filter(|w| w.len() + v.len() <= 8) {
                assert!(l.accepts(&w.concat(&v)).unwrap());
            }
        }
    }
}

#[test]
fn fpa_rejects_bad_arguments() {
    let f = fpa();
    let s = f.accepting().next().unwrap();
    assert!(f.is_compatible(s, &Word(vec![Letter(9)])).is_err());
    let outside = (0..f.n_states()).find(|&s| !f.in_t(s)).unwrap();
    assert!(matches!(f.is_compatible(outside, &Word::empty()), Err(FpaError::NotAcceptingState(_))));
    assert!(matches!(f.branch(outside), Err(FpaError::NotAcceptingState(_))));
    let lfpa = &sides().0;
    assert!(matches!(lfpa.sigma_q_of_state(&dihedral().kernel, s, &Word::empty()), Err(FpaError::WrongKind { .. })));
    assert!(matches!(build_fpa(&dihedral_family(FamilyKind::RhoLeft), DEFAULT_CAP), Err(FpaError::WrongKind { .. })));
}

#[test]
fn state_and_witness_routes_agree() {
    let f = fpa();
    let e = dihedral();
    for s in f.accepting() {
        assert!(f.sigma_q_of_state(&e.pushout, s, &Word::empty()).unwrap().is_zero());
        for v in f.reroot(s).unwrap().enumerate(5) {
            assert_eq!(f.sigma_q_of_state(&e.pushout, s, &v).unwrap(), f.sigma_q_of_state_witness(e, s, &v).unwrap());
        }
    }
}

#[test]
fn fpa_key_property_holds_on_the_dihedral_instance() {
    let report = check_fpa_key_property(fpa(), dihedral(), 6, 4).unwrap();
    assert!(report.pass, "{report}");
    assert!(report.checked > 0);
    let vacuous = check_fpa_key_property(fpa(), dihedral(), 0, 0).unwrap();
    assert!(vacuous.pass);
}

#[test]
fn side_readouts_match_the_cocycle() {
    let (left, right) = sides();
    let e = dihedral();
    assert!(left.product.language_eq(dihedral_l()));
    assert!(right.product.language_eq(dihedral_l()));
    for w in dihedral_l().enumerate(6) {
        let (s1, s2) = (left.product.run(&w).unwrap(), right.product.run(&w).unwrap());
        for x in letters(4) {
            let xw = Word::letter(x);
            assert_eq!(left.value(s1, x).unwrap(), &e.sigma_rho(&w, &xw));
            assert_eq!(right.value(s2, x).unwrap(), &e.sigma_rho(&xw, &w.inverse()));
        }
    }
}

#[test]
fn ppa_language_partition_and_key_property() {
    let d = ppa();
    let l = dihedral_l();
    assert!(d.product.language_eq(l));
    assert_eq!(d.parity(&Word::empty()).unwrap(), Some(&d.parity_group.zero()));
    let branches: Vec<_> = d.branch_values().iter().map(|b| d.branch(b).unwrap()).collect();
    for w in all_words(4, 8) {
        let hits = branches.iter().filter(|b| b.accepts(&w).unwrap()).count();
        assert_eq!(hits, usize::from(l.accepts(&w).unwrap()));
    }
    let report = check_ppa_key_property(d, dihedral(), l, 8).unwrap();
    assert!(report.pass, "{report}");
    // Both parities occur: sigma_rho(s, s^-1) = 1 here.
    assert_eq!(d.branch_values().len(), 2);
}

/// The family with the first zero value shifted by one. The empty word
/// carries value zero, so every chain-rule evaluation through it moves.
fn shift_zero_value(fam: &PredictorFamily) -> PredictorFamily {
    let mut bad = fam.clone();
    let a = FgaGroup::integers();
    let entry = bad.entries.iter_mut().find(|e| e.value.is_zero()).expect("a zero value");
    entry.value = a.generator(0);
    bad
}

#[test]
fn mutated_family_breaks_the_parity_property() {
    let e = dihedral();
    let bad_left = build_lfpa(&shift_zero_value(&dihedral_family(FamilyKind::RhoLeft)), DEFAULT_CAP).unwrap();
    let d = build_ppa(&bad_left, &sides().1, e, DEFAULT_CAP).unwrap();
    assert!(!check_ppa_key_property(&d, e, dihedral_l(), 8).unwrap().pass);
}

#[test]
fn split_extension_predictors_are_trivial() {
    let base = Group::new(Presentation::infinite_dihedral(), WordProblem::Auto).unwrap();
    let e = CentralExtension::split(base, FgaGroup::integers()).unwrap();
    let l = dihedral_l();
    let cfg = SynthesisConfig::new(1, 6);
    let fam = |kind| build_predictor_family(&e, kind, l, &cfg).unwrap();
    let f = build_fpa(&fam(FamilyKind::QLeft), DEFAULT_CAP).unwrap();
    let left = build_lfpa(&fam(FamilyKind::RhoLeft), DEFAULT_CAP).unwrap();
    let right = build_rfpa(&fam(FamilyKind::RhoRightReversed), DEFAULT_CAP).unwrap();
    for m in [&f, &left, &right] {
        assert!(m.product.language_eq(l));
        for s in m.accepting() {
            assert!(letters(4).all(|x| m.value(s, x).unwrap().is_zero()));
        }
    }
    let d = build_ppa(&left, &right, &e, DEFAULT_CAP).unwrap();
    assert_eq!(d.branch_values(), vec![d.parity_group.zero()]);
    assert!(d.branch(&d.parity_group.zero()).unwrap().language_eq(l));
}

#[test]
fn fpa_file_round_trip() {
    let f = fpa();
    let json = serde_json::to_string(f).unwrap();
    let back: Fpa = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, f);
    let d = ppa();
    let back: Ppa = serde_json::from_str(&serde_json::to_string(d).unwrap()).unwrap();
    assert_eq!(&back, d);
}

#[test]
fn surface_bundle_fpa_builds() {
    let e = t1s();
    let l = geodesics(e, 2, 5);
    let fam = build_predictor_family(e, FamilyKind::QLeft, &l, &SynthesisConfig::new(1, 4)).unwrap();
    let f = build_fpa(&fam, DEFAULT_CAP).unwrap();
    assert!(f.accepting().count() >= 1);
    let report = check_fpa_key_property(&f, e, 3, 1).unwrap();
    assert!(report.pass, "{report}");

    // On the dihedral instance sigma_q vanishes, so shifting a value there
    // goes unnoticed; here it must not.
    let bad = build_fpa(&shift_zero_value(&fam), DEFAULT_CAP).unwrap();
    let report = check_fpa_key_property(&bad, e, 3, 1).unwrap();
    assert!(!report.pass);
    assert!(report.counterexamples[0].contains("sigma_q"));
}
