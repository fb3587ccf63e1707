use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use super::{CayleyBall, Group, Letter, Word, WordsError};

/// Quasi-geodesic constants derived from the hyperbolicity data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QgConstants {
    pub lambda0: BigRational,
    pub mu0: BigRational,
    pub lambda1: BigRational,
    pub mu1: BigRational,
    pub lambda: BigRational,
    pub nu: BigRational,
    pub m0: u64,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Computes `mu0 = 8`, `lambda0 = 400 delta m0`, `lambda1 = lambda0`,
/// `mu1 = mu0 + 2 + 2/lambda0`, then `lambda = K0 K1 K2 lambda1` and
/// `nu = nu1 + C` where `nu1` defaults to `mu1`.
pub fn derive_qg_constants(
    delta: &BigRational,
    m0: u64,
    k: [&BigRational; 3],
    c: &BigRational,
    nu1: Option<&BigRational>,
) -> Result<QgConstants, WordsError> {
    if !delta.is_positive() {
        return Err(WordsError::InvalidConstant(format!("delta must be positive, got {delta}")));
    }
    if m0 == 0 {
        return Err(WordsError::InvalidConstant("m0 must be at least 1".into()));
    }
    if k.iter().any(|x| **x < BigRational::one()) {
        return Err(WordsError::InvalidConstant("K0, K1, K2 must be at least 1".into()));
    }
    if c.is_negative() {
        return Err(WordsError::InvalidConstant("C must be non-negative".into()));
    }
    let mu0 = int(8);
    let lambda0 = int(400) * delta * BigRational::from_integer(BigInt::from(m0));
    let lambda1 = lambda0.clone();
    let mu1 = &mu0 + int(2) + int(2) / &lambda0;
    let lambda = k[0] * k[1] * k[2] * &lambda1;
    let nu = nu1.unwrap_or(&mu1) + c;
    Ok(QgConstants { lambda0, mu0, lambda1, mu1, lambda, nu, m0 })
}

/// A way of measuring word-metric distances incrementally along a word.
pub trait Metric {
    type Point: Clone;
    fn origin(&self) -> Self::Point;
    fn step(&self, p: &Self::Point, l: Letter) -> Result<Self::Point, WordsError>;
    fn norm(&self, p: &Self::Point) -> usize;
}

impl Metric for Group {
    type Point = Word;

    fn origin(&self) -> Word {
        Word::empty()
    }

    fn step(&self, p: &Word, l: Letter) -> Result<Word, WordsError> {
        Ok(self.normal_form_times(p, l))
    }

    fn norm(&self, p: &Word) -> usize {
        p.len()
    }
}

impl Metric for CayleyBall {
    type Point = usize;

    fn origin(&self) -> usize {
        0
    }

    fn step(&self, p: &usize, l: Letter) -> Result<usize, WordsError> {
        self.edges[*p][l.index()].ok_or(WordsError::BallTooSmall(self.radius))
    }

    fn norm(&self, p: &usize) -> usize {
        self.distances[*p]
    }
}

/// Smallest admissible distance for a subword of each length:
/// `ceil(len / lambda - nu)`, clamped at 0.
#[derive(Clone, Debug)]
pub struct QgThresholds {
    lambda: BigRational,
    nu: BigRational,
    table: Vec<usize>,
}

impl QgThresholds {
    pub fn new(lambda: &BigRational, nu: &BigRational) -> Result<Self, WordsError> {
        if *lambda < BigRational::one() || nu.is_negative() {
            return Err(WordsError::InvalidConstant(format!("need lambda >= 1 and nu >= 0, got {lambda}, {nu}")));
        }
        Ok(QgThresholds { lambda: lambda.clone(), nu: nu.clone(), table: vec![0] })
    }

    pub fn get(&mut self, len: usize) -> usize {
        while self.table.len() <= len {
            let l = int(self.table.len() as i64);
            let x = l / &self.lambda - &self.nu;
            let c = ceil(&x);
            self.table.push(if c.is_positive() { c.to_usize().unwrap_or(usize::MAX) } else { 0 });
        }
        self.table[len]
    }
}

fn ceil(x: &BigRational) -> BigInt {
    let (q, r) = x.numer().div_rem(x.denom());
    if r.is_positive() {
        q + 1
    } else {
        q
    }
}

/// Whether every subword `w'` of `w` satisfies `d(1, w') >= |w'|/lambda - nu`.
pub fn is_quasigeodesic<M: Metric>(m: &M, w: &Word, lambda: &BigRational, nu: &BigRational) -> Result<bool, WordsError> {
    let mut th = QgThresholds::new(lambda, nu)?;
    is_quasigeodesic_with(m, w, &mut th)
}

pub fn is_quasigeodesic_with<M: Metric>(m: &M, w: &Word, th: &mut QgThresholds) -> Result<bool, WordsError> {
    for i in 0..w.len() {
        if !suffixes_ok_from(m, &w.0[i..], th)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks all prefixes of `w` against the thresholds.
fn suffixes_ok_from<M: Metric>(m: &M, w: &[Letter], th: &mut QgThresholds) -> Result<bool, WordsError> {
    let mut p = m.origin();
    for (j, &l) in w.iter().enumerate() {
        p = m.step(&p, l)?;
        if m.norm(&p) < th.get(j + 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Assuming `w` (without its last letter) is quasi-geodesic, checks whether
/// `w` is, by testing only the subwords ending at the last letter.
pub fn extends_quasigeodesic<M: Metric>(m: &M, w: &Word, th: &mut QgThresholds) -> Result<bool, WordsError> {
    // Subwords ending at the last letter are, inverted, the prefixes of w^-1.
    suffixes_ok_from(m, &w.inverse().0, th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{all_words, Presentation, WordProblem};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn derived_constants() {
        let one = r(1, 1);
        let c = derive_qg_constants(&one, 3, [&one, &one, &one], &r(0, 1), None).unwrap();
        assert_eq!(c.lambda0, r(1200, 1));
        assert_eq!(c.mu1, r(10, 1) + r(1, 600));
        assert_eq!(c.lambda, c.lambda1);
        assert_eq!(c.nu, c.mu1);
        let two = r(2, 1);
        let c = derive_qg_constants(&one, 3, [&two, &one, &one], &one, None).unwrap();
        assert_eq!(c.lambda, r(2400, 1));
        assert_eq!(c.nu, c.mu1.clone() + r(1, 1));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let one = r(1, 1);
        let z = r(0, 1);
        assert!(derive_qg_constants(&z, 3, [&one, &one, &one], &z, None).is_err());
        assert!(derive_qg_constants(&one, 0, [&one, &one, &one], &z, None).is_err());
    }

    #[test]
    fn quasigeodesic_examples() {
        let p = Presentation::infinite_dihedral();
        let g = Group::new(p.clone(), WordProblem::Auto).unwrap();
        let (one, zero) = (r(1, 1), r(0, 1));
        assert!(is_quasigeodesic(&g, &p.alphabet.parse("stst").unwrap(), &one, &zero).unwrap());
        assert!(!is_quasigeodesic(&g, &p.alphabet.parse("sS").unwrap(), &one, &zero).unwrap());
        let ball = CayleyBall::build(&g, 4, 1000).unwrap();
        for e in &ball.elements {
            assert!(is_quasigeodesic(&ball, e, &one, &zero).unwrap());
        }
        let long = p.alphabet.parse("ststst").unwrap();
        assert!(matches!(is_quasigeodesic(&ball, &long, &one, &zero), Err(WordsError::BallTooSmall(4))));
    }

    #[test]
    fn language_closed_under_subwords_and_inversion() {
        let p = Presentation::infinite_dihedral();
        let g = Group::new(p, WordProblem::Auto).unwrap();
        let (lam, nu) = (r(2, 1), r(1, 1));
        let words = all_words(4, 8);
        let member: std::collections::HashSet<Word> =
            words.iter().filter(|w| is_quasigeodesic(&g, w, &lam, &nu).unwrap()).cloned().collect();
        for w in &member {
            assert!(member.contains(&w.inverse()));
            for i in 0..=w.len() {
                for j in i..=w.len() {
                    assert!(member.contains(&w.subword(i, j)));
                }
            }
        }
    }

    #[test]
    fn incremental_check_agrees_with_full_check() {
        let p = Presentation::infinite_dihedral();
        let g = Group::new(p, WordProblem::Auto).unwrap();
        let mut th = QgThresholds::new(&r(2, 1), &r(1, 1)).unwrap();
        for w in all_words(4, 6) {
            if w.is_empty() {
                continue;
            }
            let prefix = w.subword(0, w.len() - 1);
            if is_quasigeodesic_with(&g, &prefix, &mut th).unwrap() {
                assert_eq!(
                    extends_quasigeodesic(&g, &w, &mut th).unwrap(),
                    is_quasigeodesic_with(&g, &w, &mut th).unwrap()
                );
            }
        }
    }
}
