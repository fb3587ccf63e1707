use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{smith_normal_form, FgaElement, FgaGroup};

/// `sum coeff * var = rhs`; repeated variables are allowed and add up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearEquation {
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: FgaElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianLinearSystem {
    pub group: FgaGroup,
    pub variables: Vec<String>,
    pub equations: Vec<LinearEquation>,
}

impl AbelianLinearSystem {
    pub fn new(group: FgaGroup, variables: Vec<String>) -> Self {
        AbelianLinearSystem { group, variables, equations: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<(usize, i64)>, rhs: FgaElement) {
        self.equations.push(LinearEquation { coeffs, rhs });
    }

    pub fn evaluate(&self, eq: &LinearEquation, x: &[FgaElement]) -> FgaElement {
        let g = &self.group;
        eq.coeffs.iter().fold(g.zero(), |acc, &(v, c)| g.add(&acc, &g.scale(c, &x[v])))
    }

    pub fn is_satisfied_by(&self, x: &[FgaElement]) -> bool {
        x.len() == self.variables.len()
            && x.iter().all(|e| self.group.contains(e))
            && self.equations.iter().all(|eq| self.evaluate(eq, x) == eq.rhs)
    }
}

/// Integer solution of `M x = r`, free parameters set to zero.
fn solve_integer(m: &[Vec<BigInt>], r: &[BigInt], n: usize) -> Option<Vec<BigInt>> {
    if m.is_empty() {
        return Some(vec![BigInt::zero(); n]);
    }
    let s = smith_normal_form(m);
    let ur: Vec<BigInt> = s.u.iter().map(|row| row.iter().zip(r).map(|(a, b)| a * b).sum()).collect();
    let cols = m[0].len();
    let mut y = vec![BigInt::zero(); cols];
    for (i, c) in ur.iter().enumerate() {
        let d = if i < cols { s.d[i][i].clone() } else { BigInt::zero() };
        if d.is_zero() {
            if !c.is_zero() {
                return None;
            }
        } else {
            let (q, rem) = c.div_rem(&d);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some((0..n).map(|i| s.v[i].iter().zip(&y).map(|(a, b)| a * b).sum()).collect())
}

/// Finds one solution, or `None` when there is none. Each coordinate of the
/// group gives an independent integer system; torsion coordinates get a
/// slack column `d * y` per equation. The witness is the Smith-form
/// particular solution with all free parameters zero.
pub fn solve_linear_system(sys: &AbelianLinearSystem) -> Option<Vec<FgaElement>> {
    let g = &sys.group;
    let n = sys.variables.len();
    let rows = sys.equations.len();
    let mut base = vec![vec![BigInt::zero(); n]; rows];
    for (i, eq) in sys.equations.iter().enumerate() {
        for &(v, c) in &eq.coeffs {
            base[i][v] += c;
        }
    }
    let mut out = vec![g.zero(); n];
    for k in 0..g.rank {
        let r: Vec<BigInt> = sys.equations.iter().map(|e| BigInt::from(e.rhs.free[k])).collect();
        let x = solve_integer(&base, &r, n)?;
        for (v, val) in x.iter().enumerate() {
            out[v].free[k] = val.to_i64()?;
        }
    }
    for (k, &d) in g.torsion.iter().enumerate() {
        let m: Vec<Vec<BigInt>> = base
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut row = row.clone();
                row.extend((0..rows).map(|j| if i == j { BigInt::from(d) } else { BigInt::zero() }));
                row
            })
            .collect();
        let r: Vec<BigInt> = sys.equations.iter().map(|e| BigInt::from(e.rhs.tors[k])).collect();
        let x = solve_integer(&m, &r, n)?;
        let bd = BigInt::from(d);
        for (v, val) in x.iter().enumerate() {
            out[v].tors[k] = val.mod_floor(&bd).to_i64().expect("residue fits");
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn scalar_over_integers() {
        let z = FgaGroup::integers();
        let mut s = AbelianLinearSystem::new(z.clone(), vars(1));
        s.push(vec![(0, 2)], z.element(vec![6], vec![]).unwrap());
        assert_eq!(solve_linear_system(&s).unwrap(), vec![z.element(vec![3], vec![]).unwrap()]);
    }

    #[test]
    fn zero_equals_minus_two_has_no_solution() {
        let z = FgaGroup::integers();
        let mut s = AbelianLinearSystem::new(z.clone(), vars(1));
        s.push(vec![(0, 1), (0, -1)], z.element(vec![-2], vec![]).unwrap());
        assert!(solve_linear_system(&s).is_none());
    }

    #[test]
    fn mod_two_system() {
        let g = FgaGroup::cyclic(2).unwrap();
        let mut s = AbelianLinearSystem::new(g.clone(), vars(2));
        s.push(vec![(0, 1), (1, 1)], g.zero());
        s.push(vec![(0, 1), (1, -1)], g.zero());
        let x = solve_linear_system(&s).unwrap();
        assert!(s.is_satisfied_by(&x));
        assert_eq!(x[0], x[1]);
    }

    #[test]
    fn torsion_divisibility() {
        let g = FgaGroup::cyclic(4).unwrap();
        let mut s = AbelianLinearSystem::new(g.clone(), vars(1));
        s.push(vec![(0, 2)], g.element(vec![], vec![1]).unwrap());
        assert!(solve_linear_system(&s).is_none());
        s.equations[0].rhs = g.element(vec![], vec![2]).unwrap();
        assert!(s.is_satisfied_by(&solve_linear_system(&s).unwrap()));
    }

    #[test]
    fn empty_system() {
        let g = FgaGroup::new(1, vec![3]).unwrap();
        let s = AbelianLinearSystem::new(g.clone(), vars(2));
        assert_eq!(solve_linear_system(&s).unwrap(), vec![g.zero(), g.zero()]);
    }
}
