use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

/// Smith normal form `U M V = D` with `U`, `V` unimodular and `D` diagonal,
/// `d_i | d_{i+1}`, `d_i >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snf {
    pub u: Matrix,
    pub d: Matrix,
    pub v: Matrix,
}

impl Snf {
    /// Diagonal entries `d[i][i]` for `i < min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let cols = self.v.len();
        (0..self.d.len().min(cols)).map(|i| self.d[i][i].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free Gaussian elimination (Bareiss).
pub fn determinant(m: &Matrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn swap_rows(m: &mut Matrix, i: usize, j: usize) {
    m.swap(i, j);
}

fn swap_cols(m: &mut Matrix, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// row_i -= q * row_j
fn sub_row(m: &mut Matrix, i: usize, j: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = m[j].clone();
    for (x, s) in m[i].iter_mut().zip(&src) {
        *x -= q * s;
    }
}

/// col_i -= q * col_j
fn sub_col(m: &mut Matrix, i: usize, j: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let s = row[j].clone();
        row[i] -= q * s;
    }
}

pub fn smith_normal_form(m: &[Vec<BigInt>]) -> Snf {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut d: Matrix = m.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the remaining block becomes the pivot.
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| !d[i][j].is_zero())
                .min_by(|&(a, b), &(c, e)| d[a][b].abs().cmp(&d[c][e].abs()));
            let Some((pi, pj)) = pivot else {
                return finish(u, d, v);
            };
            swap_rows(&mut d, t, pi);
            swap_rows(&mut u, t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);
            let mut clean = true;
            for i in t + 1..rows {
                let q = d[i][t].div_floor(&d[t][t]);
                sub_row(&mut d, i, t, &q);
                sub_row(&mut u, i, t, &q);
                clean &= d[i][t].is_zero();
            }
            for j in t + 1..cols {
                let q = d[t][j].div_floor(&d[t][t]);
                sub_col(&mut d, j, t, &q);
                sub_col(&mut v, j, t, &q);
                clean &= d[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // Pivot must divide the rest of the block; otherwise fold the
            // offending row in and go again.
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !d[i][j].is_multiple_of(&d[t][t])));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    sub_row(&mut d, t, i, &minus_one);
                    sub_row(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
    }
    finish(u, d, v)
}

fn finish(mut u: Matrix, mut d: Matrix, v: Matrix) -> Snf {
    for i in 0..d.len().min(v.len()) {
        if d[i][i].is_negative() {
            for x in d[i].iter_mut() {
                *x = -x.clone();
            }
            for x in u[i].iter_mut() {
                *x = -x.clone();
            }
        }
    }
    Snf { u, d, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(m: &[&[i64]]) -> Matrix {
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn check(m: &Matrix) -> Snf {
        let s = smith_normal_form(m);
        assert_eq!(mat_mul(&mat_mul(&s.u, m), &s.v), s.d);
        assert_eq!(determinant(&s.u).abs(), BigInt::one());
        assert_eq!(determinant(&s.v).abs(), BigInt::one());
        let diag = s.diagonal();
        for (i, row) in s.d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i != j {
                    assert!(x.is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            assert!(w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0])));
        }
        s
    }

    #[test]
    fn two_by_two_example() {
        let s = check(&big(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn identity_and_zero() {
        let s = check(&identity(3));
        assert_eq!(s.d, identity(3));
        let z = big(&[&[0, 0], &[0, 0], &[0, 0]]);
        assert_eq!(check(&z).d, z);
    }

    #[test]
    fn divisibility_needs_row_fold() {
        let s = check(&big(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn rectangular_shapes() {
        check(&big(&[&[1, 1, 1, 1, -1, -1, -1, -1]]));
        check(&big(&[&[2], &[4], &[6]]));
        check(&big(&[&[0, 2, 0], &[0, 0, 0]]));
        let empty: Matrix = Vec::new();
        assert!(smith_normal_form(&empty).d.is_empty());
    }
}
