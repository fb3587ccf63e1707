//! Finitely generated abelian groups `Z^n + Z_d1 + ... + Z_dm`, the pushout
//! group with doubled torsion, the parity group, the maps between them, and
//! an exact linear-system solver.

mod linear;
mod snf;

pub use linear::{solve_linear_system, AbelianLinearSystem, LinearEquation};
pub use snf::{determinant, identity, mat_mul, smith_normal_form, Matrix, Snf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbelianError {
    #[error("element does not belong to the group {0}")]
    GroupMismatch(String),
    #[error("torsion orders must be at least 2, got {0}")]
    BadTorsion(i64),
    #[error("element is not in the image of the doubling map")]
    NotInImage,
    #[error("coordinate overflow")]
    Overflow,
}

/// `Z^rank + Z_torsion[0] + ... `.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FgaGroup {
    pub rank: usize,
    pub torsion: Vec<i64>,
}

/// Element of an [`FgaGroup`]; torsion residues are kept in `[0, d)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FgaElement {
    pub free: Vec<i64>,
    pub tors: Vec<i64>,
}

impl FgaElement {
    pub fn is_zero(&self) -> bool {
        self.free.iter().chain(&self.tors).all(|&x| x == 0)
    }
}

impl std::fmt::Display for FgaElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        if self.tors.is_empty() {
            write!(f, "({})", join(&self.free))
        } else {
            write!(f, "({} | {})", join(&self.free), join(&self.tors))
        }
    }
}

impl FgaGroup {
    pub fn new(rank: usize, torsion: Vec<i64>) -> Result<Self, AbelianError> {
        if let Some(&d) = torsion.iter().find(|&&d| d < 2) {
            return Err(AbelianError::BadTorsion(d));
        }
        Ok(FgaGroup { rank, torsion })
    }

    pub fn integers() -> Self {
        FgaGroup { rank: 1, torsion: Vec::new() }
    }

    pub fn cyclic(d: i64) -> Result<Self, AbelianError> {
        Self::new(0, vec![d])
    }

    /// Number of elements, `None` when the free rank is positive.
    pub fn order(&self) -> Option<u64> {
        if self.rank > 0 {
            return None;
        }
        Some(self.torsion.iter().map(|&d| d as u64).product())
    }

    /// The pushout group: same rank, every torsion order doubled.
    pub fn pushout(&self) -> FgaGroup {
        FgaGroup { rank: self.rank, torsion: self.torsion.iter().map(|d| 2 * d).collect() }
    }

    /// `Z_2^rank + Z_d1 + ... + Z_dm`, as a torsion-only group.
    pub fn parity_group(&self) -> FgaGroup {
        let mut torsion = vec![2; self.rank];
        torsion.extend_from_slice(&self.torsion);
        FgaGroup { rank: 0, torsion }
    }

    pub fn zero(&self) -> FgaElement {
        FgaElement { free: vec![0; self.rank], tors: vec![0; self.torsion.len()] }
    }

    /// Builds an element, reducing torsion residues.
    pub fn element(&self, free: Vec<i64>, tors: Vec<i64>) -> Result<FgaElement, AbelianError> {
        if free.len() != self.rank || tors.len() != self.torsion.len() {
            return Err(AbelianError::GroupMismatch(self.describe()));
        }
        let tors = tors.iter().zip(&self.torsion).map(|(x, d)| x.rem_euclid(*d)).collect();
        Ok(FgaElement { free, tors })
    }

    /// The `i`-th standard generator (free coordinates first).
    pub fn generator(&self, i: usize) -> FgaElement {
        let mut e = self.zero();
        if i < self.rank {
            e.free[i] = 1;
        } else {
            e.tors[i - self.rank] = 1;
        }
        e
    }

    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.rank > 0 {
            parts.push(if self.rank == 1 { "Z".into() } else { format!("Z^{}", self.rank) });
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn contains(&self, a: &FgaElement) -> bool {
        a.free.len() == self.rank
            && a.tors.len() == self.torsion.len()
            && a.tors.iter().zip(&self.torsion).all(|(x, d)| (0..*d).contains(x))
    }

    fn check(&self, a: &FgaElement) -> Result<(), AbelianError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(AbelianError::GroupMismatch(self.describe()))
        }
    }

    pub fn try_add(&self, a: &FgaElement, b: &FgaElement) -> Result<FgaElement, AbelianError> {
        self.check(a)?;
        self.check(b)?;
        let free = a
            .free
            .iter()
            .zip(&b.free)
            .map(|(x, y)| x.checked_add(*y).ok_or(AbelianError::Overflow))
            .collect::<Result<_, _>>()?;
        let tors = a.tors.iter().zip(&b.tors).zip(&self.torsion).map(|((x, y), d)| (x + y) % d).collect();
        Ok(FgaElement { free, tors })
    }

    pub fn try_neg(&self, a: &FgaElement) -> Result<FgaElement, AbelianError> {
        self.check(a)?;
        let free = a.free.iter().map(|x| x.checked_neg().ok_or(AbelianError::Overflow)).collect::<Result<_, _>>()?;
        let tors = a.tors.iter().zip(&self.torsion).map(|(x, d)| (d - x) % d).collect();
        Ok(FgaElement { free, tors })
    }

    pub fn try_scale(&self, k: i64, a: &FgaElement) -> Result<FgaElement, AbelianError> {
        self.check(a)?;
        let free = a.free.iter().map(|x| x.checked_mul(k).ok_or(AbelianError::Overflow)).collect::<Result<_, _>>()?;
        let tors = a
            .tors
            .iter()
            .zip(&self.torsion)
            .map(|(x, d)| ((*x as i128 * k as i128).rem_euclid(*d as i128)) as i64)
            .collect();
        Ok(FgaElement { free, tors })
    }

    /// Panicking addition for callers that already hold elements of this
    /// group; mismatches and overflow are bugs there.
    pub fn add(&self, a: &FgaElement, b: &FgaElement) -> FgaElement {
        self.try_add(a, b).unwrap_or_else(|e| panic!("{e}: {a} + {b}"))
    }

    pub fn neg(&self, a: &FgaElement) -> FgaElement {
        self.try_neg(a).unwrap_or_else(|e| panic!("{e}: -{a}"))
    }

    pub fn sub(&self, a: &FgaElement, b: &FgaElement) -> FgaElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, k: i64, a: &FgaElement) -> FgaElement {
        self.try_scale(k, a).unwrap_or_else(|e| panic!("{e}: {k} * {a}"))
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a FgaElement>) -> FgaElement {
        items.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }

    /// Every element, when the group is finite and has at most `cap`
    /// elements.
    pub fn elements(&self, cap: u64) -> Option<Vec<FgaElement>> {
        let n = self.order()?;
        if n > cap {
            return None;
        }
        let mut out = vec![self.zero()];
        for (k, &d) in self.torsion.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..d).map(move |r| {
                        let mut e = e.clone();
                        e.tors[k] = r;
                        e
                    })
                })
                .collect();
        }
        Some(out)
    }

    // Structure maps. `self` is always the kernel group A.

    /// Parity map `A -> Z_2^n + Z_d1 + ...`: free coordinates mod 2,
    /// torsion unchanged.
    pub fn pa(&self, a: &FgaElement) -> FgaElement {
        let mut tors: Vec<i64> = a.free.iter().map(|x| x.rem_euclid(2)).collect();
        tors.extend_from_slice(&a.tors);
        FgaElement { free: Vec::new(), tors }
    }

    /// Doubling map `A -> A'`.
    pub fn iota1(&self, a: &FgaElement) -> FgaElement {
        FgaElement {
            free: a.free.iter().map(|x| x.checked_mul(2).expect("coordinate overflow")).collect(),
            tors: a.tors.iter().map(|x| 2 * x).collect(),
        }
    }

    /// Preimage under the doubling map, if any.
    pub fn iota1_inverse(&self, a: &FgaElement) -> Result<FgaElement, AbelianError> {
        if a.free.len() != self.rank || a.tors.len() != self.torsion.len() {
            return Err(AbelianError::GroupMismatch(self.pushout().describe()));
        }
        if a.free.iter().chain(&a.tors).any(|x| x.rem_euclid(2) != 0) {
            return Err(AbelianError::NotInImage);
        }
        Ok(FgaElement {
            free: a.free.iter().map(|x| x / 2).collect(),
            tors: a.tors.iter().zip(&self.torsion).map(|(x, d)| x.rem_euclid(2 * d) / 2).collect(),
        })
    }

    /// Coordinate reinterpretation `A -> A'` (residue `b mod d` read as
    /// `b mod 2d`). Not a homomorphism.
    pub fn iota3(&self, a: &FgaElement) -> FgaElement {
        a.clone()
    }

    /// Coordinate reinterpretation of a parity element into `A'`: parity
    /// bits become free coordinates 0 or 1, torsion residues are read mod
    /// `2d`. Not a homomorphism.
    pub fn iota4(&self, p: &FgaElement) -> FgaElement {
        FgaElement { free: p.tors[..self.rank].to_vec(), tors: p.tors[self.rank..].to_vec() }
    }
}
