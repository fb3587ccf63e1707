use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abelian::FgaElement;
use crate::extension::{CentralExtension, Coords, ExtElement};
use crate::words::Word;

use super::oracle::VSolution;
use super::theta::{symbol_pattern, ThetaIndex};
use super::{EquationSystem, ReductionError, Result, Slot, TriangularSystem, VGroupContext};

pub const CERTIFICATE_VERSION: u32 = 1;

/// Lifted value of one variable of the triangular system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedRow {
    pub variable: String,
    /// The `V`-word assigned to the variable.
    pub v: String,
    pub w: FgaElement,
    pub d: FgaElement,
    /// The lifted element of `E`: base normal form and `rho` coordinate.
    pub g: String,
    pub a: FgaElement,
}

/// A replayable record of a solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub format_version: u32,
    pub input_digest: String,
    pub theta: Vec<Vec<String>>,
    pub p: Vec<Vec<String>>,
    pub lifted: Vec<LiftedRow>,
    /// The values of the original variables, `(name, g, a)`.
    pub assignment: Vec<(String, String, FgaElement)>,
    pub transcript: Vec<String>,
    pub validation_radii: BTreeMap<String, usize>,
}

/// Digest of the extension and the equation system.
pub fn input_digest(ext: &CentralExtension, sys: &EquationSystem) -> String {
    let al = &ext.base.presentation.alphabet;
    let mut h = Sha256::new();
    h.update(format!("generators {:?}\n", al.generators()));
    for (r, z) in ext.base.presentation.relators.iter().zip(&ext.relator_lifts) {
        h.update(format!("relator {} = {z}\n", al.render(r)));
    }
    h.update(format!("kernel {}\n", ext.kernel.describe()));
    h.update(format!("variables {:?}\n", sys.variables));
    for (n, e) in &sys.constants {
        h.update(format!("constant {n} = ({}, {})\n", al.render(&e.g), e.a));
    }
    for eq in &sys.equations {
        h.update(format!("equation {}\n", sys.render_equation(eq)));
    }
    format!("{:x}", h.finalize())
}

/// `q(pi(v)) i(iota1(w) - iota4(d))`, in `q` coordinates.
fn lifted_element(ext: &CentralExtension, g: &Word, w: &FgaElement, d: &FgaElement) -> ExtElement {
    let p = &ext.pushout;
    let a = p.sub(&ext.kernel.iota1(w), &ext.kernel.iota4(d));
    ext.element(Coords::Q, g, a)
}

/// Output of [`lift_solution`]: the lifted value of every variable of the
/// triangular system, in `rho` coordinates, and a verification transcript.
pub struct Lift {
    pub values: Vec<ExtElement>,
    pub rows: Vec<LiftedRow>,
    pub transcript: Vec<String>,
}

/// Lifts solutions of `V_t` and `W_t` to `E` and verifies the result: every
/// row multiplies to 1 in `E'`, every value lies in the image of `E`, and
/// constants lift to themselves.
pub fn lift_solution(
    t: &ThetaIndex,
    tri: &TriangularSystem,
    vsol: &VSolution,
    wsol: &[FgaElement],
    constants: &BTreeMap<usize, FgaElement>,
    ctx: &VGroupContext,
    ext: &CentralExtension,
) -> Result<Lift> {
    let (symbol_of, _) = symbol_pattern(tri);
    let al = &ext.base.presentation.alphabet;
    let mut transcript = Vec::new();
    let mut values: Vec<Option<ExtElement>> = vec![None; tri.variables.len()];
    let mut rows = Vec::new();
    for (i, (row, slots)) in tri.rows.iter().zip(&t.rows).enumerate() {
        let fail = |reason: String| ReductionError::LiftVerificationFailed { row: i, reason };
        let mut lifted = Vec::new();
        for (j, (sym, slot)) in row.iter().zip(slots).enumerate() {
            let vword = &vsol.v[symbol_of[i][j]];
            let g = ctx.project(ext, vword);
            let w = match *sym {
                Slot::Var(x) => &wsol[x],
                Slot::Const(c) => &constants[&c],
            };
            let e = lifted_element(ext, &g, w, &slot.d);
            let rho = ext
                .convert(&e, Coords::Rho)
                .map_err(|_| fail(format!("position {j} is not in the image of E")))?;
            match *sym {
                Slot::Const(c) => {
                    let want = ext.iota2(&tri.constants[c].1)?;
                    let got = ext.convert(&e, Coords::RhoPrime)?;
                    if got != want {
                        return Err(fail(format!("constant {} does not lift to itself", tri.constants[c].0)));
                    }
                }
                Slot::Var(x) => {
                    if values[x].is_none() {
                        rows.push(LiftedRow {
                            variable: tri.variables[x].clone(),
                            v: ctx.render(vword),
                            w: w.clone(),
                            d: slot.d.clone(),
                            g: al.render(&rho.g),
                            a: rho.a.clone(),
                        });
                    }
                    if values[x].as_ref().is_some_and(|prev| *prev != rho) {
                        return Err(fail(format!("variable {} lifts to two values", tri.variables[x])));
                    }
                    values[x] = Some(rho);
                }
            }
            lifted.push(e);
        }
        let mut acc = ext.identity(Coords::Q);
        for e in &lifted {
            acc = ext.mult(&acc, e)?;
        }
        if !ext.is_identity(&acc) {
            return Err(fail(format!("row product is ({}, {}) in E'", al.render(&acc.g), acc.a)));
        }
        transcript.push(format!("row {i}: {} = 1 in E'", tri.render_row(row)));
    }
    let values: Vec<ExtElement> = values
        .into_iter()
        .map(|v| v.unwrap_or_else(|| ext.identity(Coords::Rho)))
        .collect();
    if !tri.is_solved_by(ext, &values)? {
        return Err(ReductionError::LiftVerificationFailed { row: 0, reason: "triangular system fails in E".into() });
    }
    transcript.push("triangular system holds in E".into());
    Ok(Lift { values, rows, transcript })
}

/// Assembles a certificate after checking the original system.
#[allow(clippy::too_many_arguments)]
pub fn make_certificate(
    ext: &CentralExtension,
    sys: &EquationSystem,
    tri: &TriangularSystem,
    ctx: &VGroupContext,
    t: &ThetaIndex,
    vsol: &VSolution,
    lift: Lift,
    validation_radii: BTreeMap<String, usize>,
) -> Result<(Vec<ExtElement>, Certificate)> {
    let al = &ext.base.presentation.alphabet;
    let original: Vec<ExtElement> = lift.values[..tri.n_original].to_vec();
    if !sys.is_solved_by(ext, &original)? {
        return Err(ReductionError::LiftVerificationFailed { row: 0, reason: "original system fails in E".into() });
    }
    let mut transcript = lift.transcript;
    transcript.push("original system holds in E".into());
    let theta = t
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| format!("c={} s={} s'={} a={} b={} d={}", ctx.render(&s.c), s.s, s.s_end, s.a, s.b, s.d))
                .collect()
        })
        .collect();
    let p = vsol.p.iter().map(|row| row.iter().map(|w| ctx.render(w)).collect()).collect();
    let assignment = sys
        .variables
        .iter()
        .zip(&original)
        .map(|(n, e)| (n.clone(), al.render(&e.g), e.a.clone()))
        .collect();
    let cert = Certificate {
        format_version: CERTIFICATE_VERSION,
        input_digest: input_digest(ext, sys),
        theta,
        p,
        lifted: lift.rows,
        assignment,
        transcript,
        validation_radii,
    };
    Ok((original, cert))
}

/// Replays a certificate: recomputes every lifted value from its `v`, `w`
/// and `d`, compares with the recorded assignment and checks the system by
/// direct multiplication in `E`.
pub fn verify_certificate(cert: &Certificate, ext: &CentralExtension, sys: &EquationSystem) -> Result<()> {
    let mismatch = |s: String| ReductionError::CertificateMismatch(s);
    if cert.format_version != CERTIFICATE_VERSION {
        return Err(mismatch(format!("format version {}", cert.format_version)));
    }
    if cert.input_digest != input_digest(ext, sys) {
        return Err(mismatch("input digest differs".into()));
    }
    let al = &ext.base.presentation.alphabet;
    for row in &cert.lifted {
        let v = al.parse(&row.v)?;
        let e = lifted_element(ext, &ext.nf(&v), &row.w, &row.d);
        let rho = ext.convert(&e, Coords::Rho).map_err(|_| mismatch(format!("{} is not in E", row.variable)))?;
        if al.render(&rho.g) != row.g || rho.a != row.a {
            return Err(mismatch(format!("lift of {} differs from the record", row.variable)));
        }
    }
    let mut values = Vec::new();
    for name in &sys.variables {
        let (_, g, a) = cert
            .assignment
            .iter()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| mismatch(format!("no value for {name}")))?;
        if let Some(row) = cert.lifted.iter().find(|r| &r.variable == name) {
            if &row.g != g || &row.a != a {
                return Err(mismatch(format!("assignment of {name} differs from its lift")));
            }
        }
        if !ext.kernel.contains(a) {
            return Err(mismatch(format!("value of {name} has a bad kernel part")));
        }
        values.push(ext.element(Coords::Rho, &al.parse(g)?, a.clone()));
    }
    if !sys.is_solved_by(ext, &values)? {
        return Err(mismatch("assignment does not solve the system".into()));
    }
    Ok(())
}
