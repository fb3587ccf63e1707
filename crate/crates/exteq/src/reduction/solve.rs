use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::Fsa;
use crate::extension::{CentralExtension, Coords, ExtElement};
use crate::fpa_ppa::{build_fpa, build_lfpa, build_ppa, build_rfpa, Fpa, Ppa};
use crate::lrational::{build_predictor_family, FamilyKind, SynthesisConfig};
use crate::words::{CayleyBall, Word};

use super::lift::{lift_solution, make_certificate, Certificate};
use super::oracle::{BruteForceOracle, OracleResult, VOracle};
use super::systems::{build_vt, build_wt, check_lemma_items, WOutcome, WSystem};
use super::oracle::VSolution;
use super::theta::{
    check_theta, enumerate_theta, theta_direct, theta_from_base_solution, witness_from_base_solution, Frame, ThetaIndex,
    ThetaInputs,
};
use super::{triangularize, EquationSystem, ReductionError, Result, Term, TriangularSystem, VGroupContext};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Only `Solved` is conclusive.
    #[default]
    Sound,
    /// Finite base group with every element covered: exhausting all
    /// candidates proves there is no solution.
    FiniteComplete,
}

/// How candidate indices `t` are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// One index per solution of the projected system over the base group,
    /// read off the tripod solution with every `p` empty.
    BaseSolutions,
    /// The whole of Θ, streamed, stopping after `cap` indices.
    FullTheta { cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    pub mode: Mode,
    pub strategy: Strategy,
    /// Longest `p` word the oracle tries.
    pub oracle_bound: usize,
    pub node_budget: usize,
    /// Extra length allowed for representatives of constants.
    pub rep_slack: usize,
    /// Radius of the ball searched for base solutions when the base group
    /// is infinite.
    pub base_radius: usize,
    /// Base solutions to use instead of searching, one word per original
    /// variable.
    pub hints: Option<Vec<Vec<Word>>>,
    pub max_base_solutions: usize,
    pub value_cap: usize,
    pub parallel: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: Mode::Sound,
            strategy: Strategy::BaseSolutions,
            oracle_bound: 2,
            node_budget: 1_000_000,
            rep_slack: 0,
            base_radius: 2,
            hints: None,
            max_base_solutions: 100_000,
            value_cap: 4096,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Solved { assignment: Vec<ExtElement>, certificate: Box<Certificate> },
    NoSolutionWithinBounds,
    Unsolvable,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Solved { .. } => "solved",
            Verdict::NoSolutionWithinBounds => "no-solution-within-bounds",
            Verdict::Unsolvable => "unsolvable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaStatus {
    /// A centre is longer than `kappa2`, so the index is not in Θ.
    ExceedsKappa2 { length: usize },
    InvalidIndex(String),
    WNoSolution(String),
    OracleExhausted { complete: bool },
    Solved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaOutcome {
    pub label: String,
    pub status: ThetaStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub outcomes: Vec<ThetaOutcome>,
    /// Failures of the rational-constraint lemma on oracle solutions.
    pub lemma_failures: Vec<String>,
    pub oracle_solutions: usize,
    pub notes: Vec<String>,
}

/// Synthesized automata for one extension, ready to solve systems.
pub struct Pipeline<'a> {
    pub ext: &'a CentralExtension,
    pub ctx: VGroupContext,
    pub l: Fsa,
    pub fpa: Fpa,
    pub ppa: Ppa,
    pub validation_radii: BTreeMap<String, usize>,
}

/// Settings for [`Pipeline::build`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub synthesis: SynthesisConfig,
    pub kappa2: usize,
    pub cap_states: usize,
}

impl<'a> Pipeline<'a> {
    /// Synthesizes the three predictor families from `l` and builds the
    /// future and parity predicting automata.
    pub fn build(ext: &'a CentralExtension, l: Fsa, cfg: &PipelineConfig) -> Result<Self> {
        let family = |kind| build_predictor_family(ext, kind, &l, &cfg.synthesis);
        let q = family(FamilyKind::QLeft)?;
        let left = family(FamilyKind::RhoLeft)?;
        let right = family(FamilyKind::RhoRightReversed)?;
        let fpa = build_fpa(&q, cfg.cap_states)?;
        let lfpa = build_lfpa(&left, cfg.cap_states)?;
        let rfpa = build_rfpa(&right, cfg.cap_states)?;
        let ppa = build_ppa(&lfpa, &rfpa, ext, cfg.cap_states)?;
        let validation_radii = BTreeMap::from([
            ("q-left".to_string(), q.validation_radius),
            ("rho-left".to_string(), left.validation_radius),
            ("rho-right-reversed".to_string(), right.validation_radius),
        ]);
        Ok(Pipeline { ctx: VGroupContext::identity(ext, cfg.kappa2), ext, l, fpa, ppa, validation_radii })
    }

    pub fn from_parts(ext: &'a CentralExtension, ctx: VGroupContext, l: Fsa, fpa: Fpa, ppa: Ppa) -> Self {
        let validation_radii = BTreeMap::from([("q-left".to_string(), fpa.validation_radius)]);
        Pipeline { ext, ctx, l, fpa, ppa, validation_radii }
    }

    pub fn inputs<'b>(&'b self, tri: &'b TriangularSystem, value_cap: usize) -> ThetaInputs<'b> {
        ThetaInputs { tri, ctx: &self.ctx, ext: self.ext, fpa: &self.fpa, ppa: &self.ppa, value_cap }
    }

    /// Builds and solves `W_t` and `V_t` and lifts a solution.
    fn process(
        &self,
        sys: &EquationSystem,
        inp: &ThetaInputs,
        t: &ThetaIndex,
        cfg: &SolveConfig,
    ) -> Result<(ThetaStatus, Option<Verdict>, Vec<String>, usize)> {
        let wt = build_wt(t, inp.frame())?;
        let (wsol, constants) = match (wt.solve(), &wt) {
            (WOutcome::NoSolution(r), _) => return Ok((ThetaStatus::WNoSolution(r), None, Vec::new(), 0)),
            (WOutcome::Solved(x), WSystem::Linear { constants, .. }) => (x, constants.clone()),
            (WOutcome::Solved(_), WSystem::NoSolution { .. }) => unreachable!("a marked system has no solution"),
        };
        let vt = build_vt(t, inp, &self.l, cfg.rep_slack)?;
        let oracle = BruteForceOracle { bound: cfg.oracle_bound, node_budget: cfg.node_budget };
        let vsol = match oracle.solve(&vt) {
            OracleResult::Found(s) => s,
            OracleResult::ExhaustedBound { complete, .. } => {
                return Ok((ThetaStatus::OracleExhausted { complete }, None, Vec::new(), 0))
            }
        };
        let lemma = check_lemma_items(t, inp.frame(), &vsol.p, &vsol.v);
        let lift = lift_solution(t, inp.tri, &vsol, &wsol, &constants, &self.ctx, self.ext)?;
        let (assignment, certificate) =
            make_certificate(self.ext, sys, inp.tri, &self.ctx, t, &vsol, lift, self.validation_radii.clone())?;
        Ok((ThetaStatus::Solved, Some(Verdict::Solved { assignment, certificate: Box::new(certificate) }), lemma, 1))
    }

    pub fn solve(&self, sys: &EquationSystem, cfg: &SolveConfig) -> Result<SolveReport> {
        let tri = triangularize(self.ext, sys)?;
        let inp = self.inputs(&tri, cfg.value_cap);
        let finite = self.ext.base.is_finite();
        if cfg.mode == Mode::FiniteComplete {
            if !finite {
                return Err(ReductionError::NotFiniteComplete("a finite base group".into()));
            }
            let diameter = group_elements(self.ext, 0)?.0.iter().map(Word::len).max().unwrap_or(0);
            if self.ctx.kappa2 < diameter {
                return Err(ReductionError::NotFiniteComplete(format!("kappa2 at least the diameter {diameter}")));
            }
            if cfg.hints.is_some() {
                return Err(ReductionError::NotFiniteComplete("no base-solution hints".into()));
            }
        }
        let mut report = SolveReport {
            verdict: Verdict::NoSolutionWithinBounds,
            outcomes: Vec::new(),
            lemma_failures: Vec::new(),
            oracle_solutions: 0,
            notes: Vec::new(),
        };
        let mut conclusive = cfg.mode == Mode::FiniteComplete;
        match cfg.strategy {
            Strategy::BaseSolutions => {
                let (sols, complete) = match &cfg.hints {
                    Some(h) => (h.clone(), false),
                    None => base_solutions(self.ext, sys, cfg.base_radius, cfg.max_base_solutions)?,
                };
                conclusive &= complete;
                report.notes.push(format!("{} base solutions", sols.len()));
                let mul = |u: &Word, v: &Word| self.ext.nf(&u.concat(v));
                let inv = |u: &Word| self.ext.nf(&u.inverse());
                let run = |k: usize| -> Result<(ThetaOutcome, Option<Verdict>, Vec<String>, usize)> {
                    let base = &sols[k];
                    let values = tri.extend(base, |c| tri.constants[c].1.g.clone(), mul, inv);
                    let label = base_label(self.ext, &tri, base);
                    let longest = values.iter().map(Word::len).max().unwrap_or(0);
                    if longest > self.ctx.kappa2 {
                        let st = ThetaStatus::ExceedsKappa2 { length: longest };
                        return Ok((ThetaOutcome { label, status: st }, None, Vec::new(), 0));
                    }
                    let t = match theta_from_base_solution(&inp, &self.l, &values) {
                        Ok((t, _)) => t,
                        Err(e) => {
                            let st = ThetaStatus::InvalidIndex(e.to_string());
                            return Ok((ThetaOutcome { label, status: st }, None, Vec::new(), 0));
                        }
                    };
                    if let Err(e) = check_theta(&t, &inp) {
                        let st = ThetaStatus::InvalidIndex(e);
                        return Ok((ThetaOutcome { label, status: st }, None, Vec::new(), 0));
                    }
                    let (status, verdict, lemma, n) = self.process(sys, &inp, &t, cfg)?;
                    Ok((ThetaOutcome { label, status }, verdict, lemma, n))
                };
                let results = if cfg.parallel {
                    let best = AtomicUsize::new(usize::MAX);
                    let out: Vec<Option<Result<_>>> = (0..sols.len())
                        .into_par_iter()
                        .map(|k| {
                            if k > best.load(Ordering::Relaxed) {
                                return None;
                            }
                            let r = run(k);
                            if matches!(&r, Ok((_, Some(_), _, _))) {
                                best.fetch_min(k, Ordering::Relaxed);
                            }
                            Some(r)
                        })
                        .collect();
                    out.into_iter().flatten().collect::<Vec<_>>()
                } else {
                    let mut out = Vec::new();
                    for k in 0..sols.len() {
                        let r = run(k);
                        let done = matches!(&r, Ok((_, Some(_), _, _)));
                        out.push(r);
                        if done {
                            break;
                        }
                    }
                    out
                };
                for r in results {
                    let (outcome, verdict, lemma, n) = r?;
                    report.oracle_solutions += n;
                    report.lemma_failures.extend(lemma);
                    conclusive &= !matches!(
                        outcome.status,
                        ThetaStatus::InvalidIndex(_) | ThetaStatus::OracleExhausted { .. }
                    );
                    report.outcomes.push(outcome);
                    if let Some(v) = verdict {
                        report.verdict = v;
                        return Ok(report);
                    }
                }
            }
            Strategy::FullTheta { cap } => {
                let mut stream = enumerate_theta(&inp)?;
                report.notes.push(format!("|Theta| = {}", stream.total()));
                for (seen, t) in stream.by_ref().enumerate() {
                    if seen == cap {
                        conclusive = false;
                        report.notes.push(format!("stopped after {cap} indices"));
                        break;
                    }
                    let label = format!("t{seen}");
                    let (status, verdict, lemma, n) = self.process(sys, &inp, &t, cfg)?;
                    report.oracle_solutions += n;
                    report.lemma_failures.extend(lemma);
                    conclusive &= !matches!(status, ThetaStatus::OracleExhausted { complete: false });
                    // Only indices reaching the oracle are worth listing.
                    if !matches!(status, ThetaStatus::WNoSolution(_)) {
                        report.outcomes.push(ThetaOutcome { label, status });
                    }
                    if let Some(v) = verdict {
                        report.verdict = v;
                        return Ok(report);
                    }
                }
            }
        }
        if conclusive {
            report.verdict = Verdict::Unsolvable;
        }
        Ok(report)
    }
}

/// Runs the reduction on given base solutions without automata: each
/// solution gives the tripod witness with every `p` empty, whose index is
/// evaluated directly in the extension (see [`theta_direct`]). `W_t` is
/// then built and solved as usual and any solution is lifted and verified.
/// Conclusive only for `Solved`.
pub fn solve_direct(
    ext: &CentralExtension,
    ctx: &VGroupContext,
    sys: &EquationSystem,
    base: &[Vec<Word>],
) -> Result<SolveReport> {
    let tri = triangularize(ext, sys)?;
    let frame = Frame { tri: &tri, ctx, ext };
    let mut report = SolveReport {
        verdict: Verdict::NoSolutionWithinBounds,
        outcomes: Vec::new(),
        lemma_failures: Vec::new(),
        oracle_solutions: 0,
        notes: vec!["index evaluated in the extension; no automata".into()],
    };
    for values in base {
        let label = base_label(ext, &tri, values);
        let original_holds = sys.equations.iter().all(|eq| {
            let w = eq.iter().fold(Word::empty(), |acc, &t| acc.concat(&base_term(ext, sys, t, values)));
            ext.base.is_trivial(&w)
        });
        if !original_holds {
            report.outcomes.push(ThetaOutcome { label, status: ThetaStatus::InvalidIndex("not a base solution".into()) });
            continue;
        }
        let mul = |u: &Word, v: &Word| ext.nf(&u.concat(v));
        let inv = |u: &Word| ext.nf(&u.inverse());
        let all = tri.extend(values, |c| tri.constants[c].1.g.clone(), mul, inv);
        let witness = witness_from_base_solution(frame, None, &all)?;
        let t = theta_direct(frame, &witness);
        let wt = build_wt(&t, frame)?;
        let (wsol, constants) = match (wt.solve(), &wt) {
            (WOutcome::NoSolution(r), _) => {
                report.outcomes.push(ThetaOutcome { label, status: ThetaStatus::WNoSolution(r) });
                continue;
            }
            (WOutcome::Solved(x), WSystem::Linear { constants, .. }) => (x, constants.clone()),
            (WOutcome::Solved(_), WSystem::NoSolution { .. }) => unreachable!("a marked system has no solution"),
        };
        let vsol = VSolution { p: witness.p.clone(), v: witness.v.clone() };
        report.lemma_failures.extend(check_lemma_items(&t, frame, &vsol.p, &vsol.v));
        let lift = lift_solution(&t, &tri, &vsol, &wsol, &constants, ctx, ext)?;
        let (assignment, certificate) = make_certificate(ext, sys, &tri, ctx, &t, &vsol, lift, BTreeMap::new())?;
        report.outcomes.push(ThetaOutcome { label, status: ThetaStatus::Solved });
        report.verdict = Verdict::Solved { assignment, certificate: Box::new(certificate) };
        break;
    }
    Ok(report)
}

/// All elements of the base group when it is finite, otherwise the ball of
/// the given radius. The flag says whether the list is the whole group.
pub fn group_elements(ext: &CentralExtension, radius: usize) -> Result<(Vec<Word>, bool)> {
    let g = &ext.base;
    let r = g.order().map_or(radius, |n| n);
    let ball = CayleyBall::build(g, r, 1_000_000)?;
    Ok((ball.elements, ball.closed || g.is_finite()))
}

/// Value of a term in the base group.
fn base_term(ext: &CentralExtension, sys: &EquationSystem, t: Term, values: &[Word]) -> Word {
    let (g, inverse) = match t {
        Term::Var { index, inverse } => (values[index].clone(), inverse),
        Term::Const { index, inverse } => (sys.constants[index].1.g.clone(), inverse),
    };
    if inverse {
        ext.nf(&g.inverse())
    } else {
        g
    }
}

/// Solutions of the projected system over the base group, by backtracking
/// over group elements (the ball of radius `radius` if the group is
/// infinite). The flag says whether the list is complete.
pub fn base_solutions(
    ext: &CentralExtension,
    sys: &EquationSystem,
    radius: usize,
    max: usize,
) -> Result<(Vec<Vec<Word>>, bool)> {
    let (elements, whole) = group_elements(ext, radius)?;
    let n = sys.variables.len();
    // Equations become checkable once their last variable is assigned.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, eq) in sys.equations.iter().enumerate() {
        let last = eq.iter().filter_map(|t| match t {
            Term::Var { index, .. } => Some(index + 1),
            Term::Const { .. } => None,
        });
        ready[last.max().unwrap_or(0)].push(i);
    }
    let holds = |values: &[Word], i: usize| {
        let w = sys.equations[i].iter().fold(Word::empty(), |acc, &t| acc.concat(&base_term(ext, sys, t, values)));
        ext.base.is_trivial(&w)
    };
    if !ready[0].iter().all(|&i| holds(&[], i)) {
        return Ok((Vec::new(), whole));
    }
    let mut out = Vec::new();
    let mut values: Vec<Word> = Vec::new();
    let mut truncated = false;
    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        n: usize,
        elements: &[Word],
        ready: &[Vec<usize>],
        values: &mut Vec<Word>,
        out: &mut Vec<Vec<Word>>,
        max: usize,
        truncated: &mut bool,
        holds: &dyn Fn(&[Word], usize) -> bool,
    ) {
        if *truncated {
            return;
        }
        if k == n {
            if out.len() == max {
                *truncated = true;
                return;
            }
            out.push(values.clone());
            return;
        }
        for g in elements {
            values.push(g.clone());
            if ready[k + 1].iter().all(|&i| holds(values, i)) {
                go(k + 1, n, elements, ready, values, out, max, truncated, holds);
            }
            values.pop();
        }
    }
    go(0, n, &elements, &ready, &mut values, &mut out, max, &mut truncated, &holds);
    Ok((out, whole && !truncated))
}

/// First solution in `E` by trying every element, for finite `E`.
pub fn exhaustive_solve(ext: &CentralExtension, sys: &EquationSystem) -> Result<Option<Vec<ExtElement>>> {
    let (base, whole) = group_elements(ext, 0)?;
    let kernel = ext
        .kernel
        .elements(1 << 20)
        .ok_or_else(|| ReductionError::NotFiniteComplete("a finite kernel".into()))?;
    if !whole {
        return Err(ReductionError::NotFiniteComplete("a finite base group".into()));
    }
    let elements: Vec<ExtElement> = base
        .iter()
        .flat_map(|g| kernel.iter().map(move |a| ExtElement { coords: Coords::Rho, g: g.clone(), a: a.clone() }))
        .collect();
    let n = sys.variables.len();
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, eq) in sys.equations.iter().enumerate() {
        let last = eq.iter().filter_map(|t| match t {
            Term::Var { index, .. } => Some(index + 1),
            Term::Const { .. } => None,
        });
        ready[last.max().unwrap_or(0)].push(i);
    }
    let holds = |values: &[ExtElement], i: usize| -> Result<bool> {
        let sub = EquationSystem {
            variables: sys.variables[..values.len()].to_vec(),
            constants: sys.constants.clone(),
            equations: vec![sys.equations[i].clone()],
        };
        sub.is_solved_by(ext, values)
    };
    for &i in &ready[0] {
        if !holds(&[], i)? {
            return Ok(None);
        }
    }
    let mut stack: Vec<usize> = Vec::new();
    let mut values: Vec<ExtElement> = Vec::new();
    let mut next = 0usize;
    loop {
        if values.len() == n {
            return Ok(Some(values));
        }
        if next < elements.len() {
            values.push(elements[next].clone());
            let ok = ready[values.len()].iter().map(|&i| holds(&values, i)).collect::<Result<Vec<_>>>()?;
            if ok.into_iter().all(|b| b) {
                stack.push(next);
                next = 0;
            } else {
                values.pop();
                next += 1;
            }
        } else {
            match stack.pop() {
                Some(prev) => {
                    values.pop();
                    next = prev + 1;
                }
                None => return Ok(None),
            }
        }
    }
}

/// `x=cd y=1` for a base solution.
fn base_label(ext: &CentralExtension, tri: &TriangularSystem, values: &[Word]) -> String {
    let al = &ext.base.presentation.alphabet;
    tri.variables[..tri.n_original]
        .iter()
        .zip(values)
        .map(|(n, g)| if g.is_empty() { format!("{n}=1") } else { format!("{n}={}", al.render(g)) })
        .collect::<Vec<_>>()
        .join(" ")
}
