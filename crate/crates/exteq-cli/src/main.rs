use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use exteq::abelian::{FgaElement, FgaGroup};
use exteq::automata::Fsa;
use exteq::extension::CentralExtension;
use exteq::fpa_ppa::{build_fpa, build_lfpa, build_ppa, build_rfpa};
use exteq::invariants::{self, Cocycle, InvariantReport};
use exteq::io::{self, AutomatonFile, EquationsFile, ExtensionFile, FpaArtifact, PpaArtifact, FORMAT_VERSION};
use exteq::lrational::{build_l_automaton, build_predictor_family, FamilyKind, SynthesisConfig};
use exteq::reduction::{
    enumerate_theta, project_to_base, solve_direct, triangularize, verify_certificate, Certificate, EquationSystem,
    Mode, Pipeline, PipelineConfig, SolveConfig, SolveReport, Strategy, ThetaStatus, VGroupContext, Verdict,
};
use exteq::words::{check_small_cancellation, CayleyBall, Engine, Group, Presentation, Word, WordProblem};

const EXIT_NO_SOLUTION: u8 = 1;
const EXIT_UNSOLVABLE: u8 = 2;
const EXIT_ERROR: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "exteq", version, about = "Equation systems over central extensions of hyperbolic groups")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Bound on automaton states during synthesis and products.
    #[arg(long, global = true, env = "EXTEQ_CAP_STATES", default_value_t = 20_000)]
    cap_states: usize,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct Radii {
    /// Suffix depth used to tell learned states apart.
    #[arg(long, default_value_t = 2)]
    learn: usize,
    /// Every word up to this length is checked against the oracle.
    #[arg(long, default_value_t = 8)]
    validate: usize,
}

impl Radii {
    fn config(&self, cap: usize) -> SynthesisConfig {
        SynthesisConfig { cap_states: cap, ..SynthesisConfig::new(self.learn, self.validate) }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sound,
    FiniteComplete,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    QLeft,
    RhoLeft,
    RhoRightReversed,
}

#[derive(Subcommand)]
enum Command {
    /// Word-problem engine, small cancellation and finiteness of the base.
    CheckPresentation { extension: PathBuf },
    /// Sizes of the spheres of the Cayley ball.
    Ball {
        extension: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// Print the elements as well.
        #[arg(long)]
        list: bool,
    },
    /// `sigma_rho(g, x)` and `sigma_q(g, x)` for `g` in a ball and generators `x`.
    CocycleTable {
        extension: PathBuf,
        #[arg(long, default_value_t = 1)]
        radius: usize,
    },
    /// Learns and validates the quasi-geodesic language `L`.
    BuildAutomata {
        extension: PathBuf,
        #[command(flatten)]
        radii: Radii,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long, default_value = "0")]
        nu: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Builds a future predicting automaton from `L`.
    BuildFpa {
        extension: PathBuf,
        /// Automaton file for `L`.
        #[arg(long)]
        l: PathBuf,
        #[arg(long, value_enum, default_value = "q-left")]
        kind: KindArg,
        #[command(flatten)]
        radii: Radii,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Builds the parity predicting automaton from `L`.
    BuildPpa {
        extension: PathBuf,
        #[arg(long)]
        l: PathBuf,
        #[command(flatten)]
        radii: Radii,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cocycle condition, symmetric section, sigma_q identity and parity
    /// lemma on a ball.
    VerifyInvariants {
        extension: PathBuf,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Extra random triples drawn from the ball of radius `radius + 2`.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Triangular system, its projection to the base and the size of Θ.
    Reduce {
        extension: PathBuf,
        equations: PathBuf,
        #[arg(long, default_value_t = 2)]
        kappa2: usize,
        /// Also build the automata and count Θ.
        #[arg(long)]
        theta: bool,
        #[command(flatten)]
        radii: Radii,
    },
    /// Decides an equation system within bounds.
    Solve(SolveArgs),
    /// Checks a certificate against its input files.
    Lift {
        /// Replay the certificate (the only supported action).
        #[arg(long, required = true)]
        verify: bool,
        certificate: PathBuf,
        extension: PathBuf,
        equations: PathBuf,
    },
    /// The unit tangent bundle example and its solvable sibling.
    DemoT1s,
}

#[derive(Args)]
struct SolveArgs {
    extension: PathBuf,
    equations: PathBuf,
    #[arg(long, default_value_t = 4)]
    kappa2: usize,
    /// Longest `p` word the oracle tries.
    #[arg(long, default_value_t = 2)]
    oracle_bound: usize,
    #[arg(long, value_enum, default_value = "sound")]
    mode: ModeArg,
    /// Radius searched for base solutions over an infinite base.
    #[arg(long, default_value_t = 2)]
    base_radius: usize,
    /// A base solution to use, e.g. `x=cd,y=a`; repeatable.
    #[arg(long)]
    hint: Vec<String>,
    /// Evaluate indices in the extension instead of building automata;
    /// needs hints.
    #[arg(long)]
    direct: bool,
    /// Stream the whole of Θ, stopping after this many indices.
    #[arg(long)]
    full_theta: Option<usize>,
    #[arg(long)]
    parallel: bool,
    /// Automaton file for `L`; learned from the extension otherwise.
    #[arg(long)]
    l: Option<PathBuf>,
    #[command(flatten)]
    radii: Radii,
    /// Where to write the certificate of a solution.
    #[arg(long)]
    certificate: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn load_extension(path: &Path) -> Result<CentralExtension> {
    let f: ExtensionFile = io::read(path)?;
    Ok(f.build(&path.display().to_string())?)
}

fn load_system(ext: &CentralExtension, path: &Path) -> Result<EquationSystem> {
    let f: EquationsFile = io::read(path)?;
    Ok(f.build(ext, &path.display().to_string())?)
}

fn load_l(path: &Path) -> Result<Fsa> {
    let f: AutomatonFile = io::read(path)?;
    let (m, completed) = f.build(&path.display().to_string())?;
    if completed {
        eprintln!("note: {} has a partial transition table; completed with a sink state", path.display());
    }
    Ok(m)
}

fn symbols(ext: &CentralExtension) -> Vec<char> {
    Fsa::symbols_of(&ext.base.presentation.alphabet)
}

fn learn_l(ext: &CentralExtension, radii: &Radii, cap: usize) -> Result<Fsa> {
    let one = BigRational::from_integer(1.into());
    let zero = BigRational::from_integer(0.into());
    let (l, report) = build_l_automaton(&ext.base, &symbols(ext), &one, &zero, &radii.config(cap))?;
    eprintln!("L: {} states, validation {report}", l.n_states());
    if !report.pass {
        bail!("the learned language fails validation: {report}");
    }
    Ok(l)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = cli.global;
    match cli.command {
        Command::CheckPresentation { extension } => {
            let ext = load_extension(&extension)?;
            check_presentation(&ext, g.json)
        }
        Command::Ball { extension, radius, list } => {
            let ext = load_extension(&extension)?;
            let ball = CayleyBall::build(&ext.base, radius, 5_000_000)?;
            let mut spheres = vec![0usize; radius + 1];
            for &d in &ball.distances {
                spheres[d] += 1;
            }
            let al = &ext.base.presentation.alphabet;
            if g.json {
                let mut v = json!({ "radius": radius, "size": ball.len(), "spheres": spheres, "closed": ball.closed });
                if list {
                    v["elements"] = json!(ball.elements.iter().map(|w| al.render(w)).collect::<Vec<_>>());
                }
                println!("{v}");
            } else {
                println!("ball of radius {radius}: {} elements", ball.len());
                for (r, n) in spheres.iter().enumerate() {
                    println!("  sphere {r}: {n}");
                }
                if ball.closed {
                    println!("  the ball is the whole group");
                }
                if list {
                    for w in &ball.elements {
                        println!("  {}", if w.is_empty() { "1".into() } else { al.render(w) });
                    }
                }
            }
            Ok(0)
        }
        Command::CocycleTable { extension, radius } => {
            let ext = load_extension(&extension)?;
            let ball = CayleyBall::build(&ext.base, radius, 5_000_000)?;
            let al = &ext.base.presentation.alphabet;
            let mut rows = Vec::new();
            for gw in &ball.elements {
                for x in 0..ext.base.n_letters() {
                    let xw = Word::letter(exteq::words::Letter(x as u8));
                    rows.push((al.render(gw), al.render(&xw), ext.sigma_rho(gw, &xw), ext.sigma_q(gw, &xw)));
                }
            }
            if g.json {
                let v: Vec<_> =
                    rows.iter().map(|(g, x, r, q)| json!({ "g": g, "x": x, "sigma_rho": r, "sigma_q": q })).collect();
                println!("{}", json!(v));
            } else {
                println!("{:<12} {:<3} {:<12} sigma_q", "g", "x", "sigma_rho");
                for (gw, x, r, q) in rows {
                    let gw = if gw.is_empty() { "1".into() } else { gw };
                    println!("{gw:<12} {x:<3} {:<12} {q}", r.to_string());
                }
            }
            Ok(0)
        }
        Command::BuildAutomata { extension, radii, lambda, nu, output } => {
            let ext = load_extension(&extension)?;
            let lambda = BigRational::from_str(&lambda).map_err(|e| anyhow::anyhow!("--lambda: {e}"))?;
            let nu = BigRational::from_str(&nu).map_err(|e| anyhow::anyhow!("--nu: {e}"))?;
            let (l, report) = build_l_automaton(&ext.base, &symbols(&ext), &lambda, &nu, &radii.config(g.cap_states))?;
            eprintln!("L: {} states, validation {report}", l.n_states());
            emit(output.as_deref(), &io::to_json(&AutomatonFile::of(&l)))?;
            Ok(if report.pass { 0 } else { EXIT_ERROR })
        }
        Command::BuildFpa { extension, l, kind, radii, output } => {
            let ext = load_extension(&extension)?;
            let l = load_l(&l)?;
            let kind = match kind {
                KindArg::QLeft => FamilyKind::QLeft,
                KindArg::RhoLeft => FamilyKind::RhoLeft,
                KindArg::RhoRightReversed => FamilyKind::RhoRightReversed,
            };
            let fam = build_predictor_family(&ext, kind, &l, &radii.config(g.cap_states))?;
            let fpa = match kind {
                FamilyKind::QLeft => build_fpa(&fam, g.cap_states)?,
                FamilyKind::RhoLeft => build_lfpa(&fam, g.cap_states)?,
                FamilyKind::RhoRightReversed => build_rfpa(&fam, g.cap_states)?,
            };
            eprintln!("{kind:?}: {} states, {} accepting", fpa.n_states(), fpa.accepting().count());
            emit(output.as_deref(), &io::to_json(&FpaArtifact { format_version: FORMAT_VERSION, fpa }))?;
            Ok(0)
        }
        Command::BuildPpa { extension, l, radii, output } => {
            let ext = load_extension(&extension)?;
            let l = load_l(&l)?;
            let cfg = radii.config(g.cap_states);
            let left = build_lfpa(&build_predictor_family(&ext, FamilyKind::RhoLeft, &l, &cfg)?, g.cap_states)?;
            let right =
                build_rfpa(&build_predictor_family(&ext, FamilyKind::RhoRightReversed, &l, &cfg)?, g.cap_states)?;
            let ppa = build_ppa(&left, &right, &ext, g.cap_states)?;
            eprintln!("PPA: {} states, parity values {:?}", ppa.n_states(), ppa.branch_values());
            emit(output.as_deref(), &io::to_json(&PpaArtifact { format_version: FORMAT_VERSION, ppa }))?;
            Ok(0)
        }
        Command::VerifyInvariants { extension, radius, samples } => {
            let ext = load_extension(&extension)?;
            let reports = verify_invariants(&ext, radius, samples, g.seed)?;
            let pass = reports.iter().all(InvariantReport::pass);
            if g.json {
                println!("{}", json!({ "pass": pass, "reports": reports }));
            } else {
                for r in &reports {
                    println!("{r}");
                }
            }
            Ok(if pass { 0 } else { EXIT_ERROR })
        }
        Command::Reduce { extension, equations, kappa2, theta, radii } => {
            let ext = load_extension(&extension)?;
            let sys = load_system(&ext, &equations)?;
            reduce(&ext, &sys, kappa2, theta.then_some(&radii), g.cap_states, g.json)
        }
        Command::Solve(args) => solve(args, g.cap_states, g.json),
        Command::Lift { verify: _, certificate, extension, equations } => {
            let ext = load_extension(&extension)?;
            let sys = load_system(&ext, &equations)?;
            let cert: Certificate = io::read(&certificate)?;
            verify_certificate(&cert, &ext, &sys)?;
            if g.json {
                println!("{}", json!({ "verified": true, "assignment": cert.assignment }));
            } else {
                println!("certificate verified");
                for (n, gw, a) in &cert.assignment {
                    println!("  {n} = ({}, {a})", if gw.is_empty() { "1" } else { gw });
                }
            }
            Ok(0)
        }
        Command::DemoT1s => demo_t1s(g.json),
    }
}

fn check_presentation(ext: &CentralExtension, as_json: bool) -> Result<u8> {
    let p = &ext.base.presentation;
    let engine = match ext.base.engine {
        Engine::Free => "free",
        Engine::Dehn(..) => "dehn",
        Engine::Coset(_) => "coset",
    };
    let fraction = p.sc_fraction.clone().unwrap_or_else(|| BigRational::new(1.into(), 6.into()));
    let sc = check_small_cancellation(p, &fraction);
    let order = ext.base.order();
    if as_json {
        println!(
            "{}",
            json!({
                "generators": p.alphabet.generators().iter().collect::<String>(),
                "relators": p.relators.iter().map(|r| p.alphabet.render(r)).collect::<Vec<_>>(),
                "engine": engine,
                "small_cancellation": sc,
                "order": order,
                "kernel": ext.kernel.describe(),
            })
        );
    } else {
        println!("generators: {}", p.alphabet.generators().iter().collect::<String>());
        for r in &p.relators {
            println!("relator: {}", p.alphabet.render(r));
        }
        println!("word problem: {engine}");
        let verdict = if sc.pass { "holds" } else { "fails" };
        println!("C'({}) {verdict}, longest piece {}", sc.fraction, sc.longest_piece);
        match order {
            Some(n) => println!("base group is finite of order {n}"),
            None => println!("base group is not known to be finite"),
        }
        println!("kernel: {}", ext.kernel.describe());
    }
    Ok(0)
}

fn verify_invariants(ext: &CentralExtension, radius: usize, samples: usize, seed: u64) -> Result<Vec<InvariantReport>> {
    let ball = CayleyBall::build(&ext.base, radius, 5_000_000)?.elements;
    let ball = &ball;
    let triples: Vec<(&Word, &Word, &Word)> =
        ball.iter().flat_map(|a| ball.iter().flat_map(move |b| ball.iter().map(move |c| (a, b, c)))).collect();
    let mut reports = vec![
        invariants::cocycle_condition(ext, Cocycle::Rho, triples.iter().copied()),
        invariants::cocycle_condition(ext, Cocycle::Q, triples.iter().copied()),
        invariants::symmetric_section(ext, ball),
        invariants::sigma_q_identity(ext, ball),
        invariants::parity_lemma(&ext.kernel, &invariants::kernel_box(&ext.kernel, radius as i64)),
    ];
    if samples > 0 {
        let wide = CayleyBall::build(&ext.base, radius + 2, 5_000_000)?.elements;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pick = || wide[rng.gen_range(0..wide.len())].clone();
        let sampled: Vec<(Word, Word, Word)> = (0..samples).map(|_| (pick(), pick(), pick())).collect();
        for which in [Cocycle::Rho, Cocycle::Q] {
            let mut r = invariants::cocycle_condition(ext, which, sampled.iter().map(|(a, b, c)| (a, b, c)));
            r.name.push_str(" (sampled)");
            reports.push(r);
        }
    }
    Ok(reports)
}

fn reduce(
    ext: &CentralExtension,
    sys: &EquationSystem,
    kappa2: usize,
    theta: Option<&Radii>,
    cap: usize,
    as_json: bool,
) -> Result<u8> {
    let tri = triangularize(ext, sys)?;
    let base = project_to_base(&tri);
    let al = &ext.base.presentation.alphabet;
    let rows: Vec<String> = tri.rows.iter().map(|r| tri.render_row(r)).collect();
    let constants: Vec<(String, String)> =
        base.constants.iter().map(|(n, g)| (n.clone(), if g.is_empty() { "1".into() } else { al.render(g) })).collect();
    let theta_size = match theta {
        Some(radii) => {
            let l = learn_l(ext, radii, cap)?;
            let cfg = PipelineConfig { synthesis: radii.config(cap), kappa2, cap_states: cap };
            let p = Pipeline::build(ext, l, &cfg)?;
            let n = enumerate_theta(&p.inputs(&tri, 4096))?.total();
            Some(if n == u128::MAX { "more than 2^128".to_string() } else { n.to_string() })
        }
        None => None,
    };
    if as_json {
        println!(
            "{}",
            json!({
                "variables": tri.variables,
                "rows": rows,
                "base_constants": constants,
                "theta": theta_size,
            })
        );
    } else {
        println!("variables: {}", tri.variables.join(" "));
        println!("triangular rows:");
        for r in &rows {
            println!("  {r} = 1");
        }
        println!("constants in the base:");
        for (n, g) in &constants {
            println!("  {n} -> {g}");
        }
        if let Some(n) = theta_size {
            println!("|Theta|: {n} (kappa2 = {kappa2})");
        }
    }
    Ok(0)
}

/// Parses `x=cd,y=a` into one base word per original variable.
fn parse_hint(ext: &CentralExtension, sys: &EquationSystem, hint: &str) -> Result<Vec<Word>> {
    let mut values = vec![None; sys.variables.len()];
    for part in hint.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, word) = part.split_once('=').with_context(|| format!("hint {part:?} is not name=word"))?;
        let i = sys.variables.iter().position(|v| v == name.trim()).with_context(|| format!("unknown variable {name}"))?;
        let w = ext.base.presentation.alphabet.parse(word.trim().trim_start_matches('1'))?;
        values[i] = Some(ext.nf(&w));
    }
    values
        .into_iter()
        .zip(&sys.variables)
        .map(|(v, n)| v.with_context(|| format!("hint {hint:?} gives no value for {n}")))
        .collect()
}

fn solve(a: SolveArgs, cap: usize, as_json: bool) -> Result<u8> {
    let ext = load_extension(&a.extension)?;
    let sys = load_system(&ext, &a.equations)?;
    let hints = a.hint.iter().map(|h| parse_hint(&ext, &sys, h)).collect::<Result<Vec<_>>>()?;
    let report = if a.direct {
        if hints.is_empty() {
            bail!("--direct needs at least one --hint");
        }
        let ctx = VGroupContext::identity(&ext, a.kappa2);
        solve_direct(&ext, &ctx, &sys, &hints)?
    } else {
        let l = match &a.l {
            Some(p) => load_l(p)?,
            None => learn_l(&ext, &a.radii, cap)?,
        };
        let cfg = PipelineConfig { synthesis: a.radii.config(cap), kappa2: a.kappa2, cap_states: cap };
        let p = Pipeline::build(&ext, l, &cfg)?;
        let solve_cfg = SolveConfig {
            mode: match a.mode {
                ModeArg::Sound => Mode::Sound,
                ModeArg::FiniteComplete => Mode::FiniteComplete,
            },
            strategy: a.full_theta.map_or(Strategy::BaseSolutions, |cap| Strategy::FullTheta { cap }),
            oracle_bound: a.oracle_bound,
            base_radius: a.base_radius,
            hints: (!hints.is_empty()).then_some(hints),
            parallel: a.parallel,
            ..SolveConfig::default()
        };
        p.solve(&sys, &solve_cfg)?
    };
    if let (Verdict::Solved { certificate, .. }, Some(path)) = (&report.verdict, &a.certificate) {
        io::write(path, certificate.as_ref())?;
    }
    print_report(&ext, &sys, &report, as_json);
    Ok(exit_code(&report.verdict))
}

fn exit_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Solved { .. } => 0,
        Verdict::NoSolutionWithinBounds => EXIT_NO_SOLUTION,
        Verdict::Unsolvable => EXIT_UNSOLVABLE,
    }
}

fn print_report(ext: &CentralExtension, sys: &EquationSystem, r: &SolveReport, as_json: bool) {
    if as_json {
        println!("{}", serde_json::to_string(r).expect("reports serialize"));
        return;
    }
    println!("verdict: {}", r.verdict.name());
    if let Verdict::Solved { assignment, .. } = &r.verdict {
        let al = &ext.base.presentation.alphabet;
        for (n, e) in sys.variables.iter().zip(assignment) {
            let g = if e.g.is_empty() { "1".into() } else { al.render(&e.g) };
            println!("  {n} = ({g}, {})", e.a);
        }
    }
    for o in &r.outcomes {
        let status = match &o.status {
            ThetaStatus::ExceedsKappa2 { length } => format!("centre of length {length} exceeds kappa2"),
            ThetaStatus::InvalidIndex(why) => format!("invalid index: {why}"),
            ThetaStatus::WNoSolution(why) => format!("W_t has no solution: {why}"),
            ThetaStatus::OracleExhausted { complete } => {
                format!("V_t: nothing within the bound{}", if *complete { "" } else { " (budget ran out)" })
            }
            ThetaStatus::Solved => "solved".into(),
        };
        println!("  [{}] {status}", o.label);
    }
    for f in &r.lemma_failures {
        println!("  lemma check failed: {f}");
    }
    for n in &r.notes {
        eprintln!("note: {n}");
    }
}

fn demo_t1s(as_json: bool) -> Result<u8> {
    let base = Group::new(Presentation::genus_two(), WordProblem::Auto)?;
    let z = |n: i64| FgaElement { free: vec![n], tors: vec![] };
    let ext = CentralExtension::new(base, FgaGroup::integers(), vec![z(-2)])?;
    let al = &ext.base.presentation.alphabet;
    let power = |n: i64| if n >= 0 { "d".repeat(n as usize) } else { "D".repeat(n.unsigned_abs() as usize) };
    let mut defects = Vec::new();
    for n in -4i64..=4 {
        let w = al.parse(&format!("abAB c{} d {}C D", power(n), power(-n)))?;
        defects.push((n, ext.central_defect(&w)?));
    }
    let gens: Vec<_> = ["a", "b", "c", "d"]
        .iter()
        .map(|g| Ok((g.to_string(), ext.evaluate(&al.parse(g)?))))
        .collect::<Result<_>>()?;
    let family: Vec<Vec<Word>> =
        (-4i64..=4).map(|n| Ok(vec![ext.nf(&al.parse(&format!("c{}", power(n)))?)])).collect::<Result<_>>()?;
    let ctx = VGroupContext::identity(&ext, 64);
    let example = EquationSystem::parse(vec!["x".into()], gens.clone(), &["a b A B x d X D"])?;
    let obstruction = solve_direct(&ext, &ctx, &example, &family)?;
    let mut with_z = gens;
    with_z.push(("z".into(), ext.central(exteq::extension::Coords::Rho, z(1))));
    let sibling = EquationSystem::parse(vec!["x".into()], with_z, &["a b A B x d X D z z"])?;
    let solved = solve_direct(&ext, &ctx, &sibling, &[vec![al.parse("c")?]])?;
    if as_json {
        println!(
            "{}",
            json!({
                "defects": defects.iter().map(|(n, d)| json!({ "n": n, "defect": d })).collect::<Vec<_>>(),
                "example": obstruction,
                "sibling": solved,
            })
        );
    } else {
        println!("E = unit tangent bundle of the genus-2 surface, [a,b][c,d] = z^-2.");
        println!("Central defect of [a,b][c d^n, d]:");
        for (n, d) in &defects {
            println!("  n = {n:>2}: {}", d.free[0]);
        }
        println!();
        println!("Equation [a,b][x,d] = 1. Its projection is solved by x = c d^n in the surface group.");
        println!("For each such base solution the linear system W_t over A has no solution:");
        for o in &obstruction.outcomes {
            if let ThetaStatus::WNoSolution(why) = &o.status {
                println!("  {}: {why}", o.label);
            }
        }
        println!("verdict: {}", obstruction.verdict.name());
        println!();
        println!("The sibling [a,b][x,d] z^2 = 1:");
        println!("verdict: {}", solved.verdict.name());
        if let Verdict::Solved { assignment, certificate } = &solved.verdict {
            verify_certificate(certificate, &ext, &sibling)?;
            println!("  x = ({}, {}), certificate verified", al.render(&assignment[0].g), assignment[0].a);
        }
    }
    Ok(exit_code(&obstruction.verdict))
}
