use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{check_small_cancellation, free_reduce, CayleyBall, CosetTable, DehnEngine, Letter, Presentation, Word, WordsError};
use crate::abelian::smith_normal_form;

/// Which word-problem engine to use for a presentation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordProblem {
    #[default]
    /// Free group if there are no relators, Dehn's algorithm if the
    /// small-cancellation check passes, coset enumeration otherwise.
    Auto,
    Free,
    /// Dehn's algorithm without the small-cancellation gate.
    Dehn,
    Coset,
}

/// The word-problem engine chosen for a group; there is one per group.
#[allow(clippy::large_enum_variant)]
pub enum Engine {
    Free,
    Dehn(DehnEngine, DiffBall),
    Coset(CosetTable),
}

/// Default radius of the word-difference ball used for Dehn normal forms.
pub const DEFAULT_DIFF_RADIUS: usize = 4;
/// Default bound on cosets (and ball elements) during engine set-up.
pub const DEFAULT_ENGINE_CAP: usize = 200_000;

/// Ball of radius `K + 1` with left and right multiplication tables; the
/// word differences allowed in the normal-form search are those at distance
/// at most `K`.
pub struct DiffBall {
    k: usize,
    ball: CayleyBall,
    lmul: Vec<Vec<Option<usize>>>,
    letter_elem: Vec<usize>,
}

/// A group given by a presentation together with a word-problem engine and
/// shortlex normal forms.
pub struct Group {
    pub presentation: Presentation,
    pub engine: Engine,
    abelian: (Vec<Vec<i64>>, Vec<i64>),
    cache: Mutex<HashMap<(Word, Letter), Word>>,
}

impl Group {
    pub fn new(p: Presentation, wp: WordProblem) -> Result<Self, WordsError> {
        Self::with_options(p, wp, DEFAULT_DIFF_RADIUS, DEFAULT_ENGINE_CAP)
    }

    pub fn with_options(p: Presentation, wp: WordProblem, diff_radius: usize, cap: usize) -> Result<Self, WordsError> {
        let abelian = abelianization(&p);
        let wp = if wp == WordProblem::Auto { p.word_problem } else { wp };
        let choice = match wp {
            WordProblem::Auto if p.relators.is_empty() => WordProblem::Free,
            WordProblem::Auto => {
                let frac = p.sc_fraction.clone().unwrap_or_else(|| BigRational::new(BigInt::from(1), BigInt::from(6)));
                if check_small_cancellation(&p, &frac).pass {
                    WordProblem::Dehn
                } else {
                    match CosetTable::enumerate(&p, cap) {
                        Ok(_) => WordProblem::Coset,
                        Err(_) => return Err(WordsError::NotSmallCancellation(frac.to_string())),
                    }
                }
            }
            other => other,
        };
        let mut group = Group {
            engine: Engine::Free,
            abelian,
            cache: Mutex::new(HashMap::new()),
            presentation: p,
        };
        group.engine = match choice {
            WordProblem::Free => {
                if !group.presentation.relators.is_empty() {
                    return Err(WordsError::ResourceBound("free engine requested for a presentation with relators".into()));
                }
                Engine::Free
            }
            WordProblem::Coset => Engine::Coset(CosetTable::enumerate(&group.presentation, cap)?),
            _ => {
                let dehn = DehnEngine::new(&group.presentation);
                let diff = build_diff_ball(&group, &dehn, diff_radius, cap)?;
                Engine::Dehn(dehn, diff)
            }
        };
        Ok(group)
    }

    pub fn n_letters(&self) -> usize {
        self.presentation.n_letters()
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.engine, Engine::Coset(_))
    }

    /// Order of the group when the engine is coset enumeration.
    pub fn order(&self) -> Option<usize> {
        match &self.engine {
            Engine::Coset(t) => Some(t.order()),
            _ => None,
        }
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        match &self.engine {
            Engine::Free => free_reduce(w).is_empty(),
            Engine::Dehn(d, _) => d.is_trivial(w),
            Engine::Coset(t) => t.trace(w) == 0,
        }
    }

    pub fn equal(&self, u: &Word, v: &Word) -> bool {
        self.is_trivial(&u.concat(&v.inverse()))
    }

    /// Image of `w` in the abelianization, in Smith coordinates.
    pub fn abelian_invariant(&self, w: &Word) -> Vec<i64> {
        let (v, moduli) = &self.abelian;
        let mut e = vec![0i64; self.presentation.alphabet.rank()];
        for l in w.letters() {
            e[l.generator()] += if l.is_inverse() { -1 } else { 1 };
        }
        (0..moduli.len())
            .map(|j| {
                let y: i64 = (0..e.len()).map(|i| e[i] * v[i][j]).sum();
                if moduli[j] == 0 {
                    y
                } else {
                    y.rem_euclid(moduli[j])
                }
            })
            .collect()
    }

    /// Shortlex normal form of `w`.
    pub fn normal_form(&self, w: &Word) -> Word {
        match &self.engine {
            Engine::Free => free_reduce(w),
            Engine::Coset(t) => t.normal_form(t.trace(w)).clone(),
            Engine::Dehn(_, diff) => {
                let mut cur = Word::empty();
                for &l in w.letters() {
                    cur = self.nf_step(diff, &cur, l);
                }
                cur
            }
        }
    }

    /// Normal form of `g * x` for a word `g` already in normal form.
    pub fn normal_form_times(&self, g: &Word, x: Letter) -> Word {
        match &self.engine {
            Engine::Dehn(_, diff) => self.nf_step(diff, g, x),
            _ => self.normal_form(&g.with(x)),
        }
    }

    fn nf_step(&self, diff: &DiffBall, u: &Word, x: Letter) -> Word {
        if u.0.last() == Some(&x.inverse()) {
            return Word(u.0[..u.len() - 1].to_vec());
        }
        let key = (u.clone(), x);
        if let Some(v) = self.cache.lock().expect("normal form cache poisoned").get(&key) {
            return v.clone();
        }
        let v = diff
            .multiply(u, x)
            .unwrap_or_else(|| panic!("word-difference radius {} too small for this normal form", diff.k));
        self.cache.lock().expect("normal form cache poisoned").insert(key, v.clone());
        v
    }
}

impl DiffBall {
    /// Shortlex-least word `v` equal to `u x` that synchronously fellow
    /// travels `u` with differences inside the ball of radius `k`.
    fn multiply(&self, u: &Word, x: Letter) -> Option<Word> {
        let n = u.len();
        let target = self.letter_elem[x.index()];
        let n_letters = self.lmul[0].len();
        let allowed = |d: usize| self.ball.distances[d] <= self.k;
        // Difference after reading one more letter of u (if any) and z (if any).
        let step = |d: usize, t: usize, z: Option<usize>| -> Option<usize> {
            let mut e = d;
            if t < n {
                e = self.lmul[e][u.0[t].inverse().index()]?;
            }
            if let Some(z) = z {
                e = self.ball.edges[e][z]?;
            }
            if allowed(e) {
                Some(e)
            } else {
                None
            }
        };
        let all_z: Vec<Option<usize>> = (0..n_letters).map(Some).collect();
        let successors = |d: usize, t: usize, m: usize| {
            let zs: &[Option<usize>] = if t < m { &all_z } else { &[None] };
            zs.iter().filter_map(move |&z| step(d, t, z).map(|e| (z, e)))
        };
        let advance = |layer: &[usize], t: usize, m: usize| {
            let mut next: Vec<usize> = layer.iter().flat_map(|&d| successors(d, t, m)).map(|(_, e)| e).collect();
            next.sort_unstable();
            next.dedup();
            next
        };
        // Every candidate length is at least n - 1, so the layers before
        // that are shared.
        let shared = n.saturating_sub(1);
        let mut prefix: Vec<Vec<usize>> = vec![vec![0]];
        for t in 0..shared {
            let next = advance(&prefix[t], t, n + 1);
            prefix.push(next);
        }
        for m in [shared, n, n + 1] {
            let t_max = n.max(m);
            // Forward layers of reachable differences, then prune backwards to
            // those from which the target is still reachable.
            let mut layers = prefix.clone();
            for t in shared..t_max {
                let next = advance(&layers[t], t, m);
                layers.push(next);
            }
            if layers[t_max].binary_search(&target).is_err() {
                continue;
            }
            let mut live: Vec<Vec<usize>> = vec![Vec::new(); t_max + 1];
            live[t_max] = vec![target];
            for t in (0..t_max).rev() {
                live[t] = layers[t]
                    .iter()
                    .copied()
                    .filter(|&d| successors(d, t, m).any(|(_, e)| live[t + 1].binary_search(&e).is_ok()))
                    .collect();
            }
            let mut v = Vec::with_capacity(m);
            let mut d = 0usize;
            for t in 0..t_max {
                let (z, e) = successors(d, t, m).find(|(_, e)| live[t + 1].binary_search(e).is_ok())?;
                if let Some(z) = z {
                    v.push(Letter(z as u8));
                }
                d = e;
            }
            return Some(Word(v));
        }
        None
    }
}

fn build_diff_ball(group: &Group, dehn: &DehnEngine, k: usize, cap: usize) -> Result<DiffBall, WordsError> {
    let n_letters = group.n_letters();
    let ball = CayleyBall::build_by_equality(
        n_letters,
        k + 1,
        cap,
        false,
        |w| dehn.is_trivial(w),
        |w| group.abelian_invariant(w),
    )?;
    let letter_elem: Vec<usize> = (0..n_letters)
        .map(|x| ball.edges[0][x].expect("letters lie in the unit ball"))
        .collect();
    // y * g by walking g from y: every proper prefix of y g has length at most
    // |g| <= k + 1, so the walk only leaves the ball at its last step.
    let lmul = (0..ball.len())
        .map(|i| (0..n_letters).map(|y| ball.walk_from(letter_elem[y], &ball.elements[i].0)).collect())
        .collect();
    Ok(DiffBall { k, ball, lmul, letter_elem })
}

/// Smith data of the relator exponent matrix: the column transform and the
/// moduli of the abelianization coordinates (0 for free coordinates).
fn abelianization(p: &Presentation) -> (Vec<Vec<i64>>, Vec<i64>) {
    let rank = p.alphabet.rank();
    let rows = p.exponent_matrix();
    if rows.is_empty() || rank == 0 {
        let id = (0..rank).map(|i| (0..rank).map(|j| i64::from(i == j)).collect()).collect();
        return (id, vec![0; rank]);
    }
    let m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let snf = smith_normal_form(&m);
    let v = snf
        .v
        .iter()
        .map(|r| r.iter().map(|x| x.to_i64().expect("small transform")).collect())
        .collect();
    let moduli = (0..rank)
        .map(|j| {
            if j < snf.d.len() && !snf.d[j][j].is_zero() {
                snf.d[j][j].to_i64().expect("small modulus")
            } else {
                0
            }
        })
        .collect();
    (v, moduli)
}
