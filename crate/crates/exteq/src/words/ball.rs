use std::collections::HashMap;

use super::{Group, Letter, Word, WordsError};

enum Lookup {
    Known(usize),
    New(Word),
}

impl Lookup {
    fn from_index(i: Option<usize>, rep: Word) -> Lookup {
        match i {
            Some(i) => Lookup::Known(i),
            None => Lookup::New(rep),
        }
    }
}

/// All elements within a radius of the identity, stored by shortlex normal
/// form, with the right-multiplication edges that stay inside the ball.
#[derive(Clone, Debug)]
pub struct CayleyBall {
    pub radius: usize,
    pub elements: Vec<Word>,
    pub index: HashMap<Word, usize>,
    pub distances: Vec<usize>,
    /// `edges[i][x]` is the element `elements[i] * x`, if it lies in the ball.
    pub edges: Vec<Vec<Option<usize>>>,
    /// Set when a sphere came out empty, i.e. the whole group is in the ball.
    pub closed: bool,
}

impl CayleyBall {
    /// Breadth-first enumeration using the group's normal forms. Elements are
    /// discovered in shortlex order of their normal forms.
    pub fn build(group: &Group, radius: usize, cap: usize) -> Result<Self, WordsError> {
        let mut ball = Self::bfs(group.n_letters(), radius, cap, |ball: &CayleyBall, w: &Word| {
            let nf = group.normal_form(w);
            Lookup::from_index(ball.index.get(&nf).copied(), nf)
        })?;
        let n_letters = group.n_letters();
        let outer: Vec<usize> = ball.sphere(radius).collect();
        for &i in &outer {
            for x in 0..n_letters {
                let nf = group.normal_form(&ball.elements[i].with(Letter(x as u8)));
                ball.edges[i][x] = ball.index.get(&nf).copied();
            }
        }
        if !ball.closed && radius > 0 {
            // An empty sphere just outside also means the ball is the group.
            ball.closed = outer.iter().all(|&i| ball.edges[i].iter().all(Option::is_some));
        }
        Ok(ball)
    }

    /// Breadth-first enumeration where elements are compared only through a
    /// triviality test. Candidates are bucketed by `invariant`, which must be
    /// constant on group elements. Used to bootstrap normal forms.
    ///
    /// With `outer_edges` false, edges leaving the outer sphere are only
    /// filled in where they point back inwards.
    pub fn build_by_equality<K, F, I>(
        n_letters: usize,
        radius: usize,
        cap: usize,
        outer_edges: bool,
        is_trivial: F,
        invariant: I,
    ) -> Result<Self, WordsError>
    where
        K: std::hash::Hash + Eq,
        F: Fn(&Word) -> bool,
        I: Fn(&Word) -> K,
    {
        let buckets: std::cell::RefCell<HashMap<K, Vec<usize>>> = std::cell::RefCell::new(HashMap::new());
        buckets.borrow_mut().entry(invariant(&Word::empty())).or_default().push(0);
        let find = |ball: &CayleyBall, w: &Word| -> Option<usize> {
            buckets.borrow().get(&invariant(w)).and_then(|cands| {
                cands.iter().copied().find(|&c| is_trivial(&w.concat(&ball.elements[c].inverse())))
            })
        };
        let mut ball = Self::bfs(n_letters, radius, cap, |ball: &CayleyBall, w: &Word| match find(ball, w) {
            Some(i) => Lookup::Known(i),
            None => {
                buckets.borrow_mut().entry(invariant(w)).or_default().push(ball.elements.len());
                Lookup::New(w.clone())
            }
        })?;
        let outer: Vec<usize> = ball.sphere(radius).collect();
        for &i in &outer {
            for x in 0..n_letters {
                if ball.edges[i][x].is_none() && outer_edges {
                    ball.edges[i][x] = find(&ball, &ball.elements[i].with(Letter(x as u8)));
                }
            }
        }
        Ok(ball)
    }

    /// Shared breadth-first skeleton: `lookup` decides whether `e x` is a
    /// known element or a new one with the given representative. Edges out
    /// of the outer sphere are left for the caller, except for those that
    /// are reverses of recorded edges.
    fn bfs<L>(n_letters: usize, radius: usize, cap: usize, mut lookup: L) -> Result<Self, WordsError>
    where
        L: FnMut(&CayleyBall, &Word) -> Lookup,
    {
        let mut ball = CayleyBall {
            radius,
            elements: vec![Word::empty()],
            index: HashMap::from([(Word::empty(), 0)]),
            distances: vec![0],
            edges: vec![vec![None; n_letters]],
            closed: false,
        };
        let mut frontier = vec![0usize];
        for dist in 1..=radius {
            let mut next = Vec::new();
            for &i in &frontier {
                for x in 0..n_letters {
                    if ball.edges[i][x].is_some() {
                        continue;
                    }
                    let w = ball.elements[i].with(Letter(x as u8));
                    let j = match lookup(&ball, &w) {
                        Lookup::Known(j) => j,
                        Lookup::New(rep) => {
                            if ball.elements.len() >= cap {
                                return Err(WordsError::ResourceBound(format!("ball exceeded {cap} elements")));
                            }
                            let id = ball.elements.len();
                            ball.index.insert(rep.clone(), id);
                            ball.elements.push(rep);
                            ball.distances.push(dist);
                            ball.edges.push(vec![None; n_letters]);
                            next.push(id);
                            id
                        }
                    };
                    ball.edges[i][x] = Some(j);
                    ball.edges[j][x ^ 1] = Some(i);
                }
            }
            if next.is_empty() {
                ball.closed = true;
                break;
            }
            frontier = next;
        }
        Ok(ball)
    }

    fn sphere(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.distances[i] == r)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Follows `w` from `start` along ball edges; `None` if the path leaves
    /// the ball.
    pub fn walk_from(&self, start: usize, w: &[Letter]) -> Option<usize> {
        w.iter().try_fold(start, |c, l| self.edges[c][l.index()])
    }

    pub fn walk(&self, w: &Word) -> Option<usize> {
        self.walk_from(0, &w.0)
    }

    /// Word-metric distance from the identity, if the path stays in the ball.
    pub fn distance_of(&self, w: &Word) -> Option<usize> {
        self.walk(w).map(|i| self.distances[i])
    }
}
