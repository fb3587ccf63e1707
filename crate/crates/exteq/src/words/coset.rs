use std::collections::VecDeque;

use super::{Letter, Presentation, Word, WordsError};

const NONE: usize = usize::MAX;

/// Complete coset table of the trivial subgroup, i.e. the regular action of a
/// finite group, with cosets numbered in shortlex order of their normal forms.
#[derive(Clone, Debug)]
pub struct CosetTable {
    n_letters: usize,
    table: Vec<Vec<usize>>,
    normal_forms: Vec<Word>,
}

struct Enumerator<'a> {
    letters: usize,
    relators: &'a [Word],
    table: Vec<Vec<usize>>,
    parent: Vec<usize>,
    live: usize,
    cap: usize,
}

impl<'a> Enumerator<'a> {
    fn rep(&mut self, mut c: usize) -> usize {
        let mut root = c;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[c] != root {
            let next = self.parent[c];
            self.parent[c] = root;
            c = next;
        }
        root
    }

    fn is_live(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    fn define(&mut self, c: usize, x: usize) -> Result<(), WordsError> {
        if self.live >= self.cap {
            return Err(WordsError::ResourceBound(format!("coset enumeration exceeded {} cosets", self.cap)));
        }
        let n = self.table.len();
        self.table.push(vec![NONE; self.letters]);
        self.parent.push(n);
        self.live += 1;
        self.table[c][x] = n;
        self.table[n][x ^ 1] = c;
        Ok(())
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let (pa, pb) = (self.rep(a), self.rep(b));
        if pa != pb {
            let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
            self.parent[hi] = lo;
            self.live -= 1;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let g = queue[i];
            i += 1;
            for x in 0..self.letters {
                let d = self.table[g][x];
                if d == NONE {
                    continue;
                }
                self.table[d][x ^ 1] = NONE;
                let mu = self.rep(g);
                let nu = self.rep(d);
                if self.table[mu][x] != NONE {
                    let t = self.table[mu][x];
                    self.merge(nu, t, &mut queue);
                } else if self.table[nu][x ^ 1] != NONE {
                    let t = self.table[nu][x ^ 1];
                    self.merge(mu, t, &mut queue);
                } else {
                    self.table[mu][x] = nu;
                    self.table[nu][x ^ 1] = mu;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, alpha: usize, w: &[Letter]) -> Result<(), WordsError> {
        let (mut f, mut b) = (alpha, alpha);
        let (mut i, mut j) = (0usize, w.len());
        loop {
            while i < j && self.table[f][w[i].index()] != NONE {
                f = self.table[f][w[i].index()];
                i += 1;
            }
            if i == j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j > i && self.table[b][w[j - 1].inverse().index()] != NONE {
                b = self.table[b][w[j - 1].inverse().index()];
                j -= 1;
            }
            if j == i {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i + 1 {
                let x = w[i].index();
                self.table[f][x] = b;
                self.table[b][x ^ 1] = f;
                return Ok(());
            }
            self.define(f, w[i].index())?;
        }
    }
}

impl CosetTable {
    /// Runs Hasse-Lipschitz-Todd coset enumeration over the trivial subgroup.
    /// Fails with `ResourceBound` once more than `cap` live cosets exist.
    pub fn enumerate(p: &Presentation, cap: usize) -> Result<Self, WordsError> {
        let letters = p.n_letters();
        let mut e = Enumerator {
            letters,
            relators: &p.relators,
            table: vec![vec![NONE; letters]],
            parent: vec![0],
            live: 1,
            cap: cap.max(1),
        };
        let relators = e.relators;
        let mut alpha = 0;
        while alpha < e.table.len() {
            if e.is_live(alpha) {
                for r in relators {
                    e.scan_and_fill(alpha, &r.0)?;
                    if !e.is_live(alpha) {
                        break;
                    }
                }
                if e.is_live(alpha) {
                    for x in 0..letters {
                        if e.table[alpha][x] == NONE {
                            e.define(alpha, x)?;
                        }
                    }
                }
            }
            alpha += 1;
        }
        Ok(Self::standardize(letters, &mut e))
    }

    /// Renumbers live cosets in breadth-first order from the identity coset,
    /// letters in alphabet order, which is shortlex order of normal forms.
    fn standardize(letters: usize, e: &mut Enumerator<'_>) -> Self {
        let mut new_index = vec![NONE; e.table.len()];
        let mut order = vec![0usize];
        let mut normal_forms = vec![Word::empty()];
        new_index[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            for x in 0..letters {
                let d = e.rep(e.table[c][x]);
                if new_index[d] == NONE {
                    new_index[d] = order.len();
                    normal_forms.push(normal_forms[new_index[c]].with(Letter(x as u8)));
                    order.push(d);
                    queue.push_back(d);
                }
            }
        }
        let mut table = Vec::with_capacity(order.len());
        for &c in &order {
            let row = (0..letters).map(|x| new_index[e.rep(e.table[c][x])]).collect();
            table.push(row);
        }
        CosetTable { n_letters: letters, table, normal_forms }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn n_letters(&self) -> usize {
        self.n_letters
    }

    pub fn act(&self, coset: usize, l: Letter) -> usize {
        self.table[coset][l.index()]
    }

    /// Coset reached from `start` by reading `w`.
    pub fn trace_from(&self, start: usize, w: &Word) -> usize {
        w.letters().iter().fold(start, |c, &l| self.act(c, l))
    }

    pub fn trace(&self, w: &Word) -> usize {
        self.trace_from(0, w)
    }

    pub fn normal_form(&self, coset: usize) -> &Word {
        &self.normal_forms[coset]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn klein_four_has_four_elements() {
        let t = CosetTable::enumerate(&Presentation::klein_four(), 1000).unwrap();
        assert_eq!(t.order(), 4);
        let al = &Presentation::klein_four().alphabet;
        let nfs: Vec<String> = (0..4).map(|i| al.render(t.normal_form(i))).collect();
        assert_eq!(nfs, vec!["", "s", "t", "st"]);
    }

    #[test]
    fn symmetric_group_and_quaternions() {
        let s3 = Presentation::parse("ab", &["aa", "bbb", "abab"]).unwrap();
        assert_eq!(CosetTable::enumerate(&s3, 1000).unwrap().order(), 6);
        let q8 = Presentation::parse("ij", &["iiii", "iiJJ", "ijiJ"]).unwrap();
        assert_eq!(CosetTable::enumerate(&q8, 1000).unwrap().order(), 8);
        let z12 = Presentation::parse("a", &["aaaaaaaaaaaa"]).unwrap();
        assert_eq!(CosetTable::enumerate(&z12, 1000).unwrap().order(), 12);
    }

    #[test]
    fn infinite_group_hits_cap() {
        let r = CosetTable::enumerate(&Presentation::infinite_dihedral(), 200);
        assert!(matches!(r, Err(WordsError::ResourceBound(_))));
    }

    #[test]
    fn table_is_a_group_action() {
        let t = CosetTable::enumerate(&Presentation::klein_four(), 100).unwrap();
        for c in 0..t.order() {
            for l in 0..4u8 {
                let l = Letter(l);
                assert_eq!(t.act(t.act(c, l), l.inverse()), c);
            }
        }
    }
}
