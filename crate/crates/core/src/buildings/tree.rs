//! Regular trees (the `Ã₁` buildings), the Cayley tree of a free group and
//! the integer line, as lazy networks.

use std::collections::BTreeSet;

use rand::Rng;

use super::BuildingModel;
use crate::coxeter::{CartanType, Coweight, CoxeterData};
use crate::netwalk::{Network, WalkRng};
use crate::rational::{q_int, Q};
use crate::{Error, Result};

/// Tree nodes are reduced words; the root is the empty word.
pub type Word = Vec<u8>;

pub fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

pub fn is_prefix(prefix: &[u8], word: &[u8]) -> bool {
    word.len() >= prefix.len() && word[..prefix.len()] == *prefix
}

/// Graph distance between two nodes of a tree whose nodes are reduced words.
pub fn word_distance(a: &[u8], b: &[u8]) -> usize {
    let l = common_prefix(a, b);
    a.len() + b.len() - 2 * l
}

/// The `(q+1)`-regular tree, realised as the Cayley graph of the free product
/// of `q+1` copies of `Z/2`: words over `0..=q` with no letter repeated
/// consecutively.
#[derive(Debug, Clone)]
pub struct TreeBuilding {
    q: u64,
    coxeter: CoxeterData,
}

impl TreeBuilding {
    pub fn new(q: u64) -> Result<Self> {
        if !(1..=250).contains(&q) {
            return Err(Error::InvalidInput(format!("tree branching {q} outside 1..=250")));
        }
        Ok(Self { q, coxeter: CoxeterData::uniform(CartanType::A1, q)? })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.q as usize + 1
    }

    pub fn root(&self) -> Word {
        Vec::new()
    }

    pub fn is_valid(&self, x: &[u8]) -> bool {
        x.iter().all(|&l| (l as u64) <= self.q) && x.windows(2).all(|w| w[0] != w[1])
    }

    /// Right multiplication by the generator `letter`.
    pub fn mul_letter(&self, x: &[u8], letter: u8) -> Word {
        let mut w = x.to_vec();
        if w.last() == Some(&letter) {
            w.pop();
        } else {
            w.push(letter);
        }
        w
    }

    /// Left multiplication `g·x`; a tree automorphism.
    pub fn left_mul(&self, g: &[u8], x: &[u8]) -> Word {
        let mut w = g.to_vec();
        for &l in x {
            if w.last() == Some(&l) {
                w.pop();
            } else {
                w.push(l);
            }
        }
        w
    }

    pub fn inverse(&self, x: &[u8]) -> Word {
        x.iter().rev().copied().collect()
    }

    pub fn distance(&self, x: &[u8], y: &[u8]) -> usize {
        word_distance(x, y)
    }

    /// All nodes at distance exactly `k` from `o`.
    pub fn sphere(&self, o: &[u8], k: usize) -> Vec<Word> {
        let mut frontier = vec![(o.to_vec(), None::<u8>)];
        for _ in 0..k {
            let mut next = Vec::new();
            for (x, came_by) in &frontier {
                for l in 0..=self.q as u8 {
                    if Some(l) != *came_by {
                        next.push((self.mul_letter(x, l), Some(l)));
                    }
                }
            }
            frontier = next;
        }
        frontier.into_iter().map(|(x, _)| x).collect()
    }

    pub fn word_string(&self, x: &[u8]) -> String {
        if x.is_empty() {
            return "e".into();
        }
        x.iter().map(|&l| letter_char(l)).collect()
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        if s == "e" {
            return Ok(Vec::new());
        }
        let w: Word = s.bytes().map(|b| b.wrapping_sub(b'a')).collect();
        if !self.is_valid(&w) {
            return Err(Error::InvalidInput(format!("{s} is not a reduced word")));
        }
        Ok(w)
    }
}

fn letter_char(l: u8) -> char {
    (b'a' + l) as char
}

impl Network for TreeBuilding {
    type Node = Word;

    fn neighbors(&self, x: &Word) -> Result<Vec<(Word, Q)>> {
        Ok((0..=self.q as u8).map(|l| (self.mul_letter(x, l), q_int(1))).collect())
    }

    fn encode(&self, x: &Word) -> Vec<u8> {
        x.clone()
    }

    fn total_conductance(&self, _: &Word) -> Result<Q> {
        Ok(q_int(self.degree() as i64))
    }

    fn random_step(&self, x: &Word, rng: &mut WalkRng) -> Result<Word> {
        Ok(self.mul_letter(x, rng.gen_range(0..=self.q as u8)))
    }
}

impl BuildingModel for TreeBuilding {
    type Vertex = Word;

    fn coxeter(&self) -> &CoxeterData {
        &self.coxeter
    }

    fn sigma(&self, x: &Word, y: &Word) -> Result<Coweight> {
        Ok(Coweight::new(vec![word_distance(x, y) as i64]))
    }

    fn v_lambda(&self, o: &Word, lambda: &Coweight) -> Result<Vec<Word>> {
        if lambda.rank() != 1 || !lambda.is_dominant() {
            return Err(Error::NonDominant(lambda.coords.clone()));
        }
        Ok(self.sphere(o, lambda.coords[0] as usize))
    }
}

/// A boundary point of a rooted tree, known through a finite prefix of its
/// ray from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeEnd {
    pub prefix: Word,
}

impl TreeEnd {
    pub fn new(prefix: Word) -> Self {
        Self { prefix }
    }
}

/// `h(x, y; ω) = d(x, z) − d(y, z)` for `z` on the ray of `ω` beyond both
/// branch points. Every admissible `z` in the known prefix is tried and must
/// agree.
pub fn busemann_h(x: &[u8], y: &[u8], end: &TreeEnd) -> Result<Coweight> {
    let w = &end.prefix;
    for v in [x, y] {
        if v.len() > w.len() && is_prefix(w, v) {
            return Err(Error::InsufficientDepth(format!(
                "the known prefix of the end (length {}) does not pass beyond {v:?}",
                w.len()
            )));
        }
    }
    let start = common_prefix(x, w).max(common_prefix(y, w));
    let mut value = None;
    for k in start..=w.len() {
        let z = &w[..k];
        let h = word_distance(x, z) as i64 - word_distance(y, z) as i64;
        match value {
            None => value = Some(h),
            Some(v) if v != h => {
                return Err(Error::InvalidInput(format!("Busemann value changed at depth {k}")));
            }
            _ => {}
        }
    }
    Ok(Coweight::new(vec![value.expect("at least one admissible z")]))
}

/// Whether two ends are already known to differ.
pub fn ends_differ(a: &TreeEnd, b: &TreeEnd) -> bool {
    let l = common_prefix(&a.prefix, &b.prefix);
    l < a.prefix.len() && l < b.prefix.len()
}

/// `β_x(ω, ω′) = h(x, z; ω) + h(x, z; ω′)` with `z` the branch point of the
/// two ends, which lies on the geodesic between them.
pub fn beta(x: &[u8], a: &TreeEnd, b: &TreeEnd) -> Result<Coweight> {
    if a == b {
        return Err(Error::EqualEnds);
    }
    if !ends_differ(a, b) {
        return Err(Error::InsufficientDepth("ends are not yet separated by their prefixes".into()));
    }
    let z = &a.prefix[..common_prefix(&a.prefix, &b.prefix)];
    Ok(&busemann_h(x, z, a)? + &busemann_h(x, z, b)?)
}

/// The Cayley tree of the free group on `rank` generators. Letters `2i` and
/// `2i+1` are a generator and its inverse, printed `a`/`A`, `b`/`B`, …
#[derive(Debug, Clone)]
pub struct FreeGroupTree {
    rank: u8,
}

impl FreeGroupTree {
    pub fn new(rank: u8) -> Result<Self> {
        if !(1..=13).contains(&rank) {
            return Err(Error::InvalidInput(format!("free group rank {rank} outside 1..=13")));
        }
        Ok(Self { rank })
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn letters(&self) -> std::ops::Range<u8> {
        0..2 * self.rank
    }

    pub fn mul_letter(&self, x: &[u8], letter: u8) -> Word {
        let mut w = x.to_vec();
        if w.last() == Some(&(letter ^ 1)) {
            w.pop();
        } else {
            w.push(letter);
        }
        w
    }

    pub fn mul(&self, x: &[u8], y: &[u8]) -> Word {
        y.iter().fold(x.to_vec(), |w, &l| self.mul_letter(&w, l))
    }

    pub fn inverse(&self, x: &[u8]) -> Word {
        x.iter().rev().map(|l| l ^ 1).collect()
    }

    pub fn is_reduced(&self, x: &[u8]) -> bool {
        x.iter().all(|&l| l < 2 * self.rank) && x.windows(2).all(|w| w[0] != w[1] ^ 1)
    }

    pub fn word_string(&self, x: &[u8]) -> String {
        if x.is_empty() {
            return "e".into();
        }
        x.iter()
            .map(|&l| {
                let c = (b'a' + l / 2) as char;
                if l % 2 == 0 {
                    c
                } else {
                    c.to_ascii_uppercase()
                }
            })
            .collect()
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        if s == "e" {
            return Ok(Vec::new());
        }
        let mut w = Vec::new();
        for c in s.chars() {
            if !c.is_ascii_alphabetic() {
                return Err(Error::InvalidInput(format!("bad letter {c}")));
            }
            let base = c.to_ascii_lowercase() as u8 - b'a';
            let l = 2 * base + u8::from(c.is_ascii_uppercase());
            if l >= 2 * self.rank {
                return Err(Error::InvalidInput(format!("letter {c} exceeds rank")));
            }
            w = self.mul_letter(&w, l);
        }
        Ok(w)
    }
}

impl Network for FreeGroupTree {
    type Node = Word;

    fn neighbors(&self, x: &Word) -> Result<Vec<(Word, Q)>> {
        Ok(self.letters().map(|l| (self.mul_letter(x, l), q_int(1))).collect())
    }

    fn encode(&self, x: &Word) -> Vec<u8> {
        x.clone()
    }

    fn random_step(&self, x: &Word, rng: &mut WalkRng) -> Result<Word> {
        Ok(self.mul_letter(x, rng.gen_range(self.letters())))
    }
}

/// The integer line with unit conductances between neighbours.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegerLine;

impl Network for IntegerLine {
    type Node = i64;

    fn neighbors(&self, x: &i64) -> Result<Vec<(i64, Q)>> {
        Ok(vec![(x - 1, q_int(1)), (x + 1, q_int(1))])
    }

    fn encode(&self, x: &i64) -> Vec<u8> {
        x.to_le_bytes().to_vec()
    }

    fn random_step(&self, x: &i64, rng: &mut WalkRng) -> Result<i64> {
        Ok(if rng.gen::<bool>() { x + 1 } else { x - 1 })
    }
}

/// Nodes within distance `radius` of `o` in any network, in BFS order.
pub fn ball<N: Network>(net: &N, o: &N::Node, radius: usize, limit: usize) -> Result<Vec<N::Node>> {
    let mut seen = BTreeSet::from([o.clone()]);
    let mut order = vec![o.clone()];
    let mut frontier = vec![o.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for x in &frontier {
            for (y, _) in net.neighbors(x)? {
                if seen.insert(y.clone()) {
                    if seen.len() > limit {
                        return Err(Error::SizeGuard(format!("ball exceeds {limit} nodes")));
                    }
                    order.push(y.clone());
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netwalk::{check_symmetry, RngStream};
    use proptest::prelude::*;
    use std::collections::{HashMap, VecDeque};

    fn bfs_sphere_sizes(tree: &TreeBuilding, k: usize) -> Vec<usize> {
        let mut dist = HashMap::from([(tree.root(), 0usize)]);
        let mut queue = VecDeque::from([tree.root()]);
        let mut sizes = vec![0; k + 1];
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            sizes[d] += 1;
            if d == k {
                continue;
            }
            for (y, _) in tree.neighbors(&x).unwrap() {
                if !dist.contains_key(&y) {
                    dist.insert(y.clone(), d + 1);
                    queue.push_back(y);
                }
            }
        }
        sizes
    }

    #[test]
    fn spheres_match_bfs_and_formula() {
        for q in [2u64, 3] {
            let t = TreeBuilding::new(q).unwrap();
            let sizes = bfs_sphere_sizes(&t, 6);
            for (k, &size) in sizes.iter().enumerate() {
                assert_eq!(t.sphere(&t.root(), k).len(), size);
                let n = t.coxeter().n_lambda_count(&Coweight::new(vec![k as i64])).unwrap();
                assert_eq!(n as usize, size);
            }
        }
        let t = TreeBuilding::new(2).unwrap();
        assert_eq!(t.v_lambda(&t.root(), &Coweight::new(vec![2])).unwrap().len(), 6);
        assert_eq!(t.v_lambda(&vec![0, 1], &Coweight::new(vec![0])).unwrap(), vec![vec![0, 1]]);
    }

    #[test]
    fn tree_structure() {
        let t = TreeBuilding::new(2).unwrap();
        let x = vec![0, 2, 1];
        let nbrs = t.neighbors(&x).unwrap();
        assert_eq!(nbrs.len(), 3);
        assert_eq!(nbrs.iter().filter(|(y, _)| y.len() < x.len()).count(), 1);
        assert_eq!(t.sigma(&x, &vec![1]).unwrap(), Coweight::new(vec![4]));
        assert_eq!(t.sigma(&x, &x).unwrap(), Coweight::zero(1));
        check_symmetry(&t, &ball(&t, &t.root(), 3, 1000).unwrap()).unwrap();
        assert_eq!(t.parse_word(&t.word_string(&x)).unwrap(), x);
        assert!(t.parse_word("aab").is_err());
    }

    #[test]
    fn free_group_words() {
        let f = FreeGroupTree::new(2).unwrap();
        let w = f.parse_word("abAB").unwrap();
        assert_eq!(f.word_string(&w), "abAB");
        assert_eq!(f.mul(&w, &f.inverse(&w)), Vec::<u8>::new());
        assert_eq!(f.parse_word("aA").unwrap(), Vec::<u8>::new());
        assert_eq!(f.neighbors(&w).unwrap().len(), 4);
        assert!(f.parse_word("c").is_err());
        check_symmetry(&f, &ball(&f, &Vec::new(), 3, 1000).unwrap()).unwrap();
    }

    #[test]
    fn busemann_along_a_ray() {
        let end = TreeEnd::new(vec![0, 1, 0, 1, 0, 1]);
        assert_eq!(busemann_h(&[0], &[0], &end).unwrap(), Coweight::zero(1));
        assert_eq!(busemann_h(&[0], &[0, 1], &end).unwrap(), Coweight::new(vec![1]));
        assert_eq!(busemann_h(&[0, 1], &[0], &end).unwrap(), Coweight::new(vec![-1]));
        assert_eq!(busemann_h(&[2], &[0], &end).unwrap(), Coweight::new(vec![2]));
        assert!(matches!(busemann_h(&[0, 1, 0, 1, 0, 1, 2], &[], &end), Err(Error::InsufficientDepth(_))));
    }

    #[test]
    fn beta_examples() {
        let a = TreeEnd::new(vec![0, 1, 0, 1]);
        let b = TreeEnd::new(vec![1, 0, 1, 0]);
        assert_eq!(beta(&[], &a, &b).unwrap(), Coweight::zero(1));
        assert_eq!(beta(&[0, 1], &a, &b).unwrap(), Coweight::zero(1));
        assert_eq!(beta(&[2, 0], &a, &b).unwrap(), Coweight::new(vec![4]));
        assert_eq!(beta(&[0, 2], &a, &b).unwrap(), Coweight::new(vec![2]));
        assert!(matches!(beta(&[], &a, &a), Err(Error::EqualEnds)));
    }

    /// Distance from `x` to the bi-infinite geodesic through the known parts
    /// of two separated ends, by brute force over the path vertices.
    fn dist_to_geodesic(x: &[u8], a: &TreeEnd, b: &TreeEnd) -> usize {
        let l = common_prefix(&a.prefix, &b.prefix);
        let mut path: Vec<&[u8]> = (l..=a.prefix.len()).map(|k| &a.prefix[..k]).collect();
        path.extend((l..=b.prefix.len()).map(|k| &b.prefix[..k]));
        path.into_iter().map(|z| word_distance(x, z)).min().unwrap()
    }

    fn reduced(raw: Vec<u8>, q: u8) -> Word {
        let t = TreeBuilding::new(q as u64).unwrap();
        raw.into_iter().fold(Vec::new(), |w, l| t.mul_letter(&w, l % (q + 1)))
    }

    proptest! {
        #[test]
        fn busemann_cocycle(x in proptest::collection::vec(0u8..3, 0..5), y in proptest::collection::vec(0u8..3, 0..5),
                            z in proptest::collection::vec(0u8..3, 0..5), ray in proptest::collection::vec(0u8..3, 8..12)) {
            let (x, y, z) = (reduced(x, 2), reduced(y, 2), reduced(z, 2));
            let end = TreeEnd::new(reduced(ray, 2));
            prop_assume!(end.prefix.len() >= 6);
            let run = || -> Result<(Coweight, Coweight, Coweight)> {
                Ok((busemann_h(&x, &y, &end)?, busemann_h(&y, &z, &end)?, busemann_h(&x, &z, &end)?))
            };
            if let Ok((a, b, c)) = run() {
                prop_assert_eq!(&a + &b, c);
            }
        }

        #[test]
        fn beta_is_twice_the_distance_to_the_geodesic(x in proptest::collection::vec(0u8..3, 0..6),
                y in proptest::collection::vec(0u8..3, 0..6), ra in proptest::collection::vec(0u8..3, 7..10),
                rb in proptest::collection::vec(0u8..3, 7..10)) {
            let (x, y) = (reduced(x, 2), reduced(y, 2));
            let a = TreeEnd::new(reduced(ra, 2));
            let b = TreeEnd::new(reduced(rb, 2));
            prop_assume!(ends_differ(&a, &b));
            if let (Ok(bx), Ok(by), Ok(ha), Ok(hb)) = (beta(&x, &a, &b), beta(&y, &a, &b), busemann_h(&x, &y, &a), busemann_h(&x, &y, &b)) {
                prop_assert_eq!(bx.coords[0], 2 * dist_to_geodesic(&x, &a, &b) as i64);
                prop_assert_eq!(&bx - &by, &ha + &hb);
            }
        }
    }

    #[test]
    fn integer_line_steps_are_unit() {
        let mut rng = RngStream::new(4).rng();
        let mut x = 0i64;
        for _ in 0..100 {
            let y = IntegerLine.random_step(&x, &mut rng).unwrap();
            assert_eq!((y - x).abs(), 1);
            x = y;
        }
    }
}
