use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use crate::coxeter::root_system::RootSystem;
use crate::{Error, Result};

type IMat = Vec<Vec<i64>>;

const MAX_ORDER: usize = 100_000;

/// An element of the spherical Weyl group `W₀`.
///
/// `root_matrix` acts on simple-root coordinates and `coweight_matrix` on
/// fundamental-coweight coordinates; both are integral. `word` is a reduced
/// word over 1-based generator indices.
#[derive(Debug, Clone)]
pub struct WeylElement {
    root_matrix: IMat,
    coweight_matrix: IMat,
    word: Vec<usize>,
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        self.root_matrix == other.root_matrix
    }
}

impl Eq for WeylElement {}

impl Hash for WeylElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.root_matrix.hash(state);
    }
}

impl WeylElement {
    pub fn root_matrix(&self) -> &IMat {
        &self.root_matrix
    }

    pub fn coweight_matrix(&self) -> &IMat {
        &self.coweight_matrix
    }

    /// Cached reduced word (1-based generator indices).
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn act_root(&self, root: &[i64]) -> Vec<i64> {
        mat_vec(&self.root_matrix, root)
    }

    pub fn act_coweight(&self, coweight: &[i64]) -> Vec<i64> {
        mat_vec(&self.coweight_matrix, coweight)
    }

    /// Word rendered as digits, e.g. `"121"`; the identity renders as `"e"`.
    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            "e".to_string()
        } else {
            self.word.iter().map(|i| i.to_string()).collect()
        }
    }
}

/// The finite group `W₀` of a root system, fully enumerated.
#[derive(Debug, Clone)]
pub struct WeylGroup {
    rank: usize,
    elements: Vec<WeylElement>,
    index: HashMap<IMat, usize>,
    positive_roots: Vec<Vec<i64>>,
    root_generators: Vec<IMat>,
    coweight_generators: Vec<IMat>,
}

/// Enumerates `W₀` by breadth-first closure of the simple reflections. The
/// BFS word of each element is a shortest word, hence reduced.
pub fn enumerate_weyl(rs: &RootSystem) -> Result<WeylGroup> {
    let n = rs.rank();
    let root_generators: Vec<IMat> = (0..n)
        .map(|i| {
            let cols: Vec<Vec<i64>> = (0..n).map(|j| rs.reflect_root(i, &unit(n, j))).collect();
            transpose(&cols)
        })
        .collect();
    let coweight_generators: Vec<IMat> = (0..n)
        .map(|i| {
            let cols: Vec<Vec<i64>> = (0..n).map(|j| rs.reflect_coweight(i, &unit(n, j))).collect();
            transpose(&cols)
        })
        .collect();

    let identity = WeylElement { root_matrix: identity(n), coweight_matrix: identity(n), word: Vec::new() };
    let mut elements = vec![identity.clone()];
    let mut index = HashMap::from([(identity.root_matrix.clone(), 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(at) = queue.pop_front() {
        for i in 0..n {
            let current = &elements[at];
            let root_matrix = mat_mul(&current.root_matrix, &root_generators[i]);
            if index.contains_key(&root_matrix) {
                continue;
            }
            let coweight_matrix = mat_mul(&current.coweight_matrix, &coweight_generators[i]);
            let mut word = current.word.clone();
            word.push(i + 1);
            index.insert(root_matrix.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(WeylElement { root_matrix, coweight_matrix, word });
            if elements.len() > MAX_ORDER {
                return Err(Error::UnsupportedType(format!("{}: Weyl group is not finite", rs.label())));
            }
        }
    }

    Ok(WeylGroup {
        rank: n,
        elements,
        index,
        positive_roots: rs.positive_roots().to_vec(),
        root_generators,
        coweight_generators,
    })
}

impl WeylGroup {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[WeylElement] {
        &self.elements
    }

    pub fn identity(&self) -> &WeylElement {
        &self.elements[0]
    }

    /// The simple reflection `s_i`, `i` 1-based.
    pub fn generator(&self, i: usize) -> &WeylElement {
        self.lookup(&self.root_generators[i - 1])
    }

    fn lookup(&self, root_matrix: &IMat) -> &WeylElement {
        &self.elements[self.index[root_matrix]]
    }

    pub fn position(&self, w: &WeylElement) -> usize {
        self.index[&w.root_matrix]
    }

    pub fn mul(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.lookup(&mat_mul(&a.root_matrix, &b.root_matrix)).clone()
    }

    pub fn inverse(&self, w: &WeylElement) -> WeylElement {
        let mut acc = self.identity().clone();
        for &i in w.word.iter().rev() {
            acc = self.mul(&acc, self.generator(i));
        }
        acc
    }

    /// Evaluates a word over 1-based generator indices.
    pub fn from_word(&self, word: &[usize]) -> Result<WeylElement> {
        let mut m = identity(self.rank);
        for &i in word {
            if i == 0 || i > self.rank {
                return Err(Error::InvalidInput(format!("generator index {i} out of range")));
            }
            m = mat_mul(&m, &self.root_generators[i - 1]);
        }
        Ok(self.lookup(&m).clone())
    }

    /// Inversion count `#{α ∈ Φ⁺ : wα ∈ Φ⁻}`.
    pub fn inversion_count(&self, w: &WeylElement) -> usize {
        self.positive_roots.iter().filter(|r| w.act_root(r).iter().any(|&c| c < 0)).count()
    }

    /// Whether `s_i` is a left descent of `w`, i.e. `ℓ(s_i w) < ℓ(w)`.
    pub fn is_left_descent(&self, w: &WeylElement, i: usize) -> bool {
        // ℓ(s_i w) < ℓ(w) iff w⁻¹ α_i is negative.
        let winv = self.inverse(w);
        winv.act_root(&unit(self.rank, i - 1)).iter().any(|&c| c < 0)
    }

    /// Reduced word by repeatedly stripping a left descent. `prefer_last`
    /// picks the largest descent index instead of the smallest, which gives
    /// a second reduced word for elements with several.
    pub fn reduced_word(&self, w: &WeylElement, prefer_last: bool) -> Vec<usize> {
        let mut word = Vec::new();
        let mut current = w.clone();
        while !current.is_identity() {
            let mut descents = (1..=self.rank).filter(|&i| self.is_left_descent(&current, i));
            let i =
                if prefer_last { descents.next_back() } else { descents.next() }.expect("non-identity has a descent");
            word.push(i);
            current = self.mul(self.generator(i), &current);
        }
        word
    }

    /// The longest element `w₀`.
    pub fn longest(&self) -> &WeylElement {
        self.elements.iter().max_by_key(|w| w.length()).expect("non-empty group")
    }

    /// The parabolic subgroup `W_J` for `J ⊆ {1..n}`.
    pub fn parabolic(&self, subset: &[usize]) -> Vec<WeylElement> {
        let mut members = vec![self.identity().clone()];
        let mut seen: HashMap<IMat, ()> = HashMap::from([(self.identity().root_matrix.clone(), ())]);
        let mut at = 0;
        while at < members.len() {
            for &i in subset {
                let next = self.mul(&members[at], self.generator(i));
                if seen.insert(next.root_matrix.clone(), ()).is_none() {
                    members.push(next);
                }
            }
            at += 1;
        }
        members.sort_by_key(|w| self.position(w));
        members
    }

    /// The unique element of maximal length in `W_J`.
    pub fn longest_element(&self, subset: &[usize]) -> WeylElement {
        self.parabolic(subset).into_iter().max_by_key(|w| w.length()).expect("W_J contains e")
    }

    /// `{w ∈ W₀ : wλ = λ}`.
    pub fn stabilizer(&self, coweight: &[i64]) -> Vec<WeylElement> {
        self.elements.iter().filter(|w| w.act_coweight(coweight) == coweight).cloned().collect()
    }

    /// The contragredient involution `λ ↦ −w₀λ`.
    pub fn iota(&self, coweight: &[i64]) -> Vec<i64> {
        self.longest().act_coweight(coweight).into_iter().map(|c| -c).collect()
    }

    pub fn coweight_generator(&self, i: usize) -> &IMat {
        &self.coweight_generators[i - 1]
    }
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn identity(n: usize) -> IMat {
    (0..n).map(|i| unit(n, i)).collect()
}

fn transpose(m: &IMat) -> IMat {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()
}

fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn mat_vec(a: &IMat, v: &[i64]) -> Vec<i64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}
