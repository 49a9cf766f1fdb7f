#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{q_int, Q};
use crate::{Error, Result};

/// Root-system types with built-in data. Anything else can be supplied
/// through [`RootSystem::from_gram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CartanType {
    A1,
    A2,
    B2,
    C2,
    G2,
}

impl CartanType {
    pub fn rank(self) -> usize {
        match self {
            CartanType::A1 => 1,
            _ => 2,
        }
    }

    /// Gram matrix of the simple roots, normalised so that short roots have
    /// squared length 2. Bourbaki ordering of the simple roots.
    pub fn gram(self) -> Vec<Vec<i64>> {
        match self {
            CartanType::A1 => vec![vec![2]],
            CartanType::A2 => vec![vec![2, -1], vec![-1, 2]],
            // α₁ long, α₂ short
            CartanType::B2 => vec![vec![4, -2], vec![-2, 2]],
            // α₁ short, α₂ long
            CartanType::C2 => vec![vec![2, -2], vec![-2, 4]],
            // α₁ short, α₂ long
            CartanType::G2 => vec![vec![2, -3], vec![-3, 6]],
        }
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CartanType::A1 => "A1",
            CartanType::A2 => "A2",
            CartanType::B2 => "B2",
            CartanType::C2 => "C2",
            CartanType::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for CartanType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(CartanType::A1),
            "A2" => Ok(CartanType::A2),
            "B2" => Ok(CartanType::B2),
            "C2" => Ok(CartanType::C2),
            "G2" => Ok(CartanType::G2),
            other => Err(Error::UnsupportedType(other.to_string())),
        }
    }
}

/// A crystallographic root system given by the Gram matrix of its simple
/// roots.
///
/// Roots are stored in simple-root coordinates (always integral) and
/// coweights in fundamental-coweight coordinates, so the pairing
/// `⟨λ, α⟩` is the plain dot product of the two coordinate vectors.
#[derive(Debug, Clone)]
pub struct RootSystem {
    label: String,
    gram: Vec<Vec<Q>>,
    cartan: Vec<Vec<i64>>,
    roots: Vec<Vec<i64>>,
    positive_roots: Vec<Vec<i64>>,
    highest_root: Vec<i64>,
    fundamental_coweights: Vec<Vec<Q>>,
    // W₀-orbit label (smallest simple-root index, 1-based) per positive root.
    positive_root_class: Vec<usize>,
    highest_root_class: usize,
    type_moduli: Vec<i64>,
    type_transform: Vec<Vec<i64>>,
}

const MAX_ROOTS: usize = 512;

impl RootSystem {
    pub fn new(cartan_type: CartanType) -> Self {
        let gram = cartan_type.gram().into_iter().map(|row| row.into_iter().map(q_int).collect()).collect();
        Self::from_gram(&cartan_type.to_string(), gram).expect("built-in root data is valid")
    }

    /// Builds a root system from a symmetric positive-definite Gram matrix
    /// of simple roots. Fails if the data is not crystallographic or the
    /// generated root set is not finite.
    pub fn from_gram(label: &str, gram: Vec<Vec<Q>>) -> Result<Self> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|row| row.len() != n) {
            return Err(Error::UnsupportedType(format!("{label}: Gram matrix must be square")));
        }
        let mut cartan = vec![vec![0i64; n]; n];
        for i in 0..n {
            if gram[i][i] <= Q::zero() {
                return Err(Error::UnsupportedType(format!("{label}: non-positive root length")));
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::UnsupportedType(format!("{label}: Gram matrix not symmetric")));
                }
                let a = q_int(2) * &gram[i][j] / &gram[i][i];
                if !a.denom().is_one() {
                    return Err(Error::UnsupportedType(format!("{label}: not crystallographic")));
                }
                cartan[i][j] = i64::try_from(a.numer()).map_err(|_| Error::UnsupportedType(label.into()))?;
            }
        }

        // Closure of the simple roots under simple reflections.
        let simple: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i)).collect();
        let mut seen: HashSet<Vec<i64>> = simple.iter().cloned().collect();
        let mut frontier = simple.clone();
        while let Some(root) = frontier.pop() {
            for i in 0..n {
                let image = reflect_root(&cartan, i, &root);
                if seen.insert(image.clone()) {
                    if seen.len() > MAX_ROOTS {
                        return Err(Error::UnsupportedType(format!("{label}: root system is not finite")));
                    }
                    frontier.push(image);
                }
            }
        }
        let mut roots: Vec<Vec<i64>> = seen.into_iter().collect();
        roots.sort_by_key(|r| (height(r).abs(), height(r) < 0, r.clone()));
        let mut positive_roots: Vec<Vec<i64>> = roots.iter().filter(|r| r.iter().all(|&c| c >= 0)).cloned().collect();
        positive_roots.sort_by_key(|r| (height(r), r.clone()));
        let highest_root = positive_roots.last().cloned().expect("non-empty root system");

        let fundamental_coweights =
            invert(&gram).ok_or_else(|| Error::UnsupportedType(format!("{label}: degenerate Gram matrix")))?;

        let orbit_of = |start: &Vec<i64>| -> BTreeSet<Vec<i64>> {
            let mut orbit = BTreeSet::from([start.clone()]);
            let mut stack = vec![start.clone()];
            while let Some(r) = stack.pop() {
                for i in 0..n {
                    let image = reflect_root(&cartan, i, &r);
                    if orbit.insert(image.clone()) {
                        stack.push(image);
                    }
                }
            }
            orbit
        };
        let simple_orbits: Vec<BTreeSet<Vec<i64>>> = simple.iter().map(orbit_of).collect();
        let class_of = |root: &Vec<i64>| -> usize {
            simple_orbits.iter().position(|o| o.contains(root)).expect("every root is conjugate to a simple root") + 1
        };
        let positive_root_class = positive_roots.iter().map(class_of).collect();
        let highest_root_class = class_of(&highest_root);

        // P/Q^∨: Q^∨ is spanned by the rows of the Cartan matrix in coweight
        // coordinates.
        let transposed: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|i| cartan[i][j]).collect()).collect();
        let (diag, left) = smith_left(transposed);
        let mut type_moduli = Vec::new();
        let mut type_transform = Vec::new();
        for (i, d) in diag.into_iter().enumerate() {
            if d.abs() > 1 {
                type_moduli.push(d.abs());
                type_transform.push(left[i].clone());
            }
        }

        Ok(Self {
            label: label.to_string(),
            gram,
            cartan,
            roots,
            positive_roots,
            highest_root,
            fundamental_coweights,
            positive_root_class,
            highest_root_class,
            type_moduli,
            type_transform,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<Q>] {
        &self.gram
    }

    /// `cartan()[i][j] = ⟨α_i^∨, α_j⟩`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn simple_roots(&self) -> Vec<Vec<i64>> {
        (0..self.rank()).map(|i| unit(self.rank(), i)).collect()
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    pub fn highest_root(&self) -> &[i64] {
        &self.highest_root
    }

    /// Fundamental coweights in simple-root coordinates.
    pub fn fundamental_coweights(&self) -> &[Vec<Q>] {
        &self.fundamental_coweights
    }

    /// 1-based index of a simple root in the same W₀-orbit as the given
    /// positive root (the positive root at `index` in [`Self::positive_roots`]).
    pub fn positive_root_class(&self, index: usize) -> usize {
        self.positive_root_class[index]
    }

    pub fn highest_root_class(&self) -> usize {
        self.highest_root_class
    }

    pub fn simple_root_class(&self, i: usize) -> usize {
        let simple = unit(self.rank(), i - 1);
        let idx = self.positive_roots.iter().position(|r| *r == simple).expect("simple roots are positive");
        self.positive_root_class[idx]
    }

    /// Inner product of two vectors given in simple-root coordinates.
    pub fn inner(&self, x: &[Q], y: &[Q]) -> Q {
        let n = self.rank();
        let mut acc = Q::zero();
        for i in 0..n {
            for j in 0..n {
                acc += &x[i] * &self.gram[i][j] * &y[j];
            }
        }
        acc
    }

    /// `⟨λ, α⟩` for λ in coweight coordinates and α in root coordinates.
    pub fn pairing(coweight: &[i64], root: &[i64]) -> i64 {
        coweight.iter().zip(root).map(|(c, a)| c * a).sum()
    }

    pub fn reflect_root(&self, i: usize, root: &[i64]) -> Vec<i64> {
        reflect_root(&self.cartan, i, root)
    }

    pub fn reflect_coweight(&self, i: usize, coweight: &[i64]) -> Vec<i64> {
        let ci = coweight[i];
        coweight.iter().enumerate().map(|(j, c)| c - ci * self.cartan[i][j]).collect()
    }

    /// Good vertex types: node 0 together with the nodes whose simple root
    /// has coefficient 1 in the highest root.
    pub fn good_types(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.highest_root.iter().enumerate().filter(|(_, &c)| c == 1).map(|(i, _)| i + 1))
            .collect()
    }

    /// Class of a coweight in the finite group P/Q^∨ (empty vector when the
    /// group is trivial).
    pub fn coweight_type(&self, coweight: &[i64]) -> Vec<i64> {
        self.type_transform
            .iter()
            .zip(&self.type_moduli)
            .map(|(row, m)| RootSystem::pairing(row, coweight).rem_euclid(*m))
            .collect()
    }

    pub fn in_coroot_lattice(&self, coweight: &[i64]) -> bool {
        self.coweight_type(coweight) == self.coweight_type(&vec![0; self.rank()])
    }

    pub fn coweight_group_order(&self) -> i64 {
        self.type_moduli.iter().product()
    }
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn height(root: &[i64]) -> i64 {
    root.iter().sum()
}

fn reflect_root(cartan: &[Vec<i64>], i: usize, root: &[i64]) -> Vec<i64> {
    let pairing: i64 = root.iter().enumerate().map(|(k, a)| a * cartan[i][k]).sum();
    let mut image = root.to_vec();
    image[i] -= pairing;
    image
}

fn invert(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, p) in a[r].iter_mut().zip(pivot_row) {
                    *v -= &f * p;
                }
            }
        }
    }
    // Columns of the inverse are the coordinates of the fundamental
    // coweights; the inverse of a symmetric matrix is symmetric.
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Smith normal form of a small square integer matrix, returning the
/// diagonal and the left transform `U` with `U·M·V = diag`.
fn smith_left(mut m: Vec<Vec<i64>>) -> (Vec<i64>, Vec<Vec<i64>>) {
    let n = m.len();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i)).collect();
    for t in 0..n {
        loop {
            // Smallest non-zero entry in the trailing block becomes the pivot.
            let pivot = (t..n)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| m[i][j] != 0)
                .min_by_key(|&(i, j)| m[i][j].abs());
            let Some((pi, pj)) = pivot else { break };
            m.swap(t, pi);
            u.swap(t, pi);
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let f = m[i][t] / m[t][t];
                if f != 0 {
                    for j in 0..n {
                        m[i][j] -= f * m[t][j];
                        u[i][j] -= f * u[t][j];
                    }
                }
                clean &= m[i][t] == 0;
            }
            for j in t + 1..n {
                let f = m[t][j] / m[t][t];
                if f != 0 {
                    for row in m.iter_mut() {
                        row[j] -= f * row[t];
                    }
                }
                clean &= m[t][j] == 0;
            }
            if clean {
                // Divisibility of the trailing block.
                if let Some(i) = (t + 1..n).find(|&i| (t + 1..n).any(|j| m[i][j] % m[t][t] != 0)) {
                    for j in 0..n {
                        m[t][j] += m[i][j];
                        u[t][j] += u[i][j];
                    }
                    continue;
                }
                break;
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), u)
}
