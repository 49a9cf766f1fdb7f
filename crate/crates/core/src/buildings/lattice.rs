//! The `Ã₂` building of `PGL₃(Q_p)`: vertices are homothety classes of
//! `Z_p`-lattices in `Q_p³`, stored as canonical Hermite forms.
//!
//! A lattice is the row span of an upper-triangular matrix
//!
//! ```text
//! [ p^a  x    y   ]
//! [ 0    p^b  z   ]      0 ≤ x < p^b,  0 ≤ y, z < p^c
//! [ 0    0    p^c ]
//! ```
//!
//! scaled so that its entries have no common factor `p`. The base vertex is
//! the class of `Z_p³`.

#![allow(clippy::needless_range_loop)]

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::BuildingModel;
use crate::coxeter::{CartanType, Coweight, CoxeterData};
use crate::netwalk::{Network, WalkRng};
use crate::rational::{q_int, Q};
use crate::{Error, Result};

type Row = [i128; 3];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeClass {
    rows: [Row; 3],
}

impl LatticeClass {
    pub fn base() -> Self {
        Self { rows: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] }
    }

    pub fn rows(&self) -> &[Row; 3] {
        &self.rows
    }

    /// Exponents `(a, b, c)` of the diagonal.
    pub fn exponents(&self, p: i128) -> [u32; 3] {
        [0, 1, 2].map(|i| valuation(p, self.rows[i][i]).expect("diagonal is non-zero"))
    }

    /// Vertex type `v_p(det) mod 3`.
    pub fn vertex_type(&self, p: i128) -> u8 {
        (self.exponents(p).iter().sum::<u32>() % 3) as u8
    }

    /// Class of the diagonal lattice `diag(p^e₀, p^e₁, p^e₂)`.
    pub fn diagonal(p: i128, e: [u32; 3]) -> Result<Self> {
        let gens: Vec<Row> = (0..3)
            .map(|i| {
                let mut r = [0; 3];
                r[i] = checked_pow(p, e[i])?;
                Ok(r)
            })
            .collect::<Result<_>>()?;
        canonicalize(p, &gens, e.iter().sum::<u32>() + 1)
    }

    pub fn label(&self) -> String {
        let r = &self.rows;
        format!("{},{},{};{},{},{}", r[0][0], r[1][1], r[2][2], r[0][1], r[0][2], r[1][2])
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn valuation(p: i128, mut n: i128) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Some(v)
}

fn checked_pow(p: i128, e: u32) -> Result<i128> {
    p.checked_pow(e).ok_or_else(|| Error::Overflow(format!("{p}^{e}")))
}

fn mul_mod(a: i128, b: i128, m: i128) -> Result<i128> {
    a.checked_mul(b).map(|v| v.rem_euclid(m)).ok_or_else(|| Error::Overflow("lattice arithmetic".into()))
}

fn inverse_mod(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "{a} is not a unit mod {m}");
    s0.rem_euclid(m)
}

/// Canonical class of the `Z_p`-span of `gens`, which must contain `p^k Z_p³`.
pub fn canonicalize(p: i128, gens: &[Row], k: u32) -> Result<LatticeClass> {
    let pk = checked_pow(p, k)?;
    let mut rows: Vec<Row> = gens.iter().map(|r| r.map(|v| v.rem_euclid(pk))).collect();
    let mut pivots = [[0i128; 3]; 3];
    for j in 0..3 {
        let best = rows.iter().enumerate().filter_map(|(i, r)| valuation(p, r[j]).map(|v| (v, i))).min();
        match best {
            Some((v, i)) if v < k => {
                let mut pivot = rows.swap_remove(i);
                let pv = checked_pow(p, v)?;
                let unit_inv = inverse_mod(pivot[j] / pv, pk);
                for c in j..3 {
                    pivot[c] = mul_mod(pivot[c], unit_inv, pk)?;
                }
                pivot[j] = pv;
                for r in rows.iter_mut() {
                    let t = r[j] / pv;
                    if t != 0 {
                        for c in j..3 {
                            r[c] = (r[c] - mul_mod(t, pivot[c], pk)?).rem_euclid(pk);
                        }
                    }
                }
                // The implicit generator p^k e_j reduces to -p^(k-v)·pivot.
                let scale = checked_pow(p, k - v)?;
                let mut extra = [0; 3];
                for c in j + 1..3 {
                    extra[c] = (-mul_mod(scale, pivot[c], pk)?).rem_euclid(pk);
                }
                rows.push(extra);
                pivots[j] = pivot;
            }
            _ => {
                pivots[j] = [0; 3];
                pivots[j][j] = pk;
            }
        }
        rows.retain(|r| r.iter().any(|&v| v != 0));
    }
    for j in 1..3 {
        let d = pivots[j][j];
        for i in 0..j {
            let t = pivots[i][j].div_euclid(d);
            if t != 0 {
                for c in j..3 {
                    pivots[i][c] -= t * pivots[j][c];
                }
            }
        }
    }
    let shift = pivots.iter().flatten().filter_map(|&v| valuation(p, v)).min().expect("non-zero lattice");
    let scale = checked_pow(p, shift)?;
    for r in pivots.iter_mut() {
        for v in r.iter_mut() {
            *v /= scale;
        }
    }
    Ok(LatticeClass { rows: pivots })
}

fn adjugate(m: &[Row; 3]) -> Result<[Row; 3]> {
    let mut out = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            let a = m[r0][c0].checked_mul(m[r1][c1]);
            let b = m[r0][c1].checked_mul(m[r1][c0]);
            out[i][j] = match (a, b) {
                (Some(a), Some(b)) => a - b,
                _ => return Err(Error::Overflow("adjugate".into())),
            };
        }
    }
    Ok(out)
}

fn mat_mul(a: &[Row; 3], b: &[Row; 3]) -> Result<[Row; 3]> {
    let mut out = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0i128;
            for k in 0..3 {
                s = a[i][k]
                    .checked_mul(b[k][j])
                    .and_then(|v| s.checked_add(v))
                    .ok_or_else(|| Error::Overflow("matrix product".into()))?;
            }
            out[i][j] = s;
        }
    }
    Ok(out)
}

/// Relative position `σ(x, y)` from the elementary divisors of `y` with
/// respect to `x`, computed through determinantal divisors.
pub fn relative_position(p: i128, x: &LatticeClass, y: &LatticeClass) -> Result<Coweight> {
    let t = mat_mul(&y.rows, &adjugate(&x.rows)?)?;
    let d1 = t.iter().flatten().filter_map(|&v| valuation(p, v)).min().expect("invertible");
    let mut d2 = u32::MAX;
    for (r0, r1) in [(0, 1), (0, 2), (1, 2)] {
        for (c0, c1) in [(0, 1), (0, 2), (1, 2)] {
            let minor = t[r0][c0]
                .checked_mul(t[r1][c1])
                .zip(t[r0][c1].checked_mul(t[r1][c0]))
                .map(|(a, b)| a - b)
                .ok_or_else(|| Error::Overflow("2x2 minor".into()))?;
            if let Some(v) = valuation(p, minor) {
                d2 = d2.min(v);
            }
        }
    }
    let det_x: u32 = x.exponents(p).iter().sum();
    let det_y: u32 = y.exponents(p).iter().sum();
    let d3 = det_y + 2 * det_x;
    let (e1, e2, e3) = (d1, d2 - d1, d3 - d2);
    Ok(Coweight::new(vec![e3 as i64 - e2 as i64, e2 as i64 - e1 as i64]))
}

/// Smith form of a lattice relative to `Z_p³`: exponents `v` and a basis
/// `f` of `Z_p³` (mod `p^k`) with the lattice spanned by `p^{v_i} f_i`.
fn smith_basis(p: i128, z: &LatticeClass) -> Result<([u32; 3], [Row; 3], u32)> {
    let k = z.exponents(p).iter().sum::<u32>() + 1;
    let pk = checked_pow(p, k)?;
    let mut a = z.rows;
    let mut w: [Row; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut v = [0u32; 3];
    for t in 0..3 {
        let (vt, i, j) = (t..3)
            .flat_map(|i| (t..3).map(move |j| (i, j)))
            .filter_map(|(i, j)| valuation(p, a[i][j]).map(|v| (v, i, j)))
            .min()
            .ok_or_else(|| Error::InvalidInput("degenerate lattice".into()))?;
        a.swap(t, i);
        for r in a.iter_mut() {
            r.swap(t, j);
        }
        w.swap(t, j);
        let pv = checked_pow(p, vt)?;
        let u = (a[t][t] / pv).rem_euclid(pk);
        let u_inv = inverse_mod(u, pk);
        for r in a.iter_mut() {
            r[t] = mul_mod(r[t], u_inv, pk)?;
        }
        for c in 0..3 {
            w[t][c] = mul_mod(w[t][c], u, pk)?;
        }
        for c in t + 1..3 {
            let f = a[t][c] / pv;
            if f != 0 {
                for r in a.iter_mut() {
                    r[c] = (r[c] - mul_mod(f, r[t], pk)?).rem_euclid(pk);
                }
                for col in 0..3 {
                    w[t][col] = (w[t][col] + mul_mod(f, w[c][col], pk)?).rem_euclid(pk);
                }
            }
        }
        for r in t + 1..3 {
            let f = a[r][t] / pv;
            if f != 0 {
                for c in 0..3 {
                    a[r][c] = (a[r][c] - mul_mod(f, a[t][c], pk)?).rem_euclid(pk);
                }
            }
        }
        v[t] = vt;
    }
    Ok((v, w, k))
}

/// The vertex `y` with `σ(o, y) = λ` on a geodesic from the base vertex `o`
/// to `z`; requires `σ(o, z) ≥ λ` coordinatewise.
pub fn point_toward(p: i128, z: &LatticeClass, lambda: &Coweight) -> Result<LatticeClass> {
    let (v, w, _) = smith_basis(p, z)?;
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| std::cmp::Reverse(v[i]));
    let (l1, l2) = (lambda.coords[0], lambda.coords[1]);
    let (k1, k2, k3) = (v[order[0]] as i64, v[order[1]] as i64, v[order[2]] as i64);
    if l1 < 0 || l2 < 0 || k1 - k2 < l1 || k2 - k3 < l2 {
        return Err(Error::InvalidInput(format!("σ(o, z) = ({}, {}) is not ≥ {lambda}", k1 - k2, k2 - k3)));
    }
    let exps = [(l1 + l2) as u32, l2 as u32, 0];
    let gens: Vec<Row> = order
        .iter()
        .zip(exps)
        .map(|(&i, e)| {
            let s = checked_pow(p, e)?;
            Ok(w[i].map(|c| c * s))
        })
        .collect::<Result<_>>()?;
    canonicalize(p, &gens, exps[0] + 1)
}

/// Subspaces of `F_p³` as normalised coefficient vectors.
fn projective_points(p: i128) -> Vec<Row> {
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            out.push([1, a, b]);
        }
    }
    for b in 0..p {
        out.push([0, 1, b]);
    }
    out.push([0, 0, 1]);
    out
}

fn dot_mod(u: &Row, v: &Row, p: i128) -> i128 {
    (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).rem_euclid(p)
}

/// Two vectors spanning the plane `{u : f·u = 0}`.
fn plane_basis(f: &Row, p: i128) -> [Row; 2] {
    let mut basis = Vec::new();
    for u in projective_points(p) {
        if dot_mod(f, &u, p) == 0 {
            let independent = basis.first().is_none_or(|b: &Row| {
                let cross = [b[1] * u[2] - b[2] * u[1], b[2] * u[0] - b[0] * u[2], b[0] * u[1] - b[1] * u[0]];
                cross.iter().any(|c| c.rem_euclid(p) != 0)
            });
            if independent {
                basis.push(u);
                if basis.len() == 2 {
                    break;
                }
            }
        }
    }
    [basis[0], basis[1]]
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// The full (lazy) building; neighbours are computed on demand.
#[derive(Debug, Clone)]
pub struct A2Building {
    p: i128,
    points: Vec<Row>,
    planes: Vec<[Row; 2]>,
    coxeter: CoxeterData,
}

impl A2Building {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) || p > 1000 {
            return Err(Error::InvalidInput(format!("{p} is not a supported prime")));
        }
        let pi = p as i128;
        let points = projective_points(pi);
        let planes = points.iter().map(|f| plane_basis(f, pi)).collect();
        Ok(Self { p: pi, points, planes, coxeter: CoxeterData::uniform(CartanType::A2, p)? })
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn base(&self) -> LatticeClass {
        LatticeClass::base()
    }

    /// Number of neighbours of each kind, `p² + p + 1`.
    pub fn link_size(&self) -> usize {
        self.points.len()
    }

    fn neighbor_from(&self, x: &LatticeClass, coeffs: &[Row]) -> Result<LatticeClass> {
        let k = x.exponents(self.p).iter().sum::<u32>() + 2;
        let mut gens: Vec<Row> = x.rows.iter().map(|r| r.map(|v| v * self.p)).collect();
        for u in coeffs {
            let mut g = [0i128; 3];
            for (i, r) in x.rows.iter().enumerate() {
                for c in 0..3 {
                    g[c] += u[i] * r[c];
                }
            }
            gens.push(g);
        }
        canonicalize(self.p, &gens, k)
    }

    /// The `i`-th neighbour at `σ = λ₁` (index-`p` sublattices).
    pub fn lambda1_neighbor(&self, x: &LatticeClass, i: usize) -> Result<LatticeClass> {
        self.neighbor_from(x, &self.planes[i])
    }

    /// The `i`-th neighbour at `σ = λ₂` (index-`p²` sublattices).
    pub fn lambda2_neighbor(&self, x: &LatticeClass, i: usize) -> Result<LatticeClass> {
        self.neighbor_from(x, &self.points[i..=i])
    }

    pub fn lambda1_neighbors(&self, x: &LatticeClass) -> Result<Vec<LatticeClass>> {
        (0..self.link_size()).map(|i| self.lambda1_neighbor(x, i)).collect()
    }

    pub fn lambda2_neighbors(&self, x: &LatticeClass) -> Result<Vec<LatticeClass>> {
        (0..self.link_size()).map(|i| self.lambda2_neighbor(x, i)).collect()
    }

    pub fn is_adjacent(&self, x: &LatticeClass, y: &LatticeClass) -> Result<bool> {
        let s = self.sigma(x, y)?;
        Ok(s.coords == [1, 0] || s.coords == [0, 1])
    }

    /// A uniformly random neighbour at `σ = λ_i`, `i ∈ {1, 2}`.
    pub fn random_neighbor(&self, x: &LatticeClass, i: usize, rng: &mut WalkRng) -> Result<LatticeClass> {
        let j = rng.gen_range(0..self.link_size());
        match i {
            1 => self.lambda1_neighbor(x, j),
            2 => self.lambda2_neighbor(x, j),
            _ => Err(Error::InvalidInput(format!("no fundamental coweight λ_{i} in rank 2"))),
        }
    }

    pub fn point_toward(&self, z: &LatticeClass, lambda: &Coweight) -> Result<LatticeClass> {
        point_toward(self.p, z, lambda)
    }

    /// Vertices `y` with `σ(o, y) ≤ bound` coordinatewise, found by a
    /// monotone search from `o`.
    pub fn box_around(
        &self,
        o: &LatticeClass,
        bound: &Coweight,
        limit: usize,
    ) -> Result<Vec<(LatticeClass, Coweight)>> {
        let mut seen = HashMap::from([(o.clone(), Coweight::zero(2))]);
        let mut order = vec![o.clone()];
        let mut queue = VecDeque::from([o.clone()]);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors_of(&x)? {
                if seen.contains_key(&y) {
                    continue;
                }
                let s = self.sigma(o, &y)?;
                if s.le_coords(bound) {
                    if seen.len() >= limit {
                        return Err(Error::SizeGuard(format!("more than {limit} vertices")));
                    }
                    seen.insert(y.clone(), s);
                    order.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(order
            .into_iter()
            .map(|x| {
                let s = seen[&x].clone();
                (x, s)
            })
            .collect())
    }

    pub fn neighbors_of(&self, x: &LatticeClass) -> Result<Vec<LatticeClass>> {
        let mut out = self.lambda1_neighbors(x)?;
        out.extend(self.lambda2_neighbors(x)?);
        Ok(out)
    }

    /// A vertex path from `x` to `z` along which `σ(x, ·)` increases.
    pub fn geodesic_path(&self, x: &LatticeClass, z: &LatticeClass) -> Result<Vec<LatticeClass>> {
        let mut path = vec![x.clone()];
        let mut cur = x.clone();
        while cur != *z {
            let target = self.sigma(&cur, z)?;
            let mut advanced = false;
            for y in self.neighbors_of(&cur)? {
                if &self.sigma(&cur, &y)? + &self.sigma(&y, z)? == target {
                    cur = y;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                return Err(Error::InvalidInput("no geodesic step found".into()));
            }
            path.push(cur.clone());
        }
        Ok(path)
    }
}

impl Network for A2Building {
    type Node = LatticeClass;

    fn neighbors(&self, x: &LatticeClass) -> Result<Vec<(LatticeClass, Q)>> {
        Ok(self.neighbors_of(x)?.into_iter().map(|y| (y, q_int(1))).collect())
    }

    fn encode(&self, x: &LatticeClass) -> Vec<u8> {
        x.rows.iter().flatten().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn random_step(&self, x: &LatticeClass, rng: &mut WalkRng) -> Result<LatticeClass> {
        let i = if rng.gen::<bool>() { 1 } else { 2 };
        self.random_neighbor(x, i, rng)
    }
}

impl BuildingModel for A2Building {
    type Vertex = LatticeClass;

    fn coxeter(&self) -> &CoxeterData {
        &self.coxeter
    }

    fn sigma(&self, x: &LatticeClass, y: &LatticeClass) -> Result<Coweight> {
        relative_position(self.p, x, y)
    }

    fn v_lambda(&self, o: &LatticeClass, lambda: &Coweight) -> Result<Vec<LatticeClass>> {
        if lambda.rank() != 2 || !lambda.is_dominant() {
            return Err(Error::NonDominant(lambda.coords.clone()));
        }
        Ok(self.box_around(o, lambda, 5_000_000)?.into_iter().filter(|(_, s)| s == lambda).map(|(y, _)| y).collect())
    }
}

/// Largest box radius accepted by [`A2Ball::build`].
pub const MAX_BALL_RADIUS: i64 = 4;
/// Largest vertex count accepted by [`A2Ball::build`].
pub const MAX_BALL_VERTICES: u64 = 400_000;

/// The vertices `y` with `σ(o, y) ≤ (R, R)` coordinatewise, with their
/// adjacency.
#[derive(Debug, Clone)]
pub struct A2Ball {
    building: A2Building,
    radius: i64,
    vertices: Vec<LatticeClass>,
    index: HashMap<LatticeClass, usize>,
    sigma_base: Vec<Coweight>,
    adjacency: Vec<Vec<usize>>,
}

impl A2Ball {
    /// Predicted vertex count `Σ N_λ` over the box.
    pub fn predicted_size(p: u64, radius: i64) -> Result<u64> {
        let data = CoxeterData::uniform(CartanType::A2, p)?;
        let mut total = 0u64;
        for m1 in 0..=radius {
            for m2 in 0..=radius {
                total = total.saturating_add(data.n_lambda_count(&Coweight::new(vec![m1, m2]))?);
            }
        }
        Ok(total)
    }

    pub fn build(p: u64, radius: i64) -> Result<Self> {
        Self::build_with_limit(p, radius, MAX_BALL_VERTICES)
    }

    pub fn build_with_limit(p: u64, radius: i64, limit: u64) -> Result<Self> {
        if !(0..=MAX_BALL_RADIUS).contains(&radius) {
            return Err(Error::SizeGuard(format!("radius {radius} outside 0..={MAX_BALL_RADIUS}")));
        }
        let building = A2Building::new(p)?;
        let predicted = Self::predicted_size(p, radius)?;
        if predicted > limit {
            return Err(Error::SizeGuard(format!("ball p={p} R={radius} has {predicted} vertices (limit {limit})")));
        }
        let base = building.base();
        let bound = Coweight::new(vec![radius, radius]);
        let found = building.box_around(&base, &bound, limit as usize)?;
        let mut vertices = Vec::with_capacity(found.len());
        let mut sigma_base = Vec::with_capacity(found.len());
        for (v, s) in found {
            vertices.push(v);
            sigma_base.push(s);
        }
        let index: HashMap<LatticeClass, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adjacency = Vec::with_capacity(vertices.len());
        for v in &vertices {
            let mut row: Vec<usize> = building.neighbors_of(v)?.iter().filter_map(|y| index.get(y).copied()).collect();
            row.sort_unstable();
            adjacency.push(row);
        }
        Ok(Self { building, radius, vertices, index, sigma_base, adjacency })
    }

    pub fn building(&self) -> &A2Building {
        &self.building
    }

    pub fn p(&self) -> u64 {
        self.building.p()
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn base(&self) -> &LatticeClass {
        &self.vertices[0]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[LatticeClass] {
        &self.vertices
    }

    pub fn index_of(&self, x: &LatticeClass) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &LatticeClass) -> bool {
        self.index.contains_key(x)
    }

    pub fn adjacency(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn sigma_from_base(&self, i: usize) -> &Coweight {
        &self.sigma_base[i]
    }

    pub fn vertex_type(&self, i: usize) -> u8 {
        self.vertices[i].vertex_type(self.building.p)
    }

    /// Vertices of the ball whose every neighbour is also in the ball.
    pub fn is_interior(&self, i: usize) -> bool {
        self.adjacency[i].len() == 2 * self.building.link_size()
    }

    fn require(&self, x: &LatticeClass) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideModel(x.label()))
        }
    }

    /// Finite-network JSON with unit conductances plus vertex types.
    pub fn to_json(&self) -> serde_json::Value {
        let mut edges = Vec::new();
        for (u, row) in self.adjacency.iter().enumerate() {
            for &v in row {
                if u < v {
                    edges.push(serde_json::json!([u, v, 1]));
                }
            }
        }
        let types: Vec<u8> = (0..self.len()).map(|i| self.vertex_type(i)).collect();
        let labels: Vec<String> = self.vertices.iter().map(|v| v.label()).collect();
        serde_json::json!({
            "p": self.p(),
            "radius": self.radius,
            "nodes": (0..self.len()).collect::<Vec<_>>(),
            "labels": labels,
            "types": types,
            "edges": edges,
        })
    }
}

impl BuildingModel for A2Ball {
    type Vertex = LatticeClass;

    fn coxeter(&self) -> &CoxeterData {
        self.building.coxeter()
    }

    fn sigma(&self, x: &LatticeClass, y: &LatticeClass) -> Result<Coweight> {
        self.require(x)?;
        self.require(y)?;
        self.building.sigma(x, y)
    }

    /// Requires the whole sphere inside the ball: either `o` is the base and
    /// `λ ≤ (R, R)`, or `level(σ(base, o)) + level(λ) ≤ R`.
    fn v_lambda(&self, o: &LatticeClass, lambda: &Coweight) -> Result<Vec<LatticeClass>> {
        let i = self.index_of(o).ok_or_else(|| Error::OutsideModel(o.label()))?;
        let bound = Coweight::new(vec![self.radius, self.radius]);
        let fits =
            if i == 0 { lambda.le_coords(&bound) } else { self.sigma_base[i].level() + lambda.level() <= self.radius };
        if !fits {
            return Err(Error::InsufficientDepth(format!(
                "V_{lambda}({o}) may leave the ball of radius {}",
                self.radius
            )));
        }
        if !lambda.is_dominant() {
            return Err(Error::NonDominant(lambda.coords.clone()));
        }
        if i == 0 {
            return Ok((0..self.len())
                .filter(|&j| &self.sigma_base[j] == lambda)
                .map(|j| self.vertices[j].clone())
                .collect());
        }
        let mut out = Vec::new();
        for y in &self.vertices {
            if &self.building.sigma(o, y)? == lambda {
                out.push(y.clone());
            }
        }
        Ok(out)
    }
}

/// A sector segment `(base, tip)` with `σ(base, tip)` regular; it fixes the
/// germ of the sector at `base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorSegment {
    pub base: LatticeClass,
    pub tip: LatticeClass,
}

/// The chamber of `lk o` in which a segment starts: its vertices at
/// `σ = λ₁` and `σ = λ₂` from `o` on geodesics to the tip.
pub fn link_projection(b: &A2Building, seg: &SectorSegment) -> Result<(LatticeClass, LatticeClass)> {
    let s = b.sigma(&seg.base, &seg.tip)?;
    if s.coords.iter().any(|&c| c < 1) {
        return Err(Error::InsufficientDepth(format!("segment σ = {s} is not regular")));
    }
    let pick = |candidates: Vec<LatticeClass>, step: &Coweight| -> Result<LatticeClass> {
        let rest = &s - step;
        let mut hits = Vec::new();
        for y in candidates {
            if b.sigma(&y, &seg.tip)? == rest {
                hits.push(y);
            }
        }
        match hits.len() {
            1 => Ok(hits.pop().unwrap()),
            n => Err(Error::InvalidInput(format!("{n} link vertices toward the tip"))),
        }
    };
    let y1 = pick(b.lambda1_neighbors(&seg.base)?, &Coweight::fundamental(2, 1))?;
    let y2 = pick(b.lambda2_neighbors(&seg.base)?, &Coweight::fundamental(2, 2))?;
    Ok((y1, y2))
}

/// Whether the link projections of two segments based at the same vertex are
/// opposite chambers of the link.
pub fn link_opposition_check(ball: &A2Ball, a: &SectorSegment, b: &SectorSegment) -> Result<bool> {
    if a.base != b.base {
        return Err(Error::InvalidInput("segments must share their base vertex".into()));
    }
    for v in [&a.base, &a.tip, &b.tip] {
        ball.require(v)?;
    }
    let building = ball.building();
    let (a1, a2) = link_projection(building, a)?;
    let (b1, b2) = link_projection(building, b)?;
    Ok(!building.is_adjacent(&a2, &b1)? && !building.is_adjacent(&b2, &a1)?)
}
