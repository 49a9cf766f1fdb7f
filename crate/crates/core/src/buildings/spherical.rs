//! The spherical `A₂` building of a projective plane `PG(2, q)`: chambers
//! are incident point-line flags.

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use crate::coxeter::{enumerate_weyl, CartanType, RootSystem, WeylElement, WeylGroup};
use crate::netwalk::WalkRng;
use crate::{Error, Result};

use super::lattice::is_prime;

pub type Chamber = usize;

#[derive(Debug, Clone)]
pub struct SphericalA2 {
    q: u64,
    points: Vec<[u64; 3]>,
    lines: Vec<[u64; 3]>,
    incident: Vec<Vec<bool>>,
    chambers: Vec<(usize, usize)>,
    chamber_index: HashMap<(usize, usize), Chamber>,
    group: WeylGroup,
    // Positions in `group` of e, s1, s2, s1s2, s2s1, w0.
    named: [usize; 6],
}

fn normalized_vectors(q: u64) -> Vec<[u64; 3]> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            out.push([1, a, b]);
        }
    }
    for b in 0..q {
        out.push([0, 1, b]);
    }
    out.push([0, 0, 1]);
    out
}

impl SphericalA2 {
    /// The flag complex of `PG(2, q)` for a prime `q`.
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) || q > 97 {
            return Err(Error::InvalidInput(format!(
                "projective planes are built over prime fields up to 97, got {q}"
            )));
        }
        let points = normalized_vectors(q);
        let lines = points.clone();
        let incident: Vec<Vec<bool>> = points
            .iter()
            .map(|p| lines.iter().map(|l| (p[0] * l[0] + p[1] * l[1] + p[2] * l[2]) % q == 0).collect())
            .collect();
        let mut chambers = Vec::new();
        for (i, row) in incident.iter().enumerate() {
            for (j, &inc) in row.iter().enumerate() {
                if inc {
                    chambers.push((i, j));
                }
            }
        }
        let chamber_index = chambers.iter().enumerate().map(|(c, &f)| (f, c)).collect();
        let group = enumerate_weyl(&RootSystem::new(CartanType::A2))?;
        let pos = |w: &[usize]| -> Result<usize> { Ok(group.position(&group.from_word(w)?)) };
        let named = [pos(&[])?, pos(&[1])?, pos(&[2])?, pos(&[1, 2])?, pos(&[2, 1])?, pos(&[1, 2, 1])?];
        Ok(Self { q, points, lines, incident, chambers, chamber_index, group, named })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn group(&self) -> &WeylGroup {
        &self.group
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_chambers(&self) -> usize {
        self.chambers.len()
    }

    pub fn chambers(&self) -> std::ops::Range<Chamber> {
        0..self.chambers.len()
    }

    /// `(point, line)` of a chamber.
    pub fn flag(&self, c: Chamber) -> (usize, usize) {
        self.chambers[c]
    }

    pub fn chamber(&self, point: usize, line: usize) -> Option<Chamber> {
        self.chamber_index.get(&(point, line)).copied()
    }

    pub fn is_incident(&self, point: usize, line: usize) -> bool {
        self.incident[point][line]
    }

    pub fn random_chamber(&self, rng: &mut WalkRng) -> Chamber {
        rng.gen_range(0..self.chambers.len())
    }

    fn distance_index(&self, c: Chamber, d: Chamber) -> usize {
        let (p, l) = self.chambers[c];
        let (p2, l2) = self.chambers[d];
        let k = match (p == p2, l == l2) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) if self.incident[p2][l] => 3,
            (false, false) if self.incident[p][l2] => 4,
            _ => 5,
        };
        self.named[k]
    }

    /// `δ(C, D)`: `s₁` changes the point, `s₂` changes the line.
    pub fn weyl_distance(&self, c: Chamber, d: Chamber) -> &WeylElement {
        &self.group.elements()[self.distance_index(c, d)]
    }

    /// Position of `δ(C, D)` in [`SphericalA2::group`].
    pub fn weyl_distance_index(&self, c: Chamber, d: Chamber) -> usize {
        self.distance_index(c, d)
    }

    pub fn gallery_distance(&self, c: Chamber, d: Chamber) -> usize {
        self.weyl_distance(c, d).length()
    }

    pub fn is_opposite(&self, c: Chamber, d: Chamber) -> bool {
        self.distance_index(c, d) == self.named[5]
    }

    /// Chambers adjacent to `c` across its `s_i`-panel (excluding `c`).
    pub fn panel_neighbors(&self, c: Chamber, i: usize) -> Vec<Chamber> {
        let (p, l) = self.chambers[c];
        match i {
            1 => (0..self.points.len())
                .filter(|&p2| p2 != p && self.incident[p2][l])
                .map(|p2| self.chamber_index[&(p2, l)])
                .collect(),
            2 => (0..self.lines.len())
                .filter(|&l2| l2 != l && self.incident[p][l2])
                .map(|l2| self.chamber_index[&(p, l2)])
                .collect(),
            _ => Vec::new(),
        }
    }

    /// The `J`-residue `{D : δ(C, D) ∈ W_J}`.
    pub fn residue(&self, c: Chamber, subset: &[usize]) -> Vec<Chamber> {
        let allowed: Vec<usize> = self.group.parabolic(subset).iter().map(|w| self.group.position(w)).collect();
        self.chambers().filter(|&d| allowed.contains(&self.distance_index(c, d))).collect()
    }

    /// The unique chamber of `residue` closest to `c`.
    pub fn proj_residue(&self, residue: &[Chamber], c: Chamber) -> Result<Chamber> {
        let best = residue.iter().map(|&d| self.gallery_distance(c, d)).min().ok_or(Error::EmptySubset)?;
        let closest: Vec<Chamber> = residue.iter().copied().filter(|&d| self.gallery_distance(c, d) == best).collect();
        match closest.as_slice() {
            [d] => Ok(*d),
            _ => Err(Error::InvalidInput(format!("{} chambers at minimal distance", closest.len()))),
        }
    }

    /// Gallery distance by breadth-first search on the chamber graph.
    pub fn gallery_distance_bfs(&self, c: Chamber, d: Chamber) -> usize {
        let mut dist = vec![usize::MAX; self.chambers.len()];
        dist[c] = 0;
        let mut queue = VecDeque::from([c]);
        while let Some(x) = queue.pop_front() {
            if x == d {
                return dist[x];
            }
            for i in [1, 2] {
                for y in self.panel_neighbors(x, i) {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
        }
        usize::MAX
    }

    /// A chamber opposite both `c` and `c2`. Starting from a chamber opposite
    /// `c`, each round moves inside the `s`-panel (with `ℓ(s·δ) > ℓ(δ)`)
    /// to a chamber other than the current one and the projection of `c`,
    /// lengthening `δ(·, c2)` by one. Returns the chamber and the number of
    /// rounds.
    pub fn opposite_to_both(&self, c: Chamber, c2: Chamber) -> Result<(Chamber, usize)> {
        if self.q < 2 {
            return Err(Error::InvalidInput("the plane is not thick".into()));
        }
        let mut cur = self.chambers().find(|&d| self.is_opposite(c, d)).expect("every chamber has an opposite");
        let w0_len = self.group.longest().length();
        let mut rounds = 0;
        loop {
            let w = self.weyl_distance(cur, c2).clone();
            if w.length() == w0_len {
                return Ok((cur, rounds));
            }
            let s = (1..=2)
                .find(|&i| self.group.mul(self.group.generator(i), &w).length() == w.length() + 1)
                .expect("non-maximal elements have an ascent");
            let mut panel = self.panel_neighbors(cur, s);
            panel.push(cur);
            let avoid = self.proj_residue(&panel, c)?;
            cur = panel
                .into_iter()
                .find(|&d| d != cur && d != avoid)
                .ok_or_else(|| Error::InvalidInput("panel too thin".into()))?;
            rounds += 1;
            if rounds > w0_len {
                return Err(Error::InvalidInput("opposite-chamber search did not terminate".into()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netwalk::RngStream;

    #[test]
    fn counts_and_thickness() {
        for q in [2u64, 3] {
            let s = SphericalA2::new(q).unwrap();
            let n = (q * q + q + 1) as usize;
            assert_eq!(s.num_points(), n);
            assert_eq!(s.num_lines(), n);
            assert_eq!(s.num_chambers(), n * (q as usize + 1));
            for c in s.chambers() {
                assert_eq!(s.panel_neighbors(c, 1).len() + 1, q as usize + 1);
                assert_eq!(s.panel_neighbors(c, 2).len() + 1, q as usize + 1);
            }
        }
        assert!(SphericalA2::new(4).is_err());
    }

    #[test]
    fn weyl_distance_matches_gallery_search() {
        let s = SphericalA2::new(2).unwrap();
        for c in s.chambers() {
            assert!(s.weyl_distance(c, c).is_identity());
            for d in s.chambers() {
                assert_eq!(s.gallery_distance(c, d), s.gallery_distance_bfs(c, d));
                let back = s.weyl_distance(d, c);
                assert_eq!(&s.group().inverse(s.weyl_distance(c, d)), back);
            }
        }
        let (p, l) = s.flag(0);
        let other_point = (0..s.num_points()).find(|&p2| p2 != p && s.is_incident(p2, l)).unwrap();
        let d = s.chamber(other_point, l).unwrap();
        assert_eq!(s.weyl_distance(0, d).word(), &[1]);
    }

    #[test]
    fn residues_and_projections() {
        let s = SphericalA2::new(2).unwrap();
        assert_eq!(s.residue(5, &[]), vec![5]);
        assert_eq!(s.proj_residue(&[5], 5).unwrap(), 5);
        assert_eq!(s.residue(5, &[1]).len(), 3);
        assert_eq!(s.residue(5, &[1, 2]).len(), s.num_chambers());
        for c in s.chambers() {
            for i in [1, 2] {
                let r = s.residue(c, &[i]);
                for d in s.chambers() {
                    let proj = s.proj_residue(&r, d).unwrap();
                    for &e in &r {
                        assert_eq!(s.gallery_distance(d, e), s.gallery_distance(d, proj) + usize::from(e != proj));
                    }
                }
            }
        }
    }

    #[test]
    fn opposite_to_both_exhaustive_small() {
        let s = SphericalA2::new(2).unwrap();
        for c in s.chambers() {
            for d in s.chambers() {
                let (x, rounds) = s.opposite_to_both(c, d).unwrap();
                assert!(rounds <= 3);
                assert!(s.is_opposite(x, c) && s.is_opposite(x, d));
            }
        }
    }

    #[test]
    fn opposite_to_both_random_pg23() {
        let s = SphericalA2::new(3).unwrap();
        let mut rng = RngStream::new(99).rng();
        for _ in 0..200 {
            let c = s.random_chamber(&mut rng);
            let d = s.random_chamber(&mut rng);
            let (x, rounds) = s.opposite_to_both(c, d).unwrap();
            assert!(rounds <= 3);
            assert!(s.is_opposite(x, c) && s.is_opposite(x, d));
        }
    }
}
