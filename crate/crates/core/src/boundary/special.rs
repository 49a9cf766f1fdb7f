use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::buildings::SphericalA2;
use crate::netwalk::WalkRng;

/// Outcome of the special-subgroup detector for a colouring `π` of the
/// chambers.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialSubgroupReport {
    /// `E = {w : δ(C, D) = w ⇒ π(C) = π(D)}`, as reduced words.
    pub e: Vec<String>,
    /// Generators occurring in reduced words of `E`.
    pub j: Vec<usize>,
    /// `π` is constant on every `J`-residue.
    pub verdict: bool,
    /// `E` is closed under `w = s_i w′ ⇒ s_i, w′ ∈ E`.
    pub splitting_closed: bool,
    /// `E = W_J` as sets.
    pub e_is_parabolic: bool,
}

pub fn special_subgroup_detect(s: &SphericalA2, pi: &[u8]) -> SpecialSubgroupReport {
    let g = s.group();
    let n = g.order();
    let mut separates = vec![false; n];
    for c in s.chambers() {
        for d in s.chambers() {
            if pi[c] != pi[d] {
                separates[s.weyl_distance_index(c, d)] = true;
            }
        }
    }
    let in_e: Vec<bool> = separates.iter().map(|b| !b).collect();
    let members: Vec<usize> = (0..n).filter(|&w| in_e[w]).collect();
    let j: BTreeSet<usize> = members.iter().flat_map(|&w| g.elements()[w].word().to_vec()).collect();
    let j: Vec<usize> = j.into_iter().collect();
    let parabolic: BTreeSet<usize> = g.parabolic(&j).iter().map(|w| g.position(w)).collect();
    let verdict =
        s.chambers().all(|c| s.chambers().all(|d| !parabolic.contains(&s.weyl_distance_index(c, d)) || pi[c] == pi[d]));
    let mut splitting_closed = true;
    for &w in &members {
        let we = &g.elements()[w];
        for i in 1..=g.rank() {
            if g.is_left_descent(we, i) {
                let si = g.generator(i);
                let rest = g.mul(si, we);
                if !in_e[g.position(si)] || !in_e[g.position(&rest)] {
                    splitting_closed = false;
                }
            }
        }
    }
    let e_is_parabolic = members.iter().copied().collect::<BTreeSet<_>>() == parabolic;
    SpecialSubgroupReport {
        e: members.iter().map(|&w| g.elements()[w].word_string()).collect(),
        j,
        verdict,
        splitting_closed,
        e_is_parabolic,
    }
}

fn separates_some_panel(s: &SphericalA2, pi: &[u8], i: usize) -> bool {
    s.chambers().any(|c| s.panel_neighbors(c, i).iter().any(|&d| pi[d] != pi[c]))
}

/// A random `{0,1}`-colouring constant on `J`-residues and, for each
/// `i ∉ J`, non-constant on some `i`-panel.
pub fn random_pi_for_subset(s: &SphericalA2, j: &[usize], rng: &mut WalkRng) -> Vec<u8> {
    let mut residue_of: Vec<Option<usize>> = vec![None; s.num_chambers()];
    let mut count = 0;
    for c in s.chambers() {
        if residue_of[c].is_none() {
            for d in s.residue(c, j) {
                residue_of[d] = Some(count);
            }
            count += 1;
        }
    }
    loop {
        let colours: Vec<u8> = (0..count).map(|_| rng.gen_range(0..2)).collect();
        let pi: Vec<u8> = residue_of.iter().map(|r| colours[r.expect("every chamber has a residue")]).collect();
        if (1..=2).filter(|i| !j.contains(i)).all(|i| separates_some_panel(s, &pi, i)) {
            return pi;
        }
    }
}
