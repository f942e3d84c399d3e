//! Subgroup searches: intersections and normalizers.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::{Perm, PermError, PermGroup, StabChain};

/// Limits for the search routines. Exceeding one yields `PermError::Inconclusive`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Intersections enumerate the smaller group when its order is at most this.
    pub filter_max_order: BigUint,
    /// Node limit for the base-image backtrack.
    pub backtrack_nodes: u64,
    pub normalizer_max_degree: usize,
    /// Candidate limit for normalizer searches.
    pub normalizer_candidates: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            filter_max_order: BigUint::from(1u32 << 20),
            backtrack_nodes: 50_000_000,
            normalizer_max_degree: 64,
            normalizer_candidates: 200_000_000,
        }
    }
}

fn inconclusive(stage: &str) -> PermError {
    PermError::Inconclusive {
        stage: stage.to_string(),
    }
}

/// `A ∩ B` for groups on the same points.
pub fn intersection(a: &PermGroup, b: &PermGroup, budget: &SearchBudget) -> Result<PermGroup, PermError> {
    if a.degree() != b.degree() {
        return Err(PermError::DegreeMismatch {
            expected: a.degree(),
            found: b.degree(),
        });
    }
    if b.contains_group(a) {
        return Ok(a.clone());
    }
    if a.contains_group(b) {
        return Ok(b.clone());
    }
    for (x, y) in [(a, b), (b, a)] {
        if let Some(found) = coset_intersection(x, y) {
            return Ok(found);
        }
    }
    let (small, big) = if a.order() <= b.order() { (a, b) } else { (b, a) };
    if small.order() <= budget.filter_max_order {
        Ok(filter_intersection(small, big))
    } else {
        backtrack_intersection(small, big, budget.backtrack_nodes)
    }
}

/// Cosets of `C` in `B` beyond this many are not enumerated.
const MAX_COSETS: usize = 4096;

/// When `C = ⟨generators of B lying in A⟩` has small index in `B`, then
/// `A ∩ B` is the union of the cosets `tC` with `t ∈ A`.
fn coset_intersection(a: &PermGroup, b: &PermGroup) -> Option<PermGroup> {
    let degree = a.degree();
    let inside: Vec<Perm> = b.generators().iter().filter(|g| a.contains(g)).cloned().collect();
    let c = PermGroup::new(degree, inside.clone()).expect("same degree");
    let index = b.order() / c.order();
    if index > num_bigint::BigUint::from(MAX_COSETS) {
        return None;
    }
    let index = index.to_usize().expect("small");
    let mut reps = vec![Perm::identity(degree)];
    let mut i = 0;
    while i < reps.len() && reps.len() < index {
        for s in b.generators() {
            let x = s.compose(&reps[i]);
            if !reps.iter().any(|r| c.contains(&r.inverse().compose(&x))) {
                reps.push(x);
            }
        }
        i += 1;
    }
    let mut gens = inside;
    gens.extend(reps.into_iter().filter(|t| !t.is_identity() && a.contains(t)));
    Some(PermGroup::from_redundant(degree, gens).expect("same degree"))
}

fn filter_intersection(small: &PermGroup, big: &PermGroup) -> PermGroup {
    let degree = small.degree();
    let mut found = StabChain::new(degree, &[], &[]);
    let mut gens = Vec::new();
    let target = small.order();
    small.for_each_element(|g| {
        if !g.is_identity() && !found.contains(g) && big.contains(g) {
            found.add_generator(g);
            gens.push(g.clone());
        }
        found.order() != target
    });
    PermGroup::new(degree, gens).expect("same degree")
}

/// Walks the elements of `small` through its stabilizer chain, pruning a
/// branch as soon as the fixed base images cannot be completed inside `big`.
fn backtrack_intersection(small: &PermGroup, big: &PermGroup, node_budget: u64) -> Result<PermGroup, PermError> {
    let degree = small.degree();
    let a = small.chain();
    let base = a.base();
    let b = StabChain::new(degree, big.generators(), &base);
    let reps: Vec<Vec<Perm>> = (0..a.levels.len())
        .map(|i| a.levels[i].orbit.iter().map(|&x| a.rep(i, x).unwrap()).collect())
        .collect();

    struct State<'a> {
        base: &'a [u32],
        reps: &'a [Vec<Perm>],
        b: &'a StabChain,
        found: StabChain,
        gens: Vec<Perm>,
        nodes: u64,
        budget: u64,
    }

    fn go(st: &mut State, depth: usize, g: &Perm, z: &Perm) -> Result<(), PermError> {
        st.nodes += 1;
        if st.nodes > st.budget {
            return Err(inconclusive("intersection backtrack"));
        }
        if depth == st.reps.len() {
            if !g.is_identity() && !st.found.contains(g) && st.b.contains(g) {
                st.found.add_generator(g);
                st.gens.push(g.clone());
            }
            return Ok(());
        }
        for u in st.reps[depth].iter() {
            let next = g.compose(u);
            let beta = z.image(next.image(st.base[depth]));
            let level = &st.b.levels[depth];
            if let Some(w) = level.inv_rep(beta) {
                let z_next = w.compose(z);
                go(st, depth + 1, &next, &z_next)?;
            }
        }
        Ok(())
    }

    let mut st = State {
        base: &base,
        reps: &reps,
        b: &b,
        found: StabChain::new(degree, &[], &[]),
        gens: Vec::new(),
        nodes: 0,
        budget: node_budget,
    };
    let id = Perm::identity(degree);
    go(&mut st, 0, &id, &id)?;
    PermGroup::new(degree, st.gens)
}

fn normalizes(g: &Perm, h_group: &PermGroup) -> bool {
    let g_inv = g.inverse();
    h_group
        .generators()
        .iter()
        .all(|h| h_group.contains(&g.compose(h).compose(&g_inv)))
}

/// `N_G(H) = {g ∈ G : gHg⁻¹ = H}`.
///
/// When `H` is transitive every normalizing element is pinned down by the
/// image of point 0 and the images of `H`'s generators, which gives an exact
/// search over `|H|^r · degree` candidates. Otherwise the elements of `G` are
/// filtered directly.
pub fn normalizer(g: &PermGroup, h: &PermGroup, budget: &SearchBudget) -> Result<PermGroup, PermError> {
    if g.degree() != h.degree() {
        return Err(PermError::DegreeMismatch {
            expected: g.degree(),
            found: h.degree(),
        });
    }
    if g.degree() > budget.normalizer_max_degree {
        return Err(inconclusive("normalizer degree bound"));
    }
    if h.is_trivial() || g.generators().iter().all(|x| normalizes(x, h)) {
        return Ok(g.clone());
    }
    if h.is_transitive() {
        transitive_normalizer(g, h, budget)
    } else {
        filtered_normalizer(g, h, budget)
    }
}

fn filtered_normalizer(g: &PermGroup, h: &PermGroup, budget: &SearchBudget) -> Result<PermGroup, PermError> {
    let limit = BigUint::from(budget.normalizer_candidates);
    if g.order() > limit {
        return Err(inconclusive("normalizer enumeration"));
    }
    let mut found = StabChain::new(g.degree(), &[], &[]);
    let mut gens = Vec::new();
    g.for_each_element(|x| {
        if !found.contains(x) && normalizes(x, h) {
            found.add_generator(x);
            gens.push(x.clone());
        }
        true
    });
    PermGroup::new(g.degree(), gens)
}

fn transitive_normalizer(g: &PermGroup, h: &PermGroup, budget: &SearchBudget) -> Result<PermGroup, PermError> {
    let degree = h.degree();
    let hgens = h.generators();
    let r = hgens.len();
    let h_order = h.order().to_u64().ok_or_else(|| inconclusive("normalizer candidates"))?;
    let candidates = (h_order as u128).pow(r as u32) * degree as u128;
    if candidates > budget.normalizer_candidates as u128 {
        return Err(inconclusive("normalizer candidates"));
    }
    let mut elements = Vec::with_capacity(h_order as usize);
    h.for_each_element(|x| {
        elements.push(x.clone());
        true
    });
    // candidate images for each generator: same cycle type
    let options: Vec<Vec<&Perm>> = hgens
        .iter()
        .map(|hg| {
            let ct = hg.cycle_type();
            elements.iter().filter(|k| k.cycle_type() == ct).collect()
        })
        .collect();

    let mut found = StabChain::new(degree, &[], &[]);
    let mut gens = Vec::new();
    let mut choice = vec![0usize; r];
    'tuples: loop {
        let ks: Vec<&Perm> = (0..r).map(|j| options[j][choice[j]]).collect();
        for t in 0..degree as u32 {
            if let Some(x) = solve_conjugator(hgens, &ks, t) {
                if !found.contains(&x) && g.contains(&x) {
                    found.add_generator(&x);
                    gens.push(x);
                }
            }
        }
        // odometer over the choice vector
        let mut j = 0;
        loop {
            if j == r {
                break 'tuples;
            }
            choice[j] += 1;
            if choice[j] < options[j].len() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
    PermGroup::new(degree, gens)
}

/// The unique `x` with `x(0) = t` and `x ∘ h_j = k_j ∘ x`, if it is a bijection.
fn solve_conjugator(hs: &[Perm], ks: &[&Perm], t: u32) -> Option<Perm> {
    let n = hs[0].degree();
    let mut x = vec![u32::MAX; n];
    let mut used = vec![false; n];
    x[0] = t;
    used[t as usize] = true;
    let mut queue = vec![0u32];
    let mut pos = 0;
    while pos < queue.len() {
        let p = queue[pos];
        pos += 1;
        let xp = x[p as usize];
        for (h, k) in hs.iter().zip(ks) {
            let q = h.image(p);
            let xq = k.image(xp);
            if x[q as usize] == u32::MAX {
                if used[xq as usize] {
                    return None;
                }
                x[q as usize] = xq;
                used[xq as usize] = true;
                queue.push(q);
            } else if x[q as usize] != xq {
                return None;
            }
        }
    }
    if queue.len() != n {
        return None;
    }
    Perm::from_images(x).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(degree: usize, cycles: &[&[u32]]) -> Perm {
        Perm::from_cycles(degree, cycles).unwrap()
    }

    fn dihedral16() -> (Perm, Perm, PermGroup) {
        let r = p(8, &[&[0, 1, 2, 3, 4, 5, 6, 7]]);
        let s = p(8, &[&[1, 7], &[2, 6], &[3, 5]]);
        let g = PermGroup::new(8, vec![r.clone(), s.clone()]).unwrap();
        (r, s, g)
    }

    #[test]
    fn intersection_of_dihedral_index_two_subgroups() {
        let (r, s, d) = dihedral16();
        let rot = PermGroup::new(8, vec![r.clone()]).unwrap();
        let dih = PermGroup::new(8, vec![r.pow(2), s.clone()]).unwrap();
        let budget = SearchBudget::default();
        let both = intersection(&rot, &dih, &budget).unwrap();
        assert_eq!(both.order(), BigUint::from(4u32));
        assert!(intersection(&d, &d, &budget).unwrap().same_elements(&d));
        let t = PermGroup::trivial(8);
        assert!(intersection(&d, &t, &budget).unwrap().is_trivial());
    }

    #[test]
    fn coset_method_agrees_with_filter() {
        let (r, s, d) = dihedral16();
        // ⟨r², s r⟩ has index 2 over ⟨r²⟩, which lies in ⟨r⟩
        let rot = PermGroup::new(8, vec![r.clone()]).unwrap();
        let dih = PermGroup::new(8, vec![r.pow(2), s.compose(&r)]).unwrap();
        let by_cosets = coset_intersection(&rot, &dih).unwrap();
        assert!(by_cosets.same_elements(&filter_intersection(&rot, &dih)));
        let mixed = PermGroup::new(8, vec![r.pow(4), s.clone()]).unwrap();
        for (a, b) in [(&mixed, &dih), (&dih, &mixed), (&d, &mixed)] {
            let x = coset_intersection(a, b).unwrap();
            assert!(x.same_elements(&filter_intersection(a, b)));
        }
    }

    #[test]
    fn backtrack_agrees_with_filter() {
        let (r, s, _) = dihedral16();
        let rot = PermGroup::new(8, vec![r.clone()]).unwrap();
        let dih = PermGroup::new(8, vec![r.pow(2), s.compose(&r)]).unwrap();
        let by_filter = filter_intersection(&rot, &dih);
        let by_search = backtrack_intersection(&rot, &dih, 1_000_000).unwrap();
        assert!(by_filter.same_elements(&by_search));
        assert_eq!(by_search.order(), BigUint::from(4u32));
    }

    #[test]
    fn normalizer_of_sylow_two_in_sym4() {
        let sym4 = PermGroup::new(4, vec![p(4, &[&[0, 1]]), p(4, &[&[0, 1, 2, 3]])]).unwrap();
        let d8 = PermGroup::new(4, vec![p(4, &[&[0, 1, 2, 3]]), p(4, &[&[0, 2]])]).unwrap();
        let budget = SearchBudget::default();
        let n = normalizer(&sym4, &d8, &budget).unwrap();
        assert_eq!(n.order(), BigUint::from(8u32));
        assert!(n.same_elements(&d8));
        let whole = normalizer(&sym4, &sym4, &budget).unwrap();
        assert_eq!(whole.order(), BigUint::from(24u32));
        let t = normalizer(&sym4, &PermGroup::trivial(4), &budget).unwrap();
        assert_eq!(t.order(), BigUint::from(24u32));
    }

    #[test]
    fn normalizer_of_intransitive_subgroup() {
        // N_{S4}(⟨(0 1)⟩) = ⟨(0 1), (2 3)⟩
        let sym4 = PermGroup::new(4, vec![p(4, &[&[0, 1]]), p(4, &[&[0, 1, 2, 3]])]).unwrap();
        let h = PermGroup::new(4, vec![p(4, &[&[0, 1]])]).unwrap();
        let n = normalizer(&sym4, &h, &SearchBudget::default()).unwrap();
        assert_eq!(n.order(), BigUint::from(4u32));
    }

    #[test]
    fn normalizer_respects_degree_bound() {
        let budget = SearchBudget {
            normalizer_max_degree: 4,
            ..SearchBudget::default()
        };
        let (_, _, d) = dihedral16();
        let err = normalizer(&d, &d, &budget).unwrap_err();
        assert!(matches!(err, PermError::Inconclusive { .. }));
    }
}
