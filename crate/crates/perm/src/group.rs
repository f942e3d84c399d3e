use std::collections::{HashSet, VecDeque};
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Perm, PermError, StabChain};

/// A permutation group given by generators; its stabilizer chain is built
/// on first use and frozen afterwards.
#[derive(Debug)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    chain: OnceLock<StabChain>,
}

impl Clone for PermGroup {
    fn clone(&self) -> Self {
        let chain = OnceLock::new();
        if let Some(c) = self.chain.get() {
            let _ = chain.set(c.clone());
        }
        PermGroup {
            degree: self.degree,
            gens: self.gens.clone(),
            chain,
        }
    }
}

impl PermGroup {
    /// `⟨gens⟩` on `degree` points. Identity generators are dropped.
    pub fn new(degree: usize, gens: Vec<Perm>) -> Result<Self, PermError> {
        for g in &gens {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let mut kept: Vec<Perm> = Vec::with_capacity(gens.len());
        for g in gens {
            if !g.is_identity() && !kept.contains(&g) {
                kept.push(g);
            }
        }
        Ok(PermGroup {
            degree,
            gens: kept,
            chain: OnceLock::new(),
        })
    }

    /// `⟨gens⟩`, keeping only the generators that enlarge the group built so far.
    pub fn from_redundant(degree: usize, gens: impl IntoIterator<Item = Perm>) -> Result<Self, PermError> {
        let mut chain = StabChain::new(degree, &[], &[]);
        let mut kept = Vec::new();
        for g in gens {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
            if !chain.contains(&g) {
                chain.add_generator(&g);
                kept.push(g);
            }
        }
        let group = PermGroup {
            degree,
            gens: kept,
            chain: OnceLock::new(),
        };
        let _ = group.chain.set(chain);
        Ok(group)
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup {
            degree,
            gens: Vec::new(),
            chain: OnceLock::new(),
        }
    }

    /// Builds the group together with a chain whose base starts with `prefix`.
    pub fn with_base_prefix(degree: usize, gens: Vec<Perm>, prefix: &[u32]) -> Result<Self, PermError> {
        let group = PermGroup::new(degree, gens)?;
        let chain = StabChain::new(degree, &group.gens, prefix);
        let _ = group.chain.set(chain);
        Ok(group)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn chain(&self) -> &StabChain {
        self.chain
            .get_or_init(|| StabChain::new(self.degree, &self.gens, &[]))
    }

    pub fn order(&self) -> BigUint {
        self.chain().order()
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        if p.degree() != self.degree {
            return false;
        }
        if p.is_identity() {
            return true;
        }
        self.chain().contains(p)
    }

    /// True when every generator of `other` lies in `self`.
    pub fn contains_group(&self, other: &PermGroup) -> bool {
        other.degree == self.degree && other.gens.iter().all(|g| self.contains(g))
    }

    /// Equality as sets of permutations.
    pub fn same_elements(&self, other: &PermGroup) -> bool {
        self.degree == other.degree
            && self.order() == other.order()
            && self.contains_group(other)
    }

    /// First generator of `other` that is not in `self`.
    pub fn first_non_member<'a>(&self, other: &'a PermGroup) -> Option<&'a Perm> {
        other.gens.iter().find(|g| !self.contains(g))
    }

    /// Adds generators, keeping the chain when it already exists.
    pub fn extended(&self, extra: &[Perm]) -> Result<PermGroup, PermError> {
        let mut gens = self.gens.clone();
        gens.extend(extra.iter().cloned());
        let group = PermGroup::new(self.degree, gens)?;
        if let Some(c) = self.chain.get() {
            let mut c = c.clone();
            for g in extra {
                c.add_generator(g);
            }
            let _ = group.chain.set(c);
        }
        Ok(group)
    }

    /// Orbits of `⟨gens⟩` on points, each sorted, ordered by smallest point.
    pub fn orbits(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for start in 0..self.degree {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start as u32];
            seen[start] = true;
            let mut pos = 0;
            while pos < orbit.len() {
                let x = orbit[pos];
                for g in &self.gens {
                    let y = g.image(x);
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        orbit.push(y);
                    }
                }
                pos += 1;
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbits().len() == 1
    }

    /// Visits every element; `visit` returning `false` stops the walk.
    pub fn for_each_element(&self, visit: impl FnMut(&Perm) -> bool) {
        self.chain().for_each_element(visit)
    }

    /// Element count by breadth-first closure, independent of the chain.
    /// Returns `None` when the group has more than `limit` elements.
    pub fn closure_order(&self, limit: usize) -> Option<usize> {
        let id = Perm::identity(self.degree);
        let mut seen: HashSet<Perm> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(x) = queue.pop_front() {
            for g in &self.gens {
                let y = g.compose(&x);
                if !seen.contains(&y) {
                    if seen.len() >= limit {
                        return None;
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Some(seen.len())
    }

    /// Pointwise stabilizer of `points`, via a chain whose base lists them first.
    pub fn pointwise_stabilizer(&self, points: &[u32]) -> PermGroup {
        let mut prefix: Vec<u32> = points.to_vec();
        prefix.sort_unstable();
        prefix.dedup();
        if prefix.is_empty() {
            return self.clone();
        }
        let chain = StabChain::new(self.degree, &self.gens, &prefix);
        let gens = chain.stabilizer_generators(prefix.len());
        PermGroup::from_redundant(self.degree, gens).expect("same degree")
    }

    /// Kernel of the action on blocks, where `blocks[x]` is the block of point `x`
    /// and blocks are numbered `0..num_blocks`.
    pub fn kernel_of_block_action(&self, blocks: &[u32], num_blocks: usize) -> Result<PermGroup, PermError> {
        let (combined, _) = self.block_action_lift(blocks, num_blocks)?;
        let prefix: Vec<u32> = (0..num_blocks as u32).collect();
        let chain = StabChain::new(num_blocks + self.degree, &combined, &prefix);
        let kernel_gens: Vec<Perm> = chain
            .stabilizer_generators(num_blocks)
            .iter()
            .map(|g| {
                let images = g.images()[num_blocks..]
                    .iter()
                    .map(|&y| y - num_blocks as u32)
                    .collect();
                Perm::from_images_unchecked(images)
            })
            .collect::<Vec<_>>();
        PermGroup::from_redundant(self.degree, kernel_gens)
    }

    /// Induced action on blocks.
    pub fn block_action(&self, blocks: &[u32], num_blocks: usize) -> Result<PermGroup, PermError> {
        let (_, images) = self.block_action_lift(blocks, num_blocks)?;
        PermGroup::new(num_blocks, images)
    }

    fn block_action_lift(&self, blocks: &[u32], num_blocks: usize) -> Result<(Vec<Perm>, Vec<Perm>), PermError> {
        if blocks.len() != self.degree || blocks.iter().any(|&b| b as usize >= num_blocks) {
            return Err(PermError::InvalidBlocks("block map has wrong length or range".into()));
        }
        let mut combined = Vec::new();
        let mut induced = Vec::new();
        for g in &self.gens {
            let mut on_blocks = vec![u32::MAX; num_blocks];
            for x in 0..self.degree {
                let b = blocks[x] as usize;
                let target = blocks[g.image(x as u32) as usize];
                if on_blocks[b] == u32::MAX {
                    on_blocks[b] = target;
                } else if on_blocks[b] != target {
                    return Err(PermError::InvalidBlocks(format!(
                        "generator {g} splits block {b}"
                    )));
                }
            }
            if on_blocks.contains(&u32::MAX) {
                return Err(PermError::InvalidBlocks("empty block".into()));
            }
            let induced_perm = Perm::from_images(on_blocks.clone())
                .map_err(|_| PermError::InvalidBlocks("induced map is not bijective".into()))?;
            let mut images = on_blocks;
            images.extend(g.images().iter().map(|&y| y + num_blocks as u32));
            combined.push(Perm::from_images_unchecked(images));
            induced.push(induced_perm);
        }
        Ok((combined, induced))
    }
}

/// `[G : H]` for `H ≤ G`, checked by generator membership.
pub fn index(h: &PermGroup, g: &PermGroup) -> Result<BigUint, PermError> {
    if let Some(bad) = g.first_non_member(h) {
        return Err(PermError::NotSubgroup(bad.to_string()));
    }
    let (go, ho) = (g.order(), h.order());
    debug_assert!((&go % &ho).is_zero());
    Ok(go / ho)
}

/// A subgroup of a fixed ambient group.
#[derive(Clone, Debug)]
pub struct SubgroupHandle {
    ambient: Arc<PermGroup>,
    group: PermGroup,
}

impl SubgroupHandle {
    pub fn new(ambient: Arc<PermGroup>, gens: Vec<Perm>) -> Result<Self, PermError> {
        let group = PermGroup::new(ambient.degree(), gens)?;
        SubgroupHandle::from_group(ambient, group)
    }

    pub fn from_group(ambient: Arc<PermGroup>, group: PermGroup) -> Result<Self, PermError> {
        if group.degree() != ambient.degree() {
            return Err(PermError::DegreeMismatch {
                expected: ambient.degree(),
                found: group.degree(),
            });
        }
        if let Some(bad) = ambient.first_non_member(&group) {
            return Err(PermError::NotSubgroup(bad.to_string()));
        }
        Ok(SubgroupHandle { ambient, group })
    }

    pub fn whole(ambient: Arc<PermGroup>) -> Self {
        let group = (*ambient).clone();
        SubgroupHandle { ambient, group }
    }

    pub fn trivial(ambient: Arc<PermGroup>) -> Self {
        let group = PermGroup::trivial(ambient.degree());
        SubgroupHandle { ambient, group }
    }

    pub fn ambient(&self) -> &Arc<PermGroup> {
        &self.ambient
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn generators(&self) -> &[Perm] {
        self.group.generators()
    }

    pub fn order(&self) -> BigUint {
        self.group.order()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.group.contains(p)
    }

    /// `[ambient : self]`.
    pub fn index(&self) -> BigUint {
        self.ambient.order() / self.order()
    }

    pub fn same_ambient(&self, other: &SubgroupHandle) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient)
            || (self.ambient.degree() == other.ambient.degree()
                && self.ambient.same_elements(&other.ambient))
    }

    pub fn is_subgroup_of(&self, other: &SubgroupHandle) -> bool {
        other.group.contains_group(&self.group)
    }

    pub fn same_elements(&self, other: &SubgroupHandle) -> bool {
        self.group.same_elements(&other.group)
    }

    /// Kernel of the action on blocks, as a subgroup of this subgroup's ambient.
    pub fn kernel_of_refinement(&self, blocks: &[u32], num_blocks: usize) -> Result<SubgroupHandle, PermError> {
        let kernel = self.group.kernel_of_block_action(blocks, num_blocks)?;
        Ok(SubgroupHandle {
            ambient: self.ambient.clone(),
            group: kernel,
        })
    }

    pub fn pointwise_stabilizer(&self, points: &[u32]) -> SubgroupHandle {
        SubgroupHandle {
            ambient: self.ambient.clone(),
            group: self.group.pointwise_stabilizer(points),
        }
    }
}

/// `|G| = |kernel| · |image|` for a block action, used as a consistency check.
pub fn block_orders_consistent(g: &PermGroup, blocks: &[u32], num_blocks: usize) -> Result<bool, PermError> {
    let kernel = g.kernel_of_block_action(blocks, num_blocks)?;
    let image = g.block_action(blocks, num_blocks)?;
    Ok(g.order() == kernel.order() * image.order())
}

pub(crate) fn is_power_of(n: &BigUint, p: u32) -> bool {
    let mut n = n.clone();
    let p = BigUint::from(p);
    while !n.is_one() {
        if !(&n % &p).is_zero() {
            return false;
        }
        n /= &p;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(degree: usize, cycles: &[&[u32]]) -> Perm {
        Perm::from_cycles(degree, cycles).unwrap()
    }

    fn dihedral16() -> PermGroup {
        let r = p(8, &[&[0, 1, 2, 3, 4, 5, 6, 7]]);
        let s = p(8, &[&[1, 7], &[2, 6], &[3, 5]]);
        PermGroup::new(8, vec![r, s]).unwrap()
    }

    #[test]
    fn trivial_and_transposition() {
        assert_eq!(PermGroup::new(3, vec![]).unwrap().order(), BigUint::from(1u32));
        let g = PermGroup::new(2, vec![p(2, &[&[0, 1]])]).unwrap();
        assert_eq!(g.order(), BigUint::from(2u32));
        let t = PermGroup::trivial(2);
        assert_eq!(index(&t, &g).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let d = dihedral16();
        let r = d.generators()[0].clone();
        let s = d.generators()[1].clone();
        let g = PermGroup::from_redundant(8, vec![r.pow(2), r.clone(), r.pow(3), s.clone(), r.compose(&s)]).unwrap();
        assert_eq!(g.generators().len(), 3);
        assert_eq!(g.order(), BigUint::from(16u32));
        assert!(g.same_elements(&d));
    }

    #[test]
    fn degree_mismatch_is_reported() {
        let err = PermGroup::new(3, vec![p(2, &[&[0, 1]])]).unwrap_err();
        assert!(matches!(err, PermError::DegreeMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn index_rejects_non_subgroups() {
        let g = PermGroup::new(3, vec![p(3, &[&[0, 1, 2]])]).unwrap();
        let h = PermGroup::new(3, vec![p(3, &[&[0, 1]])]).unwrap();
        assert!(matches!(index(&h, &g), Err(PermError::NotSubgroup(_))));
    }

    #[test]
    fn closure_matches_chain() {
        let d = dihedral16();
        assert_eq!(d.closure_order(100), Some(16));
        assert_eq!(d.order(), BigUint::from(16u32));
        assert_eq!(d.closure_order(10), None);
    }

    #[test]
    fn pointwise_stabilizers() {
        let d = dihedral16();
        assert!(d.pointwise_stabilizer(&[]).same_elements(&d));
        assert_eq!(d.pointwise_stabilizer(&(0..8).collect::<Vec<_>>()).order(), BigUint::one());
        assert_eq!(d.pointwise_stabilizer(&[0]).order(), BigUint::from(2u32));
        assert_eq!(d.pointwise_stabilizer(&[2]).order(), BigUint::from(2u32));
    }

    #[test]
    fn block_kernel_of_dihedral() {
        // blocks {0,4},{1,5},{2,6},{3,7}; kernel of the action is ⟨r^4⟩
        let d = dihedral16();
        let blocks: Vec<u32> = (0..8).map(|x| x % 4).collect();
        let k = d.kernel_of_block_action(&blocks, 4).unwrap();
        assert_eq!(k.order(), BigUint::from(2u32));
        assert!(block_orders_consistent(&d, &blocks, 4).unwrap());
        let bad: Vec<u32> = (0..8).map(|x| x / 4).collect();
        assert!(matches!(
            d.kernel_of_block_action(&bad, 2),
            Err(PermError::InvalidBlocks(_))
        ));
    }

    #[test]
    fn power_check() {
        assert!(is_power_of(&BigUint::from(81u32), 3));
        assert!(!is_power_of(&BigUint::from(12u32), 2));
    }
}
