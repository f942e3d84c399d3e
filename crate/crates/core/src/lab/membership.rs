//! Membership in deep level quotients of a branch group, decided through
//! `stab(m+1) = X ⋆ stab(m)` rather than a stabilizer chain.
//!
//! For `g` on level `L > m+1`: pick `w ∈ G` agreeing with `g` on level `m+1`;
//! then `g ∈ G_L` exactly when every first-level section of `w⁻¹g` lies in
//! `G_{L−1}`. The work is linear in the number of leaves.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use num_bigint::BigUint;
use ssg_perm::{Perm, PermGroup};

use crate::catalog::SelfSimilarGroup;
use crate::error::{Error, Result};
use crate::quotient::level_quotient;
use crate::recursion::Word;

/// Action of a level-`level` leaf permutation on level `to`.
pub fn project(g: &Perm, d: usize, level: usize, to: usize) -> Perm {
    let block = d.pow((level - to) as u32);
    let images = (0..d.pow(to as u32))
        .map(|b| g.image((b * block) as u32) / block as u32)
        .collect();
    Perm::from_images(images).expect("level-preserving")
}

/// Restriction of `g` to the subtree below first-level vertex `x`; `g` must fix `x`.
pub fn section_perm(g: &Perm, d: usize, level: usize, x: usize) -> Perm {
    let block = d.pow(level as u32 - 1);
    let offset = (x * block) as u32;
    let images = (0..block as u32)
        .map(|i| g.image(offset + i) - offset)
        .collect();
    Perm::from_images(images).expect("fixes the subtree")
}

/// Lifts on bigger levels are recomputed rather than stored.
const LIFT_CACHE_MAX_LEAVES: usize = 4096;

pub struct BranchOracle {
    group: SelfSimilarGroup,
    m: usize,
    /// Every element of `G_{m+1}` with a word realizing it.
    top: HashMap<Perm, Word>,
    lifts: RefCell<HashMap<(usize, Perm), Perm>>,
    small: RefCell<HashMap<usize, Arc<PermGroup>>>,
}

impl BranchOracle {
    /// `m` must satisfy `stab(m+1) = X ⋆ stab(m)`. Fails when `G_{m+1}` has
    /// more than `max_elements` elements.
    pub fn new(group: &SelfSimilarGroup, m: usize, max_elements: usize) -> Result<Self> {
        let gens: Vec<(Perm, Word)> = group
            .generator_words()
            .into_iter()
            .map(|w| (group.system().word_leaf_perm(&w, m + 1), w))
            .collect();
        let identity = Perm::identity(group.degree().pow(m as u32 + 1));
        let mut top = HashMap::from([(identity.clone(), Word::empty())]);
        let mut queue = VecDeque::from([(identity, Word::empty())]);
        while let Some((x, w)) = queue.pop_front() {
            for (s, sw) in &gens {
                let y = s.compose(&x);
                if top.contains_key(&y) {
                    continue;
                }
                if top.len() >= max_elements {
                    return Err(Error::Inconclusive(format!(
                        "level {} quotient has more than {max_elements} elements",
                        m + 1
                    )));
                }
                let yw = sw.concat(&w);
                top.insert(y.clone(), yw.clone());
                queue.push_back((y, yw));
            }
        }
        Ok(BranchOracle {
            group: group.clone(),
            m,
            top,
            lifts: RefCell::new(HashMap::new()),
            small: RefCell::new(HashMap::new()),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn group(&self) -> &SelfSimilarGroup {
        &self.group
    }

    fn small_group(&self, level: usize) -> Arc<PermGroup> {
        self.small
            .borrow_mut()
            .entry(level)
            .or_insert_with(|| level_quotient(&self.group, level).group().clone())
            .clone()
    }

    pub fn contains(&self, g: &Perm, level: usize) -> bool {
        if g.is_identity() {
            return true;
        }
        if level <= self.m + 1 {
            return self.small_group(level).contains(g);
        }
        let d = self.group.degree();
        let x = project(g, d, level, self.m + 1);
        let Some(word) = self.top.get(&x) else {
            return false;
        };
        let lift = if d.pow(level as u32) <= LIFT_CACHE_MAX_LEAVES {
            self.lifts
                .borrow_mut()
                .entry((level, x))
                .or_insert_with(|| self.group.system().word_leaf_perm(word, level))
                .clone()
        } else {
            self.group.system().word_leaf_perm(word, level)
        };
        let rest = lift.inverse().compose(g);
        (0..d).all(|c| self.contains(&section_perm(&rest, d, level, c), level - 1))
    }

    /// `|G_L|`, from `|G_L| = |G_{m+1}|·(|G_{L−1}| / |G_m|)^d`.
    pub fn order(&self, level: usize) -> BigUint {
        if level <= self.m + 1 {
            return self.small_group(level).order();
        }
        let below = self.order(level - 1) / self.small_group(self.m).order();
        BigUint::from(self.top.len()) * below.pow(self.group.degree() as u32)
    }
}

/// Membership in `H`, the preimage of a subgroup `U` of `G_N`.
pub struct SubgroupOracle<'a> {
    base: &'a BranchOracle,
    n: usize,
    u: Option<PermGroup>,
    projected: RefCell<HashMap<usize, Arc<PermGroup>>>,
}

impl<'a> SubgroupOracle<'a> {
    pub fn whole(base: &'a BranchOracle) -> Self {
        SubgroupOracle {
            base,
            n: 0,
            u: None,
            projected: RefCell::new(HashMap::new()),
        }
    }

    pub fn preimage(base: &'a BranchOracle, n: usize, u: PermGroup) -> Self {
        SubgroupOracle {
            base,
            n,
            u: Some(u),
            projected: RefCell::new(HashMap::new()),
        }
    }

    /// Image of `U` on a level `≤ N`.
    fn u_at(&self, u: &PermGroup, level: usize) -> Arc<PermGroup> {
        let d = self.base.group().degree();
        self.projected
            .borrow_mut()
            .entry(level)
            .or_insert_with(|| {
                let gens = u.generators().iter().map(|g| project(g, d, self.n, level));
                Arc::new(PermGroup::from_redundant(d.pow(level as u32), gens).expect("same degree"))
            })
            .clone()
    }

    pub fn contains(&self, g: &Perm, level: usize) -> bool {
        let Some(u) = &self.u else {
            return self.base.contains(g, level);
        };
        let d = self.base.group().degree();
        if level <= self.n {
            return self.u_at(u, level).contains(g);
        }
        u.contains(&project(g, d, level, self.n)) && self.base.contains(g, level)
    }

    /// `[G_L : H_L]`.
    pub fn index(&self, level: usize) -> BigUint {
        let Some(u) = &self.u else {
            return BigUint::from(1u32);
        };
        let at = level.min(self.n);
        self.base.order(at) / self.u_at(u, at).order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, Params};
    use crate::recursion::{Portrait, RootPerm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_automorphism(rng: &mut ChaCha8Rng, d: usize, level: usize) -> Perm {
        let labels = (0..level)
            .map(|l| {
                (0..d.pow(l as u32))
                    .map(|_| {
                        let mut images: Vec<u32> = (0..d as u32).collect();
                        for i in (1..d).rev() {
                            images.swap(i, rng.gen_range(0..=i));
                        }
                        RootPerm::from_zero_based(images).unwrap()
                    })
                    .collect()
            })
            .collect();
        Portrait::from_labels(d, labels).unwrap().to_leaf_perm()
    }

    #[test]
    fn agrees_with_stabilizer_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (name, params, levels) in [
            ("grigorchuk", Params::default(), 5..=7),
            ("gupta_sidki", Params::prime(3), 4..=5),
        ] {
            let g = builtin(name, &params).unwrap();
            let m = if name == "grigorchuk" { 3 } else { 2 };
            let oracle = BranchOracle::new(&g, m, 100_000).unwrap();
            for level in levels {
                let q = level_quotient(&g, level);
                assert_eq!(oracle.order(level), q.group().order(), "{name} {level}");
                let gens = q.generator_perms();
                for trial in 0..40 {
                    let x = if trial % 2 == 0 {
                        random_automorphism(&mut rng, g.degree(), level)
                    } else {
                        (0..12).fold(Perm::identity(q.leaves()), |acc, _| {
                            acc.compose(&gens[rng.gen_range(0..gens.len())])
                        })
                    };
                    assert_eq!(oracle.contains(&x, level), q.group().contains(&x), "{name} {level}");
                }
            }
        }
    }
}
