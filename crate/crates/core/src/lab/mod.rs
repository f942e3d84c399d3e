//! Finite-level certificates for commensurability constructions: indices,
//! the extension tower, the adding-machine normalizer family and the
//! dihedral group `⟨δ, τ⟩`.

pub mod membership;
pub mod tower;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use ssg_perm::{
    index_p_subgroups, intersection, normalizer, Perm, PermError, PermGroup, SearchBudget,
    SubgroupHandle,
};

use crate::catalog::{builtin, q_n_generators, Params};
use crate::error::{Error, Result};
use crate::recursion::{Element, Portrait};

pub use membership::BranchOracle;
pub use tower::{
    build_extension_tower, find_gamma_outside, replay_tower, GammaWitness, TowerConfig,
    TowerEntry, TowerReport,
};

/// `[A : A∩B]·[B : A∩B]` for two groups acting on the leaves of one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommCertificate {
    pub level: usize,
    pub a_generators: Vec<Perm>,
    pub b_generators: Vec<Perm>,
    pub a_order: String,
    pub b_order: String,
    pub intersection_order: String,
    pub index_in_a: String,
    pub index_in_b: String,
    pub com_index: String,
}

impl CommCertificate {
    pub fn value(&self) -> BigUint {
        self.com_index.parse().expect("decimal")
    }

    /// Recomputes every number from the stored generators.
    pub fn replay(&self, budget: &SearchBudget) -> Result<bool> {
        let degree = leaves_of(&self.a_generators, &self.b_generators);
        let a = PermGroup::new(degree, self.a_generators.clone())?;
        let b = PermGroup::new(degree, self.b_generators.clone())?;
        Ok(com_index_groups(self.level, &a, &b, budget)? == *self)
    }
}

fn leaves_of(a: &[Perm], b: &[Perm]) -> usize {
    a.iter().chain(b).next().map_or(1, Perm::degree)
}

pub fn com_index_groups(
    level: usize,
    a: &PermGroup,
    b: &PermGroup,
    budget: &SearchBudget,
) -> Result<CommCertificate> {
    let both = intersection(a, b, budget)?;
    let (ao, bo, io) = (a.order(), b.order(), both.order());
    let ia = &ao / &io;
    let ib = &bo / &io;
    Ok(CommCertificate {
        level,
        a_generators: a.generators().to_vec(),
        b_generators: b.generators().to_vec(),
        a_order: ao.to_string(),
        b_order: bo.to_string(),
        intersection_order: io.to_string(),
        com_index: (&ia * &ib).to_string(),
        index_in_a: ia.to_string(),
        index_in_b: ib.to_string(),
    })
}

pub fn com_index(
    level: usize,
    a: &SubgroupHandle,
    b: &SubgroupHandle,
    budget: &SearchBudget,
) -> Result<CommCertificate> {
    if !a.same_ambient(b) {
        return Err(Error::InvalidParameter("subgroups of different ambient groups".into()));
    }
    com_index_groups(level, a.group(), b.group(), budget)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    /// `x mod 2^n`.
    pub x: u64,
    pub element: Perm,
    pub involution: bool,
    pub inverts_tau: bool,
    pub extension_order: String,
    pub index_over_a: String,
    pub contains_a: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub level: usize,
    pub tau: Perm,
    pub members: Vec<FamilyMember>,
    /// Distinct residues give distinct elements `τ^x u` and distinct order-2 subgroups `⟨τ^x u⟩`.
    pub pairwise_distinct: bool,
    /// `⟨τ^x u, τ⟩` is the same subgroup for every `x`: integer shifts reach every residue.
    pub extensions_coincide: bool,
    pub passed: bool,
}

/// Checks `τ^x u` for each residue `x` at level `n`, where `u = (u, τ⁻¹u)`.
pub fn adding_machine_family(xs: &[i64], n: usize) -> Result<FamilyReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("level must be at least 2".into()));
    }
    let g = builtin("adding_machine_u", &Params::default())?;
    let tau = g.element("t")?.leaf_perm(n);
    let u = g.element("u")?.leaf_perm(n);
    let modulus = 1i64 << n;
    let a = PermGroup::new(1 << n, vec![tau.clone()])?;
    let a_order = a.order();
    let tau_inv = tau.inverse();
    let mut members: Vec<FamilyMember> = Vec::new();
    let mut extensions: Vec<PermGroup> = Vec::new();
    let mut residues = Vec::new();
    for &x in xs {
        let r = x.rem_euclid(modulus);
        let e = tau.pow(r).compose(&u);
        let ext = PermGroup::new(1 << n, vec![e.clone(), tau.clone()])?;
        let order = ext.order();
        members.push(FamilyMember {
            x: r as u64,
            involution: e.compose(&e).is_identity(),
            inverts_tau: e.compose(&tau).compose(&e) == tau_inv,
            index_over_a: (&order / &a_order).to_string(),
            extension_order: order.to_string(),
            contains_a: ext.contains_group(&a),
            element: e,
        });
        extensions.push(ext);
        residues.push(r);
    }
    let mut pairwise_distinct = true;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if residues[i] != residues[j] && members[i].element == members[j].element {
                pairwise_distinct = false;
            }
        }
    }
    let extensions_coincide = extensions.windows(2).all(|w| w[0].same_elements(&w[1]));
    let expected = (BigUint::from(2u32) << n).to_string();
    let passed = pairwise_distinct
        && members.iter().all(|m| {
            m.involution
                && m.inverts_tau
                && m.contains_a
                && m.index_over_a == "2"
                && m.extension_order == expected
        });
    Ok(FamilyReport {
        level: n,
        tau,
        members,
        pairwise_distinct,
        extensions_coincide,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DihedralReport {
    pub level: usize,
    pub delta_involution: bool,
    pub inverts_tau: bool,
    pub order: String,
    /// Generated by the involutions `δ` and `δτ`, whose product `τ` has order `2^n`.
    pub dihedral_presentation: bool,
    pub index_two_subgroups: usize,
    pub index_two_generators: Vec<Vec<Perm>>,
    /// Order of the normalizer in the full automorphism group of the level-`n` tree, when computed.
    pub normalizer_order: Option<String>,
    pub normalizer_note: Option<String>,
    pub passed: bool,
}

pub fn dihedral_checks(n: usize, budget: &SearchBudget) -> Result<DihedralReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("level must be at least 1".into()));
    }
    let g = builtin("dihedral", &Params::default())?;
    let tau = g.element("t")?.leaf_perm(n);
    let delta = g.element("delta")?.leaf_perm(n);
    let leaves = 1usize << n;
    let h = PermGroup::new(leaves, vec![delta.clone(), tau.clone()])?;
    let order = h.order();
    let delta_involution = delta.compose(&delta).is_identity();
    let inverts_tau = delta.compose(&tau).compose(&delta) == tau.inverse();
    let other = delta.compose(&tau);
    let dihedral_presentation = delta_involution
        && !other.is_identity()
        && other.compose(&other).is_identity()
        && tau.order() == BigUint::one() << n
        && h.same_elements(&PermGroup::new(leaves, vec![delta.clone(), other])?);
    let subs = index_p_subgroups(&h, 2);
    let (normalizer_order, normalizer_note) = if leaves <= budget.normalizer_max_degree {
        let aut: Vec<Perm> = q_n_generators(2, n)?.iter().map(|r| r.leaf_perm(n)).collect();
        let aut = PermGroup::new(leaves, aut)?;
        match normalizer(&aut, &h, budget) {
            Ok(nh) => (Some(nh.order().to_string()), None),
            Err(PermError::Inconclusive { stage }) => (None, Some(format!("inconclusive: {stage}"))),
            Err(e) => return Err(e.into()),
        }
    } else {
        (None, Some(format!("degree {leaves} above the normalizer bound")))
    };
    let expected_subs = if n == 1 { 1 } else { 3 };
    let passed = delta_involution
        && inverts_tau
        && dihedral_presentation == (n >= 2)
        && order == BigUint::one() << if n == 1 { 1 } else { n + 1 }
        && subs.subgroups.len() == expected_subs;
    Ok(DihedralReport {
        level: n,
        delta_involution,
        inverts_tau,
        order: order.to_string(),
        dihedral_presentation,
        index_two_subgroups: subs.subgroups.len(),
        index_two_generators: subs.subgroups.iter().map(|s| s.generators().to_vec()).collect(),
        normalizer_order,
        normalizer_note,
        passed,
    })
}

/// A tree automorphism `c` of level `n` with `c g c⁻¹ = h`, or `None` when
/// either element is not transitive on level `n`.
pub fn conjugate_level_transitive(g: &Element, h: &Element, n: usize) -> Result<Option<Perm>> {
    let d = g.system().degree();
    if h.system().degree() != d {
        return Err(Error::MixedSystems);
    }
    let (pg, ph) = (g.leaf_perm(n), h.leaf_perm(n));
    let leaves = d.pow(n as u32);
    if pg.cycle_type() != vec![leaves] || ph.cycle_type() != vec![leaves] {
        return Ok(None);
    }
    let mut images = vec![0u32; leaves];
    let (mut x, mut y) = (0u32, 0u32);
    for _ in 0..leaves {
        images[x as usize] = y;
        x = pg.image(x);
        y = ph.image(y);
    }
    let c = Perm::from_images(images)?;
    debug_assert!(Portrait::from_leaf_perm(&c, d, n).is_some());
    debug_assert_eq!(c.compose(&pg).compose(&c.inverse()), ph);
    Ok(Some(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::level_quotient;

    #[test]
    fn com_index_of_nested_groups() {
        let g = builtin("grigorchuk", &Params::default()).unwrap();
        let q = level_quotient(&g, 3);
        let whole = q.whole();
        let half = q
            .subgroup(vec![q.generator_perms()[1].clone(), q.generator_perms()[2].clone()])
            .unwrap();
        let c = com_index(3, &whole, &half, &SearchBudget::default()).unwrap();
        assert_eq!(c.index_in_b, "1");
        assert_eq!(c.value(), whole.order() / half.order());
        assert!(c.replay(&SearchBudget::default()).unwrap());
    }

    #[test]
    fn com_index_is_symmetric_and_reflexive() {
        let budget = SearchBudget::default();
        let d = dihedral_checks(3, &budget).unwrap();
        assert_eq!(d.order, "16");
        let ambient = std::sync::Arc::new(
            PermGroup::new(8, d.index_two_generators.concat()).unwrap(),
        );
        let subs: Vec<SubgroupHandle> = d
            .index_two_generators
            .iter()
            .map(|g| SubgroupHandle::new(ambient.clone(), g.clone()).unwrap())
            .collect();
        assert_eq!(subs.len(), 3);
        for a in &subs {
            assert_eq!(com_index(3, a, a, &budget).unwrap().com_index, "1");
        }
        let ab = com_index(3, &subs[0], &subs[1], &budget).unwrap();
        let ba = com_index(3, &subs[1], &subs[0], &budget).unwrap();
        assert_eq!(ab.com_index, "4");
        assert_eq!(ab.intersection_order, "4");
        assert_eq!(ab.com_index, ba.com_index);
    }

    #[test]
    fn adding_machine_family_at_level_four() {
        let r = adding_machine_family(&[0, 1, -1, 5, 17], 4).unwrap();
        assert!(r.passed);
        assert!(r.pairwise_distinct);
        // 17 ≡ 1 mod 16
        assert_eq!(r.members[4].element, r.members[1].element);
        assert!(r.extensions_coincide);
        for m in &r.members {
            assert_eq!(m.extension_order, "32");
            assert_eq!(m.index_over_a, "2");
        }
        let u = &r.members[0].element;
        assert!(u.compose(u).is_identity());
        assert_eq!(u.compose(&r.tau).compose(u), r.tau.inverse());
        assert_eq!(r.tau.cycle_type(), vec![16]);
        assert!(adding_machine_family(&[0], 1).is_err());
    }

    #[test]
    fn dihedral_levels() {
        let budget = SearchBudget::default();
        let one = dihedral_checks(1, &budget).unwrap();
        assert!(one.passed);
        assert_eq!((one.order.as_str(), one.index_two_subgroups), ("2", 1));
        for n in 2..=5 {
            let r = dihedral_checks(n, &budget).unwrap();
            assert!(r.passed, "{n}");
            assert_eq!(r.order, (1u64 << (n + 1)).to_string());
            assert_eq!(r.index_two_subgroups, 3);
            assert!(r.normalizer_order.is_some(), "{n}");
        }
        let delta = builtin("dihedral", &Params::default()).unwrap().element("delta").unwrap();
        assert!(delta.leaf_perm(3).compose(&delta.leaf_perm(3)).is_identity());
    }

    #[test]
    fn conjugating_level_transitive_elements() {
        let am = builtin("adding_machine", &Params::default()).unwrap();
        let t = am.element("t").unwrap();
        let c = conjugate_level_transitive(&t, &t.invert(), 4).unwrap().unwrap();
        assert_eq!(c.compose(&t.leaf_perm(4)).compose(&c.inverse()), t.invert().leaf_perm(4));
        assert!(Portrait::from_leaf_perm(&c, 2, 4).is_some());
        let id = Element::identity(am.system());
        assert_eq!(conjugate_level_transitive(&t, &id, 3).unwrap(), None);
    }
}
