use num_bigint::BigUint;
use num_traits::Zero;

use crate::group::is_power_of;
use crate::{Perm, PermGroup};

/// Normal closure of `⟨seeds⟩` under conjugation by the generators of `g`.
pub fn normal_closure(g: &PermGroup, seeds: &[Perm]) -> PermGroup {
    let mut closure = PermGroup::new(g.degree(), seeds.to_vec()).expect("same degree");
    loop {
        let mut extra = Vec::new();
        for c in closure.generators() {
            for x in g.generators() {
                let conj = x.conjugate_by(c);
                if !closure.contains(&conj) && !extra.contains(&conj) {
                    extra.push(conj);
                }
            }
        }
        if extra.is_empty() {
            return closure;
        }
        closure = closure.extended(&extra).expect("same degree");
    }
}

#[derive(Clone, Debug)]
pub struct IndexPSubgroups {
    pub p: u32,
    /// Subgroups of index `p`, one per kernel of an epimorphism onto `C_p`.
    pub subgroups: Vec<PermGroup>,
    /// Rank of `G / G'G^p` over the field with `p` elements.
    pub rank: usize,
    /// True when the list is every index-`p` subgroup (always for `p = 2`);
    /// for odd `p` only the normal ones are listed.
    pub complete: bool,
}

/// Index-`p` subgroups that contain `G'G^p`, i.e. kernels of maps `G → C_p`.
pub fn index_p_subgroups(g: &PermGroup, p: u32) -> IndexPSubgroups {
    let gens = g.generators();
    let mut seeds = Vec::new();
    for (i, x) in gens.iter().enumerate() {
        seeds.push(x.pow(p as i64));
        for y in &gens[i + 1..] {
            // [x, y] = x⁻¹ y⁻¹ x y
            seeds.push(x.inverse().compose(&y.inverse()).compose(x).compose(y));
        }
    }
    let frattini = normal_closure(g, &seeds);

    // basis of G / D from the generators
    let mut basis: Vec<Perm> = Vec::new();
    let mut tower = vec![frattini.clone()];
    for x in gens {
        let top = tower.last().unwrap();
        if !top.contains(x) {
            let next = top.extended(std::slice::from_ref(x)).expect("same degree");
            basis.push(x.clone());
            tower.push(next);
        }
    }
    let rank = basis.len();
    debug_assert!({
        let q = g.order() / frattini.order();
        q == BigUint::from(p).pow(rank as u32) && (rank == 0 || is_power_of(&q, p)) && !q.is_zero()
    });

    let mut subgroups = Vec::new();
    // functionals normalized so the first non-zero coordinate is 1
    for f in normalized_functionals(rank, p) {
        let pivot = f.iter().position(|&c| c != 0).unwrap();
        let mut kernel_gens: Vec<Perm> = frattini.generators().to_vec();
        for j in 0..rank {
            if j == pivot {
                continue;
            }
            let shift = (p - f[j]) % p;
            kernel_gens.push(basis[j].compose(&basis[pivot].pow(shift as i64)));
        }
        subgroups.push(PermGroup::new(g.degree(), kernel_gens).expect("same degree"));
    }
    IndexPSubgroups {
        p,
        subgroups,
        rank,
        complete: p == 2,
    }
}

fn normalized_functionals(rank: usize, p: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for pivot in 0..rank {
        let free = rank - pivot - 1;
        let count = (p as usize).pow(free as u32);
        for mut code in 0..count {
            let mut f = vec![0u32; rank];
            f[pivot] = 1;
            for c in f.iter_mut().skip(pivot + 1) {
                *c = (code % p as usize) as u32;
                code /= p as usize;
            }
            out.push(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(degree: usize, cycles: &[&[u32]]) -> Perm {
        Perm::from_cycles(degree, cycles).unwrap()
    }

    #[test]
    fn dihedral_of_order_sixteen_has_three() {
        let r = p(8, &[&[0, 1, 2, 3, 4, 5, 6, 7]]);
        let s = p(8, &[&[1, 7], &[2, 6], &[3, 5]]);
        let d = PermGroup::new(8, vec![r, s]).unwrap();
        let found = index_p_subgroups(&d, 2);
        assert_eq!(found.rank, 2);
        assert_eq!(found.subgroups.len(), 3);
        for h in &found.subgroups {
            assert_eq!(h.order(), BigUint::from(8u32));
        }
        assert!(!found.subgroups[0].same_elements(&found.subgroups[1]));
        assert!(!found.subgroups[1].same_elements(&found.subgroups[2]));
    }

    #[test]
    fn cyclic_of_prime_order() {
        let c = PermGroup::new(5, vec![p(5, &[&[0, 1, 2, 3, 4]])]).unwrap();
        let found = index_p_subgroups(&c, 5);
        assert_eq!(found.subgroups.len(), 1);
        assert!(found.subgroups[0].order() == BigUint::from(1u32));
        assert!(!found.complete);
    }

    #[test]
    fn perfect_group_has_none() {
        let a5 = PermGroup::new(5, vec![p(5, &[&[0, 1, 2]]), p(5, &[&[0, 1, 2, 3, 4]])]).unwrap();
        assert!(index_p_subgroups(&a5, 2).subgroups.is_empty());
    }

    #[test]
    fn functional_count() {
        assert_eq!(normalized_functionals(2, 2).len(), 3);
        assert_eq!(normalized_functionals(2, 3).len(), 4);
        assert_eq!(normalized_functionals(3, 2).len(), 7);
    }
}
