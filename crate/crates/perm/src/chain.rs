//! Deterministic Schreier–Sims.
//!
//! Base points are taken from an optional prefix and then in natural order
//! (smallest point moved by the new strong generator). Transversals are stored
//! explicitly as inverse coset representatives `w_β = u_β⁻¹`, so sifting is a
//! single composition per level.

use std::collections::HashSet;

use num_bigint::BigUint;

use crate::Perm;

#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub(crate) base: u32,
    /// Indices into `StabChain::gens` of strong generators fixing all earlier base points.
    pub(crate) gens: Vec<usize>,
    pub(crate) orbit: Vec<u32>,
    /// `inv_trans[β] = Some(w)` with `w(β) = base`, for β in the orbit.
    pub(crate) inv_trans: Vec<Option<Perm>>,
    checked: HashSet<(u32, usize)>,
}

impl Level {
    fn new(base: u32, degree: usize) -> Self {
        let mut inv_trans = vec![None; degree];
        inv_trans[base as usize] = Some(Perm::identity(degree));
        Level {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            inv_trans,
            checked: HashSet::new(),
        }
    }

    #[inline]
    pub(crate) fn in_orbit(&self, point: u32) -> bool {
        self.inv_trans[point as usize].is_some()
    }

    pub(crate) fn inv_rep(&self, point: u32) -> Option<&Perm> {
        self.inv_trans[point as usize].as_ref()
    }
}

/// Base and strong generating set for a permutation group.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    pub(crate) gens: Vec<Perm>,
    gens_inv: Vec<Perm>,
    pub(crate) levels: Vec<Level>,
}

impl StabChain {
    /// Builds a chain for `⟨gens⟩`. `base_prefix` points are used first, in
    /// the given order, even when they turn out to be redundant.
    pub fn new(degree: usize, gens: &[Perm], base_prefix: &[u32]) -> Self {
        let mut chain = StabChain {
            degree,
            gens: Vec::new(),
            gens_inv: Vec::new(),
            levels: Vec::new(),
        };
        for &b in base_prefix {
            if chain.levels.iter().all(|l| l.base != b) {
                chain.levels.push(Level::new(b, degree));
            }
        }
        for g in gens {
            chain.add_generator(g);
        }
        chain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn strong_generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Strong generators of the pointwise stabilizer of the first `k` base points.
    pub fn stabilizer_generators(&self, k: usize) -> Vec<Perm> {
        if k == 0 {
            return self.gens.clone();
        }
        match self.levels.get(k) {
            Some(level) => level.gens.iter().map(|&i| self.gens[i].clone()).collect(),
            None => Vec::new(),
        }
    }

    /// Sifts `g` from level `start`. Returns the residue and the index of the
    /// level where sifting stopped (`levels.len()` when it passed every level).
    pub(crate) fn sift_from(&self, g: &Perm, start: usize) -> (Perm, usize) {
        let mut h = g.clone();
        for (i, level) in self.levels.iter().enumerate().skip(start) {
            let beta = h.image(level.base);
            match level.inv_rep(beta) {
                Some(w) => {
                    if beta != level.base {
                        h = w.compose(&h);
                    }
                }
                None => return (h, i),
            }
        }
        (h, self.levels.len())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.degree {
            return false;
        }
        let (residue, j) = self.sift_from(g, 0);
        j == self.levels.len() && residue.is_identity()
    }

    /// Adds `g` to the group and restores the chain invariants.
    pub fn add_generator(&mut self, g: &Perm) {
        assert_eq!(g.degree(), self.degree, "degree mismatch");
        if g.is_identity() || self.contains(g) {
            return;
        }
        let j = self
            .levels
            .iter()
            .position(|l| g.image(l.base) != l.base)
            .unwrap_or(self.levels.len());
        self.insert_strong(g.clone(), 0, j);
        self.complete();
    }

    /// Registers a strong generator fixing the bases of all levels `< upto`.
    /// It joins the generating sets of levels `from..=upto`; `upto == len`
    /// opens a new level at its smallest moved point.
    fn insert_strong(&mut self, g: Perm, from: usize, upto: usize) {
        if upto == self.levels.len() {
            let b = g.first_moved().expect("identity is never a strong generator");
            self.levels.push(Level::new(b, self.degree));
        }
        let idx = self.gens.len();
        self.gens_inv.push(g.inverse());
        self.gens.push(g);
        for l in from..=upto {
            self.levels[l].gens.push(idx);
            self.extend_orbit(l);
        }
    }

    fn extend_orbit(&mut self, i: usize) {
        let gens = self.levels[i].gens.clone();
        let mut pos = 0;
        while pos < self.levels[i].orbit.len() {
            let beta = self.levels[i].orbit[pos];
            for &s in &gens {
                let gamma = self.gens[s].image(beta);
                if !self.levels[i].in_orbit(gamma) {
                    // w_γ = w_β ∘ s⁻¹
                    let w = self.levels[i].inv_trans[beta as usize]
                        .as_ref()
                        .unwrap()
                        .compose(&self.gens_inv[s]);
                    self.levels[i].inv_trans[gamma as usize] = Some(w);
                    self.levels[i].orbit.push(gamma);
                }
            }
            pos += 1;
        }
    }

    /// Schreier generator `u_{sβ}⁻¹ ∘ s ∘ u_β`, computed without inverting by
    /// `h(w_β(y)) = w_{sβ}(s(y))`.
    fn schreier_generator(&self, i: usize, beta: u32, s: usize) -> Perm {
        let level = &self.levels[i];
        let sg = &self.gens[s];
        let w_beta = level.inv_rep(beta).unwrap();
        let w_sbeta = level.inv_rep(sg.image(beta)).unwrap();
        let mut images = vec![0u32; self.degree];
        for y in 0..self.degree as u32 {
            images[w_beta.image(y) as usize] = w_sbeta.image(sg.image(y));
        }
        Perm::from_images_unchecked(images)
    }

    /// Finds a Schreier generator at level `i` that does not sift through the
    /// levels below.
    fn failing_schreier_generator(&mut self, i: usize) -> Option<(Perm, usize)> {
        let mut pos = 0;
        while pos < self.levels[i].orbit.len() {
            let beta = self.levels[i].orbit[pos];
            for gi in 0..self.levels[i].gens.len() {
                let s = self.levels[i].gens[gi];
                if self.levels[i].checked.contains(&(beta, s)) {
                    continue;
                }
                let h = self.schreier_generator(i, beta, s);
                if !h.is_identity() {
                    let (residue, j) = self.sift_from(&h, i + 1);
                    if j < self.levels.len() || !residue.is_identity() {
                        return Some((residue, j));
                    }
                }
                self.levels[i].checked.insert((beta, s));
            }
            pos += 1;
        }
        None
    }

    fn complete(&mut self) {
        let mut i = self.levels.len();
        while i > 0 {
            let idx = i - 1;
            match self.failing_schreier_generator(idx) {
                Some((residue, j)) => {
                    self.insert_strong(residue, idx + 1, j);
                    i = j + 1;
                }
                None => i -= 1,
            }
        }
    }

    /// Forward coset representative `u_β` at level `i`.
    pub(crate) fn rep(&self, i: usize, beta: u32) -> Option<Perm> {
        self.levels[i].inv_rep(beta).map(Perm::inverse)
    }

    /// Visits every group element exactly once, as `u_1 ∘ u_2 ∘ … ∘ u_k`.
    /// Stops early when `visit` returns `false`.
    pub fn for_each_element(&self, mut visit: impl FnMut(&Perm) -> bool) {
        let reps: Vec<Vec<Perm>> = (0..self.levels.len())
            .map(|i| {
                self.levels[i]
                    .orbit
                    .iter()
                    .map(|&b| self.rep(i, b).unwrap())
                    .collect()
            })
            .collect();
        fn go(
            reps: &[Vec<Perm>],
            depth: usize,
            acc: &Perm,
            visit: &mut dyn FnMut(&Perm) -> bool,
        ) -> bool {
            if depth == reps.len() {
                return visit(acc);
            }
            for u in &reps[depth] {
                if !go(reps, depth + 1, &acc.compose(u), visit) {
                    return false;
                }
            }
            true
        }
        go(&reps, 0, &Perm::identity(self.degree), &mut visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(degree: usize, cycles: &[&[u32]]) -> Perm {
        Perm::from_cycles(degree, cycles).unwrap()
    }

    #[test]
    fn symmetric_group_orders() {
        for n in 2..=7usize {
            let gens = [p(n, &[&[0, 1]]), p(n, &[&(0..n as u32).collect::<Vec<_>>()])];
            let chain = StabChain::new(n, &gens, &[]);
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(chain.order(), BigUint::from(fact));
        }
    }

    #[test]
    fn membership_alternating() {
        let gens = [p(5, &[&[0, 1, 2]]), p(5, &[&[0, 1, 2, 3, 4]])];
        let chain = StabChain::new(5, &gens, &[]);
        assert_eq!(chain.order(), BigUint::from(60u32));
        assert!(chain.contains(&p(5, &[&[0, 1], &[2, 3]])));
        assert!(!chain.contains(&p(5, &[&[0, 1]])));
    }

    #[test]
    fn base_prefix_is_respected() {
        let gens = [p(4, &[&[0, 1, 2, 3]])];
        let chain = StabChain::new(4, &gens, &[3, 2]);
        assert_eq!(&chain.base()[..2], &[3, 2]);
        assert_eq!(chain.order(), BigUint::from(4u32));
        assert!(chain.stabilizer_generators(1).is_empty());
    }

    #[test]
    fn enumeration_visits_order_many() {
        let gens = [p(4, &[&[0, 1]]), p(4, &[&[0, 1, 2, 3]])];
        let chain = StabChain::new(4, &gens, &[]);
        let mut seen = HashSet::new();
        chain.for_each_element(|g| {
            seen.insert(g.clone());
            true
        });
        assert_eq!(seen.len(), 24);
    }
}
