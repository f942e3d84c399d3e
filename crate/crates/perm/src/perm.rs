use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::PermError;

/// A permutation of the points `0..degree`, stored as its image array.
///
/// Composition follows function notation: `p.compose(&q)` applies `q` first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(PermError::NotBijective);
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation from disjoint cycles on `degree` points.
    pub fn from_cycles(degree: usize, cycles: &[&[u32]]) -> Result<Self, PermError> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                let y = cycle[(k + 1) % cycle.len()];
                if x as usize >= degree || y as usize >= degree {
                    return Err(PermError::NotBijective);
                }
                images[x as usize] = y;
            }
        }
        Perm::from_images(images)
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Perm::from_images(images.clone()).is_ok());
        Perm(images)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn image(&self, point: u32) -> u32 {
        self.0[point as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn into_images(self) -> Vec<u32> {
        self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, exp: i64) -> Perm {
        let mut base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// `self^-1 ∘ other ∘ self`.
    pub fn conjugate_by(&self, other: &Perm) -> Perm {
        self.inverse().compose(other).compose(self)
    }

    pub fn first_moved(&self) -> Option<u32> {
        self.0
            .iter()
            .enumerate()
            .find(|&(i, &x)| i as u32 != x)
            .map(|(i, _)| i as u32)
    }

    /// Non-trivial cycles, each starting at its smallest point, sorted.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start as u32];
            seen[start] = true;
            let mut x = self.0[start];
            while x as usize != start {
                seen[x as usize] = true;
                cycle.push(x);
                x = self.0[x as usize];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Sorted multiset of cycle lengths, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.0.len()];
        let mut lens = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.0[x] as usize;
            }
            lens.push(len);
        }
        lens.sort_unstable();
        lens
    }

    pub fn order(&self) -> BigUint {
        self.cycle_type()
            .into_iter()
            .fold(BigUint::from(1u32), |acc, len| lcm(&acc, &BigUint::from(len)))
    }
}

fn lcm(a: &BigUint, b: &BigUint) -> BigUint {
    if a.is_zero() || b.is_zero() {
        return BigUint::zero();
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    a / &x * b
}

impl TryFrom<Vec<u32>> for Perm {
    type Error = PermError;
    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        Perm::from_images(v)
    }
}

impl From<Perm> for Vec<u32> {
    fn from(p: Perm) -> Self {
        p.0
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{}", self)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "(")?;
            for (k, x) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_first() {
        let p = Perm::from_cycles(3, &[&[0, 1]]).unwrap();
        let q = Perm::from_cycles(3, &[&[1, 2]]).unwrap();
        // q sends 1 -> 2, p fixes 2
        assert_eq!(p.compose(&q).image(1), 2);
        assert_eq!(q.compose(&p).image(1), 0);
    }

    #[test]
    fn rejects_non_bijection() {
        assert_eq!(Perm::from_images(vec![0, 0]), Err(PermError::NotBijective));
        assert_eq!(Perm::from_images(vec![0, 2]), Err(PermError::NotBijective));
    }

    #[test]
    fn pow_and_order() {
        let c = Perm::from_cycles(6, &[&[0, 1, 2, 3], &[4, 5]]).unwrap();
        assert_eq!(c.order(), BigUint::from(4u32));
        assert!(c.pow(4).is_identity());
        assert_eq!(c.pow(-1), c.inverse());
        assert_eq!(c.pow(3), c.inverse());
        assert_eq!(c.to_string(), "(0 1 2 3)(4 5)");
    }
}
