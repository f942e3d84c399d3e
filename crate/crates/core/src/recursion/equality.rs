use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{Element, RecursionSystem, Vertex, Word};
use crate::error::Result;

pub const DEFAULT_EQUALITY_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equality {
    /// A finite set of section words, closed under sections, all with trivial
    /// root permutation, contains `g h⁻¹`.
    Equal,
    /// `g` and `h` map this vertex to the same place but their sections there
    /// have different root permutations.
    Distinct(Vertex),
    Unknown,
}

/// Decides `g = h` by closing `{g h⁻¹}` under sections, visiting at most `budget` words.
pub fn equal(g: &Element, h: &Element, budget: usize) -> Result<Equality> {
    let diff = g.multiply(&h.invert())?;
    let system = g.system();
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue: VecDeque<(Word, Vertex)> = VecDeque::new();
    if !diff.word().is_empty() {
        seen.insert(diff.word().clone());
        queue.push_back((diff.word().clone(), Vertex::root()));
    }
    while let Some((w, v)) = queue.pop_front() {
        let dec = system.decompose(&w);
        if !dec.perm.is_identity() {
            // g h⁻¹ fixes v, so g and h agree on u = h⁻¹(v) and
            // (g h⁻¹)|_v = g|_u (h|_u)⁻¹ has a nontrivial root permutation.
            return Ok(Equality::Distinct(h.invert().act(&v)?));
        }
        for (x, s) in dec.sections.iter().enumerate() {
            if s.is_empty() || seen.contains(s) {
                continue;
            }
            if seen.len() >= budget {
                return Ok(Equality::Unknown);
            }
            seen.insert(s.clone());
            queue.push_back((s.clone(), v.child(x as u32)));
        }
    }
    Ok(Equality::Equal)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    Closed(BTreeSet<Word>),
    Overflow,
}

/// Smallest set containing `words` and closed under first-level sections.
pub fn section_closure(system: &RecursionSystem, words: &[Word], budget: usize) -> Closure {
    let mut set: BTreeSet<Word> = BTreeSet::new();
    let mut queue: VecDeque<Word> = VecDeque::new();
    for w in words {
        if set.insert(w.clone()) {
            queue.push_back(w.clone());
        }
    }
    if set.len() > budget {
        return Closure::Overflow;
    }
    while let Some(w) = queue.pop_front() {
        let dec = system.decompose(&w);
        for s in &dec.sections {
            if set.insert(s.clone()) {
                if set.len() > budget {
                    return Closure::Overflow;
                }
                queue.push_back(s.clone());
            }
        }
    }
    Closure::Closed(set)
}

impl Element {
    /// Convenience wrapper around [`equal`] with the default budget.
    pub fn equals(&self, other: &Element) -> Result<Equality> {
        equal(self, other, DEFAULT_EQUALITY_BUDGET)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::sync::Arc;

    fn grig() -> Arc<RecursionSystem> {
        catalog::builtin("grigorchuk", &catalog::Params::default())
            .unwrap()
            .system()
            .clone()
    }

    fn el(s: &Arc<RecursionSystem>, w: &str) -> Element {
        Element::parse(s, w).unwrap()
    }

    #[test]
    fn grigorchuk_relations() {
        let s = grig();
        let e = Element::identity(&s);
        for w in ["b b", "c c", "d d", "a a"] {
            assert_eq!(equal(&el(&s, w), &e, 100).unwrap(), Equality::Equal, "{w}");
        }
        assert_eq!(equal(&el(&s, "b c"), &el(&s, "d"), 100).unwrap(), Equality::Equal);
        assert_eq!(
            equal(&el(&s, "a"), &e, 100).unwrap(),
            Equality::Distinct(Vertex::root())
        );
    }

    #[test]
    fn distinct_witness_differs_below() {
        let s = grig();
        let (g, h) = (el(&s, "b"), el(&s, "c"));
        let Equality::Distinct(v) = equal(&g, &h, 100).unwrap() else {
            panic!("b and c differ");
        };
        let n = v.level() + 1;
        assert_ne!(g.leaf_perm(n), h.leaf_perm(n));
        assert_ne!(
            g.section(&v).unwrap().root_perm(),
            h.section(&v).unwrap().root_perm()
        );
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let odo = catalog::builtin("adding_machine", &catalog::Params::default()).unwrap();
        let t = Element::generator(odo.system(), "t").unwrap();
        // τ² ≠ 1 shows up at level 2, but τ^{2^k} hides until level k+1
        let big = t.pow(1 << 12);
        assert_eq!(
            equal(&big, &Element::identity(odo.system()), 3).unwrap(),
            Equality::Unknown
        );
    }

    #[test]
    fn closures() {
        let s = grig();
        let Closure::Closed(set) = section_closure(&s, &[el(&s, "b").word().clone()], 10) else {
            panic!("overflow");
        };
        let names: BTreeSet<String> = set.iter().map(|w| s.format_word(w)).collect();
        assert_eq!(names, ["a", "b", "c", "d", "e"].iter().map(|x| x.to_string()).collect());
        assert_eq!(
            section_closure(&s, &[Word::empty()], 1),
            Closure::Closed([Word::empty()].into_iter().collect())
        );
        let odo = catalog::builtin("adding_machine", &catalog::Params::default()).unwrap();
        let Closure::Closed(set) =
            section_closure(odo.system(), &[Word::generator(0)], 10)
        else {
            panic!("overflow");
        };
        assert_eq!(set.len(), 2);
        assert_eq!(section_closure(&s, &[el(&s, "b").word().clone()], 3), Closure::Overflow);
    }
}
