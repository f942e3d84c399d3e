//! Tree automorphisms as words over finite wreath-recursion systems.
//!
//! A generator `g` is given by its root permutation `π_g` and one section word
//! per letter, so that `g(x w) = π_g(x) g|_x(w)`. Letters are stored 0-based
//! and printed 1-based.

mod equality;
mod file;
mod word;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use ssg_perm::Perm;

use crate::error::{Error, Result};

pub use equality::{equal, section_closure, Closure, Equality, DEFAULT_EQUALITY_BUDGET};
pub use file::{parse_system, serialize_system, GeneratorSpec, SystemFile};
pub use word::{Letter, Word};

/// A permutation of the alphabet, stored 0-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RootPerm(Vec<u32>);

impl RootPerm {
    pub fn identity(d: usize) -> Self {
        RootPerm((0..d as u32).collect())
    }

    /// The cycle `σ = (1 2 … d)`, i.e. `x ↦ x + 1 mod d`.
    pub fn cycle(d: usize) -> Self {
        RootPerm((0..d as u32).map(|x| (x + 1) % d as u32).collect())
    }

    pub fn from_zero_based(images: Vec<u32>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x as usize >= images.len() || std::mem::replace(&mut seen[x as usize], true) {
                return None;
            }
        }
        Some(RootPerm(images))
    }

    pub fn from_one_based(images: &[usize]) -> Option<Self> {
        if images.contains(&0) {
            return None;
        }
        RootPerm::from_zero_based(images.iter().map(|&x| x as u32 - 1).collect())
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x as usize + 1).collect()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, letter: u32) -> u32 {
        self.0[letter as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RootPerm) -> RootPerm {
        RootPerm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> RootPerm {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        RootPerm(inv)
    }

    /// The exponent `e` with `self = σ^e` for `σ = (1 2 … d)`, if any.
    pub fn cycle_exponent(&self) -> Option<u32> {
        let d = self.0.len() as u32;
        let e = self.0[0];
        (0..d).all(|x| self.0[x as usize] == (x + e) % d).then_some(e)
    }
}

impl fmt::Display for RootPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A vertex of the tree: a finite sequence of 0-based letters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
#[serde(into = "Vec<u32>", from = "Vec<u32>")]
pub struct Vertex(Vec<u32>);

impl From<Vertex> for Vec<u32> {
    /// Serialized 1-based.
    fn from(v: Vertex) -> Self {
        v.0.iter().map(|x| x + 1).collect()
    }
}

impl From<Vec<u32>> for Vertex {
    fn from(v: Vec<u32>) -> Self {
        Vertex(v.into_iter().map(|x| x.saturating_sub(1)).collect())
    }
}

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_letters(letters: Vec<u32>) -> Self {
        Vertex(letters)
    }

    /// Parses 1-based digits such as `"12"`, or dot-separated letters for `d > 9`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let bad = || Error::Parse {
            location: format!("vertex {text:?}"),
            message: format!("expected letters in 1..={d}"),
        };
        let letters: Vec<u32> = if text.contains('.') {
            text.split('.')
                .map(|t| t.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if letters.iter().any(|&x| x == 0 || x as usize > d) {
            return Err(bad());
        }
        Ok(Vertex(letters.into_iter().map(|x| x - 1).collect()))
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, letter: u32) -> Vertex {
        let mut v = self.0.clone();
        v.push(letter);
        Vertex(v)
    }

    pub fn concat(&self, other: &Vertex) -> Vertex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Vertex(v)
    }

    pub fn check(&self, d: usize) -> Result<()> {
        match self.0.iter().find(|&&x| x as usize >= d) {
            Some(&letter) => Err(Error::LetterOutOfRange { letter, degree: d }),
            None => Ok(()),
        }
    }

    /// Big-endian lexicographic index: `Σ letter_j · d^(n−j)`.
    pub fn index(&self, d: usize) -> usize {
        self.0.iter().fold(0, |acc, &x| acc * d + x as usize)
    }

    pub fn from_index(mut index: usize, d: usize, level: usize) -> Vertex {
        let mut letters = vec![0u32; level];
        for slot in letters.iter_mut().rev() {
            *slot = (index % d) as u32;
            index /= d;
        }
        Vertex(letters)
    }

    /// All vertices of a level in lexicographic order.
    pub fn level_vertices(d: usize, level: usize) -> impl Iterator<Item = Vertex> {
        (0..d.pow(level as u32)).map(move |i| Vertex::from_index(i, d, level))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        if self.0.iter().all(|&x| x < 9) {
            for x in &self.0 {
                write!(f, "{}", x + 1)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// A generator of a recursion system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub perm: RootPerm,
    pub sections: Vec<Word>,
}

/// Root permutation and first-level sections of a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub perm: RootPerm,
    pub sections: Vec<Word>,
}

static NEXT_SYSTEM_ID: AtomicU64 = AtomicU64::new(1);

/// A finite wreath-recursion presentation over an alphabet of size `d`.
#[derive(Debug)]
pub struct RecursionSystem {
    degree: usize,
    generators: Vec<Generator>,
    id: u64,
    /// Ids of systems whose generators form a prefix of this one.
    ancestors: Vec<u64>,
    decompositions: RwLock<HashMap<Word, Arc<Decomposition>>>,
    leaf_perms: RwLock<HashMap<usize, Arc<Vec<Perm>>>>,
}

impl RecursionSystem {
    pub fn new(degree: usize, generators: Vec<Generator>) -> Result<Arc<Self>> {
        Self::with_ancestors(degree, generators, Vec::new())
    }

    fn with_ancestors(degree: usize, generators: Vec<Generator>, ancestors: Vec<u64>) -> Result<Arc<Self>> {
        if degree < 2 {
            return Err(Error::InvalidParameter(format!("alphabet size {degree} < 2")));
        }
        if generators.is_empty() {
            return Err(Error::InvalidParameter("a system needs at least one generator".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.perm.degree() != degree || g.sections.len() != degree {
                return Err(Error::Parse {
                    location: format!("generators[{i}]"),
                    message: format!("expected {degree} images and {degree} sections"),
                });
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Parse {
                    location: format!("generators[{i}].name"),
                    message: format!("duplicate generator name `{}`", g.name),
                });
            }
            for (j, w) in g.sections.iter().enumerate() {
                if w.letters().iter().any(|l| l.generator as usize >= generators.len()) {
                    return Err(Error::UnknownGenerator {
                        name: "?".into(),
                        location: format!("generators[{i}].sections[{j}]"),
                    });
                }
            }
        }
        Ok(Arc::new(RecursionSystem {
            degree,
            generators,
            id: NEXT_SYSTEM_ID.fetch_add(1, Ordering::Relaxed),
            ancestors,
            decompositions: RwLock::new(HashMap::new()),
            leaf_perms: RwLock::new(HashMap::new()),
        }))
    }

    /// Builds from specs whose section words use generator names.
    pub fn from_specs(degree: usize, specs: &[GeneratorSpec]) -> Result<Arc<Self>> {
        file::build_system(degree, specs, None)
    }

    /// A new system containing these generators followed by `extra`.
    pub fn extend(self: &Arc<Self>, extra: &[GeneratorSpec]) -> Result<Arc<Self>> {
        file::build_system(self.degree, extra, Some(self))
    }

    pub(crate) fn extend_with(self: &Arc<Self>, extra: Vec<Generator>) -> Result<Arc<Self>> {
        let mut gens = self.generators.clone();
        gens.extend(extra);
        let mut ancestors = self.ancestors.clone();
        ancestors.push(self.id);
        Self::with_ancestors(self.degree, gens, ancestors)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_index(&self, name: &str) -> Option<u32> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u32)
    }

    /// True when `other`'s generators are a prefix of ours with the same meaning.
    pub fn extends(&self, other: &RecursionSystem) -> bool {
        self.id == other.id || self.ancestors.contains(&other.id)
    }

    /// Writes a word with generator names, e.g. `a b^-1 c^2`; `e` is the empty word.
    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "e".to_string();
        }
        w.runs()
            .into_iter()
            .map(|(g, e)| {
                let name = &self.generators[g as usize].name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        file::parse_word(text, &|name| self.generator_index(name), "word")
    }

    fn letter_decomposition(&self, l: Letter) -> (RootPerm, Vec<Word>) {
        let g = &self.generators[l.generator as usize];
        if !l.inverse {
            (g.perm.clone(), g.sections.clone())
        } else {
            // g⁻¹|_{π(x)} = (g|_x)⁻¹
            let inv = g.perm.inverse();
            let sections = (0..self.degree as u32)
                .map(|y| g.sections[inv.apply(y) as usize].inverse())
                .collect();
            (inv, sections)
        }
    }

    /// Root permutation and sections of a word, memoized.
    pub fn decompose(&self, w: &Word) -> Arc<Decomposition> {
        if let Some(found) = self.decompositions.read().unwrap().get(w) {
            return found.clone();
        }
        let d = self.degree;
        let parts: Vec<(RootPerm, Vec<Word>)> =
            w.letters().iter().map(|&l| self.letter_decomposition(l)).collect();
        let mut images = vec![0u32; d];
        let mut sections = Vec::with_capacity(d);
        for x in 0..d as u32 {
            let mut y = x;
            let mut pieces: Vec<&Word> = Vec::with_capacity(parts.len());
            for (perm, secs) in parts.iter().rev() {
                pieces.push(&secs[y as usize]);
                y = perm.apply(y);
            }
            images[x as usize] = y;
            let letters = pieces
                .iter()
                .rev()
                .flat_map(|p| p.letters().iter().copied())
                .collect();
            sections.push(Word::new(letters));
        }
        let dec = Arc::new(Decomposition {
            perm: RootPerm(images),
            sections,
        });
        self.decompositions
            .write()
            .unwrap()
            .insert(w.clone(), dec.clone());
        dec
    }

    /// Leaf permutations of every generator at level `n`, in generator order.
    pub fn generator_leaf_perms(&self, n: usize) -> Arc<Vec<Perm>> {
        if let Some(found) = self.leaf_perms.read().unwrap().get(&n) {
            return found.clone();
        }
        let perms = if n == 0 {
            vec![Perm::identity(1); self.generators.len()]
        } else {
            let below = self.generator_leaf_perms(n - 1);
            let inverses: Vec<Perm> = below.iter().map(Perm::inverse).collect();
            let sub = self.degree.pow(n as u32 - 1);
            self.generators
                .iter()
                .map(|g| {
                    let mut images = vec![0u32; sub * self.degree];
                    for x in 0..self.degree {
                        let section = word_perm(&g.sections[x], &below, &inverses, sub);
                        let target = g.perm.apply(x as u32) as usize * sub;
                        for r in 0..sub {
                            images[x * sub + r] = (target + section.image(r as u32) as usize) as u32;
                        }
                    }
                    Perm::from_images(images).expect("tree automorphism")
                })
                .collect()
        };
        let perms = Arc::new(perms);
        self.leaf_perms.write().unwrap().insert(n, perms.clone());
        perms
    }

    /// The action of a word on the `d^n` leaves of level `n`.
    pub fn word_leaf_perm(&self, w: &Word, n: usize) -> Perm {
        let gens = self.generator_leaf_perms(n);
        let inverses: Vec<Perm> = if w.letters().iter().any(|l| l.inverse) {
            gens.iter().map(Perm::inverse).collect()
        } else {
            Vec::new()
        };
        word_perm(w, &gens, &inverses, self.degree.pow(n as u32))
    }
}

fn word_perm(w: &Word, gens: &[Perm], inverses: &[Perm], degree: usize) -> Perm {
    let mut acc = Perm::identity(degree);
    for l in w.letters() {
        let p = if l.inverse {
            &inverses[l.generator as usize]
        } else {
            &gens[l.generator as usize]
        };
        acc = acc.compose(p);
    }
    acc
}

/// A tree automorphism: a word over a shared recursion system.
#[derive(Clone)]
pub struct Element {
    system: Arc<RecursionSystem>,
    word: Word,
}

impl PartialEq for Element {
    /// Word equality within one system; use [`equal`] for group equality.
    fn eq(&self, other: &Self) -> bool {
        self.system.id == other.system.id && self.word == other.word
    }
}

impl Eq for Element {}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({})", self.system.format_word(&self.word))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.system.format_word(&self.word))
    }
}

impl Element {
    pub fn new(system: Arc<RecursionSystem>, word: Word) -> Self {
        Element { system, word }
    }

    pub fn identity(system: &Arc<RecursionSystem>) -> Self {
        Element::new(system.clone(), Word::empty())
    }

    pub fn generator(system: &Arc<RecursionSystem>, name: &str) -> Result<Self> {
        let index = system
            .generator_index(name)
            .ok_or_else(|| Error::UnknownGenerator {
                name: name.to_string(),
                location: "element".into(),
            })?;
        Ok(Element::new(system.clone(), Word::generator(index)))
    }

    pub fn parse(system: &Arc<RecursionSystem>, text: &str) -> Result<Self> {
        Ok(Element::new(system.clone(), system.parse_word(text)?))
    }

    pub fn system(&self) -> &Arc<RecursionSystem> {
        &self.system
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn is_empty_word(&self) -> bool {
        self.word.is_empty()
    }

    pub fn root_perm(&self) -> RootPerm {
        self.system.decompose(&self.word).perm.clone()
    }

    pub fn section(&self, v: &Vertex) -> Result<Element> {
        v.check(self.system.degree)?;
        let mut w = self.word.clone();
        for &x in v.letters() {
            w = self.system.decompose(&w).sections[x as usize].clone();
        }
        Ok(Element::new(self.system.clone(), w))
    }

    pub fn act(&self, v: &Vertex) -> Result<Vertex> {
        v.check(self.system.degree)?;
        let mut w = self.word.clone();
        let mut image = Vec::with_capacity(v.level());
        for &x in v.letters() {
            let dec = self.system.decompose(&w);
            image.push(dec.perm.apply(x));
            w = dec.sections[x as usize].clone();
        }
        Ok(Vertex(image))
    }

    fn check_same(&self, other: &Element) -> Result<()> {
        if self.system.id == other.system.id {
            Ok(())
        } else {
            Err(Error::MixedSystems)
        }
    }

    /// `self · other`: `other` acts first.
    pub fn multiply(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(Element::new(self.system.clone(), self.word.concat(&other.word)))
    }

    pub fn invert(&self) -> Element {
        Element::new(self.system.clone(), self.word.inverse())
    }

    pub fn pow(&self, exponent: i64) -> Element {
        Element::new(self.system.clone(), self.word.pow(exponent))
    }

    /// Re-expresses this element in a system that extends its own.
    pub fn lift(&self, target: &Arc<RecursionSystem>) -> Result<Element> {
        if !target.extends(&self.system) {
            return Err(Error::MixedSystems);
        }
        Ok(Element::new(target.clone(), self.word.clone()))
    }

    pub fn portrait(&self, depth: usize) -> Portrait {
        let d = self.system.degree;
        let mut labels = Vec::with_capacity(depth);
        let mut frontier = vec![self.word.clone()];
        for _ in 0..depth {
            let mut level = Vec::with_capacity(frontier.len());
            let mut next = Vec::with_capacity(frontier.len() * d);
            for w in &frontier {
                let dec = self.system.decompose(w);
                level.push(dec.perm.clone());
                next.extend(dec.sections.iter().cloned());
            }
            labels.push(level);
            frontier = next;
        }
        Portrait { degree: d, labels }
    }

    /// Leaf action at level `n`, leaves indexed lexicographically.
    pub fn leaf_perm(&self, n: usize) -> Perm {
        self.system.word_leaf_perm(&self.word, n)
    }
}

/// Labels `π_{g|_v}` for every vertex `v` above a given depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    degree: usize,
    /// `labels[ℓ][i]` is the label of the `i`-th vertex of level `ℓ`.
    labels: Vec<Vec<RootPerm>>,
}

impl Portrait {
    /// `labels[ℓ]` must hold `d^ℓ` permutations of `d` letters.
    pub fn from_labels(degree: usize, labels: Vec<Vec<RootPerm>>) -> Option<Portrait> {
        let fits = labels.iter().enumerate().all(|(l, level)| {
            level.len() == degree.pow(l as u32) && level.iter().all(|r| r.degree() == degree)
        });
        fits.then_some(Portrait { degree, labels })
    }

    pub fn depth(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: &Vertex) -> Option<&RootPerm> {
        self.labels.get(v.level())?.get(v.index(self.degree))
    }

    pub fn is_trivial(&self) -> bool {
        self.labels.iter().flatten().all(RootPerm::is_identity)
    }

    /// The leaf permutation this portrait determines at its depth.
    pub fn to_leaf_perm(&self) -> Perm {
        let d = self.degree;
        let n = self.depth();
        let images = (0..d.pow(n as u32))
            .map(|leaf| {
                let v = Vertex::from_index(leaf, d, n);
                let mut image = 0usize;
                for l in 0..n {
                    let prefix = Vertex(v.0[..l].to_vec());
                    let y = self.labels[l][prefix.index(d)].apply(v.0[l]);
                    image = image * d + y as usize;
                }
                image as u32
            })
            .collect();
        Perm::from_images(images).expect("portraits give bijections")
    }

    /// Reads the portrait of depth `n` off a leaf permutation of `d^n` points.
    /// Returns `None` if the permutation does not preserve the tree.
    pub fn from_leaf_perm(p: &Perm, d: usize, n: usize) -> Option<Portrait> {
        if p.degree() != d.pow(n as u32) {
            return None;
        }
        let mut labels = Vec::with_capacity(n);
        for l in 0..n {
            let below = d.pow((n - l - 1) as u32);
            let mut level = Vec::with_capacity(d.pow(l as u32));
            for i in 0..d.pow(l as u32) {
                let images: Vec<u32> = (0..d)
                    .map(|x| {
                        let leaf = (i * d + x) * below;
                        ((p.image(leaf as u32) as usize / below) % d) as u32
                    })
                    .collect();
                level.push(RootPerm::from_zero_based(images)?);
            }
            labels.push(level);
        }
        let portrait = Portrait { degree: d, labels };
        (portrait.to_leaf_perm() == *p).then_some(portrait)
    }
}
