//! Finite level quotients `G_n = G / stab_G(n)` acting on the `d^n` leaves of
//! level `n`, and the stabilizer lemmas checked inside them.
//!
//! Leaves are numbered big-endian: `x1 … xn ↦ Σ (x_j − 1) d^(n−j)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use ssg_perm::{normal_closure, Perm, PermGroup, SubgroupHandle};

use crate::catalog::{q_n_generators, SelfSimilarGroup};
use crate::error::{Error, Result};
use crate::recursion::{Element, Vertex, Word};

/// Cosets of `stab(m)` beyond this many are not enumerated.
pub const MAX_COSETS: usize = 100_000;

pub fn leaf_perm(g: &Element, n: usize) -> Perm {
    g.leaf_perm(n)
}

/// `blocks[leaf]` = index of the level-`m` ancestor of a level-`n` leaf.
pub fn ancestor_blocks(d: usize, n: usize, m: usize) -> Vec<u32> {
    let below = d.pow((n - m) as u32);
    (0..d.pow(n as u32)).map(|x| (x / below) as u32).collect()
}

/// `X^n ⋆ (components)` on leaves: block `i` of size `d^(L−n)` is moved by `components[i]`.
pub fn embed_blocks(components: &[Perm], d: usize, n: usize) -> Perm {
    assert_eq!(components.len(), d.pow(n as u32), "one component per level-n vertex");
    let block = components[0].degree();
    let mut images = Vec::with_capacity(block * components.len());
    for (i, c) in components.iter().enumerate() {
        images.extend(c.images().iter().map(|&y| (i * block) as u32 + y));
    }
    Perm::from_images(images).expect("block diagonal")
}

/// `g` placed at position `i` of `X^n ⋆ (−)`, identity elsewhere.
fn embed_at(g: &Perm, i: usize, d: usize, n: usize) -> Perm {
    let id = Perm::identity(g.degree());
    let comps: Vec<Perm> = (0..d.pow(n as u32))
        .map(|j| if j == i { g.clone() } else { id.clone() })
        .collect();
    embed_blocks(&comps, d, n)
}

#[derive(Clone, Debug)]
pub struct LevelQuotient {
    degree: usize,
    level: usize,
    generator_perms: Vec<Perm>,
    group: Arc<PermGroup>,
}

pub fn level_quotient(g: &SelfSimilarGroup, n: usize) -> LevelQuotient {
    let generator_perms: Vec<Perm> = g.generators().iter().map(|e| e.leaf_perm(n)).collect();
    let leaves = g.degree().pow(n as u32);
    let group = PermGroup::new(leaves, generator_perms.clone()).expect("leaf perms share a degree");
    LevelQuotient {
        degree: g.degree(),
        level: n,
        generator_perms,
        group: Arc::new(group),
    }
}

impl LevelQuotient {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn alphabet_size(&self) -> usize {
        self.degree
    }

    pub fn leaves(&self) -> usize {
        self.degree.pow(self.level as u32)
    }

    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    /// Images of the group's generators, in generator order.
    pub fn generator_perms(&self) -> &[Perm] {
        &self.generator_perms
    }

    /// The induced action on level `m ≤ n`.
    pub fn project(&self, m: usize) -> PermGroup {
        let blocks = ancestor_blocks(self.degree, self.level, m);
        self.group
            .block_action(&blocks, self.degree.pow(m as u32))
            .expect("levels are blocks")
    }

    pub fn whole(&self) -> SubgroupHandle {
        SubgroupHandle::whole(self.group.clone())
    }

    pub fn subgroup(&self, gens: Vec<Perm>) -> Result<SubgroupHandle> {
        let group = PermGroup::from_redundant(self.leaves(), gens)?;
        Ok(SubgroupHandle::from_group(self.group.clone(), group)?)
    }
}

/// Image of `stab(m)` in `G_n`: the kernel of the action on level `m`.
pub fn stab_image(q: &LevelQuotient, m: usize) -> SubgroupHandle {
    if m == 0 {
        return q.whole();
    }
    if m >= q.level {
        return SubgroupHandle::trivial(q.group.clone());
    }
    let blocks = ancestor_blocks(q.degree, q.level, m);
    let whole = q.whole();
    whole
        .kernel_of_refinement(&blocks, q.degree.pow(m as u32))
        .expect("levels are blocks")
}

/// Finite-level over-approximation of `rist(v)`: elements fixing every leaf outside `vT`.
pub fn rigid_stab_finite(q: &LevelQuotient, v: &Vertex) -> Result<SubgroupHandle> {
    v.check(q.degree)?;
    if v.level() >= q.level {
        return Err(Error::InvalidParameter(format!(
            "vertex {v} is not above level {}",
            q.level
        )));
    }
    let below = q.degree.pow((q.level - v.level()) as u32);
    let start = v.index(q.degree) * below;
    let outside: Vec<u32> = (0..q.leaves() as u32)
        .filter(|&x| (x as usize) < start || (x as usize) >= start + below)
        .collect();
    let whole = q.whole();
    Ok(whole.pointwise_stabilizer(&outside))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchreierWords {
    pub m: usize,
    pub words: Vec<Word>,
    /// Some Schreier generators were longer than the budget and were left out.
    pub partial: bool,
    pub cosets: usize,
}

/// Schreier generators of `stab(m)` over a breadth-first transversal of `G_m`.
pub fn schreier_level_stabilizer_words(
    g: &SelfSimilarGroup,
    m: usize,
    length_budget: usize,
) -> Result<SchreierWords> {
    let gens = g.generator_words();
    if m == 0 {
        let partial = gens.iter().any(|w| w.len() > length_budget);
        return Ok(SchreierWords {
            m,
            words: gens.into_iter().filter(|w| w.len() <= length_budget).collect(),
            partial,
            cosets: 1,
        });
    }
    let system = g.system();
    let perms: Vec<Perm> = gens.iter().map(|w| system.word_leaf_perm(w, m)).collect();
    let leaves = g.degree().pow(m as u32);
    let mut transversal: HashMap<Perm, Word> = HashMap::new();
    let mut order: Vec<Perm> = Vec::new();
    let identity = Perm::identity(leaves);
    transversal.insert(identity.clone(), Word::empty());
    order.push(identity.clone());
    let mut queue = VecDeque::from([identity]);
    while let Some(q) = queue.pop_front() {
        for (s, w) in perms.iter().zip(&gens) {
            let next = q.compose(s);
            if !transversal.contains_key(&next) {
                if transversal.len() >= MAX_COSETS {
                    return Err(Error::Inconclusive(format!(
                        "more than {MAX_COSETS} cosets of stab({m})"
                    )));
                }
                let word = transversal[&q].concat(w);
                transversal.insert(next.clone(), word);
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    let mut words = Vec::new();
    let mut seen: HashSet<Word> = HashSet::new();
    let mut partial = false;
    for q in &order {
        for (s, w) in perms.iter().zip(&gens) {
            let rep = &transversal[&q.compose(s)];
            let schreier = transversal[q].concat(w).concat(&rep.inverse());
            if schreier.is_empty() || seen.contains(&schreier) || seen.contains(&schreier.inverse()) {
                continue;
            }
            if schreier.len() > length_budget {
                partial = true;
                continue;
            }
            seen.insert(schreier.clone());
            words.push(schreier);
        }
    }
    Ok(SchreierWords {
        m,
        words,
        partial,
        cosets: order.len(),
    })
}

/// Schreier words under the budget ladder 64, 256, 1024.
fn schreier_words_with_fallback(g: &SelfSimilarGroup, m: usize) -> Result<SchreierWords> {
    for budget in [64, 256, 1024] {
        let sw = schreier_level_stabilizer_words(g, m, budget)?;
        if !sw.partial {
            return Ok(sw);
        }
    }
    Err(Error::Inconclusive(format!(
        "Schreier words for stab({m}) exceed length 1024"
    )))
}

/// Image at level `n` of `stab(m)`, generated by Schreier words.
pub fn schreier_stab_image(g: &SelfSimilarGroup, m: usize, n: usize) -> Result<PermGroup> {
    let sw = schreier_words_with_fallback(g, m)?;
    let system = g.system();
    Ok(PermGroup::from_redundant(
        g.degree().pow(n as u32),
        sw.words.iter().map(|w| system.word_leaf_perm(w, n)),
    )?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StabVerdict {
    Equal,
    Unequal { witness: Perm, reason: String },
}

impl StabVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, StabVerdict::Equal)
    }
}

/// Both sides of a stabilizer identity at one finite level, with the verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabCertificate {
    pub lemma: String,
    pub group: String,
    pub m: usize,
    pub n: usize,
    pub level: usize,
    pub ambient_generators: Vec<Perm>,
    pub lhs_generators: Vec<Perm>,
    pub rhs_generators: Vec<Perm>,
    pub lhs_order: String,
    pub rhs_order: String,
    #[serde(flatten)]
    pub verdict: StabVerdict,
}

fn decide(ambient: &PermGroup, lhs: &PermGroup, rhs: &PermGroup) -> StabVerdict {
    let checks: [(&PermGroup, &PermGroup, &str); 4] = [
        (ambient, rhs, "right side leaves the ambient group"),
        (ambient, lhs, "left side leaves the ambient group"),
        (lhs, rhs, "right side element outside left side"),
        (rhs, lhs, "left side element outside right side"),
    ];
    for (big, small, reason) in checks {
        if let Some(w) = big.first_non_member(small) {
            return StabVerdict::Unequal {
                witness: w.clone(),
                reason: reason.to_string(),
            };
        }
    }
    StabVerdict::Equal
}

impl StabCertificate {
    #[allow(clippy::too_many_arguments)]
    fn build(
        lemma: &str,
        group: &str,
        (m, n, level): (usize, usize, usize),
        ambient: &PermGroup,
        lhs: &PermGroup,
        rhs: &PermGroup,
    ) -> Self {
        StabCertificate {
            lemma: lemma.to_string(),
            group: group.to_string(),
            m,
            n,
            level,
            ambient_generators: ambient.generators().to_vec(),
            lhs_generators: lhs.generators().to_vec(),
            rhs_generators: rhs.generators().to_vec(),
            lhs_order: lhs.order().to_string(),
            rhs_order: rhs.order().to_string(),
            verdict: decide(ambient, lhs, rhs),
        }
    }

    /// Recomputes orders and the verdict from the stored generators.
    pub fn replay(&self) -> Result<bool> {
        let degree = self
            .ambient_generators
            .first()
            .map_or(1, |p| p.degree());
        let ambient = PermGroup::new(degree, self.ambient_generators.clone())?;
        let lhs = PermGroup::new(degree, self.lhs_generators.clone())?;
        let rhs = PermGroup::new(degree, self.rhs_generators.clone())?;
        Ok(lhs.order().to_string() == self.lhs_order
            && rhs.order().to_string() == self.rhs_order
            && decide(&ambient, &lhs, &rhs) == self.verdict)
    }
}

/// `stab(m+n) = X^n ⋆ stab(m)` inside `G_L`.
pub fn verify_branching_lemma(
    g: &SelfSimilarGroup,
    m: usize,
    n: usize,
    level: usize,
) -> Result<StabCertificate> {
    if level < m + n {
        return Err(Error::InvalidParameter(format!(
            "level {level} < m + n = {}",
            m + n
        )));
    }
    let d = g.degree();
    let q = level_quotient(g, level);
    let lhs = stab_image(&q, m + n);
    let inner = schreier_stab_image(g, m, level - n)?;
    let rhs_gens = (0..d.pow(n as u32))
        .flat_map(|i| inner.generators().iter().map(move |s| embed_at(s, i, d, n)))
        .collect::<Vec<_>>();
    let rhs = PermGroup::from_redundant(q.leaves(), rhs_gens)?;
    Ok(StabCertificate::build(
        "branching",
        g.name(),
        (m, n, level),
        q.group(),
        lhs.group(),
        &rhs,
    ))
}

/// Level-`L` image of `(X^n ⋆ G) ⋊ Q_n`.
pub fn semidirect_image(g: &SelfSimilarGroup, n: usize, level: usize) -> Result<PermGroup> {
    let d = g.degree();
    let leaves = d.pow(level as u32);
    let mut gens = Vec::new();
    if n == 0 {
        gens.extend(g.generators().iter().map(|e| e.leaf_perm(level)));
    } else {
        let inner: Vec<Perm> = g.generators().iter().map(|e| e.leaf_perm(level - n)).collect();
        for i in 0..d.pow(n as u32) {
            gens.extend(inner.iter().map(|s| embed_at(s, i, d, n)));
        }
        gens.extend(q_n_generators(d, n)?.iter().map(|r| r.leaf_perm(level)));
    }
    Ok(PermGroup::from_redundant(leaves, gens)?)
}

/// `stab_G(k) = stab_{(X^n ⋆ G) ⋊ Q_n}(k)` for `k = n + m`, inside level `L`.
pub fn verify_samestabs(
    g: &SelfSimilarGroup,
    n: usize,
    m: usize,
    level: usize,
) -> Result<StabCertificate> {
    let k = n + m;
    if level < k {
        return Err(Error::InvalidParameter(format!("level {level} < k = {k}")));
    }
    let d = g.degree();
    let big = Arc::new(semidirect_image(g, n, level)?);
    let blocks = ancestor_blocks(d, level, k);
    let rhs = big.kernel_of_block_action(&blocks, d.pow(k as u32))?;
    let q = level_quotient(g, level);
    let lhs = stab_image(&q, k);
    Ok(StabCertificate::build(
        "samestabs",
        g.name(),
        (m, n, level),
        &big,
        lhs.group(),
        &rhs,
    ))
}

/// `ψ_i(g)`: sum of the σ-exponents of the root permutations of `g|_v` over
/// the level-`i` vertices `v`, modulo `d`.
pub fn sigma_signature(g: &Element, i: usize) -> Result<u32> {
    let d = g.system().degree() as u32;
    let portrait = g.portrait(i + 1);
    let mut total = 0u32;
    for v in Vertex::level_vertices(d as usize, i) {
        let label = portrait.label(&v).expect("within depth");
        let e = label.cycle_exponent().ok_or_else(|| Error::NotSylow {
            generator: g.to_string(),
            vertex: v.to_string(),
        })?;
        total = (total + e) % d;
    }
    Ok(total)
}

/// Rank over the field with `p` elements.
pub fn rank_mod_p(rows: &[Vec<u32>], p: u32) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| (x % p) as u64).collect())
        .collect();
    let p = p as u64;
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = mod_pow(m[rank][c], p - 2, p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn signature_ranks(elements: &[Element], d: u32, n_max: usize) -> Result<Vec<usize>> {
    let rows: Vec<Vec<u32>> = elements
        .iter()
        .map(|e| (0..=n_max).map(|i| sigma_signature(e, i)).collect())
        .collect::<Result<_>>()?;
    Ok((0..=n_max)
        .map(|n| {
            let truncated: Vec<Vec<u32>> = rows.iter().map(|r| r[..=n].to_vec()).collect();
            rank_mod_p(&truncated, d)
        })
        .collect())
}

/// For each `n ≤ n_max`, the rank of the generators' signature vectors `(ψ_0, …, ψ_n)`.
pub fn psi_rank_profile(g: &SelfSimilarGroup, n_max: usize) -> Result<Vec<usize>> {
    signature_ranks(&g.generators(), g.degree() as u32, n_max)
}

/// The same profile for the finitary rotor group of depth `n`, computed for each `n ≤ n_max`.
pub fn rotor_psi_rank_profile(d: usize, n_max: usize) -> Result<Vec<usize>> {
    (0..=n_max)
        .map(|n| {
            let rotors = q_n_generators(d, n + 1)?;
            Ok(*signature_ranks(&rotors, d as u32, n)?.last().expect("n + 1 entries"))
        })
        .collect()
}

/// Image of the claimed branching subgroup `K` in `G_L`.
pub fn k_image(g: &SelfSimilarGroup, q: &LevelQuotient) -> Result<PermGroup> {
    let branch = g.branch();
    if branch.commutator_branching {
        // K = G' is the normal closure of the generator commutators
        let gens = q.generator_perms();
        let mut seeds = Vec::new();
        for (i, x) in gens.iter().enumerate() {
            for y in &gens[i + 1..] {
                let c = x.compose(y).compose(&x.inverse()).compose(&y.inverse());
                if !c.is_identity() {
                    seeds.push(c);
                }
            }
        }
        return Ok(normal_closure(q.group(), &seeds));
    }
    if branch.k_generators.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "`{}` has no stored branching subgroup generators",
            g.name()
        )));
    }
    let perms: Vec<Perm> = branch
        .k_generators
        .iter()
        .map(|w| g.system().word_leaf_perm(w, q.level))
        .collect();
    Ok(if branch.k_normal_closure {
        normal_closure(q.group(), &perms)
    } else {
        PermGroup::from_redundant(q.leaves(), perms)?
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KCheck {
    pub m: usize,
    pub level: usize,
    /// `stab(m)` maps into `K` at this level; necessary, not sufficient.
    pub holds: bool,
    pub witness: Option<Perm>,
}

/// For each candidate `m`, whether the image of `stab(m)` in `G_L` lies in the image of `K`.
pub fn find_stab_in_k_level(
    g: &SelfSimilarGroup,
    m_candidates: &[usize],
    level: usize,
) -> Result<Vec<KCheck>> {
    let q = level_quotient(g, level);
    let k = k_image(g, &q)?;
    Ok(m_candidates
        .iter()
        .map(|&m| {
            let stab = stab_image(&q, m);
            let witness = k.first_non_member(stab.group()).cloned();
            KCheck {
                m,
                level,
                holds: witness.is_none(),
                witness,
            }
        })
        .collect())
}

/// Smallest `m ≤ max_m` whose containment holds at every level `m+1 ..= m+window`.
pub fn discover_m(g: &SelfSimilarGroup, max_m: usize, window: usize) -> Result<Option<usize>> {
    for m in 1..=max_m {
        let mut stable = true;
        for level in m + 1..=m + window {
            if !find_stab_in_k_level(g, &[m], level)?[0].holds {
                stable = false;
                break;
            }
        }
        if stable {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// First level `≤ n_max` on which the group is not transitive.
pub fn level_transitivity(g: &SelfSimilarGroup, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|&n| !level_quotient(g, n).group().is_transitive())
}
