//! Infinitely many index-`p` extensions `H̃_i ⊃ H` leaving `G`, built one
//! at a time and certified on finite levels.
//!
//! `γ_i` is taken in `X^{n_{i−1}} ⋆ G`, so `⟨G, γ_i⟩` lies in
//! `(X^{n_{i−1}} ⋆ G) ⋊ Q_{n_{i−1}}` and its stabilizer of level
//! `M = n_{i−1} + m` equals `stab_G(M)` once `stab(m+1) = X ⋆ stab(m)`.
//! Subgroups between `H` and `⟨H, γ_i⟩` then correspond to subgroups of the
//! level-`M` image, so an index-`p` extension found on level `M` is a genuine
//! one.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use ssg_perm::{index_p_subgroups, Perm, PermGroup, SearchBudget};

use super::membership::{BranchOracle, SubgroupOracle};
use super::{com_index_groups, CommCertificate};
use crate::catalog::{builtin, x_star, Params, SelfSimilarGroup};
use crate::error::{Error, Result};
use crate::quotient::{discover_m, embed_blocks, level_quotient};
use crate::recursion::{Element, Letter, Vertex, Word};

/// A nontrivial element of `X^n ⋆ G` whose level-`L` image is outside `G_L`.
#[derive(Clone, Debug)]
pub struct GammaWitness {
    pub depth: usize,
    pub level: usize,
    pub components: Vec<Word>,
    pub element: Element,
    pub perm: Perm,
    pub candidates_tested: usize,
}

/// Freely reduced words over generators and inverses in breadth-first order,
/// skipping words whose level-`level` action repeats an earlier one.
struct WordPool<'a> {
    group: &'a SelfSimilarGroup,
    level: usize,
    letters: Vec<Letter>,
    by_len: Vec<Vec<(Word, Perm)>>,
    seen: HashSet<Perm>,
}

impl<'a> WordPool<'a> {
    fn new(group: &'a SelfSimilarGroup, level: usize) -> Self {
        let gens = group.generator_indices();
        let letters = gens
            .iter()
            .map(|&g| Letter::new(g, false))
            .chain(gens.iter().map(|&g| Letter::new(g, true)))
            .collect();
        let identity = Perm::identity(group.degree().pow(level as u32));
        WordPool {
            group,
            level,
            letters,
            by_len: vec![vec![(Word::empty(), identity.clone())]],
            seen: HashSet::from([identity]),
        }
    }

    /// Grows the pool through length `len`; false once the level quotient is exhausted.
    fn fill(&mut self, len: usize) -> bool {
        while self.by_len.len() <= len {
            let prev = self.by_len.last().expect("length 0 present");
            if prev.is_empty() {
                return false;
            }
            let mut next = Vec::new();
            for (w, _) in prev {
                for &l in &self.letters {
                    if w.letters().last() == Some(&l.inverted()) {
                        continue;
                    }
                    let mut letters = w.letters().to_vec();
                    letters.push(l);
                    let word = Word::new(letters);
                    let perm = self.group.system().word_leaf_perm(&word, self.level);
                    if self.seen.insert(perm.clone()) {
                        next.push((word, perm));
                    }
                }
            }
            self.by_len.push(next);
        }
        true
    }

    fn get(&self, len: usize) -> &[(Word, Perm)] {
        self.by_len.get(len).map_or(&[], Vec::as_slice)
    }
}

/// `(position, length, index)` of one nonidentity entry of a tuple.
type Pick = (usize, usize, usize);

/// Tuples with total word length `total`, as `(position, length, index)` for
/// the nonidentity entries: earliest position first, longer words first.
fn visit_sparse(
    pool: &WordPool,
    positions: usize,
    start: usize,
    remaining: usize,
    prefix: &mut Vec<Pick>,
    visit: &mut dyn FnMut(&[Pick]) -> bool,
) -> bool {
    if remaining == 0 {
        return visit(prefix);
    }
    for pos in start..positions {
        for len in (1..=remaining).rev() {
            for i in 0..pool.get(len).len() {
                prefix.push((pos, len, i));
                let stop = visit_sparse(pool, positions, pos + 1, remaining - len, prefix, visit);
                prefix.pop();
                if stop {
                    return true;
                }
            }
        }
    }
    false
}

const MAX_GAMMA_LENGTH: usize = 8;

/// First tuple in search order whose `X^depth ⋆` image at `level` passes `accept`.
fn search_gamma(
    g: &SelfSimilarGroup,
    depth: usize,
    level: usize,
    budget: usize,
    tested: &mut usize,
    accept: &mut dyn FnMut(&Perm) -> bool,
) -> Result<Option<(Vec<Word>, Perm)>> {
    if depth == 0 || level <= depth {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ depth < level, got depth {depth}, level {level}"
        )));
    }
    let d = g.degree();
    let positions = d.pow(depth as u32);
    let mut pool = WordPool::new(g, level - depth);
    let identity = Perm::identity(d.pow((level - depth) as u32));
    for total in 1..=MAX_GAMMA_LENGTH {
        pool.fill(total);
        let mut found = None;
        visit_sparse(&pool, positions, 0, total, &mut Vec::new(), &mut |tuple| {
            *tested += 1;
            let mut comps = vec![identity.clone(); positions];
            for &(pos, len, i) in tuple {
                comps[pos] = pool.get(len)[i].1.clone();
            }
            let perm = embed_blocks(&comps, d, depth);
            if accept(&perm) {
                let mut words = vec![Word::empty(); positions];
                for &(pos, len, i) in tuple {
                    words[pos] = pool.get(len)[i].0.clone();
                }
                found = Some((words, perm));
                return true;
            }
            *tested >= budget
        });
        if found.is_some() || *tested >= budget {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Searches `X^depth ⋆ G` for an element whose image at `level` is not in `G_level`.
pub fn find_gamma_outside(
    g: &SelfSimilarGroup,
    depth: usize,
    level: usize,
    budget: usize,
) -> Result<GammaWitness> {
    let target = level_quotient(g, level);
    let mut tested = 0;
    let found = search_gamma(g, depth, level, budget, &mut tested, &mut |perm| {
        !target.group().contains(perm)
    })?;
    let (components, perm) = found.ok_or_else(|| {
        Error::Inconclusive(format!(
            "no element of X^{depth} ⋆ G outside G at level {level} among {tested} candidates"
        ))
    })?;
    let elements: Vec<Element> = components
        .iter()
        .map(|w| Element::new(g.system().clone(), w.clone()))
        .collect();
    Ok(GammaWitness {
        depth,
        level,
        element: x_star(&elements, depth)?,
        components,
        perm,
        candidates_tested: tested,
    })
}

/// A straight-line program over the generators `h1, h2, …` of `H` and `γ`.
/// Iterated commutators double in length at each step, so `h̃` is kept in this form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    /// Generator `h_{i+1}` of `H`.
    H(usize),
    Gamma,
    Product(usize, usize),
    /// `[x, y] = x y x⁻¹ y⁻¹`.
    Commutator(usize, usize),
    Power(usize, u32),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    /// Each line refers only to earlier lines; the last line is the result.
    pub lines: Vec<Line>,
}

impl Program {
    fn push(&mut self, line: Line) -> usize {
        self.lines.push(line);
        self.lines.len() - 1
    }

    fn operands(line: &Line) -> Vec<usize> {
        match *line {
            Line::H(_) | Line::Gamma => vec![],
            Line::Product(a, b) | Line::Commutator(a, b) => vec![a, b],
            Line::Power(a, _) => vec![a],
        }
    }

    /// Values are dropped after their last use, so long commutator chains
    /// on deep levels hold only a few permutations at a time.
    pub fn evaluate(&self, h: &[Perm], gamma: &Perm) -> Perm {
        let n = self.lines.len();
        let mut last_use: Vec<usize> = (0..n).collect();
        for (i, line) in self.lines.iter().enumerate() {
            for a in Self::operands(line) {
                last_use[a] = i;
            }
        }
        let mut values: Vec<Option<Perm>> = vec![None; n];
        for (i, line) in self.lines.iter().enumerate() {
            let get = |a: usize| values[a].as_ref().expect("operand still live");
            let v = match *line {
                Line::H(j) => h[j].clone(),
                Line::Gamma => gamma.clone(),
                Line::Product(a, b) => get(a).compose(get(b)),
                Line::Commutator(a, b) => {
                    let (x, y) = (get(a), get(b));
                    x.compose(y).compose(&x.inverse()).compose(&y.inverse())
                }
                Line::Power(a, k) => get(a).pow(k as i64),
            };
            for a in Self::operands(line) {
                if last_use[a] == i {
                    values[a] = None;
                }
            }
            values[i] = Some(v);
        }
        values
            .pop()
            .flatten()
            .unwrap_or_else(|| Perm::identity(gamma.degree()))
    }
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = |i: usize| match self.lines[i] {
            Line::H(j) => format!("h{}", j + 1),
            Line::Gamma => "γ".to_string(),
            _ => format!("y{i}"),
        };
        let mut first = true;
        for (i, line) in self.lines.iter().enumerate() {
            let rhs = match *line {
                Line::H(_) | Line::Gamma => continue,
                Line::Product(a, b) => format!("{} {}", name(a), name(b)),
                Line::Commutator(a, b) => format!("[{}, {}]", name(a), name(b)),
                Line::Power(a, k) => format!("{}^{k}", name(a)),
            };
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "y{i} = {rhs}")?;
        }
        match self.lines.len().checked_sub(1) {
            Some(i) if first => write!(f, "{}", name(i)),
            None => write!(f, "e"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerConfig {
    pub k: usize,
    pub count: usize,
    pub gamma_budget: usize,
    /// Commutator steps allowed while looking for an element normalizing `H`.
    pub commutator_steps: usize,
    /// Index certificates are issued on `n_i, n_i+1, …` (this many levels) and on `M`.
    pub certificate_levels: usize,
    /// Certificates on levels with at most this many leaves are also recomputed
    /// with stabilizer chains.
    pub exact_max_leaves: usize,
    /// Highest level tried for an index-`p^(k−1)` subgroup, and for `m` when
    /// the catalog does not record it.
    pub max_base_level: usize,
    pub max_quotient_elements: usize,
}

impl Default for TowerConfig {
    fn default() -> Self {
        TowerConfig {
            k: 1,
            count: 5,
            gamma_budget: 100_000,
            commutator_steps: 100_000,
            certificate_levels: 2,
            exact_max_leaves: 256,
            max_base_level: 4,
            max_quotient_elements: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaComponent {
    pub vertex: Vertex,
    pub word: String,
}

/// `[⟨H, h̃⟩ : H] = p` on one level, from memberships alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCertificate {
    pub level: usize,
    pub outside_h: bool,
    /// `h̃ H h̃⁻¹ = H`, checked on the generators of `H`.
    pub normalizes_h: bool,
    pub p_th_power_in_h: bool,
    pub outside_g: bool,
    pub index_g_over_h: String,
    /// `[G : H]·p` when `h̃ ∉ G`, `[G : H]/p` when `h̃ ∈ G`; absent unless the
    /// first three checks hold.
    pub com_index: Option<String>,
    /// The same index from stabilizer chains, on small levels when the
    /// intersection search finishes within budget.
    pub exact: Option<CommCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctWitness {
    pub j: usize,
    pub level: usize,
    /// `h̃_j ∉ H` on level `n_j`.
    pub earlier_outside_h: bool,
    /// `h̃_i ∈ H` on level `n_j`, so `H̃_i` and `H` agree there.
    pub later_inside_h: bool,
}

impl DistinctWitness {
    pub fn verified(&self) -> bool {
        self.earlier_outside_h && self.later_inside_h
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerEntry {
    pub index: usize,
    pub gamma_depth: usize,
    /// Nonidentity components of `γ_i ∈ X^depth ⋆ G`.
    pub gamma: Vec<GammaComponent>,
    /// Level on which `⟨H, γ_i⟩` is faithful modulo `stab_G`: `max(depth + m, N)`.
    pub faithful_level: usize,
    pub n: usize,
    /// `h̃_i` over the generators of `H` (`h1, h2, …`) and `γ`.
    pub h_tilde: String,
    pub h_tilde_program: Program,
    /// `h̃_i` lies in `H` on level `n_{i−1}`.
    pub consistent: bool,
    pub certificates: Vec<ExtensionCertificate>,
    pub distinct_from: Vec<DistinctWitness>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub group: String,
    pub params: Params,
    pub p: u32,
    pub config: TowerConfig,
    /// `stab(m+1) = X ⋆ stab(m)`.
    pub m: usize,
    /// `N` with `stab(N) ≤ H`; 0 when `H = G`.
    pub base_level: usize,
    pub h_generators: Vec<String>,
    /// `H` was pulled back from a level quotient through Schreier words.
    pub h_from_quotient: bool,
    pub entries: Vec<TowerEntry>,
    pub diagnostics: Vec<String>,
    pub complete: bool,
}

impl TowerReport {
    pub fn passed(&self) -> bool {
        self.complete && self.entries.iter().all(|e| e.passed)
    }
}

/// `H` of index `p^(k−1)` containing `stab(N)`: the preimage of a chain of
/// index-`p` subgroups of `G_N`, generated by Schreier words.
fn subnormal_preimage(
    g: &SelfSimilarGroup,
    k: usize,
    max_level: usize,
) -> Result<(usize, Vec<Word>, PermGroup)> {
    let p = g.degree() as u32;
    let target = BigUint::from(p).pow(k as u32 - 1);
    for level in 1..=max_level {
        let q = level_quotient(g, level);
        if q.group().order() < target {
            continue;
        }
        let mut u = (**q.group()).clone();
        let mut ok = true;
        for _ in 1..k {
            match index_p_subgroups(&u, p).subgroups.into_iter().next() {
                Some(next) => u = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        // left cosets x·U under left multiplication
        let gens = g.generator_words();
        let perms: Vec<Perm> = q.generator_perms().to_vec();
        let mut reps: Vec<(Perm, Word)> = vec![(Perm::identity(q.leaves()), Word::empty())];
        let find = |reps: &[(Perm, Word)], x: &Perm| {
            reps.iter().position(|(r, _)| u.contains(&r.inverse().compose(x)))
        };
        let mut i = 0;
        while i < reps.len() {
            for (s, w) in perms.iter().zip(&gens) {
                let x = s.compose(&reps[i].0);
                if find(&reps, &x).is_none() {
                    let word = w.concat(&reps[i].1);
                    reps.push((x, word));
                }
            }
            i += 1;
        }
        let mut words: Vec<Word> = Vec::new();
        for (r, t) in &reps {
            for (s, w) in perms.iter().zip(&gens) {
                let j = find(&reps, &s.compose(r)).expect("cosets are closed");
                let schreier = reps[j].1.inverse().concat(w).concat(t);
                if !schreier.is_empty()
                    && !words.contains(&schreier)
                    && !words.contains(&schreier.inverse())
                {
                    words.push(schreier);
                }
            }
        }
        return Ok((level, words, u));
    }
    Err(Error::Inconclusive(format!(
        "no subgroup of index p^{} found up to level {max_level}",
        k - 1
    )))
}

struct Context<'a> {
    g: &'a SelfSimilarGroup,
    h_words: &'a [Word],
    gamma: &'a BranchOracle,
    h: SubgroupOracle<'a>,
}

impl Context<'_> {
    fn h_perms(&self, level: usize) -> Vec<Perm> {
        self.h_words
            .iter()
            .map(|w| self.g.system().word_leaf_perm(w, level))
            .collect()
    }

    fn gamma_perm(&self, depth: usize, comps: &[Word], level: usize) -> Perm {
        let d = self.g.degree();
        if level <= depth {
            return Perm::identity(d.pow(level as u32));
        }
        let perms: Vec<Perm> = comps
            .iter()
            .map(|w| self.g.system().word_leaf_perm(w, level - depth))
            .collect();
        embed_blocks(&perms, d, depth)
    }

    fn evaluate(&self, program: &Program, depth: usize, comps: &[Word], level: usize) -> Perm {
        program.evaluate(&self.h_perms(level), &self.gamma_perm(depth, comps, level))
    }

    /// Starting from `γ` or `γ·h_start`, replaces the element by its commutator
    /// with a generator of `H` until it normalizes `H`; the level quotient is a
    /// finite `p`-group, so this ends. The result is powered down to order `p`
    /// modulo `H`.
    fn normalizing_element(
        &self,
        gamma: &Perm,
        level: usize,
        start: Option<usize>,
        max_steps: usize,
    ) -> Option<(Program, Perm)> {
        let p = self.g.degree() as u32;
        let h_perms = self.h_perms(level);
        let mut program = Program::default();
        let h_lines: Vec<usize> = (0..h_perms.len()).map(|i| program.push(Line::H(i))).collect();
        let mut current = program.push(Line::Gamma);
        if let Some(s) = start {
            current = program.push(Line::Product(current, h_lines[s]));
        }
        let mut y = program.evaluate(&h_perms, gamma);
        if self.h.contains(&y, level) {
            return None;
        }
        let mut steps = 0;
        'descend: loop {
            let y_inv = y.inverse();
            for (i, hp) in h_perms.iter().enumerate() {
                let c = y.compose(hp).compose(&y_inv).compose(&hp.inverse());
                if !self.h.contains(&c, level) {
                    steps += 1;
                    if steps > max_steps {
                        return None;
                    }
                    current = program.push(Line::Commutator(current, h_lines[i]));
                    y = c;
                    continue 'descend;
                }
            }
            break;
        }
        loop {
            let next = y.pow(p as i64);
            if self.h.contains(&next, level) {
                return Some((program, y));
            }
            y = next;
            current = program.push(Line::Power(current, p));
        }
    }

    fn certificate(
        &self,
        h_tilde: &Perm,
        level: usize,
        exact_max_leaves: usize,
        budget: &SearchBudget,
    ) -> Result<ExtensionCertificate> {
        let p = self.g.degree() as u32;
        let h_perms = self.h_perms(level);
        let inv = h_tilde.inverse();
        let outside_h = !self.h.contains(h_tilde, level);
        let normalizes_h = h_perms
            .iter()
            .all(|x| self.h.contains(&h_tilde.compose(x).compose(&inv), level));
        let p_th_power_in_h = self.h.contains(&h_tilde.pow(p as i64), level);
        let outside_g = !self.gamma.contains(h_tilde, level);
        let index = self.h.index(level);
        let com_index = (outside_h && normalizes_h && p_th_power_in_h).then(|| {
            if outside_g {
                (&index * p).to_string()
            } else {
                (&index / p).to_string()
            }
        });
        let leaves = h_tilde.degree();
        let exact = if leaves <= exact_max_leaves {
            let g_l = level_quotient(self.g, level).group().clone();
            let tilde = PermGroup::from_redundant(
                leaves,
                h_perms.into_iter().chain(std::iter::once(h_tilde.clone())),
            )?;
            match com_index_groups(level, &g_l, &tilde, budget) {
                Ok(c) => Some(c),
                Err(e) if e.is_inconclusive() => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(ExtensionCertificate {
            level,
            outside_h,
            normalizes_h,
            p_th_power_in_h,
            outside_g,
            index_g_over_h: index.to_string(),
            com_index,
            exact,
        })
    }
}

/// `m` with `stab(m+1) = X ⋆ stab(m)`: the catalog value, else the first
/// `m` whose `stab(m) ≤ K` holds on two consecutive levels.
pub fn branching_level(g: &SelfSimilarGroup, max_m: usize) -> Result<usize> {
    if let Some(m) = g.branch().stab_level {
        return Ok(m);
    }
    discover_m(g, max_m, 2)?.ok_or_else(|| {
        Error::Inconclusive(format!("no level m ≤ {max_m} with stab(m) inside K for `{}`", g.name()))
    })
}

/// Builds `count` pairs `(H̃_i, n_i)` with `[H̃_i : H] = p` certified at finite levels.
pub fn build_extension_tower(
    g: &SelfSimilarGroup,
    config: &TowerConfig,
    budget: &SearchBudget,
) -> Result<TowerReport> {
    if config.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let p = g.degree() as u32;
    let m = branching_level(g, config.max_base_level)?;
    let oracle = BranchOracle::new(g, m, config.max_quotient_elements)?;
    let (base_level, h_words, h) = if config.k == 1 {
        (0, g.generator_words(), SubgroupOracle::whole(&oracle))
    } else {
        let (n, words, u) = subnormal_preimage(g, config.k, config.max_base_level)?;
        (n, words, SubgroupOracle::preimage(&oracle, n, u))
    };
    let mut report = TowerReport {
        group: g.name().to_string(),
        params: g.params().clone(),
        p,
        config: config.clone(),
        m,
        base_level,
        h_generators: h_words.iter().map(|w| g.system().format_word(w)).collect(),
        h_from_quotient: config.k > 1,
        entries: Vec::new(),
        diagnostics: Vec::new(),
        complete: false,
    };
    let cx = Context {
        g,
        h_words: &h_words,
        gamma: &oracle,
        h,
    };
    let expected = BigUint::from(p).pow(config.k as u32).to_string();
    // (depth, components, program) of each accepted entry
    let mut built: Vec<(usize, Vec<Word>, Program)> = Vec::new();
    let mut n_prev = 0;
    for i in 1..=config.count {
        let depth = n_prev.max(1);
        let level = (depth + m).max(base_level);
        let mut tested = 0;
        let found = search_gamma(g, depth, level, config.gamma_budget, &mut tested, &mut |perm| {
            !oracle.contains(perm, level)
        })?;
        let Some((comps, gamma_perm)) = found else {
            report.diagnostics.push(format!(
                "entry {i}: no γ in X^{depth} ⋆ G outside G on level {level} among {tested} candidates"
            ));
            break;
        };
        let mut fallback = None;
        let mut chosen = None;
        for start in std::iter::once(None).chain((0..h_words.len()).map(Some)) {
            if let Some((prog, perm)) =
                cx.normalizing_element(&gamma_perm, level, start, config.commutator_steps)
            {
                if !oracle.contains(&perm, level) {
                    chosen = Some(prog);
                    break;
                }
                fallback.get_or_insert(prog);
            }
        }
        let Some(program) = chosen.or(fallback) else {
            report.diagnostics.push(format!(
                "entry {i}: no element normalizing H within {} commutator steps on level {level}",
                config.commutator_steps
            ));
            break;
        };

        // membership in H is inherited downward, so the first level outside H starts a run
        let n_i = (n_prev + 1..=level)
            .find(|&l| !cx.h.contains(&cx.evaluate(&program, depth, &comps, l), l))
            .expect("h̃ lies outside H on the faithful level");
        let consistent =
            n_prev == 0 || cx.h.contains(&cx.evaluate(&program, depth, &comps, n_prev), n_prev);

        let mut levels: Vec<usize> = (n_i..n_i + config.certificate_levels).collect();
        if !levels.contains(&level) {
            levels.push(level);
        }
        let mut certificates = Vec::new();
        for &l in &levels {
            let h_tilde = cx.evaluate(&program, depth, &comps, l);
            certificates.push(cx.certificate(&h_tilde, l, config.exact_max_leaves, budget)?);
        }

        let mut distinct_from = Vec::new();
        for (j, (prev, (pd, pc, pp))) in report.entries.iter().zip(&built).enumerate() {
            let l = prev.n;
            distinct_from.push(DistinctWitness {
                j: j + 1,
                level: l,
                earlier_outside_h: !cx.h.contains(&cx.evaluate(pp, *pd, pc, l), l),
                later_inside_h: cx.h.contains(&cx.evaluate(&program, depth, &comps, l), l),
            });
        }

        let certified = certificates.iter().all(|c| {
            c.com_index.as_deref() == Some(expected.as_str())
                && c.exact.as_ref().is_none_or(|e| e.com_index == expected)
        });
        let passed = consistent && certified && distinct_from.iter().all(DistinctWitness::verified);
        let vertices = Vertex::level_vertices(g.degree(), depth);
        report.entries.push(TowerEntry {
            index: i,
            gamma_depth: depth,
            gamma: comps
                .iter()
                .zip(vertices)
                .filter(|(w, _)| !w.is_empty())
                .map(|(w, v)| GammaComponent {
                    vertex: v,
                    word: g.system().format_word(w),
                })
                .collect(),
            faithful_level: level,
            n: n_i,
            h_tilde: program.to_string(),
            h_tilde_program: program.clone(),
            consistent,
            certificates,
            distinct_from,
            passed,
        });
        built.push((depth, comps, program));
        n_prev = n_i;
    }
    report.complete = report.entries.len() == config.count;
    Ok(report)
}

/// Rebuilds the tower from the stored group and configuration and compares.
pub fn replay_tower(report: &TowerReport, budget: &SearchBudget) -> Result<bool> {
    let g = builtin(&report.group, &report.params)?;
    Ok(build_extension_tower(&g, &report.config, budget)? == *report)
}

/// Entry counts by verdict, for summaries.
pub fn tower_summary(report: &TowerReport) -> BTreeMap<&'static str, usize> {
    let passed = report.entries.iter().filter(|e| e.passed).count();
    BTreeMap::from([
        ("entries", report.entries.len()),
        ("passed", passed),
        ("failed", report.entries.len() - passed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grig() -> SelfSimilarGroup {
        builtin("grigorchuk", &Params::default()).unwrap()
    }

    #[test]
    fn gamma_found_outside() {
        let g = grig();
        let w = find_gamma_outside(&g, 1, 4, 10_000).unwrap();
        assert!(!level_quotient(&g, 4).group().contains(&w.perm));
        assert_eq!(w.element.leaf_perm(4), w.perm);
        assert_eq!(g.system().format_word(&w.components[0]), "a");
        assert!(w.components[1].is_empty());
    }

    #[test]
    fn programs_evaluate_and_print() {
        let mut prog = Program::default();
        let h = prog.push(Line::H(0));
        let gm = prog.push(Line::Gamma);
        let c = prog.push(Line::Commutator(gm, h));
        prog.push(Line::Power(c, 2));
        assert_eq!(prog.to_string(), "y2 = [γ, h1]; y3 = y2^2");
        let a = Perm::from_images(vec![1, 0, 2]).unwrap();
        let b = Perm::from_images(vec![0, 2, 1]).unwrap();
        let comm = b.compose(&a).compose(&b.inverse()).compose(&a.inverse());
        assert_eq!(prog.evaluate(&[a], &b), comm.pow(2));
        assert_eq!(Program::default().to_string(), "e");
    }

    #[test]
    fn grigorchuk_tower_small() {
        let g = grig();
        let config = TowerConfig {
            count: 2,
            ..TowerConfig::default()
        };
        let r = build_extension_tower(&g, &config, &SearchBudget::default()).unwrap();
        assert!(r.passed(), "{:?}", r.diagnostics);
        assert_eq!(r.m, 3);
        assert_eq!(r.entries[0].gamma_depth, 1);
        assert_eq!(r.entries[1].gamma_depth, r.entries[0].n);
        for e in &r.entries {
            for c in &e.certificates {
                assert_eq!(c.com_index.as_deref(), Some("2"));
                if let Some(x) = &c.exact {
                    assert_eq!(x.com_index, "2");
                }
            }
        }
        assert!(r.entries[0].certificates.iter().any(|c| c.exact.is_some()));
    }
}
