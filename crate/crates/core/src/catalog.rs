//! Example groups and the structural builders `X^n ⋆ (−)` and `Q_n`.
//!
//! Every builtin uses `σ = (1 2 … d)` as its reference cycle.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recursion::{
    Element, Generator, GeneratorSpec, RecursionSystem, RootPerm, Vertex, Word,
};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub p: Option<u32>,
    pub vector: Option<Vec<u32>>,
}

impl Params {
    pub fn prime(p: u32) -> Self {
        Params {
            p: Some(p),
            vector: None,
        }
    }

    pub fn with_vector(p: u32, vector: Vec<u32>) -> Self {
        Params {
            p: Some(p),
            vector: Some(vector),
        }
    }
}

/// Claimed branching data, checked only at finite levels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BranchData {
    pub k_generators: Vec<Word>,
    /// `K` is the normal closure of `k_generators` rather than the subgroup they generate.
    pub k_normal_closure: bool,
    /// The group is regular branch over its commutator subgroup.
    pub commutator_branching: bool,
    /// Some `m` with `stab(m) ≤ K`, once known.
    pub stab_level: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SelfSimilarGroup {
    name: String,
    params: Params,
    system: Arc<RecursionSystem>,
    generators: Vec<u32>,
    branch: BranchData,
}

pub const BUILTINS: &[(&str, &str)] = &[
    ("grigorchuk", "first Grigorchuk group ⟨a, b, c, d⟩ on the binary tree"),
    ("twisted_twin", "twisted twin ⟨a, beta, gamma, delta⟩ on the binary tree"),
    ("gupta_sidki", "Gupta–Sidki p-group ⟨x, y⟩ (--p odd prime, default 3)"),
    ("gs_variant", "Gupta–Sidki variant (--p prime ≥ 7, --vector of length p−3 with i1 ≠ 0)"),
    ("fabrykowski_gupta", "Fabrykowski–Gupta group ⟨a, b⟩ (--p odd prime, default 3)"),
    ("egs", "EGS group ⟨a, b, c⟩ (--p odd prime, --vector of length p−1, non-symmetric)"),
    ("adding_machine", "binary adding machine ⟨t⟩, t = (1, t)σ"),
    ("dihedral", "infinite dihedral ⟨t, delta⟩ with delta = (delta, delta)σ"),
    ("adding_machine_u", "⟨t, u⟩ with u = (u, t⁻¹u) the 2-adic negation"),
];

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

fn odd_prime(params: &Params, default: u32) -> Result<u32> {
    let p = params.p.unwrap_or(default);
    if p.is_multiple_of(2) || !is_prime(p) {
        return Err(Error::InvalidParameter(format!("p = {p} must be an odd prime")));
    }
    Ok(p)
}

fn cycle_images(d: usize) -> Vec<usize> {
    (0..d).map(|x| (x + 1) % d + 1).collect()
}

fn power(name: &str, k: u32) -> String {
    match k {
        0 => "e".to_string(),
        1 => name.to_string(),
        _ => format!("{name}^{k}"),
    }
}

fn spec(name: &str, perm: Vec<usize>, sections: Vec<String>) -> GeneratorSpec {
    GeneratorSpec {
        name: name.to_string(),
        perm,
        sections,
    }
}

fn identity(d: usize) -> Vec<usize> {
    (1..=d).collect()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn builtin(name: &str, params: &Params) -> Result<SelfSimilarGroup> {
    let no_params = |params: &Params| -> Result<()> {
        if params.p.is_some_and(|p| p != 2) || params.vector.is_some() {
            return Err(Error::InvalidParameter(format!("`{name}` takes no parameters")));
        }
        Ok(())
    };
    let (d, specs, branch, stored) = match name {
        "grigorchuk" => {
            no_params(params)?;
            let specs = vec![
                spec("a", vec![2, 1], strings(&["e", "e"])),
                spec("b", vec![1, 2], strings(&["a", "c"])),
                spec("c", vec![1, 2], strings(&["a", "d"])),
                spec("d", vec![1, 2], strings(&["e", "b"])),
            ];
            let branch = vec!["a b a b", "b a d a b a d a", "a b a d a b a d"];
            (2, specs, (branch, false, false), Params::default())
        }
        "twisted_twin" => {
            no_params(params)?;
            let specs = vec![
                spec("a", vec![2, 1], strings(&["e", "e"])),
                spec("beta", vec![1, 2], strings(&["gamma", "a"])),
                spec("gamma", vec![1, 2], strings(&["a", "delta"])),
                spec("delta", vec![1, 2], strings(&["e", "beta"])),
            ];
            let branch = vec![
                "a^-1 beta^-1 a beta",
                "beta^-1 gamma^-1 beta gamma",
                "beta^-1 delta^-1 beta delta",
                "gamma^-1 delta^-1 gamma delta",
                "beta delta gamma",
            ];
            (2, specs, (branch, true, false), Params::default())
        }
        "gupta_sidki" => {
            let p = odd_prime(params, 3)?;
            if params.vector.is_some() {
                return Err(Error::InvalidParameter("`gupta_sidki` takes no vector".into()));
            }
            let d = p as usize;
            let mut y = vec!["x".to_string(), "x^-1".to_string()];
            y.extend(std::iter::repeat_n("e".to_string(), d - 3));
            y.push("y".into());
            let specs = vec![
                spec("x", cycle_images(d), vec!["e".into(); d]),
                spec("y", identity(d), y),
            ];
            (d, specs, (vec![], false, true), Params::prime(p))
        }
        "gs_variant" => {
            let p = params.p.unwrap_or(7);
            if p < 7 || !is_prime(p) {
                return Err(Error::InvalidParameter(format!("p = {p} must be a prime ≥ 7")));
            }
            let d = p as usize;
            let vector = params.vector.clone().unwrap_or_else(|| vec![1; d - 3]);
            if vector.len() != d - 3 {
                return Err(Error::InvalidParameter(format!(
                    "vector must have p − 3 = {} entries",
                    d - 3
                )));
            }
            if vector.iter().any(|&i| i >= p) {
                return Err(Error::InvalidParameter("entries must lie in 0..p".into()));
            }
            if vector[0] == 0 {
                return Err(Error::InvalidParameter("i1 must be nonzero".into()));
            }
            let mut y: Vec<String> = vector.iter().map(|&i| power("x", i)).collect();
            y.extend(["e", "e", "y"].map(String::from));
            let specs = vec![
                spec("x", cycle_images(d), vec!["e".into(); d]),
                spec("y", identity(d), y),
            ];
            (d, specs, (vec![], false, true), Params::with_vector(p, vector))
        }
        "fabrykowski_gupta" => {
            let p = odd_prime(params, 3)?;
            if params.vector.is_some() {
                return Err(Error::InvalidParameter("`fabrykowski_gupta` takes no vector".into()));
            }
            let d = p as usize;
            let mut b = vec!["a".to_string()];
            b.extend(std::iter::repeat_n("e".to_string(), d - 2));
            b.push("b".into());
            let specs = vec![
                spec("a", cycle_images(d), vec!["e".into(); d]),
                spec("b", identity(d), b),
            ];
            (d, specs, (vec![], false, false), Params::prime(p))
        }
        "egs" => {
            let p = odd_prime(params, 3)?;
            let d = p as usize;
            let vector = params.vector.clone().unwrap_or_else(|| {
                let mut v = vec![0; d - 1];
                v[0] = 1;
                v
            });
            if vector.len() != d - 1 {
                return Err(Error::InvalidParameter(format!(
                    "vector must have p − 1 = {} entries",
                    d - 1
                )));
            }
            if vector.iter().any(|&i| i >= p) {
                return Err(Error::InvalidParameter("entries must lie in 0..p".into()));
            }
            // i_j vs i_{p−j} for j = 1..p−1
            if (0..d - 1).all(|j| vector[j] == vector[d - 2 - j]) {
                return Err(Error::InvalidParameter(
                    "symmetric vector: need i_j ≠ i_(p−j) for some j".into(),
                ));
            }
            let powers: Vec<String> = vector.iter().map(|&i| power("a", i)).collect();
            let mut b = powers.clone();
            b.push("b".into());
            let mut c = vec!["c".to_string()];
            c.extend(powers);
            let specs = vec![
                spec("a", cycle_images(d), vec!["e".into(); d]),
                spec("b", identity(d), b),
                spec("c", identity(d), c),
            ];
            (d, specs, (vec![], false, true), Params::with_vector(p, vector))
        }
        "adding_machine" => {
            no_params(params)?;
            let specs = vec![spec("t", vec![2, 1], strings(&["e", "t"]))];
            (2, specs, (vec![], false, false), Params::default())
        }
        "dihedral" => {
            no_params(params)?;
            let specs = vec![
                spec("t", vec![2, 1], strings(&["e", "t"])),
                spec("delta", vec![2, 1], strings(&["delta", "delta"])),
            ];
            (2, specs, (vec![], false, false), Params::default())
        }
        "adding_machine_u" => {
            no_params(params)?;
            let specs = vec![
                spec("t", vec![2, 1], strings(&["e", "t"])),
                spec("u", vec![1, 2], strings(&["u", "t^-1 u"])),
            ];
            (2, specs, (vec![], false, false), Params::default())
        }
        _ => {
            return Err(Error::InvalidParameter(format!("unknown catalog group `{name}`")));
        }
    };
    let system = RecursionSystem::from_specs(d, &specs)?;
    let (k_words, k_normal_closure, commutator_branching) = branch;
    let k_generators = k_words
        .iter()
        .map(|w| system.parse_word(w))
        .collect::<Result<Vec<_>>>()?;
    let generators = (0..specs.len() as u32).collect();
    Ok(SelfSimilarGroup {
        name: name.to_string(),
        params: stored,
        system,
        generators,
        branch: BranchData {
            k_generators,
            k_normal_closure,
            commutator_branching,
            stab_level: None,
        },
    })
}

impl SelfSimilarGroup {
    /// The group generated by every generator of a user-supplied system.
    pub fn custom(name: &str, system: Arc<RecursionSystem>) -> Self {
        let generators = (0..system.generators().len() as u32).collect();
        SelfSimilarGroup {
            name: name.to_string(),
            params: Params::default(),
            system,
            generators,
            branch: BranchData::default(),
        }
    }

    /// The subgroup generated by the named generators of `system`.
    pub fn generated_by(name: &str, system: Arc<RecursionSystem>, names: &[&str]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidParameter("empty generating set".into()));
        }
        let generators = names
            .iter()
            .map(|n| {
                system.generator_index(n).ok_or_else(|| Error::UnknownGenerator {
                    name: n.to_string(),
                    location: "generating set".into(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(SelfSimilarGroup {
            name: name.to_string(),
            params: Params::default(),
            system,
            generators,
            branch: BranchData::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn system(&self) -> &Arc<RecursionSystem> {
        &self.system
    }

    pub fn degree(&self) -> usize {
        self.system.degree()
    }

    pub fn branch(&self) -> &BranchData {
        &self.branch
    }

    pub fn set_stab_level(&mut self, m: usize) {
        self.branch.stab_level = Some(m);
    }

    pub fn generator_indices(&self) -> &[u32] {
        &self.generators
    }

    pub fn generator_words(&self) -> Vec<Word> {
        self.generators.iter().map(|&i| Word::generator(i)).collect()
    }

    pub fn generators(&self) -> Vec<Element> {
        self.generator_words()
            .into_iter()
            .map(|w| Element::new(self.system.clone(), w))
            .collect()
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.generators
            .iter()
            .map(|&i| self.system.generators()[i as usize].name.clone())
            .collect()
    }

    pub fn element(&self, word: &str) -> Result<Element> {
        Element::parse(&self.system, word)
    }

    pub fn k_elements(&self) -> Vec<Element> {
        self.branch
            .k_generators
            .iter()
            .map(|w| Element::new(self.system.clone(), w.clone()))
            .collect()
    }
}

/// Checks that every section of every generator acts at its root as a power of `σ`.
pub fn validate_sylow(group: &SelfSimilarGroup, budget: usize) -> Result<()> {
    let system = group.system();
    let d = system.degree();
    let mut seen: HashSet<Word> = HashSet::new();
    for (&g, name) in group.generator_indices().iter().zip(group.generator_names()) {
        let mut queue = VecDeque::from([(Word::generator(g), Vertex::root())]);
        seen.insert(Word::generator(g));
        while let Some((w, v)) = queue.pop_front() {
            let dec = system.decompose(&w);
            if dec.perm.cycle_exponent().is_none() {
                return Err(Error::NotSylow {
                    generator: name,
                    vertex: v.to_string(),
                });
            }
            for x in 0..d {
                let s = &dec.sections[x];
                if seen.insert(s.clone()) {
                    if seen.len() > budget {
                        return Err(Error::Inconclusive(format!(
                            "section closure exceeds {budget} words"
                        )));
                    }
                    queue.push_back((s.clone(), v.child(x as u32)));
                }
            }
        }
    }
    Ok(())
}

/// `X^n ⋆ (components)`: the element fixing level `n` whose section at the
/// `i`-th level-`n` vertex (lexicographic order) is `components[i]`.
pub fn x_star(components: &[Element], n: usize) -> Result<Element> {
    let system = components
        .first()
        .ok_or_else(|| Error::InvalidParameter("no components".into()))?
        .system()
        .clone();
    Ok(x_star_many(&system, &[components.to_vec()], n)?.remove(0))
}

/// Several `X^n ⋆` embeddings built in one extension of `system`, so the
/// results can be multiplied together and with lifted elements of `system`.
pub fn x_star_many(
    system: &Arc<RecursionSystem>,
    tuples: &[Vec<Element>],
    n: usize,
) -> Result<Vec<Element>> {
    let d = system.degree();
    let count = d.pow(n as u32);
    let mut aux: Vec<Generator> = Vec::new();
    let base = system.generators().len() as u32;
    let mut taken: HashSet<String> = system.generators().iter().map(|g| g.name.clone()).collect();
    let fresh = |taken: &mut HashSet<String>| {
        let mut k = taken.len();
        loop {
            let name = format!("_s{k}");
            if taken.insert(name.clone()) {
                return name;
            }
            k += 1;
        }
    };
    let mut roots = Vec::with_capacity(tuples.len());
    for tuple in tuples {
        if tuple.len() != count {
            return Err(Error::InvalidParameter(format!(
                "expected {count} components, got {}",
                tuple.len()
            )));
        }
        if tuple.iter().any(|e| !Arc::ptr_eq(e.system(), system)) {
            return Err(Error::MixedSystems);
        }
        let mut layer: Vec<Word> = tuple.iter().map(|e| e.word().clone()).collect();
        for _ in 0..n {
            layer = layer
                .chunks(d)
                .map(|children| {
                    if children.iter().all(Word::is_empty) {
                        return Word::empty();
                    }
                    let index = base + aux.len() as u32;
                    aux.push(Generator {
                        name: fresh(&mut taken),
                        perm: RootPerm::identity(d),
                        sections: children.to_vec(),
                    });
                    Word::generator(index)
                })
                .collect();
        }
        roots.push(layer.pop().unwrap_or_default());
    }
    let extended = if aux.is_empty() {
        system.clone()
    } else {
        system.extend_with(aux)?
    };
    Ok(roots
        .into_iter()
        .map(|w| Element::new(extended.clone(), w))
        .collect())
}

/// Rotor system over `d` letters: one generator `r_v` acting as `σ` at `v` for each `|v| < n`.
pub fn q_n_generators(d: usize, n: usize) -> Result<Vec<Element>> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidParameter(format!("need d ≥ 2 and n ≥ 1, got d={d}, n={n}")));
    }
    let vertices: Vec<Vertex> = (0..n).flat_map(|l| Vertex::level_vertices(d, l)).collect();
    let name = |v: &Vertex| -> String {
        if v.level() == 0 {
            "r".to_string()
        } else if d <= 9 {
            format!("r{v}")
        } else {
            format!("r_{}", v.to_string().replace('.', "_"))
        }
    };
    let specs: Vec<GeneratorSpec> = vertices
        .iter()
        .map(|v| match v.letters().split_first() {
            None => spec(&name(v), cycle_images(d), vec!["e".into(); d]),
            Some((&x, rest)) => {
                let mut sections = vec!["e".to_string(); d];
                sections[x as usize] = name(&Vertex::from_letters(rest.to_vec()));
                spec(&name(v), identity(d), sections)
            }
        })
        .collect();
    let system = RecursionSystem::from_specs(d, &specs)?;
    Ok((0..specs.len() as u32)
        .map(|i| Element::new(system.clone(), Word::generator(i)))
        .collect())
}
